"""Integrals: exact averaging, conditioning, rectangles, slices, lifts."""

import random

import pytest

import oracles
from filterint.backend import Rat
from filterint.elements import estimate_standard_part
from filterint.integrator import (IntegrableFunction, IntegrationError,
                                  cond_expectation, indicator,
                                  integrate, integrate_findep,
                                  iterated_integral, laurent_decompose_integral,
                                  laurent_expansion, laurent_fn,
                                  lift_real_filter, lipschitz_fn,
                                  probability, product_fn, scale_probe_fn,
                                  slice_fn, standard_integral,
                                  standard_projection, standardizable_fn,
                                  transpose_fn)
from filterint.measures import length_measure
from filterint.products import product_filter
from filterint.regions import IntervalRegion
from filterint.scalars import (LaurentSeries, as_scalar, standard_part,
                               valuation)
from filterint.witness import measure_filter

F = measure_filter(length_measure())


def ident_fn():
    return lipschitz_fn(lambda x: x, Rat(1), Rat(1), "id")


def test_integration_is_linear_exactly():
    f = indicator(IntervalRegion.of(Rat(0), Rat(1, 3)))
    g = ident_fn()
    a, b = Rat(2, 7), Rat(-3, 5)
    combo = IntegrableFunction(
        lambda x: a * f.evaluate(x) + b * g.evaluate(x), "combo")
    el = integrate(combo, F)
    split = a * integrate(f, F) + b * integrate(g, F)
    for level in (1, 4, 9, 16):
        z = F.witness(level)
        assert el.value(z) == split.value(z)


def test_integration_is_monotone_on_witnesses():
    small = indicator(IntervalRegion.of(Rat(1, 4), Rat(1, 2)))
    large = indicator(IntervalRegion.of(Rat(0), Rat(3, 4)))
    for level in (2, 5, 11):
        z = F.witness(level)
        assert integrate(small, F).value(z) <= integrate(large, F).value(z)


def test_indicator_average_matches_membership_count():
    A = IntervalRegion.of(Rat(1, 8), Rat(5, 8))
    el = probability(A, F)
    for level in (3, 7):
        z = F.witness(level)
        members = sum(1 for x in z if A.contains(x))
        assert el.value(z) == Rat(members, z.size())


def test_cond_expectation_is_count_ratio():
    A = IntervalRegion.of(Rat(0), Rat(1, 2))
    B = IntervalRegion.of(Rat(1, 4), Rat(3, 4))
    el = cond_expectation(indicator(B), A, F)
    for level in (2, 6, 12):
        z = F.witness(level, extra=tuple(el.meta.get("requires", ())))
        inside = [x for x in z if A.contains(x)]
        hits = sum(1 for x in inside if B.contains(x))
        assert el.value(z) == Rat(hits, len(inside))
    est = estimate_standard_part(el, F, 12)
    assert est.lower <= Rat(1, 2) <= est.upper


def test_cond_expectation_rejects_disjoint_witness():
    from filterint.snapshots import ExplicitSnapshot
    A = IntervalRegion.of(Rat(3, 4), Rat(1))
    el = cond_expectation(ident_fn(), A, F)
    z = ExplicitSnapshot((Rat(1, 8), Rat(1, 4)))
    with pytest.raises(IntegrationError):
        el.value(z)


def test_standard_integral_shortcut():
    f = indicator(IntervalRegion.of(Rat(0), Rat(1, 4)))
    direct = standard_integral(f, F, 9)
    spelled = estimate_standard_part(integrate(f, F), F, 9)
    assert (direct.lower, direct.upper) == (spelled.lower, spelled.upper)
    assert direct.certified == spelled.certified


def test_rectangle_one_step_equals_iterated(rng):
    P = product_filter(F, measure_filter(length_measure()))
    grid = 16
    for _ in range(25):
        a = rng.randrange(grid)
        b = rng.randrange(a + 1, grid + 1)
        c = rng.randrange(grid)
        d = rng.randrange(c + 1, grid + 1)
        f = product_fn(indicator(IntervalRegion.of(Rat(a, grid),
                                                   Rat(b, grid))),
                       indicator(IntervalRegion.of(Rat(c, grid),
                                                   Rat(d, grid))))
        level = rng.randrange(1, 7)
        z = P.witness(level)
        one = integrate(f, P).value(z)
        two = iterated_integral(f, P.left, P.right).value(z)
        assert one == two


def test_iterated_double_loop_matches_factor_shortcut():
    P = product_filter(F, measure_filter(length_measure()))
    g = indicator(IntervalRegion.of(Rat(0), Rat(1, 2)))
    h = ident_fn()
    fast = product_fn(g, h)
    slow = IntegrableFunction(fast.evaluate, "slow")  # no product tag
    z = P.witness(4)
    assert (iterated_integral(fast, P.left, P.right).value(z)
            == iterated_integral(slow, P.left, P.right).value(z))


def test_transpose_swaps_the_axes():
    P = product_filter(F, measure_filter(length_measure()))
    f = product_fn(indicator(IntervalRegion.of(Rat(0), Rat(1, 4))),
                   ident_fn())
    z = P.witness(5)
    z0, z1 = z.axes
    swapped = transpose_fn(f)
    avg_left = Rat(sum(1 for x in z0 if x < Rat(1, 4)), z0.size())
    direct = integrate(f, P).value(z)
    assert integrate(swapped, P).value(z) != direct or avg_left == 0
    from filterint.snapshots import ProductSnapshot
    zt = ProductSnapshot(z1, z0)
    assert integrate(swapped, P).value(zt) == direct


def test_findep_average_ignores_dummy_coordinates():
    dep = IntegrableFunction(
        lambda xs: xs[0] * xs[2], "x0*x2", dependency={0, 2})
    Fs = lambda i: F
    el = integrate_findep(dep, Fs)
    from filterint.integrator import findep_witness
    zs = findep_witness(Fs, (0, 2), 3)
    v = el.value(zs)
    padded = findep_witness(Fs, (0, 1, 2), 3)
    assert el.value(padded) == v
    with pytest.raises(IntegrationError):
        el.value(findep_witness(Fs, (0,), 3))
    lying = IntegrableFunction(
        lambda xs: xs[0] * xs[1], "hidden", dependency={0})
    with pytest.raises(IntegrationError):
        integrate_findep(lying, Fs).value(findep_witness(Fs, (0, 1), 3))


def _chi_eps_id():
    chi = indicator(IntervalRegion.of(Rat(0), Rat(1, 2)))
    ident = ident_fn()
    return laurent_fn(
        lambda x: (as_scalar(chi.evaluate(x))
                   + LaurentSeries.eps(1) * as_scalar(x)),
        "chi+e*id", slices={0: chi, 1: ident}, bound=Rat(2))


def test_laurent_decompose_recombines_exactly():
    f = _chi_eps_id()
    whole = integrate(f, F)
    out = laurent_decompose_integral(f, F, 0, level=10)
    for level in (1, 3, 8):
        z = F.witness(level)
        assert out["recombined"].value(z) == as_scalar(whole.value(z))
    assert out["coefficient_estimate"].certified
    assert out["standard_coefficient"] == Rat(1, 2)
    grant = F.guarantee(out["coefficient"].meta, 10)
    z = F.witness(10, extra=grant.constraints)
    eta = as_scalar(out["eta"].value(z))
    if not isinstance(eta, LaurentSeries):
        eta = LaurentSeries.from_rational(eta)
    assert eta.is_zero() or valuation(eta) > 0


def test_slice_fn_prefers_declared_integrand():
    f = _chi_eps_id()
    at = slice_fn(f, 0, "at")
    assert at.tags.get("indicator") is not None
    assert slice_fn(f, 1, "at").tags.get("lipschitz") is not None
    below = slice_fn(f, 0, "below")
    assert below.evaluate(Rat(1, 4)).is_zero()
    with pytest.raises(ValueError):
        slice_fn(f, 0, "sideways")


def test_laurent_expansion_scale_ladder():
    f = _chi_eps_id()
    out = laurent_expansion(f, F, 0, 1, 10)
    assert set(out["scales"]) == {0, 1}
    a0, _ = out["scales"][0]
    a1, _ = out["scales"][1]
    assert a0 == Rat(1, 2) and a1 == Rat(1, 2)
    z = F.witness(10)
    report = out["check"](z)
    assert [entry[0] for entry in report][:2] == [0, 1]
    raw = laurent_fn(
        lambda x: LaurentSeries.from_rational(
            Rat(1) if x * 3 < 1 else Rat(0)), "no-slices")
    with pytest.raises(IntegrationError):
        laurent_expansion(raw, F, 0, 0, 6)


def test_lifted_filter_projects_and_certifies():
    L = lift_real_filter(length_measure(), fiber=3)
    z = L.witness(4)
    base = standard_projection(z)
    assert z.size() == 3 * base.size()
    g = indicator(IntervalRegion.of(Rat(0), Rat(1, 2)))
    lifted = standardizable_fn(g)
    est = estimate_standard_part(integrate(lifted, L), L, 8)
    assert est.certified
    assert est.contains(Rat(1, 2))


def test_lifted_perturbation_is_invisible():
    L = lift_real_filter(length_measure(), fiber=2)
    g = indicator(IntervalRegion.of(Rat(0), Rat(1, 2)))
    plain = standardizable_fn(g)
    shaken = standardizable_fn(g, perturb=lambda x: Rat(1, 3))
    z = L.witness(6)
    v0 = as_scalar(integrate(plain, L).value(z))
    v1 = as_scalar(integrate(shaken, L).value(z))
    assert standard_part(v0) == standard_part(v1)
    assert v0 != v1


def test_probe_standardizable_flags_fiber_jumps():
    L = lift_real_filter(length_measure(), fiber=2)
    g = ident_fn()
    assert L.probe_standardizable(standardizable_fn(g), 5) is None

    def slot_reader(x):
        s = as_scalar(x)
        return (s - standard_part(s)) * LaurentSeries.eps(-1)

    bad = IntegrableFunction(slot_reader, "slot")
    pair = L.probe_standardizable(bad, 5)
    assert pair is not None
    assert standard_part(pair[0]) == standard_part(pair[1])


def test_scale_probe_has_negative_valuation():
    probe = scale_probe_fn()
    el = integrate(probe, F)
    for level in (1, 4, 9):
        z = F.witness(level, extra=tuple(el.meta["requires"]))
        v = as_scalar(el.value(z))
        assert valuation(v) < 0
    with pytest.raises(ValueError):
        scale_probe_fn(anchor=Rat(1, 2))
