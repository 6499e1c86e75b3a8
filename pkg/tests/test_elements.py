"""Lazy elements: pointwise ring ops, comparison, standard-part estimates."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from filterint.backend import Rat
from filterint.elements import (LazyElement, StandardPartEstimate,
                                embed_constant, estimate_standard_part,
                                requirements, rp_compare)
from filterint.integrator import indicator, integrate, scale_probe_fn
from filterint.regions import IntervalRegion
from filterint.scalars import NEG_INF, POS_INF, OrderDecision
from filterint.measures import length_measure
from filterint.snapshots import ExplicitSnapshot
from filterint.witness import measure_filter

rationals = st.fractions(
    min_value=-4, max_value=4, max_denominator=32).map(
        lambda f: Rat(f.numerator, f.denominator))


def _snap(points):
    return ExplicitSnapshot(tuple(Rat(p, 16) for p in points))


@given(rationals, rationals)
def test_arithmetic_is_pointwise(p, q):
    a = embed_constant(p)
    size = LazyElement(lambda z: Rat(z.size()), "n")
    z = _snap(range(5))
    assert (a + size).value(z) == p + Rat(5)
    assert (a - size).value(z) == p - Rat(5)
    assert (a * size).value(z) == p * Rat(5)
    assert (q + a).value(z) == q + p
    assert (q - a).value(z) == q - p
    assert (-a).value(z) == -p


def test_constant_ignores_snapshot():
    c = embed_constant(Rat(2, 3))
    assert c.value(_snap(range(3))) == Rat(2, 3)
    assert c.value(_snap(range(9))) == Rat(2, 3)
    assert c.meta["kind"] == "constant"


def test_value_is_cached_per_snapshot():
    calls = []

    def ev(z):
        calls.append(z)
        return Rat(z.size())

    a = LazyElement(ev, "counter")
    z = _snap(range(4))
    assert a.value(z) == 4
    assert a.value(z) == 4
    assert len(calls) == 1
    a.value(_snap(range(6)))
    assert len(calls) == 2


def test_requirements_propagate_and_dedup():
    F = measure_filter(length_measure())
    el = integrate(scale_probe_fn(anchor=Rat(0)), F)
    assert requirements(el), "anchored probes carry witness requirements"
    both = el + el
    req = requirements(both)
    descriptions = [c.description for c in req]
    assert len(descriptions) == len(set(descriptions))
    assert len(req) == len(requirements(el))


def test_rp_compare_constants():
    F = measure_filter(length_measure())
    a = embed_constant(Rat(1, 3))
    b = embed_constant(Rat(1, 2))
    assert rp_compare(a, b, F, 4) is OrderDecision.LESS
    assert rp_compare(b, a, F, 4) is OrderDecision.GREATER
    assert rp_compare(a, a, F, 4) is OrderDecision.EQUAL


def test_rp_compare_flipping_sign_is_incomparable():
    F = measure_filter(length_measure())
    flip = LazyElement(lambda z: Rat((-1) ** z.size()), "flip")
    zero = embed_constant(0)
    assert rp_compare(flip, zero, F, 6) is OrderDecision.INCOMPARABLE
    with pytest.raises(ValueError):
        rp_compare(flip, zero, F, 0)


def test_certified_estimates_are_nested():
    F = measure_filter(length_measure())
    A = IntervalRegion.of(Rat(1, 4), Rat(3, 4))
    el = integrate(indicator(A), F)
    prev = None
    for level in (2, 5, 10, 25):
        est = estimate_standard_part(el, F, level)
        assert est.certified
        assert est.contains(Rat(1, 2))
        assert est.width() <= Rat(2, level)
        if prev is not None:
            assert prev.lower <= est.lower and est.upper <= prev.upper
        prev = est


def test_uncertifiable_element_falls_back_to_observed():
    F = measure_filter(length_measure())
    raw = LazyElement(lambda z: Rat(1, z.size()), "1/n")
    est = estimate_standard_part(raw, F, 8)
    assert not est.certified
    assert est.lower <= est.upper
    with pytest.raises(ValueError):
        estimate_standard_part(raw, F, 0)


def test_estimate_interval_semantics():
    est = StandardPartEstimate(Rat(1, 4), Rat(3, 4), 5, True)
    assert est.width() == Rat(1, 2)
    assert est.contains(Rat(1, 2))
    assert not est.contains(Rat(7, 8))
    lo, hi = est
    assert (lo, hi) == (Rat(1, 4), Rat(3, 4))
    unb = StandardPartEstimate(NEG_INF, POS_INF, 1, False)
    assert unb.width() is POS_INF
    assert unb.contains(Rat(100))
    with pytest.raises(ValueError):
        StandardPartEstimate(Rat(1), Rat(0), 1, False)
