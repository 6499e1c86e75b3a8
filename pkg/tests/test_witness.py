"""The combinatorial witness and the measure filters built on it."""

import random

import pytest

from filterint.backend import Rat
from filterint.elements import estimate_standard_part
from filterint.integrator import (indicator, integrate, integrate_weighted,
                                  probability)
from filterint.measures import length_measure, mixture_measure
from filterint.regions import IntervalRegion
from filterint.witness import (combinatorial_witness, measure_filter,
                               weighted_filter)


def random_interval(rng, grid=24):
    a = rng.randint(0, grid - 1)
    b = rng.randint(a + 1, grid)
    return IntervalRegion.of(Rat(a, grid), Rat(b, grid))


def lemma_instance(rng):
    Ys = [random_interval(rng) for _ in range(rng.randint(0, 5))]
    if rng.random() < 0.3:
        # an empty region: measure zero, exercises the vacuous branch
        Ys.append(IntervalRegion(()))
    pts = sorted({Rat(rng.randint(0, 47), 48)
                  for _ in range(rng.randint(0, 5))})
    n = rng.randint(1, 50)
    return Ys, pts, n


def check_lemma_clauses(mu, Ys, points, n, z):
    ell = len(points)
    # (1) every requested point is present
    assert all(z.contains(p) for p in points)
    # (2) the witness dwarfs the point list
    assert n * ell < z.size()
    # (3) fresh points stay inside the union when it carries measure
    if any(mu(Y) > 0 for Y in Ys):
        for x in z:
            assert any(Y.contains(x) for Y in Ys) or x in points
    # (4) pairwise count ratios track measure ratios within 1/n, exactly
    counts = [z.count(Y) for Y in Ys]
    measures = [mu(Y) for Y in Ys]
    for i, mi in enumerate(measures):
        if mi == 0:
            continue
        assert counts[i] > 0
        for j, mj in enumerate(measures):
            got = Rat(counts[j], counts[i])
            assert abs(got - mj / mi) < Rat(1, n)


def test_lemma_soundness_random_instances():
    mu = length_measure()
    rng = random.Random(7)
    for trial in range(200):
        Ys, pts, n = lemma_instance(rng)
        z = combinatorial_witness(mu, Ys, pts, n, seed=trial)
        check_lemma_clauses(mu, Ys, pts, n, z)


def test_lemma_zero_measure_branch():
    mu = length_measure()
    Ys = [IntervalRegion(())]
    pts = [Rat(1, 3), Rat(2, 3)]
    z = combinatorial_witness(mu, Ys, pts, 10)
    assert all(z.contains(p) for p in pts)
    assert z.size() > 20
    assert z.count(Ys[0]) == 0


def test_lemma_rejects_bad_level():
    with pytest.raises(ValueError):
        combinatorial_witness(length_measure(), [], [], 0)


def test_measure_filter_certifies_algebra_sets():
    F = measure_filter(length_measure())
    A = IntervalRegion.of(Rat(1, 8), Rat(5, 8))
    for level in (4, 9, 16):
        est = estimate_standard_part(probability(A, F), F, level)
        assert est.certified
        assert est.lower <= Rat(1, 2) <= est.upper
        assert est.width() <= Rat(2, level)


def test_measure_filter_wants_atomless_probability():
    mix = mixture_measure(((Rat(1, 3), Rat(1, 4)),), length_measure(),
                          Rat(3, 4))
    with pytest.raises(ValueError):
        measure_filter(mix)


def test_weighted_filter_carries_mass_points():
    mix = mixture_measure(((Rat(1, 3), Rat(1, 4)),), length_measure(),
                          Rat(3, 4))
    W, partition = weighted_filter(mix)
    for level in (1, 3, 6):
        assert W.witness(level).contains(Rat(1, 3))
    A = IntervalRegion.of(Rat(0), Rat(1, 2))
    # The mixture integral is the weighted sum of per-cell averages; a
    # plain witness average would give every point equal weight and miss
    # the atoms.
    el = integrate_weighted(indicator(A), W, partition)
    est = estimate_standard_part(el, W, 10)
    assert est.certified
    assert est.lower <= mix(A) <= est.upper
    plain = estimate_standard_part(integrate(indicator(A), W), W, 10)
    assert not plain.certified
