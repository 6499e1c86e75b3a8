"""Region algebra: membership, normalization, sampling, descriptors."""

import pytest
from hypothesis import given, settings, strategies as st

from filterint.backend import Rat
from filterint.regions import (DifferenceRegion, FiniteRegion,
                               IntervalRegion, NaturalsRegion, UnionRegion,
                               canonical_key, dyadics_in, format_region,
                               parse_region)

bounds = st.fractions(min_value=0, max_value=1, max_denominator=16).map(
    lambda f: Rat(f.numerator, f.denominator))


def test_interval_half_open_membership():
    A = IntervalRegion.of(Rat(1, 4), Rat(3, 4))
    assert A.contains(Rat(1, 4))
    assert A.contains(Rat(1, 2))
    assert not A.contains(Rat(3, 4))
    assert not A.contains(Rat(7, 8))
    assert A.length() == Rat(1, 2)


def test_interval_normalization_merges_overlaps():
    A = IntervalRegion(((Rat(0), Rat(1, 2)), (Rat(1, 4), Rat(3, 4))))
    assert A.pieces == ((Rat(0), Rat(3, 4)),)
    B = IntervalRegion(((Rat(1, 2), Rat(1, 2)),))
    assert B.pieces == ()


@settings(max_examples=60, deadline=None)
@given(bounds, bounds, bounds)
def test_interval_membership_matches_pieces(a, b, x):
    A = IntervalRegion.of(min(a, b), max(a, b))
    assert A.contains(x) == any(lo <= x < hi for lo, hi in A.pieces)


def test_interval_sampler_distinct_and_inside():
    A = IntervalRegion.of(Rat(0), Rat(1, 2))
    pts = A.sample(20, exclude=(Rat(1, 4),), seed=5)
    assert len(set(pts)) == 20
    assert all(A.contains(p) for p in pts)
    assert Rat(1, 4) not in pts
    assert pts == A.sample(20, exclude=(Rat(1, 4),), seed=5)


def test_finite_region():
    F = FiniteRegion((Rat(1, 3), Rat(1, 3), Rat(2, 3)))
    assert F.points == (Rat(1, 3), Rat(2, 3))
    assert F.contains(Rat(1, 3)) and not F.contains(Rat(1, 2))
    assert F.sample(1, exclude=(Rat(1, 3),)) == [Rat(2, 3)]
    with pytest.raises(ValueError):
        F.sample(3)


def test_dyadics_membership_and_enumeration():
    D = dyadics_in(IntervalRegion.of(Rat(0), Rat(1, 2)))
    assert D.contains(Rat(1, 4))
    assert D.contains(Rat(3, 8))
    assert not D.contains(Rat(1, 3))   # not dyadic
    assert not D.contains(Rat(3, 4))   # outside support
    pts = D.sample(25, seed=1)
    assert len(set(pts)) == 25
    assert all(D.contains(p) for p in pts)


def test_union_and_difference():
    A = IntervalRegion.of(Rat(0), Rat(1, 4))
    B = IntervalRegion.of(Rat(1, 2), Rat(3, 4))
    U = UnionRegion((A, B))
    assert U.contains(Rat(1, 8)) and U.contains(Rat(5, 8))
    assert not U.contains(Rat(3, 8))
    D = DifferenceRegion(IntervalRegion.of(Rat(0), Rat(1)), B)
    assert D.contains(Rat(3, 8)) and not D.contains(Rat(5, 8))


def test_naturals_region():
    N = NaturalsRegion()
    assert N.contains(7) and N.contains(0)
    assert not N.contains(Rat(1, 2))
    assert not N.contains(-3)


def test_canonical_key_orders_mixed_points():
    pts = [Rat(1, 2), 0, Rat(3, 4), 1]
    ordered = sorted(pts, key=canonical_key)
    assert ordered == [0, Rat(1, 2), Rat(3, 4), 1]


def test_descriptor_round_trip():
    for r in (IntervalRegion.of(Rat(0), Rat(1, 2)),
              IntervalRegion(((Rat(0), Rat(1, 4)),
                              (Rat(1, 2), Rat(3, 4)))),
              FiniteRegion((Rat(1, 3), Rat(2, 3)))):
        back = parse_region(format_region(r))
        probe = [Rat(j, 12) for j in range(13)]
        assert [r.contains(x) for x in probe] == \
               [back.contains(x) for x in probe]


def test_parse_region_rejects_unknown():
    with pytest.raises(ValueError):
        parse_region("banana 0 1")
