"""Snapshots: canonical form, counting, closed-form tree counts."""

import pytest

import oracles
from filterint.backend import Rat
from filterint.filters import grid_values
from filterint.regions import FiniteRegion, IntervalRegion
from filterint.snapshots import (ExplicitSnapshot, ProductSnapshot,
                                 RectangleRegion, SequenceSnapshot,
                                 TreeEvent, TreeSnapshot)


def test_explicit_snapshot_dedups_and_sorts():
    z = ExplicitSnapshot((Rat(1, 2), Rat(1, 4), Rat(1, 2), Rat(3, 4)))
    assert z.size() == 3
    assert list(z) == [Rat(1, 4), Rat(1, 2), Rat(3, 4)]
    assert z.contains(Rat(1, 2)) and not z.contains(Rat(1, 3))


def test_explicit_snapshot_count_dispatch():
    pts = [Rat(j, 8) for j in range(8)]
    z = ExplicitSnapshot(pts)
    assert z.count(IntervalRegion.of(Rat(0), Rat(1, 2))) == 4
    assert z.count(FiniteRegion((Rat(1, 8), Rat(7, 8)))) == 2
    assert z.count(lambda x: x >= Rat(3, 4)) == 2


def test_tree_snapshot_counts_match_enumeration(rng):
    for _ in range(40):
        k = rng.randint(2, 3)
        depth = rng.randint(1, 6)
        z = TreeSnapshot(tuple(range(k)), depth)
        assert z.size() == oracles.tree_size(tuple(range(k)), depth)
        bounds = []
        for coord in rng.sample(range(depth), rng.randint(0, 2)):
            a = rng.randint(0, k - 1)
            bounds.append((coord, a, rng.randint(a + 1, k)))
        ev = TreeEvent(min_len=rng.randint(0, depth), bounds=tuple(bounds))
        want = oracles.tree_event_count(tuple(range(k)), depth,
                                        ev.bounds, ev.min_len)
        assert z.count(ev) == want


def test_grid_tree_counts_match_enumeration(rng):
    for m in (2, 3, 4):
        vals = grid_values(m)
        z = TreeSnapshot(vals, m)
        for _ in range(10):
            a = Rat(rng.randint(0, m), m)
            b = Rat(rng.randint(0, m), m)
            if a > b:
                a, b = b, a
            ev = TreeEvent(bounds=((rng.randint(0, m - 1), a, b),))
            want = oracles.tree_event_count(vals, m, ev.bounds, ev.min_len)
            assert z.count(ev) == want


def test_tree_event_intersection():
    e = TreeEvent.branch(1, 0).intersect(TreeEvent.branch(3, 1))
    assert e.min_len == 4
    assert e.bounds == ((1, 0, 1), (3, 1, 2))
    clash = TreeEvent.branch(2, 0).intersect(TreeEvent.branch(2, 1))
    assert clash.is_empty_marker()
    z = TreeSnapshot((0, 1), 5)
    assert z.count(clash) == 0


def test_tree_snapshot_rejects_plain_regions():
    z = TreeSnapshot((0, 1), 3)
    with pytest.raises(TypeError):
        z.count(IntervalRegion.of(Rat(0), Rat(1, 2)))


def test_product_snapshot_counts_factorwise():
    zx = ExplicitSnapshot([Rat(j, 4) for j in range(4)])
    zy = ExplicitSnapshot([Rat(j, 3) for j in range(3)])
    z = ProductSnapshot(zx, zy)
    assert z.size() == 12
    R = RectangleRegion(IntervalRegion.of(Rat(0), Rat(1, 2)),
                        IntervalRegion.of(Rat(0), Rat(2, 3)))
    assert z.count(R) == 2 * 2
    by_loop = sum(1 for p in z if R.contains(p))
    assert z.count(R) == by_loop


def test_sequence_snapshot_shape():
    from filterint.measures import CantorPoint
    z = SequenceSnapshot(3, CantorPoint((), (0, 1)))
    assert z.n_coords == 3
    assert z.size() == 8
