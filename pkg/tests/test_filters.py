"""Filter bases: witness construction, constraint satisfaction, caps."""

import pytest

from filterint.backend import Rat
from filterint.filters import (full_finite_filter, initial_segment_filter,
                               point_inclusion, tree_filter, tree_q_filter)
from filterint.snapshots import TreeSnapshot


def test_witness_satisfies_all_lower_constraints():
    F = initial_segment_filter()
    for level in (1, 3, 7, 12):
        z = F.witness(level)
        for i in range(level):
            assert F.generator(i).check(z)


def test_witness_memoized_and_deterministic():
    F = initial_segment_filter()
    assert F.witness(5) is F.witness(5)
    G = initial_segment_filter()
    assert list(F.witness(5)) == list(G.witness(5))


def test_point_constraints_are_honored():
    F = initial_segment_filter()
    z = F.witness(3, extra=(point_inclusion(17),))
    assert z.contains(17)
    assert all(z.contains(j) for j in range(3))


def test_initial_segment_shape():
    F = initial_segment_filter()
    z = F.witness(6)
    assert list(z) == list(range(6))


def test_full_finite_filter_is_the_whole_space():
    F = full_finite_filter((0, 1))
    for level in (1, 2, 5):
        assert list(F.witness(level)) == [0, 1]
    with pytest.raises(ValueError):
        full_finite_filter(())


def test_full_finite_rejects_foreign_points():
    F = full_finite_filter((0, 1))
    with pytest.raises(ValueError):
        F.witness(1, extra=(point_inclusion(7),))


def test_tree_filter_witness_depth():
    F = tree_filter(2)
    z = F.witness(4)
    assert isinstance(z, TreeSnapshot)
    assert z.depth >= 4
    with pytest.raises(ValueError):
        tree_filter(1)


def test_tree_q_witness_grid_alignment():
    F = tree_q_filter()
    z = F.witness(6)
    assert z.depth >= 6
    assert z.values[0] == 0 and z.values[-1] == 1
    assert len(z.values) == z.depth + 1


def test_filters_are_proper():
    # no witness is empty, so the filter avoids the trivial class
    for F in (initial_segment_filter(), tree_filter(2),
              full_finite_filter((0, 1))):
        assert F.witness(1).size() > 0
