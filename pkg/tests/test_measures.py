"""Measures: evaluation, additivity, atoms, shift averages."""

from fractions import Fraction

import pytest

import oracles
from filterint.backend import Rat
from filterint.measures import (CantorPoint, binary_to_real, boolean_atoms,
                                cantor_measure, inner_outer_measure,
                                jessen_sum, length_measure, mixture_measure)
from filterint.products import binary_real_fn, cylinder_fn
from filterint.regions import (CylinderRegion, FiniteRegion, IntervalRegion,
                               dyadics_in)


def test_length_measure_values():
    mu = length_measure()
    assert mu(IntervalRegion.of(Rat(1, 4), Rat(3, 4))) == Rat(1, 2)
    assert mu(IntervalRegion(((Rat(0), Rat(1, 8)),
                              (Rat(1, 2), Rat(3, 4))))) == Rat(3, 8)
    assert mu(FiniteRegion((Rat(1, 2),))) == 0
    assert mu.total == 1 and mu.atomless
    with pytest.raises(TypeError):
        mu(dyadics_in(IntervalRegion.of(Rat(0), Rat(1, 2))))


def test_length_additivity_on_disjoint_pieces(rng):
    mu = length_measure()
    for _ in range(50):
        cuts = sorted({Rat(rng.randint(0, 16), 16) for _ in range(4)})
        if len(cuts) < 3:
            continue
        a, b, c = cuts[:3]
        left = IntervalRegion.of(a, b)
        right = IntervalRegion.of(b, c)
        both = IntervalRegion(((a, b), (b, c)))
        assert mu(both) == mu(left) + mu(right)


def test_cantor_measure_on_cylinders():
    nu = cantor_measure()
    assert nu(CylinderRegion((0,))) == Rat(1, 2)
    assert nu(CylinderRegion((0, 1, 1))) == Rat(1, 8)
    assert nu.total == 1


def test_mixture_measure_atoms_plus_diffuse():
    mu = mixture_measure(((Rat(1, 3), Rat(1, 4)),), length_measure(),
                         Rat(3, 4))
    A = IntervalRegion.of(Rat(0), Rat(1, 2))   # contains the atom
    B = IntervalRegion.of(Rat(1, 2), Rat(1))
    assert mu(A) == Rat(1, 4) + Rat(3, 4) * Rat(1, 2)
    assert mu(B) == Rat(3, 4) * Rat(1, 2)
    assert mu(A) + mu(B) == mu.total == 1
    assert not mu.atomless


def test_boolean_atoms_refine_and_cover(rng):
    mu = length_measure()
    for _ in range(25):
        Ys = []
        for _ in range(rng.randint(1, 4)):
            a = Rat(rng.randint(0, 15), 16)
            b = Rat(rng.randint(1, 16), 16)
            if a > b:
                a, b = b, a
            if a < b:
                Ys.append(IntervalRegion.of(a, b))
        if not Ys:
            continue
        atoms = boolean_atoms(Ys, mu)
        total = sum((m for _, m in atoms), Rat(0))
        union = IntervalRegion([p for Y in Ys for p in Y.pieces])
        assert total == mu(union)
        for Y in Ys:
            # each atom is inside or outside every Y, never straddling
            for atom, _ in atoms:
                inside = [Y.contains((a + b) / 2) for a, b in atom.pieces]
                assert len(set(inside)) == 1


def test_inner_outer_measure_gap_for_dense_countable():
    mu = length_measure()
    Y = dyadics_in(IntervalRegion.of(Rat(0), Rat(1, 2)))
    inner, outer = inner_outer_measure(Y, mu)
    assert inner == 0
    assert outer == Rat(1, 2)
    A = IntervalRegion.of(Rat(0), Rat(1, 4))
    assert inner_outer_measure(A, mu) == (Rat(1, 4), Rat(1, 4))


def test_jessen_sum_matches_head_enumeration():
    tails = (CantorPoint((), (0, 1)), CantorPoint((1, 0), (1,)),
             CantorPoint((), (0,)))
    for f, head_fn in ((cylinder_fn((0, 1)),
                        lambda h: 1 if h[:2] == (0, 1) else 0),
                       (binary_real_fn(), oracles.binary_real_head)):
        for n in (2, 4, 6):
            for tail in tails:
                got = jessen_sum(f, n, tail)
                if f.depends_bits is not None and f.depends_bits <= n:
                    # depends only on the shifted head: the shift orbit
                    # runs over all heads uniformly
                    want = oracles.head_mean(head_fn, n)
                    assert Fraction(int(got.numerator),
                                    int(got.denominator)) == want


def test_binary_to_real_values():
    assert binary_to_real(CantorPoint((1,), (0,))) == Rat(1, 2)
    assert binary_to_real(CantorPoint((0, 1, 1), (0,))) == Rat(3, 8)
    assert binary_to_real(CantorPoint((), (0, 1))) == Rat(1, 3)
    assert binary_to_real(CantorPoint((), (1,))) == 1
