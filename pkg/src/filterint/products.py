"""Filters over composite spaces: rectangle products, bit-sequence
witnesses with reference tails, and a reciprocal-heavy mesh filter.

The product filter refines both sides of a rectangle jointly, with the
first axis kept richer than the second by an inner schedule.  The sequence
filter's witnesses are (head set, tail) pairs whose completions are
averaged by the closed-form dyadic shift sum.
"""

from __future__ import annotations

from math import gcd

from .backend import Rat, as_rat, fmt_rat
from .config import get_config
from .filters import Constraint, FilterBase, Guarantee, point_inclusion
from .integrator import indicator
from .measures import BitFunction, CantorPoint, binary_to_real, jessen_sum
from .snapshots import (
    ExplicitSnapshot,
    ProductSnapshot,
    RectangleRegion,
    SequenceSnapshot,
)
from .witness import _grant_common


def _diag(t: int):
    s = 0
    while t >= s + 1:
        t -= s + 1
        s += 1
    return t, s - t


def _dedup_desc(constraints):
    seen = set()
    out = []
    for c in constraints:
        if c.description not in seen:
            seen.add(c.description)
            out.append(c)
    return tuple(out)


# ---------------------------------------------------------------------------
# Rectangle products.


def rect_constraint(left, right, ai=None, bi=None) -> Constraint:
    """A one- or two-sided constraint on rectangle snapshots."""
    def check(z):
        return (isinstance(z, ProductSnapshot)
                and (left is None or left.check(z.axes[0]))
                and (right is None or right.check(z.axes[1])))

    ldesc = left.description if left is not None else "true"
    rdesc = right.description if right is not None else "true"
    return Constraint("rect", {"left": left, "right": right,
                               "ai": ai, "bi": bi},
                      check, f"rect[{ldesc} | {rdesc}]")


class ProductFilter(FilterBase):
    """Rectangles z0 x z1 from the component oracles.

    Generators pair the component generators diagonally; the oracle keeps
    the first axis at the inner schedule of the second axis' level, so
    canonical rectangles are taller than they are wide.  Guarantees for
    factored integrands multiply the component guarantees taken at twice
    the level, which absorbs the cross term.
    """

    def __init__(self, F: FilterBase, G: FilterBase, inner=None):
        self.factors = (F, G)
        self.inner = inner if inner is not None else (lambda n: 2 * n)
        super().__init__(f"product({F.name}, {G.name})", self._gen,
                         self._oracle, guarantee_fn=self._grant)

    def _gen(self, i):
        a, b = _diag(i)
        return rect_constraint(self.factors[0].generator(a),
                               self.factors[1].generator(b), ai=a, bi=b)

    def _oracle(self, constraints, seed):
        F, G = self.factors
        la = lb = 1
        lext, rext = [], []
        for c in constraints:
            if c.kind == "rect":
                cl, cr = c.params["left"], c.params["right"]
                ai, bi = c.params["ai"], c.params["bi"]
                if cl is not None:
                    if ai is None:
                        lext.append(cl)
                    else:
                        la = max(la, ai + 1)
                if cr is not None:
                    if bi is None:
                        rext.append(cr)
                    else:
                        lb = max(lb, bi + 1)
            elif c.kind == "point":
                x, y = c.params["point"]
                lext.append(point_inclusion(x))
                rext.append(point_inclusion(y))
            else:
                raise ValueError(f"product oracle cannot meet {c}")
        la = max(la, self.inner(lb))
        z0 = F.witness(la, extra=_dedup_desc(lext))
        z1 = G.witness(lb, extra=_dedup_desc(rext))
        return ProductSnapshot(z0, z1)

    def _grant(self, meta, level):
        return _grant_common(self, meta, level, "integral")

    def _integral_grant(self, f, level):
        F, G = self.factors
        pair = f.tags.get("product")
        Y = f.tags.get("indicator")
        if pair is None and isinstance(Y, RectangleRegion):
            pair = (indicator(Y.left), indicator(Y.right))
        if pair is None:
            return None
        g, h = pair
        gf = F.guarantee(
            {"kind": "integral", "function": g, "filter": F}, 2 * level)
        gh = G.guarantee(
            {"kind": "integral", "function": h, "filter": G}, 2 * level)
        if gf is None or gh is None:
            return None
        corners = [x * y for x in gf.bound for y in gh.bound]
        cs = (tuple(rect_constraint(c, None) for c in gf.constraints)
              + tuple(rect_constraint(None, c) for c in gh.constraints))
        return Guarantee((min(corners), max(corners)), cs)


def product_filter(F: FilterBase, G: FilterBase, inner=None) -> ProductFilter:
    return ProductFilter(F, G, inner)


def product_member(pred, P: ProductFilter, level: int) -> bool:
    """Generator-level membership: does pred hold on every canonical
    rectangle up to the level?"""
    return all(bool(pred(P.witness(k))) for k in range(1, level + 1))


# ---------------------------------------------------------------------------
# Sequence filters over bit coordinates.


def jessen_constraint(f: BitFunction, target, tol) -> Constraint:
    """The witness' shift average of f lies within tol of the target."""
    target = as_rat(target)
    tol = as_rat(tol)

    def check(z):
        return (isinstance(z, SequenceSnapshot)
                and abs(jessen_sum(f, z.n_coords, z.tail) - target) < tol)

    return Constraint(
        "jessen", {"f": f, "target": target, "tol": tol}, check,
        f"shift avg of {f.label} within {fmt_rat(tol)} of {fmt_rat(target)}")


def _head_length(n: int) -> Constraint:
    def check(z):
        cap = get_config().jessen_cap
        return isinstance(z, SequenceSnapshot) and z.n_coords >= min(n, cap)

    return Constraint("seqlen", {"n": n}, check,
                      f"head length >= {n} (capped)")


class SequenceFilter(FilterBase):
    """Fine filter over (head set, reference tail) witnesses.

    The registered (function, target) pairs are its certified class: the
    generators drive shift averages of each registered function toward its
    target, and a sequence integral of a registered function is granted
    the target within 2^-level, realized by one extra shift-average
    constraint.  The reference tail alternates bits.
    """

    def __init__(self, Fs, certified=()):
        self.components = Fs
        self.registry = tuple((f, as_rat(t)) for f, t in certified)
        self.tail = CantorPoint((), (0, 1))
        super().__init__("sequence", self._gen, self._oracle,
                         guarantee_fn=self._grant)

    def _gen(self, i):
        if i % 2 == 0 or not self.registry:
            return _head_length(i // 2 + 1)
        fi, ni = _diag((i - 1) // 2)
        f, t = self.registry[fi % len(self.registry)]
        return jessen_constraint(f, t, Rat(1, 1 << (ni + 1)))

    def _oracle(self, constraints, seed):
        cap = get_config().jessen_cap
        n = 1
        averages = []
        for c in constraints:
            if c.kind == "seqlen":
                n = max(n, min(c.params["n"], cap))
            elif c.kind == "jessen":
                averages.append(c)
            else:
                raise ValueError(f"sequence oracle cannot meet {c}")
        while True:
            z = SequenceSnapshot(n, self.tail)
            if all(c.check(z) for c in averages):
                return z
            n += 1
            if n > cap:
                raise ValueError("no witness found at cap")

    def _grant(self, meta, level):
        return _grant_common(self, meta, level, "sequence-integral")

    def _integral_grant(self, f, level):
        for rf, t in self.registry:
            if rf is f or rf.label == f.label:
                tol = Rat(1, 1 << level)
                return Guarantee((t - tol, t + tol),
                                 (jessen_constraint(rf, t, tol),))
        return None


def sequence_filter(Fs, certified=()) -> SequenceFilter:
    return SequenceFilter(Fs, certified)


# -- bit integrands ---------------------------------------------------------


def cylinder_fn(pattern) -> BitFunction:
    """chi of the cylinder fixing the first |pattern| bits."""
    pattern = tuple(int(b) for b in pattern)
    k = len(pattern)

    def fn(x):
        return Rat(1) if x.bits(k) == pattern else Rat(0)

    text = "".join(map(str, pattern))
    return BitFunction(fn, f"cyl[{text}]", depends_bits=k)


def binary_real_fn() -> BitFunction:
    """The binary-to-real map with its uniform continuity modulus."""
    def modulus(tol):
        tol = as_rat(tol)
        bits = 1
        while Rat(1, 1 << bits) >= tol:
            bits += 1
        return bits

    return BitFunction(binary_to_real, "binary-real", modulus=modulus)


def all_zero_fn() -> BitFunction:
    """chi of the single all-zero sequence; exact on periodic points."""
    def fn(x):
        return Rat(1) if not x.prefix and x.period == (0,) else Rat(0)

    return BitFunction(fn, "all-zero", exact=True)


def permute_fn(f: BitFunction, perm: dict, label=None) -> BitFunction:
    """Precompose f with a finite-support coordinate permutation."""
    perm = {int(k): int(v) for k, v in perm.items()}
    if sorted(perm) != sorted(perm.values()):
        raise ValueError("not a permutation")
    m = max(perm, default=-1) + 1

    def fn(x):
        head = tuple(x.bit(perm.get(i, i)) for i in range(m))
        rest = x.drop(m)
        return f(CantorPoint(head + rest.prefix, rest.period))

    db = f.depends_bits
    if db is not None:
        db = max([perm.get(i, i) for i in range(db)] + [db - 1]) + 1
    return BitFunction(fn, label or f"perm({f.label})", depends_bits=db,
                       modulus=f.modulus, exact=f.exact)


def dyadic_mean(f: BitFunction, bits: int):
    """Exact mean of f over all length-`bits` heads with a zero tail.

    This is the reference value for integrands that depend on at most
    `bits` coordinates.
    """
    total = Rat(0)
    for q in range(1 << bits):
        head = tuple((q >> (bits - 1 - i)) & 1 for i in range(bits))
        total += f(CantorPoint(head, (0,)))
    return total / (1 << bits)


# ---------------------------------------------------------------------------
# The steep mesh filter on the rationals in (0, 1).


_STEEP_AFTER = 16
_GRID_CAP = 14


def _steep_point(j: int):
    return Rat(1, 1 << (50 * (j - _STEEP_AFTER)))


_rat_cache = []
_rat_state = [2, 1]  # next denominator, next numerator to try


def _coprime_enum(i: int):
    while len(_rat_cache) <= i:
        q, p = _rat_state
        if p >= q:
            q, p = q + 1, 1
        while gcd(p, q) != 1:
            p += 1
            if p >= q:
                q, p = q + 1, 1
        _rat_cache.append(Rat(p, q))
        _rat_state[0], _rat_state[1] = q, p + 1
    return _rat_cache[i]


def _mesh_points(m: int):
    k = min(m, _GRID_CAP)
    pts = [Rat(j, 1 << k) for j in range(1, 1 << k)]
    pts += [_steep_point(j) for j in range(_STEEP_AFTER + 1, m + 1)]
    pts += [_coprime_enum(t) for t in range(m)]
    return pts


def _mesh_constraint(m: int) -> Constraint:
    def check(z):
        return all(z.contains(p) for p in _mesh_points(m))

    return Constraint("mesh", {"m": m}, check,
                      f"mesh with steep tail, level {m}")


def steep_mesh_filter() -> FilterBase:
    """Fine filter on the rationals in (0, 1) with reciprocal imbalance.

    Witnesses carry a full dyadic grid (capped at 2^14 cells) plus, past
    level 16, a tail of points so small that reciprocal averages blow up
    beyond any bound, while reciprocal sums over the grid alone stay
    moderate.  Enumerated rationals keep the filter fine.
    """
    def generator(i):
        return _mesh_constraint(i + 1)

    def oracle(constraints, seed):
        m = 1
        pts = []
        for c in constraints:
            if c.kind == "mesh":
                m = max(m, c.params["m"])
            elif c.kind == "point":
                q = as_rat(c.params["point"])
                if not (0 < q < 1):
                    raise ValueError(f"point outside (0,1): {q!r}")
                pts.append(q)
            else:
                raise ValueError(f"mesh oracle cannot meet {c}")
        return ExplicitSnapshot(pts + _mesh_points(m))

    return FilterBase("steep-mesh", generator, oracle)
