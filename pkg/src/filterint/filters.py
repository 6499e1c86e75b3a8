"""Constructive fine filters: generator enumerations plus witness oracles.

A filter is never represented extensionally.  It carries a countable
directed family of constraints and an oracle that, handed finitely many of
them, returns one snapshot satisfying all of them — the finite-intersection
property as an algorithm.  A guarantee registry maps recognized element
classes to analytic average bounds realized by extra witness constraints.
"""

from __future__ import annotations

import hashlib

from .backend import Rat, as_rat
from .regions import FiniteRegion, SetRegion, canonical_key
from .snapshots import ExplicitSnapshot, Snapshot, TreeEvent, TreeSnapshot


class Constraint:
    """A pure snapshot predicate with a structured kind for oracles."""

    __slots__ = ("kind", "params", "_check", "description")

    def __init__(self, kind, params, check, description):
        self.kind = kind
        self.params = params
        self._check = check
        self.description = description

    def check(self, z: Snapshot) -> bool:
        return self._check(z)

    def __repr__(self):
        return f"Constraint({self.description})"


def point_inclusion(x) -> Constraint:
    return Constraint(
        "point", {"point": x},
        lambda z: z.contains(x),
        f"contains {x!r}")


def measure_proportion(Y: SetRegion, n: int, mu) -> Constraint:
    """| |z ∩ Y|/|z| − μ(Y) | < 1/n, exactly."""
    target = mu.evaluate(Y)
    tol = Rat(1, n)

    def check(z):
        got = Rat(z.count(Y), z.size())
        return abs(got - target) < tol

    return Constraint(
        "proportion", {"region": Y, "n": n, "mu": mu, "target": target},
        check, f"prop({Y.descriptor()}) within 1/{n} of {target}")


def count_dominance(Y: SetRegion, Yp: SetRegion, k: int) -> Constraint:
    """|z ∩ Y| > k · |z ∩ Y'|."""
    return Constraint(
        "dominance", {"big": Y, "small": Yp, "k": k},
        lambda z: z.count(Y) > k * z.count(Yp),
        f"count({Y.descriptor()}) > {k}*count({Yp.descriptor()})")


def segment_length(n: int) -> Constraint:
    def check(z):
        m = z.size()
        return m >= n and all(z.contains(i) for i in range(m))

    return Constraint(
        "segment", {"n": n}, check, f"initial segment of length >= {n}")


def tree_depth(n: int, grid_for_depth) -> Constraint:
    """z is a full tree snapshot of depth >= n over the canonical grid."""
    def check(z):
        return (isinstance(z, TreeSnapshot) and z.depth >= n
                and z.values == grid_for_depth(z.depth))

    return Constraint("tree", {"n": n}, check, f"full tree of depth >= {n}")


def custom(predicate, description) -> Constraint:
    return Constraint("custom", {}, predicate, description)


class Guarantee:
    """A certified average bound plus the witness constraints realizing it."""

    __slots__ = ("bound", "constraints")

    def __init__(self, bound, constraints=()):
        lo, hi = bound
        self.bound = (as_rat(lo), as_rat(hi))
        self.constraints = tuple(constraints)


def _seed_for(name, level, extra):
    text = name + "|" + str(level) + "|" + "|".join(
        c.description for c in extra)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big")


class FilterBase:
    """Generator enumeration + oracle + optional guarantee registry."""

    def __init__(self, name, generator_fn, oracle_fn, guarantee_fn=None,
                 space=None):
        self.name = name
        self._generator = generator_fn
        self._oracle = oracle_fn
        self._guarantee = guarantee_fn
        self.space = space
        self._memo = {}

    def generator(self, i: int) -> Constraint:
        return self._generator(i)

    def witness(self, level: int, extra=()) -> Snapshot:
        """Snapshot meeting the first `level` generators plus extras.

        Memoized per (level, extra); the oracle output is asserted sound
        against every requested constraint before being returned.
        """
        if level < 1:
            raise ValueError("level must be >= 1")
        extra = tuple(extra)
        key = (level, tuple(c.description for c in extra))
        got = self._memo.get(key)
        if got is not None:
            return got
        constraints = tuple(self.generator(i) for i in range(level)) + extra
        z = self._oracle(constraints, _seed_for(self.name, level, extra))
        for c in constraints:
            assert c.check(z), \
                f"{self.name} oracle violated {c.description!r} at {level}"
        self._memo[key] = z
        return z

    def guarantee(self, meta, level: int):
        if self._guarantee is None:
            return None
        return self._guarantee(meta, level)

    def __repr__(self):
        return f"FilterBase({self.name})"


# ---------------------------------------------------------------------------
# The minimal fine filter: point-inclusion generators only.


def minimal_fine_filter(space: SetRegion) -> FilterBase:
    enum_cache = []

    def enumerated(i):
        while len(enum_cache) <= i:
            fresh = space.sample(1, exclude=enum_cache, seed=7)
            enum_cache.append(fresh[0])
        return enum_cache[i]

    def generator(i):
        return point_inclusion(enumerated(i))

    def oracle(constraints, seed):
        pts = [c.params["point"] for c in constraints if c.kind == "point"]
        unsupported = [c for c in constraints if c.kind != "point"]
        if unsupported:
            raise ValueError(
                f"minimal fine filter cannot meet {unsupported[0]}")
        if not pts:
            pts = [enumerated(0)]
        return ExplicitSnapshot(pts)

    return FilterBase("minimal", generator, oracle, space=space)


def full_finite_filter(values) -> FilterBase:
    """The unique fine filter on a finite set: every witness is the set."""
    pts = tuple(sorted(set(values), key=canonical_key))
    if not pts:
        raise ValueError("need a nonempty finite space")
    whole = ExplicitSnapshot(pts)

    def generator(i):
        return point_inclusion(pts[i % len(pts)])

    def oracle(constraints, seed):
        for c in constraints:
            if not c.check(whole):
                raise ValueError(
                    f"finite space cannot meet {c.description!r}")
        return whole

    return FilterBase(f"finite({len(pts)})", generator, oracle,
                      space=FiniteRegion(pts))


# ---------------------------------------------------------------------------
# The initial-segment filter over the naturals.


def initial_segment_filter() -> FilterBase:
    def generator(i):
        return segment_length(i + 1)

    def oracle(constraints, seed):
        m = 1
        for c in constraints:
            if c.kind == "segment":
                m = max(m, c.params["n"])
            elif c.kind == "point":
                m = max(m, int(c.params["point"]) + 1)
            elif c.kind in ("proportion", "dominance", "custom"):
                m = _grow_until(c, m)
            else:
                raise ValueError(f"initial segments cannot meet {c}")
        return ExplicitSnapshot(range(m))

    return FilterBase("initial-segment", generator, oracle)


def _grow_until(c, m, cap=1 << 22):
    while m <= cap:
        if c.check(ExplicitSnapshot(range(m))):
            return m
        m += max(1, m // 8)
    raise ValueError(f"no initial segment satisfies {c.description!r}")


# ---------------------------------------------------------------------------
# Tree filters: complete k-ary trees, and the rational grid tree.


def tree_filter(k: int) -> FilterBase:
    if k < 2:
        raise ValueError("branching factor must be >= 2")
    grid = tuple(range(k))

    def generator(i):
        return tree_depth(i + 1, lambda depth: grid)

    def oracle(constraints, seed):
        depth = 1
        for c in constraints:
            if c.kind == "tree":
                depth = max(depth, c.params["n"])
            elif c.kind == "point":
                s = c.params["point"]
                if not all(v in grid for v in s):
                    raise ValueError(f"not a node of this tree: {s!r}")
                depth = max(depth, len(s))
            elif c.kind in ("proportion", "dominance", "custom"):
                pass  # revisited below after depth is fixed
            else:
                raise ValueError(f"tree oracle cannot meet {c}")
        z = TreeSnapshot(grid, depth)
        for c in constraints:
            while not c.check(z):
                depth += 1
                if depth > 64:
                    raise ValueError(f"no tree witness for {c.description!r}")
                z = TreeSnapshot(grid, depth)
        return z

    return FilterBase(f"tree-{k}", generator, oracle)


def _lcm(a, b):
    from math import gcd
    return a // gcd(a, b) * b


def grid_values(m: int):
    """The m+1 grid points j/m, both endpoints included."""
    return tuple(Rat(j, m) for j in range(m + 1))


def tree_q_filter() -> FilterBase:
    def generator(i):
        n = i + 1

        def check(z):
            return (isinstance(z, TreeSnapshot) and z.depth >= n
                    and z.values == grid_values(z.depth))

        return Constraint("tree", {"n": n}, check,
                          f"grid tree of depth >= {n}")

    def oracle(constraints, seed):
        depth = 1
        align = 1
        for c in constraints:
            if c.kind == "tree":
                depth = max(depth, c.params["n"])
            elif c.kind == "point":
                s = c.params["point"]
                depth = max(depth, len(s))
                for v in s:
                    q = as_rat(v)
                    if not (0 <= q <= 1):
                        raise ValueError(f"coordinate outside [0,1]: {v!r}")
                    align = _lcm(align, q.denominator)
            elif c.kind in ("proportion", "dominance", "custom"):
                pass
            else:
                raise ValueError(f"grid tree oracle cannot meet {c}")
        m = align * max(1, -(-depth // align))
        z = TreeSnapshot(grid_values(m), m)
        for c in constraints:
            while not c.check(z):
                m += align
                if m > 256:
                    raise ValueError(f"no grid tree for {c.description!r}")
                z = TreeSnapshot(grid_values(m), m)
        return z

    return FilterBase("tree-q", generator, oracle)
