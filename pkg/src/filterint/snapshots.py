"""Finite evaluation domains: explicit point sets, trees, and rectangles.

A snapshot is an immutable finite nonempty point set with exact counting.
Tree snapshots stay symbolic (their node counts grow like m^n) and support
counting only for structured coordinate events; everything else enumerates.
"""

from __future__ import annotations

import bisect

from .backend import Rat, is_rational
from .config import get_config
from .regions import IntervalRegion, SetRegion, canonical_key


class Snapshot:
    def size(self) -> int:
        raise NotImplementedError

    def __len__(self):
        return self.size()

    def __iter__(self):
        raise NotImplementedError

    def contains(self, p) -> bool:
        raise NotImplementedError

    def count(self, region) -> int:
        """Exact |z intersect region|."""
        raise NotImplementedError

    def sum_over(self, f):
        total = None
        for x in self:
            v = f(x)
            total = v if total is None else total + v
        if total is None:
            raise ValueError("empty snapshot")
        return total

    def average(self, f):
        return self.sum_over(f) / self.size()


class ExplicitSnapshot(Snapshot):
    """Deduplicated sorted tuple of points; rational points count fast."""

    __slots__ = ("points", "_set", "_all_rational", "_hash")

    def __init__(self, points):
        pts = tuple(sorted(set(points), key=canonical_key))
        if not pts:
            raise ValueError("snapshot must be nonempty")
        self.points = pts
        self._set = frozenset(pts)
        self._all_rational = all(is_rational(p) for p in pts)
        self._hash = None

    def size(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def contains(self, p):
        return p in self._set

    def count(self, region):
        if isinstance(region, IntervalRegion) and self._all_rational:
            total = 0
            for a, b in region.pieces:
                total += (bisect.bisect_left(self.points, b)
                          - bisect.bisect_left(self.points, a))
            return total
        contains = region.contains if isinstance(region, SetRegion) \
            else region
        return sum(1 for p in self.points if contains(p))

    def restrict(self, region) -> "ExplicitSnapshot":
        contains = region.contains if isinstance(region, SetRegion) \
            else region
        return ExplicitSnapshot([p for p in self.points if contains(p)])

    def __eq__(self, other):
        return (isinstance(other, ExplicitSnapshot)
                and self.points == other.points)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.points)
        return self._hash

    def __repr__(self):
        return f"ExplicitSnapshot(n={len(self.points)})"


class TreeEvent(SetRegion):
    """Sequences of length >= min_len with bounded coordinates.

    bounds is a tuple of (coordinate, a, b) triples meaning a <= s(j) < b;
    min_len always dominates every constrained coordinate.
    """

    def __init__(self, min_len=0, bounds=()):
        bounds = tuple(sorted((int(j), a, b) for j, a, b in bounds))
        coords = [j for j, _, _ in bounds]
        if len(set(coords)) != len(coords):
            raise ValueError("one bound per coordinate")
        if bounds:
            min_len = max(min_len, max(coords) + 1)
        self.min_len = min_len
        self.bounds = bounds

    @classmethod
    def longer_than(cls, n):
        return cls(min_len=n + 1)

    @classmethod
    def branch(cls, n, value):
        """s(n) == value, for integer-labelled trees."""
        return cls(bounds=((n, value, value + 1),))

    @classmethod
    def coordinate_in(cls, n, a, b):
        return cls(bounds=((n, a, b),))

    def intersect(self, other: "TreeEvent") -> "TreeEvent":
        merged = dict((j, (a, b)) for j, a, b in self.bounds)
        for j, a, b in other.bounds:
            if j in merged:
                c, d = merged[j]
                merged[j] = (max(a, c), min(b, d))
            else:
                merged[j] = (a, b)
        return TreeEvent(
            max(self.min_len, other.min_len),
            tuple((j, a, b) for j, (a, b) in merged.items() if a < b)
            if all(a < b for a, b in merged.values()) else
            ((0, 1, 0),))  # empty event marker

    def is_empty_marker(self):
        return any(a >= b for _, a, b in self.bounds)

    def contains(self, p):
        if not isinstance(p, tuple) or len(p) < self.min_len:
            return False
        return all(a <= p[j] < b for j, a, b in self.bounds)

    def sample(self, count, exclude=(), seed=0):
        raise TypeError("tree events carry no sampler")

    def descriptor(self):
        parts = [f"len>={self.min_len}"]
        parts += [f"s({j}) in [{a},{b})" for j, a, b in self.bounds]
        return "treeevent " + " ".join(parts)


class TreeSnapshot(Snapshot):
    """All sequences of length <= depth over a fixed sorted value grid.

    Counting is closed-form; enumeration is allowed only below the
    configured cap.
    """

    __slots__ = ("values", "depth", "_hash")

    def __init__(self, values, depth: int):
        self.values = tuple(values)
        if self.values != tuple(sorted(set(self.values))):
            raise ValueError("value grid must be sorted and distinct")
        self.depth = int(depth)
        self._hash = None

    def branching(self):
        return len(self.values)

    def size(self):
        m = self.branching()
        return (m ** (self.depth + 1) - 1) // (m - 1)

    def _levels_count(self, lo, hi):
        # number of sequences with lo <= length <= hi
        m = self.branching()
        if hi < lo:
            return 0
        return (m ** (hi + 1) - m ** lo) // (m - 1)

    def _allowed(self, a, b):
        return (bisect.bisect_left(self.values, b)
                - bisect.bisect_left(self.values, a))

    def count(self, region):
        if not isinstance(region, TreeEvent):
            raise TypeError("tree snapshots count TreeEvents only")
        if region.is_empty_marker():
            return 0
        m = self.branching()
        factor = 1
        for _, a, b in region.bounds:
            factor *= self._allowed(a, b)
        if factor == 0:
            return 0
        r = len(region.bounds)
        total = 0
        for length in range(region.min_len, self.depth + 1):
            total += factor * m ** (length - r)
        return total

    def contains(self, p):
        return (isinstance(p, tuple) and len(p) <= self.depth
                and all(v in self.values for v in p))

    def __iter__(self):
        if self.size() > get_config().enumeration_cap:
            raise ValueError("tree snapshot too large to enumerate")
        stack = [()]
        while stack:
            s = stack.pop()
            yield s
            if len(s) < self.depth:
                for v in reversed(self.values):
                    stack.append(s + (v,))

    def __eq__(self, other):
        return (isinstance(other, TreeSnapshot)
                and self.values == other.values
                and self.depth == other.depth)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.values, self.depth))
        return self._hash

    def __repr__(self):
        return f"TreeSnapshot(m={self.branching()}, depth={self.depth})"


class RectangleRegion(SetRegion):
    """Product region A x B for counting on product snapshots."""

    def __init__(self, left, right):
        self.left = left
        self.right = right

    def contains(self, p):
        return (isinstance(p, tuple) and len(p) == 2
                and self.left.contains(p[0]) and self.right.contains(p[1]))

    def sample(self, count, exclude=(), seed=0):
        raise TypeError("rectangle regions carry no sampler")

    def descriptor(self):
        return (f"rect({self.left.descriptor()}, "
                f"{self.right.descriptor()})")


class ProductSnapshot(Snapshot):
    """Rectangle z0 x z1; iterates pairs, counts rectangles factorwise."""

    __slots__ = ("axes", "_hash")

    def __init__(self, z0: Snapshot, z1: Snapshot):
        self.axes = (z0, z1)
        self._hash = None

    def size(self):
        return self.axes[0].size() * self.axes[1].size()

    def __iter__(self):
        if self.size() > get_config().enumeration_cap:
            raise ValueError("product snapshot too large to enumerate")
        for x in self.axes[0]:
            for y in self.axes[1]:
                yield (x, y)

    def contains(self, p):
        return (isinstance(p, tuple) and len(p) == 2
                and self.axes[0].contains(p[0])
                and self.axes[1].contains(p[1]))

    def count(self, region):
        if isinstance(region, RectangleRegion):
            return (self.axes[0].count(region.left)
                    * self.axes[1].count(region.right))
        contains = region.contains if isinstance(region, SetRegion) \
            else region
        return sum(1 for p in self if contains(p))

    def __eq__(self, other):
        return isinstance(other, ProductSnapshot) and self.axes == other.axes

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.axes)
        return self._hash

    def __repr__(self):
        return f"ProductSnapshot({self.axes[0]!r}, {self.axes[1]!r})"


class SequenceSnapshot(Snapshot):
    """Witness (s, y) for sequence filters: s = {0..N-1}, y the fixed tail.

    Its points are the 2^N completions x agreeing with y beyond s; the
    snapshot enumerates them as CantorPoints.
    """

    __slots__ = ("n_coords", "tail", "_hash")

    def __init__(self, n_coords: int, tail):
        self.n_coords = int(n_coords)
        self.tail = tail
        self._hash = None

    def size(self):
        return 1 << self.n_coords

    def _complete(self, pattern: int):
        from .measures import CantorPoint
        n = self.n_coords
        head = tuple((pattern >> (n - 1 - i)) & 1 for i in range(n))
        rest = self.tail.drop(n)
        return CantorPoint(head + rest.prefix, rest.period)

    def __iter__(self):
        if self.size() > get_config().enumeration_cap:
            raise ValueError("sequence snapshot too large to enumerate")
        for pattern in range(1 << self.n_coords):
            yield self._complete(pattern)

    def contains(self, p):
        drop = getattr(p, "drop", None)
        if drop is None:
            return False
        return drop(self.n_coords) == self.tail.drop(self.n_coords)

    def count(self, region):
        contains = region.contains if isinstance(region, SetRegion) \
            else region
        return sum(1 for p in self if contains(p))

    def __eq__(self, other):
        return (isinstance(other, SequenceSnapshot)
                and self.n_coords == other.n_coords
                and self.tail == other.tail)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n_coords, self.tail))
        return self._hash

    def __repr__(self):
        return f"SequenceSnapshot(N={self.n_coords}, tail={self.tail!r})"
