"""Intensional point sets: membership + deterministic sampler + descriptor.

Regions never materialize infinite sets.  The carrier spaces are countable
(rationals, rational vectors, eventually periodic bit sequences), so every
counting argument stays exact.  Samplers take an explicit random generator
or seed and an exclusion set, and always return fresh distinct points.
"""

from __future__ import annotations

import bisect
import random
from itertools import count

from .backend import Rat, as_rat, fmt_rat, is_rational, rat_ceil, rat_floor
from .config import get_config


def canonical_key(p):
    """Total-order key across the point kinds used by the engine."""
    if is_rational(p):
        return (0, p)
    if isinstance(p, tuple):
        return (1, len(p), tuple(canonical_key(c) for c in p))
    # CantorPoint, LaurentSeries and friends expose a _sort_key_ hook
    key = getattr(p, "_sort_key_", None)
    if key is not None:
        return (2, type(p).__name__, key())
    raise TypeError(f"unorderable point {p!r}")


def _as_rng(seed):
    if isinstance(seed, random.Random):
        return seed
    return random.Random(seed)


class SetRegion:
    """Base interface; concrete regions override all three capabilities."""

    def contains(self, p) -> bool:
        raise NotImplementedError

    def sample(self, count, exclude=(), seed=0):
        """Distinct fresh points inside the region, deterministic per seed."""
        raise NotImplementedError

    def descriptor(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor()!r})"

    def __eq__(self, other):
        return (type(self) is type(other)
                and self.descriptor() == other.descriptor())

    def __hash__(self):
        return hash((type(self).__name__, self.descriptor()))


def _normalize_pieces(pairs):
    pieces = []
    for a, b in sorted((as_rat(a), as_rat(b)) for a, b in pairs):
        if b <= a:
            continue
        if pieces and a <= pieces[-1][1]:
            lo, hi = pieces[-1]
            pieces[-1] = (lo, max(hi, b))
        else:
            pieces.append((a, b))
    return tuple(pieces)


class IntervalRegion(SetRegion):
    """Finite union of half-open rational intervals [a, b) inside [0, 1)."""

    AMBIENT = (Rat(0), Rat(1))

    def __init__(self, pairs):
        self.pieces = _normalize_pieces(pairs)
        self._starts = [a for a, _ in self.pieces]

    @classmethod
    def of(cls, *bounds):
        if len(bounds) % 2:
            raise ValueError("need an even number of endpoints")
        return cls(list(zip(bounds[::2], bounds[1::2])))

    @classmethod
    def unit(cls):
        return cls.of(0, 1)

    @classmethod
    def empty(cls):
        return cls(())

    def is_empty(self):
        return not self.pieces

    def length(self):
        return sum((b - a for a, b in self.pieces), Rat(0))

    def contains(self, p):
        if not is_rational(p):
            return False
        i = bisect.bisect_right(self._starts, p) - 1
        return i >= 0 and p < self.pieces[i][1]

    # boolean algebra, closed form

    def union(self, other):
        return IntervalRegion(self.pieces + other.pieces)

    def intersect(self, other):
        out = []
        for a, b in self.pieces:
            for c, d in other.pieces:
                lo, hi = max(a, c), min(b, d)
                if lo < hi:
                    out.append((lo, hi))
        return IntervalRegion(out)

    def complement(self):
        lo, hi = self.AMBIENT
        out = []
        cur = lo
        for a, b in self.pieces:
            if cur < a:
                out.append((cur, a))
            cur = max(cur, b)
        if cur < hi:
            out.append((cur, hi))
        return IntervalRegion(out)

    def difference(self, other):
        return self.intersect(other.complement())

    def endpoints(self):
        out = []
        for a, b in self.pieces:
            out.append(a)
            out.append(b)
        return out

    def sample(self, count, exclude=(), seed=0):
        if count == 0:
            return []
        if self.is_empty():
            raise ValueError("sampler exhausted: empty region")
        rng = _as_rng(seed)
        total = self.length()
        taken = set(exclude)
        out = []
        bits = get_config().sampler_bits
        # widen the grid until it holds the request comfortably
        while (total * (1 << bits)) < 16 * (count + len(taken)):
            bits += 8
        denom = 1 << bits
        weights = [b - a for a, b in self.pieces]
        tries = 0
        while len(out) < count:
            tries += 1
            if tries > 200 * count + 1000:
                raise ValueError("sampler exhausted: interval region")
            r = rng.choices(range(len(self.pieces)), weights=weights)[0]
            a, b = self.pieces[r]
            lo = rat_floor(a * denom) + 1
            hi = rat_ceil(b * denom) - 1
            if hi < lo:
                continue
            q = Rat(rng.randint(lo, hi), denom)
            if q < a or q >= b or q in taken:
                continue
            taken.add(q)
            out.append(q)
        return out

    def descriptor(self):
        if not self.pieces:
            return "interval"
        flat = " ".join(f"{fmt_rat(a)} {fmt_rat(b)}" for a, b in self.pieces)
        return f"interval {flat}"


class FiniteRegion(SetRegion):
    def __init__(self, points):
        self.points = tuple(sorted(set(points), key=canonical_key))

    def contains(self, p):
        return p in self.points

    def sample(self, count, exclude=(), seed=0):
        avail = [p for p in self.points if p not in set(exclude)]
        if len(avail) < count:
            raise ValueError("sampler exhausted: finite region")
        return avail[:count]

    def descriptor(self):
        inner = ",".join(_point_text(p) for p in self.points)
        return f"finite {{{inner}}}"


def _point_text(p):
    if is_rational(p):
        return fmt_rat(p)
    if isinstance(p, tuple):
        return "(" + " ".join(_point_text(c) for c in p) + ")"
    return repr(p)


def _split_box(box, cutter):
    """Fragments of box outside cutter (both = tuples of (lo,hi) pairs)."""
    out = []
    rest = list(box)
    for axis, ((a, b), (c, d)) in enumerate(zip(box, cutter)):
        lo, hi = max(a, c), min(b, d)
        if lo >= hi:
            return [tuple(box)]
        if a < lo:
            piece = list(rest)
            piece[axis] = (a, lo)
            out.append(tuple(piece))
        if hi < b:
            piece = list(rest)
            piece[axis] = (hi, b)
            out.append(tuple(piece))
        rest[axis] = (lo, hi)
    return out


class BoxRegion(SetRegion):
    """Finite union of axis-aligned half-open boxes inside [0, 1)^d."""

    def __init__(self, boxes, dim=None):
        boxes = [tuple((as_rat(a), as_rat(b)) for a, b in box)
                 for box in boxes]
        if dim is None:
            if not boxes:
                raise ValueError("dimension required for an empty box region")
            dim = len(boxes[0])
        if any(len(b) != dim for b in boxes):
            raise ValueError("mixed dimensions")
        self.dim = dim
        disjoint = []
        for box in boxes:
            if any(b <= a for a, b in box):
                continue
            frags = [box]
            for seen in disjoint:
                frags = [g for f in frags for g in _split_box(f, seen)]
            disjoint.extend(frags)
        self.boxes = tuple(sorted(disjoint))

    @classmethod
    def product(cls, *axes):
        return cls([tuple(axes)])

    def is_empty(self):
        return not self.boxes

    def volume(self):
        total = Rat(0)
        for box in self.boxes:
            v = Rat(1)
            for a, b in box:
                v *= b - a
            total += v
        return total

    def contains(self, p):
        if not isinstance(p, tuple) or len(p) != self.dim:
            return False
        for box in self.boxes:
            if all(a <= x < b for x, (a, b) in zip(p, box)):
                return True
        return False

    def union(self, other):
        return BoxRegion(self.boxes + other.boxes, self.dim)

    def intersect(self, other):
        out = []
        for u in self.boxes:
            for v in other.boxes:
                w = tuple((max(a, c), min(b, d))
                          for (a, b), (c, d) in zip(u, v))
                if all(a < b for a, b in w):
                    out.append(w)
        return BoxRegion(out, self.dim)

    def complement(self):
        unit = tuple((Rat(0), Rat(1)) for _ in range(self.dim))
        frags = [unit]
        for box in self.boxes:
            frags = [g for f in frags for g in _split_box(f, box)]
        return BoxRegion(frags, self.dim)

    def difference(self, other):
        return self.intersect(other.complement())

    def sample(self, count, exclude=(), seed=0):
        if count == 0:
            return []
        if self.is_empty():
            raise ValueError("sampler exhausted: empty box region")
        rng = _as_rng(seed)
        taken = set(exclude)
        vols = []
        for box in self.boxes:
            v = Rat(1)
            for a, b in box:
                v *= b - a
            vols.append(v)
        bits = get_config().sampler_bits
        denom = 1 << bits
        out = []
        tries = 0
        while len(out) < count:
            tries += 1
            if tries > 200 * count + 1000:
                raise ValueError("sampler exhausted: box region")
            box = self.boxes[rng.choices(range(len(self.boxes)),
                                         weights=vols)[0]]
            coords = []
            for a, b in box:
                lo = rat_floor(a * denom) + 1
                hi = rat_ceil(b * denom) - 1
                if hi < lo:
                    break
                q = Rat(rng.randint(lo, hi), denom)
                if q < a or q >= b:
                    break
                coords.append(q)
            else:
                p = tuple(coords)
                if p not in taken:
                    taken.add(p)
                    out.append(p)
        return out

    def descriptor(self):
        if not self.boxes:
            return f"box dim={self.dim}"
        body = " ".join(
            "x".join(f"[{fmt_rat(a)},{fmt_rat(b)}]" for a, b in box)
            for box in self.boxes)
        return f"box {body}"


class CylinderRegion(SetRegion):
    """All bit sequences extending a fixed finite pattern."""

    def __init__(self, pattern):
        self.pattern = tuple(int(b) for b in pattern)
        if any(b not in (0, 1) for b in self.pattern):
            raise ValueError("bit pattern required")

    def contains(self, p):
        bit = getattr(p, "bit", None)
        if bit is not None:
            return all(bit(i) == b for i, b in enumerate(self.pattern))
        if isinstance(p, tuple):
            return (len(p) >= len(self.pattern)
                    and tuple(p[:len(self.pattern)]) == self.pattern)
        return False

    def sample(self, count, exclude=(), seed=0):
        from .measures import CantorPoint
        rng = _as_rng(seed)
        taken = set(exclude)
        out = []
        tries = 0
        while len(out) < count:
            tries += 1
            if tries > 200 * count + 1000:
                raise ValueError("sampler exhausted: cylinder region")
            tail = tuple(rng.randint(0, 1) for _ in range(rng.randint(0, 10)))
            period = tuple(rng.randint(0, 1)
                           for _ in range(rng.randint(1, 4)))
            p = CantorPoint(self.pattern + tail, period)
            if p not in taken:
                taken.add(p)
                out.append(p)
        return out

    def descriptor(self):
        return "cyl " + "".join(str(b) for b in self.pattern)


class NaturalsRegion(SetRegion):
    """The natural numbers; sampling enumerates from the smallest unused."""

    def contains(self, p):
        return isinstance(p, int) and p >= 0

    def sample(self, count, exclude=(), seed=0):
        taken = set(exclude)
        out = []
        n = 0
        while len(out) < count:
            if n not in taken:
                out.append(n)
            n += 1
        return out

    def descriptor(self):
        return "naturals"


class ThinCountableRegion(SetRegion):
    """A countable nowhere-dense point set with shrinking interval covers.

    Enumerated by an explicit generator; the declared accumulation points
    justify outer measure 0 in the interval algebra (cover the accumulation
    points by arbitrarily short intervals plus finitely many singletons).
    """

    def __init__(self, enumerate_fn, accumulation, label):
        self._enum = enumerate_fn
        self.accumulation = tuple(as_rat(a) for a in accumulation)
        self.label = label
        self._cache = []

    def _point(self, i):
        while len(self._cache) <= i:
            self._cache.append(as_rat(self._enum(len(self._cache))))
        return self._cache[i]

    def contains(self, p):
        # membership only consulted for points this region produced
        for i in count():
            q = self._point(i)
            if q == p:
                return True
            if i > 10_000:
                return False

    def enumerate_points(self, n):
        return [self._point(i) for i in range(n)]

    def sample(self, count, exclude=(), seed=0):
        taken = set(exclude)
        out = []
        for i in range(200 * count + 1000):
            q = self._point(i)
            if q not in taken:
                taken.add(q)
                out.append(q)
                if len(out) == count:
                    return out
        raise ValueError("sampler exhausted: thin region")

    def descriptor(self):
        return f"thin {self.label}"


class DenseCountableRegion(SetRegion):
    """A countable dense subset of an interval support (e.g. dyadics)."""

    def __init__(self, support: IntervalRegion, membership, enumerate_fn,
                 label):
        self.support = support
        self._member = membership
        self._enum = enumerate_fn
        self.label = label

    def contains(self, p):
        return (is_rational(p) and self.support.contains(p)
                and self._member(p))

    def sample(self, count, exclude=(), seed=0):
        taken = set(exclude)
        out = []
        for i in range(200 * count + 10_000):
            q = as_rat(self._enum(i))
            if self.support.contains(q) and q not in taken:
                taken.add(q)
                out.append(q)
                if len(out) == count:
                    return out
        raise ValueError("sampler exhausted: dense countable region")

    def descriptor(self):
        return f"dense {self.label} in ({self.support.descriptor()})"


def dyadics_in(support: IntervalRegion) -> DenseCountableRegion:
    def is_dyadic(q):
        d = q.denominator
        return d & (d - 1) == 0

    def enum(i):
        # breadth-first over denominators 2, 4, 8, ...
        level, j = 1, i
        while j >= (1 << (level - 1)):
            j -= 1 << (level - 1)
            level += 1
        return Rat(2 * j + 1, 1 << level)

    return DenseCountableRegion(support, is_dyadic, enum, "dyadic")


class UnionRegion(SetRegion):
    """Symbolic union, used for the inner/outer measure computable class."""

    def __init__(self, parts):
        self.parts = tuple(parts)

    def contains(self, p):
        return any(r.contains(p) for r in self.parts)

    def sample(self, count, exclude=(), seed=0):
        rng = _as_rng(seed)
        taken = set(exclude)
        out = []
        for i in range(count):
            r = self.parts[i % len(self.parts)]
            pt = r.sample(1, exclude=taken, seed=rng)[0]
            taken.add(pt)
            out.append(pt)
        return out

    def descriptor(self):
        return "union(" + ", ".join(r.descriptor() for r in self.parts) + ")"


class DifferenceRegion(SetRegion):
    """Symbolic difference base minus removed (countable part)."""

    def __init__(self, base, removed):
        self.base = base
        self.removed = removed

    def contains(self, p):
        return self.base.contains(p) and not self.removed.contains(p)

    def sample(self, count, exclude=(), seed=0):
        rng = _as_rng(seed)
        taken = set(exclude)
        out = []
        tries = 0
        while len(out) < count:
            tries += 1
            if tries > 200 * count + 1000:
                raise ValueError("sampler exhausted: difference region")
            pt = self.base.sample(1, exclude=taken, seed=rng)[0]
            taken.add(pt)
            if not self.removed.contains(pt):
                out.append(pt)
        return out

    def descriptor(self):
        return (f"diff({self.base.descriptor()}, "
                f"{self.removed.descriptor()})")


# ---------------------------------------------------------------------------
# Descriptor grammar (CLI-facing).


def format_region(r: SetRegion) -> str:
    return r.descriptor()


def parse_region(text: str) -> SetRegion:
    text = text.strip()
    if text.startswith("interval"):
        parts = text[len("interval"):].split()
        vals = [as_rat(p) for p in parts]
        return IntervalRegion.of(*vals)
    if text.startswith("box"):
        body = text[len("box"):].strip()
        boxes = []
        for chunk in body.split():
            if chunk.startswith("dim="):
                return BoxRegion([], dim=int(chunk[4:]))
            pairs = []
            for piece in chunk.split("x"):
                piece = piece.strip()
                if not (piece.startswith("[") and piece.endswith("]")):
                    raise ValueError(f"bad box piece {piece!r}")
                a, b = piece[1:-1].split(",")
                pairs.append((as_rat(a), as_rat(b)))
            boxes.append(tuple(pairs))
        return BoxRegion(boxes)
    if text.startswith("cyl"):
        return CylinderRegion(text[len("cyl"):].strip())
    if text.startswith("finite"):
        body = text[len("finite"):].strip()
        if not (body.startswith("{") and body.endswith("}")):
            raise ValueError("finite region wants {p1,p2,...}")
        inner = body[1:-1].strip()
        pts = [] if not inner else [_parse_point(t) for t in inner.split(",")]
        return FiniteRegion(pts)
    if text.startswith("union(") and text.endswith(")"):
        return UnionRegion([parse_region(t)
                            for t in _split_args(text[6:-1])])
    if text.startswith("inter(") and text.endswith(")"):
        parts = [parse_region(t) for t in _split_args(text[6:-1])]
        out = parts[0]
        for r in parts[1:]:
            out = out.intersect(r)
        return out
    if text.startswith("compl(") and text.endswith(")"):
        return parse_region(text[6:-1]).complement()
    raise ValueError(f"unknown region descriptor {text!r}")


def _parse_point(t):
    t = t.strip()
    if t.startswith("(") and t.endswith(")"):
        return tuple(as_rat(c) for c in t[1:-1].split())
    return as_rat(t)


def _split_args(body):
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur))
    return [p.strip() for p in parts]
