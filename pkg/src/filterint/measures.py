"""Finitely additive measures on set algebras, plus Cantor-space utilities.

Concrete algebras: rational intervals in [0,1), rational boxes in [0,1)^d,
binary cylinder sets, and mixtures with explicit point masses.  Everything
evaluates to exact rationals.
"""

from __future__ import annotations

from .backend import Rat, as_rat, rat_floor
from .regions import (
    BoxRegion,
    CylinderRegion,
    DenseCountableRegion,
    DifferenceRegion,
    FiniteRegion,
    IntervalRegion,
    SetRegion,
    ThinCountableRegion,
    UnionRegion,
)


class FAMeasure:
    """Finitely additive measure: evaluate on descriptors, never on sets."""

    def __init__(self, name, kind, evaluate, in_algebra, total,
                 atomless=True, point_masses=(), space=None):
        self.name = name
        self.kind = kind
        self._evaluate = evaluate
        self._in_algebra = in_algebra
        self.total = as_rat(total)
        self.atomless = atomless
        self.point_masses = tuple((p, as_rat(w)) for p, w in point_masses)
        self.space = space  # SetRegion used as the whole-space sampler

    def __call__(self, region: SetRegion):
        return self.evaluate(region)

    def evaluate(self, region: SetRegion):
        v = self._evaluate(region)
        if v < 0:
            raise ValueError(f"negative measure from {region!r}")
        return v

    def in_algebra(self, region: SetRegion) -> bool:
        return self._in_algebra(region)

    def __repr__(self):
        return f"FAMeasure({self.name})"


def length_measure() -> FAMeasure:
    """Length on finite unions of rational intervals in [0,1)."""
    def ev(region):
        if isinstance(region, IntervalRegion):
            return region.length()
        if isinstance(region, FiniteRegion):
            return Rat(0)
        raise TypeError(f"not in the interval algebra: {region!r}")

    return FAMeasure(
        "length[0,1)", "interval", ev,
        lambda r: isinstance(r, IntervalRegion),
        total=1, atomless=True, space=IntervalRegion.unit())


def box_measure(dim: int) -> FAMeasure:
    def ev(region):
        if isinstance(region, BoxRegion) and region.dim == dim:
            return region.volume()
        if isinstance(region, FiniteRegion):
            return Rat(0)
        raise TypeError(f"not in the {dim}-dim box algebra: {region!r}")

    unit = BoxRegion([tuple((Rat(0), Rat(1)) for _ in range(dim))])
    return FAMeasure(
        f"volume[0,1)^{dim}", "box", ev,
        lambda r: isinstance(r, BoxRegion) and r.dim == dim,
        total=1, atomless=True, space=unit)


def _cylinder_parts(region):
    if isinstance(region, CylinderRegion):
        return [region]
    if isinstance(region, UnionRegion) and all(
            isinstance(p, CylinderRegion) for p in region.parts):
        return list(region.parts)
    return None


def cantor_measure() -> FAMeasure:
    """Fair-coin measure on the cylinder algebra of {0,1}^N."""
    def ev(region):
        parts = _cylinder_parts(region)
        if parts is None:
            if isinstance(region, FiniteRegion):
                return Rat(0)
            raise TypeError(f"not in the cylinder algebra: {region!r}")
        if not parts:
            return Rat(0)
        depth = max(len(p.pattern) for p in parts)
        covered = set()
        for p in parts:
            free = depth - len(p.pattern)
            for i in range(1 << free):
                tail = tuple((i >> j) & 1 for j in range(free))
                covered.add(p.pattern + tail)
        return Rat(len(covered), 1 << depth)

    return FAMeasure(
        "coinflip", "cantor", ev,
        lambda r: _cylinder_parts(r) is not None,
        total=1, atomless=True, space=CylinderRegion(()))


def mixture_measure(point_masses, diffuse: FAMeasure,
                    diffuse_weight) -> FAMeasure:
    """Point masses plus a scaled diffuse part (sigma-finite, atomic)."""
    masses = tuple((p, as_rat(w)) for p, w in point_masses)
    w_diff = as_rat(diffuse_weight)

    def ev(region):
        atoms = sum((w for p, w in masses if region.contains(p)), Rat(0))
        if isinstance(region, FiniteRegion):
            return atoms
        return atoms + w_diff * diffuse.evaluate(region)

    total = sum((w for _, w in masses), Rat(0)) + w_diff * diffuse.total
    return FAMeasure(
        f"mixture({diffuse.name})", "mixture", ev,
        lambda r: isinstance(r, FiniteRegion) or diffuse.in_algebra(r),
        total=total, atomless=False, point_masses=masses,
        space=diffuse.space)


# ---------------------------------------------------------------------------
# Boolean atoms (positive-measure cells of the algebra generated by Ys).


def _interval_atoms(Ys, mu):
    cuts = sorted({e for Y in Ys for e in Y.endpoints()})
    segments = list(zip(cuts, cuts[1:]))
    groups = {}
    for a, b in segments:
        mid = (a + b) / 2
        sig = tuple(Y.contains(mid) for Y in Ys)
        if any(sig):
            groups.setdefault(sig, []).append((a, b))
    return [IntervalRegion(seg) for seg in groups.values()]


def _box_atoms(Ys, mu):
    dim = Ys[0].dim
    axes = []
    for k in range(dim):
        cuts = sorted({box[k][i] for Y in Ys for box in Y.boxes
                       for i in (0, 1)})
        axes.append(list(zip(cuts, cuts[1:])))
    groups = {}

    def rec(k, cell):
        if k == dim:
            mid = tuple((a + b) / 2 for a, b in cell)
            sig = tuple(Y.contains(mid) for Y in Ys)
            if any(sig):
                groups.setdefault(sig, []).append(tuple(cell))
            return
        for seg in axes[k]:
            rec(k + 1, cell + [seg])

    rec(0, [])
    return [BoxRegion(cells, dim) for cells in groups.values()]


def _cylinder_atoms(Ys, mu):
    depth = max((len(p.pattern) for Y in Ys for p in _cylinder_parts(Y)),
                default=0)
    groups = {}
    for i in range(1 << depth):
        pat = tuple((i >> j) & 1 for j in range(depth))
        sig = tuple(_cyl_subset(pat, Y) for Y in Ys)
        if any(sig):
            groups.setdefault(sig, []).append(CylinderRegion(pat))
    return [UnionRegion(parts) for parts in groups.values()]


def _cyl_subset(pat, Y):
    for part in _cylinder_parts(Y):
        if pat[:len(part.pattern)] == part.pattern:
            return True
    return False


def boolean_atoms(Ys, mu: FAMeasure):
    """Disjoint positive-measure atoms refining Ys, with their measures."""
    Ys = [Y for Y in Ys]
    if not Ys:
        return []
    if not mu.atomless:
        raise ValueError("boolean atoms need an atomless measure")
    if all(isinstance(Y, IntervalRegion) for Y in Ys):
        atoms = _interval_atoms(Ys, mu)
    elif all(isinstance(Y, BoxRegion) for Y in Ys):
        atoms = _box_atoms(Ys, mu)
    elif all(_cylinder_parts(Y) is not None for Y in Ys):
        atoms = _cylinder_atoms(Ys, mu)
    else:
        raise TypeError("mixed or unsupported region kinds for atoms")
    out = []
    for atom in atoms:
        m = mu.evaluate(atom)
        if m > 0:
            out.append((atom, m))
    out.sort(key=lambda am: am[0].descriptor())
    return out


# ---------------------------------------------------------------------------
# Inner and outer measure on the computable descriptor class.


def _closure_region(region, mu):
    """Algebra member carrying the outer measure of a countable region."""
    if isinstance(region, (FiniteRegion, ThinCountableRegion)):
        if mu.kind == "interval":
            return IntervalRegion.empty()
        if mu.kind == "box":
            return BoxRegion([], mu.space.dim)
    if isinstance(region, DenseCountableRegion):
        return region.support
    return None


def inner_outer_measure(Y: SetRegion, mu: FAMeasure):
    """(inner, outer) for algebra members +- countable point sets."""
    if mu.in_algebra(Y):
        m = mu.evaluate(Y)
        return (m, m)
    if isinstance(Y, (FiniteRegion, ThinCountableRegion)):
        if not mu.atomless:
            m = mu.evaluate(Y) if isinstance(Y, FiniteRegion) else Rat(0)
            return (m, m)
        return (Rat(0), Rat(0))
    if isinstance(Y, DenseCountableRegion):
        return (Rat(0), mu.evaluate(Y.support))
    if isinstance(Y, UnionRegion):
        algebra = [p for p in Y.parts if mu.in_algebra(p)]
        countable = [p for p in Y.parts if not mu.in_algebra(p)]
        closures = [_closure_region(p, mu) for p in countable]
        if len(algebra) < len(Y.parts) - len(countable) or None in closures:
            raise ValueError(
                f"inner/outer not computable for {Y.descriptor()!r}")
        base = algebra[0] if algebra else None
        for p in algebra[1:]:
            base = base.union(p)
        inner = mu.evaluate(base) if base is not None else Rat(0)
        hull = base
        for c in closures:
            hull = c if hull is None else hull.union(c)
        return (inner, mu.evaluate(hull) if hull is not None else Rat(0))
    if isinstance(Y, DifferenceRegion):
        if not mu.in_algebra(Y.base):
            raise ValueError(
                f"inner/outer not computable for {Y.descriptor()!r}")
        closure = _closure_region(Y.removed, mu)
        if closure is None:
            raise ValueError(
                f"inner/outer not computable for {Y.descriptor()!r}")
        outer = mu.evaluate(Y.base)
        inner = outer - mu.evaluate(Y.base.intersect(closure))
        return (inner, outer)
    raise ValueError(f"inner/outer not computable for {Y.descriptor()!r}")


# ---------------------------------------------------------------------------
# Cantor points: eventually periodic bit sequences.


def _primitive(period):
    n = len(period)
    for d in range(1, n + 1):
        if n % d == 0 and period == period[:d] * (n // d):
            return period[:d]
    return period


class CantorPoint:
    """An eventually periodic element of {0,1}^N, stored canonically."""

    __slots__ = ("prefix", "period")

    def __init__(self, prefix=(), period=(0,)):
        prefix = tuple(int(b) for b in prefix)
        period = _primitive(tuple(int(b) for b in period))
        if not period:
            raise ValueError("period must be nonempty")
        if any(b not in (0, 1) for b in prefix + period):
            raise ValueError("bits only")
        # absorb prefix bits that merely repeat the tail
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = (period[-1],) + period[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    def bit(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def bits(self, n: int):
        return tuple(self.bit(i) for i in range(n))

    def to_rational(self):
        m, L = len(self.prefix), len(self.period)
        a = 0
        for b in self.prefix:
            a = (a << 1) | b
        p = 0
        for b in self.period:
            p = (p << 1) | b
        tail = Rat(p, (1 << L) - 1)
        return (Rat(a) + tail) / (1 << m)

    @classmethod
    def from_rational(cls, q) -> "CantorPoint":
        q = as_rat(q)
        if not (0 <= q < 1):
            raise ValueError("wants a rational in [0,1)")
        seen = {}
        bits = []
        x = q
        while x not in seen:
            seen[x] = len(bits)
            x = x * 2
            b = 1 if x >= 1 else 0
            bits.append(b)
            x = x - b
        start = seen[x]
        return cls(tuple(bits[:start]), tuple(bits[start:]))

    def shift_by(self, q) -> "CantorPoint":
        """Addition of q modulo 1 under the interval identification."""
        r = self.to_rational() + as_rat(q)
        return CantorPoint.from_rational(r - rat_floor(r))

    def flip(self) -> "CantorPoint":
        return CantorPoint(tuple(1 - b for b in self.prefix),
                           tuple(1 - b for b in self.period))

    def drop(self, n: int) -> "CantorPoint":
        """The shifted sequence i -> bit(n + i)."""
        if n <= len(self.prefix):
            return CantorPoint(self.prefix[n:], self.period)
        off = (n - len(self.prefix)) % len(self.period)
        return CantorPoint((), self.period[off:] + self.period[:off])

    def _sort_key_(self):
        return (self.to_rational(), self.prefix, self.period)

    def __eq__(self, other):
        return (isinstance(other, CantorPoint)
                and self.prefix == other.prefix
                and self.period == other.period)

    def __hash__(self):
        return hash((self.prefix, self.period))

    def __repr__(self):
        pre = "".join(map(str, self.prefix))
        per = "".join(map(str, self.period))
        return f"CantorPoint({pre}({per})*)"


# ---------------------------------------------------------------------------
# Jessen averaging sums.


class BitFunction:
    """Function on bit sequences with an explicit precision contract.

    Exactly one evaluability guarantee is required: finite bit dependence,
    a uniform-continuity modulus (tolerance -> bits), or exactness on every
    eventually periodic point.
    """

    def __init__(self, fn, label, depends_bits=None, modulus=None,
                 exact=False):
        if depends_bits is None and modulus is None and not exact:
            raise ValueError("no precision contract")
        self.fn = fn
        self.label = label
        self.depends_bits = depends_bits
        self.modulus = modulus
        self.exact = exact

    def __call__(self, x: CantorPoint):
        return as_rat(self.fn(x))

    def __repr__(self):
        return f"BitFunction({self.label})"


def jessen_sum(f, n: int, x: CantorPoint):
    """Average of f over the 2^n dyadic shifts of x.

    The shifted points x + i/2^n (mod 1) run over (Q + t)/2^n for every
    residue Q < 2^n, with t = frac(x * 2^n) fixed; the sum is computed in
    that closed form.
    """
    if not isinstance(f, BitFunction):
        raise TypeError("jessen_sum needs a BitFunction precision contract")
    if n < 0:
        raise ValueError("n must be nonnegative")
    r = x.to_rational() * (1 << n)
    t = r - rat_floor(r)
    total = Rat(0)
    for q in range(1 << n):
        total += f(CantorPoint.from_rational((q + t) / (1 << n)))
    return total / (1 << n)


def binary_to_real(x: CantorPoint):
    """The canonical map sum x_i 2^{-i-1}; exact on periodic points."""
    return x.to_rational()
