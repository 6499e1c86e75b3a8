"""Lazy reduced-power elements: evaluators on snapshots, compared via filters.

An element never materializes its equivalence class.  Ordering against
another element is semi-decided by evaluating both on the filter's canonical
witness chain; standard parts are reported as finite-level interval
estimates, certified only when the filter's guarantee registry covers the
element's constraint class.
"""

from __future__ import annotations

from .backend import as_rat, fmt_rat, is_rational
from .scalars import (
    NEG_INF,
    POS_INF,
    LaurentSeries,
    OrderDecision,
    compare,
    standard_part,
)


class LazyElement:
    """A computational representative of a reduced-power class."""

    __slots__ = ("evaluator", "label", "meta", "_cache")

    def __init__(self, evaluator, label, meta=None):
        self.evaluator = evaluator
        self.label = label
        self.meta = dict(meta or {})
        self._cache = {}

    def value(self, snapshot):
        try:
            got = self._cache.get(snapshot)
        except TypeError:
            return self.evaluator(snapshot)
        if got is None:
            got = self.evaluator(snapshot)
            self._cache[snapshot] = got
        return got

    __call__ = value

    def __add__(self, other):
        return rp_arith("+", self, _as_element(other))

    __radd__ = __add__

    def __sub__(self, other):
        return rp_arith("-", self, _as_element(other))

    def __rsub__(self, other):
        return rp_arith("-", _as_element(other), self)

    def __mul__(self, other):
        return rp_arith("*", self, _as_element(other))

    __rmul__ = __mul__

    def __neg__(self):
        return rp_arith("-", embed_constant(0), self)

    def __repr__(self):
        return f"LazyElement({self.label})"


def _as_element(x):
    if isinstance(x, LazyElement):
        return x
    return embed_constant(x)


def embed_constant(c) -> LazyElement:
    """The constant function's class: ignores the snapshot entirely."""
    if not isinstance(c, LaurentSeries):
        c = as_rat(c)
    label = fmt_rat(c) if is_rational(c) else repr(c)
    return LazyElement(lambda z: c, label,
                       meta={"kind": "constant", "value": c})


_OPS = {
    "+": lambda u, v: u + v,
    "-": lambda u, v: u - v,
    "*": lambda u, v: u * v,
}


def rp_arith(op: str, a: LazyElement, b: LazyElement) -> LazyElement:
    """Pointwise ring operation on representatives."""
    if op not in _OPS:
        raise ValueError(f"unsupported op {op!r}")
    fn = _OPS[op]
    meta = {"kind": "arith", "op": op, "args": (a, b)}
    req = requirements(a) + requirements(b)
    if req:
        meta["requires"] = _dedup(req)
    return LazyElement(
        lambda z: fn(a.value(z), b.value(z)),
        f"({a.label} {op} {b.label})",
        meta=meta,
    )


def requirements(a: LazyElement):
    """Constraints a witness must satisfy before evaluating the element."""
    return tuple(a.meta.get("requires", ()))


def _dedup(constraints):
    seen = set()
    out = []
    for c in constraints:
        if c.description not in seen:
            seen.add(c.description)
            out.append(c)
    return tuple(out)


def rp_compare(a: LazyElement, b: LazyElement, F, level: int) -> OrderDecision:
    """Pointwise relation across the canonical witnesses for levels 1..n.

    A decided answer is evidence at finite level, not a proof, unless the
    filter certifies the comparison class.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    req = _dedup(requirements(a) + requirements(b))
    decision = None
    for n in range(1, level + 1):
        z = F.witness(n, extra=req)
        d = compare(a.value(z), b.value(z))
        if decision is None:
            decision = d
        elif d is not decision:
            return OrderDecision.INCOMPARABLE
    return decision


class StandardPartEstimate:
    """Finite-level interval for the standard part of an element."""

    __slots__ = ("lower", "upper", "level", "certified")

    def __init__(self, lower, upper, level, certified):
        if not _ext_le(lower, upper):
            raise ValueError(f"empty estimate [{lower}, {upper}]")
        self.lower = lower
        self.upper = upper
        self.level = level
        self.certified = certified

    def width(self):
        if self.lower is NEG_INF or self.upper is POS_INF:
            return POS_INF
        return self.upper - self.lower

    def contains(self, q):
        return _ext_le(self.lower, q) and _ext_le(q, self.upper)

    def __iter__(self):
        return iter((self.lower, self.upper))

    def __repr__(self):
        tag = "certified" if self.certified else "observed"
        return (f"StandardPartEstimate([{self.lower}, {self.upper}], "
                f"level={self.level}, {tag})")


def _ext_le(a, b):
    if a is NEG_INF or b is POS_INF:
        return True
    if a is POS_INF:
        return b is POS_INF
    if b is NEG_INF:
        return a is NEG_INF
    return a <= b


def estimate_standard_part(a: LazyElement, F, level: int
                           ) -> StandardPartEstimate:
    """Observed [min, max] over witness levels 1..n, or the analytic bound.

    The certified branch intersects the filter's per-level guarantees, so
    certified intervals are nested as the level grows; the element is
    evaluated on the top level's constraint-augmented witness as a
    soundness check.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    req = _dedup(requirements(a))
    grants = []
    for n in range(1, level + 1):
        grant = F.guarantee(a.meta, n)
        if grant is None:
            grants = None
            break
        grants.append(grant)
    if grants is not None:
        cert_lo = max(g.bound[0] for g in grants)
        cert_hi = min(g.bound[1] for g in grants)
        z = F.witness(level, extra=_dedup(req + grants[-1].constraints))
        v = standard_part(a.value(z))
        assert _ext_le(cert_lo, v) and _ext_le(v, cert_hi), \
            f"guarantee violated at level {level}: " \
            f"{v} outside [{cert_lo}, {cert_hi}]"
        return StandardPartEstimate(cert_lo, cert_hi, level, True)
    obs_lo = obs_hi = None
    for n in range(1, level + 1):
        z = F.witness(n, extra=req)
        v = standard_part(a.value(z))
        if obs_lo is None or _ext_lt(v, obs_lo):
            obs_lo = v
        if obs_hi is None or _ext_lt(obs_hi, v):
            obs_hi = v
    return StandardPartEstimate(obs_lo, obs_hi, level, False)


def _ext_lt(a, b):
    return _ext_le(a, b) and not (a == b or (a is b))
