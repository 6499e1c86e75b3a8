"""Exact comparison-ring scalars: big rationals and truncated Laurent series.

Two concrete rings are supported.  Rationals come from the backend (gmpy2 or
fractions).  LaurentSeries is a finite sum of terms c * e^k over strictly
increasing integer exponents k, where e is the positive infinitesimal; the
order is sign-of-leading-coefficient and the valuation of 0 is the +infinity
sentinel.  Exact inverses have infinite support, so inversion truncates at a
configurable global order (config.truncation_order); everything else is exact.
"""

from __future__ import annotations

import enum
import re

from .backend import Rat, as_rat, fmt_rat, is_rational
from .config import get_config


class OrderDecision(enum.Enum):
    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"
    # Never produced for the two scalar rings (both totally ordered);
    # reserved for reduced-power comparisons.
    INCOMPARABLE = "Incomparable"


class Infinity:
    """Signed infinity sentinel, comparable against rationals."""

    __slots__ = ("sign",)

    def __init__(self, sign: int):
        self.sign = sign

    def __repr__(self):
        return "+inf" if self.sign > 0 else "-inf"

    def __neg__(self):
        return NEG_INF if self.sign > 0 else POS_INF

    def __eq__(self, other):
        return isinstance(other, Infinity) and other.sign == self.sign

    def __hash__(self):
        return hash(("Infinity", self.sign))

    def __lt__(self, other):
        if isinstance(other, Infinity):
            return self.sign < other.sign
        return self.sign < 0

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        if isinstance(other, Infinity):
            return self.sign > other.sign
        return self.sign > 0

    def __ge__(self, other):
        return self == other or self > other


POS_INF = Infinity(1)
NEG_INF = Infinity(-1)


class _Undefined:
    __slots__ = ()

    def __repr__(self):
        return "Undefined"


# Unreachable for LaurentSeries standard parts; exists for interface
# uniformity with reduced-power estimates.
UNDEFINED = _Undefined()


def ext_min(a, b):
    return a if a <= b else b


def ext_max(a, b):
    return a if a >= b else b


class LaurentSeries:
    """Immutable finite Laurent series over the rationals."""

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        # Accepts any iterable of (exponent, coefficient); merges duplicates,
        # drops zeros, sorts. The stored form is canonical.
        acc = {}
        for exp, coeff in terms:
            if not isinstance(exp, int):
                raise TypeError(f"exponent must be int, got {exp!r}")
            c = as_rat(coeff)
            if c == 0:
                continue
            s = acc.get(exp)
            if s is None:
                acc[exp] = c
            else:
                s = s + c
                if s == 0:
                    del acc[exp]
                else:
                    acc[exp] = s
        object.__setattr__(self, "_terms",
                           tuple(sorted(acc.items())))

    # -- construction helpers -------------------------------------------

    @classmethod
    def from_rational(cls, q) -> "LaurentSeries":
        return cls(((0, as_rat(q)),))

    @classmethod
    def eps(cls, power: int = 1, coeff=1) -> "LaurentSeries":
        return cls(((power, as_rat(coeff)),))

    @property
    def terms(self):
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1
                                   and self._terms[0][0] == 0)

    def constant_value(self):
        if not self._terms:
            return Rat(0)
        if self.is_constant():
            return self._terms[0][1]
        raise ValueError("not a constant series")

    def coefficient(self, exp: int):
        for e, c in self._terms:
            if e == exp:
                return c
            if e > exp:
                break
        return Rat(0)

    def valuation(self):
        """Least exponent with a nonzero coefficient; +inf for 0."""
        if not self._terms:
            return POS_INF
        return self._terms[0][0]

    def leading_coefficient(self):
        if not self._terms:
            raise ValueError("zero series has no leading coefficient")
        return self._terms[0][1]

    # -- arithmetic ------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, LaurentSeries):
            return other
        if is_rational(other):
            return LaurentSeries.from_rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return LaurentSeries(self._terms + o._terms)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(tuple((e, -c) for e, c in self._terms))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = {}
        for e1, c1 in self._terms:
            for e2, c2 in o._terms:
                e = e1 + e2
                c = out.get(e)
                out[e] = c1 * c2 if c is None else c + c1 * c2
        return LaurentSeries(out.items())

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return invert(self) ** (-n)
        result = LaurentSeries.from_rational(1)
        base = self
        k = n
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        if is_rational(other):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self * LaurentSeries.from_rational(Rat(1) / as_rat(other))
        if isinstance(other, LaurentSeries):
            return self * invert(other)
        return NotImplemented

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * invert(self)

    # -- order (total for this ring) --------------------------------------

    def sign(self) -> int:
        if not self._terms:
            return 0
        return 1 if self._terms[0][1] > 0 else -1

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self.is_constant():
            return hash(self.constant_value())
        return hash(self._terms)

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __le__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() <= 0

    def __gt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() > 0

    def __ge__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() >= 0

    # -- slices and truncation --------------------------------------------

    def truncate_below(self, order: int) -> "LaurentSeries":
        """Keep terms with exponent < order."""
        return LaurentSeries(t for t in self._terms if t[0] < order)

    def slice_parts(self, i: int):
        """Split as below + at*e^i + above with exponents <i, =i, >i."""
        below = LaurentSeries(t for t in self._terms if t[0] < i)
        at = self.coefficient(i)
        above = LaurentSeries(t for t in self._terms if t[0] > i)
        return below, at, above

    def _sort_key_(self):
        # dedup/sort hook for snapshots holding Laurent-valued points
        return self._terms

    def __repr__(self):
        return f"LaurentSeries({format_laurent(self)!r})"


EPS = LaurentSeries.eps()


# ---------------------------------------------------------------------------
# Ring-generic operations.


def as_scalar(x):
    """Accept a rational, int, 'p/q' string, or LaurentSeries."""
    if isinstance(x, LaurentSeries):
        return x
    return as_rat(x)


def compare(a, b) -> OrderDecision:
    """Total order decision for the two scalar rings (mixed inputs coerced)."""
    if isinstance(a, LaurentSeries) or isinstance(b, LaurentSeries):
        a = a if isinstance(a, LaurentSeries) else LaurentSeries.from_rational(a)
        b = b if isinstance(b, LaurentSeries) else LaurentSeries.from_rational(b)
        s = (a - b).sign()
    else:
        a, b = as_rat(a), as_rat(b)
        s = -1 if a < b else (1 if a > b else 0)
    if s < 0:
        return OrderDecision.LESS
    if s > 0:
        return OrderDecision.GREATER
    return OrderDecision.EQUAL


def invert(a: LaurentSeries) -> LaurentSeries:
    """Truncated inverse: exponents kept below valuation(1/a) + T.

    The product invert(a) * a then agrees with 1 on all exponents < T.
    """
    if not isinstance(a, LaurentSeries):
        q = as_rat(a)
        if q == 0:
            raise ZeroDivisionError("not invertible")
        return Rat(1) / q
    if a.is_zero():
        raise ZeroDivisionError("not invertible")
    T = get_config().truncation_order
    v = a._terms[0][0]
    lead = a._terms[0][1]
    # a = lead * e^v * (1 + u) with valuation(u) >= 1.
    u = LaurentSeries((e - v, c / lead) for e, c in a._terms[1:])
    # 1/(1+u) = sum (-u)^j, truncated so the final result stays below -v + T.
    cutoff = T
    geom = LaurentSeries.from_rational(1)
    power = LaurentSeries.from_rational(1)
    neg_u = -u
    while True:
        power = (power * neg_u).truncate_below(cutoff)
        if power.is_zero():
            break
        geom = geom + power
    inv_lead = Rat(1) / lead
    return LaurentSeries((e - v, c * inv_lead)
                         for e, c in geom.truncate_below(cutoff)._terms)


def valuation(a):
    if isinstance(a, LaurentSeries):
        return a.valuation()
    q = as_rat(a)
    return POS_INF if q == 0 else 0


def standard_part(a):
    """Rational standard part, or a signed infinity for infinite elements."""
    if not isinstance(a, LaurentSeries):
        return as_rat(a)
    v = a.valuation()
    if v is POS_INF or v > 0:
        return Rat(0)
    if v == 0:
        return a.coefficient(0)
    return POS_INF if a.leading_coefficient() > 0 else NEG_INF


def is_finite(a) -> bool:
    if isinstance(a, LaurentSeries):
        v = a.valuation()
        return v is POS_INF or v >= 0
    return True


def is_infinitesimal(a) -> bool:
    if isinstance(a, LaurentSeries):
        v = a.valuation()
        return v is POS_INF or v >= 1
    return as_rat(a) == 0


def ll(a, b) -> bool:
    """a << b: b > 0 and n*|a| < b for every integer n."""
    if compare(b, 0) is not OrderDecision.GREATER:
        return False
    va, vb = valuation(a), valuation(b)
    if va is POS_INF:
        return True
    if vb is POS_INF:
        return False
    return va > vb


def sim(a, b) -> bool:
    """a ~ b: the difference is infinitesimal."""
    if isinstance(a, LaurentSeries) or isinstance(b, LaurentSeries):
        a = a if isinstance(a, LaurentSeries) else LaurentSeries.from_rational(a)
        return is_infinitesimal(a - b)
    return as_rat(a) == as_rat(b)


def approx(a, b) -> bool:
    """a is approximately b: b invertible and a/b ~ 1."""
    if compare(b, 0) is OrderDecision.EQUAL:
        raise ZeroDivisionError("approx undefined for b = 0")
    if isinstance(a, LaurentSeries) or isinstance(b, LaurentSeries):
        a = a if isinstance(a, LaurentSeries) else LaurentSeries.from_rational(a)
        b = b if isinstance(b, LaurentSeries) else LaurentSeries.from_rational(b)
        return sim(a * invert(b), Rat(1))
    return as_rat(a) == as_rat(b)


def arch_equivalent(a, b) -> bool:
    """Both positive and each below an integer multiple of the other."""
    if compare(a, 0) is not OrderDecision.GREATER:
        return False
    if compare(b, 0) is not OrderDecision.GREATER:
        return False
    return valuation(a) == valuation(b)


class OrderFlags:
    __slots__ = ("finite", "infinitesimal", "a_ll_b", "a_sim_b",
                 "a_approx_b", "arch_equivalent")

    def __init__(self, **kw):
        for name in self.__slots__:
            setattr(self, name, kw[name])

    def __repr__(self):
        inner = ", ".join(f"{n}={getattr(self, n)}" for n in self.__slots__)
        return f"OrderFlags({inner})"


def order_predicates(a, b) -> OrderFlags:
    """All order-theoretic predicates of the ring for the pair (a, b)."""
    return OrderFlags(
        finite=is_finite(a),
        infinitesimal=is_infinitesimal(a),
        a_ll_b=ll(a, b),
        a_sim_b=sim(a, b),
        a_approx_b=approx(a, b),
        arch_equivalent=arch_equivalent(a, b),
    )


def laurent_slice(a: LaurentSeries, i: int):
    """(below, at, above) with below + at*e^i + above = a exactly."""
    if not isinstance(a, LaurentSeries):
        a = LaurentSeries.from_rational(a)
    return a.slice_parts(i)


# ---------------------------------------------------------------------------
# Textual form: "c0*e^k0 + c1*e^k1 + ..." with rational coefficients p/q.


def format_laurent(a: LaurentSeries) -> str:
    if not isinstance(a, LaurentSeries):
        a = LaurentSeries.from_rational(a)
    if a.is_zero():
        return "0"
    return " + ".join(f"{fmt_rat(c)}*e^{e}" for e, c in a.terms)


_TERM_RE = re.compile(
    r"^\s*(-?\d+(?:/\d+)?)\s*\*\s*e\^(-?\d+)\s*$")


def parse_laurent(text: str) -> LaurentSeries:
    text = text.strip()
    if text == "0":
        return LaurentSeries()
    terms = []
    for part in text.split("+"):
        m = _TERM_RE.match(part)
        if not m:
            raise ValueError(f"bad Laurent term: {part.strip()!r}")
        coeff, exp = m.group(1), int(m.group(2))
        terms.append((exp, as_rat(coeff)))
    return LaurentSeries(terms)
