"""Rational interval enclosures for the handful of constants and
elementary functions the geometry layer needs.

Every function returns a pair (lo, hi) of exact rationals with
lo <= value <= hi.  Width is controlled by a bit count; all bounds come
from alternating-series tails or directed integer square roots, so no
floating point is involved anywhere.
"""

from math import isqrt

from .backend import Rat

_cache = {}


def enc_width(e):
    return e[1] - e[0]


def enc_neg(e):
    return (-e[1], -e[0])


def enc_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def enc_sub(a, b):
    return (a[0] - b[1], a[1] - b[0])


def enc_mul(a, b):
    corners = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(corners), max(corners))


def enc_scale(e, c):
    c = Rat(c)
    if c >= 0:
        return (e[0] * c, e[1] * c)
    return (e[1] * c, e[0] * c)


def enc_mid(e, bits=48):
    """Dyadic rounding of the interval midpoint."""
    m = (e[0] + e[1]) / 2
    d = 1 << bits
    num = (m.numerator * d) // m.denominator
    return Rat(num, d)


def _atan_series(x, bits):
    # alternating sum for |x| <= 1/2; consecutive partials bracket
    assert 0 <= x <= Rat(1, 2)
    if x == 0:
        return (Rat(0), Rat(0))
    tol = Rat(1, 1 << bits)
    term = x
    x2 = x * x
    total = Rat(0)
    k = 0
    lo = hi = None
    while True:
        total = total + term if k % 2 == 0 else total - term
        if k % 2 == 0:
            hi = total
        else:
            lo = total
        term = term * x2 * (2 * k + 1) / (2 * k + 3)
        k += 1
        if term < tol and lo is not None:
            break
    return (lo, min(hi, lo + term + term))


def enc_atan(x, bits=48):
    x = Rat(x)
    if x < 0:
        return enc_neg(enc_atan(-x, bits))
    if x > 1:
        half_pi = enc_scale(enc_pi(bits + 2), Rat(1, 2))
        return enc_sub(half_pi, enc_atan(1 / x, bits + 2))
    if x > Rat(1, 2):
        # atan x = atan 1/2 + atan((2x-1)/(x+2)), second argument in (0, 1/3]
        base = _atan_series(Rat(1, 2), bits + 2)
        rest = _atan_series((2 * x - 1) / (x + 2), bits + 2)
        return enc_add(base, rest)
    return _atan_series(x, bits)


def enc_pi(bits=48):
    got = _cache.get(("pi", bits))
    if got is None:
        a5 = _atan_series(Rat(1, 5), bits + 8)
        a239 = _atan_series(Rat(1, 239), bits + 8)
        got = enc_sub(enc_scale(a5, 16), enc_scale(a239, 4))
        _cache["pi", bits] = got
    return got


def _sin_cos_series(x, bits, odd):
    # x in [0, 8/5]; terms decrease from the second one on, so the
    # partial sums alternate around the limit
    tol = Rat(1, 1 << bits)
    x2 = x * x
    term = x if odd else Rat(1)
    total = Rat(0)
    j = 0
    lo = hi = None
    while True:
        total = total + term if j % 2 == 0 else total - term
        if j % 2 == 0:
            hi = total if hi is None else min(hi, total)
        else:
            lo = total if lo is None else max(lo, total)
        k = 2 * j + (2 if odd else 1)
        term = term * x2 / (k * (k + 1))
        j += 1
        if j >= 2 and term < tol:
            break
    if lo is None:
        lo = total - term
    return (lo, hi if hi is not None else total + term)


def _quarter_sin(e, bits):
    # increasing on [0, pi/2]
    return (_sin_cos_series(e[0], bits, True)[0],
            _sin_cos_series(e[1], bits, True)[1])


def _quarter_cos(e, bits):
    # decreasing on [0, pi/2]
    return (_sin_cos_series(e[1], bits, False)[0],
            _sin_cos_series(e[0], bits, False)[1])


def _reduce_turn(q):
    q = Rat(q)
    return q - 2 * (q.numerator // (2 * q.denominator))


def enc_cos_pi(q, bits=48):
    """Enclosure of cos(q*pi) for rational q."""
    q = _reduce_turn(q)
    key = ("cospi", q, bits)
    got = _cache.get(key)
    if got is not None:
        return got
    if q > 1:
        got = enc_cos_pi(2 - q, bits)
    elif q > Rat(1, 2):
        got = enc_neg(enc_cos_pi(1 - q, bits))
    else:
        theta = enc_scale(enc_pi(bits + 4), q)
        got = _quarter_cos(theta, bits)
    _cache[key] = got
    return got


def enc_sin_pi(q, bits=48):
    q = _reduce_turn(q)
    key = ("sinpi", q, bits)
    got = _cache.get(key)
    if got is not None:
        return got
    if q > 1:
        got = enc_neg(enc_sin_pi(2 - q, bits))
    elif q > Rat(1, 2):
        got = enc_sin_pi(1 - q, bits)
    else:
        theta = enc_scale(enc_pi(bits + 4), q)
        got = _quarter_sin(theta, bits)
    _cache[key] = got
    return got


def enc_sqrt(x, bits=48):
    """Directed square root; accepts a rational or an enclosure pair."""
    if isinstance(x, tuple):
        lo, hi = x
        if lo < 0:
            lo = Rat(0)
        if hi < 0:
            raise ValueError("sqrt of a negative enclosure")
        return (enc_sqrt(lo, bits)[0], enc_sqrt(hi, bits)[1])
    x = Rat(x)
    if x < 0:
        raise ValueError("sqrt of a negative rational")
    sn, sd = isqrt(x.numerator), isqrt(x.denominator)
    if sn * sn == x.numerator and sd * sd == x.denominator:
        exact = Rat(sn, sd)
        return (exact, exact)
    scale = 1 << bits
    n = (x.numerator * scale * scale) // x.denominator
    r = isqrt(n)
    return (Rat(r, scale), Rat(r + 1, scale))


def enc_contains(e, x):
    return e[0] <= x <= e[1]


def enc_sign(e):
    """-1, 0, or +1 when the interval decides the sign; None otherwise."""
    if e[0] > 0:
        return 1
    if e[1] < 0:
        return -1
    if e[0] == e[1] == 0:
        return 0
    return None
