"""Rational arithmetic backend.

Every scalar in the engine is an exact rational (or a Laurent series over
them).  The hot loops are big-rational additions and comparisons, so the
backend is selectable at import time: gmpy2's compiled mpq when available,
stdlib fractions.Fraction otherwise.  Set FILTERINT_BACKEND=fraction or
FILTERINT_BACKEND=gmpy2 to force a choice (forcing gmpy2 without the package
installed raises).  benchmarks/bench_backend.py compares the two.
"""

from __future__ import annotations

import os
from fractions import Fraction

_pref = os.environ.get("FILTERINT_BACKEND", "").strip().lower()

if _pref not in ("", "fraction", "gmpy2"):
    raise RuntimeError(f"unknown FILTERINT_BACKEND {_pref!r}")

if _pref == "fraction":
    _mpq = None
else:
    try:
        from gmpy2 import mpq as _mpq
    except ImportError:
        if _pref == "gmpy2":
            raise
        _mpq = None

if _mpq is not None:
    BACKEND_NAME = "gmpy2"
    Rat = _mpq
    RATIONAL_TYPES = (type(_mpq(0)), Fraction, int)
else:
    BACKEND_NAME = "fraction"
    Rat = Fraction
    RATIONAL_TYPES = (Fraction, int)


def as_rat(x):
    """Coerce an int, backend rational, Fraction, or 'p/q' string to Rat."""
    if isinstance(x, str):
        if "/" in x:
            num, den = x.split("/", 1)
            return Rat(int(num), int(den))
        return Rat(int(x))
    if isinstance(x, RATIONAL_TYPES):
        return Rat(x)
    raise TypeError(f"not a rational: {x!r}")


def is_rational(x) -> bool:
    return isinstance(x, RATIONAL_TYPES)


def rat_floor(q) -> int:
    return int(q.numerator) // int(q.denominator)


def rat_ceil(q) -> int:
    return -((-int(q.numerator)) // int(q.denominator))


def fmt_rat(q) -> str:
    """Canonical text form: 'p/q', or plain 'p' for integers."""
    num, den = int(q.numerator), int(q.denominator)
    return str(num) if den == 1 else f"{num}/{den}"
