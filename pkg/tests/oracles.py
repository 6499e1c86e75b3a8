"""Independent reference computations for the test suite.

Everything here is fractions.Fraction plus plain loops, sharing no code
with the package, so agreement is evidence rather than tautology.
"""

from fractions import Fraction
from itertools import product


def darboux_bracket(fn, n):
    """(lower, upper) Darboux sums over [0, 1] for a monotone function."""
    lo = hi = Fraction(0)
    for j in range(n):
        a = fn(Fraction(j, n))
        b = fn(Fraction(j + 1, n))
        lo += min(a, b)
        hi += max(a, b)
    return lo / n, hi / n


def block_density(m):
    """Density of union[4^k, 2*4^k) among 0..m-1, counted directly."""
    hits = sum(1 for j in range(1, m) if j.bit_length() % 2 == 1)
    return Fraction(hits, m)


def tree_event_count(values, depth, bounds, min_len=0):
    """Brute-force count of sequences over `values` with length <= depth
    satisfying every (coord, a, b) bound and the length floor."""
    total = 0
    for length in range(depth + 1):
        for seq in product(values, repeat=length):
            if len(seq) < min_len:
                continue
            if all(j < len(seq) and a <= seq[j] < b for j, a, b in bounds):
                total += 1
    return total


def tree_size(values, depth):
    return sum(len(values) ** n for n in range(depth + 1))


def _atan_bracket(x, terms):
    """Alternating-series partial sums bracket atan(x) for 0 < x <= 1."""
    x = Fraction(x)
    s = Fraction(0)
    power = x
    last = []
    for i in range(terms):
        term = power / (2 * i + 1)
        s = s + term if i % 2 == 0 else s - term
        power *= x * x
        last.append(s)
    return min(last[-2:]), max(last[-2:])


def pi_bracket(terms=40):
    """pi from pi/4 = atan(1/2) + atan(1/3)."""
    lo2, hi2 = _atan_bracket(Fraction(1, 2), terms)
    lo3, hi3 = _atan_bracket(Fraction(1, 3), terms)
    return 4 * (lo2 + lo3), 4 * (hi2 + hi3)


def sqrt_bracket(x, tol):
    """Bisection bracket of sqrt(x), width <= tol."""
    x = Fraction(x)
    lo, hi = Fraction(0), max(Fraction(1), x)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if mid * mid <= x:
            lo = mid
        else:
            hi = mid
    return lo, hi


def head_mean(bits_fn, N):
    """Mean of a 0/1-head functional over all 2^N binary heads."""
    total = Fraction(0)
    for q in range(1 << N):
        head = tuple((q >> (N - 1 - i)) & 1 for i in range(N))
        total += Fraction(bits_fn(head))
    return total / (1 << N)


def binary_real_head(head):
    return sum(Fraction(b, 1 << (i + 1)) for i, b in enumerate(head))


def cap_area_bracket(tol=Fraction(1, 10 ** 9)):
    """(1 - cos(pi/6)) / 2 via a square-root bracket of 3."""
    lo, hi = sqrt_bracket(3, tol)
    return (1 - hi / 2) / 2, (1 - lo / 2) / 2
