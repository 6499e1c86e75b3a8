"""Parameterized surface fragments in low-dimensional rational space.

A fragment is a k-dimensional patch given by a map from a rational
parameter box into tuples of rationals.  Affine patches and polynomial
graphs are exact; circles and spheres emit points rounded to a fixed
dyadic grid, with membership decided through a shell test around the
true surface.  Volumes come from the Gram determinant integrated by a
midpoint rule with dyadic refinement.
"""

import itertools
import math

from .backend import Rat
from .config import get_config
from .enclosures import (
    enc_mid, enc_mul, enc_pi, enc_scale, enc_sign, enc_sqrt, enc_sub,
    enc_cos_pi, enc_sin_pi)
from .regions import SetRegion

LESS = "less"
GREATER = "greater"
EQUIVALENT = "equivalent"
UNDECIDED = "undecided-at-level"


class Box:
    """Closed rational box; the parameter domain of a fragment."""

    __slots__ = ("axes",)

    def __init__(self, axes):
        self.axes = tuple((Rat(a), Rat(b)) for a, b in axes)
        for a, b in self.axes:
            if a > b:
                raise ValueError("empty box axis")

    @property
    def k(self):
        return len(self.axes)

    def volume(self):
        v = Rat(1)
        for a, b in self.axes:
            v *= b - a
        return v

    def contains(self, u):
        return len(u) == self.k and all(
            a <= x <= b for x, (a, b) in zip(u, self.axes))

    def translate(self, vec):
        return Box([(a + d, b + d) for (a, b), d in zip(self.axes, vec)])

    def mid_grid(self, m):
        """Midpoints of the uniform m-per-axis refinement."""
        steps = [[a + (b - a) * Rat(2 * j + 1, 2 * m) for j in range(m)]
                 for a, b in self.axes]
        return itertools.product(*steps)

    def key(self):
        return self.axes

    def __repr__(self):
        return f"Box({list(self.axes)})"


def _round_dyadic(x, bits):
    d = 1 << bits
    return Rat((x.numerator * d * 2 + x.denominator)
               // (2 * x.denominator), d)


def _turn_less(v, t, bits=48):
    """Does the planar direction of v have turn fraction < t?

    v is a nonzero exact rational vector; t in [0, 1].  Quadrants are
    decided by signs alone; inside a quadrant an enclosure of the
    boundary direction settles the cross product sign, refining until
    it does.  Rational directions never coincide with a non-axis
    boundary, so the refinement terminates.
    """
    x, y = v
    if x == 0 and y == 0:
        raise ValueError("direction of the zero vector")
    if t >= 1:
        return True
    if t <= 0:
        return False
    if x > 0 and y >= 0:
        qv = 0
    elif x <= 0 and y > 0:
        qv = 1
    elif x < 0 and y <= 0:
        qv = 2
    else:
        qv = 3
    qt4 = 4 * t
    if qt4.denominator == 1:
        return qv < qt4.numerator
    qt = qt4.numerator // qt4.denominator
    if qv != qt:
        return qv < qt
    while bits <= 384:
        dc = enc_cos_pi(2 * t, bits)
        ds = enc_sin_pi(2 * t, bits)
        cross = enc_sub(enc_scale(dc, y), enc_scale(ds, x))
        sign = enc_sign(cross)
        if sign is not None:
            return sign < 0
        bits *= 2
    raise RuntimeError("angle decision cap")


def _turn_in(v, a, b, bits=48):
    if b - a >= 1:
        return True
    return (not _turn_less(v, a, bits)) and _turn_less(v, b, bits)


def _below_cos(value, t, bits=48):
    """value <= cos(pi*t), decided by refinement."""
    while bits <= 384:
        e = enc_cos_pi(t, bits)
        if value <= e[0]:
            return True
        if value > e[1]:
            return False
        bits *= 2
    raise RuntimeError("cosine comparison cap")


def _gauss_inverse(rows):
    k = len(rows)
    aug = [list(r) + [Rat(1) if i == j else Rat(0) for j in range(k)]
           for i, r in enumerate(rows)]
    for col in range(k):
        piv = next((r for r in range(col, k) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(k):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [r[k:] for r in aug]


class SurfaceFragment:
    """A k-patch: parameter box, point map, Gram data, exact membership."""

    def __init__(self, label, k, ambient, domain, phi, contains, in_piece,
                 sample, gram_det_enc, cuts=(), bbox=None):
        cfg = get_config()
        if ambient > cfg.max_ambient_dim:
            raise ValueError("ambient dimension above the configured cap")
        self.label = label
        self.k = k
        self.ambient = ambient
        self.domain = domain
        self.phi = phi
        self.contains = contains
        self.in_piece = in_piece
        self.sample_in = sample
        self.gram_det_enc = gram_det_enc
        self.bbox = bbox
        self.cuts = tuple(tuple(sorted(set(Rat(c) for c in axis)))
                          for axis in cuts) if cuts else ()
        self._vols = {}

    def pieces(self):
        """Sub-boxes of the domain split along the registered cuts."""
        if not self.cuts:
            return [(self.label, self.domain)]
        per_axis = []
        for (lo, hi), axis_cuts in zip(self.domain.axes,
                                       self.cuts or ((),) * self.domain.k):
            stops = [lo] + [c for c in axis_cuts if lo < c < hi] + [hi]
            per_axis.append(list(zip(stops, stops[1:])))
        while len(per_axis) < self.domain.k:
            per_axis.append([self.domain.axes[len(per_axis)]])
        out = []
        for idx, combo in enumerate(itertools.product(*per_axis)):
            box = Box(combo)
            if box.volume() > 0 or self.k == 0:
                out.append((f"{self.label}#{idx}", box))
        return out

    def volume(self, tol, box=None):
        box = box or self.domain
        key = (box.key(), Rat(tol))
        got = self._vols.get(key)
        if got is None:
            got = _quad(self, box, Rat(tol))
            self._vols[key] = got
        return got

    def __repr__(self):
        return f"SurfaceFragment({self.label}, k={self.k})"


def _quad(frag, box, tol):
    """Midpoint quadrature of sqrt(det Gram) with dyadic refinement.

    Stops when successive refinements agree within tol/4 and the summed
    enclosure width is below tol/2; errors out past the cell cap.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if box.volume() == 0:
        return Rat(0)
    cap = get_config().quadrature_cell_cap
    m, prev = 1, None
    while True:
        cells = m ** box.k
        if cells > cap:
            raise ValueError("quadrature cap")
        lo = hi = Rat(0)
        for u in box.mid_grid(m):
            s = enc_sqrt(frag.gram_det_enc(u, 48), 48)
            lo += s[0]
            hi += s[1]
        cellvol = box.volume() / cells
        est = enc_mid((lo * cellvol, hi * cellvol), 64)
        if prev is not None and abs(est - prev) <= tol / 4 \
                and (hi - lo) * cellvol <= tol / 2:
            return est
        prev = est
        m *= 2


def gram_volume(frag: SurfaceFragment, tol) -> Rat:
    return frag.volume(Rat(tol))


# ---------------------------------------------------------------------------
# Symbolic fragment kinds.


def _affine_sampler(phi, domain, k):
    def sample(box, n, exclude, taken):
        cap = 4 * get_config().geometry_point_cap
        m = max(2, int(round(n ** (1.0 / k))) + 1)
        while True:
            got = []
            for u in box.mid_grid(m):
                p = phi(u)
                if p in taken or any(t(p) for t in exclude):
                    continue
                got.append(p)
                if len(got) == n:
                    return got
            m *= 2
            if m ** k > cap:
                raise ValueError("sampler exhausted")
    return sample


def affine_fragment(label, columns, offset, domain: Box) -> SurfaceFragment:
    """phi(u) = offset + sum u_j * columns[j]; exact everywhere."""
    cols = tuple(tuple(Rat(x) for x in col) for col in columns)
    b = tuple(Rat(x) for x in offset)
    k, n = len(cols), len(b)
    if any(len(c) != n for c in cols) or domain.k != k:
        raise ValueError("affine shape mismatch")

    def phi(u):
        return tuple(b[i] + sum(cols[j][i] * u[j] for j in range(k))
                     for i in range(n))

    rows = None
    inv = None
    for combo in itertools.combinations(range(n), k):
        candidate = _gauss_inverse([[cols[j][i] for j in range(k)]
                                    for i in combo])
        if candidate is not None:
            rows, inv = combo, candidate
            break
    if inv is None:
        raise ValueError("affine map is not injective")

    def params_of(p):
        if len(p) != n:
            return None
        w = [p[i] - b[i] for i in rows]
        u = tuple(sum(inv[r][c] * w[c] for c in range(k)) for r in range(k))
        return u if phi(u) == tuple(p) else None

    def contains(p):
        u = params_of(p)
        return u is not None and domain.contains(u)

    def in_piece(p, box):
        u = params_of(p)
        return u is not None and box.contains(u)

    gram = [[sum(cols[i][t] * cols[j][t] for t in range(n))
             for j in range(k)] for i in range(k)]
    det = _exact_det(gram)

    def gram_det_enc(u, bits):
        return (det, det)

    bbox = tuple(
        (b[i] + sum(min(cols[j][i] * a, cols[j][i] * hi)
                    for j, (a, hi) in enumerate(domain.axes)),
         b[i] + sum(max(cols[j][i] * a, cols[j][i] * hi)
                    for j, (a, hi) in enumerate(domain.axes)))
        for i in range(n))
    return SurfaceFragment(label, k, n, domain, phi, contains, in_piece,
                           _affine_sampler(phi, domain, k), gram_det_enc,
                           bbox=bbox)


def _exact_det(m):
    k = len(m)
    if k == 1:
        return m[0][0]
    if k == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def unit_cube(k: int) -> SurfaceFragment:
    cols = [[Rat(1) if i == j else Rat(0) for i in range(k)]
            for j in range(k)]
    return affine_fragment(f"cube{k}", cols, [0] * k,
                           Box([(0, 1)] * k))


def box_fragment(label, box: Box) -> SurfaceFragment:
    cols = [[box.axes[j][1] - box.axes[j][0] if i == j else Rat(0)
             for i in range(box.k)] for j in range(box.k)]
    offs = [a for a, _ in box.axes]
    return affine_fragment(label, cols, offs, Box([(0, 1)] * box.k))


def segment_fragment(label, start, end) -> SurfaceFragment:
    start = tuple(Rat(x) for x in start)
    end = tuple(Rat(x) for x in end)
    col = [e - s for s, e in zip(start, end)]
    return affine_fragment(label, [col], start, Box([(0, 1)]))


def circle_fragment(label, center, radius=1, plane=(0, 1), ambient=2,
                    cuts=()) -> SurfaceFragment:
    """Circle traversed once; parameter u in [0,1) is the turn fraction.

    Emitted points are rounded to the configured dyadic grid, so
    membership is a shell test around the true circle plus an exact
    check of the off-plane coordinates.
    """
    center = tuple(Rat(x) for x in center)
    r = Rat(radius)
    if r <= 0:
        raise ValueError("radius must be positive")
    if len(center) != ambient:
        raise ValueError("center length mismatch")
    i, j = plane
    sbits = get_config().surface_bits
    shell = (4 * r + 2) * Rat(1, 1 << (sbits - 4))
    fixed = [(t, center[t]) for t in range(ambient) if t not in (i, j)]

    def phi(u):
        c = enc_mid(enc_cos_pi(2 * u, sbits + 16), sbits + 8)
        s = enc_mid(enc_sin_pi(2 * u, sbits + 16), sbits + 8)
        p = list(center)
        p[i] = center[i] + _round_dyadic(r * c, sbits)
        p[j] = center[j] + _round_dyadic(r * s, sbits)
        return tuple(p)

    def contains(p):
        if len(p) != ambient:
            return False
        if any(p[t] != v for t, v in fixed):
            return False
        d2 = (p[i] - center[i]) ** 2 + (p[j] - center[j]) ** 2
        return abs(d2 - r * r) <= shell

    def in_piece(p, box):
        if not contains(p):
            return False
        v = (p[i] - center[i], p[j] - center[j])
        (a, b), = box.axes
        return _turn_in(v, a, b)

    def sample(box, n, exclude, taken):
        (a, b), = box.axes
        if b - a <= 0:
            return []
        m = n
        while True:
            got = []
            for t in range(m):
                u = a + (b - a) * Rat(2 * t + 1, 2 * m)
                p = phi(u)
                if p in taken or any(e(p) for e in exclude):
                    continue
                got.append(p)
                if len(got) == n:
                    return got
            m = 2 * m + 1
            if m > 64 * n + 64:
                raise ValueError("sampler exhausted")

    def gram_det_enc(u, bits):
        # |phi'| = 2*pi*r identically
        tau = enc_scale(enc_pi(bits), 2 * r)
        return enc_mul(tau, tau)

    bbox = tuple((c - r - shell, c + r + shell) if t in (i, j) else (c, c)
                 for t, c in enumerate(center))
    return SurfaceFragment(label, 1, ambient, Box([(0, 1)]), phi, contains,
                           in_piece, sample, gram_det_enc, cuts=(cuts,),
                           bbox=bbox)


def sphere_fragment(label, center=(0, 0, 0), cuts_u=()) -> SurfaceFragment:
    """Unit sphere: u is the colatitude fraction, v the turn fraction."""
    center = tuple(Rat(x) for x in center)
    sbits = get_config().surface_bits
    shell = Rat(6, 1 << (sbits - 4))

    def phi(uv):
        u, v = uv
        su = enc_sin_pi(u, sbits + 16)
        p = (center[0] + _round_dyadic(
                enc_mid(enc_mul(su, enc_cos_pi(2 * v, sbits + 16)),
                        sbits + 8), sbits),
             center[1] + _round_dyadic(
                enc_mid(enc_mul(su, enc_sin_pi(2 * v, sbits + 16)),
                        sbits + 8), sbits),
             center[2] + _round_dyadic(
                enc_mid(enc_cos_pi(u, sbits + 16), sbits + 8), sbits))
        return p

    def contains(p):
        if len(p) != 3:
            return False
        d2 = sum((p[t] - center[t]) ** 2 for t in range(3))
        return abs(d2 - 1) <= shell

    def in_piece(p, box):
        if not contains(p):
            return False
        (u0, u1), (v0, v1) = box.axes
        zc = p[2] - center[2]
        # colatitude band: cos is decreasing in u; a point exactly on a
        # rational-cosine cut belongs to the larger-u piece
        if not _below_cos(zc, u0):
            return False
        if u1 < 1 and _below_cos(zc, u1):
            return False
        if v1 - v0 >= 1:
            return True
        vx, vy = p[0] - center[0], p[1] - center[1]
        if vx == 0 and vy == 0:
            return v0 <= 0
        return _turn_in((vx, vy), v0, v1)

    def _stereo(a, b):
        # inverse stereographic projection from the south pole; exact
        r2 = a * a + b * b
        w = 1 + r2
        return (center[0] + 2 * a / w, center[1] + 2 * b / w,
                center[2] + (1 - r2) / w)

    def sample(box, n, exclude, taken):
        (u0, u1), (v0, v1) = box.axes
        if (u1 - u0) * (v1 - v0) <= 0:
            return []
        if v1 - v0 >= 1:
            return _stereo_band(box, n, exclude, taken)
        m = max(2, int((n * 1.02) ** 0.5) + 2)
        while True:
            got = []
            for uv in box.mid_grid(m):
                p = phi(uv)
                if p in taken or any(e(p) for e in exclude):
                    continue
                got.append(p)
                if len(got) == n:
                    return got
            m += m // 4 + 1
            if m * m > 16 * n + 4096:
                raise ValueError("sampler exhausted")

    def _stereo_band(box, n, exclude, taken):
        """Exact rational grid on a full-revolution colatitude band.

        Radii map to heights through z = (1-r^2)/(1+r^2); an even grid
        never lands on b = 0, keeping every emitted point strictly off
        the y = 0 plane.  Acceptance runs through the exact piece test.
        """
        (u0, u1), _ = box.axes
        zhi = float(enc_cos_pi(u0, 32)[1])
        zlo = max(float(enc_cos_pi(u1, 32)[0]), -0.92)
        r_lo = math.sqrt(max(0.0, (1 - zhi) / (1 + zhi)))
        r_hi = math.sqrt((1 - zlo) / (1 + zlo))
        S = Rat(max(2, int(64 * r_hi * 1.08) + 1), 64)
        frac = math.pi * (r_hi ** 2 - r_lo ** 2) / float(4 * S * S)
        frac = min(max(frac, 0.05), 1.0)
        m = 2 * (int(1.06 * (n / frac) ** 0.5 / 2) + 3)
        while True:
            got = []
            for i in range(m):
                a = -S + 2 * S * Rat(2 * i + 1, 2 * m)
                for j in range(m):
                    b = -S + 2 * S * Rat(2 * j + 1, 2 * m)
                    p = _stereo(a, b)
                    if not in_piece(p, box):
                        continue
                    if p in taken or any(e(p) for e in exclude):
                        continue
                    got.append(p)
                    if len(got) == n:
                        return got
            m = 2 * ((m + m // 4) // 2 + 1)
            if m * m > 64 * n + 4096:
                raise ValueError("sampler exhausted")

    def gram_det_enc(uv, bits):
        u, _ = uv
        pi2 = enc_mul(enc_pi(bits), enc_pi(bits))
        su = enc_sin_pi(u, bits)
        return enc_scale(enc_mul(enc_mul(pi2, pi2), enc_mul(su, su)), 4)

    bbox = tuple((c - 1 - shell, c + 1 + shell) for c in center)
    return SurfaceFragment(label, 2, 3, Box([(0, 1), (0, 1)]), phi, contains,
                           in_piece, sample, gram_det_enc,
                           cuts=(cuts_u, ()), bbox=bbox)


def polygraph_fragment(label, coeffs, domain) -> SurfaceFragment:
    """Graph of a rational polynomial over an interval; exact points."""
    cs = tuple(Rat(c) for c in coeffs)
    a, b = Rat(domain[0]), Rat(domain[1])

    def p_at(x):
        acc = Rat(0)
        for c in reversed(cs):
            acc = acc * x + c
        return acc

    def dp_at(x):
        acc = Rat(0)
        for i in range(len(cs) - 1, 0, -1):
            acc = acc * x + i * cs[i]
        return acc

    def phi(u):
        return (u[0], p_at(u[0]))

    def contains(p):
        return (len(p) == 2 and a <= p[0] <= b and p[1] == p_at(p[0]))

    def in_piece(p, box):
        return contains(p) and box.contains((p[0],))

    def gram_det_enc(u, bits):
        d = dp_at(u[0])
        v = 1 + d * d
        return (v, v)

    box = Box([(a, b)])
    mag = max(abs(a), abs(b), Rat(1))
    spread = sum(abs(c) * mag ** i for i, c in enumerate(cs))
    return SurfaceFragment(label, 1, 2, box, phi, contains, in_piece,
                           _affine_sampler(phi, box, 1), gram_det_enc,
                           bbox=((a, b), (-spread, spread)))


# ---------------------------------------------------------------------------
# Archimedean dimension comparison over a geometric filter.


def dimension_compare(A, B, gamma, level, ratio_bound=2):
    """Compare the filter sizes of two registered sets by witness counts."""
    if not (gamma.has_set(A) and gamma.has_set(B)):
        raise ValueError("set not registered with this filter")
    counter = getattr(gamma, "count_of", None)

    def cnt(S, z):
        if counter is not None:
            c = counter(S, z)
            if c is not None:
                return c
        return sum(1 for p in z if S.contains(p))

    less = greater = equiv = True
    for k in range(1, level + 1):
        z = gamma.witness(k)
        ca = cnt(A, z)
        cb = cnt(B, z)
        less = less and k * ca < cb
        greater = greater and ca > k * cb
        equiv = equiv and ca <= ratio_bound * cb and cb <= ratio_bound * ca
    if equiv:
        return EQUIVALENT
    if less:
        return LESS
    if greater:
        return GREATER
    return UNDECIDED


class FragmentSet(SetRegion):
    """A fragment, or one parameter piece of it, viewed as a point set."""

    def __init__(self, frag: SurfaceFragment, box: Box = None):
        self.frag = frag
        self.box = box

    def contains(self, p):
        if self.box is None:
            return self.frag.contains(p)
        return self.frag.in_piece(p, self.box)

    def descriptor(self):
        tag = "" if self.box is None else f"|{self.box.axes}"
        return f"fragment {self.frag.label}{tag}"


# ---------------------------------------------------------------------------
# The two-great-circles sphere scenario.


def bk_scenario(cap, level=6):
    """Conditional proportions along a great circle versus global shares.

    `cap` is the polar cap angle as a fraction of pi, in (0, 1/2].  The
    cap A sits at the +z pole; B is its surface of revolution about the
    x axis, a band meeting the x-z great circle in two arcs.  Reported
    conditionals come from filter conditional expectations; they match
    the arc-length fractions and diverge from the area fractions.
    """
    from .geomfilter import geometric_filter
    from .integrator import cond_expectation, indicator

    cap = Rat(cap)
    if not 0 < cap <= Rat(1, 2):
        raise ValueError("cap angle fraction must be in (0, 1/2]")
    q2 = cap / 2
    arc_cuts = [Rat(1, 4) - q2, Rat(1, 4) + q2,
                Rat(3, 4) - q2, Rat(3, 4) + q2]
    cstar = circle_fragment("cstar", (0, 0, 0), plane=(0, 2), ambient=3,
                            cuts=arc_cuts)
    sph = sphere_fragment("sphere", cuts_u=(cap,))
    # the great circle sits inside the sphere's shell, so the
    # second-stage budget has to drown the first stage hard enough
    # for the sphere's proportion constraints to absorb the overlap
    gamma = geometric_filter((cstar, sph), dwarf=24 * level,
                             name=f"bk({cap})")

    circle_set = FragmentSet(cstar)
    cap_arc = FragmentSet(cstar, Box([(arc_cuts[0], arc_cuts[1])]))
    far_arc = FragmentSet(cstar, Box([(arc_cuts[2], arc_cuts[3])]))

    z = gamma.witness(level)
    pr_cap = cond_expectation(indicator(cap_arc), circle_set, gamma).value(z)
    pr_far = cond_expectation(indicator(far_arc), circle_set, gamma).value(z)
    band = pr_cap + pr_far

    return {
        "level": level,
        "cond_cap": pr_cap,
        "cond_band": band,
        "arc_cap": cap,
        "arc_band": 2 * cap,
        "area_cap": enc_mid(enc_scale(enc_sub((Rat(1), Rat(1)),
                                              enc_cos_pi(cap)), Rat(1, 2))),
        "area_band": enc_mid(enc_sin_pi(cap)),
    }
