"""Named end-to-end demonstrations with tabular reports.

Each scenario assembles its filters and integrands, evaluates them at a
requested level, and returns rows of a fixed schema: scenario, quantity,
level, lower, upper, certified, expected, provenance.  The provenance
column says where the expected value comes from: "closed-form" for
values with a pencil-and-paper derivation, "oracle" for values checked
by an independent routine, "exact" for definitional identities, and
"observed" for quantities reported without a reference value.

All cells are strings and every scenario is deterministic for a fixed
level and seed, so serialized reports are byte-stable.
"""

from .backend import Rat
from .elements import estimate_standard_part
from .filters import (full_finite_filter, initial_segment_filter,
                      point_inclusion, tree_filter, tree_q_filter)
from .geometry import (bk_scenario, circle_fragment, dimension_compare)
from .geomfilter import CombFamily, geometric_filter
from .integrator import (IntegrableFunction, indicator, integrate,
                         integrate_sequence, iterated_integral,
                         laurent_decompose_integral, laurent_expansion,
                         laurent_fn, lift_real_filter, lipschitz_fn,
                         probability, product_fn, scale_probe_fn,
                         standard_projection, standardizable_fn)
from .measures import (inner_outer_measure, length_measure, mixture_measure)
from .products import (all_zero_fn, binary_real_fn, cylinder_fn,
                       product_filter, product_member, sequence_filter,
                       steep_mesh_filter)
from .regions import IntervalRegion, SetRegion, dyadics_in
from .scalars import (LaurentSeries, as_scalar, format_laurent,
                      standard_part, valuation)
from .snapshots import ProductSnapshot, RectangleRegion, TreeEvent
from .witness import measure_filter, weighted_filter

COLUMNS = ("scenario", "quantity", "level", "lower", "upper",
           "certified", "expected", "provenance")

SCENARIOS = {}
DEFAULT_LEVELS = {}


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    if isinstance(v, LaurentSeries):
        return format_laurent(v)
    return str(v)


def _row(scenario, quantity, level, lower, upper, certified, expected,
         provenance):
    return {
        "scenario": scenario,
        "quantity": quantity,
        "level": str(level),
        "lower": _fmt(lower),
        "upper": _fmt(upper),
        "certified": _fmt(bool(certified)),
        "expected": _fmt(expected),
        "provenance": provenance,
    }


def _scenario(name, default_level):
    def register(fn):
        SCENARIOS[name] = fn
        DEFAULT_LEVELS[name] = default_level
        return fn
    return register


def scenario_names():
    return tuple(sorted(SCENARIOS))


def run_scenario(name, level=None, seed=0, tol=None):
    """Rows for one named scenario; KeyError for unknown names."""
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}")
    if level is None:
        level = DEFAULT_LEVELS[name]
    level = int(level)
    if level < 1:
        raise ValueError("level must be positive")
    return SCENARIOS[name](level, int(seed), tol)


def _tol_level(level, tol):
    """Raise the working level until its guarantee beats tol, capped."""
    if tol is None:
        return level
    t = Rat(tol)
    if t <= 0:
        raise ValueError("tolerance must be positive")
    while Rat(1, level) > t and level < 4096:
        level *= 2
    return level


# ---------------------------------------------------------------------------
# Branching trees with integer and rational labels.


@_scenario("trees", 12)
def _trees(level, seed, tol):
    rows = []
    for k in (2, 3):
        depth = level if k == 2 else min(level, 8)
        F = tree_filter(k)
        z = F.witness(depth)
        events = (
            (1, 2, TreeEvent.branch(2, 1)),
            (2, 5, TreeEvent.branch(2, 1)
                .intersect(TreeEvent.branch(5, 0))),
            (3, 6, TreeEvent.branch(1, 0)
                .intersect(TreeEvent.branch(3, 1))
                .intersect(TreeEvent.branch(6, k - 1))),
        )
        for r, last, ev in events:
            avg = probability(ev, F).value(z)
            rows.append(_row(
                "trees", f"chi[k={k},r={r}]", depth, avg, avg,
                True, Rat(1, k ** r), "closed-form"))
            # conditioning on sequences long enough to see every branch
            # cancels the short-sequence dilution exactly
            cond = Rat(z.count(ev), z.count(TreeEvent.longer_than(last)))
            rows.append(_row(
                "trees", f"cond[k={k},r={r}]", depth, cond, cond,
                True, Rat(1, k ** r), "closed-form"))
    return rows


@_scenario("tree-q", 50)
def _tree_q(level, seed, tol):
    F = tree_q_filter()
    z = F.witness(level)
    e0 = TreeEvent(bounds=((0, Rat(0), Rat(1, 2)),))
    e1 = TreeEvent(bounds=((1, Rat(1, 4), Rat(3, 4)),))
    p0 = probability(e0, F).value(z)
    p1 = probability(e1, F).value(z)
    p01 = probability(e0.intersect(e1), F).value(z)
    defect = abs(p01 - p0 * p1)
    return [
        _row("tree-q", "chi[x0 in [0,1/2)]", level, p0, p0, True,
             Rat(1, 2), "closed-form"),
        _row("tree-q", "chi[x1 in [1/4,3/4)]", level, p1, p1, True,
             Rat(1, 2), "closed-form"),
        _row("tree-q", "chi[both]", level, p01, p01, True,
             Rat(1, 4), "closed-form"),
        _row("tree-q", "independence-defect", level, defect, defect, True,
             None, "observed"),
    ]


# ---------------------------------------------------------------------------
# Representation of an interval measure by certified averages.


@_scenario("measure-rep", 100)
def _measure_rep(level, seed, tol):
    level = _tol_level(level, tol)
    F = measure_filter(length_measure())
    half = indicator(IntervalRegion.of(0, Rat(1, 2)))
    ident = lipschitz_fn(lambda x: x, 1, 1, "id")
    square = lipschitz_fn(lambda x: x * x, 2, 1, "square")
    targets = (
        (half, Rat(1, 2), "exact"),
        (ident, Rat(1, 2), "oracle"),
        (square, Rat(1, 3), "oracle"),
    )
    rows = []
    for f, expected, tag in targets:
        est = estimate_standard_part(integrate(f, F), F, level)
        rows.append(_row("measure-rep", f"avg[{f.label}]", level,
                         est.lower, est.upper, est.certified, expected, tag))
    rows.append(_row("measure-rep", "witness-size", level,
                     F.witness(level).size(), F.witness(level).size(),
                     True, None, "observed"))
    return rows


# ---------------------------------------------------------------------------
# A block set with no asymptotic density under initial segments.


class _BlockUnion(SetRegion):
    """Union of the blocks [4^k, 2*4^k) in the naturals."""

    def contains(self, x):
        n = int(x)
        return n == x and n >= 1 and n.bit_length() % 2 == 1

    def descriptor(self):
        return "union[4^k,2*4^k)"


@_scenario("oscillate", 20)
def _oscillate(level, seed, tol):
    F = initial_segment_filter()
    el = probability(_BlockUnion(), F)
    start = 8 if level >= 8 else 1
    rows = []
    least = None
    for n in range(start, level + 1):
        est = estimate_standard_part(el, F, n)
        gap = est.upper - est.lower
        least = gap if least is None else min(least, gap)
        rows.append(_row("oscillate", f"density-bracket@{n}", n,
                         est.lower, est.upper, est.certified, None,
                         "observed"))
    rows.append(_row("oscillate", "least-gap", level, least, least,
                     False, Rat(1, 4), "closed-form"))
    return rows


# ---------------------------------------------------------------------------
# A dense countable set outside the interval algebra.


@_scenario("nonmeasurable-gap", 12)
def _nonmeasurable_gap(level, seed, tol):
    mu = length_measure()
    Y = dyadics_in(IntervalRegion.of(0, Rat(1, 2)))
    inner, outer = inner_outer_measure(Y, mu)
    F = measure_filter(mu)
    est = estimate_standard_part(probability(Y, F), F, level)
    return [
        _row("nonmeasurable-gap", "inner-measure", level, inner, inner,
             True, Rat(0), "exact"),
        _row("nonmeasurable-gap", "outer-measure", level, outer, outer,
             True, Rat(1, 2), "exact"),
        _row("nonmeasurable-gap", "inner-outer-gap", level, outer - inner,
             outer - inner, True, Rat(1, 2), "closed-form"),
        _row("nonmeasurable-gap", "observed-average", level, est.lower,
             est.upper, est.certified, None, "observed"),
    ]


# ---------------------------------------------------------------------------
# Product filters: canonical rectangles and the product law.


@_scenario("product-asym", 8)
def _product_asym(level, seed, tol):
    mu = length_measure()
    P = product_filter(measure_filter(mu), measure_filter(mu))
    never_smaller = product_member(
        lambda z: z.axes[0].size() >= z.axes[1].size(), P, level)
    wider = product_member(
        lambda z: z.axes[0].size() < z.axes[1].size(), P, level)
    z = P.witness(level)
    taller = z.axes[0].size() > z.axes[1].size()
    return [
        _row("product-asym", "first-axis-size", level,
             z.axes[0].size(), z.axes[0].size(), True, None, "observed"),
        _row("product-asym", "second-axis-size", level,
             z.axes[1].size(), z.axes[1].size(), True, None, "observed"),
        _row("product-asym", "inner-level-ratio", level,
             Rat(P.inner(level), level), Rat(P.inner(level), level),
             True, Rat(2), "exact"),
        _row("product-asym", "first-axis-never-smaller", level,
             never_smaller, never_smaller, True, True, "exact"),
        _row("product-asym", "first-axis-taller-at-top", level, taller,
             taller, True, True, "exact"),
        _row("product-asym", "first-axis-ever-wider", level, wider, wider,
             True, False, "exact"),
    ]


@_scenario("prodchar", 8)
def _prodchar(level, seed, tol):
    level = _tol_level(level, tol)
    mu = length_measure()
    F = measure_filter(mu)
    G = measure_filter(mu)
    P = product_filter(F, G)
    A = IntervalRegion.of(0, Rat(1, 2))
    B = IntervalRegion.of(Rat(1, 4), Rat(3, 4))
    estA = estimate_standard_part(probability(A, F), F, level)
    estB = estimate_standard_part(probability(B, G), G, level)
    est = estimate_standard_part(
        integrate(indicator(RectangleRegion(A, B)), P), P, level)
    return [
        _row("prodchar", "chi[A]", level, estA.lower, estA.upper,
             estA.certified, Rat(1, 2), "exact"),
        _row("prodchar", "chi[B]", level, estB.lower, estB.upper,
             estB.certified, Rat(1, 2), "exact"),
        _row("prodchar", "chi[AxB]", level, est.lower, est.upper,
             est.certified, Rat(1, 4), "closed-form"),
        _row("prodchar", "bracket-width", level, est.width(), est.width(),
             est.certified, Rat(2, level), "closed-form"),
    ]


@_scenario("fubini", 6)
def _fubini(level, seed, tol):
    mu = length_measure()
    F = measure_filter(mu)
    G = measure_filter(mu)
    P = product_filter(F, G)
    f = product_fn(lipschitz_fn(lambda x: x, 1, 1, "id"),
                   indicator(IntervalRegion.of(Rat(1, 4), Rat(3, 4))))
    one = integrate(f, P)
    two = iterated_integral(f, F, G)
    agree = all(one.value(P.witness(k)) == two.value(P.witness(k))
                for k in range(1, level + 1))
    v = one.value(P.witness(level))
    return [
        _row("fubini", "iterated==one-step", level, agree, agree, True,
             True, "exact"),
        _row("fubini", "avg[id*chi]", level, v, v, False, Rat(1, 4),
             "closed-form"),
    ]


@_scenario("fubini-counterexample", 12)
def _fubini_counter(level, seed, tol):
    R = steep_mesh_filter()
    recip = IntegrableFunction(lambda x: Rat(1) / x, "recip")
    spike = IntegrableFunction(
        lambda y: Rat(1) if y == Rat(1, 2) else Rat(0), "spike")
    z = ProductSnapshot(R.witness(2 * level), R.witness(level))
    a = iterated_integral(product_fn(recip, spike), R, R).value(z)
    b = iterated_integral(product_fn(spike, recip), R, R).value(z)
    return [
        _row("fubini-counterexample", "first-axis-size", level,
             z.axes[0].size(), z.axes[0].size(), True, None, "observed"),
        _row("fubini-counterexample", "second-axis-size", level,
             z.axes[1].size(), z.axes[1].size(), True, None, "observed"),
        _row("fubini-counterexample", "avg[recip*spike]", level, a, a,
             False, "unbounded", "closed-form"),
        _row("fubini-counterexample", "avg[spike*recip]", level, b, b,
             False, "vanishing", "closed-form"),
    ]


# ---------------------------------------------------------------------------
# Scale decomposition and lifting.


@_scenario("laurent-decompose", 8)
def _laurent_decompose(level, seed, tol):
    F = measure_filter(length_measure())
    chi = indicator(IntervalRegion.of(0, Rat(1, 2)))
    ident = lipschitz_fn(lambda x: x, 1, 1, "id")
    f = laurent_fn(
        lambda x: (as_scalar(chi.evaluate(x))
                   + LaurentSeries.eps(1) * as_scalar(x)),
        "chi+e*id", slices={0: chi, 1: ident})
    out = laurent_decompose_integral(f, F, 0, level)
    whole = integrate(f, F)
    agree = all(out["recombined"].value(F.witness(k))
                == whole.value(F.witness(k))
                for k in range(1, level + 1))
    z = F.witness(level)
    est = out["coefficient_estimate"]
    rows = [
        _row("laurent-decompose", "recombined==whole", level, agree, agree,
             True, True, "exact"),
        _row("laurent-decompose", "coefficient@0", level, est.lower,
             est.upper, est.certified, Rat(1, 2), "closed-form"),
    ]
    if "eta" in out:
        lam = valuation(as_scalar(out["eta"].value(z)))
        rows.append(_row("laurent-decompose", "remainder-valuation", level,
                         lam, lam, True, ">=1", "exact"))
    expn = laurent_expansion(f, F, 0, 1, level)
    for i, (a, _) in sorted(expn["scales"].items()):
        rows.append(_row("laurent-decompose", f"scale[{i}]", level, a, a,
                         True, Rat(1, 2), "oracle"))
    ladder = expn["check"](z)
    text = ",".join(f"{s}@{lam}" for s, lam in ladder)
    rows.append(_row("laurent-decompose", "scale-ladder", level, text,
                     text, True, None, "exact"))
    return rows


@_scenario("lift", 12)
def _lift(level, seed, tol):
    mu = length_measure()
    H = lift_real_filter(mu, 2)
    g = lipschitz_fn(lambda x: x, 1, 1, "id")
    est = estimate_standard_part(integrate(standardizable_fn(g), H), H,
                                 level)
    z = H.witness(level)
    ratio = Rat(z.size(), standard_projection(z).size())
    pert = standardizable_fn(g, perturb=lambda x: Rat(1), label="id+e")
    sp0 = standard_part(as_scalar(integrate(standardizable_fn(g), H)
                                  .value(z)))
    sp1 = standard_part(as_scalar(integrate(pert, H).value(z)))
    return [
        _row("lift", "avg[id]", level, est.lower, est.upper,
             est.certified, Rat(1, 2), "oracle"),
        _row("lift", "fiber-ratio", level, ratio, ratio, True, Rat(2),
             "exact"),
        _row("lift", "perturbation-invisible", level, sp0 == sp1,
             sp0 == sp1, True, True, "exact"),
    ]


# ---------------------------------------------------------------------------
# Geometric scenes.


@_scenario("geometric-limit", 20)
def _geometric_limit(level, seed, tol):
    circ = circle_fragment("circle", (0, 0))
    gamma = geometric_filter((circ,), name="circle-limit")
    z = gamma.witness(level)
    c_arc = gamma.count_of(gamma.fragment_set(circ), z)
    c_seg = gamma.count_of(gamma.cube(1), z)
    ratio = Rat(c_arc, c_seg)
    qtol = Rat(1, 1024)
    length = circ.volume(qtol)
    rel = abs(ratio - length) / length
    return [
        _row("geometric-limit", "arc-length-quadrature", level,
             length - qtol, length + qtol, True, None, "oracle"),
        _row("geometric-limit", "count-ratio", level, ratio, ratio,
             False, length, "oracle"),
        _row("geometric-limit", "relative-gap", level, rel, rel, False,
             Rat(1, 20), "closed-form"),
    ]


@_scenario("geometry-dims", 10)
def _geometry_dims(level, seed, tol):
    comb = CombFamily()
    gamma = geometric_filter(families=(comb,), max_dim=2, name="dims")
    pairs = (
        ("segment-vs-comb", gamma.cube(1), comb),
        ("comb-vs-square", comb, gamma.cube(2)),
        ("segment-vs-square", gamma.cube(1), gamma.cube(2)),
    )
    rows = []
    for label, A, B in pairs:
        verdict = dimension_compare(A, B, gamma, level)
        rows.append(_row("geometry-dims", label, level, verdict, verdict,
                         True, "less", "closed-form"))
    return rows


@_scenario("bk-sphere", 6)
def _bk_sphere(level, seed, tol):
    rep = bk_scenario(Rat(1, 6), level=level)
    rel_cap = abs(rep["cond_cap"] - rep["area_cap"]) / rep["area_cap"]
    rel_band = abs(rep["cond_band"] - rep["area_band"]) / rep["area_band"]
    return [
        _row("bk-sphere", "cap-arc-fraction", level, rep["cond_cap"],
             rep["cond_cap"], False, rep["arc_cap"], "closed-form"),
        _row("bk-sphere", "band-arc-fraction", level, rep["cond_band"],
             rep["cond_band"], False, rep["arc_band"], "closed-form"),
        _row("bk-sphere", "cap-area", level, rep["area_cap"],
             rep["area_cap"], True, None, "oracle"),
        _row("bk-sphere", "band-area", level, rep["area_band"],
             rep["area_band"], True, None, "oracle"),
        _row("bk-sphere", "cap-area-mismatch", level, rel_cap, rel_cap,
             False, ">=1/10", "closed-form"),
        _row("bk-sphere", "band-area-mismatch", level, rel_band, rel_band,
             False, ">=1/10", "closed-form"),
    ]


# ---------------------------------------------------------------------------
# Bit-sequence spaces.


def _bit_components():
    return lambda i: full_finite_filter((0, 1))


@_scenario("cantor-jessen", 12)
def _cantor_jessen(level, seed, tol):
    Fs = _bit_components()
    br = binary_real_fn()
    H = sequence_filter(Fs, certified=((br, Rat(1, 2)),))
    est = estimate_standard_part(integrate_sequence(br, Fs, H), H, level)
    rows = [
        _row("cantor-jessen", "avg[binary-real]", level, est.lower,
             est.upper, est.certified, Rat(1, 2), "closed-form"),
    ]
    z = H.witness(level)
    for pattern in ((0,), (0, 0), (1, 0, 1)):
        f = cylinder_fn(pattern)
        v = integrate_sequence(f, Fs, H).value(z)
        rows.append(_row("cantor-jessen", f"avg[{f.label}]", level, v, v,
                         True, Rat(1, 1 << len(pattern)), "oracle"))
    return rows


@_scenario("baker-rectangles", 7)
def _baker_rectangles(level, seed, tol):
    Fs = _bit_components()
    rect = cylinder_fn((0, 0))
    dom = cylinder_fn((0,) * 10)
    H = sequence_filter(Fs, certified=((rect, Rat(1, 4)),
                                       (dom, Rat(1, 1024))))
    est = estimate_standard_part(integrate_sequence(rect, Fs, H), H, level)
    vanish = all_zero_fn()
    z = H.witness(level)
    observed = integrate_sequence(vanish, Fs, H).value(z)
    # all-zero <= chi of any all-zero cylinder pointwise, so a certified
    # upper bound for the cylinder bounds the vanishing rectangle too.
    dom_est = estimate_standard_part(integrate_sequence(dom, Fs, H), H,
                                     level)
    return [
        _row("baker-rectangles", "rect[1/2,1/2,1,1,...]", level,
             est.lower, est.upper, est.certified, Rat(1, 4),
             "closed-form"),
        _row("baker-rectangles", "vanishing-observed", level, observed,
             observed, True, Rat(0), "exact"),
        _row("baker-rectangles", "vanishing-upper", level, Rat(0),
             dom_est.upper, dom_est.certified, Rat(0), "oracle"),
    ]


# ---------------------------------------------------------------------------
# The probe registry: filters on scalar carriers that can host the
# segment [0, e] at a point.


def registered_scalar_filters():
    """Pairs (filter, anchor) with anchor a carrier point inside [0, e].

    Averaging e^{-1} chi_[0,e] over any witness that meets the segment
    yields a scalar of negative valuation; the probe's requirement pins
    the anchor into canonical witnesses of each registered filter.
    """
    mu = length_measure()
    mix = mixture_measure(((Rat(1, 3), Rat(1, 4)),), mu, Rat(3, 4))
    return (
        (measure_filter(mu), Rat(0)),
        (weighted_filter(mix)[0], Rat(0)),
        (initial_segment_filter(), 0),
        (lift_real_filter(mu, 2), LaurentSeries.eps(1)),
    )


def probe_rows(level, seed=0, tol=None):
    """Valuation of the segment-probe average on each registered filter."""
    rows = []
    probe = scale_probe_fn()
    for F, anchor in registered_scalar_filters():
        el = integrate(probe, F)
        z = F.witness(level, extra=(point_inclusion(anchor),))
        lam = valuation(as_scalar(el.value(z)))
        rows.append(_row("probe", f"valuation[{F.name}]", level, lam, lam,
                         True, "<0", "exact"))
    return rows
