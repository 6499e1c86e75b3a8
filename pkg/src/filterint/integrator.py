"""Filter integrals on snapshots: plain, weighted, conditional, iterated,
sequence, and Laurent-sliced averages, plus probability shorthands.

Every integral is a lazy element whose evaluator computes the exact average
of the integrand over a snapshot.  Nothing here approximates; finite-level
certification is delegated to the filter's guarantee registry through the
element's metadata.
"""

from __future__ import annotations

import itertools

from .backend import Rat, as_rat, fmt_rat, is_rational
from .config import get_config
from .elements import LazyElement, estimate_standard_part
from .filters import Constraint, FilterBase, Guarantee, point_inclusion
from .measures import BitFunction, FAMeasure, jessen_sum
from .regions import SetRegion
from .scalars import (
    LaurentSeries,
    OrderDecision,
    as_scalar,
    compare,
    standard_part,
    valuation,
)
from .snapshots import (
    ExplicitSnapshot,
    ProductSnapshot,
    RectangleRegion,
    SequenceSnapshot,
)
from .witness import MeasureFilter, _grant_common


class IntegrationError(RuntimeError):
    """An evaluator could not honor its contract on a snapshot."""


class IntegrableFunction:
    """A pointwise integrand with declared class tags.

    Tags drive certification and fast paths: "bound" (uniform |f| <= M),
    "indicator" (a region), "staircase" (disjoint (region, value) pieces),
    "lipschitz" (a Lipschitz constant), "product" (a factor pair for
    rectangle integrands), "slices" (declared Laurent slice integrands),
    "standardizable" with "standard_function" (the real shadow on lifted
    points).  Declarations are trusted by the evaluators and spot-checked
    by the test suite.  `requires` lists witness constraints the integrand
    needs before it is meaningful, e.g. a point inclusion.
    """

    __slots__ = ("evaluate", "label", "dependency", "tags", "requires")

    def __init__(self, evaluate, label, dependency=None, tags=None,
                 requires=()):
        self.evaluate = evaluate
        self.label = label
        self.dependency = (None if dependency is None
                           else frozenset(dependency))
        self.tags = dict(tags or {})
        self.requires = tuple(requires)

    def __call__(self, x):
        return self.evaluate(x)

    def __repr__(self):
        return f"IntegrableFunction({self.label})"


# ---------------------------------------------------------------------------
# Integrand constructors.


def indicator(region: SetRegion, label=None) -> IntegrableFunction:
    """The characteristic function of a region."""
    def ev(x):
        return Rat(1) if region.contains(x) else Rat(0)

    return IntegrableFunction(
        ev, label or f"chi[{region.descriptor()}]",
        tags={"indicator": region, "bound": Rat(1),
              "staircase": ((region, Rat(1)),), "standardizable": True})


def constant_fn(c, space=None) -> IntegrableFunction:
    """A constant integrand; pass the space to make it certifiable."""
    c = as_scalar(c)
    label = fmt_rat(c) if is_rational(c) else repr(c)
    tags = {"constant": c}
    if is_rational(c):
        tags["bound"] = abs(c)
        if space is not None:
            tags["staircase"] = ((space, c),)
    return IntegrableFunction(lambda x: c, label, tags=tags)


def staircase_fn(pieces, label=None) -> IntegrableFunction:
    """Finite sum of rational multiples of indicators on disjoint regions."""
    pieces = tuple((Y, as_rat(v)) for Y, v in pieces)

    def ev(x):
        total = Rat(0)
        for Y, v in pieces:
            if Y.contains(x):
                total += v
        return total

    bound = max((abs(v) for _, v in pieces), default=Rat(0))
    text = label or "step[" + ",".join(
        f"{fmt_rat(v)}@{Y.descriptor()}" for Y, v in pieces) + "]"
    return IntegrableFunction(
        ev, text,
        tags={"staircase": pieces, "bound": bound, "standardizable": True})


def lipschitz_fn(evaluate, lipschitz, bound, label) -> IntegrableFunction:
    """A real integrand with a declared Lipschitz constant and sup bound."""
    return IntegrableFunction(
        evaluate, label,
        tags={"lipschitz": as_rat(lipschitz), "bound": as_rat(bound),
              "standardizable": True})


def product_fn(g: IntegrableFunction, h: IntegrableFunction,
               label=None) -> IntegrableFunction:
    """f(x, y) = g(x) h(y) on rectangle points."""
    def ev(p):
        x, y = p
        return as_scalar(g.evaluate(x)) * as_scalar(h.evaluate(y))

    tags = {"product": (g, h)}
    if "bound" in g.tags and "bound" in h.tags:
        tags["bound"] = g.tags["bound"] * h.tags["bound"]
    if "indicator" in g.tags and "indicator" in h.tags:
        tags["indicator"] = RectangleRegion(g.tags["indicator"],
                                            h.tags["indicator"])
    return IntegrableFunction(ev, label or f"({g.label})*({h.label})",
                              tags=tags)


def transpose_fn(f: IntegrableFunction, label=None) -> IntegrableFunction:
    """The same integrand with its two rectangle arguments swapped."""
    def ev(p):
        x, y = p
        return f.evaluate((y, x))

    tags = {}
    gh = f.tags.get("product")
    if gh is not None:
        tags["product"] = (gh[1], gh[0])
    if "bound" in f.tags:
        tags["bound"] = f.tags["bound"]
    return IntegrableFunction(ev, label or f"swap({f.label})", tags=tags)


def laurent_fn(evaluate, label, slices=None, bound=None) -> IntegrableFunction:
    """A series-valued integrand with optionally declared slice integrands.

    `slices` maps an exponent to the rational-valued IntegrableFunction for
    that coefficient; undeclared exponents are handled observed-only.
    """
    tags = {}
    if slices:
        tags["slices"] = dict(slices)
    if bound is not None:
        tags["bound"] = as_rat(bound)
    return IntegrableFunction(evaluate, label, tags=tags)


def scale_probe_fn(anchor=None) -> IntegrableFunction:
    """e^{-1} on the segment [0, e], zero elsewhere.

    Averaging it over any snapshot that meets the segment yields a scalar
    of negative valuation, whatever the filter; the anchor point is carried
    as a witness requirement so canonical witnesses do meet the segment.
    """
    if anchor is None:
        anchor = Rat(0)
    inv = LaurentSeries.eps(-1)
    zero = Rat(0)

    def inside(x):
        s = as_scalar(x)
        return (compare(s, zero) is not OrderDecision.LESS
                and compare(s, LaurentSeries.eps(1)) is not
                OrderDecision.GREATER)

    if not inside(anchor):
        raise ValueError(f"anchor {anchor!r} lies outside [0, e]")
    return IntegrableFunction(
        lambda x: inv if inside(x) else zero,
        "e^-1*chi[0,e]",
        tags={"standardizable": False},
        requires=(point_inclusion(anchor),))


# ---------------------------------------------------------------------------
# Core averaging.


def _average_over(f, points, denom):
    total = None
    for x in points:
        try:
            v = as_scalar(f.evaluate(x))
        except IntegrationError:
            raise
        except Exception as exc:
            raise IntegrationError(
                f"integrand {f.label} failed at point {x!r}") from exc
        total = v if total is None else total + v
    if total is None:
        raise IntegrationError("nothing to average")
    return total / denom


def integrate(f: IntegrableFunction, F: FilterBase) -> LazyElement:
    """The class of z -> (sum of f over z) / |z|.

    Indicator and staircase integrands use exact counting, which also
    works on snapshots with symbolic counts; everything else walks the
    points.
    """
    Y = f.tags.get("indicator")
    pieces = f.tags.get("staircase")
    if Y is not None:
        def ev(z):
            return Rat(z.count(Y), z.size())
    elif pieces is not None:
        def ev(z):
            n = z.size()
            return sum((v * Rat(z.count(P), n) for P, v in pieces), Rat(0))
    else:
        def ev(z):
            return _average_over(f, z, z.size())
    meta = {"kind": "integral", "function": f, "filter": F}
    if f.requires:
        meta["requires"] = f.requires
    return LazyElement(ev, f"int({f.label}; {F.name})", meta=meta)


def integrate_weighted(f: IntegrableFunction, F: FilterBase,
                       partition) -> LazyElement:
    """Weighted sum of the per-cell averages of f.

    Every cell named by the partition must meet the witness.
    """
    cells = partition.cells

    def ev(z):
        total = Rat(0)
        for region, w in cells:
            members = [x for x in z if region.contains(x)]
            if not members:
                raise IntegrationError(
                    f"cell unmet: {region.descriptor()}")
            total = total + w * _average_over(f, members, len(members))
        return total

    meta = {"kind": "weighted-integral", "function": f, "filter": F,
            "partition": partition}
    if f.requires:
        meta["requires"] = f.requires
    return LazyElement(ev, f"wint({f.label}; {F.name})", meta=meta)


def probability(A: SetRegion, F: FilterBase) -> LazyElement:
    return integrate(indicator(A), F)


def expectation(f: IntegrableFunction, F: FilterBase) -> LazyElement:
    return integrate(f, F)


def cond_expectation(f: IntegrableFunction, A, F: FilterBase,
                     anchor=None) -> LazyElement:
    """Average of f over the part of the witness inside A.

    A designated point of A is attached as a witness requirement, so the
    canonical witness chain always meets the conditioning event.  Regions
    without samplers (tree events, for one) skip the injection and rely on
    the filter's own generators instead; an explicit anchor overrides.
    """
    if anchor is None:
        try:
            anchor = A.sample(1, seed=1)[0]
        except (AttributeError, TypeError, NotImplementedError):
            anchor = None
    req = f.requires
    if anchor is not None:
        req = req + (point_inclusion(anchor),)

    inter = None
    Y = f.tags.get("indicator")
    if Y is not None:
        meet = getattr(A, "intersect", None)
        if meet is not None:
            try:
                inter = meet(Y)
            except (AttributeError, TypeError, ValueError):
                inter = None
    if inter is not None:
        def ev(z):
            hits = z.count(A)
            if hits == 0:
                raise IntegrationError(
                    "witness disjoint from conditioning event")
            return Rat(z.count(inter), hits)
    else:
        def ev(z):
            members = [x for x in z if A.contains(x)]
            if not members:
                raise IntegrationError(
                    "witness disjoint from conditioning event")
            return _average_over(f, members, len(members))

    meta = {"kind": "cond-expectation", "function": f, "event": A,
            "filter": F}
    if req:
        meta["requires"] = req
    return LazyElement(
        ev, f"cond({f.label} | {A.descriptor()}; {F.name})", meta=meta)


def standard_integral(f: IntegrableFunction, F: FilterBase, level: int):
    """Finite-level standard-part estimate of the integral of f."""
    return estimate_standard_part(integrate(f, F), F, level)


# ---------------------------------------------------------------------------
# Iterated integrals on rectangle snapshots.


def iterated_integral(f: IntegrableFunction, F: FilterBase,
                      G: FilterBase) -> LazyElement:
    """Inner average over the first axis, outer average over the second.

    On every rectangle snapshot this equals the one-step average exactly,
    by ring algebra alone.  Integrands with a declared factor pair skip
    the double loop.
    """
    gh = f.tags.get("product")
    if gh is not None:
        g, h = gh

        def ev(z):
            z0, z1 = _rect_axes(z)
            return (_average_over(g, z0, z0.size())
                    * _average_over(h, z1, z1.size()))
    else:
        def ev(z):
            z0, z1 = _rect_axes(z)
            outer = None
            for y in z1:
                inner = _average_over(
                    f, ((x, y) for x in z0), z0.size())
                outer = inner if outer is None else outer + inner
            return outer / z1.size()

    meta = {"kind": "iterated-integral", "function": f, "filters": (F, G)}
    if f.requires:
        meta["requires"] = f.requires
    return LazyElement(ev, f"iter({f.label})", meta=meta)


def _rect_axes(z):
    if not isinstance(z, ProductSnapshot):
        raise TypeError("iterated integral needs a rectangle snapshot")
    return z.axes


# ---------------------------------------------------------------------------
# Finitely dependent integrands over indexed filter families.


def integrate_findep(f: IntegrableFunction, Fs) -> LazyElement:
    """Average of a finitely dependent f over indexed component witnesses.

    The evaluator takes a dict {coordinate: snapshot} whose key set must
    cover the declared dependency.  The value is the average over the full
    coordinate array, so enlarging the key set with dummy coordinates
    never changes it; a probe pair checks the declaration on every call.
    """
    if f.dependency is None:
        raise ValueError(f"{f.label} declares no dependency")
    dep = f.dependency

    def ev(zdict):
        idx = sorted(zdict)
        missing = sorted(dep.difference(idx))
        if missing:
            raise IntegrationError(
                f"witness lacks dependency coordinates {missing}")
        cols = [list(zdict[i]) for i in idx]
        denom = 1
        for col in cols:
            denom *= len(col)
        if denom > get_config().enumeration_cap:
            raise IntegrationError("coordinate array too large to enumerate")
        _probe_dependency(f, idx, cols)
        total = None
        for combo in itertools.product(*cols):
            v = as_scalar(f.evaluate(dict(zip(idx, combo))))
            total = v if total is None else total + v
        return total / denom

    return LazyElement(
        ev, f"findep({f.label})",
        meta={"kind": "findep-integral", "function": f, "filters": Fs})


def _probe_dependency(f, idx, cols):
    base = {i: col[0] for i, col in zip(idx, cols)}
    v0 = as_scalar(f.evaluate(base))
    for i, col in zip(idx, cols):
        if i in f.dependency or len(col) < 2:
            continue
        changed = dict(base)
        changed[i] = col[1]
        if as_scalar(f.evaluate(changed)) != v0:
            raise IntegrationError("dependency violated")


def findep_witness(Fs, indices, level: int) -> dict:
    """Component witnesses for an index set, keyed by coordinate."""
    return {i: Fs(i).witness(level) for i in indices}


# ---------------------------------------------------------------------------
# Sequence integrals on (head set, tail) witnesses.


def integrate_sequence(f: BitFunction, Fs, H: FilterBase) -> LazyElement:
    """Average of f over the completions of a sequence witness.

    The completions of (s, y) with |s| = N are precisely the dyadic shift
    orbit of y at scale 2^N, so the closed-form shift average computes the
    snapshot value exactly.  The component filters are fixed by the
    construction of H over bit coordinates; Fs is validated against that.
    """
    if not isinstance(f, BitFunction):
        raise TypeError("sequence integration needs a BitFunction")
    if Fs is not None:
        z0 = Fs(0).witness(1)
        if any(b not in (0, 1) for b in z0):
            raise ValueError("component filters must range over bits")

    def ev(z):
        if not isinstance(z, SequenceSnapshot):
            raise TypeError("sequence integral needs a sequence snapshot")
        return jessen_sum(f, z.n_coords, z.tail)

    return LazyElement(
        ev, f"seqint({f.label})",
        meta={"kind": "sequence-integral", "function": f, "filter": H})


# ---------------------------------------------------------------------------
# Laurent slice decomposition of integrals.


def _slice_eval(f, i, part):
    def ev(x):
        v = as_scalar(f.evaluate(x))
        if not isinstance(v, LaurentSeries):
            v = LaurentSeries.from_rational(v)
        below, at, above = v.slice_parts(i)
        if part == "below":
            return below
        if part == "at":
            return at
        return above
    return ev


def slice_fn(f: IntegrableFunction, i: int, part: str) -> IntegrableFunction:
    """One slice of a series-valued integrand: part is below, at, or above.

    A declared slice integrand is preferred for the rational "at" part so
    its class tags can certify the coefficient.
    """
    if part not in ("below", "at", "above"):
        raise ValueError(f"unknown slice part {part!r}")
    if part == "at":
        declared = f.tags.get("slices", {}).get(i)
        if declared is not None:
            return declared
    mark = {"below": f"<{i}", "at": f"@{i}", "above": f">{i}"}[part]
    return IntegrableFunction(_slice_eval(f, i, part), f"{f.label}{mark}",
                              requires=f.requires)


def laurent_decompose_integral(f: IntegrableFunction, F: FilterBase,
                               i: int, level=None) -> dict:
    """Split the integral of f at exponent i.

    Always returns the three component elements (below, coefficient,
    above) and their exact recombination.  Given a level, also estimates
    the standard part of the coefficient; when that estimate is certified
    and tight the dict gains the standard coefficient a and the remainder
    element eta = e^i (coefficient - a) + above, whose value has valuation
    above i exactly when the witness realizes the coefficient average as a.
    """
    below_el = integrate(slice_fn(f, i, "below"), F)
    coeff_el = integrate(slice_fn(f, i, "at"), F)
    above_el = integrate(slice_fn(f, i, "above"), F)
    eps_i = LaurentSeries.eps(i)
    out = {
        "below": below_el,
        "coefficient": coeff_el,
        "above": above_el,
        "recombined": below_el + coeff_el * eps_i + above_el,
    }
    if level is not None:
        est = estimate_standard_part(coeff_el, F, level)
        out["coefficient_estimate"] = est
        if est.certified and est.width() <= Rat(2, level):
            a = (est.lower + est.upper) / 2
            out["standard_coefficient"] = a
            out["eta"] = (coeff_el - a) * eps_i + above_el
    return out


def laurent_expansion(f: IntegrableFunction, F: FilterBase, lo: int,
                      hi: int, level: int) -> dict:
    """Per-scale expansion of the integral between exponents lo and hi.

    Every slice in the range must have a certified tight standard part.
    Returns {"below": element, "scales": {i: (a_i, deviation element)},
    "tail": element, "check": callable} where check(z) asserts the scale
    ladder on one snapshot: each nonzero per-scale value e^i (a_i + d_i)
    sits at valuation exactly i, nonzero deviations keep strictly smaller
    valuation than every later scale, and the tail value lies strictly
    above hi.  It returns the (scale, valuation) report.
    """
    scales = {}
    for i in range(lo, hi + 1):
        el = integrate(slice_fn(f, i, "at"), F)
        est = estimate_standard_part(el, F, level)
        if not est.certified or est.width() > Rat(2, level):
            raise IntegrationError(
                f"slice at exponent {i} has no certified standard integral")
        a = (est.lower + est.upper) / 2
        scales[i] = (a, el - a)
    below_el = integrate(slice_fn(f, lo, "below"), F)
    tail_el = integrate(slice_fn(f, hi, "above"), F)

    def check(z):
        report = []
        floor = None
        for i in sorted(scales):
            a, dev = scales[i]
            d = dev.value(z)
            term = LaurentSeries.eps(i) * (a + d)
            if not term.is_zero():
                lam = valuation(term)
                if lam != i or (floor is not None and lam <= floor):
                    raise IntegrationError(
                        f"scale separation violated at exponent {i}")
                report.append((i, lam))
                floor = lam
            if d != 0:
                lam_dev = valuation(LaurentSeries.eps(i) * d)
                later = [j for j in scales if j > i
                         and scales[j][0] + scales[j][1].value(z) != 0]
                if any(lam_dev >= j for j in later):
                    raise IntegrationError(
                        f"deviation at exponent {i} reaches a later scale")
        t = as_scalar(tail_el.value(z))
        if not isinstance(t, LaurentSeries):
            t = LaurentSeries.from_rational(t)
        if not t.is_zero():
            lam = valuation(t)
            if not lam > hi:
                raise IntegrationError("tail reaches back into the scales")
            report.append(("tail", lam))
        return report

    return {"below": below_el, "scales": scales, "tail": tail_el,
            "check": check}


# ---------------------------------------------------------------------------
# Lifting a measure filter to Laurent-valued points.


class LiftedFilter(FilterBase):
    """Witnesses of a measure filter, fattened into equal Laurent fibers.

    Each base point r is replaced by the points r + j*e for fiber slots
    j = 1..fiber, so standard parts project a witness back onto a base
    witness and all fibers have the same size.  Base constraints act on
    the projection; guarantees delegate to the base filter through the
    integrand's declared standard shadow.
    """

    def __init__(self, mu: FAMeasure, fiber: int = 2):
        if fiber < 2:
            raise ValueError("need at least two fiber slots")
        self.base = MeasureFilter(mu)
        self.fiber = fiber
        self._slots = tuple(LaurentSeries.eps(1, j)
                            for j in range(1, fiber + 1))
        super().__init__(f"lifted({self.base.name})", self._gen,
                         self._oracle, guarantee_fn=self._grant,
                         space=None)

    def _lift(self, c: Constraint) -> Constraint:
        return Constraint(
            "lifted", {"base": c},
            lambda z: c.check(standard_projection(z)),
            f"lifted({c.description})")

    def _gen(self, i):
        return self._lift(self.base.generator(i))

    def _oracle(self, constraints, seed):
        base_cs = []
        for c in constraints:
            if c.kind == "lifted":
                base_cs.append(c.params["base"])
            elif c.kind == "point":
                r = self._slot_base(c.params["point"])
                base_cs.append(point_inclusion(r))
            else:
                raise ValueError(f"lifted oracle cannot meet {c}")
        z0 = self.base._oracle(tuple(base_cs), seed)
        pts = []
        for r in z0:
            root = LaurentSeries.from_rational(r)
            for slot in self._slots:
                pts.append(root + slot)
        return ExplicitSnapshot(pts)

    def _slot_base(self, p):
        """The base point under a fiber point, validating the slot."""
        p = as_scalar(p)
        if not isinstance(p, LaurentSeries):
            p = LaurentSeries.from_rational(p)
        r = standard_part(p)
        if (p - r) not in self._slots:
            raise ValueError(f"{p!r} is not on a fiber slot")
        return as_rat(r)

    def _grant(self, meta, level):
        return _grant_common(self, meta, level, "integral")

    def _integral_grant(self, f, level):
        if not f.tags.get("standardizable"):
            return None
        g = f.tags.get("standard_function")
        if g is None:
            return None
        inner = self.base._integral_grant(g, level)
        if inner is None:
            return None
        return Guarantee(inner.bound,
                         tuple(self._lift(c) for c in inner.constraints))

    def probe_standardizable(self, f: IntegrableFunction, level: int):
        """One fiber pair where f jumps by a non-infinitesimal, or None."""
        z = self.witness(level)
        fibers = {}
        for x in z:
            fibers.setdefault(standard_part(x), []).append(x)
        for group in fibers.values():
            head = group[0]
            v0 = as_scalar(f.evaluate(head))
            for other in group[1:]:
                diff = as_scalar(f.evaluate(other)) - v0
                if not isinstance(diff, LaurentSeries):
                    diff = LaurentSeries.from_rational(diff)
                if not diff.is_zero() and valuation(diff) < 1:
                    return head, other
        return None


def standard_projection(z) -> ExplicitSnapshot:
    """The snapshot of standard parts of a lifted witness."""
    return ExplicitSnapshot([as_rat(standard_part(x)) for x in z])


def lift_real_filter(mu: FAMeasure, fiber: int = 2) -> LiftedFilter:
    return LiftedFilter(mu, fiber)


def standardizable_fn(g: IntegrableFunction, perturb=None,
                      label=None) -> IntegrableFunction:
    """Lift a real integrand to Laurent points: g at the standard part,
    plus an optional infinitesimal perturbation e * perturb(x)."""
    def ev(x):
        s = as_scalar(x)
        r = as_rat(standard_part(s))
        v = as_scalar(g.evaluate(r))
        if perturb is not None:
            v = v + LaurentSeries.eps(1) * as_scalar(perturb(x))
        return v

    return IntegrableFunction(
        ev, label or f"lift({g.label})",
        tags={"standardizable": True, "standard_function": g,
              "bound": g.tags.get("bound")})
