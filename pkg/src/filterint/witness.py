"""Witness construction for measure-induced filters.

The central routine realizes the finite-intersection argument for measure
filters: given regions and required points, allocate exact integer counts
to the positive-measure Boolean atoms, verify every requested clause on the
planned counts by integer arithmetic, and only then sample.  Allocation
prefers an exact common-denominator split (zero rounding error); when the
denominators' lcm is unreasonably large it falls back to floor counts over
a power-of-two total with a single absorber atom, doubling until the plan
verifies.
"""

from __future__ import annotations

import random
from math import gcd

from .backend import Rat, as_rat, fmt_rat, rat_ceil
from .filters import (
    Constraint,
    FilterBase,
    Guarantee,
    measure_proportion,
    point_inclusion,
)
from .measures import FAMeasure, boolean_atoms
from .regions import (
    DifferenceRegion,
    FiniteRegion,
    IntervalRegion,
)
from .snapshots import ExplicitSnapshot


def staircase_budget(cells, budget, mu, relative_to=None) -> Constraint:
    """Sum over cells of | |z∩C|/|z| − μ(C) | < budget.

    With relative_to set, counts and the denominator are taken inside that
    region only (weighted filters constrain the diffuse part of a witness).
    """
    cells = tuple(cells)
    budget = as_rat(budget)
    targets = tuple(mu.evaluate(C) for C in cells)

    def check(z):
        if relative_to is None:
            denom = z.size()
            total = sum(
                (abs(Rat(z.count(C), denom) - t)
                 for C, t in zip(cells, targets)), Rat(0))
        else:
            members = [p for p in z if relative_to.contains(p)]
            if not members:
                return False
            denom = len(members)
            total = Rat(0)
            for C, t in zip(cells, targets):
                inside = sum(1 for p in members if C.contains(p))
                total += abs(Rat(inside, denom) - t)
        return total < budget

    where = "" if relative_to is None else " of the diffuse part"
    return Constraint(
        "budget",
        {"cells": cells, "budget": budget, "targets": targets,
         "relative_to": relative_to},
        check,
        f"budget {fmt_rat(budget)} over {len(cells)} cells{where}")


def _lcm(a, b):
    return a // gcd(a, b) * b


def _uniform_grid_order(cells):
    """K when cells are exactly [i/K, (i+1)/K) for i = 0..K-1, else None."""
    K = len(cells)
    for i, C in enumerate(cells):
        if not isinstance(C, IntervalRegion) or len(C.pieces) != 1:
            return None
        a, b = C.pieces[0]
        if a != Rat(i, K) or b != Rat(i + 1, K):
            return None
    return K


class _Incidence:
    """Atom/point membership bookkeeping, cached across plan revisions."""

    def __init__(self, atoms, points):
        self.atoms = atoms
        self.points = points
        self.probes = [a.sample(1, seed=3)[0] for a, _ in atoms]
        self._atom_idx = {}
        self._pt_count = {}
        self._grid = {}

    def atom_indices(self, region):
        key = region.descriptor()
        got = self._atom_idx.get(key)
        if got is None:
            got = tuple(i for i, p in enumerate(self.probes)
                        if region.contains(p))
            self._atom_idx[key] = got
        return got

    def point_count(self, region):
        key = region.descriptor()
        got = self._pt_count.get(key)
        if got is None:
            got = sum(1 for p in self.points if region.contains(p))
            self._pt_count[key] = got
        return got

    def grid_cells(self, K):
        """Cell index of each atom under the uniform K-grid."""
        got = self._grid.get(K)
        if got is None:
            got = [min(int(p * K), K - 1) for p in self.probes]
            self._grid[K] = got
        return got


def _allocate(fracs, min_total):
    """Integer counts approximating fracs; exact when the lcm is small."""
    lam = 1
    for f in fracs:
        lam = _lcm(lam, int(f.denominator))
        if lam > (1 << 22):
            lam = None
            break
    if lam is not None:
        D = lam * max(1, -(-min_total // lam))
        return [int(f * D) for f in fracs], D
    D = 1
    while D < min_total:
        D <<= 1
    counts = [int(f * D) for f in fracs]
    absorber = max(range(len(fracs)), key=lambda i: counts[i])
    counts[absorber] += D - sum(counts)
    return counts, D


def combinatorial_witness(mu: FAMeasure, Ys, points, n: int, *,
                          abs_props=(), budgets=(), seed=0,
                          min_size=1) -> ExplicitSnapshot:
    """A snapshot z with: the given points; n·ℓ < |z|; z minus the points
    inside ⋃Ys whenever μ(⋃Ys) > 0; and every pairwise count ratio
    |z∩Y_j|/|z∩Y_i| within 1/n of μ(Y_j)/μ(Y_i) when μ(Y_i) > 0.

    abs_props: extra (region, m) clauses  | |z∩Y|/|z| − μ(Y) | < 1/m.
    budgets: extra (cells, targets, budget, relative_to) staircase clauses
    bounding the summed proportion deviation over the cells.
    """
    if n < 1:
        raise ValueError("n must be positive")
    Ys = list(Ys)
    points = list(points)
    ell = len(points)
    rng = random.Random(seed)

    measures = [mu.evaluate(Y) for Y in Ys]
    pos = [Y for Y, m in zip(Ys, measures) if m > 0]

    if not pos:
        # zero-measure branch: the points, padded from outside ⋃Ys
        need = max(n * ell + 1, min_size, 1)
        pads = []
        taken = list(points)
        while ell + len(pads) < need:
            cand = mu.space.sample(1, exclude=taken, seed=rng)[0]
            taken.append(cand)
            if not any(Y.contains(cand) for Y in Ys):
                pads.append(cand)
        return ExplicitSnapshot(points + pads)

    clause_regions = list(pos)
    clause_regions.extend(Y for Y, *_ in abs_props)
    for cells, *_ in budgets:
        clause_regions.extend(cells)
    atoms = boolean_atoms(clause_regions, mu)
    atoms = [(a, m) for a, m in atoms
             if any(_probe_inside(a, Y) for Y in pos)]
    r = sum((m for _, m in atoms), Rat(0))
    fracs = [m / r for _, m in atoms]

    # points of zero-measure finite regions must never be sampled
    avoid = list(points)
    for Y, m in zip(Ys, measures):
        if m == 0 and isinstance(Y, FiniteRegion):
            avoid.extend(Y.points)

    abs_list = [_norm_abs(p, mu) for p in abs_props]
    budget_list = [_norm_budget(b, mu) for b in budgets]
    inc = _Incidence(atoms, points)

    base = max(n * (ell + 1) + 1, 4 * len(atoms), min_size)
    for _ in range(30):
        counts, D = _allocate(fracs, base)
        if _plan_ok(inc, counts, Ys, measures, n, abs_list, budget_list):
            break
        base = 2 * max(base, D)
    else:
        raise ValueError("witness plan failed to verify; clauses too tight")

    chosen = []
    for (atom, _), c in zip(atoms, counts):
        # atoms are disjoint, so earlier samples cannot collide here
        chosen.extend(atom.sample(c, exclude=avoid, seed=rng))
    z = ExplicitSnapshot(points + chosen)
    assert z.size() == sum(counts) + ell, "sampler returned stale points"
    return z


def _probe_inside(atom, region):
    # atoms refine every clause region, so one interior point decides
    return region.contains(atom.sample(1, seed=3)[0])


def _norm_abs(clause, mu):
    if len(clause) == 2:
        Y, m = clause
        return (Y, m, mu.evaluate(Y))
    return clause


def _norm_budget(clause, mu):
    if len(clause) == 3:
        cells, budget, rel = clause
        return (cells, tuple(mu.evaluate(C) for C in cells), budget, rel)
    return clause


def _plan_ok(inc, counts, Ys, measures, n, abs_list, budget_list):
    D = sum(counts)
    N = D + len(inc.points)
    if n * len(inc.points) >= N:
        return False
    tol = Rat(1, n)

    def region_count(Y, m):
        atom_part = 0
        if m > 0:
            atom_part = sum(counts[i] for i in inc.atom_indices(Y))
        return atom_part + inc.point_count(Y)

    cnts = [region_count(Y, m) for Y, m in zip(Ys, measures)]
    for mi, ci in zip(measures, cnts):
        if mi == 0:
            continue
        if ci == 0:
            return False
        for mj, cj in zip(measures, cnts):
            if abs(Rat(cj, ci) - mj / mi) >= tol:
                return False
    for Y, m, target in abs_list:
        got = Rat(sum(counts[i] for i in inc.atom_indices(Y))
                  + inc.point_count(Y), N)
        if abs(got - target) >= Rat(1, m):
            return False
    for cells, targets, budget, rel in budget_list:
        denom = D + (inc.point_count(rel) if rel is not None
                     else len(inc.points))
        if denom == 0:
            return False
        K = _uniform_grid_order(cells)
        dev = Rat(0)
        if K is not None:
            per = [0] * K
            for i, cell in enumerate(inc.grid_cells(K)):
                per[cell] += counts[i]
            for idx, (C, t) in enumerate(zip(cells, targets)):
                inside = per[idx] + _rel_point_count(inc, C, rel)
                dev += abs(Rat(inside, denom) - t)
        else:
            for C, t in zip(cells, targets):
                inside = sum(counts[i] for i in inc.atom_indices(C))
                inside += _rel_point_count(inc, C, rel)
                dev += abs(Rat(inside, denom) - t)
        if dev >= budget:
            return False
    return True


def _rel_point_count(inc, region, rel):
    if rel is None:
        return inc.point_count(region)
    return sum(1 for p in inc.points
               if region.contains(p) and rel.contains(p))


# ---------------------------------------------------------------------------
# The measure filter: point generators A_x and proportion generators A_{Y,n}.


def _dyadic_cell(j: int) -> IntervalRegion:
    """Breadth-first enumeration of dyadic intervals, starting with [0,1)."""
    if j == 0:
        return IntervalRegion.unit()
    depth = (j + 1).bit_length() - 1
    offset = j + 1 - (1 << depth)
    return IntervalRegion.of(Rat(offset, 1 << depth),
                             Rat(offset + 1, 1 << depth))


def _pairs(t: int):
    # diagonal enumeration of (region index, tolerance index)
    s = 0
    while t >= s + 1:
        t -= s + 1
        s += 1
    return t, s - t


class MeasureFilter(FilterBase):
    """Fine filter whose witnesses realize measure proportions exactly."""

    def __init__(self, mu: FAMeasure):
        if not mu.atomless:
            raise ValueError(
                "measure filter needs an atomless measure; "
                "use weighted_filter for point masses")
        if mu.total != 1:
            raise ValueError("measure filter wants a probability measure")
        if mu.kind != "interval":
            raise TypeError(
                f"no declared region enumeration for kind {mu.kind!r}")
        self.mu = mu
        self._points_cache = []
        super().__init__(f"measure({mu.name})", self._gen, self._oracle,
                         guarantee_fn=self._grant, space=mu.space)

    def _point(self, i):
        while len(self._points_cache) <= i:
            fresh = self.mu.space.sample(
                1, exclude=self._points_cache, seed=11)
            self._points_cache.append(fresh[0])
        return self._points_cache[i]

    def _gen(self, i):
        if i % 4 == 0:
            return point_inclusion(self._point(i // 4))
        j, s = _pairs(i - i // 4 - 1)
        return measure_proportion(_dyadic_cell(j), s + 2, self.mu)

    def _oracle(self, constraints, seed):
        points, abs_props, budget_list = [], [], []
        for c in constraints:
            if c.kind == "point":
                if c.params["point"] not in points:
                    points.append(c.params["point"])
            elif c.kind == "proportion":
                abs_props.append((c.params["region"], c.params["n"],
                                  c.params["target"]))
            elif c.kind == "budget":
                budget_list.append(
                    (c.params["cells"], c.params["targets"],
                     c.params["budget"], c.params["relative_to"]))
            else:
                raise ValueError(f"measure oracle cannot meet {c}")
        return combinatorial_witness(
            self.mu, [self.mu.space], points, 2,
            abs_props=abs_props, budgets=budget_list, seed=seed)

    # -- guarantee registry -------------------------------------------------

    def _grant(self, meta, level):
        return _grant_common(self, meta, level, "integral")

    def _integral_grant(self, f, level):
        tags = f.tags
        if "indicator" in tags:
            Y = tags["indicator"]
            if not self.mu.in_algebra(Y):
                return None
            m = self.mu.evaluate(Y)
            tol = Rat(1, level)
            return Guarantee((m - tol, m + tol),
                             (measure_proportion(Y, level, self.mu),))
        if "staircase" in tags:
            return _staircase_grant(self.mu, None, tags["staircase"], level)
        if "lipschitz" in tags and "bound" in tags:
            return _lipschitz_grant(self.mu, None, f, level)
        return None


def _grant_common(F, meta, level, integral_kind):
    """Shared guarantee dispatch: constants, ring ops, integral classes."""
    kind = meta.get("kind")
    if kind == "constant":
        from .scalars import NEG_INF, POS_INF, standard_part
        v = standard_part(meta["value"])
        if v is POS_INF or v is NEG_INF:
            return None
        return Guarantee((v, v))
    if kind == "arith":
        a, b = meta["args"]
        ga = F.guarantee(a.meta, level)
        gb = F.guarantee(b.meta, level)
        if ga is None or gb is None:
            return None
        (alo, ahi), (blo, bhi) = ga.bound, gb.bound
        cs = ga.constraints + gb.constraints
        op = meta["op"]
        if op == "+":
            return Guarantee((alo + blo, ahi + bhi), cs)
        if op == "-":
            return Guarantee((alo - bhi, ahi - blo), cs)
        if op == "*":
            corners = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
            return Guarantee((min(corners), max(corners)), cs)
        return None
    if kind == integral_kind and meta.get("filter") is F:
        return F._integral_grant(meta["function"], level)
    return None


def _staircase_grant(mu, relative_to, pieces, level):
    pieces = [(Y, as_rat(v)) for Y, v in pieces]
    exact = sum((v * mu.evaluate(Y) for Y, v in pieces), Rat(0))
    vmax = max((abs(v) for _, v in pieces), default=Rat(0))
    tol = Rat(1, level)
    if vmax == 0:
        return Guarantee((exact, exact))
    if len(pieces) == 1 and pieces[0][0] == mu.space:
        # constant on the whole space: every average equals the value
        return Guarantee((exact, exact))
    budget = Rat(1, 2 * level) / vmax
    cells = tuple(Y for Y, _ in pieces)
    return Guarantee(
        (exact - tol, exact + tol),
        (staircase_budget(cells, budget, mu, relative_to=relative_to),))


def _lipschitz_grant(mu, relative_to, f, level):
    L = as_rat(f.tags["lipschitz"])
    M = max(as_rat(f.tags["bound"]), Rat(1))
    K = max(1, rat_ceil(4 * L * level))
    cells = tuple(IntervalRegion.of(Rat(i, K), Rat(i + 1, K))
                  for i in range(K))
    mid_sum = sum((as_rat(f.evaluate(Rat(2 * i + 1, 2 * K)))
                   * mu.evaluate(C) for i, C in enumerate(cells)), Rat(0))
    budget = Rat(1, 8 * level) / M
    # the midpoint sum sits within 1/(8·level) of the limit, so these
    # endpoints stay within 1/level of it
    tol = Rat(7, 8 * level)
    return Guarantee(
        (mid_sum - tol, mid_sum + tol),
        (staircase_budget(cells, budget, mu, relative_to=relative_to),))


def measure_filter(mu: FAMeasure) -> MeasureFilter:
    return MeasureFilter(mu)


# ---------------------------------------------------------------------------
# Weighted filters for measures with point masses.


class Partition:
    """Disjoint cells covering the space, each with a positive weight."""

    def __init__(self, cells):
        self.cells = tuple((region, as_rat(w)) for region, w in cells)
        if any(w <= 0 for _, w in self.cells):
            raise ValueError("weights must be positive")

    def cell_of(self, p):
        hits = [i for i, (region, _) in enumerate(self.cells)
                if region.contains(p)]
        if len(hits) != 1:
            raise ValueError(f"point {p!r} lies in {len(hits)} cells")
        return hits[0]

    def __iter__(self):
        return iter(self.cells)

    def __len__(self):
        return len(self.cells)


class WeightedFilter(FilterBase):
    """Fine filter for a point-mass + diffuse mixture on the interval.

    Witnesses always carry every mass point; proportion clauses apply to
    the diffuse remainder, measured by the normalized diffuse part.
    """

    def __init__(self, mu: FAMeasure):
        if mu.atomless or not mu.point_masses:
            raise ValueError("weighted filter wants explicit point masses")
        self.mu = mu
        masses = mu.point_masses
        diffuse_weight = mu.total - sum((w for _, w in masses), Rat(0))
        if diffuse_weight <= 0:
            raise ValueError("need a positive diffuse part")
        self.mass_points = [p for p, _ in masses]
        support = DifferenceRegion(
            mu.space, FiniteRegion(self.mass_points))
        cells = [(FiniteRegion([p]), w) for p, w in masses]
        cells.append((support, diffuse_weight))
        self.partition = Partition(cells)
        self.diffuse_region = support
        self.diffuse_weight = diffuse_weight

        def ev(region):
            inside = sum((w for p, w in masses if region.contains(p)),
                         Rat(0))
            return (mu.evaluate(region) - inside) / diffuse_weight

        self.nu = FAMeasure(
            f"normalized({mu.name})", "interval", ev, mu.in_algebra,
            total=1, atomless=True, space=mu.space)
        self._points_cache = list(self.mass_points)
        super().__init__(f"weighted({mu.name})", self._gen, self._oracle,
                         guarantee_fn=self._grant, space=mu.space)

    def _point(self, i):
        while len(self._points_cache) <= i:
            fresh = self.mu.space.sample(
                1, exclude=self._points_cache, seed=13)
            self._points_cache.append(fresh[0])
        return self._points_cache[i]

    def _gen(self, i):
        if i % 4 == 0:
            return point_inclusion(self._point(i // 4))
        j, s = _pairs(i - i // 4 - 1)
        return staircase_budget(
            (_dyadic_cell(j),), Rat(1, s + 2), self.nu,
            relative_to=self.diffuse_region)

    def _oracle(self, constraints, seed):
        points = list(self.mass_points)
        abs_props, budget_list = [], []
        for c in constraints:
            if c.kind == "point":
                if c.params["point"] not in points:
                    points.append(c.params["point"])
            elif c.kind == "proportion":
                abs_props.append((c.params["region"], c.params["n"],
                                  c.params["target"]))
            elif c.kind == "budget":
                budget_list.append(
                    (c.params["cells"], c.params["targets"],
                     c.params["budget"], c.params["relative_to"]))
            else:
                raise ValueError(f"weighted oracle cannot meet {c}")
        return combinatorial_witness(
            self.nu, [self.nu.space], points, 2,
            abs_props=abs_props, budgets=budget_list, seed=seed)

    def _grant(self, meta, level):
        return _grant_common(self, meta, level, "weighted-integral")

    def _integral_grant(self, f, level):
        atom_part = sum((w * as_rat(f.evaluate(p))
                         for p, w in self.mu.point_masses), Rat(0))
        inner = self._diffuse_grant(f, level)
        if inner is None:
            return None
        lo, hi = inner.bound
        w = self.diffuse_weight
        return Guarantee((atom_part + w * lo, atom_part + w * hi),
                         inner.constraints)

    def _diffuse_grant(self, f, level):
        tags = f.tags
        if "indicator" in tags:
            Y = tags["indicator"]
            if not self.nu.in_algebra(Y):
                return None
            return _staircase_grant(self.nu, self.diffuse_region,
                                    [(Y, 1)], level)
        if "staircase" in tags:
            return _staircase_grant(self.nu, self.diffuse_region,
                                    tags["staircase"], level)
        if "lipschitz" in tags and "bound" in tags:
            return _lipschitz_grant(self.nu, self.diffuse_region, f, level)
        return None


def weighted_filter(mu: FAMeasure):
    F = WeightedFilter(mu)
    return F, F.partition
