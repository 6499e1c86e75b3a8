"""Staged witness oracles for geometric counting filters.

The filter of a geometric scene is generated by five constraint
families at each strength level: named points belong to the witness,
higher unit cubes dominate lower ones in count, each registered
fragment piece holds a share of its cube's count matching its Gram
volume, registered countable sets are count-dominated, and translated
box pairs hold equal shares.  The oracle builds a witness in dimension
stages: every stage's budget dwarfs everything sampled before it, so
lower-dimensional content is negligible at the scale of the next
stage, which is what makes the counting quotients track volume.
"""

from .backend import Rat
from .config import get_config
from .filters import Constraint, FilterBase
from .geometry import (
    Box, FragmentSet, box_fragment, segment_fragment, unit_cube)
from .regions import SetRegion
from .snapshots import ExplicitSnapshot


def _round_count(x):
    x = Rat(x)
    return (2 * x.numerator + x.denominator) // (2 * x.denominator)


def _boxes_disjoint(a, b):
    return any(lo1 > hi2 or hi1 < lo2
               for (lo1, hi1), (lo2, hi2) in zip(a, b))


class CountableSet(SetRegion):
    """A countable point set given by a membership rule and a list head."""

    def __init__(self, label, member, head, ambient=1):
        self.label = label
        self._member = member
        self._head = tuple(Rat(x) for x in head)
        self.ambient = ambient

    def contains(self, p):
        return self._member(p)

    def head(self):
        return self._head

    def descriptor(self):
        return f"countable {self.label}"


def unit_fractions() -> CountableSet:
    """{1/n : n >= 2} as 1-tuples; never hits a dyadic midpoint grid."""
    def member(p):
        if not isinstance(p, tuple) or len(p) != 1:
            return False
        x = p[0]
        try:
            return x.numerator == 1 and x.denominator >= 2
        except AttributeError:
            return False

    return CountableSet("unit-fractions", member, (Rat(1, 3),))


class MiddlingBoxes:
    """A box and its translates, constrained to equal witness shares."""

    def __init__(self, label, box: Box, vectors):
        self.label = label
        self.box = box
        self.vectors = tuple(tuple(Rat(x) for x in v) for v in vectors)
        if not self.vectors:
            raise ValueError("at least one translation vector")
        named = [(f"{label}@0", box)]
        named += [(f"{label}@{i + 1}", box.translate(v))
                  for i, v in enumerate(self.vectors)]
        for i in range(len(named)):
            for j in range(i + 1, len(named)):
                if not _boxes_disjoint(named[i][1].axes, named[j][1].axes):
                    raise ValueError("translated boxes overlap")
        self.named = named

    @property
    def k(self):
        return self.box.k

    def contains(self, p):
        if not isinstance(p, tuple) or len(p) != self.box.k:
            return False
        return any(b.contains(p) for _, b in self.named)

    def pairs(self):
        base = self.named[0][0]
        return [(base, lbl) for lbl, _ in self.named[1:]]

    def descriptor(self):
        return f"middling {self.label}"


def _calkin_wilf():
    q = Rat(1)
    while True:
        q = 1 / (2 * (q.numerator // q.denominator) - q + 1)
        if 0 < q < 1:
            yield q


class CombFamily:
    """Vertical unit teeth over an expanding enumeration of rationals.

    Level L registers teeth 0..L; as a point set the comb is the full
    union over every rational abscissa in (0, 1), which the finitely
    many registered teeth exhaust on any finite witness.
    """

    def __init__(self, label="comb", y=(2, 3)):
        self.label = label
        self.y0, self.y1 = Rat(y[0]), Rat(y[1])
        if self.y0 >= self.y1:
            raise ValueError("tooth span is empty")
        self.k = 1
        self.ambient = 2
        self.bbox = ((Rat(0), Rat(1)), (self.y0, self.y1))
        self._teeth = []
        self._by_q = {}
        self._enum = _calkin_wilf()

    def tooth(self, i):
        while len(self._teeth) <= i:
            q = next(self._enum)
            idx = len(self._teeth)
            frag = segment_fragment(f"{self.label}#{idx}",
                                    (q, self.y0), (q, self.y1))
            self._teeth.append((q, frag))
            self._by_q[q] = idx
        return self._teeth[i]

    def pieces_at(self, level):
        return [(f"{self.label}#{i}", self.tooth(i)[1])
                for i in range(level + 1)]

    def index_of(self, x):
        return self._by_q.get(x)

    def contains(self, p):
        return (isinstance(p, tuple) and len(p) == 2
                and 0 < p[0] < 1 and self.y0 <= p[1] <= self.y1)

    def descriptor(self):
        return f"comb {self.label}"


def geometric_filter(fragments=(), families=(), countables=(),
                     middlings=(), max_dim=None, dwarf=None,
                     name=None) -> FilterBase:
    """Fine filter of a geometric scene with a staged counting oracle."""
    cfg = get_config()
    fragments = tuple(fragments)
    families = tuple(families)
    countables = tuple(countables)
    middlings = tuple(middlings)
    if len(fragments) + len(families) > cfg.max_fragments:
        raise ValueError("too many registered fragments")
    dwarf = dwarf if dwarf is not None else cfg.geometry_dwarf

    needed = [f.k for f in fragments] + [f.k for f in families] \
        + [m.k for m in middlings] + [1]
    md = max(needed) if max_dim is None else max_dim
    if md < max(needed) or md > cfg.max_ambient_dim:
        raise ValueError("max_dim out of range for the registered scene")

    cubes = {d: unit_cube(d) for d in range(1, md + 1)}
    unit_boxes = {d: tuple((Rat(0), Rat(1)) for _ in range(d))
                  for d in range(1, md + 1)}

    for f in fragments:
        if f.ambient <= md and f.bbox is not None \
                and not _boxes_disjoint(f.bbox, unit_boxes[f.ambient]):
            raise ValueError(f"fragment {f.label} overlaps a unit cube")
    for fam in families:
        if fam.ambient <= md \
                and not _boxes_disjoint(fam.bbox, unit_boxes[fam.ambient]):
            raise ValueError(f"family {fam.label} overlaps a unit cube")
    for m in middlings:
        for lbl, b in m.named:
            if m.k <= md and not _boxes_disjoint(b.axes, unit_boxes[m.k]):
                raise ValueError(f"box {lbl} overlaps a unit cube")
            for f in fragments:
                if f.ambient == m.k and f.bbox is not None \
                        and not _boxes_disjoint(b.axes, f.bbox):
                    raise ValueError(f"box {lbl} overlaps {f.label}")

    static_pieces = [(lbl, f, box) for f in fragments
                     for lbl, box in f.pieces()]
    frags_by_amb = {}
    for f in fragments:
        frags_by_amb.setdefault(f.ambient, []).append(f)
    pieces_of = {f.label: f.pieces() for f in fragments}

    def frag_exclusions(f):
        out = []
        for g in fragments:
            if g is f or g.ambient != f.ambient:
                continue
            if g.k < f.k or (g.k == f.k
                             and fragments.index(g) < fragments.index(f)):
                out.append(g.contains)
        return out

    def cube_exclusions(d):
        out = [g.contains for g in frags_by_amb.get(d, ())]
        out += [c.contains for c in countables if c.ambient == d]
        return out

    profile_memo = {}

    def build(L):
        z = profile_memo.get(L)
        if z is not None:
            return z
        tol = Rat(1, 16 * L)
        points, taken = [], set()

        def put(ps):
            for p in ps:
                if p not in taken:
                    taken.add(p)
                    points.append(p)

        prev_b = 0
        for d in range(1, md + 1):
            for c in countables:
                if c.ambient == d:
                    put([c.head()])
            cells = [("cube", cubes[d], cubes[d].domain, Rat(1),
                      cube_exclusions(d))]
            for lbl, f, box in static_pieces:
                if f.k == d:
                    cells.append(("piece", f, box, f.volume(tol, box),
                                  frag_exclusions(f)))
            for fam in families:
                if fam.k == d:
                    for lbl, tooth in fam.pieces_at(L):
                        cells.append(("piece", tooth, tooth.domain,
                                      tooth.volume(tol), ()))
            for m in middlings:
                if m.k == d:
                    for lbl, b in m.named:
                        bf = box_fragment(lbl, b)
                        cells.append(("piece", bf, bf.domain,
                                      b.volume(), ()))
            total = sum(v for _, _, _, v, _ in cells)
            b_d = max(64 * L, 2 * L * prev_b)
            if points:
                b_d = max(b_d, -((-dwarf * len(points) * total.denominator)
                                 // total.numerator))
            projected = len(points) + _round_count(b_d * total) + len(cells)
            if projected > cfg.geometry_point_cap:
                raise ValueError("geometry witness exceeds the point budget")
            for _, f, box, v, excl in cells:
                n = 0 if v == 0 else max(1, _round_count(b_d * v))
                if n:
                    put(f.sample_in(box, n, excl, taken))
            prev_b = b_d
        z = ExplicitSnapshot(points)
        profile_memo[L] = z
        return z

    count_memo = {}

    def counts_for(z):
        got = count_memo.get(id(z))
        if got is not None and got[0] is z:
            return got[1]
        counts = {}

        def bump(key):
            counts[key] = counts.get(key, 0) + 1

        fams_by_amb = {}
        for fam in families:
            fams_by_amb.setdefault(fam.ambient, []).append(fam)
        cnt_by_amb = {}
        for c in countables:
            cnt_by_amb.setdefault(c.ambient, []).append(c)
        mids_by_k = {}
        for m in middlings:
            mids_by_k.setdefault(m.k, []).append(m)

        for p in z:
            if not isinstance(p, tuple):
                continue
            n = len(p)
            if n <= md and all(0 <= x <= 1 for x in p):
                bump(f"cube{n}")
            for f in frags_by_amb.get(n, ()):
                for lbl, box in pieces_of[f.label]:
                    if f.in_piece(p, box):
                        bump(lbl)
                        bump(f.label)
                        break
            for fam in fams_by_amb.get(n, ()):
                if fam.contains(p):
                    bump(fam.label)
                    i = fam.index_of(p[0])
                    if i is not None:
                        bump(f"{fam.label}#{i}")
            for c in cnt_by_amb.get(n, ()):
                if c.contains(p):
                    bump(c.label)
            for m in mids_by_k.get(n, ()):
                for lbl, b in m.named:
                    if b.contains(p):
                        bump(lbl)
                        bump(m.label)
                        break
        count_memo.clear()
        count_memo[id(z)] = (z, counts)
        return counts

    def make_check(level):
        # shared quadrature tolerance, quantized so nearby levels reuse it
        qtol = Rat(1, 8 << max(0, (level - 1).bit_length()))
        gap = Rat(1, level)

        def check(z):
            counts = counts_for(z)
            c = {d: counts.get(f"cube{d}", 0) for d in range(1, md + 1)}
            if any(v == 0 for v in c.values()):
                return False
            for hi in range(2, md + 1):
                for lo in range(1, hi):
                    if c[hi] <= level * c[lo]:
                        return False
            for lbl, f, box in static_pieces:
                share = Rat(counts.get(lbl, 0), c[f.k])
                if abs(share - f.volume(qtol, box)) >= gap:
                    return False
            for fam in families:
                for lbl, tooth in fam.pieces_at(level):
                    share = Rat(counts.get(lbl, 0), c[fam.k])
                    if abs(share - tooth.volume(qtol)) >= gap:
                        return False
            for cset in countables:
                if c[cset.ambient] <= level * counts.get(cset.label, 0):
                    return False
            for m in middlings:
                for base, other in m.pairs():
                    cb = counts.get(base, 0)
                    co = counts.get(other, 0)
                    if co == 0 or abs(Rat(cb, co) - 1) >= gap:
                        return False
            return True

        return check

    def generator(i):
        level = i + 1
        return Constraint("geometry", {"level": level}, make_check(level),
                          f"geometric profile at strength {level}")

    def oracle(constraints, seed):
        L = 1
        extras = []
        for c in constraints:
            if c.kind == "geometry":
                L = max(L, c.params["level"])
            elif c.kind == "point":
                p = c.params["point"]
                if not (isinstance(p, tuple) and 1 <= len(p) <= md + 2):
                    raise ValueError(
                        f"geometric filter cannot meet {c.description!r}")
                extras.append(p)
            else:
                raise ValueError(
                    f"geometric filter cannot meet {c.description!r}")
        z = build(L)
        if extras:
            z = ExplicitSnapshot(z.points + tuple(extras))
        return z

    labels = [f.label for f in fragments] + [f.label for f in families]
    F = FilterBase(name or f"geometric({','.join(labels) or md})",
                   generator, oracle)

    cube_sets = {d: FragmentSet(cubes[d]) for d in range(1, md + 1)}
    frag_sets = {f.label: FragmentSet(f) for f in fragments}
    registry = {}
    for d, s in cube_sets.items():
        registry[id(s)] = f"cube{d}"
    for f in fragments:
        registry[id(frag_sets[f.label])] = f.label
    for fam in families:
        registry[id(fam)] = fam.label
    for c in countables:
        registry[id(c)] = c.label
    for m in middlings:
        registry[id(m)] = m.label

    F.fragments = fragments
    F.families = families
    F.max_dim = md
    F.cube = lambda d: cube_sets[d]
    F.fragment_set = lambda f: frag_sets[f.label]
    F.has_set = lambda S: id(S) in registry

    def count_of(S, z):
        lbl = registry.get(id(S))
        if lbl is None:
            return None
        return counts_for(z).get(lbl, 0)

    F.count_of = count_of
    return F
