"""Presheaves on finite sites: the sheaf condition, subterminals, closed sieves
and the site-level invariants derived from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .budget import Budget, default_budget
from .category import FinCategory, check_right_ore
from .functors import FunctorReport, Presheaf, check_functoriality
from .sieves import Sieve, bits, implication_mask, pullback_mask
from .topologies import GrothendieckTopology, canonical_topology, enumerate_topologies


class NotASheaf(ValueError):
    pass


def validate_presheaf(P: Presheaf) -> FunctorReport:
    return check_functoriality(P)


# ---------------------------------------------------------------------------
# sheaf condition


def matching_families(P: Presheaf, R: Sieve):
    """Yield every compatible family on ``R`` as a dict member -> element."""
    C = P.category
    members = R.members()
    # constraints x[f∘g] = P(g)(x[f]) for every member f and g into dom f
    links = {f: [(g, C.table[f][g]) for g in C.into[C.src[f]]] for f in members}
    order = members
    choice: dict[int, int] = {}

    def consistent(f: int) -> bool:
        x = choice[f]
        for g, fg in links[f]:
            if fg in choice and P.actions[g][x] != choice[fg]:
                return False
        for h in order:
            if h in choice and h != f:
                for g, hg in links[h]:
                    if hg == f and P.actions[g][choice[h]] != x:
                        return False
        return True

    def rec(k: int):
        if k == len(order):
            yield dict(choice)
            return
        f = order[k]
        for x in range(P.size(C.src[f])):
            choice[f] = x
            if consistent(f):
                yield from rec(k + 1)
            del choice[f]

    yield from rec(0)


def amalgamations(P: Presheaf, R: Sieve, family: dict[int, int]) -> list[int]:
    return [x for x in range(P.size(R.base))
            if all(P.actions[f][x] == y for f, y in family.items())]


@dataclass
class SheafReport:
    is_sheaf: bool
    object: int | None = None
    sieve: Sieve | None = None
    family: dict | None = None
    amalgamations: list[int] = field(default_factory=list)
    problem: str = ""

    def describe(self, P: Presheaf) -> str:
        if self.is_sheaf:
            return "sheaf"
        C = P.category
        fam = {C.arrows[f]: P.sets[C.src[f]][x] for f, x in self.family.items()}
        return (f"{self.problem} at {C.objects[self.object]} for sieve {self.sieve.names(C)}, "
                f"family {fam}, amalgamations {[P.sets[self.object][x] for x in self.amalgamations]}")


def check_sheaf(J: GrothendieckTopology, P: Presheaf) -> SheafReport:
    rep = validate_presheaf(P)
    if not rep.valid:
        raise ValueError(f"not a presheaf: {rep.message}")
    C = J.category
    for c in range(C.n_objects):
        for R in J.covers(c):
            for fam in matching_families(P, R):
                am = amalgamations(P, R, fam)
                if len(am) != 1:
                    problem = "no amalgamation" if not am else "multiple amalgamations"
                    return SheafReport(False, c, R, fam, am, problem)
    return SheafReport(True)


# ---------------------------------------------------------------------------
# subterminals


@dataclass
class SubterminalReport:
    assignments: list[tuple[int, ...]]

    @property
    def count(self) -> int:
        return len(self.assignments)

    @property
    def two_valued(self) -> bool:
        return self.count == 2


def enumerate_subterminal_sheaves(J: GrothendieckTopology, budget: Budget | None = None) -> SubterminalReport:
    """All {0,1}-valued subpresheaves of 1 that satisfy the sheaf condition."""
    budget = budget or default_budget()
    C = J.category
    n = C.n_objects
    budget.check("max_objects", n)
    cover_doms = []
    for c in range(n):
        for R in J.covers(c):
            doms = 0
            for f in R.members():
                doms |= 1 << C.src[f]
            cover_doms.append((c, doms))
    found = []
    for u in range(1 << n):
        if any(u >> C.tgt[f] & 1 and not u >> C.src[f] & 1 for f in range(C.n_arrows)):
            continue
        if any(doms & ~u == 0 and not u >> c & 1 for c, doms in cover_doms):
            continue
        found.append(tuple(u >> c & 1 for c in range(n)))
    return SubterminalReport(found)


# ---------------------------------------------------------------------------
# closed sieves


def closure_mask(J: GrothendieckTopology, c: int, mask: int) -> int:
    """cl_J(R) = {f into c | f*(R) covers dom f}."""
    C = J.category
    out = 0
    for f in C.into[c]:
        if J.covering_mask(C.src[f], pullback_mask(C, f, mask)):
            out |= 1 << f
    return out


def closure(J: GrothendieckTopology, R: Sieve) -> Sieve:
    return Sieve(R.base, closure_mask(J, R.base, R.mask))


@dataclass
class ClosedSieveLattice:
    topology: GrothendieckTopology
    object: int
    elements: list[int]

    @property
    def category(self) -> FinCategory:
        return self.topology.category

    @property
    def bottom(self) -> int:
        return closure_mask(self.topology, self.object, 0)

    @property
    def top(self) -> int:
        return self.category.into_mask[self.object]

    def meet(self, r: int, s: int) -> int:
        return r & s

    def join(self, r: int, s: int) -> int:
        return closure_mask(self.topology, self.object, r | s)

    def implies(self, r: int, s: int) -> int:
        return implication_mask(self.category, self.object, r, s)

    def neg(self, r: int) -> int:
        return self.implies(r, self.bottom)

    def sieves(self) -> list[Sieve]:
        return [Sieve(self.object, m) for m in self.elements]


def closed_sieve_lattice(J: GrothendieckTopology, c: int) -> ClosedSieveLattice:
    sp = J.space
    masks = [sp.entries[i][1] for i in sp.by_object[c]]
    closed = [m for m in masks if closure_mask(J, c, m) == m]
    return ClosedSieveLattice(J, c, closed)


# ---------------------------------------------------------------------------
# site invariants


@dataclass
class SiteInvariantReport:
    atomic: bool
    atomic_reason: str
    two_valued: bool
    subterminal_count: int
    boolean_site: bool
    de_morgan_site: bool
    degenerate: bool
    trivial_topos: bool = False
    boolean_witness: tuple[int, Sieve] | None = None
    de_morgan_witness: tuple[int, Sieve] | None = None

    def as_dict(self, C: FinCategory) -> dict:
        def wit(w):
            return None if w is None else {"object": C.objects[w[0]], "sieve": w[1].names(C)}
        return {
            "atomic": self.atomic,
            "atomic_reason": self.atomic_reason,
            "two_valued": self.two_valued,
            "subterminal_count": self.subterminal_count,
            "boolean_site": self.boolean_site,
            "boolean_witness": wit(self.boolean_witness),
            "de_morgan_site": self.de_morgan_site,
            "de_morgan_witness": wit(self.de_morgan_witness),
            "degenerate": self.degenerate,
            "trivial_topos": self.trivial_topos,
        }


def _first_failure(J: GrothendieckTopology, law) -> tuple[int, Sieve] | None:
    C = J.category
    for c in range(C.n_objects):
        L = closed_sieve_lattice(J, c)
        for r in L.elements:
            if law(L, r) != L.top:
                return (c, Sieve(c, r))
    return None


def boolean_witness(J: GrothendieckTopology):
    """First closed sieve R with cl(R ∪ ¬R) not maximal, or None."""
    return _first_failure(J, lambda L, r: L.join(r, L.neg(r)))


def de_morgan_witness(J: GrothendieckTopology):
    return _first_failure(J, lambda L, r: L.join(L.neg(r), L.neg(L.neg(r))))


def atomic_status(J: GrothendieckTopology) -> tuple[bool, str]:
    C = J.category
    ore = check_right_ore(C)
    if not ore.holds:
        return False, f"category is not right Ore (cospan {tuple(C.arrows[f] for f in ore.witness)})"
    if J == canonical_topology(C, "atomic"):
        return True, "right Ore category with the atomic topology"
    return False, "topology differs from the atomic topology"


def site_invariants(J: GrothendieckTopology, budget: Budget | None = None) -> SiteInvariantReport:
    atomic, reason = atomic_status(J)
    subs = enumerate_subterminal_sheaves(J, budget)
    bw = boolean_witness(J)
    dw = de_morgan_witness(J)
    return SiteInvariantReport(
        atomic=atomic,
        atomic_reason=reason,
        two_valued=subs.two_valued,
        subterminal_count=subs.count,
        boolean_site=bw is None,
        de_morgan_site=dw is None,
        degenerate=J.degenerate,
        trivial_topos=all(J.bits >> i & 1 for i in J.space.empty),
        boolean_witness=bw,
        de_morgan_witness=dw,
    )


def de_morganization(C: FinCategory) -> GrothendieckTopology | None:
    """Experimental: least topology below the dense one whose site is De Morgan.

    Found by scanning the enumerated lattice; returns None if the De Morgan
    topologies below the dense topology have no least element.
    """
    dense = canonical_topology(C, "dense")
    cands = [J for J in enumerate_topologies(C) if J <= dense and de_morgan_witness(J) is None]
    least = [J for J in cands if all(J <= K for K in cands)]
    return least[0] if least else None


# ---------------------------------------------------------------------------
# object-level invariants


def _element_ids(P: Presheaf) -> list[tuple[int, int]]:
    return [(c, x) for c in range(P.category.n_objects) for x in range(P.size(c))]


def _subpresheaf_closure(P: Presheaf, ids, index, mask: int) -> int:
    C = P.category
    work = [k for k in range(len(ids)) if mask >> k & 1]
    while work:
        c, x = ids[work.pop()]
        for f in C.into[c]:
            k = index[(C.src[f], P.actions[f][x])]
            if not mask >> k & 1:
                mask |= 1 << k
                work.append(k)
    return mask


def _j_closure(J: GrothendieckTopology, P: Presheaf, ids, index, mask: int) -> int:
    C = J.category
    out = mask
    for k, (c, x) in enumerate(ids):
        if mask >> k & 1:
            continue
        s = 0
        for f in C.into[c]:
            if mask >> index[(C.src[f], P.actions[f][x])] & 1:
                s |= 1 << f
        if J.covering_mask(c, s):
            out |= 1 << k
    return out


def subpresheaves(P: Presheaf) -> list[int]:
    """All subpresheaves, as bitmasks over (object, element) positions."""
    ids = _element_ids(P)
    index = {e: k for k, e in enumerate(ids)}
    gens = [_subpresheaf_closure(P, ids, index, 1 << k) for k in range(len(ids))]
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                m2 = m | g
                if m2 not in seen:
                    seen.add(m2)
                    nxt.append(m2)
        frontier = nxt
    return sorted(seen)


@dataclass
class ObjectInvariants:
    is_atom: bool
    is_indecomposable: bool
    is_compact: bool
    closed_subobjects: int
    note: str = ""

    def as_dict(self) -> dict:
        return {"is_atom": self.is_atom, "is_indecomposable": self.is_indecomposable,
                "is_compact": self.is_compact, "closed_subobjects": self.closed_subobjects,
                "note": self.note}


def object_invariants(J: GrothendieckTopology, P: Presheaf, max_family: int = 14) -> ObjectInvariants:
    if not check_sheaf(J, P).is_sheaf:
        raise NotASheaf(f"{P.name or 'presheaf'} is not a sheaf for this topology")
    ids = _element_ids(P)
    index = {e: k for k, e in enumerate(ids)}
    full = (1 << len(ids)) - 1
    closed = [m for m in subpresheaves(P) if _j_closure(J, P, ids, index, m) == m]
    bottom = _j_closure(J, P, ids, index, 0)
    nonzero = full != bottom

    def join(a, b):
        return _j_closure(J, P, ids, index, a | b)

    is_atom = nonzero and len(closed) == 2
    proper = [m for m in closed if m != bottom]
    split = any(join(a, b) == full and a & b == bottom for a, b in combinations(proper, 2))
    is_indecomposable = nonzero and not split

    # compactness: every covering family of closed subobjects has a finite subcover;
    # check that each covering family shrinks to a minimal subfamily with the same join
    fam = closed if len(closed) <= max_family else closed[:max_family]
    compact = True
    for sub in range(1, 1 << len(fam)):
        members = [fam[k] for k in range(len(fam)) if sub >> k & 1]
        if _join_all(join, bottom, members) != full:
            continue
        keep = list(members)
        for m in members:
            trial = [x for x in keep if x != m]
            if _join_all(join, bottom, trial) == full:
                keep = trial
        if _join_all(join, bottom, keep) != full:
            compact = False
            break
    note = "finite site: automatic"
    if len(closed) > max_family:
        note += f" (subfamilies of the first {max_family} closed subobjects searched)"
    return ObjectInvariants(is_atom, is_indecomposable, compact, len(closed), note)


def _join_all(join, bottom, members):
    acc = bottom
    for m in members:
        acc = join(acc, m)
    return acc
