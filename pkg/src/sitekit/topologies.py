"""Grothendieck topologies on finite categories.

A topology is stored as a bitset over the sieve ids of the category's
:class:`~sitekit.sieves.SieveSpace`.  Least topologies are produced by the
stability/transitivity proof system run to a fixpoint; every topology on a
category is found by closing sieve sets under that engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .budget import Budget, SizeGuard, default_budget
from .category import FinCategory, check_right_ore
from .sieves import Sieve, SieveSpace, bits, pullback_mask, sieve_space


class NotRightOre(ValueError):
    def __init__(self, witness):
        super().__init__(f"category fails the right Ore condition at cospan {witness}")
        self.witness = witness


@dataclass(frozen=True, eq=False)
class GrothendieckTopology:
    """A family of sieves per object; not necessarily valid until checked."""

    category: FinCategory
    bits: int
    name: str = field(default="", compare=False)

    @property
    def space(self) -> SieveSpace:
        return sieve_space(self.category)

    def __eq__(self, other):
        if not isinstance(other, GrothendieckTopology):
            return NotImplemented
        return self.category == other.category and self.bits == other.bits

    def __hash__(self):
        return hash(self.bits)

    def __le__(self, other: "GrothendieckTopology") -> bool:
        return self.bits & ~other.bits == 0

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<topology{label} on {self.category.name}: {self.count()} covering sieves>"

    def count(self) -> int:
        return self.bits.bit_count()

    def covers(self, c: int) -> list[Sieve]:
        sp = self.space
        return [sp.sieve(i) for i in sp.by_object[c] if self.bits >> i & 1]

    def covering(self, s: Sieve) -> bool:
        return bool(self.bits >> self.space.id_of(s) & 1)

    def covering_mask(self, c: int, mask: int) -> bool:
        return bool(self.bits >> self.space.index[(c, mask)] & 1)

    @cached_property
    def degenerate(self) -> bool:
        return any(self.bits >> i & 1 for i in self.space.empty)

    @cached_property
    def sort_key(self) -> tuple:
        sp = self.space
        per_object = []
        for ids in sp.by_object:
            per_object.append(sum(1 << k for k, i in enumerate(ids) if self.bits >> i & 1))
        return (self.count(), tuple(per_object))

    def with_name(self, name: str) -> "GrothendieckTopology":
        return GrothendieckTopology(self.category, self.bits, name)

    def as_dict(self) -> dict:
        C = self.category
        return {C.objects[c]: [s.names(C) for s in self.covers(c)] for c in range(C.n_objects)}


def topology_from_covers(C: FinCategory, covers: dict[int, Iterable[Sieve]], name: str = "") -> GrothendieckTopology:
    sp = sieve_space(C)
    b = 0
    for c, sieves in covers.items():
        for s in sieves:
            if s.base != c:
                raise ValueError(f"sieve based at {C.objects[s.base]} listed under {C.objects[c]}")
            b |= 1 << sp.id_of(s)
    return GrothendieckTopology(C, b, name)


# ---------------------------------------------------------------------------
# validation


@dataclass
class AxiomFailure:
    axiom: str
    object: int
    sieve: Sieve
    arrow: int | None = None
    cover: Sieve | None = None

    def describe(self, C: FinCategory) -> str:
        s = f"{self.axiom} fails at {C.objects[self.object]}: sieve {self.sieve.names(C)}"
        if self.arrow is not None:
            s += f", arrow {C.arrows[self.arrow]}"
        if self.cover is not None:
            s += f", cover {self.cover.names(C)}"
        return s


@dataclass
class TopologyReport:
    valid: bool
    degenerate: bool
    failures: list[AxiomFailure] = field(default_factory=list)

    def failed_axioms(self) -> list[str]:
        return [f.axiom for f in self.failures]


def _covered_arrows(sp: SieveSpace, C: FinCategory, tbits: int, r: int) -> int:
    c = sp.entries[r][0]
    mask = 0
    for f in C.into[c]:
        if tbits >> sp.pb[f][r] & 1:
            mask |= 1 << f
    return mask


def validate_topology(J: GrothendieckTopology) -> TopologyReport:
    """Check maximality, stability and transitivity; one minimal witness each."""
    C, sp, t = J.category, J.space, J.bits
    failures = []
    for c in range(C.n_objects):
        if not t >> sp.maximal[c] & 1:
            failures.append(AxiomFailure("maximality", c, sp.sieve(sp.maximal[c])))
            break
    stab = _first_stability_failure(sp, C, t)
    if stab:
        failures.append(stab)
    trans = _first_transitivity_failure(sp, C, t)
    if trans:
        failures.append(trans)
    return TopologyReport(not failures, J.degenerate, failures)


def _first_stability_failure(sp, C, t):
    for i in bits(t):
        c = sp.entries[i][0]
        for f in C.into[c]:
            if not t >> sp.pb[f][i] & 1:
                return AxiomFailure("stability", c, sp.sieve(i), arrow=f)
    return None


def _first_transitivity_failure(sp, C, t):
    for c in range(C.n_objects):
        covers = [sp.entries[z][1] for z in sp.by_object[c] if t >> z & 1]
        for r in sp.by_object[c]:
            if t >> r & 1:
                continue
            covered = _covered_arrows(sp, C, t, r)
            for z in covers:
                if z & ~covered == 0:
                    return AxiomFailure("transitivity", c, sp.sieve(r), cover=Sieve(c, z))
    return None


def is_topology_bits(sp: SieveSpace, t: int) -> bool:
    C = sp.category
    if any(not t >> m & 1 for m in sp.maximal):
        return False
    return _first_stability_failure(sp, C, t) is None and _first_transitivity_failure(sp, C, t) is None


# ---------------------------------------------------------------------------
# proof-system closure


def _stability_closure(sp: SieveSpace, C: FinCategory, t: int) -> int:
    work = bits(t)
    while work:
        i = work.pop()
        c = sp.entries[i][0]
        for f in C.into[c]:
            j = sp.pb[f][i]
            if not t >> j & 1:
                t |= 1 << j
                work.append(j)
    return t


def _transitivity_round(sp: SieveSpace, C: FinCategory, t: int) -> int:
    for c in range(C.n_objects):
        covers = [sp.entries[z][1] for z in sp.by_object[c] if t >> z & 1]
        for r in sp.by_object[c]:
            if t >> r & 1:
                continue
            covered = _covered_arrows(sp, C, t, r)
            if any(z & ~covered == 0 for z in covers):
                t |= 1 << r
                covers.append(sp.entries[r][1])
    return t


def close_bits(sp: SieveSpace, t: int) -> int:
    """Least topology (as bits) containing the sieve set ``t``."""
    C = sp.category
    for m in sp.maximal:
        t |= 1 << m
    while True:
        t = _stability_closure(sp, C, t)
        t2 = _transitivity_round(sp, C, t)
        if t2 == t:
            return t
        t = t2


def _seed_bits(C: FinCategory, sp: SieveSpace, seeds) -> int:
    t = 0
    for item in seeds:
        if isinstance(item, Sieve):
            s = item
        else:
            c, s = item
            if s.base != c:
                raise ValueError(f"seed sieve is not based at {C.objects[c]}")
        t |= 1 << sp.id_of(s)
    return t


def generate_topology(C: FinCategory, seeds: Sequence = (), budget: Budget | None = None,
                      name: str = "") -> GrothendieckTopology:
    """Least topology whose covers contain every seed sieve."""
    sp = sieve_space(C, budget)
    return GrothendieckTopology(C, close_bits(sp, _seed_bits(C, sp, seeds)), name)


def trivial_topology(C: FinCategory) -> GrothendieckTopology:
    sp = sieve_space(C)
    return GrothendieckTopology(C, sum(1 << m for m in sp.maximal), "trivial")


def top_topology(C: FinCategory) -> GrothendieckTopology:
    sp = sieve_space(C)
    return GrothendieckTopology(C, (1 << len(sp)) - 1, "top")


def canonical_topology(C: FinCategory, kind: str) -> GrothendieckTopology:
    sp = sieve_space(C)
    if kind == "trivial":
        return trivial_topology(C)
    if kind == "atomic":
        ore = check_right_ore(C)
        if not ore.holds:
            raise NotRightOre(tuple(C.arrows[f] for f in ore.witness))
        t = sum(1 << i for i in range(len(sp)) if sp.entries[i][1])
        return GrothendieckTopology(C, t, "atomic")
    if kind == "dense":
        t = 0
        for i, (c, m) in enumerate(sp.entries):
            if all(pullback_mask(C, f, m) for f in C.into[c]):
                t |= 1 << i
        return GrothendieckTopology(C, t, "dense")
    raise ValueError(f"unknown topology kind {kind!r}")


# ---------------------------------------------------------------------------
# enumeration and lattice structure


def _enumerate_by_closure(sp: SieveSpace, budget: Budget) -> list[int]:
    # every topology is reached from the bottom by adding one sieve and closing
    bottom = close_bits(sp, 0)
    seen = {bottom}
    frontier = [bottom]
    n = len(sp)
    while frontier:
        nxt = []
        for t in frontier:
            for i in range(n):
                if t >> i & 1:
                    continue
                t2 = close_bits(sp, t | 1 << i)
                if t2 not in seen:
                    seen.add(t2)
                    budget.check("max_topologies", len(seen))
                    nxt.append(t2)
        frontier = nxt
    return list(seen)


def _enumerate_by_filter(sp: SieveSpace, budget: Budget, max_free: int = 22) -> list[int]:
    # independent oracle: test the three axioms on every family of sieves
    free = [i for i in range(len(sp)) if i not in set(sp.maximal)]
    if len(free) > max_free:
        raise SizeGuard("non-maximal sieves for filter enumeration", len(free), max_free)
    base = sum(1 << m for m in sp.maximal)
    out = []
    for sub in range(1 << len(free)):
        t = base
        k = 0
        while sub:
            if sub & 1:
                t |= 1 << free[k]
            sub >>= 1
            k += 1
        if is_topology_bits(sp, t):
            out.append(t)
    return out


@dataclass
class TopologyLattice:
    category: FinCategory
    elements: tuple[GrothendieckTopology, ...]

    def __post_init__(self):
        self._index = {J.bits: k for k, J in enumerate(self.elements)}

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, J) -> bool:
        return J.bits in self._index

    def index(self, J: GrothendieckTopology) -> int:
        return self._index[J.bits]

    @property
    def bottom(self) -> GrothendieckTopology:
        return self.elements[0]

    @property
    def top(self) -> GrothendieckTopology:
        return self.elements[-1]

    def meet(self, J, K) -> GrothendieckTopology:
        return self._lookup(J.bits & K.bits)

    def join(self, J, K) -> GrothendieckTopology:
        return self._lookup(close_bits(sieve_space(self.category), J.bits | K.bits))

    def join_all(self, items: Iterable[GrothendieckTopology]) -> GrothendieckTopology:
        t = 0
        for L in items:
            t |= L.bits
        return self._lookup(close_bits(sieve_space(self.category), t))

    def implies(self, J, K) -> GrothendieckTopology:
        return self.join_all(L for L in self.elements if (L.bits & J.bits) & ~K.bits == 0)

    def glb(self, J, K) -> GrothendieckTopology:
        """Greatest lower bound found by scanning the order (oracle for ``meet``)."""
        lower = [L for L in self.elements if L <= J and L <= K]
        best = [L for L in lower if all(M <= L for M in lower)]
        return best[0]

    def _lookup(self, t: int) -> GrothendieckTopology:
        return self.elements[self._index[t]]


def enumerate_topologies(C: FinCategory, method: str = "closure",
                         budget: Budget | None = None) -> TopologyLattice:
    budget = budget or default_budget()
    sp = sieve_space(C, budget)
    if method == "closure":
        found = _enumerate_by_closure(sp, budget)
    elif method == "filter":
        found = _enumerate_by_filter(sp, budget)
    else:
        raise ValueError(f"unknown enumeration method {method!r}")
    elements = sorted((GrothendieckTopology(C, t) for t in found), key=lambda J: J.sort_key)
    return TopologyLattice(C, tuple(elements))


def lattice_ops(J: GrothendieckTopology, K: GrothendieckTopology, op: str,
                lattice: TopologyLattice | None = None) -> GrothendieckTopology:
    if J.category != K.category:
        raise ValueError("topologies live on different categories")
    C = J.category
    if op == "meet":
        return GrothendieckTopology(C, J.bits & K.bits)
    if op == "join":
        return GrothendieckTopology(C, close_bits(sieve_space(C), J.bits | K.bits))
    if op == "implication":
        lattice = lattice or enumerate_topologies(C)
        return lattice.implies(J, K)
    raise ValueError(f"unknown lattice operation {op!r}")


def enumerate_subtoposes(C: FinCategory, J: GrothendieckTopology,
                         lattice: TopologyLattice | None = None) -> list[GrothendieckTopology]:
    """Topologies containing ``J``; one per subtopos of the sheaf topos."""
    lattice = lattice or enumerate_topologies(C)
    return [K for K in lattice if J <= K]
