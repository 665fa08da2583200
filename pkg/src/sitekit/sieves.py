"""Sieves as bitsets over the global arrow index of a finite category."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .budget import Budget, default_budget
from .category import FinCategory


class WrongCodomain(ValueError):
    pass


class BaseMismatch(ValueError):
    pass


class NotASieve(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Sieve:
    base: int
    mask: int

    def __contains__(self, f: int) -> bool:
        return bool(self.mask >> f & 1)

    def members(self) -> list[int]:
        return bits(self.mask)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def is_maximal(self, C: FinCategory) -> bool:
        # identity arrows belong to a sieve iff it is maximal
        return self.mask >> C.identities[self.base] & 1 == 1

    def names(self, C: FinCategory) -> list[str]:
        return [C.arrows[f] for f in self.members()]


def bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def maximal_sieve(C: FinCategory, c: int) -> Sieve:
    return Sieve(c, C.into_mask[c])


def empty_sieve(c: int) -> Sieve:
    return Sieve(c, 0)


def close_mask(C: FinCategory, c: int, gens: Iterable[int]) -> int:
    mask = 0
    for f in gens:
        if C.tgt[f] != c:
            raise WrongCodomain(f"{C.arrows[f]} does not target {C.objects[c]}")
        for g in C.into[C.src[f]]:
            mask |= 1 << C.table[f][g]
    return mask


def close_to_sieve(C: FinCategory, c: int, generators: Iterable[int]) -> Sieve:
    """Smallest sieve on ``c`` containing ``generators``."""
    return Sieve(c, close_mask(C, c, generators))


def make_sieve(C: FinCategory, c: int, arrows: Iterable[int]) -> Sieve:
    """Validate an explicit member set; it must already be closed."""
    arrows = list(arrows)
    mask = 0
    for f in arrows:
        if C.tgt[f] != c:
            raise WrongCodomain(f"{C.arrows[f]} does not target {C.objects[c]}")
        mask |= 1 << f
    if close_mask(C, c, arrows) != mask:
        raise NotASieve(f"{sorted(C.arrows[f] for f in arrows)} is not closed under precomposition")
    return Sieve(c, mask)


def is_sieve(C: FinCategory, s: Sieve) -> bool:
    if s.mask & ~C.into_mask[s.base]:
        return False
    return close_mask(C, s.base, s.members()) == s.mask


def pullback_mask(C: FinCategory, f: int, mask: int) -> int:
    out = 0
    for g in C.into[C.src[f]]:
        if mask >> C.table[f][g] & 1:
            out |= 1 << g
    return out


def pullback_sieve(C: FinCategory, f: int, R: Sieve) -> Sieve:
    """``f*(R) = {g | f∘g ∈ R}``, a sieve on the domain of ``f``."""
    if C.tgt[f] != R.base:
        raise BaseMismatch(f"{C.arrows[f]} does not target the base of the sieve")
    return Sieve(C.src[f], pullback_mask(C, f, R.mask))


def implication_mask(C: FinCategory, c: int, r: int, s: int) -> int:
    out = 0
    for f in C.into[c]:
        pr = pullback_mask(C, f, r)
        if pr & ~pullback_mask(C, f, s) == 0:
            out |= 1 << f
    return out


def sieve_heyting(C: FinCategory, R: Sieve, S: Sieve | None, op: str, Z: Sieve | None = None) -> Sieve:
    """Heyting operations on sieves at one object.

    ``op`` is ``meet``, ``join``, ``implication`` or ``negation``; negation is
    taken relative to ``Z`` (``R ⇒ Z``), defaulting to the empty sieve.
    """
    if op == "negation":
        Z = Z if Z is not None else empty_sieve(R.base)
        if Z.base != R.base:
            raise BaseMismatch("negation relative to a sieve on another object")
        return Sieve(R.base, implication_mask(C, R.base, R.mask, Z.mask))
    if S is None or S.base != R.base:
        raise BaseMismatch("sieves live on different objects")
    if op == "meet":
        return Sieve(R.base, R.mask & S.mask)
    if op == "join":
        return Sieve(R.base, R.mask | S.mask)
    if op == "implication":
        return Sieve(R.base, implication_mask(C, R.base, R.mask, S.mask))
    raise ValueError(f"unknown sieve operation {op!r}")


def enumerate_sieve_masks(C: FinCategory, c: int) -> list[int]:
    """All sieves on ``c``, sorted by mask."""
    into = C.into[c]
    closed_gen = {f: close_mask(C, c, [f]) for f in into}
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for m in frontier:
            for f in into:
                if m >> f & 1:
                    continue
                m2 = m | closed_gen[f]
                if m2 not in seen:
                    seen.add(m2)
                    nxt.append(m2)
        frontier = nxt
    return sorted(seen)


class SieveSpace:
    """Global index of every sieve of a category plus a pullback table.

    Sieve ids are assigned object by object, each object's sieves sorted by
    mask.  ``pb[f][i]`` is the id of ``f*(sieve i)`` for ``i`` on ``target(f)``.
    """

    def __init__(self, C: FinCategory, budget: Budget | None = None):
        budget = budget or default_budget()
        for c in range(C.n_objects):
            budget.check("max_arrows_into", len(C.into[c]))
        self.category = C
        self.by_object: list[list[int]] = []     # object -> list of sieve ids
        self.entries: list[tuple[int, int]] = []  # id -> (object, mask)
        self.index: dict[tuple[int, int], int] = {}
        for c in range(C.n_objects):
            ids = []
            for m in enumerate_sieve_masks(C, c):
                self.index[(c, m)] = len(self.entries)
                ids.append(len(self.entries))
                self.entries.append((c, m))
            self.by_object.append(ids)
            budget.check("max_sieves", len(self.entries))
        self.maximal = [self.index[(c, C.into_mask[c])] for c in range(C.n_objects)]
        self.empty = [self.index[(c, 0)] for c in range(C.n_objects)]
        self.object_mask = [sum(1 << i for i in ids) for ids in self.by_object]
        self.pb: list[dict[int, int]] = []
        for f in range(C.n_arrows):
            d, c = C.src[f], C.tgt[f]
            self.pb.append({i: self.index[(d, pullback_mask(C, f, self.entries[i][1]))]
                            for i in self.by_object[c]})

    def __len__(self) -> int:
        return len(self.entries)

    def sieve(self, i: int) -> Sieve:
        c, m = self.entries[i]
        return Sieve(c, m)

    def id_of(self, s: Sieve) -> int:
        return self.index[(s.base, s.mask)]


@lru_cache(maxsize=128)
def _cached_space(C: FinCategory, budget: Budget) -> SieveSpace:
    return SieveSpace(C, budget)


def sieve_space(C: FinCategory, budget: Budget | None = None) -> SieveSpace:
    return _cached_space(C, budget or default_budget())
