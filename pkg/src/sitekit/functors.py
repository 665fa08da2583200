"""Finite-set-valued functors, both variances.

``sets[c]`` lists element labels at object ``c``; elements are referred to by
position.  For an arrow ``f: d -> c`` a :class:`Presheaf` stores the map
``sets[c] -> sets[d]`` and a :class:`SetValuedFunctor` the map
``sets[d] -> sets[c]``, each as a tuple of positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .category import FinCategory


@dataclass
class FunctorReport:
    valid: bool
    message: str = ""
    witness: tuple | None = None


@dataclass(frozen=True, eq=False)
class _FinSetData:
    category: FinCategory
    sets: tuple[tuple[str, ...], ...]
    actions: tuple[tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    contravariant = False

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return (self.category, self.sets, self.actions) == (other.category, other.sets, other.actions)

    def __hash__(self):
        return hash((self.sets, self.actions))

    def size(self, c: int) -> int:
        return len(self.sets[c])

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.sets)

    def total(self) -> int:
        return sum(self.sizes())

    def act(self, f: int, x: int) -> int:
        return self.actions[f][x]

    def arrow_ends(self, f: int) -> tuple[int, int]:
        """(object whose elements are acted on, object receiving the result)."""
        C = self.category
        return (C.tgt[f], C.src[f]) if self.contravariant else (C.src[f], C.tgt[f])

    def as_dict(self) -> dict:
        C = self.category
        out = {"sets": {C.objects[c]: list(self.sets[c]) for c in range(C.n_objects)}, "actions": {}}
        for f in range(C.n_arrows):
            if C.is_identity(f):
                continue
            a, b = self.arrow_ends(f)
            out["actions"][C.arrows[f]] = {self.sets[a][x]: self.sets[b][y]
                                           for x, y in enumerate(self.actions[f])}
        return out


class Presheaf(_FinSetData):
    contravariant = True


class SetValuedFunctor(_FinSetData):
    contravariant = False


def _shape_failure(F: _FinSetData) -> FunctorReport | None:
    C = F.category
    if len(F.sets) != C.n_objects or len(F.actions) != C.n_arrows:
        return FunctorReport(False, "sets/actions do not match the category", None)
    for f in range(C.n_arrows):
        a, b = F.arrow_ends(f)
        acts = F.actions[f]
        if len(acts) != len(F.sets[a]) or any(not 0 <= y < len(F.sets[b]) for y in acts):
            return FunctorReport(False, f"action of {C.arrows[f]} is not a function", (f,))
    return None


def check_functoriality(F: _FinSetData) -> FunctorReport:
    """Identity and composition laws in the functor's own variance."""
    bad = _shape_failure(F)
    if bad:
        return bad
    C = F.category
    for c in range(C.n_objects):
        i = C.identities[c]
        if any(F.actions[i][x] != x for x in range(len(F.sets[c]))):
            return FunctorReport(False, f"{C.arrows[i]} does not act as the identity", (i,))
    for f in range(C.n_arrows):
        for g in C.out[C.tgt[f]]:
            gf = C.table[g][f]
            a, _ = F.arrow_ends(gf)
            for x in range(len(F.sets[a])):
                if F.contravariant:
                    # P(g∘f) = P(f)∘P(g)
                    lhs, rhs = F.actions[gf][x], F.actions[f][F.actions[g][x]]
                else:
                    lhs, rhs = F.actions[gf][x], F.actions[g][F.actions[f][x]]
                if lhs != rhs:
                    return FunctorReport(
                        False, f"composition law fails for {C.arrows[g]}∘{C.arrows[f]} "
                        f"at {F.sets[a][x]}", (g, f))
    return FunctorReport(True)


def _build(cls, C: FinCategory, sets: Mapping[str, Sequence[str]],
           actions: Mapping[str, Mapping[str, str]], name: str = ""):
    sets_t = tuple(tuple(sets.get(o, ())) for o in C.objects)
    index = [{e: k for k, e in enumerate(s)} for s in sets_t]
    acts = []
    for f in range(C.n_arrows):
        a, b = (C.tgt[f], C.src[f]) if cls.contravariant else (C.src[f], C.tgt[f])
        if C.is_identity(f):
            acts.append(tuple(range(len(sets_t[a]))))
            continue
        table = actions.get(C.arrows[f], {})
        row = []
        for e in sets_t[a]:
            if e not in table:
                raise ValueError(f"action of {C.arrows[f]} is undefined on {e!r}")
            if table[e] not in index[b]:
                raise ValueError(f"action of {C.arrows[f]} sends {e!r} outside {C.objects[b]}")
            row.append(index[b][table[e]])
        acts.append(tuple(row))
    return cls(C, sets_t, tuple(acts), name)


def presheaf_from_tables(C, sets, actions, name="") -> Presheaf:
    return _build(Presheaf, C, sets, actions, name)


def functor_from_tables(C, sets, actions, name="") -> SetValuedFunctor:
    return _build(SetValuedFunctor, C, sets, actions, name)


def representable(C: FinCategory, c: int) -> Presheaf:
    """Hom(-, c): elements at d are arrows d -> c; f acts by precomposition."""
    sets = tuple(tuple(C.arrows[h] for h in C.hom(d, c)) for d in range(C.n_objects))
    pos = [{h: k for k, h in enumerate(C.hom(d, c))} for d in range(C.n_objects)]
    acts = []
    for f in range(C.n_arrows):
        d, e = C.src[f], C.tgt[f]
        acts.append(tuple(pos[d][C.table[h][f]] for h in C.hom(e, c)))
    return Presheaf(C, sets, tuple(acts), f"Hom(-,{C.objects[c]})")


def corepresentable(C: FinCategory, c: int) -> SetValuedFunctor:
    """Hom(c, -): elements at d are arrows c -> d; f acts by postcomposition."""
    sets = tuple(tuple(C.arrows[h] for h in C.hom(c, d)) for d in range(C.n_objects))
    pos = [{h: k for k, h in enumerate(C.hom(c, d))} for d in range(C.n_objects)]
    acts = []
    for f in range(C.n_arrows):
        d, e = C.src[f], C.tgt[f]
        acts.append(tuple(pos[e][C.table[f][h]] for h in C.hom(c, d)))
    return SetValuedFunctor(C, sets, tuple(acts), f"Hom({C.objects[c]},-)")


def constant(cls, C: FinCategory, n: int, name: str = ""):
    sets = tuple(tuple(str(k) for k in range(n)) for _ in range(C.n_objects))
    acts = tuple(tuple(range(n)) for _ in range(C.n_arrows))
    return cls(C, sets, acts, name or f"const{n}")


def constant_presheaf(C: FinCategory, n: int) -> Presheaf:
    return constant(Presheaf, C, n)


def constant_functor(C: FinCategory, n: int) -> SetValuedFunctor:
    return constant(SetValuedFunctor, C, n)


def relabel(F: _FinSetData, perms: Sequence[Sequence[int]]) -> _FinSetData:
    """Transport ``F`` along bijections ``perms[c]: old position -> new position``."""
    C = F.category
    sets = []
    for c in range(C.n_objects):
        s = [None] * len(F.sets[c])
        for old, new in enumerate(perms[c]):
            s[new] = F.sets[c][old]
        sets.append(tuple(s))
    acts = []
    for f in range(C.n_arrows):
        a, b = F.arrow_ends(f)
        row = [0] * len(F.sets[a])
        for x, y in enumerate(F.actions[f]):
            row[perms[a][x]] = perms[b][y]
        acts.append(tuple(row))
    return type(F)(C, tuple(sets), tuple(acts), F.name)

