"""Finite models of the theory of J-continuous flat functors.

A model here is a covariant finite-set-valued functor.  Functoriality covers
the identity and composition axioms, flatness the nonemptiness, span and
equalizer axioms, continuity the covering axiom.  Homomorphisms of models are
natural transformations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Iterator, Sequence

from .budget import Budget, default_budget
from .category import FinCategory, is_cofiltered, make_category
from .functors import FunctorReport, SetValuedFunctor, check_functoriality, relabel
from .sieves import Sieve
from .topologies import GrothendieckTopology


def validate_functor(F: SetValuedFunctor) -> FunctorReport:
    return check_functoriality(F)


# ---------------------------------------------------------------------------
# flatness


@dataclass
class FlatnessReport:
    nonempty: bool
    span_completion: bool
    equalizing: bool
    span_witness: tuple | None = None
    equalizing_witness: tuple | None = None

    @property
    def flat(self) -> bool:
        return self.nonempty and self.span_completion and self.equalizing

    def as_dict(self, F: SetValuedFunctor) -> dict:
        C = F.category
        out = {"flat": self.flat, "nonempty": self.nonempty,
               "span_completion": self.span_completion, "equalizing": self.equalizing}
        if self.span_witness:
            (a, x), (b, y) = self.span_witness
            out["span_witness"] = {C.objects[a]: F.sets[a][x], C.objects[b]: F.sets[b][y]}
        if self.equalizing_witness:
            f, g, x = self.equalizing_witness
            out["equalizing_witness"] = {"arrows": [C.arrows[f], C.arrows[g]],
                                         "element": F.sets[C.src[f]][x]}
        return out


def _span_failure(F: SetValuedFunctor):
    C = F.category
    n = C.n_objects
    for a, b in product(range(n), repeat=2):
        for x, y in product(range(F.size(a)), range(F.size(b))):
            ok = False
            for c in range(n):
                for f in C.hom(c, a):
                    for g in C.hom(c, b):
                        if any(F.actions[f][z] == x and F.actions[g][z] == y for z in range(F.size(c))):
                            ok = True
                            break
                    if ok:
                        break
                if ok:
                    break
            if not ok:
                return ((a, x), (b, y))
    return None


def _equalizer_failure(F: SetValuedFunctor):
    C = F.category
    n = C.n_objects
    for a, b in product(range(n), repeat=2):
        for f, g in product(C.hom(a, b), repeat=2):
            if f >= g:
                continue
            for x in range(F.size(a)):
                if F.actions[f][x] != F.actions[g][x]:
                    continue
                ok = any(C.table[f][h] == C.table[g][h] and x in F.actions[h]
                         for h in C.into[a])
                if not ok:
                    return (f, g, x)
    return None


def check_flatness(F: SetValuedFunctor, method: str = "direct") -> FlatnessReport:
    """Evaluate the three flatness axioms.

    ``method="elements"`` instead builds the category of elements and tests
    that it is cofiltered; it reports only which axiom group fails.
    """
    if method == "elements":
        return _flatness_via_elements(F)
    nonempty = any(F.size(c) for c in range(F.category.n_objects))
    span = _span_failure(F)
    eq = _equalizer_failure(F)
    return FlatnessReport(nonempty, span is None, eq is None, span, eq)


def category_of_elements(F: SetValuedFunctor) -> FinCategory:
    """Objects (A, x); arrows (C, z) -> (A, x) are f: C -> A with F(f)(z) = x."""
    C = F.category
    objs = [(c, x) for c in range(C.n_objects) for x in range(F.size(c))]
    oid = {o: k for k, o in enumerate(objs)}
    arrows = []
    aid = {}
    for f in range(C.n_arrows):
        for z in range(F.size(C.src[f])):
            s = oid[(C.src[f], z)]
            t = oid[(C.tgt[f], F.actions[f][z])]
            aid[(f, z)] = len(arrows)
            arrows.append((f"{C.arrows[f]}@{F.sets[C.src[f]][z]}", s, t, f, z))
    identities = [aid[(C.identities[c], x)] for c, x in objs]

    def compose(g, f):
        _, _, _, cf, z = arrows[f]
        cg = arrows[g][3]
        return aid[(C.table[cg][cf], z)]

    names = [f"{C.objects[c]}:{F.sets[c][x]}" for c, x in objs]
    budget = Budget(max_objects=max(16, len(objs)), max_arrows=max(64, len(arrows)))
    return make_category(f"el({F.name})", names, [a[:3] for a in arrows], identities, compose, budget)


def _flatness_via_elements(F: SetValuedFunctor) -> FlatnessReport:
    E = category_of_elements(F)
    ok, why = is_cofiltered(E)
    if ok:
        return FlatnessReport(True, True, True)
    kind = why[0]
    return FlatnessReport(kind != "empty", kind != "cone", kind != "equalizer")


# ---------------------------------------------------------------------------
# continuity


@dataclass
class ContinuityReport:
    continuous: bool
    object: int | None = None
    sieve: Sieve | None = None
    element: int | None = None
    flat_note: str = ""

    def as_dict(self, F: SetValuedFunctor) -> dict:
        C = F.category
        out = {"continuous": self.continuous}
        if not self.continuous:
            out["failure"] = {"object": C.objects[self.object], "sieve": self.sieve.names(C),
                              "element": F.sets[self.object][self.element]}
        if self.flat_note:
            out["note"] = self.flat_note
        return out


def check_continuity(J: GrothendieckTopology, F: SetValuedFunctor, note_flatness: bool = True) -> ContinuityReport:
    """Every covering sieve is sent to a jointly surjective family."""
    C = J.category
    note = "" if not note_flatness or check_flatness(F).flat else "functor is not flat"
    for a in range(C.n_objects):
        for R in J.covers(a):
            hit = set()
            for f in R.members():
                hit.update(F.actions[f])
            for x in range(F.size(a)):
                if x not in hit:
                    return ContinuityReport(False, a, R, x, note)
    return ContinuityReport(True, flat_note=note)


# ---------------------------------------------------------------------------
# natural transformations and isomorphism


def natural_transformations(F: SetValuedFunctor, G: SetValuedFunctor,
                            fixed: dict | None = None, bijective: bool = False) -> Iterator[tuple]:
    """Yield every natural transformation F -> G as a tuple of component tuples.

    ``fixed`` pre-assigns some values ``(c, x) -> y``; ``bijective`` restricts
    to componentwise bijections.
    """
    C = F.category
    elems = [(c, x) for c in range(C.n_objects) for x in range(F.size(c))]
    if bijective and F.sizes() != G.sizes():
        return

    def propagate(assign: dict, start: list) -> bool:
        work = list(start)
        while work:
            c, x = work.pop()
            y = assign[(c, x)]
            for f in C.out[c]:
                d = C.tgt[f]
                key = (d, F.actions[f][x])
                val = G.actions[f][y]
                if key in assign:
                    if assign[key] != val:
                        return False
                else:
                    assign[key] = val
                    work.append(key)
        if bijective:
            for c in range(C.n_objects):
                vals = [v for (d, _), v in assign.items() if d == c]
                if len(vals) != len(set(vals)):
                    return False
        return True

    base = dict(fixed or {})
    if not propagate(base, list(base)):
        return

    def rec(assign: dict):
        for e in elems:
            if e not in assign:
                break
        else:
            c_count = C.n_objects
            yield tuple(tuple(assign[(c, x)] for x in range(F.size(c))) for c in range(c_count))
            return
        c, x = e
        for y in range(G.size(c)):
            trial = dict(assign)
            trial[e] = y
            if propagate(trial, [e]):
                yield from rec(trial)

    yield from rec(base)


def iso_check(F: SetValuedFunctor, G: SetValuedFunctor):
    """A natural isomorphism F -> G as per-object bijections, or None."""
    if F.category != G.category or F.sizes() != G.sizes():
        return None
    for alpha in natural_transformations(F, G, bijective=True):
        return alpha
    return None


def canonical_key(F: SetValuedFunctor, budget: Budget | None = None) -> tuple:
    """Least action table over all per-object relabellings, keyed by names."""
    C = F.category
    obj_order = sorted(range(C.n_objects), key=lambda c: C.objects[c])
    arr_order = sorted((f for f in range(C.n_arrows) if not C.is_identity(f)),
                       key=lambda f: C.arrows[f])
    sizes = tuple(F.size(c) for c in obj_order)
    best = None
    for perms in product(*[permutations(range(F.size(c))) for c in range(C.n_objects)]):
        G = relabel(F, perms)
        key = tuple(G.actions[f] for f in arr_order)
        if best is None or key < best:
            best = key
    return (sizes, tuple(C.arrows[f] for f in arr_order), best)


def canonical_model(F: SetValuedFunctor) -> SetValuedFunctor:
    C = F.category
    best = None
    for perms in product(*[permutations(range(F.size(c))) for c in range(C.n_objects)]):
        G = relabel(F, perms)
        key = tuple(G.actions[f] for f in sorted(range(C.n_arrows), key=lambda f: C.arrows[f]))
        if best is None or key < best[0]:
            best = (key, G)
    G = best[1]
    sets = tuple(tuple(str(k) for k in range(G.size(c))) for c in range(C.n_objects))
    return SetValuedFunctor(C, sets, G.actions, F.name)


# ---------------------------------------------------------------------------
# enumeration


def enumerate_functors(C: FinCategory, max_card: int, budget: Budget | None = None) -> Iterator[SetValuedFunctor]:
    """Every functor C -> FinSet with |F(c)| <= max_card, as raw action tables."""
    budget = budget or default_budget()
    budget.check("max_card", max_card)
    nonid = [f for f in range(C.n_arrows) if not C.is_identity(f)]
    for sizes in product(range(max_card + 1), repeat=C.n_objects):
        acts: dict[int, tuple] = {C.identities[c]: tuple(range(sizes[c])) for c in range(C.n_objects)}

        def consistent(f: int) -> bool:
            # every assigned composable pair in which f is a factor or the composite
            for h in acts:
                for k in acts:
                    if C.tgt[k] != C.src[h]:
                        continue
                    hk = C.table[h][k]
                    if f not in (h, k, hk) or hk not in acts:
                        continue
                    if any(acts[hk][x] != acts[h][acts[k][x]] for x in range(sizes[C.src[k]])):
                        return False
            return True

        def rec(i: int):
            if i == len(nonid):
                yield SetValuedFunctor(
                    C, tuple(tuple(str(k) for k in range(s)) for s in sizes),
                    tuple(acts[f] for f in range(C.n_arrows)))
                return
            f = nonid[i]
            for row in product(range(sizes[C.tgt[f]]), repeat=sizes[C.src[f]]):
                acts[f] = row
                if consistent(f):
                    yield from rec(i + 1)
                del acts[f]

        yield from rec(0)


def enumerate_models(J: GrothendieckTopology, max_card: int, check_continuity_axiom: bool = True,
                     budget: Budget | None = None) -> list[SetValuedFunctor]:
    """Flat (and J-continuous) functors with |F(c)| <= max_card up to isomorphism."""
    C = J.category
    found: dict[tuple, SetValuedFunctor] = {}
    for F in enumerate_functors(C, max_card, budget):
        if not check_flatness(F).flat:
            continue
        if check_continuity_axiom and not check_continuity(J, F, note_flatness=False).continuous:
            continue
        key = canonical_key(F)
        if key not in found:
            found[key] = canonical_model(F)
    return [found[k] for k in sorted(found)]


# ---------------------------------------------------------------------------
# homogeneity


@dataclass
class HomogeneityReport:
    homogeneous: bool
    checked: int = 0
    failure: tuple | None = None


def check_homogeneous(M: SetValuedFunctor, fp: Sequence[SetValuedFunctor]) -> HomogeneityReport:
    """Every j: a -> b and chi: a -> M (a, b in fp) admit chi~: b -> M with chi~∘j = chi."""
    checked = 0
    for ia, a in enumerate(fp):
        for ib, b in enumerate(fp):
            for j in natural_transformations(a, b):
                for chi in natural_transformations(a, M):
                    checked += 1
                    fixed = {}
                    clash = False
                    for c in range(a.category.n_objects):
                        for x in range(a.size(c)):
                            key = (c, j[c][x])
                            if key in fixed and fixed[key] != chi[c][x]:
                                clash = True
                            fixed[key] = chi[c][x]
                    if clash or next(natural_transformations(b, M, fixed=fixed), None) is None:
                        return HomogeneityReport(False, checked, (ia, ib, j, chi))
    return HomogeneityReport(True, checked)
