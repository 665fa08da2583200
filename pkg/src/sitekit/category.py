"""Finite categories given by an explicit composition table.

Objects and arrows are dense integer ids assigned in declaration order; each
object's identity is synthesized as ``id_<object>`` and gets its arrow id when
the object is declared.  ``table[g][f]`` holds ``g∘f`` or ``-1`` when
``target(f) != source(g)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

from .budget import Budget, default_budget


class CategoryError(ValueError):
    def __init__(self, message: str, position: tuple[int, int] | None = None):
        super().__init__(message)
        self.position = position


class MissingComposite(CategoryError):
    pass


class AssociativityViolation(CategoryError):
    def __init__(self, message: str, triple: tuple[str, str, str], position=None):
        super().__init__(message, position)
        self.triple = triple


class IdentityViolation(CategoryError):
    pass


@dataclass
class CategorySpec:
    """Unvalidated description of a category, as written in a workspace file.

    ``equations`` holds triples ``(g, f, h)`` meaning ``g∘f = h``.  Positions
    are optional ``(line, column)`` pairs keyed by ``("object", name)``,
    ``("arrow", name)`` or ``("compose", g, f)`` for diagnostics.
    """

    name: str = "C"
    objects: list[str] = field(default_factory=list)
    arrows: list[tuple[str, str, str]] = field(default_factory=list)
    equations: list[tuple[str, str, str]] = field(default_factory=list)
    positions: dict = field(default_factory=dict, compare=False)


def identity_name(obj: str) -> str:
    return f"id_{obj}"


@dataclass(frozen=True, eq=False)
class FinCategory:
    name: str
    objects: tuple[str, ...]
    arrows: tuple[str, ...]
    src: tuple[int, ...]
    tgt: tuple[int, ...]
    identities: tuple[int, ...]
    table: tuple[tuple[int, ...], ...]

    def __eq__(self, other):
        if not isinstance(other, FinCategory):
            return NotImplemented
        return (self.objects, self.arrows, self.src, self.tgt, self.identities, self.table) == (
            other.objects, other.arrows, other.src, other.tgt, other.identities, other.table)

    def __hash__(self):
        return hash((self.objects, self.arrows, self.table))

    def __repr__(self):
        return f"FinCategory({self.name!r}, {len(self.objects)} objects, {len(self.arrows)} arrows)"

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_arrows(self) -> int:
        return len(self.arrows)

    def compose(self, g: int, f: int) -> int:
        h = self.table[g][f]
        if h < 0:
            raise ValueError(f"{self.arrows[g]} ∘ {self.arrows[f]} is not composable")
        return h

    def composable(self, g: int, f: int) -> bool:
        return self.tgt[f] == self.src[g]

    def is_identity(self, f: int) -> bool:
        return self.identities[self.src[f]] == f

    def object_id(self, name: str) -> int:
        return self._object_index[name]

    def arrow_id(self, name: str) -> int:
        return self._arrow_index[name]

    @cached_property
    def _object_index(self) -> dict[str, int]:
        return {o: i for i, o in enumerate(self.objects)}

    @cached_property
    def _arrow_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.arrows)}

    @cached_property
    def into(self) -> tuple[tuple[int, ...], ...]:
        """Arrows with target ``c``, for each object ``c``."""
        return tuple(tuple(f for f in range(self.n_arrows) if self.tgt[f] == c)
                     for c in range(self.n_objects))

    @cached_property
    def out(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(f for f in range(self.n_arrows) if self.src[f] == c)
                     for c in range(self.n_objects))

    @cached_property
    def into_mask(self) -> tuple[int, ...]:
        return tuple(sum(1 << f for f in fs) for fs in self.into)

    def hom(self, a: int, b: int) -> tuple[int, ...]:
        return self._hom[a][b]

    @cached_property
    def _hom(self):
        n = self.n_objects
        out = [[[] for _ in range(n)] for _ in range(n)]
        for f in range(self.n_arrows):
            out[self.src[f]][self.tgt[f]].append(f)
        return tuple(tuple(tuple(x) for x in row) for row in out)

    def describe(self, f: int) -> str:
        return f"{self.arrows[f]}: {self.objects[self.src[f]]} -> {self.objects[self.tgt[f]]}"

    def to_spec(self) -> CategorySpec:
        """Serialize back to the non-identity presentation used by the DSL."""
        spec = CategorySpec(name=self.name, objects=list(self.objects))
        for f in range(self.n_arrows):
            if not self.is_identity(f):
                spec.arrows.append((self.arrows[f], self.objects[self.src[f]], self.objects[self.tgt[f]]))
        for g, f in product(range(self.n_arrows), repeat=2):
            if self.is_identity(g) or self.is_identity(f) or not self.composable(g, f):
                continue
            spec.equations.append((self.arrows[g], self.arrows[f], self.arrows[self.table[g][f]]))
        return spec


def check_category(C: FinCategory) -> None:
    """Raise if ``C`` breaks typing, identity or associativity laws."""
    n = C.n_arrows
    for f in range(n):
        for g in range(n):
            h = C.table[g][f]
            if C.tgt[f] != C.src[g]:
                if h != -1:
                    raise CategoryError(f"{C.arrows[g]}∘{C.arrows[f]} defined but not composable")
                continue
            if h < 0:
                raise MissingComposite(f"missing composite {C.arrows[g]}∘{C.arrows[f]}")
            if C.src[h] != C.src[f] or C.tgt[h] != C.tgt[g]:
                raise CategoryError(
                    f"{C.arrows[g]}∘{C.arrows[f]} = {C.arrows[h]} has the wrong source/target")
    for c, i in enumerate(C.identities):
        if C.src[i] != c or C.tgt[i] != c:
            raise IdentityViolation(f"identity of {C.objects[c]} is not an endo-arrow")
    for f in range(n):
        if C.table[C.identities[C.tgt[f]]][f] != f or C.table[f][C.identities[C.src[f]]] != f:
            raise IdentityViolation(f"identity law fails for {C.arrows[f]}")
    for f in range(n):
        for g in C.out[C.tgt[f]]:
            gf = C.table[g][f]
            for h in C.out[C.tgt[g]]:
                if C.table[h][gf] != C.table[C.table[h][g]][f]:
                    raise AssociativityViolation(
                        f"({C.arrows[h]}∘{C.arrows[g]})∘{C.arrows[f]} != "
                        f"{C.arrows[h]}∘({C.arrows[g]}∘{C.arrows[f]})",
                        (C.arrows[h], C.arrows[g], C.arrows[f]))


def _check_size(n_objects: int, n_arrows: int, budget: Budget | None) -> None:
    budget = budget or default_budget()
    budget.check("max_objects", n_objects)
    budget.check("max_arrows", n_arrows)


def build_category(spec: CategorySpec, budget: Budget | None = None) -> FinCategory:
    pos = spec.positions.get
    objects: list[str] = []
    obj_index: dict[str, int] = {}
    names: list[str] = []
    src: list[int] = []
    tgt: list[int] = []
    identities: list[int] = []
    arrow_index: dict[str, int] = {}

    def add_arrow(name, s, t, where):
        if name in arrow_index:
            raise CategoryError(f"duplicate arrow name {name!r}", where)
        arrow_index[name] = len(names)
        names.append(name)
        src.append(s)
        tgt.append(t)

    for o in spec.objects:
        if o in obj_index:
            raise CategoryError(f"duplicate object {o!r}", pos(("object", o)))
        obj_index[o] = len(objects)
        objects.append(o)
        identities.append(len(names))
        add_arrow(identity_name(o), obj_index[o], obj_index[o], pos(("object", o)))
    for name, s, t in spec.arrows:
        where = pos(("arrow", name))
        for end in (s, t):
            if end not in obj_index:
                raise CategoryError(f"arrow {name!r} uses undeclared object {end!r}", where)
        add_arrow(name, obj_index[s], obj_index[t], where)
    _check_size(len(objects), len(names), budget)

    n = len(names)
    identity_set = set(identities)
    table = [[-1] * n for _ in range(n)]
    for f in range(n):
        table[identities[tgt[f]]][f] = f
        table[f][identities[src[f]]] = f
    seen = set()
    for g_name, f_name, h_name in spec.equations:
        where = pos(("compose", g_name, f_name))
        for nm in (g_name, f_name, h_name):
            if nm not in arrow_index:
                raise CategoryError(f"unknown arrow {nm!r} in composition equation", where)
        g, f, h = arrow_index[g_name], arrow_index[f_name], arrow_index[h_name]
        if g in identity_set or f in identity_set:
            raise IdentityViolation(
                f"identities are implicit; equation {g_name} {f_name} = {h_name} names one", where)
        if tgt[f] != src[g]:
            raise CategoryError(f"{g_name}∘{f_name} is not composable", where)
        if src[h] != src[f] or tgt[h] != tgt[g]:
            raise CategoryError(
                f"{g_name}∘{f_name} = {h_name}: expected an arrow "
                f"{objects[src[f]]} -> {objects[tgt[g]]}", where)
        if (g, f) in seen:
            raise CategoryError(f"second equation for {g_name}∘{f_name}", where)
        seen.add((g, f))
        table[g][f] = h
    for g, f in product(range(n), repeat=2):
        if tgt[f] == src[g] and table[g][f] < 0:
            raise MissingComposite(f"no equation for {names[g]}∘{names[f]}")

    C = FinCategory(
        name=spec.name,
        objects=tuple(objects),
        arrows=tuple(names),
        src=tuple(src),
        tgt=tuple(tgt),
        identities=tuple(identities),
        table=tuple(tuple(row) for row in table),
    )
    check_category(C)
    return C


def make_category(name: str, objects: Sequence[str], arrows: Sequence[tuple[str, int, int]],
                  identities: Sequence[int], compose, budget: Budget | None = None) -> FinCategory:
    """Build a category from arrow ids directly; ``compose(g, f)`` returns an id."""
    _check_size(len(objects), len(arrows), budget)
    n = len(arrows)
    src = tuple(a[1] for a in arrows)
    tgt = tuple(a[2] for a in arrows)
    table = tuple(tuple(compose(g, f) if tgt[f] == src[g] else -1 for f in range(n))
                  for g in range(n))
    C = FinCategory(name, tuple(objects), tuple(a[0] for a in arrows), src, tgt,
                    tuple(identities), table)
    check_category(C)
    return C


def opposite(C: FinCategory) -> FinCategory:
    name = C.name[:-3] if C.name.endswith("^op") else C.name + "^op"
    n = C.n_arrows
    table = tuple(tuple(C.table[f][g] for f in range(n)) for g in range(n))
    return FinCategory(name, C.objects, C.arrows, C.tgt, C.src, C.identities, table)


def category_from_text(name: str, objects: Iterable[str], arrows=(), equations=(),
                       budget: Budget | None = None) -> FinCategory:
    """Shorthand used by the corpus: arrows as ``"f: a -> b"``, equations as ``"g f = h"``."""
    spec = CategorySpec(name=name, objects=list(objects))
    for a in arrows:
        nm, rest = a.split(":")
        s, t = rest.split("->")
        spec.arrows.append((nm.strip(), s.strip(), t.strip()))
    for e in equations:
        lhs, h = e.split("=")
        g, f = lhs.split()
        spec.equations.append((g, f, h.strip()))
    return build_category(spec, budget)


# ---------------------------------------------------------------------------
# combinatorial properties


@dataclass
class PropertyReport:
    """Outcome of a property check.

    ``witness`` is the failing configuration when ``holds`` is false.  On
    success ``completions`` maps each input configuration to the arrows that
    complete it.
    """

    property: str
    holds: bool
    witness: tuple | None = None
    completions: dict = field(default_factory=dict)

    def describe(self, C: FinCategory) -> str:
        if self.holds:
            return f"{self.property}: holds ({len(self.completions)} configurations completed)"
        return f"{self.property}: fails at {tuple(C.arrows[x] for x in self.witness)}"


def check_right_ore(C: FinCategory) -> PropertyReport:
    """Every cospan ``f: b -> a``, ``g: c -> a`` completes to ``f∘u = g∘v``."""
    report = PropertyReport("right_ore", True)
    for a in range(C.n_objects):
        for f, g in product(C.into[a], repeat=2):
            found = _complete_cospan(C, f, g)
            if found is None:
                return PropertyReport("right_ore", False, (f, g))
            report.completions[(f, g)] = found
    return report


def _complete_cospan(C: FinCategory, f: int, g: int):
    b, c = C.src[f], C.src[g]
    for d in range(C.n_objects):
        for u in C.hom(d, b):
            fu = C.table[f][u]
            for v in C.hom(d, c):
                if C.table[g][v] == fu:
                    return (u, v)
    return None


def _complete_span(C: FinCategory, f: int, g: int):
    b, c = C.tgt[f], C.tgt[g]
    for d in range(C.n_objects):
        for f2 in C.hom(b, d):
            ff = C.table[f2][f]
            for g2 in C.hom(c, d):
                if C.table[g2][g] == ff:
                    return (f2, g2)
    return None


def check_amalgamation(C: FinCategory, cross_check: bool = True) -> PropertyReport:
    """Every span ``f: a -> b``, ``g: a -> c`` completes to ``f'∘f = g'∘g``."""
    report = PropertyReport("amalgamation", True)
    for a in range(C.n_objects):
        for f, g in product(C.out[a], repeat=2):
            found = _complete_span(C, f, g)
            if found is None:
                report = PropertyReport("amalgamation", False, (f, g))
                break
            report.completions[(f, g)] = found
        if not report.holds:
            break
    if cross_check:
        dual = check_right_ore(opposite(C))
        if dual.holds != report.holds:
            raise AssertionError(f"amalgamation/right Ore duality broken on {C.name}")
    return report


def check_joint_embedding(C: FinCategory) -> PropertyReport:
    report = PropertyReport("joint_embedding", True)
    for a, b in product(range(C.n_objects), repeat=2):
        found = None
        for c in range(C.n_objects):
            if C.hom(a, c) and C.hom(b, c):
                found = (c, C.hom(a, c)[0], C.hom(b, c)[0])
                break
        if found is None:
            return PropertyReport("joint_embedding", False, (a, b))
        report.completions[(a, b)] = found
    return report


def replay_report(C: FinCategory, report: PropertyReport) -> bool:
    """Re-verify a success witness by composing the recorded arrows."""
    for key, val in report.completions.items():
        if report.property == "right_ore":
            (f, g), (u, v) = key, val
            if C.table[f][u] < 0 or C.table[f][u] != C.table[g][v]:
                return False
        elif report.property == "amalgamation":
            (f, g), (f2, g2) = key, val
            if C.table[f2][f] < 0 or C.table[f2][f] != C.table[g2][g]:
                return False
        elif report.property == "joint_embedding":
            (a, b), (c, u, v) = key, val
            if (C.src[u], C.tgt[u], C.src[v], C.tgt[v]) != (a, c, b, c):
                return False
    return True


def is_cofiltered(C: FinCategory) -> tuple[bool, tuple | None]:
    """Nonempty, every pair of objects has a cone, every parallel pair is equalized."""
    if C.n_objects == 0:
        return False, ("empty",)
    for a, b in product(range(C.n_objects), repeat=2):
        if not any(C.hom(d, a) and C.hom(d, b) for d in range(C.n_objects)):
            return False, ("cone", a, b)
    for a, b in product(range(C.n_objects), repeat=2):
        for f, g in product(C.hom(a, b), repeat=2):
            if f == g:
                continue
            if not any(C.table[f][h] == C.table[g][h] for h in C.into[a]):
                return False, ("equalizer", f, g)
    return True, None
