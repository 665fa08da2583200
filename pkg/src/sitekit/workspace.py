"""The workspace file format.

Line oriented, ``#`` starts a comment.  Blocks::

    category C
      objects: a b
      arrow f : a -> b
      compose g f = h          # g∘f = h; identities id_a are implicit
    end
    topology T on C
      cover b : { f }          # generators, closed to a sieve
      kind: atomic             # or trivial / dense
    end
    site S = ( C , T )
    functor F : C -> finset
      on a = { x y }
      on f : x -> u, y -> u
    end
    presheaf P on C            # actions run against the arrows
      on b = { u }
      on f : u -> x
    end

All top-level names share one namespace.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property

from .budget import Budget
from .category import CategoryError, CategorySpec, FinCategory, build_category, identity_name
from .functors import Presheaf, SetValuedFunctor, presheaf_from_tables, functor_from_tables
from .sieves import close_to_sieve
from .topologies import GrothendieckTopology, canonical_topology, generate_topology

KINDS = ("trivial", "atomic", "dense")


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class UnresolvedReference(ParseError):
    pass


class DuplicateName(ParseError):
    pass


@dataclass
class TopologyDecl:
    name: str
    category: str
    covers: list[tuple[str, list[str]]] = field(default_factory=list)
    kind: str | None = None
    positions: dict = field(default_factory=dict, compare=False)


@dataclass
class SiteDecl:
    name: str
    category: str
    topology: str


@dataclass
class FinSetDecl:
    """A functor (``covariant=True``) or a presheaf, as written."""

    name: str
    category: str
    covariant: bool
    sets: dict[str, list[str]] = field(default_factory=dict)
    actions: dict[str, list[tuple[str, str]]] = field(default_factory=dict)
    positions: dict = field(default_factory=dict, compare=False)


@dataclass
class Workspace:
    categories: dict[str, CategorySpec] = field(default_factory=dict)
    topologies: dict[str, TopologyDecl] = field(default_factory=dict)
    sites: dict[str, SiteDecl] = field(default_factory=dict)
    functors: dict[str, FinSetDecl] = field(default_factory=dict)
    presheaves: dict[str, FinSetDecl] = field(default_factory=dict)
    positions: dict = field(default_factory=dict, compare=False)
    budget: Budget | None = field(default=None, compare=False)

    def abstract(self) -> dict:
        """Position-free content, used for round-trip comparisons."""
        return {
            "categories": {k: (v.objects, v.arrows, v.equations) for k, v in self.categories.items()},
            "topologies": {k: (v.category, v.covers, v.kind) for k, v in self.topologies.items()},
            "sites": {k: (v.category, v.topology) for k, v in self.sites.items()},
            "functors": {k: (v.category, v.sets, v.actions) for k, v in self.functors.items()},
            "presheaves": {k: (v.category, v.sets, v.actions) for k, v in self.presheaves.items()},
        }

    def counts(self) -> dict[str, int]:
        return {k: len(getattr(self, k)) for k in ("categories", "topologies", "sites", "functors", "presheaves")}

    def _where(self, name: str) -> tuple[int, int]:
        return self.positions.get(name, (0, 0))

    def _lookup(self, table: str, name: str):
        items = getattr(self, table)
        if name not in items:
            kind = {"categories": "category", "topologies": "topology", "presheaves": "presheaf"}.get(table, table[:-1])
            raise UnresolvedReference(f"no {kind} named {name!r}")
        return items[name]

    # building ---------------------------------------------------------------

    @cached_property
    def _built(self) -> dict:
        return {}

    def category(self, name: str) -> FinCategory:
        key = ("category", name)
        if key not in self._built:
            spec = self._lookup("categories", name)
            try:
                self._built[key] = build_category(spec, self.budget)
            except CategoryError as e:
                line, col = e.position or self._where(name)
                raise ParseError(str(e.args[0]), line, col) from e
        return self._built[key]

    def topology(self, name: str) -> GrothendieckTopology:
        key = ("topology", name)
        if key not in self._built:
            decl = self._lookup("topologies", name)
            C = self.category(decl.category)
            seeds = []
            if decl.kind:
                base = canonical_topology(C, decl.kind)
                seeds = [s for c in range(C.n_objects) for s in base.covers(c)]
            for i, (obj, arrows) in enumerate(decl.covers):
                line, col = decl.positions.get(("cover", i), self._where(name))
                c = C.object_id(obj)
                gens = [C.arrow_id(a) for a in arrows]
                bad = [a for a, f in zip(arrows, gens) if C.tgt[f] != c]
                if bad:
                    raise ParseError(f"arrows {bad} do not have codomain {obj}", line, col)
                seeds.append(close_to_sieve(C, c, gens))
            self._built[key] = generate_topology(C, seeds, self.budget, name)
        return self._built[key]

    def site(self, name: str) -> GrothendieckTopology:
        decl = self._lookup("sites", name)
        return self.topology(decl.topology)

    def _finset(self, table: str, name: str):
        key = (table, name)
        if key not in self._built:
            decl = self._lookup(table, name)
            C = self.category(decl.category)
            acts = {f: dict(pairs) for f, pairs in decl.actions.items()}
            build = functor_from_tables if decl.covariant else presheaf_from_tables
            try:
                self._built[key] = build(C, decl.sets, acts, name)
            except ValueError as e:
                line, col = self._where(name)
                raise ParseError(str(e), line, col) from e
        return self._built[key]

    def functor(self, name: str) -> SetValuedFunctor:
        return self._finset("functors", name)

    def presheaf(self, name: str) -> Presheaf:
        return self._finset("presheaves", name)


# ---------------------------------------------------------------------------
# parsing

_NAME = r"[A-Za-z_*][A-Za-z0-9_'.*]*"
_RE = {
    "category": re.compile(rf"category\s+({_NAME})\s*$"),
    "topology": re.compile(rf"topology\s+({_NAME})\s+on\s+({_NAME})\s*$"),
    "site": re.compile(rf"site\s+({_NAME})\s*=\s*\(\s*({_NAME})\s*,\s*({_NAME})\s*\)\s*$"),
    "functor": re.compile(rf"functor\s+({_NAME})\s*:\s*({_NAME})\s*->\s*finset\s*$"),
    "presheaf": re.compile(rf"presheaf\s+({_NAME})\s+on\s+({_NAME})\s*$"),
    "objects": re.compile(r"objects\s*:(.*)$"),
    "arrow": re.compile(rf"arrow\s+({_NAME})\s*:\s*({_NAME})\s*->\s*({_NAME})\s*$"),
    "compose": re.compile(rf"compose\s+({_NAME})\s+({_NAME})\s*=\s*({_NAME})\s*$"),
    "cover": re.compile(rf"cover\s+({_NAME})\s*:\s*\{{([^}}]*)\}}\s*$"),
    "kind": re.compile(r"kind\s*:\s*(\S+)\s*$"),
    "on_set": re.compile(rf"on\s+({_NAME})\s*=\s*\{{([^}}]*)\}}\s*$"),
    "on_arrow": re.compile(rf"on\s+({_NAME})\s*:(.*)$"),
}


def _names(text: str) -> list[str]:
    return [t for t in re.split(r"[\s,]+", text.strip()) if t]


class _Parser:
    def __init__(self, text: str):
        self.ws = Workspace()
        self.lines = text.splitlines()
        self.block = None
        self.block_start = (0, 0)

    def run(self) -> Workspace:
        for no, raw in enumerate(self.lines, 1):
            body = raw.split("#", 1)[0].rstrip()
            if not body.strip():
                continue
            col = len(body) - len(body.lstrip()) + 1
            self.line(body.strip(), no, col)
        if self.block is not None:
            raise ParseError(f"block {self.block[1].name!r} is not closed with 'end'", *self.block_start)
        self.resolve()
        return self.ws

    def fail(self, message, no, col, cls=ParseError):
        raise cls(message, no, col)

    def declare(self, name, no, col):
        if name in self.ws.positions:
            line, _ = self.ws.positions[name]
            self.fail(f"{name!r} is already declared on line {line}", no, col, DuplicateName)
        self.ws.positions[name] = (no, col)

    def line(self, s: str, no: int, col: int):
        if self.block is None:
            return self.top(s, no, col)
        if s == "end":
            self.block = None
            return
        kind, decl = self.block
        getattr(self, f"in_{kind}")(decl, s, no, col)

    def top(self, s, no, col):
        for kind in ("category", "topology", "site", "functor", "presheaf"):
            m = _RE[kind].match(s)
            if not m:
                continue
            name = m.group(1)
            self.declare(name, no, col + s.index(name, len(kind)))
            if kind == "category":
                decl = CategorySpec(name=name)
                decl.positions[("header",)] = (no, col)
                self.ws.categories[name] = decl
            elif kind == "topology":
                decl = TopologyDecl(name, m.group(2), positions={("header",): (no, col)})
                self.ws.topologies[name] = decl
            elif kind == "site":
                self.ws.sites[name] = SiteDecl(name, m.group(2), m.group(3))
                return
            else:
                decl = FinSetDecl(name, m.group(2), kind == "functor", positions={("header",): (no, col)})
                (self.ws.functors if kind == "functor" else self.ws.presheaves)[name] = decl
            self.block = (kind, decl)
            self.block_start = (no, col)
            return
        word = s.split()[0]
        if word in ("category", "topology", "site", "functor", "presheaf"):
            self.fail(f"malformed {word} header", no, col)
        self.fail(f"expected a block header, found {word!r}", no, col)

    def in_category(self, spec: CategorySpec, s, no, col):
        if m := _RE["objects"].match(s):
            for t in re.finditer(r"[^\s,]+", m.group(1)):
                o, at = t.group(), col + m.start(1) + t.start()
                key = ("object", o)
                if key in spec.positions or ("arrow", identity_name(o)) in spec.positions:
                    self.fail(f"object {o!r} declared twice", no, at, DuplicateName)
                spec.objects.append(o)
                spec.positions[key] = (no, at)
        elif m := _RE["arrow"].match(s):
            name, a, b = m.groups()
            if ("arrow", name) in spec.positions or name in map(identity_name, spec.objects):
                self.fail(f"arrow {name!r} declared twice", no, col + s.index(name), DuplicateName)
            spec.arrows.append((name, a, b))
            spec.positions[("arrow", name)] = (no, col + m.start(1))
            spec.positions[("arrow-ends", name)] = [(a, no, col + m.start(2)), (b, no, col + m.start(3))]
        elif m := _RE["compose"].match(s):
            g, f, h = m.groups()
            spec.equations.append((g, f, h))
            spec.positions[("compose", g, f)] = (no, col)
            spec.positions[("compose-args", g, f)] = [(x, no, col + _find_word(s, x, k))
                                                      for k, x in enumerate((g, f, h))]
        else:
            self.fail(f"cannot read {s!r} inside category {spec.name}", no, col)

    def in_topology(self, decl: TopologyDecl, s, no, col):
        if m := _RE["cover"].match(s):
            decl.positions[("cover", len(decl.covers))] = (no, col)
            decl.positions[("cover-args", len(decl.covers))] = [(m.group(1), no, col + s.index(m.group(1), 5))] + \
                [(a, no, col + s.index("{") + 1 + m.group(2).index(a)) for a in _names(m.group(2))]
            decl.covers.append((m.group(1), _names(m.group(2))))
        elif m := _RE["kind"].match(s):
            if m.group(1) not in KINDS:
                self.fail(f"unknown topology kind {m.group(1)!r} (expected one of {', '.join(KINDS)})",
                          no, col + s.index(m.group(1)))
            if decl.kind is not None:
                self.fail("kind given twice", no, col)
            decl.kind = m.group(1)
        else:
            self.fail(f"cannot read {s!r} inside topology {decl.name}", no, col)

    def in_functor(self, decl: FinSetDecl, s, no, col):
        if m := _RE["on_set"].match(s):
            obj = m.group(1)
            if obj in decl.sets:
                self.fail(f"set for {obj!r} given twice", no, col, DuplicateName)
            elems = _names(m.group(2))
            if len(set(elems)) != len(elems):
                self.fail(f"repeated element in the set for {obj!r}", no, col, DuplicateName)
            decl.sets[obj] = elems
            decl.positions[("set", obj)] = (no, col + s.index(obj, 2))
        elif m := _RE["on_arrow"].match(s):
            f = m.group(1)
            if f in decl.actions:
                self.fail(f"action of {f!r} given twice", no, col, DuplicateName)
            pairs = []
            for item in [t for t in m.group(2).split(",") if t.strip()]:
                parts = [p.strip() for p in item.split("->")]
                if len(parts) != 2 or not all(parts):
                    self.fail(f"expected 'x -> y', found {item.strip()!r}", no, col + s.index(item.strip()))
                pairs.append((parts[0], parts[1]))
            decl.actions[f] = pairs
            decl.positions[("action", f)] = (no, col + s.index(f, 2))
        else:
            self.fail(f"cannot read {s!r} inside {decl.name}", no, col)

    in_presheaf = in_functor

    # references -------------------------------------------------------------

    def resolve(self):
        ws = self.ws
        for spec in ws.categories.values():
            known = set(spec.objects)
            arrows = {identity_name(o): (o, o) for o in spec.objects}
            for name, a, b in spec.arrows:
                for end, no, col in spec.positions[("arrow-ends", name)]:
                    if end not in known:
                        self.fail(f"undeclared object {end!r} in arrow {name}", no, col, UnresolvedReference)
                arrows[name] = (a, b)
            for g, f, h in spec.equations:
                for x, no, col in spec.positions[("compose-args", g, f)]:
                    if x not in arrows:
                        self.fail(f"undeclared arrow {x!r} in compose", no, col, UnresolvedReference)
        for decl in ws.topologies.values():
            self.need_category(decl.category, decl.positions[("header",)])
            spec = ws.categories[decl.category]
            arrows = {a[0] for a in spec.arrows} | {identity_name(o) for o in spec.objects}
            for i, _ in enumerate(decl.covers):
                (obj, no, col), *rest = decl.positions[("cover-args", i)]
                if obj not in spec.objects:
                    self.fail(f"undeclared object {obj!r} in cover", no, col, UnresolvedReference)
                for a, no, col in rest:
                    if a not in arrows:
                        self.fail(f"undeclared arrow {a!r} in cover", no, col, UnresolvedReference)
        for decl in ws.sites.values():
            pos = ws.positions[decl.name]
            self.need_category(decl.category, pos)
            if decl.topology not in ws.topologies:
                self.fail(f"no topology named {decl.topology!r}", *pos, UnresolvedReference)
            if ws.topologies[decl.topology].category != decl.category:
                self.fail(f"topology {decl.topology} is not on category {decl.category}", *pos)
        for decl in list(ws.functors.values()) + list(ws.presheaves.values()):
            self.need_category(decl.category, decl.positions[("header",)])
            spec = ws.categories[decl.category]
            ends = {a[0]: (a[1], a[2]) for a in spec.arrows}
            for obj in decl.sets:
                if obj not in spec.objects:
                    self.fail(f"undeclared object {obj!r}", *decl.positions[("set", obj)], UnresolvedReference)
            for f, pairs in decl.actions.items():
                pos = decl.positions[("action", f)]
                if f not in ends:
                    self.fail(f"undeclared arrow {f!r}", *pos, UnresolvedReference)
                a, b = ends[f] if decl.covariant else ends[f][::-1]
                for x, y in pairs:
                    if x not in decl.sets.get(a, ()):
                        self.fail(f"{x!r} is not an element at {a}", *pos, UnresolvedReference)
                    if y not in decl.sets.get(b, ()):
                        self.fail(f"{y!r} is not an element at {b}", *pos, UnresolvedReference)

    def need_category(self, name, pos):
        if name not in self.ws.categories:
            self.fail(f"no category named {name!r}", *pos, UnresolvedReference)


def _find_word(s: str, word: str, nth: int) -> int:
    """Column offset of the ``nth`` name on a compose line."""
    starts = [m.start() for m in re.finditer(_NAME, s)][1:]
    return starts[nth] if nth < len(starts) else 0


def parse_workspace(text: str, budget: Budget | None = None) -> Workspace:
    ws = _Parser(text).run()
    ws.budget = budget
    return ws


# ---------------------------------------------------------------------------
# serialization


def serialize_workspace(ws: Workspace) -> str:
    out: list[str] = []
    for spec in ws.categories.values():
        out.append(f"category {spec.name}")
        if spec.objects:
            out.append("  objects: " + " ".join(spec.objects))
        for name, a, b in spec.arrows:
            out.append(f"  arrow {name} : {a} -> {b}")
        for g, f, h in spec.equations:
            out.append(f"  compose {g} {f} = {h}")
        out += ["end", ""]
    for t in ws.topologies.values():
        out.append(f"topology {t.name} on {t.category}")
        for obj, arrows in t.covers:
            out.append(f"  cover {obj} : {{ {' '.join(arrows)} }}")
        if t.kind:
            out.append(f"  kind: {t.kind}")
        out += ["end", ""]
    for s in ws.sites.values():
        out += [f"site {s.name} = ( {s.category} , {s.topology} )", ""]
    for d in list(ws.functors.values()) + list(ws.presheaves.values()):
        head = f"functor {d.name} : {d.category} -> finset" if d.covariant else f"presheaf {d.name} on {d.category}"
        out.append(head)
        for obj, elems in d.sets.items():
            out.append(f"  on {obj} = {{ {' '.join(elems)} }}")
        for f, pairs in d.actions.items():
            out.append(f"  on {f} : " + ", ".join(f"{x} -> {y}" for x, y in pairs))
        out += ["end", ""]
    return "\n".join(out)
