"""Amalgamation classes of finite binary structures and their limits.

A structure is a carrier ``range(size)`` with one irreflexive binary relation.
Two built-in classes: ``linord`` (strict linear orders) and ``graph`` (simple
graphs, relation stored in both directions).  Embeddings are injective maps
that preserve and reflect the relation.

The limit is built as a chain ``M_0 ⊆ M_1 ⊆ ...`` where element ``i`` is the
one created at step ``i + 1``, so stage ``M_k`` is the substructure on
``range(k)``.  Each step discharges one-point extension tasks from a FIFO
queue.  A task is already *satisfied* when the chain holds a witness; the
witness pool is the whole current stage for linear orders and the elements
of earlier generations for graphs (see :attr:`AmalgamationClass.witness_policy`).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
from collections import deque
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .budget import Budget, default_budget
from .category import FinCategory, make_category


class ClassPropertyUnverified(RuntimeError):
    pass


class HorizonTooShort(RuntimeError):
    """The chain stops before a pending task could be discharged."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Structure:
    size: int
    rel: frozenset = frozenset()

    def has(self, i: int, j: int) -> bool:
        return (i, j) in self.rel

    def induced(self, elems: Sequence[int]) -> "Structure":
        pos = {e: k for k, e in enumerate(elems)}
        rel = frozenset((pos[i], pos[j]) for i, j in self.rel if i in pos and j in pos)
        return Structure(len(elems), rel)

    def relabel(self, perm: Sequence[int]) -> "Structure":
        return Structure(self.size, frozenset((perm[i], perm[j]) for i, j in self.rel))

    def canonical(self) -> "Structure":
        best = None
        for perm in itertools.permutations(range(self.size)):
            key = tuple(sorted((perm[i], perm[j]) for i, j in self.rel))
            if best is None or key < best:
                best = key
        return Structure(self.size, frozenset(best or ()))

    def as_dict(self) -> dict:
        return {"size": self.size, "rel": sorted(list(p) for p in self.rel)}


def _is_embedding(m: Sequence[int], a: Structure, b: Structure) -> bool:
    if len(m) != a.size or len(set(m)) != a.size or any(not 0 <= x < b.size for x in m):
        return False
    for i in range(a.size):
        for j in range(a.size):
            if i != j and a.has(i, j) != b.has(m[i], m[j]):
                return False
    return True


def _sha(obj) -> str:
    return hashlib.sha256(repr(obj).encode()).hexdigest()[:16]


class AmalgamationClass:
    """A hereditary class of finite structures with its embeddings.

    Subclasses define membership, may restrict embeddings, and choose how a
    new chain element relates to elements outside its task.
    """

    name = "abstract"
    default_n = 4
    task_bound = 3
    # "current": any element of the current stage may witness a task.
    # "generation": only elements of strictly earlier generations may.
    witness_policy = "current"
    max_size: int | None = None

    def member(self, S: Structure) -> bool:
        raise NotImplementedError

    def labelled(self, n: int) -> Iterator[Structure]:
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        for r in range(len(pairs) + 1):
            for chosen in itertools.combinations(pairs, r):
                S = Structure(n, frozenset(chosen))
                if self.member(S):
                    yield S

    def structures(self, n: int) -> list[Structure]:
        """Isomorphism-class representatives of size ≤ n, smallest first."""
        return _representatives(self, n)

    def is_embedding(self, m: Sequence[int], a: Structure, b: Structure) -> bool:
        return _is_embedding(m, a, b)

    def embeddings(self, a: Structure, b: Structure) -> list[tuple[int, ...]]:
        return [m for m in itertools.permutations(range(b.size), a.size)
                if self.is_embedding(m, a, b)]

    # amalgamation -----------------------------------------------------------

    def completions(self, size: int, forced: frozenset, free: list[tuple[int, int]]) -> Iterator[frozenset]:
        """Relations on ``range(size)`` extending ``forced`` over ``free`` pairs."""
        for r in range(len(free) + 1):
            for chosen in itertools.combinations(free, r):
                yield forced | frozenset(chosen)

    def amalgamate(self, a: Structure, b: Structure, c: Structure,
                   f: Sequence[int], g: Sequence[int]):
        """Canonically least cocone ``(d, u, v)`` with ``u∘f = v∘g``, or None.

        Smallest carrier first (most identifications), then the first
        completion in :meth:`completions` order.  ``u`` is always the
        inclusion of ``b`` as the first ``|b|`` points of ``d``.
        """
        b_only = [x for x in range(b.size) if x not in f]
        c_only = [y for y in range(c.size) if y not in g]
        back = {g[i]: f[i] for i in range(a.size)}
        for k in range(min(len(b_only), len(c_only)), -1, -1):
            for ys in itertools.combinations(c_only, k):
                for xs in itertools.permutations(b_only, k):
                    ident = dict(zip(ys, xs))
                    v, nxt = [], b.size
                    for y in range(c.size):
                        if y in back:
                            v.append(back[y])
                        elif y in ident:
                            v.append(ident[y])
                        else:
                            v.append(nxt)
                            nxt += 1
                    found = self._complete(b, c, v, nxt)
                    if found is not None:
                        u = tuple(range(b.size))
                        return found, u, tuple(v)
        return None

    def _complete(self, b: Structure, c: Structure, v: list[int], size: int):
        if self.max_size is not None and size > self.max_size:
            return None
        vimg = set(v)
        forced = set(b.rel)
        for i in range(c.size):
            for j in range(c.size):
                if i == j:
                    continue
                p, q = v[i], v[j]
                if p < b.size and q < b.size:
                    if b.has(p, q) != c.has(i, j):
                        return None
                elif c.has(i, j):
                    forced.add((p, q))
        free = [(p, q) for p in range(size) for q in range(size)
                if p != q and not ((p < b.size and q < b.size) or (p in vimg and q in vimg))]
        for rel in self.completions(size, frozenset(forced), free):
            d = Structure(size, rel)
            if (self.member(d) and self.is_embedding(tuple(range(b.size)), b, d)
                    and self.is_embedding(v, c, d)):
                return d
        return None

    # chain building ---------------------------------------------------------

    def one_point_patterns(self, a: Structure) -> list[frozenset]:
        """Relations of a new point ``a.size`` to ``a`` that keep the class."""
        cache = self.__dict__.setdefault("_patterns", {})
        if a not in cache:
            cache[a] = self._one_point_patterns(a)
        return cache[a]

    def _one_point_patterns(self, a: Structure) -> list[frozenset]:
        k = a.size
        pairs = [(i, k) for i in range(k)] + [(k, i) for i in range(k)]
        out = []
        for r in range(len(pairs) + 1):
            for chosen in itertools.combinations(pairs, r):
                pat = frozenset(chosen)
                if self.member(Structure(k + 1, a.rel | pat)):
                    out.append(pat)
        return out

    def place(self, rel: set, n: int, image: Sequence[int], pattern: frozenset,
              terms: Sequence[str], term: str) -> set:
        """Relation pairs linking a new element ``n`` to ``range(n)``."""
        raise NotImplementedError


@lru_cache(maxsize=None)
def _representatives_cached(cls_key, n: int):
    cls = _CLASS_CACHE[cls_key]
    out = []
    for k in range(n + 1):
        seen = set()
        for S in cls.labelled(k):
            key = S.canonical()
            if key not in seen:
                seen.add(key)
                out.append(key)
    out.sort(key=lambda S: (S.size, sorted(S.rel)))
    return tuple(out)


_CLASS_CACHE: dict = {}


def _representatives(cls: AmalgamationClass, n: int) -> list[Structure]:
    key = (type(cls).__name__, cls.name, cls.max_size)
    _CLASS_CACHE[key] = cls
    return list(_representatives_cached(key, n))


def _linear_order(size: int, order: Sequence[int]) -> frozenset:
    return frozenset((order[i], order[j]) for i in range(size) for j in range(i + 1, size))


class LinearOrders(AmalgamationClass):
    name = "linord"
    default_n = 6

    def member(self, S: Structure) -> bool:
        n = S.size
        for i in range(n):
            if S.has(i, i):
                return False
            for j in range(i + 1, n):
                if S.has(i, j) == S.has(j, i):
                    return False
        # a tournament is transitive iff its out-degrees are all distinct
        outdeg = [sum(S.has(i, j) for j in range(n)) for i in range(n)]
        return len(set(outdeg)) == n and (self.max_size is None or n <= self.max_size)

    def labelled(self, n: int) -> Iterator[Structure]:
        if self.max_size is not None and n > self.max_size:
            return
        for order in itertools.permutations(range(n)):
            yield Structure(n, _linear_order(n, order))

    def structures(self, n: int) -> list[Structure]:
        top = n if self.max_size is None else min(n, self.max_size)
        return [Structure(k, _linear_order(k, range(k))) for k in range(top + 1)]

    def completions(self, size, forced, free):
        # linear extensions of the forced relation, lexicographic in element ids
        preds = {x: {p for p, q in forced if q == x} for x in range(size)}

        def extend(order, remaining):
            if not remaining:
                yield _linear_order(size, order)
                return
            for x in sorted(remaining):
                if preds[x] <= set(order):
                    yield from extend(order + [x], remaining - {x})

        yield from extend([], frozenset(range(size)))

    def place(self, rel, n, image, pattern, terms, term):
        k = len(image)
        below = [image[i] for i in range(k) if (i, k) in pattern]
        above = [image[i] for i in range(k) if (k, i) in pattern]
        if below:
            # immediately after the largest element the task puts below
            pred = max(below, key=lambda x: sum((w, x) in rel for w in range(n)))
            low = {w for w in range(n) if w == pred or (w, pred) in rel}
        elif above:
            succ = min(above, key=lambda x: sum((w, x) in rel for w in range(n)))
            low = {w for w in range(n) if w != succ and (w, succ) in rel}
        else:
            low = set(range(n))
        return {(w, n) for w in low} | {(n, w) for w in range(n) if w not in low}


class InitialSegmentOrders(LinearOrders):
    """Linear orders where embeddings must land on an initial segment."""

    name = "linord-initial"

    def is_embedding(self, m, a, b):
        if not _is_embedding(m, a, b):
            return False
        rank = lambda x, S: sum(S.has(w, x) for w in range(S.size))
        return sorted(rank(x, b) for x in m) == list(range(a.size))


class Graphs(AmalgamationClass):
    name = "graph"
    default_n = 4
    witness_policy = "generation"

    def member(self, S: Structure) -> bool:
        if self.max_size is not None and S.size > self.max_size:
            return False
        return all(i != j and (j, i) in S.rel for i, j in S.rel)

    def labelled(self, n: int) -> Iterator[Structure]:
        if self.max_size is not None and n > self.max_size:
            return
        pairs = list(itertools.combinations(range(n), 2))
        for r in range(len(pairs) + 1):
            for chosen in itertools.combinations(pairs, r):
                yield Structure(n, frozenset(chosen) | frozenset((j, i) for i, j in chosen))

    def completions(self, size, forced, free):
        und = sorted({(min(p, q), max(p, q)) for p, q in free})
        for r in range(len(und) + 1):
            for chosen in itertools.combinations(und, r):
                yield forced | frozenset(chosen) | frozenset((j, i) for i, j in chosen)

    def place(self, rel, n, image, pattern, terms, term):
        k = len(image)
        out = set()
        for w in range(n):
            if w in image:
                edge = (image.index(w), k) in pattern
            else:
                # adjacency outside the task is a fixed function of the two
                # element terms, so it does not depend on construction order
                lo, hi = sorted((term, terms[w]))
                edge = int(_sha((lo, hi)), 16) & 1 == 1
            if edge:
                out |= {(w, n), (n, w)}
        return out


class Bounded(AmalgamationClass):
    """Members of ``base`` with at most ``max_size`` points."""

    def __init__(self, base: AmalgamationClass, max_size: int):
        self.base = base
        self.max_size = max_size
        self.name = f"{base.name}<={max_size}"
        self.default_n = max_size + 1
        self.witness_policy = base.witness_policy

    def member(self, S):
        return S.size <= self.max_size and self.base.member(S)

    def labelled(self, n):
        return iter(()) if n > self.max_size else self.base.labelled(n)

    def is_embedding(self, m, a, b):
        return self.base.is_embedding(m, a, b)

    def completions(self, size, forced, free):
        return self.base.completions(size, forced, free)

    def place(self, *args):
        return self.base.place(*args)


CLASSES = {"linord": LinearOrders, "graph": Graphs, "linord-initial": InitialSegmentOrders}


def get_class(name: str) -> AmalgamationClass:
    if name.startswith("linord<="):
        return Bounded(LinearOrders(), int(name.split("<=")[1]))
    if name.startswith("graph<="):
        return Bounded(Graphs(), int(name.split("<=")[1]))
    try:
        return CLASSES[name]()
    except KeyError:
        raise ValueError(f"unknown structure class {name!r}") from None


# class properties -------------------------------------------------------------


@dataclass
class ClassReport:
    class_name: str
    n: int
    amalgamation: bool
    joint_embedding: bool
    spans_checked: int = 0
    pairs_checked: int = 0
    ap_witness: dict | None = None
    jep_witness: dict | None = None

    @property
    def ok(self) -> bool:
        return self.amalgamation and self.joint_embedding

    def as_dict(self) -> dict:
        return asdict(self)


def verify_class_properties(cls: AmalgamationClass, n: int | None = None,
                            budget: Budget | None = None) -> ClassReport:
    """Exhaustive AP and JEP over representatives of size ≤ n.

    Every amalgam returned is re-checked: ``d`` is a member, both legs are
    embeddings and the square commutes.
    """
    n = cls.default_n if n is None else n
    (budget or default_budget()).check("max_structure_size", n)
    reps = cls.structures(n)
    report = ClassReport(cls.name, n, True, True)
    for a in reps:
        for b in reps:
            if b.size < a.size:
                continue
            fs = cls.embeddings(a, b)
            for c in reps:
                if c.size < a.size:
                    continue
                for f in fs:
                    for g in cls.embeddings(a, c):
                        report.spans_checked += 1
                        got = cls.amalgamate(a, b, c, f, g)
                        if got is None or not _cocone_ok(cls, got, b, c, f, g):
                            report.amalgamation = False
                            report.ap_witness = {"a": a.as_dict(), "b": b.as_dict(), "c": c.as_dict(),
                                                 "f": list(f), "g": list(g)}
                            break
                    if not report.amalgamation:
                        break
                if not report.amalgamation:
                    break
            if not report.amalgamation:
                break
        if not report.amalgamation:
            break
    empty = Structure(0)
    for b in reps:
        for c in reps:
            report.pairs_checked += 1
            got = cls.amalgamate(empty, b, c, (), ()) if cls.member(empty) else None
            if got is None or not _cocone_ok(cls, got, b, c, (), ()):
                report.joint_embedding = False
                report.jep_witness = {"b": b.as_dict(), "c": c.as_dict()}
                break
        if not report.joint_embedding:
            break
    return report


def _cocone_ok(cls, got, b, c, f, g) -> bool:
    d, u, v = got
    return (cls.member(d) and cls.is_embedding(u, b, d) and cls.is_embedding(v, c, d)
            and all(u[f[i]] == v[g[i]] for i in range(len(f))))


_VERIFIED: dict[str, ClassReport] = {}


def _require_verified(cls: AmalgamationClass) -> None:
    if cls.name not in _VERIFIED:
        _VERIFIED[cls.name] = verify_class_properties(cls)
    rep = _VERIFIED[cls.name]
    if not rep.ok:
        raise ClassPropertyUnverified(f"{cls.name}: AP={rep.amalgamation} JEP={rep.joint_embedding}")


# limit chains -----------------------------------------------------------------


@dataclass
class TaskRecord:
    step: int
    image: list[int]
    pattern: list[list[int]]
    witness: int
    created: bool


@dataclass
class LimitChain:
    class_name: str
    seed: int
    steps_requested: int
    size: int
    rel: list[list[int]]
    generations: list[int]
    terms: list[str]
    task_log: list[TaskRecord] = field(default_factory=list)
    pending: int = 0
    scheduler: str = "fifo"

    @property
    def exhausted(self) -> bool:
        """No task is left: the last stage already satisfies every task."""
        return self.pending == 0

    @property
    def length(self) -> int:
        return self.size

    def structure(self) -> Structure:
        return Structure(self.size, frozenset(tuple(p) for p in self.rel))

    def stage(self, k: int) -> Structure:
        return self.structure().induced(range(min(k, self.size)))

    def inclusion(self, k: int) -> tuple[int, ...]:
        return tuple(range(min(k, self.size)))

    def to_json(self) -> str:
        data = asdict(self)
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LimitChain":
        data = json.loads(text)
        data["task_log"] = [TaskRecord(**t) for t in data["task_log"]]
        return cls(**data)


@dataclass
class _Task:
    image: tuple[int, ...]
    pattern: frozenset
    generation: int


def _witness(rel: set, gens: list[int], n: int, task: _Task, policy: str) -> int | None:
    k = len(task.image)
    for z in range(n):
        if z in task.image or (policy == "generation" and gens[z] >= task.generation):
            continue
        if all(((x, z) in rel) == ((i, k) in task.pattern) and ((z, x) in rel) == ((k, i) in task.pattern)
               for i, x in enumerate(task.image)):
            return z
    return None


def build_limit(cls: AmalgamationClass, steps: int, seed: int, bound: int | None = None,
                scheduler: str = "fifo", verify: bool = True) -> LimitChain:
    """Grow a chain for ``steps`` steps (fewer if every task is satisfied).

    Tasks are one-point extensions ``a ⊂ a + {new}`` with ``|a| < bound``
    of subsets ``a`` of the chain; they are discovered when the last element
    of ``a`` appears, enumerated canonically and then shuffled by ``seed``.
    ``scheduler="lifo"`` always takes the newest task; it is unfair and only
    exists to exercise :class:`HorizonTooShort`.
    """
    if verify:
        _require_verified(cls)
    bound = cls.task_bound if bound is None else bound
    rng = random.Random(seed)
    rel: set = set()
    gens: list[int] = []
    terms: list[str] = []
    log: list[TaskRecord] = []
    queue: deque[_Task] = deque(_Task((), p, 0) for p in cls.one_point_patterns(Structure(0)))
    n = 0
    while n < steps and queue:
        task = queue.popleft() if scheduler == "fifo" else queue.pop()
        pattern = [list(p) for p in sorted(task.pattern)]
        z = _witness(rel, gens, n, task, cls.witness_policy)
        if z is not None:
            log.append(TaskRecord(n, list(task.image), pattern, z, False))
            continue
        term = _sha(tuple(sorted((terms[x], (i, len(task.image)) in task.pattern,
                                  (len(task.image), i) in task.pattern)
                                 for i, x in enumerate(task.image))))
        rel |= cls.place(rel, n, task.image, task.pattern, terms, term)
        gens.append(task.generation)
        terms.append(term)
        log.append(TaskRecord(n + 1, list(task.image), pattern, n, True))
        queue.extend(_discover(cls, rel, gens, n, bound, rng))
        n += 1
    return LimitChain(cls.name, seed, steps, n, sorted([list(p) for p in rel]), gens, terms,
                      log, len(queue), scheduler)


def _discover(cls, rel, gens, z, bound, rng) -> list[_Task]:
    found = []
    M = Structure(z + 1, frozenset(rel))
    for r in range(bound):
        for rest in itertools.combinations(range(z), r - 1) if r else ():
            image = tuple(sorted(rest + (z,)))
            a = M.induced(image)
            gen = 1 + max(gens[x] for x in image)
            for pat in cls.one_point_patterns(a):
                found.append(_Task(image, pat, gen))
    rng.shuffle(found)
    return found


# extension check --------------------------------------------------------------


@dataclass
class ExtensionReport:
    depth: int
    size: int
    passed: bool
    checked: int = 0
    failures: list[dict] = field(default_factory=list)
    horizon: bool = False
    one_point: bool = True

    def as_dict(self) -> dict:
        return asdict(self)


def _extensions(cls: AmalgamationClass, a: Structure, size: int, one_point: bool) -> Iterator[Structure]:
    """Members ``b`` on ``a.size + m`` points, 1 ≤ m, restricting to ``a``."""
    k = a.size
    top = min(size, k + 1) if one_point else size
    for total in range(k + 1, top + 1):
        pairs = [(i, j) for i in range(total) for j in range(total)
                 if i != j and (i >= k or j >= k)]
        for rel in cls.completions(total, a.rel, pairs):
            b = Structure(total, rel)
            if cls.member(b):
                yield b


def _find_extension(M: Structure, image: Sequence[int], b: Structure, limit: int) -> tuple[int, ...] | None:
    k = len(image)
    assign = list(image)
    used = set(image)

    def ok(p: int, x: int) -> bool:
        return all(M.has(assign[q], x) == b.has(q, p) and M.has(x, assign[q]) == b.has(p, q)
                   for q in range(p))

    def rec(p: int):
        if p == b.size:
            return tuple(assign)
        for x in range(limit):
            if x in used or not ok(p, x):
                continue
            assign.append(x)
            used.add(x)
            got = rec(p + 1)
            if got:
                return got
            assign.pop()
            used.discard(x)
        return None

    return rec(k)


def check_limit_extension(chain: LimitChain, depth: int, size: int,
                          cls: AmalgamationClass | None = None, one_point: bool = True) -> ExtensionReport:
    """Every ``a ↪ b`` with ``|b| ≤ size`` and ``a ⊆ M_depth`` extends in the chain.

    By default only one-point extensions (``|b| = |a| + 1``) are checked;
    they generate the rest in the limit, and they are what the chain's
    tasks discharge.  ``one_point=False`` checks every ``b``, which a
    finite FIFO chain usually satisfies only at shallow depth.

    Raises :class:`HorizonTooShort` when something fails but tasks are
    still pending, i.e. a longer chain might discharge them.
    """
    cls = cls or get_class(chain.class_name)
    report = ExtensionReport(depth, size, True, one_point=one_point)
    if size <= 0:
        return report
    if depth > chain.size and not chain.exhausted:
        report.passed, report.horizon = False, True
        raise HorizonTooShort(f"chain has {chain.size} stages, depth {depth} requested", report)
    M = chain.structure()
    d = min(depth, chain.size)
    for r in range(size):
        for image in itertools.combinations(range(d), r):
            a = M.induced(image)
            for b in _extensions(cls, a, size, one_point):
                report.checked += 1
                if _find_extension(M, image, b, M.size) is None:
                    report.passed = False
                    report.failures.append({"image": list(image), "b": b.as_dict()})
    if not report.passed and not chain.exhausted:
        report.horizon = True
        raise HorizonTooShort(f"{len(report.failures)} extension tasks undischarged "
                              f"after {chain.size} steps", report)
    return report


# back and forth ---------------------------------------------------------------


@dataclass
class BackAndForthResult:
    found: bool
    k: int
    mapping: dict[int, int] = field(default_factory=dict)
    nodes: int = 0
    stuck: dict | None = None

    def as_dict(self) -> dict:
        return {"found": self.found, "k": self.k, "nodes": self.nodes,
                "mapping": [[x, y] for x, y in sorted(self.mapping.items())], "stuck": self.stuck}


def back_and_forth(L1: LimitChain, L2: LimitChain, k: int, node_limit: int = 200000) -> BackAndForthResult:
    """Partial isomorphism whose domain holds the first ``k`` elements of ``L1``
    and whose range holds the first ``k`` of ``L2``.

    Alternates forward and backward steps, trying candidates in construction
    order (the same index first) and backtracking on dead ends.
    """
    if L1.class_name != L2.class_name:
        raise ValueError("chains come from different classes")
    if min(L1.size, L2.size) < k:
        raise HorizonTooShort(f"need {k} elements, chains have {L1.size} and {L2.size}")
    A, B = L1.structure(), L2.structure()
    fwd: dict[int, int] = {}
    bwd: dict[int, int] = {}
    agenda = [(side, i) for i in range(k) for side in ("forth", "back")]
    nodes = [0]
    deepest = [(-1, None)]

    def consistent(x: int, y: int) -> bool:
        return all(A.has(x, u) == B.has(y, v) and A.has(u, x) == B.has(v, y) for u, v in fwd.items())

    def candidates(i: int, n: int) -> list[int]:
        return [i] + [j for j in range(n) if j != i] if i < n else list(range(n))

    def rec(t: int) -> bool:
        nodes[0] += 1
        if nodes[0] > node_limit:
            raise TimeoutError
        if t == len(agenda):
            return True
        side, i = agenda[t]
        if (side == "forth" and i in fwd) or (side == "back" and i in bwd):
            return rec(t + 1)
        if t > deepest[0][0]:
            deepest[0] = (t, {"side": side, "element": i,
                              "partial": [[x, y] for x, y in sorted(fwd.items())]})
        if side == "forth":
            for y in candidates(i, B.size):
                if y not in bwd and consistent(i, y):
                    fwd[i], bwd[y] = y, i
                    if rec(t + 1):
                        return True
                    del fwd[i], bwd[y]
        else:
            for x in candidates(i, A.size):
                if x not in fwd and consistent(x, i):
                    fwd[x], bwd[i] = i, x
                    if rec(t + 1):
                        return True
                    del fwd[x], bwd[i]
        return False

    try:
        ok = rec(0)
    except TimeoutError:
        ok = False
    if ok:
        return BackAndForthResult(True, k, dict(fwd), nodes[0])
    return BackAndForthResult(False, k, {}, nodes[0], deepest[0][1])


# bridge to sites --------------------------------------------------------------


def truncated_category(cls: AmalgamationClass, n: int, budget: Budget | None = None) -> FinCategory:
    """Representatives of size ≤ n with all class embeddings between them."""
    reps = cls.structures(n)
    names = [f"s{i}" for i in range(len(reps))]
    arrows: list[tuple[str, int, int]] = []
    maps: list[tuple[int, ...]] = []
    identities = []
    for i, a in enumerate(reps):
        for j, b in enumerate(reps):
            for m in cls.embeddings(a, b):
                if i == j and m == tuple(range(a.size)):
                    identities.append(len(arrows))
                    label = f"id_{names[i]}"
                else:
                    label = f"{names[i]}>{names[j]}[{''.join(map(str, m))}]"
                arrows.append((label, i, j))
                maps.append(m)
    key = {(arrows[k][1], arrows[k][2], maps[k]): k for k in range(len(arrows))}

    def compose(g: int, f: int) -> int:
        m = tuple(maps[g][x] for x in maps[f])
        return key[(arrows[f][1], arrows[g][2], m)]

    return make_category(f"{cls.name}[<={n}]", names, arrows, identities, compose, budget)
