from importlib import resources

import pytest
from hypothesis import given, strategies as st

from sitekit.budget import Budget, SizeGuard, default_budget, parse_budget
from sitekit.category import check_right_ore
from sitekit.sheaves import check_sheaf
from sitekit.topologies import canonical_topology, validate_topology
from sitekit.workspace import (DuplicateName, ParseError, UnresolvedReference, parse_workspace,
                               serialize_workspace)


def bundled(name):
    return resources.files("sitekit").joinpath("data").joinpath(name).read_text()


def test_empty_file():
    ws = parse_workspace("")
    assert ws.counts() == {"categories": 0, "topologies": 0, "sites": 0, "functors": 0, "presheaves": 0}
    assert parse_workspace("# only a comment\n\n   \n").counts() == ws.counts()


def test_bundled_arrow_file():
    ws = parse_workspace(bundled("arrow.site"))
    c = ws.counts()
    assert (c["categories"], c["topologies"], c["sites"]) == (1, 2, 1)
    C = ws.category("arrow")
    assert C.n_objects == 2 and C.n_arrows == 3
    J = ws.site("arrow_atomic")
    assert J == canonical_topology(C, "atomic")
    assert check_sheaf(J, ws.presheaf("yb")).is_sheaf
    assert ws.functor("ya").sizes() == (1, 1)


def test_bundled_corpus_file():
    ws = parse_workspace(bundled("corpus.site"))
    for name in ws.sites:
        J = ws.site(name)
        assert validate_topology(J).valid
    assert ws.site("degenerate").degenerate
    assert not check_sheaf(ws.site("atomic"), ws.presheaf("two_at_a")).is_sheaf
    assert check_right_ore(ws.category("Z2")).holds


@pytest.mark.parametrize("text, exc, line, column", [
    ("category C\n  objects: a\n  compose g f = q\nend", UnresolvedReference, 3, 11),
    ("category C\n  objects: a\n  arrow f : a -> b\nend", UnresolvedReference, 3, 18),
    ("category C\n  objects: a\nend\ncategory C\nend", DuplicateName, 4, 10),
    ("category C\n  objects: a a\nend", DuplicateName, 2, 14),
    ("category C\n  objects: a\n", ParseError, 1, 1),
    ("blah", ParseError, 1, 1),
    ("category C\n  objects: a\nend\ntopology T on C\n  kind: weird\nend", ParseError, 5, 9),
    ("site S = ( C , T )", UnresolvedReference, 1, 6),
    ("category C\n  objects: a\nend\ntopology T on C\n  cover z : { }\nend", UnresolvedReference, 5, 9),
    ("category C\n  objects: a b\n  arrow f : a -> b\nend\nfunctor F : C -> finset\n"
     "  on a = { x }\n  on f : x -> y\nend", UnresolvedReference, 7, 6),
])
def test_positioned_errors(text, exc, line, column):
    with pytest.raises(exc) as e:
        parse_workspace(text)
    assert (e.value.line, e.value.column) == (line, column)
    assert f"line {line}" in str(e.value)


def test_compose_error_names_the_missing_arrow():
    text = "category C\n  objects: a\n  arrow g : a -> a\n  compose g g = q\nend"
    with pytest.raises(UnresolvedReference) as e:
        parse_workspace(text)
    assert "'q'" in e.value.message and (e.value.line, e.value.column) == (4, 17)


def test_build_errors_are_positioned():
    # g∘f has no composite declared
    text = "category C\n  objects: a b c\n  arrow f : a -> b\n  arrow g : b -> c\nend"
    ws = parse_workspace(text)
    with pytest.raises(ParseError) as e:
        ws.category("C")
    assert e.value.line >= 1
    text = ("category C\n  objects: a b\n  arrow f : a -> b\nend\nfunctor F : C -> finset\n"
            "  on a = { x }\n  on b = { y }\nend")
    with pytest.raises(ParseError):
        parse_workspace(text).functor("F")
    with pytest.raises(UnresolvedReference):
        parse_workspace(text).functor("G")


def test_budget_is_applied():
    ws = parse_workspace(bundled("corpus.site"), budget=Budget(max_arrows_into=1))
    with pytest.raises(SizeGuard):
        ws.site("atomic")


def test_budget_parsing(monkeypatch):
    b = parse_budget("max_arrows=7, max_card=3")
    assert (b.max_arrows, b.max_card) == (7, 3)
    with pytest.raises(ValueError):
        parse_budget("nonsense=1")
    monkeypatch.setenv("SITEKIT_BUDGET", "max_topologies=5")
    assert default_budget().max_topologies == 5


def test_round_trip_bundled():
    for name in ("arrow.site", "corpus.site"):
        ws = parse_workspace(bundled(name))
        again = parse_workspace(serialize_workspace(ws))
        assert again.abstract() == ws.abstract()


# generated workspaces ----------------------------------------------------------


@st.composite
def workspaces(draw):
    lines = []
    n_cats = draw(st.integers(0, 2))
    cats = []
    for i in range(n_cats):
        objs = [f"o{i}_{k}" for k in range(draw(st.integers(1, 3)))]
        arrows = []
        for k in range(draw(st.integers(0, 3))):
            arrows.append((f"f{i}_{k}", draw(st.sampled_from(objs)), draw(st.sampled_from(objs))))
        names = [a[0] for a in arrows] + [f"id_{o}" for o in objs]
        eqs = draw(st.lists(st.tuples(*[st.sampled_from(names)] * 3), max_size=2))
        lines.append(f"category C{i}")
        lines.append("  objects: " + " ".join(objs))
        lines += [f"  arrow {n} : {a} -> {b}" for n, a, b in arrows]
        lines += [f"  compose {g} {f} = {h}" for g, f, h in eqs]
        lines.append("end")
        cats.append((f"C{i}", objs, arrows, names))
    tops = []
    for i, (cname, objs, arrows, names) in enumerate(cats):
        lines.append(f"topology T{i} on {cname}")
        for _ in range(draw(st.integers(0, 2))):
            gens = draw(st.lists(st.sampled_from(names), max_size=2, unique=True))
            lines.append(f"  cover {draw(st.sampled_from(objs))} : {{ {' '.join(gens)} }}")
        if draw(st.booleans()):
            lines.append(f"  kind: {draw(st.sampled_from(['trivial', 'atomic', 'dense']))}")
        lines.append("end")
        tops.append((f"T{i}", cname))
        if draw(st.booleans()):
            lines.append(f"site S{i} = ( {cname} , T{i} )")
    for i, (cname, objs, arrows, names) in enumerate(cats):
        covariant = draw(st.booleans())
        lines.append(f"functor F{i} : {cname} -> finset" if covariant else f"presheaf P{i} on {cname}")
        sets = {o: [f"e{k}" for k in range(draw(st.integers(0, 2)))] for o in objs}
        for o, es in sets.items():
            lines.append(f"  on {o} = {{ {' '.join(es)} }}")
        for name, a, b in arrows:
            src, dst = (a, b) if covariant else (b, a)
            if sets[src] and sets[dst]:
                pairs = [f"{x} -> {draw(st.sampled_from(sets[dst]))}" for x in sets[src]]
                lines.append(f"  on {name} : " + ", ".join(pairs))
        lines.append("end")
    return "\n".join(lines) + "\n"


@given(workspaces())
def test_parse_serialize_parse_is_identity(text):
    ws = parse_workspace(text)
    out = serialize_workspace(ws)
    again = parse_workspace(out)
    assert again.abstract() == ws.abstract()
    assert serialize_workspace(again) == out
