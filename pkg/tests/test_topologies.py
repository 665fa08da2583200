import itertools

import pytest
from hypothesis import given, strategies as st

from sitekit import corpus as K
from sitekit.budget import Budget, SizeGuard
from sitekit.category import check_right_ore
from sitekit.sieves import Sieve, close_to_sieve, empty_sieve, maximal_sieve, sieve_space
from sitekit.topologies import (GrothendieckTopology, NotRightOre, canonical_topology, close_bits,
                                enumerate_subtoposes, enumerate_topologies, generate_topology,
                                lattice_ops, top_topology, topology_from_covers, trivial_topology,
                                validate_topology)

from conftest import CORPUS, small_categories


def brute_is_topology(C, fam):
    """Direct axiom check on a set of (object, frozenset of arrows)."""
    def pb(f, S):
        return frozenset(g for g in C.into[C.src[f]] if C.table[f][g] in S)

    for c in range(C.n_objects):
        if (c, frozenset(C.into[c])) not in fam:
            return False
    for c, S in fam:
        if any((C.src[f], pb(f, S)) not in fam for f in C.into[c]):
            return False
    sieves = {(c, S) for c in range(C.n_objects) for S in _all_sieves(C, c)}
    for c, R in sieves:
        if (c, R) in fam:
            continue
        ok = {f for f in C.into[c] if (C.src[f], pb(f, R)) in fam}
        if any(S <= ok for (c2, S) in fam if c2 == c):
            return False
    return True


def _all_sieves(C, c):
    into = C.into[c]
    for r in range(len(into) + 1):
        for S in itertools.combinations(into, r):
            S = frozenset(S)
            if all(C.table[f][g] in S for f in S for g in C.into[C.src[f]]):
                yield S


def family(J):
    sp = J.space
    return {(sp.entries[i][0], frozenset(Sieve(*sp.entries[i]).members()))
            for i in range(len(sp)) if J.bits >> i & 1}


def test_trivial_is_valid_everywhere():
    for C in CORPUS:
        assert validate_topology(trivial_topology(C)).valid


def test_stability_failure_on_arrow():
    C = K.arrow()
    a, b = C.object_id("a"), C.object_id("b")
    J = topology_from_covers(C, {a: [maximal_sieve(C, a)],
                                 b: [maximal_sieve(C, b), empty_sieve(b)]})
    rep = validate_topology(J)
    assert not rep.valid
    # the same family also breaks transitivity ({f} pulls back to covers)
    assert rep.failed_axioms() == ["stability", "transitivity"]
    w = rep.failures[0]
    assert w.sieve == empty_sieve(b) and C.arrows[w.arrow] == "f" and w.object == b


def test_missing_maximal_is_reported():
    C = K.arrow()
    a, b = C.object_id("a"), C.object_id("b")
    J = topology_from_covers(C, {a: [maximal_sieve(C, a)], b: []})
    assert "maximality" in validate_topology(J).failed_axioms()


def test_transitivity_failure():
    # {f} covers b and its pullback along f is maximal, but ∅ at a is not
    # the issue; drop {f} and cover with a sieve whose members all pull back
    # to covers: on arrow, covers(b) = {max, {f}}, covers(a) = {max, ∅}
    # is valid, while covers(b) = {max, {f}} plus covers(a) = {max, ∅}
    # without ∅ at b violates transitivity (∅ pulls back to ∅ at a).
    C = K.arrow()
    a, b = C.object_id("a"), C.object_id("b")
    f = C.arrow_id("f")
    J = topology_from_covers(C, {a: [maximal_sieve(C, a), empty_sieve(a)],
                                 b: [maximal_sieve(C, b), close_to_sieve(C, b, [f])]})
    rep = validate_topology(J)
    assert rep.failed_axioms() == ["transitivity"]
    assert rep.failures[0].sieve == empty_sieve(b)


@pytest.mark.parametrize("C", [C for C in CORPUS if check_right_ore(C).holds], ids=lambda C: C.name)
def test_atomic_is_valid_on_ore(C):
    J = canonical_topology(C, "atomic")
    assert validate_topology(J).valid
    assert brute_is_topology(C, family(J))


@pytest.mark.parametrize("C", CORPUS, ids=lambda C: C.name)
def test_atomic_exactly_on_ore(C):
    if check_right_ore(C).holds:
        canonical_topology(C, "atomic")
    else:
        with pytest.raises(NotRightOre) as e:
            canonical_topology(C, "atomic")
        assert e.value.witness


def test_generate_examples():
    C = K.arrow()
    assert generate_topology(C, []) == trivial_topology(C)
    for D in (K.terminal(), K.cyclic(2), K.cyclic(3), K.idempotent()):
        J = generate_topology(D, [(0, empty_sieve(0))])
        assert J == top_topology(D) and J.degenerate
    b = C.object_id("b")
    seed = close_to_sieve(C, b, [C.arrow_id("f")])
    J = generate_topology(C, [(b, seed)])
    above = [T for T in enumerate_topologies(C, method="filter") if T.covering(seed)]
    assert all(J <= T for T in above)


def test_generate_rejects_misplaced_seed():
    C = K.arrow()
    with pytest.raises(ValueError):
        generate_topology(C, [(C.object_id("a"), maximal_sieve(C, C.object_id("b")))])


def test_size_guard():
    with pytest.raises(SizeGuard):
        generate_topology(K.square(), [], budget=Budget(max_arrows_into=2))


def test_canonical_examples():
    for n in (2, 3):
        G = K.cyclic(n)
        assert canonical_topology(G, "atomic") == trivial_topology(G)
    T = K.terminal()
    assert canonical_topology(T, "dense") == trivial_topology(T)
    C = K.arrow()
    a, b = C.object_id("a"), C.object_id("b")
    J = canonical_topology(C, "atomic")
    assert {s.mask for s in J.covers(b)} == {maximal_sieve(C, b).mask, 1 << C.arrow_id("f")}
    assert [s.mask for s in J.covers(a)] == [maximal_sieve(C, a).mask]
    with pytest.raises(ValueError):
        canonical_topology(C, "bogus")


@pytest.mark.parametrize("C", CORPUS, ids=lambda C: C.name)
def test_enumeration_matches_filter_and_brute(C):
    L = enumerate_topologies(C)
    F = enumerate_topologies(C, method="filter")
    assert [J.bits for J in L] == [J.bits for J in F]
    assert len({J.bits for J in L}) == len(L)
    for J in L:
        assert validate_topology(J).valid
    if len(sieve_space(C)) <= 9:
        # exhaustive brute force over every family of sieves
        sieves = [(c, S) for c in range(C.n_objects) for S in _all_sieves(C, c)]
        count = sum(brute_is_topology(C, set(sub))
                    for r in range(len(sieves) + 1)
                    for sub in itertools.combinations(sieves, r))
        assert count == len(L)


def test_enumeration_counts():
    assert len(enumerate_topologies(K.terminal())) == 2
    assert len(enumerate_topologies(K.cyclic(2))) == 2
    assert len(enumerate_topologies(K.cyclic(3))) == 2
    assert len(enumerate_topologies(K.arrow())) == 4


@pytest.mark.parametrize("C", CORPUS, ids=lambda C: C.name)
def test_lattice_bounds_and_closure(C):
    L = enumerate_topologies(C)
    assert L.bottom == trivial_topology(C)
    assert L.top == top_topology(C)
    for J, K2 in itertools.product(L, repeat=2):
        assert L.meet(J, K2) in L and L.join(J, K2) in L
        assert L.meet(J, K2) == L.glb(J, K2)


def test_lattice_op_examples():
    C = K.arrow()
    L = enumerate_topologies(C)
    for J in L:
        assert lattice_ops(J, J, "meet") == J
        assert lattice_ops(J, trivial_topology(C), "join") == J
        assert lattice_ops(J, J, "implication", L) == top_topology(C)
    at, de = canonical_topology(C, "atomic"), canonical_topology(C, "dense")
    assert lattice_ops(at, de, "meet") == L.glb(at, de)
    with pytest.raises(ValueError):
        lattice_ops(at, trivial_topology(K.terminal()), "meet")
    with pytest.raises(ValueError):
        lattice_ops(at, de, "xor")


@pytest.mark.parametrize("C", [C for C in CORPUS if len(sieve_space(C)) <= 8], ids=lambda C: C.name)
def test_heyting_adjunction(C):
    L = enumerate_topologies(C)
    imp = {(J.bits, K2.bits): L.implies(J, K2) for J in L for K2 in L}
    for M, J, K2 in itertools.product(L, repeat=3):
        assert (L.meet(M, J) <= K2) == (M <= imp[(J.bits, K2.bits)])


@pytest.mark.parametrize("C", CORPUS, ids=lambda C: C.name)
def test_dense_is_largest_nondegenerate(C):
    L = enumerate_topologies(C)
    nondeg = [J for J in L if not J.degenerate]
    D = canonical_topology(C, "dense")
    assert D in nondeg
    assert all(J <= D for J in nondeg)


def test_subtopos_examples():
    for C in CORPUS:
        L = enumerate_topologies(C)
        assert enumerate_subtoposes(C, top_topology(C), L) == [top_topology(C)]
        assert len(enumerate_subtoposes(C, trivial_topology(C), L)) == len(L)
    T = K.terminal()
    assert len(enumerate_subtoposes(T, trivial_topology(T))) == 2
    C = K.arrow()
    J = canonical_topology(C, "atomic")
    subs = enumerate_subtoposes(C, J)
    assert J in subs and top_topology(C) in subs


@given(small_categories, st.data())
def test_generate_is_a_closure_operator(C, data):
    sp = sieve_space(C)
    n = len(sp)
    s = data.draw(st.integers(0, (1 << n) - 1))
    t = data.draw(st.integers(0, (1 << n) - 1))
    cs = close_bits(sp, s)
    assert (cs & s) == s
    assert close_bits(sp, cs) == cs
    assert (close_bits(sp, s & t) & ~cs) == 0
    J = GrothendieckTopology(C, cs)
    assert validate_topology(J).valid


@given(small_categories, st.data())
def test_generate_equals_least_enumerated(C, data):
    sp = sieve_space(C)
    seeds = data.draw(st.lists(st.integers(0, len(sp) - 1), max_size=4))
    J = generate_topology(C, [sp.sieve(i) for i in seeds])
    L = enumerate_topologies(C)
    want = 0
    for i in seeds:
        want |= 1 << i
    above = [T for T in L if (T.bits & want) == want]
    assert J in above and all(J <= T for T in above)
