import itertools

import pytest
from hypothesis import given, strategies as st

from sitekit import corpus as K
from sitekit.sieves import (BaseMismatch, NotASieve, Sieve, WrongCodomain, close_to_sieve, empty_sieve,
                            enumerate_sieve_masks, is_sieve, make_sieve, maximal_sieve, pullback_sieve,
                            sieve_heyting)

from conftest import CORPUS, small_categories


def brute_sieves(C, c):
    """Every subset of arrows into c closed under precomposition."""
    into = C.into[c]
    out = []
    for r in range(len(into) + 1):
        for S in itertools.combinations(into, r):
            S = set(S)
            if all(C.table[f][g] in S for f in S for g in C.into[C.src[f]]):
                out.append(sum(1 << f for f in S))
    return sorted(out)


@pytest.mark.parametrize("C", CORPUS, ids=lambda C: C.name)
def test_sieve_enumeration_matches_brute_force(C):
    for c in range(C.n_objects):
        assert enumerate_sieve_masks(C, c) == brute_sieves(C, c)


def test_close_examples():
    C = K.arrow()
    b = C.object_id("b")
    assert close_to_sieve(C, b, [C.identities[b]]) == maximal_sieve(C, b)
    assert close_to_sieve(C, b, []) == empty_sieve(b)
    assert close_to_sieve(C, b, [C.arrow_id("f")]).names(C) == ["f"]


def test_wrong_codomain_and_not_a_sieve():
    C = K.chain3()
    with pytest.raises(WrongCodomain):
        close_to_sieve(C, C.object_id("c"), [C.arrow_id("f")])
    with pytest.raises(NotASieve):
        make_sieve(C, C.object_id("c"), [C.arrow_id("g")])  # misses g∘f = h


def test_pullback_examples():
    C = K.arrow()
    a, b = C.object_id("a"), C.object_id("b")
    f = C.arrow_id("f")
    R = close_to_sieve(C, b, [f])
    assert pullback_sieve(C, C.identities[b], R) == R
    assert pullback_sieve(C, f, maximal_sieve(C, b)) == maximal_sieve(C, a)
    assert pullback_sieve(C, f, R) == maximal_sieve(C, a)
    with pytest.raises(BaseMismatch):
        pullback_sieve(C, f, maximal_sieve(C, a))


def test_heyting_examples():
    C = K.arrow()
    b = C.object_id("b")
    R = close_to_sieve(C, b, [C.arrow_id("f")])
    M = maximal_sieve(C, b)
    assert sieve_heyting(C, R, R, "implication") == M
    assert sieve_heyting(C, R, M, "meet") == R
    assert sieve_heyting(C, R, None, "negation") == empty_sieve(b)
    with pytest.raises(BaseMismatch):
        sieve_heyting(C, R, maximal_sieve(C, 0), "meet")


def _sieves(C):
    return [Sieve(c, m) for c in range(C.n_objects) for m in enumerate_sieve_masks(C, c)]


@given(small_categories, st.data())
def test_closure_operator_laws(C, data):
    c = data.draw(st.integers(0, C.n_objects - 1))
    into = list(C.into[c])
    A = data.draw(st.lists(st.sampled_from(into), unique=True))
    B = data.draw(st.lists(st.sampled_from(into), unique=True))
    clA = close_to_sieve(C, c, A)
    assert all(f in clA for f in A)                                       # extensive
    assert close_to_sieve(C, c, clA.members()) == clA                    # idempotent
    clAB = close_to_sieve(C, c, A + B)
    assert clA.mask & ~clAB.mask == 0                                    # monotone
    assert is_sieve(C, clA)


@pytest.mark.parametrize("C", [C for C in CORPUS if C.n_arrows <= 10], ids=lambda C: C.name)
def test_pullback_commutes_with_meet_and_implication(C):
    for f in range(C.n_arrows):
        c = C.tgt[f]
        sieves = [Sieve(c, m) for m in enumerate_sieve_masks(C, c)]
        for R, S in itertools.product(sieves, repeat=2):
            for op in ("meet", "implication"):
                lhs = pullback_sieve(C, f, sieve_heyting(C, R, S, op))
                rhs = sieve_heyting(C, pullback_sieve(C, f, R), pullback_sieve(C, f, S), op)
                assert lhs == rhs, (C.name, op)


@pytest.mark.parametrize("C", CORPUS, ids=lambda C: C.name)
def test_heyting_adjunction_on_sieves(C):
    for c in range(C.n_objects):
        sieves = [Sieve(c, m) for m in enumerate_sieve_masks(C, c)]
        for T, R, S in itertools.product(sieves, repeat=3):
            left = sieve_heyting(C, T, R, "meet").mask & ~S.mask == 0
            right = T.mask & ~sieve_heyting(C, R, S, "implication").mask == 0
            assert left == right


@given(small_categories)
def test_heyting_results_are_sieves(C):
    for R, S in itertools.product(_sieves(C), repeat=2):
        if R.base != S.base:
            continue
        for op in ("meet", "join", "implication"):
            assert is_sieve(C, sieve_heyting(C, R, S, op))
