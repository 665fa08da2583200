import itertools

import pytest
from hypothesis import given, strategies as st

from sitekit import corpus as K
from sitekit.category import make_category
from sitekit.functors import (SetValuedFunctor, constant_functor, corepresentable, functor_from_tables,
                              relabel)
from sitekit.models import (canonical_key, check_continuity, check_flatness, check_homogeneous,
                            enumerate_functors, enumerate_models, iso_check, natural_transformations,
                            validate_functor)
from sitekit.topologies import canonical_topology, enumerate_topologies, top_topology, trivial_topology

from conftest import CORPUS


def empty_functor(C):
    return SetValuedFunctor(C, tuple(() for _ in C.objects), tuple(() for _ in C.arrows))


def brute_flat(F):
    """Axioms 3-5 evaluated literally."""
    C = F.category
    n = C.n_objects
    if not any(F.size(c) for c in range(n)):
        return False
    for a, b in itertools.product(range(n), repeat=2):
        for x, y in itertools.product(range(F.size(a)), range(F.size(b))):
            if not any(F.actions[f][z] == x and F.actions[g][z] == y
                       for c in range(n) for f in C.hom(c, a) for g in C.hom(c, b)
                       for z in range(F.size(c))):
                return False
    for f, g in itertools.product(range(C.n_arrows), repeat=2):
        if C.src[f] != C.src[g] or C.tgt[f] != C.tgt[g]:
            continue
        for x in range(F.size(C.src[f])):
            if F.actions[f][x] == F.actions[g][x]:
                if not any(C.tgt[h] == C.src[f] and C.table[f][h] == C.table[g][h]
                           and F.actions[h][z] == x
                           for h in range(C.n_arrows) for z in range(F.size(C.src[h]))):
                    return False
    return True


def brute_nat(F, G):
    C = F.category
    out = []
    comps = [list(itertools.product(range(G.size(c)), repeat=F.size(c))) for c in range(C.n_objects)]
    for alpha in itertools.product(*comps):
        if all(alpha[C.tgt[f]][F.actions[f][x]] == G.actions[f][alpha[C.src[f]][x]]
               for f in range(C.n_arrows) for x in range(F.size(C.src[f]))):
            out.append(tuple(alpha))
    return sorted(out)


def z2_models_by_hand(max_card):
    """Every action of Z/2 on {0..n-1}, n <= max_card, filtered by the axioms."""
    C = K.cyclic(2)
    s = C.arrow_id("s")
    models = set()
    for n in range(max_card + 1):
        for row in itertools.product(range(n), repeat=n):
            if any(row[row[x]] != x for x in range(n)):
                continue
            acts = [None, None]
            acts[C.identities[0]] = tuple(range(n))
            acts[s] = row
            F = SetValuedFunctor(C, (tuple(map(str, range(n))),), tuple(acts))
            if brute_flat(F):
                # orbit type is an isomorphism invariant for Z/2-sets
                fixed = sum(row[x] == x for x in range(n))
                models.add((n, fixed))
    return models


def permuted(C):
    """The same category with its non-identity arrows listed in reverse."""
    ids = list(C.identities)
    rest = [f for f in range(C.n_arrows) if f not in ids][::-1]
    order = ids + rest
    pos = {f: k for k, f in enumerate(order)}
    arrows = [(C.arrows[f], C.src[f], C.tgt[f]) for f in order]
    return make_category(C.name, C.objects, arrows, list(range(len(ids))),
                         lambda g, f: pos[C.table[order[g]][order[f]]])


def test_validate_examples():
    for C in CORPUS:
        for c in range(C.n_objects):
            assert validate_functor(corepresentable(C, c)).valid
        assert validate_functor(constant_functor(C, 1)).valid
    C = K.chain3()
    F = functor_from_tables(C, {"a": ["0"], "b": ["0", "1"], "c": ["0", "1"]},
                            {"f": {"0": "0"}, "g": {"0": "0", "1": "0"}, "h": {"0": "1"}})
    rep = validate_functor(F)
    assert not rep.valid and [C.arrows[k] for k in rep.witness] == ["g", "f"]


@pytest.mark.parametrize("C", CORPUS, ids=lambda C: C.name)
def test_corepresentables_are_flat(C):
    for c in range(C.n_objects):
        F = corepresentable(C, c)
        assert check_flatness(F).flat
        assert check_flatness(F, method="elements").flat


def test_flatness_examples():
    for C in CORPUS:
        rep = check_flatness(empty_functor(C))
        assert not rep.nonempty and not rep.flat
    C = K.cyclic(2)
    reg = corepresentable(C, 0)
    assert check_flatness(reg).flat
    triv = constant_functor(C, 1)
    rep = check_flatness(triv)
    assert rep.nonempty and rep.span_completion and not rep.equalizing
    assert rep.equalizing_witness is not None
    T = K.terminal()
    assert not check_flatness(constant_functor(T, 2)).span_completion


@pytest.mark.parametrize("C", [C for C in CORPUS if C.n_arrows <= 5], ids=lambda C: C.name)
def test_flatness_matches_brute_force_and_elements(C):
    for F in enumerate_functors(C, 2):
        direct = check_flatness(F)
        assert direct.flat == brute_flat(F)
        assert validate_functor(F).valid
        via = check_flatness(F, method="elements")
        assert direct.nonempty == via.nonempty
        assert direct.flat == via.flat


def test_enumerate_functors_matches_brute_force():
    for C in (K.arrow(), K.cyclic(2), K.idempotent(), K.parallel_pair(), K.retraction()):
        got = sorted((F.sizes(), F.actions) for F in enumerate_functors(C, 2))
        want = []
        nonid = [f for f in range(C.n_arrows) if not C.is_identity(f)]
        for sizes in itertools.product(range(3), repeat=C.n_objects):
            rows = [list(itertools.product(range(sizes[C.tgt[f]]), repeat=sizes[C.src[f]])) for f in nonid]
            for choice in itertools.product(*rows):
                acts = [tuple(range(sizes[C.src[f]])) for f in range(C.n_arrows)]
                for f, r in zip(nonid, choice):
                    acts[f] = r
                F = SetValuedFunctor(C, tuple(tuple(map(str, range(s))) for s in sizes), tuple(acts))
                if validate_functor(F).valid:
                    want.append((F.sizes(), F.actions))
        assert got == sorted(want)


def test_continuity_examples():
    for C in CORPUS:
        for F in [corepresentable(C, c) for c in range(C.n_objects)]:
            assert check_continuity(trivial_topology(C), F).continuous
            rep = check_continuity(top_topology(C), F)
            assert not rep.continuous
            assert rep.sieve.mask == 0
    C = K.arrow()
    a = C.object_id("a")
    assert check_continuity(canonical_topology(C, "atomic"), corepresentable(C, a)).continuous
    rep = check_continuity(trivial_topology(C), constant_functor(C, 2))
    assert rep.continuous and rep.flat_note == "functor is not flat"


def test_model_enumeration_examples():
    T = K.terminal()
    models = enumerate_models(trivial_topology(T), 2)
    assert [M.sizes() for M in models] == [(1,)]
    G = K.cyclic(2)
    models = enumerate_models(trivial_topology(G), 2)
    assert len(models) == 1
    assert iso_check(models[0], corepresentable(G, 0)) is not None
    assert {(2, 0)} == z2_models_by_hand(2)
    for C in CORPUS[:8]:
        assert enumerate_models(top_topology(C), 2) == []


@pytest.mark.parametrize("C", [C for C in CORPUS if C.n_arrows <= 5], ids=lambda C: C.name)
def test_models_are_pairwise_non_isomorphic(C):
    models = enumerate_models(trivial_topology(C), 2)
    for M, N in itertools.combinations(models, 2):
        assert iso_check(M, N) is None
    for M in models:
        assert check_flatness(M).flat


@pytest.mark.parametrize("C", [C for C in CORPUS if C.n_arrows <= 5], ids=lambda C: C.name)
def test_models_independent_of_arrow_order(C):
    D = permuted(C)
    a = [canonical_key(M) for M in enumerate_models(trivial_topology(C), 2)]
    b = [canonical_key(M) for M in enumerate_models(trivial_topology(D), 2)]
    assert a == b


@pytest.mark.parametrize("C", [C for C in CORPUS if C.n_arrows <= 4], ids=lambda C: C.name)
def test_trivial_topology_continuity_is_vacuous(C):
    J = trivial_topology(C)
    assert enumerate_models(J, 2) == enumerate_models(J, 2, check_continuity_axiom=False)


def test_iso_examples():
    G = K.cyclic(2)
    reg = corepresentable(G, 0)
    assert iso_check(reg, reg) == ((0, 1),)
    swapped = relabel(reg, [(1, 0)])
    assert iso_check(reg, swapped) is not None
    assert iso_check(reg, constant_functor(G, 1)) is None
    # same sizes, different action: regular vs trivial action on 2 points
    assert iso_check(reg, constant_functor(G, 2)) is None


@pytest.mark.parametrize("C", [C for C in CORPUS if C.n_arrows <= 5], ids=lambda C: C.name)
def test_natural_transformations_match_brute_force(C):
    Fs = [corepresentable(C, c) for c in range(C.n_objects)] + [constant_functor(C, 2)]
    for F, G in itertools.product(Fs, repeat=2):
        assert sorted(natural_transformations(F, G)) == brute_nat(F, G)


@given(st.sampled_from([C for C in CORPUS if C.n_arrows <= 4]), st.data())
def test_canonical_key_is_relabel_invariant(C, data):
    Fs = list(enumerate_functors(C, 2))
    F = data.draw(st.sampled_from(Fs))
    perms = [data.draw(st.permutations(range(F.size(c)))) for c in range(C.n_objects)]
    G = relabel(F, perms)
    assert canonical_key(F) == canonical_key(G)
    assert iso_check(F, G) is not None


def test_homogeneity_examples():
    G = K.cyclic(2)
    reg = corepresentable(G, 0)
    assert check_homogeneous(reg, []).homogeneous
    rep = check_homogeneous(reg, [reg])
    assert rep.homogeneous and rep.checked == 4
    # the trivial action admits a map from the regular one that cannot be extended
    # along the inclusion of the one-point action: there is no map 1 -> regular
    triv = constant_functor(G, 1)
    rep = check_homogeneous(reg, [triv, reg])
    assert rep.homogeneous is False and rep.failure is not None


def test_models_on_non_trivial_sites():
    C = K.arrow()
    J = canonical_topology(C, "atomic")
    for M in enumerate_models(J, 2):
        assert check_continuity(J, M).continuous and check_flatness(M).flat
    L = enumerate_topologies(C)
    counts = [len(enumerate_models(T, 2)) for T in L]
    # a larger topology can only remove models
    for i, T in enumerate(L):
        for k, U in enumerate(L):
            if T <= U:
                assert counts[k] <= counts[i]
