import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from galdelta.errors import NotFunctorial, SearchBudgetExceeded
from galdelta.fincat import cyclic_group_category, poset_category
from galdelta.finset import (
    SetFunctor,
    compose_maps,
    constant_set_functor,
    enumerate_set_functors,
    finset,
    invert_map,
    is_bijection,
    set_natural_iso,
)
from oracles import brute_functor_classes
from strategies import posets


def _comp_table(C):
    G, F = C.pairs()
    return {(int(g), int(f)): int(h) for g, f, h in zip(G, F, C.comp)}


def _oracle(C, k, inverted=()):
    return brute_functor_classes(C.n_objects, C.src.tolist(), C.tgt.tolist(), C.identity.tolist(),
                                 _comp_table(C), k, set(inverted))


def test_finset_category():
    S = finset(2).category.validate()
    # maps between sets of sizes 0, 1, 2: 1+0+0 + 1+1+1 + 1+2+4
    assert S.n_morphisms == 11


@given(st.lists(st.integers(0, 3), min_size=4, max_size=4), st.permutations(range(4)))
def test_map_algebra(f, p):
    p = tuple(p)
    assert compose_maps(invert_map(p), p) == tuple(range(4))
    assert is_bijection(p, 4)
    assert is_bijection(tuple(f), 4) == (len(set(f)) == 4)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_arrow_matches_brute_force(k):
    C = poset_category(2, [(0, 1)])
    assert len(enumerate_set_functors(C, k)) == _oracle(C, k)


@pytest.mark.parametrize("n,k", [(2, 2), (3, 2), (3, 3)])
def test_group_functors_are_gsets(n, k):
    C = cyclic_group_category(n)
    assert len(enumerate_set_functors(C, k, "all")) == _oracle(C, k)


@given(posets(max_size=3), st.integers(0, 2))
def test_posets_match_brute_force(C, k):
    assert len(enumerate_set_functors(C, k)) == _oracle(C, k)


@given(posets(max_size=3), st.data())
def test_inverted_edges_match_brute_force(C, data):
    inverted = data.draw(st.lists(st.integers(0, C.n_morphisms - 1), unique=True))
    k = 2
    got = enumerate_set_functors(C, k, inverted)
    assert len(got) == _oracle(C, k, inverted)
    for F in got:
        F.validate()
        assert F.non_bijective(inverted) is None


def test_classes_pairwise_distinct():
    C = poset_category(3, [(0, 1), (0, 2)])
    reps = enumerate_set_functors(C, 2)
    for F, G in itertools.combinations(reps, 2):
        assert set_natural_iso(F, G) is None
    assert enumerate_set_functors(C, 2) == reps


def test_constant_functor_and_validation():
    C = poset_category(2, [(0, 1)])
    F = constant_set_functor(C, 2).validate()
    assert F.sizes == (2, 2)
    with pytest.raises(NotFunctorial):
        SetFunctor(C, (1, 1), ((0,), (1,), (0,))).validate()


def test_budget():
    with pytest.raises(SearchBudgetExceeded):
        enumerate_set_functors(poset_category(4, [(0, 1), (0, 2), (0, 3)]), 3, budget=5)
