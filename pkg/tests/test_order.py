from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

import oracles
from monodef.audit import exhaustive_posets
from monodef.errors import BudgetExceeded, CycleDetected, NotAPartialOrder, NotASubstructure, UnknownElement
from monodef.generators import random_poset
from monodef.order import (Element, Poset, antichain, chain, down_set, is_end_extension, max_antichain,
                           max_antichain_size, minimal_upper_bounds, transitive_closure, umub_map)

E = [Element(i) for i in range(10)]


def diamond() -> Poset:
    return transitive_closure([(E[0], E[1]), (E[0], E[2]), (E[1], E[3]), (E[2], E[3])], E[:4])


def bowtie() -> Poset:
    # u=0, v=1 below both tops t1=2, t2=3; plus a bottom 4 and an unrelated 5
    pairs = [(E[0], E[2]), (E[0], E[3]), (E[1], E[2]), (E[1], E[3]), (E[4], E[0]), (E[4], E[1])]
    return transitive_closure(pairs, E[:6])


def test_closure_forces_transitivity():
    P = transitive_closure([(E[0], E[1]), (E[1], E[2])], E[:3])
    assert P.less(E[0], E[2])
    assert P.lt == {(E[0], E[1]), (E[1], E[2]), (E[0], E[2])}


def test_closure_of_nothing_is_antichain():
    P = transitive_closure([], E[:2])
    assert P.lt == frozenset()
    assert not P.comparable(E[0], E[1])


def test_closure_cycle_has_witness():
    with pytest.raises(CycleDetected) as info:
        transitive_closure([(E[0], E[1]), (E[1], E[0])], E[:2])
    assert set(info.value.witness) <= {E[0], E[1]}


def test_closure_rejects_foreign_points():
    with pytest.raises(UnknownElement):
        transitive_closure([(E[0], E[5])], E[:2])


def test_constructor_rejects_non_closed_relation():
    with pytest.raises(NotAPartialOrder):
        Poset(E[:3], [(E[0], E[1]), (E[1], E[2])])


def test_down_sets():
    D = diamond()
    assert down_set(D, E[3]) == {E[0], E[1], E[2]}
    assert down_set(antichain(E[:3]), E[1]) == frozenset()
    assert down_set(chain(E[:3]), E[1]) == {E[0]}
    with pytest.raises(UnknownElement):
        down_set(D, E[7])


def test_minimal_upper_bounds_examples():
    assert minimal_upper_bounds(diamond(), E[1], E[2]) == {E[3]}
    assert minimal_upper_bounds(antichain(E[:2]), E[0], E[1]) == frozenset()
    assert minimal_upper_bounds(bowtie(), E[0], E[1]) == {E[2], E[3]}
    # comparable pairs have none by convention
    assert minimal_upper_bounds(diamond(), E[0], E[3]) == frozenset()


def test_umub_map_examples():
    assert umub_map(diamond()).entries == {frozenset((E[1], E[2])): E[3]}
    assert frozenset((E[0], E[1])) not in umub_map(bowtie()).entries
    assert len(umub_map(chain(E[:4]))) == 0


def test_end_extension_examples():
    big = chain(E[:3])
    assert is_end_extension(chain(E[:2]), big)
    assert not is_end_extension(Poset([E[1]]), chain(E[:2]))
    assert is_end_extension(big, big)
    with pytest.raises(NotASubstructure):
        is_end_extension(antichain(E[:2]), big)


def test_max_antichain_examples():
    assert max_antichain_size(antichain(E[:5])) == 5
    assert max_antichain_size(chain(E[:5])) == 1
    assert max_antichain_size(diamond()) == 2


def test_max_antichain_search_and_matching_agree():
    rng = random.Random(3)
    for _ in range(40):
        P = random_poset(rng, rng.randint(1, 14), rng.uniform(0.05, 0.5))
        A = max_antichain(P)
        B = max_antichain(P, search_limit=0)
        assert len(A) == len(B) == oracles.max_antichain_size(P.lt, P.carrier)
        assert oracles.is_antichain(P.lt, B)


def test_max_antichain_search_budget():
    P = antichain(E[:6])
    with pytest.raises(BudgetExceeded):
        max_antichain(P, search_limit=3, method="search")


def test_hasse_is_transitive_reduction():
    D = diamond()
    assert D.hasse() == [(E[0], E[1]), (E[0], E[2]), (E[1], E[3]), (E[2], E[3])]
    assert transitive_closure(D.hasse(), D.elements) == D


def test_restrict_keeps_induced_order():
    D = diamond()
    R = D.restrict([E[0], E[3]])
    assert R.lt == {(E[0], E[3])}


def test_exhaustive_poset_counts():
    # number of posets up to isomorphism on n points
    assert [sum(1 for _ in exhaustive_posets(n)) for n in range(6)] == [1, 1, 2, 5, 16, 63]


@st.composite
def relations(draw, max_n=9):
    n = draw(st.integers(0, max_n))
    pairs = draw(st.lists(st.tuples(st.integers(0, max(n - 1, 0)), st.integers(0, max(n - 1, 0))), max_size=20))
    # keep the relation acyclic by orienting along ids
    rel = {(E[min(a, b)], E[max(a, b)]) for a, b in pairs if a != b and n}
    return rel, E[:n]


@given(relations())
def test_closure_matches_warshall(data):
    rel, carrier = data
    P = transitive_closure(rel, carrier)
    assert set(P.lt) == oracles.closure(rel, carrier)


@given(relations())
def test_poset_invariants(data):
    rel, carrier = data
    P = transitive_closure(rel, carrier)
    for a, b in P.lt:
        assert (b, a) not in P.lt
        assert P.up(a) >= P.up(b) | {b}
    m = umub_map(P)
    for key, z in m.entries.items():
        x, y = sorted(key)
        assert minimal_upper_bounds(P, x, y) == {z}


@given(relations(max_n=7))
def test_end_extension_transitive_on_nested_down_sets(data):
    rel, carrier = data
    P = transitive_closure(rel, carrier)
    # down-closures are end-extended by everything above them
    for x in P.elements:
        low = P.down(x) | {x}
        small = P.restrict(low)
        assert is_end_extension(small, P)
        tiny = P.restrict(P.down(x))
        assert is_end_extension(tiny, small)
