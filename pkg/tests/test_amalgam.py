from __future__ import annotations

import random

import pytest

import oracles
from monodef.amalgam import (DeltaSystem, amal, amal_preconditions, check_agreement, check_nine_cases,
                             find_delta_system, intersection, key_fact_common_ub, oplus, scc_probe,
                             star_order, type_over)
from monodef.creature import Creature, creature_leq, validate_creature
from monodef.errors import Disagreement, NotFound, PreconditionFailed, TableViolation, UnknownElement
from monodef.generators import exhaustive_amalgam_inputs, random_amalgam_input
from monodef.order import Element, Poset, antichain, chain, is_end_extension, transitive_closure

E = [Element(i) for i in range(30)]


def C(pairs=(), carrier=()) -> Creature:
    carrier = set(carrier) | {a for p in pairs for a in p}
    return Creature(transitive_closure(pairs, carrier))


def test_type_over_examples():
    P = C([(E[0], E[1])])
    assert type_over(P, E[1], []) == frozenset()
    assert type_over(P, E[1], [E[0]]) == {E[0]}
    Q = C(carrier=E[:3])
    assert type_over(Q, E[2], E[:2]) == frozenset()
    with pytest.raises(UnknownElement):
        type_over(P, E[5], [])


def test_oplus_examples():
    p, q = C(carrier=[E[0]]), C(carrier=[E[1]])
    assert oplus(p, q).order.lt == frozenset()
    p = C([(E[0], E[1])])
    assert oplus(p, p) == p
    a, m, b = E[0], E[1], E[2]
    assert oplus(C([(a, m)]), C([(m, b)])).order.less(a, b)


def test_oplus_disagreement():
    with pytest.raises(Disagreement):
        check_agreement(C([(E[0], E[1])]), C([(E[1], E[0])]))


def test_amal_two_points():
    A = amal(C(carrier=[E[0]]), E[0], C(carrier=[E[1]]), E[1])
    assert A.order.lt == {(E[0], E[1])}


def test_amal_third_clause():
    a, x, y, b = E[0], E[1], E[2], E[3]
    A = amal(C([(a, x)]), x, C([(y, b)]), y)
    assert A.order.less(a, b)
    assert (x, y) in star_order(C([(a, x)]), x, C([(y, b)]), y)


def test_amal_degenerate_same_creature():
    p = C([(E[0], E[1])])
    assert star_order(p, E[0], p, E[0]) == p.order.lt
    assert amal(p, E[0], p, E[0]) == p


def test_amal_rejects_bad_inputs():
    r = E[0]
    p = C([(r, E[1])])
    q = C(carrier=[r, E[2]])
    assert "equal type over r" in amal_preconditions(p, E[1], q, E[2])
    with pytest.raises(PreconditionFailed):
        amal(p, E[1], q, E[2])
    # x inside the common part
    assert "x, y outside r" in amal_preconditions(p, r, q, E[2])


def test_amal_is_an_end_extension_of_p_and_extends_q():
    rng = random.Random(8)
    for _ in range(200):
        p, x, q, y = random_amalgam_input(rng, 12)
        A = amal(p, x, q, y)
        assert creature_leq(q, A)
        assert creature_leq(p, A)
        assert is_end_extension(p.order, A.order)
        assert validate_creature(A).ok


def test_star_order_matches_closure_oracle():
    rng = random.Random(9)
    for _ in range(200):
        p, x, q, y = random_amalgam_input(rng, 10)
        want = oracles.star_order(p.order.lt, q.order.lt, p.carrier, q.carrier, x, y)
        assert star_order(p, x, q, y) == want == amal(p, x, q, y).order.lt


def test_small_exhaustive_family_satisfies_the_characterization():
    n = 0
    for p, x, q, y in exhaustive_amalgam_inputs(5):
        n += 1
        assert star_order(p, x, q, y) == amal(p, x, q, y).order.lt
        assert check_nine_cases(p, x, q, y).ok
    assert n == 692


def test_nine_cases_p_then_clause_three():
    # a <_p b and b <* c through the third clause: a <_p b <=_p x, y <=_q c
    a, b, x, y, c = E[0], E[1], E[2], E[3], E[4]
    p = C([(a, b), (b, x)])
    q = C([(y, c)])
    rep = check_nine_cases(p, x, q, y)
    assert rep.ok
    assert rep.cases[("p", "x")] > 0


def test_nine_cases_without_common_part():
    rng = random.Random(4)
    for _ in range(100):
        p, x, q, y = random_amalgam_input(rng, 10)
        if intersection(p, q).carrier:
            continue
        rep = check_nine_cases(p, x, q, y)
        assert rep.ok
        for row in (("p", "q"), ("q", "p"), ("q", "x")):
            assert rep.cases[row] == 0
        for row in (("x", "p"), ("x", "x")):
            assert rep.cases[row] == 0


def test_impossible_rows_never_fire():
    rng = random.Random(12)
    for _ in range(200):
        p, x, q, y = random_amalgam_input(rng, 12)
        rep = check_nine_cases(p, x, q, y)
        assert rep.cases[("x", "p")] == 0 and rep.cases[("x", "x")] == 0


def test_key_fact_exhaustive_over_points():
    rng = random.Random(13)
    for _ in range(40):
        p, x, q, y = random_amalgam_input(rng, 10)
        pts = sorted(p.carrier | q.carrier)
        for a in pts:
            for b in pts:
                if not ({a, b} <= p.carrier or {a, b} <= q.carrier):
                    continue
                for c in pts:
                    key_fact_common_ub(p, x, q, y, a, b, c)


def test_literal_joint_cases_miss_the_mixed_case():
    # a in the common part below c in q, b = x, y < c: c bounds both in the amalgam
    a, x, y, c = E[0], E[1], E[2], E[3]
    p = C(carrier=[a, x])
    q = C([(a, c), (y, c)])
    assert key_fact_common_ub(p, x, q, y, a, x, c)
    with pytest.raises(TableViolation):
        key_fact_common_ub(p, x, q, y, a, x, c, literal=True)
    # minimality is not at stake: the amalgam adds nothing below points of p
    A = amal(p, x, q, y)
    assert all(A.order.down(w) == p.order.down(w) for w in p.carrier)


def test_key_fact_examples():
    a, b, x, y, c = E[0], E[1], E[2], E[3], E[4]
    p = C([(a, x), (b, x)])
    q = C([(y, c)])
    assert key_fact_common_ub(p, x, q, y, a, b, y)
    q2 = C(carrier=[y, c])
    assert not key_fact_common_ub(p, x, q2, y, a, b, c)


def test_delta_system_examples():
    fam = [{1, 2}, {3, 4}, {5}]
    ds = find_delta_system(fam)
    assert ds.heart == frozenset() and ds.indices == {0, 1, 2}
    same = [{1, 2}] * 4
    ds = find_delta_system(same)
    assert ds.heart == {1, 2} and ds.indices == {0, 1, 2, 3}
    ds = find_delta_system([{1, 2}, {1, 3}, {1, 4}, {2, 3}], 3)
    assert ds == DeltaSystem(frozenset({0, 1, 2}), frozenset({1}), True)
    assert ds.check([{1, 2}, {1, 3}, {1, 4}, {2, 3}])


def test_delta_system_not_found():
    with pytest.raises(NotFound):
        find_delta_system([{1, 2}, {1, 3}, {2, 3}], 3)


def test_delta_system_greedy_flag():
    fam = [{i, 100} for i in range(25)]
    ds = find_delta_system(fam, 2)
    assert not ds.exact and ds.check(fam) and ds.heart == {100}


def test_scc_probe_on_a_chain_succeeds():
    M = Creature(chain(E[:4]))
    X = [(Creature(Poset([E[i]])), E[i]) for i in range(4)]
    res = scc_probe(M, X)
    assert res.found and res.pair == (0, 1)
    assert res.amalgam.order.less(E[0], E[1])


def test_scc_probe_requires_substructures():
    M = Creature(antichain(E[:2]))
    with pytest.raises(PreconditionFailed):
        scc_probe(M, [(Creature(Poset([E[5]])), E[5])])


def test_amal_carries_f_and_h():
    rng = random.Random(21)
    seen = 0
    for _ in range(200):
        p, x, q, y = random_amalgam_input(rng, 12)
        if not (p.F or q.F or p.H):
            continue
        seen += 1
        A = amal(p, x, q, y)
        assert dict(A.F) == {**p.F, **q.F}
        assert A.H == p.H | q.H
    assert seen > 20
