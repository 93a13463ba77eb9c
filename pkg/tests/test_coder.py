from __future__ import annotations

import pytest

from monodef.builder import build_generic
from monodef.coder import (GADGET_SIZE, StepInput, allocate_gadgets, check_absoluteness, decode_relation,
                           encode_creature, encode_relation, make_context)
from monodef.creature import Creature, find_triangles, pair, validate_creature
from monodef.errors import AllocationMismatch, BadInput, PreconditionFailed
from monodef.order import Element, antichain, transitive_closure

G = [Element(i) for i in range(4)]


def step(R, n=2) -> StepInput:
    return StepInput(Creature(antichain(G[:n])), frozenset(R))


def test_empty_relation_allocates_only_e():
    alloc = allocate_gadgets(step([]), spare_floor=5)
    assert alloc.gadgets == {} and alloc.gadget_elements == frozenset()
    assert alloc.e.id == 2 and alloc.e.kind == "e_point"
    assert alloc.spares.size == 5 and alloc.spares.start == 3


def test_one_pair_allocates_ten_points():
    alloc = allocate_gadgets(step([(G[0], G[1])]))
    assert GADGET_SIZE == 10
    (g,) = alloc.gadgets.values()
    assert [len(g.A), len(g.B), len(g.C), len(g.Delta), len(g.Gamma)] == [2, 3, 1, 3, 1]
    assert len(alloc.gadget_elements) == 10


def test_gadgets_are_disjoint_and_fresh():
    R = [(a, b) for a in G[:3] for b in G[:3]]
    inp = StepInput(Creature(antichain(G[:3])), frozenset(R))
    alloc = allocate_gadgets(inp)
    seen = set()
    for g in alloc.gadgets.values():
        assert not (g.members & seen)
        seen |= g.members
    assert len(seen) == 10 * len(R)
    assert not ({x.id for x in seen} & {x.id for x in G[:3]})


def test_omega_is_gadget_plus_pair():
    alloc = allocate_gadgets(step([(G[0], G[1])]))
    (g,) = alloc.gadgets.values()
    for x in g.members:
        assert alloc.omega(x) == g.members | {G[0], G[1]}
    assert alloc.omega(alloc.e) == frozenset()


def test_allocation_is_deterministic():
    inp = step([(G[1], G[0]), (G[0], G[1])])
    a1, a2 = allocate_gadgets(inp), allocate_gadgets(inp)
    assert a1 == a2
    # sorted pair order: (0, 1) gets the lower ids
    assert min(a1.gadgets[(0, 1)].members) < min(a1.gadgets[(1, 0)].members)


def test_encode_counts_nine_new_pairs():
    inp = step([(G[0], G[1])])
    fs = encode_relation(inp, allocate_gadgets(inp))
    assert len(fs) == 2 + 3 + 1 + 3


def test_encode_diagonal_counts_five():
    inp = step([(G[0], G[0])])
    alloc = allocate_gadgets(inp)
    fs = encode_relation(inp, alloc)
    (g,) = alloc.gadgets.values()
    delta = frozenset(g.Delta)
    n = sum(1 for key, z in fs.items() if G[0] in key and z in delta)
    assert n == 5


def test_encode_empty_relation_keeps_ground_f():
    P = transitive_closure([(G[0], G[2]), (G[1], G[2])], G[:3])
    ground = Creature(P, {pair(G[0], G[1]): G[2]})
    inp = StepInput(ground, frozenset())
    fs = encode_relation(inp, allocate_gadgets(inp))
    assert dict(fs) == dict(ground.F)


def test_encode_rejects_foreign_allocation():
    a = allocate_gadgets(step([(G[0], G[1])]))
    with pytest.raises(AllocationMismatch):
        encode_relation(step([]), a)


def test_step_input_checks():
    with pytest.raises(PreconditionFailed):
        StepInput(Creature(antichain(G[:2])), frozenset([(G[0], G[3])]))
    bad = Creature(antichain(G[:3]), {pair(G[0], G[1]): G[2]})
    with pytest.raises(BadInput):
        StepInput(bad, frozenset())


def test_only_delta_triangles_are_anchored_at_e():
    ctx = make_context(step([(G[0], G[1]), (G[1], G[0])]))
    C = encode_creature(ctx)
    for t in find_triangles(C):
        if ctx.e in t.anchors:
            assert any(t.vertices == frozenset(g.Delta) for g in ctx.alloc.gadgets.values())


def test_decode_without_triangles_is_empty():
    assert decode_relation(Creature(antichain(G[:3])), G[0]) == frozenset()


def test_triangle_with_two_base_points_contributes_nothing():
    # Delta = {s, t2, t3}; both s and t2 are values of exactly one pair
    e, c, s, t2, t3, w, u, v = (Element(i) for i in range(8))
    F = {pair(e, c): s, pair(u, v): t2,
         pair(s, t2): w, pair(s, t3): w, pair(t2, t3): w}
    C = Creature(antichain([e, c, s, t2, t3, w, u, v]), F)
    (t,) = find_triangles(C)
    assert t.unique_base is None
    assert decode_relation(C, e) == frozenset()


@pytest.mark.parametrize("R", [
    [],
    [(0, 1)],
    [(0, 0)],
    [(0, 1), (1, 0)],
    [(0, 1), (2, 1), (2, 2)],
])
def test_round_trip_through_the_builder(R):
    inp = StepInput(Creature(antichain(G[:3])), frozenset((G[a], G[b]) for a, b in R))
    ctx = make_context(inp)
    res = build_generic(ctx)
    assert validate_creature(res.MG).ok
    assert decode_relation(res.MG, ctx.e) == inp.R


def test_absoluteness_identity_and_second_step():
    ctx1 = make_context(step([(G[0], G[1])]))
    MG1 = build_generic(ctx1).MG
    assert check_absoluteness(MG1, MG1, ctx1.e)
    inp2 = StepInput(MG1, frozenset([(G[1], G[0])]))
    ctx2 = make_context(inp2)
    MG2 = build_generic(ctx2, seed=1).MG
    assert check_absoluteness(MG1, MG2, ctx1.e)
    assert decode_relation(MG2, ctx1.e) == {(G[0], G[1])}
    assert decode_relation(MG2, ctx2.e) == {(G[1], G[0])}


def test_absoluteness_detects_non_separated_extension():
    ctx = make_context(step([(G[0], G[1])]))
    MG = build_generic(ctx).MG
    # a new triangle anchored at e: e, c' -> s', and s', t, t' pairwise F-defined
    top = max(x.id for x in MG.order) + 1
    c2, s, t2, t3, w1, w2, w3 = (Element(top + i) for i in range(7))
    e = ctx.e
    lt = set(MG.order.lt) | {(e, s), (c2, s), (s, w1), (t2, w1), (s, w2), (t3, w2), (t2, w3), (t3, w3)}
    lt |= {(a, s) for a in MG.order.down(e)}
    P = transitive_closure(lt, MG.carrier | {c2, s, t2, t3, w1, w2, w3})
    F = {**MG.F, pair(e, c2): s, pair(s, t2): w1, pair(s, t3): w2, pair(t2, t3): w3}
    big = Creature(P, F, MG.H)
    with pytest.raises(PreconditionFailed):
        check_absoluteness(MG, big, e)


def test_two_step_e_points_are_tagged_with_step():
    ctx1 = make_context(step([(G[0], G[1])]))
    MG1 = build_generic(ctx1).MG
    ctx2 = make_context(StepInput(MG1, frozenset()))
    assert ctx1.e.step == 1 and ctx2.e.step == 2
