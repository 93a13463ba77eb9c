from __future__ import annotations

import oracles
import pytest

from monodef.builder import (Requirement, audit_exactness, build_generic, extend_to_meet,
                             is_condition, minimal_condition, schedule_requirements)
from monodef.coder import StepInput, encode_creature, make_context
from monodef.creature import Creature, creature_leq, is_separated_extension, pair
from monodef.errors import PreconditionFailed
from monodef.generators import hazard_free_step
from monodef.order import Element, Poset, antichain, chain, minimal_upper_bounds, transitive_closure
from monodef.rng import named_rng

G = [Element(i) for i in range(4)]


def one_pair_ctx():
    return make_context(StepInput(Creature(antichain(G[:2])), frozenset([(G[0], G[1])])))


def ground_f_ctx():
    P = transitive_closure([(G[0], G[2]), (G[1], G[2])], G[:3])
    ground = Creature(P, {pair(G[0], G[1]): G[2]})
    return make_context(StepInput(ground, frozenset([(G[0], G[1])])))


def test_minimal_condition_is_valid():
    ctx = one_pair_ctx()
    c = minimal_condition(ctx)
    assert c.c.carrier == {ctx.e}
    assert is_condition(c).ok


def test_gadget_vertex_without_its_omega_is_not_a_condition():
    ctx = one_pair_ctx()
    (g,) = ctx.alloc.gadgets.values()
    c = Creature(Poset([ctx.e, g.a]))
    assert "omega closure" in is_condition(c, ctx).axioms()


def test_non_minimal_coded_value_is_a_creature_violation():
    ctx = one_pair_ctx()
    res = build_generic(ctx)
    (g,) = ctx.alloc.gadgets.values()
    # a fresh spare above alpha and an A-point, below a: a stops being a minimal upper bound
    z = Element(ctx.alloc.spares.start, "witness:pair", ctx.alloc.step)
    lt = set(res.MG.order.lt) | {(G[0], z), (g.A[0], z), (z, g.a)}
    lt |= {(z, u) for u in res.MG.order.up(g.a)}
    P = transitive_closure(lt, res.MG.carrier | {z})
    bad = Creature(P, res.MG.F, res.MG.H)
    axioms = is_condition(bad, ctx).axioms()
    assert "creature: F-minimality" in axioms


def test_schedule_examples():
    ctx = one_pair_ctx()
    assert schedule_requirements(ctx, []) == []
    reqs = schedule_requirements(ctx, ctx.default_core(), policy="all")
    kinds = {r.kind for r in reqs}
    assert kinds <= {"element", "pair_witness", "extra_ub"}
    elems = [r for r in reqs if r.kind == "element"]
    assert {r.args[0] for r in elems} == set(ctx.default_core())
    witnessed = [r for r in reqs if r.kind == "pair_witness"]
    assert len(witnessed) % 2 == 0
    # a comparable pair never gets a witness requirement
    for r in witnessed:
        x, y = r.args
        assert pair(x, y) != pair(G[0], ctx.alloc.gadgets[(0, 1)].a)


def test_extend_element_brings_the_whole_omega():
    ctx = one_pair_ctx()
    (g,) = ctx.alloc.gadgets.values()
    c = extend_to_meet(minimal_condition(ctx), Requirement("element", (g.a,)))
    assert g.members | {G[0], G[1]} <= c.c.carrier
    assert is_condition(c).ok


def test_two_witnesses_spoil_uniqueness_for_a_pair_of_a_points():
    ctx = one_pair_ctx()
    (g,) = ctx.alloc.gadgets.values()
    x, x2 = g.A
    c = extend_to_meet(minimal_condition(ctx), Requirement("element", (g.a,)))
    c = extend_to_meet(c, Requirement("pair_witness", (x, x2), 1))
    c = extend_to_meet(c, Requirement("pair_witness", (x, x2), 2))
    mubs = minimal_upper_bounds(c.c.order, x, x2)
    assert g.a in mubs and len(mubs) == 3
    assert is_condition(c).ok


def test_pair_witness_needs_an_incomparable_pair():
    ctx = one_pair_ctx()
    (g,) = ctx.alloc.gadgets.values()
    c = extend_to_meet(minimal_condition(ctx), Requirement("element", (g.a,)))
    with pytest.raises(PreconditionFailed):
        extend_to_meet(c, Requirement("pair_witness", (G[0], g.a), 1))


def test_ground_value_is_placed_below_gamma():
    ctx = ground_f_ctx()
    res = build_generic(ctx)
    (g,) = ctx.alloc.gadgets.values()
    assert res.MG.order.less(G[2], g.gamma)
    assert minimal_upper_bounds(res.MG.order, G[0], G[1]) == {G[2]}


def test_one_pair_build_has_the_gadget_shape():
    ctx = one_pair_ctx()
    res = build_generic(ctx)
    (g,) = ctx.alloc.gadgets.values()
    core = [x for x in res.MG.order if x.kind != "witness"]
    cover = set(res.MG.order.restrict(core).hasse())
    want = {(G[0], g.a), (G[1], g.b), (ctx.e, g.c), (g.a, g.gamma), (g.b, g.gamma), (g.c, g.gamma)}
    want |= {(x, g.a) for x in g.A} | {(x, g.b) for x in g.B} | {(x, g.c) for x in g.C}
    assert cover == want


def test_empty_relation_build():
    inp = StepInput(Creature(antichain(G[:3])), frozenset())
    ctx = make_context(inp)
    res = build_generic(ctx, policy="all")
    kinds = {x.kind for x in res.MG.order}
    assert kinds <= {"ground", "e_point", "witness"}
    assert ctx.e in res.MG.order
    assert audit_exactness(res.MG, ctx, build=res).ok


def test_witness_twins_are_maximal_with_equal_down_sets():
    ctx = one_pair_ctx()
    MG = build_generic(ctx).MG
    P = MG.order
    wit = [x for x in P if x.kind == "witness"]
    assert wit
    by_down: dict = {}
    for w in wit:
        assert not P.up(w)
        by_down.setdefault(P.down(w), []).append(w)
    assert all(len(ws) >= 2 for ws in by_down.values())
    for x, y in P.incomparable_pairs():
        if x.kind == "witness" or y.kind == "witness":
            assert len(oracles.mubs(P.lt, P.carrier, x, y)) != 1


def test_conditions_along_the_build():
    ctx = one_pair_ctx()
    res = build_generic(ctx)
    prev = None
    for c in res.conditions():
        assert is_condition(c, ctx).ok
        if prev is not None:
            assert creature_leq(prev, c)
        low = c.restrict(x for x in c.carrier if x in ctx.ground.order)
        assert is_separated_extension(low, c)
        prev = c


def test_seed_changes_log_but_not_verdicts():
    for i in range(10):
        ctx = make_context(hazard_free_step(named_rng(3, "seed-test", str(i)), diagonal=False))
        runs = [build_generic(ctx, seed=s) for s in (0, 1, 2)]
        verdicts = [audit_exactness(r.MG, ctx, build=r).to_json() for r in runs]
        assert verdicts[0] == verdicts[1] == verdicts[2]
        assert len({tuple(r.log_lines()) for r in runs}) >= 1


def test_depth_zero_truncates_the_repair_chain():
    ctx = ground_f_ctx()
    res = build_generic(ctx, depth_budget=0)
    rep = audit_exactness(res.MG, ctx, build=res)
    assert not rep.ok and rep.classes() == {"chain-truncation": 1}
    res3 = build_generic(ctx, depth_budget=3)
    assert audit_exactness(res3.MG, ctx, build=res3).ok


def test_unbuilt_encoding_flags_every_coded_pair():
    ctx = one_pair_ctx()
    C = encode_creature(ctx)
    rep = audit_exactness(C, ctx)
    flagged = {pair(*d.pair) for d in rep.discrepancies}
    assert flagged == {k for k in ctx.fspec if len(k) == 2}


def test_hazard_free_instances_without_diagonal_are_exact():
    for i in range(15):
        inp = hazard_free_step(named_rng(9, "exact", str(i)), diagonal=False)
        if any(inp.ground.order.comparable(a, b) for a, b in inp.R):
            continue
        ctx = make_context(inp)
        res = build_generic(ctx, seed=i)
        assert audit_exactness(res.MG, ctx, build=res).ok


def test_diagonal_pair_is_a_classified_finite_obstruction():
    inp = StepInput(Creature(antichain(G[:2])), frozenset([(G[0], G[0])]))
    ctx = make_context(inp)
    res = build_generic(ctx)
    rep = audit_exactness(res.MG, ctx, build=res)
    assert rep.discrepancies
    assert set(rep.classes()) == {"finite-obstruction"}
    (g,) = ctx.alloc.gadgets.values()
    # gamma is the least upper bound of an A-value and a B-point, yet F is undefined there
    y = g.B[0]
    assert minimal_upper_bounds(res.MG.order, g.a, y) == {g.gamma}
    assert ctx.fspec.get(pair(g.a, y)) is None


def test_chain_ground_hazard_is_classified():
    inp = StepInput(Creature(chain(G[:2])), frozenset([(G[0], G[1])]))
    ctx = make_context(inp)
    res = build_generic(ctx)
    rep = audit_exactness(res.MG, ctx, build=res)
    assert set(rep.classes()) <= {"finite-obstruction"}
