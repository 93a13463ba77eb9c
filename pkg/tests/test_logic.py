from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, strategies as st

import oracles
from monodef.audit import exhaustive_posets, random_monotone_map
from monodef.builder import build_generic
from monodef.coder import StepInput, decode_relation, make_context
from monodef.creature import Creature
from monodef.errors import BudgetExceeded, FormulaSyntaxError, NotAFunctionGraph, NotMonotone, UnboundVariable
from monodef.generators import random_poset
from monodef.logic import (build_decoder_formula, certify, check_monotone, claim1_holds,
                           claim2_holds, evaluate, evaluate_naive, extension, extension_naive,
                           finite_relation_formula, graph_transform, lower_fringe, parse,
                           synthesize_monotone_definition, to_sexpr, upper_graph)
from monodef.logic.formula import (FALSE, TRUE, And, Exists, Forall, Implies, Not, Or, eq, exists, forall, free_vars,
                                   le, lt, parameters)
from monodef.order import Element, antichain, chain, transitive_closure
from monodef.rng import named_rng

E = [Element(i) for i in range(12)]


def diamond():
    return transitive_closure([(E[0], E[1]), (E[0], E[2]), (E[1], E[3]), (E[2], E[3])], E[:4])


def test_reflexivity_holds_everywhere():
    D = diamond()
    for x in D:
        assert evaluate(le("x", "x"), D, {"x": x})


def test_top_of_chain_has_nothing_above():
    C = chain(E[:3])
    phi = exists("y", lt("x", "y"))
    assert not evaluate(phi, C, {"x": E[2]})
    assert evaluate(phi, C, {"x": E[1]})


def test_extension_of_le_on_diamond():
    got = extension(le("x", "y"), diamond(), ("x", "y"))
    want = {(E[i], E[j]) for i, j in [(0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (0, 2), (0, 3), (1, 3), (2, 3)]}
    assert got == want


def test_extension_of_false_and_parameter_atom():
    D = diamond()
    assert extension(FALSE, D, ("x",)) == frozenset()
    assert extension(le(E[0], "y"), D, ("y",)) == {(x,) for x in D}


def test_unbound_variables_raise():
    with pytest.raises(UnboundVariable):
        evaluate(le("x", "y"), diamond(), {"x": E[0]})
    with pytest.raises(UnboundVariable):
        extension(le("x", "y"), diamond(), ("x",))


def test_budget_is_enforced():
    P = antichain(E[:12])
    phi = forall(["a", "b", "c"], Implies(le("a", "b"), exists("d", Not(le("c", "d")))))
    assert evaluate(phi, P, {})
    with pytest.raises(BudgetExceeded):
        evaluate(phi, P, {}, budget=20)


def test_parse_round_trip_and_errors():
    text = "(forall t (-> (and (le x t) (le @3 t)) (exists w (or (eq w t) (not (le w @0))))))"
    phi = parse(text)
    assert to_sexpr(phi) == text
    assert free_vars(phi) == {"x"} and parameters(phi) == {0, 3}
    for bad in ["(le x)", "(foo x y)", "(le x y", "(le x y))", "(exists 3x (le x x))", "(le @z x)"]:
        with pytest.raises(FormulaSyntaxError):
            parse(bad)
    assert parse("(and)") == TRUE and parse("(or)") == FALSE


VARS = ["x", "y", "z"]


def formulas(depth=3):
    terms = st.one_of(st.sampled_from(VARS), st.integers(0, 5))
    atoms = st.one_of(st.builds(le, terms, terms), st.builds(eq, terms, terms), st.just(TRUE), st.just(FALSE))

    def extend(inner):
        return st.one_of(
            st.builds(Not, inner),
            st.builds(lambda a, b: And((a, b)), inner, inner),
            st.builds(lambda a, b: Or((a, b)), inner, inner),
            st.builds(Implies, inner, inner),
            st.builds(Exists, st.sampled_from(VARS), inner),
            st.builds(Forall, st.sampled_from(VARS), inner),
        )

    return st.recursive(atoms, extend, max_leaves=8)


@given(formulas(), st.integers(0, 10_000))
def test_solver_agrees_with_naive_evaluation(phi, seed):
    rng = random.Random(seed)
    P = random_poset(rng, rng.randint(6, 8), 0.35)
    fv = tuple(sorted(free_vars(phi)))
    assert extension(phi, P, fv) == extension_naive(phi, P, fv)
    env = {v: rng.choice(P.elements) for v in fv}
    assert evaluate(phi, P, env) == evaluate_naive(phi, P, env)


def test_graph_transform_examples():
    C = chain(E[:4])
    ident = {x: x for x in C}
    assert graph_transform(upper_graph(C, ident), C) == ident
    const = {x: E[3] for x in C}
    assert graph_transform(upper_graph(C, const), C) == const


def test_graph_transform_mutation():
    D = diamond()
    g = {E[0]: E[0], E[1]: E[1], E[2]: E[3], E[3]: E[3]}
    B = set(upper_graph(D, g))
    with pytest.raises(NotAFunctionGraph):
        graph_transform(B - {(E[0], E[0])}, D)
    with pytest.raises(NotAFunctionGraph):
        graph_transform(B | {(E[1], E[2])}, D)
    # every single-pair deletion either fails or decodes to a different map
    for pr in B:
        try:
            assert graph_transform(B - {pr}, D) != g
        except NotAFunctionGraph:
            pass


def test_graph_transform_inverts_every_function_on_small_posets():
    for n in range(1, 5):
        for P in exhaustive_posets(n):
            elems = P.elements
            for values in itertools.product(elems, repeat=n):
                g = dict(zip(elems, values))
                assert graph_transform(upper_graph(P, g), P) == g


def test_check_monotone():
    C = chain(E[:3])
    with pytest.raises(NotMonotone) as info:
        check_monotone(C, {E[0]: E[2], E[1]: E[0], E[2]: E[2]})
    assert info.value.witness == (E[0], E[1])
    with pytest.raises(NotAFunctionGraph):
        check_monotone(C, {E[0]: E[0]})


def test_lower_fringe_examples():
    A = antichain(E[:4])
    assert lower_fringe(A, E[:4]) == set(E[:4])
    D = diamond()
    assert lower_fringe(D, E[:4]) == {E[0]}
    assert lower_fringe(D, [E[1], E[2], E[3]], antichain=[E[1], E[2]]) == {E[1], E[2]}
    with pytest.raises(ValueError):
        lower_fringe(D, [E[1], E[2], E[3]], antichain=[E[1]])
    with pytest.raises(ValueError):
        lower_fringe(D, E[:4], antichain=[E[0], E[1]])


def test_lower_fringe_covers_from_below():
    rng = random.Random(1)
    for _ in range(100):
        P = random_poset(rng, rng.randint(1, 12), 0.3)
        A = [x for x in P if rng.random() < 0.6]
        Ap = lower_fringe(P, A)
        assert Ap == oracles.lower_fringe(P.lt, A)
        assert all(any(P.leq(c, a) for c in Ap) for a in A)


def test_finite_relation_formula_and_certify():
    C = chain(E[:3])
    cert = certify(set(), finite_relation_formula(set()), C)
    assert cert.verified and to_sexpr(cert.formula) == "false"
    S = {(x, x) for x in C}
    cert = certify(S, finite_relation_formula(S), C)
    assert cert.verified and set(cert.parameters) == set(C.elements)
    wrong = certify(S, finite_relation_formula({(E[0], E[0])}), C)
    assert not wrong.verified and wrong.report[0]


def test_umub_formula_is_the_unique_minimal_upper_bound_on_small_posets():
    from monodef.logic.definability import umub_formula
    from monodef.logic.formula import Fresh

    phi = umub_formula("u", "v", "w", Fresh())
    for n in range(1, 6):
        for P in exhaustive_posets(n):
            got = extension(phi, P, ("u", "v", "w"))
            want = {(u, v, w) for u in P for v in P for w in P
                    if oracles.mubs(P.lt, P.carrier, u, v) == {w}}
            assert got == want


def test_decoder_formula_on_a_structure_without_triangles():
    P = diamond()
    assert extension(build_decoder_formula(E[0]), P, ("x", "y")) == frozenset()


def test_decoder_formula_matches_decode_on_a_build():
    G = E[:3]
    inp = StepInput(Creature(antichain(G)), frozenset([(G[0], G[1]), (G[2], G[0])]))
    ctx = make_context(inp)
    MG = build_generic(ctx).MG
    got = extension(build_decoder_formula(ctx.e), MG.order, ("x", "y"))
    assert got == decode_relation(MG, ctx.e) == inp.R


def test_decoder_formula_reads_only_its_own_step():
    G = E[:2]
    ctx1 = make_context(StepInput(Creature(antichain(G)), frozenset([(G[0], G[1])])))
    MG1 = build_generic(ctx1).MG
    ctx2 = make_context(StepInput(MG1, frozenset([(G[1], G[0])])))
    MG2 = build_generic(ctx2, seed=1).MG
    phi1 = build_decoder_formula(ctx1.e)
    assert extension(phi1, MG2.order, ("x", "y")) == {(G[0], G[1])}
    assert extension(build_decoder_formula(ctx2.e), MG2.order, ("x", "y")) == {(G[1], G[0])}


def test_synthesis_identity_and_constant():
    D = diamond()
    ident = {x: x for x in D}
    cert = synthesize_monotone_definition(D, ident, 3)
    assert cert.verified and cert.details["P0"] == []
    const = {x: E[3] for x in D}
    cert = synthesize_monotone_definition(D, const, 3)
    assert cert.verified and cert.details["P0"] == [0, 1, 2, 3]


def test_synthesis_rejects_non_monotone_maps():
    C = chain(E[:3])
    with pytest.raises(NotMonotone):
        synthesize_monotone_definition(C, {E[0]: E[2], E[1]: E[0], E[2]: E[2]})


def test_synthesis_on_a_built_structure():
    G = E[:3]
    inp = StepInput(Creature(antichain(G)), frozenset([(G[0], G[1])]))
    ctx = make_context(inp)
    P = build_generic(ctx).MG.order
    for k in range(5):
        g = random_monotone_map(P, named_rng(4, "syn", str(k)), moves=3)
        cert = synthesize_monotone_definition(P, g, len(P))
        P0 = {P.by_id(i) for i in cert.details["P0"]}
        P1 = {P.by_id(i) for i in cert.details["P1"]}
        assert cert.verified
        assert claim1_holds(P, g, P0, P1) == [] and claim2_holds(P, g, P0, P1) == []


def test_synthesis_on_every_monotone_map_of_small_posets():
    from monodef.audit import monotone_maps

    for n in range(1, 5):
        for P in exhaustive_posets(n):
            for g in monotone_maps(P):
                assert synthesize_monotone_definition(P, g).verified
