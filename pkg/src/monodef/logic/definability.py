"""Definability tools: the upper-set encoding of a monotone map, the
first-order decoder for coded relations, the lower-fringe construction and
the definition synthesizer for monotone maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ..errors import NotAFunctionGraph, NotMonotone
from ..order import Element, Poset
from .evaluate import DEFAULT_BUDGET, extension
from .formula import (FALSE, Formula, Fresh, Implies, Not, conj, disj, eq, exists, forall, le, lt, neq,
                      parameters, to_sexpr)


# -- Fact: g is recoverable from {(x, y) : g(x) <= y} ---------------------------------


def upper_graph(P: Poset, g: Mapping[Element, Element]) -> frozenset[tuple[Element, Element]]:
    """B = {(x, y) : g(x) <= y}."""
    return frozenset((x, y) for x in P for y in P if P.leq(g[x], y))


def graph_transform(B: Iterable[tuple[Element, Element]], P: Poset) -> dict[Element, Element]:
    """Recover g from B via  g(x) = z  iff  (x, z) in B and z <= y for all (x, y) in B.

    Each row of B must be exactly the up-set of its least element; anything
    else is not the encoding of a function.
    """
    rows: dict[Element, set[Element]] = {x: set() for x in P}
    for x, y in B:
        rows[x].add(y)
    g = {}
    for x in P.elements:
        ys = rows[x]
        cands = [z for z in ys if all(P.leq(z, y) for y in ys)]
        if len(cands) != 1:
            raise NotAFunctionGraph(f"no unique value at {x!r}", x)
        z = cands[0]
        if len(ys) != P.up_bits(z).bit_count() + 1:
            raise NotAFunctionGraph(f"row of {x!r} is not the up-set of {z!r}", x)
        g[x] = z
    return g


def check_monotone(P: Poset, g: Mapping[Element, Element]) -> None:
    for x in P:
        if x not in g:
            raise NotAFunctionGraph(f"map undefined at {x!r}", x)
    for x, y in P.lt:
        if not P.leq(g[x], g[y]):
            raise NotMonotone(f"{x!r} < {y!r} but g({x!r}) is not below g({y!r})", (x, y))


# -- lower fringe -------------------------------------------------------------------------


def lower_fringe(P: Poset, A: Iterable[Element], antichain: Iterable[Element] | None = None) -> frozenset[Element]:
    """Down-closure inside ``A`` of a maximal antichain of ``A``.

    The default antichain is the set of minimal elements of ``A``, which is
    always maximal in ``A``.  Every member of ``A`` is above (or equal to)
    some member of the result.
    """
    A = frozenset(A)
    if antichain is None:
        B = frozenset(a for a in A if not any(P.less(b, a) for b in A))
    else:
        B = frozenset(antichain)
        if not B <= A:
            raise ValueError("antichain must lie inside A")
        for a, b in ((a, b) for a in B for b in B if a != b):
            if P.comparable(a, b):
                raise ValueError("not an antichain")
        for a in A:
            if not any(P.comparable(a, b) for b in B):
                raise ValueError("antichain is not maximal in A")
    return frozenset(a for a in A if any(P.leq(a, b) for b in B))


# -- formulas for F and the decoder ---------------------------------------------------


def umub_formula(u, v, w, fresh: Fresh) -> Formula:
    """``F(u, v) = w`` defined from <=: u, v incomparable and w their least upper bound.

    In a finite order a unique minimal upper bound is the least one.
    """
    t = fresh("t")
    return conj(Not(le(u, v)), Not(le(v, u)), lt(u, w), lt(v, w),
                forall(t, Implies(conj(le(u, t), le(v, t)), le(w, t))))


def _base_point(s, fresh: Fresh) -> Formula:
    """s is the F-value of exactly one unordered pair."""
    u, v, u2, v2 = (fresh(n) for n in ("u", "v", "u", "v"))
    some = exists([u, v], umub_formula(u, v, s, fresh))
    two = exists([u, v, u2, v2], conj(umub_formula(u, v, s, fresh), umub_formula(u2, v2, s, fresh),
                                      Not(disj(conj(eq(u, u2), eq(v, v2)),
                                               conj(eq(u, v2), eq(v, u2))))))
    return conj(some, Not(two))


def _hits(z, t, delta, fresh: Fresh) -> Formula:
    """F(z, t) lies in the triangle ``delta``."""
    w = fresh("w")
    return exists(w, conj(disj(*(eq(w, d) for d in delta)), umub_formula(z, t, w, fresh)))


def _at_least(k: int, z, delta, fresh: Fresh) -> Formula:
    ts = [fresh("t") for _ in range(k)]
    parts = [_hits(z, t, delta, fresh) for t in ts]
    parts += [neq(a, b) for i, a in enumerate(ts) for b in ts[i + 1:]]
    return exists(ts, conj(*parts))


def _exactly(k: int, z, delta, fresh: Fresh) -> Formula:
    return conj(_at_least(k, z, delta, fresh), Not(_at_least(k + 1, z, delta, fresh)))


def build_decoder_formula(e: Element | int, x: str = "x", y: str = "y") -> Formula:
    """phi(x, y) with parameter e: some triangle with a unique base point anchored
    at e has the counts 2 (at x) and 3 (at y) for x != y, or 5 for x = y."""
    fresh = Fresh()
    s, c, t2, t3, w1, w2, w3 = (fresh(n) for n in ("s", "c", "t", "t", "w", "w", "w"))
    delta = (s, t2, t3)
    body = conj(
        umub_formula(e, c, s, fresh),
        umub_formula(s, t2, w1, fresh), umub_formula(s, t3, w2, fresh), umub_formula(t2, t3, w3, fresh),
        neq(t2, t3),
        _base_point(s, fresh), Not(_base_point(t2, fresh)), Not(_base_point(t3, fresh)),
        disj(conj(neq(x, y), _exactly(2, x, delta, fresh), _exactly(3, y, delta, fresh)),
             conj(eq(x, y), _exactly(5, x, delta, fresh))),
    )
    return exists([s, c, t2, t3, w1, w2, w3], body)


# -- certificates and the synthesizer ---------------------------------------------------


@dataclass
class DefinitionCertificate:
    target: frozenset
    formula: Formula
    parameters: tuple[Element, ...]
    verified: bool
    report: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"verified": self.verified,
                "formula": to_sexpr(self.formula),
                "parameters": [p.id for p in self.parameters],
                "mismatches": [[[a.id for a in t] for t in side] for side in self.report],
                "details": self.details}


def finite_relation_formula(S: Iterable[tuple[Element, ...]], variables=("x", "y")) -> Formula:
    """The finite disjunction naming every tuple of ``S`` by parameters."""
    rows = sorted(S, key=lambda t: tuple(e.id for e in t))
    return disj(*(conj(*(eq(v, a) for v, a in zip(variables, t))) for t in rows)) if rows else FALSE


def certify(target: Iterable[tuple[Element, ...]], phi: Formula, P: Poset, variables=("x", "y"), *,
            budget: int | None = DEFAULT_BUDGET, details: dict | None = None) -> DefinitionCertificate:
    target = frozenset(tuple(t) for t in target)
    got = extension(phi, P, variables, budget=budget)
    missing = sorted(target - got, key=lambda t: [e.id for e in t])
    extra = sorted(got - target, key=lambda t: [e.id for e in t])
    params = tuple(sorted(P.by_id(i) for i in parameters(phi)))
    report = [missing, extra] if (missing or extra) else []
    return DefinitionCertificate(target, phi, params, not report, report, details or {})


def claim1_holds(P: Poset, g, P0, P1) -> list[Element]:
    """alpha outside P0 where  g(alpha) = alpha  <=>  some fixed beta in P1 below  fails."""
    bad = []
    for a in P.elements:
        if a in P0:
            continue
        rhs = any(P.leq(b, a) and g[b] == b for b in P1)
        if (g[a] == a) != rhs:
            bad.append(a)
    return bad


def claim2_holds(P: Poset, g, P0, P1) -> list[tuple[Element, Element]]:
    """(alpha, i) outside P0, alpha moved, where  g(alpha) <= i  <=>  ... fails."""
    bad = []
    for a in P.elements:
        if a in P0 or g[a] == a:
            continue
        below = [c for c in P1 if P.leq(c, a)]
        for i in P.elements:
            rhs = all(P.leq(g[c], i) for c in below)
            if P.leq(g[a], i) != rhs:
                bad.append((a, i))
    return bad


def synthesize_monotone_definition(P: Poset, g: Mapping[Element, Element], small_threshold: int | None = None,
                                   *, budget: int | None = DEFAULT_BUDGET) -> DefinitionCertificate:
    """Define g following the proof shape: a small down-closed P0 containing every
    moved value, fringes of the fibres outside P0, and three cases."""
    check_monotone(P, g)
    moved_values = {g[a] for a in P if g[a] != a}
    P0 = set(moved_values)
    for v in moved_values:
        P0 |= P.down(v)
    P0 = frozenset(P0)
    outside = [a for a in P.elements if a not in P0]
    D = frozenset(a for a in outside if g[a] == a)
    fibres = {j: frozenset(a for a in outside if g[a] == j) for j in sorted(P0)}
    Dp = lower_fringe(P, D)
    fringes = {j: lower_fringe(P, Dj) for j, Dj in fibres.items() if Dj}
    P1 = frozenset(Dp.union(*fringes.values()))

    x, z = "x", "z"
    fresh = Fresh()
    in_p0 = disj(*(eq(x, p) for p in sorted(P0)))
    table = disj(*(conj(eq(x, p), eq(z, g[p])) for p in sorted(P0)))
    fixed = disj(*(le(b, x) for b in sorted(P1) if g[b] == b))

    def bound(i: str) -> Formula:
        # g(x) <= i  for moved x outside P0
        return conj(*(disj(Not(le(c, x)), le(g[c], i)) for c in sorted(P1)))

    i = fresh("i")
    moved = conj(disj(*(eq(z, p) for p in sorted(P0))), bound(z),
                 forall(i, Implies(bound(i), le(z, i))))
    phi = disj(conj(in_p0, table),
               conj(Not(in_p0), fixed, eq(z, x)),
               conj(Not(in_p0), Not(fixed), moved))
    graph = frozenset((a, g[a]) for a in P)
    c1 = claim1_holds(P, g, P0, P1)
    c2 = claim2_holds(P, g, P0, P1)
    details = {"P0": sorted(a.id for a in P0), "P1": sorted(a.id for a in P1),
               "claim1_failures": [a.id for a in c1],
               "claim2_failures": [[a.id, b.id] for a, b in c2[:20]],
               "small_threshold": small_threshold,
               "P0_small": None if small_threshold is None else len(P0) < small_threshold,
               "P1_small": None if small_threshold is None else len(P1) < small_threshold}
    cert = certify(graph, phi, P, (x, z), budget=budget, details=details)
    cert.verified = cert.verified and not c1 and not c2
    return cert


__all__ = [
    "DefinitionCertificate",
    "build_decoder_formula",
    "certify",
    "check_monotone",
    "claim1_holds",
    "claim2_holds",
    "umub_formula",
    "finite_relation_formula",
    "graph_transform",
    "lower_fringe",
    "synthesize_monotone_definition",
    "upper_graph",
]
