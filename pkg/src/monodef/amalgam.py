"""Amalgamation of creatures: plain union, the marked amalgam p (+)_{x,y} q,
its three-clause order characterization, Delta-systems and the
strong-chain-condition probe."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Sequence

from .creature import Creature, creature_leq, is_separated_extension
from .errors import (CycleDetected, Disagreement, NotFound, PreconditionFailed,
                     TableViolation, UnknownElement)
from .order import Element, transitive_closure


def type_over(C: Creature, x: Element, r: Iterable[Element]) -> frozenset[Element]:
    """Below-set of ``x`` inside ``r``: the only part of a type that matters here."""
    r = frozenset(r)
    if x not in C.order:
        raise UnknownElement(f"{x!r} not in creature", x)
    for z in r:
        if z not in C.order:
            raise UnknownElement(f"{z!r} not in creature", z)
    return frozenset(z for z in r if C.order.less(z, x))


def intersection(p: Creature, q: Creature) -> Creature:
    return p.restrict(p.carrier & q.carrier)


def check_agreement(p: Creature, q: Creature) -> None:
    """Raise ``Disagreement`` unless order and F of p and q coincide on p ∩ q."""
    common = sorted(p.carrier & q.carrier, key=lambda e: e.id)
    for a, b in product(common, repeat=2):
        if a != b and p.order.less(a, b) != q.order.less(a, b):
            raise Disagreement("orders disagree on the intersection", (a, b))
    cs = frozenset(common)
    for key in set(p.F) | set(q.F):
        if key <= cs and p.F.get(key) != q.F.get(key):
            raise Disagreement("F disagrees on the intersection", tuple(sorted(key)))


def oplus(p: Creature, q: Creature) -> Creature:
    check_agreement(p, q)
    order = transitive_closure(p.order.lt | q.order.lt, p.carrier | q.carrier)
    return Creature(order, {**p.F, **q.F}, p.H | q.H)


def amal_preconditions(p: Creature, x: Element, q: Creature, y: Element) -> list[str]:
    """Names of failed hypotheses for the marked amalgam (empty list: all hold)."""
    failed = []
    if x not in p.order:
        return ["x in p"]
    if y not in q.order:
        return ["y in q"]
    try:
        check_agreement(p, q)
    except Disagreement:
        return ["agreement on p ∩ q"]
    r = intersection(p, q)
    for name, c in (("p", p), ("q", q)):
        try:
            if not is_separated_extension(r, c):
                failed.append(f"{name} separated over r")
        except PreconditionFailed:
            failed.append(f"{name} end extension of r")
    if x == y:
        if x not in r.order:
            failed.append("x, y outside r")
    elif x in r.order or y in r.order:
        failed.append("x, y outside r")
    if type_over(p, x, r.carrier) != type_over(q, y, r.carrier):
        failed.append("equal type over r")
    return failed


def _amal_order(p: Creature, x: Element, q: Creature, y: Element):
    extra = {(x, y)} if x != y else set()
    return transitive_closure(p.order.lt | q.order.lt | extra, p.carrier | q.carrier)


def amal(p: Creature, x: Element, q: Creature, y: Element, *, check: bool = True) -> Creature:
    """Order = transitive closure of <=_p, <=_q and (x, y); F and H are unions."""
    if check:
        failed = amal_preconditions(p, x, q, y)
        if failed:
            raise PreconditionFailed(f"amalgam hypotheses fail: {', '.join(failed)}", tuple(failed))
    try:
        order = _amal_order(p, x, q, y)
    except CycleDetected as exc:
        if check:
            raise AssertionError(f"cycle under valid hypotheses: {exc.witness}") from None
        raise
    return Creature(order, {**p.F, **q.F}, p.H | q.H)


def star_order(p: Creature, x: Element, q: Creature, y: Element, *,
               check: bool = True) -> frozenset[tuple[Element, Element]]:
    """The three-clause relation: a <_p b, or a <_q b, or (a <=_p x and y <=_q b)."""
    if check:
        failed = amal_preconditions(p, x, q, y)
        if failed:
            raise PreconditionFailed(f"amalgam hypotheses fail: {', '.join(failed)}", tuple(failed))
    rel = set(p.order.lt) | set(q.order.lt)
    P, Q = p.order, q.order
    below_x = [a for a in P if P.leq(a, x)]
    above_y = [b for b in Q if Q.leq(y, b)]
    for a in below_x:
        for b in above_y:
            if a != b:
                rel.add((a, b))
    return frozenset(rel)


def _clauses(p: Creature, x: Element, q: Creature, y: Element, a: Element, b: Element) -> list[str]:
    P, Q = p.order, q.order
    out = []
    if a in P and b in P and P.less(a, b):
        out.append("p")
    if a in Q and b in Q and Q.less(a, b):
        out.append("q")
    if a != b and a in P and b in Q and P.leq(a, x) and Q.leq(y, b):
        out.append("x")
    return out


CASE_TABLE = {
    ("p", "p"): "a <_p c",
    ("p", "q"): "b in p∩q, a <_q b, a <_q c",
    ("p", "x"): "a <=_p x, y <=_q c",
    ("q", "p"): "b in p∩q, a <_p b, a <_p c",
    ("q", "q"): "a <_q c",
    ("q", "x"): "b in p∩q, a <_p b, a <=_p x, y <=_q c",
    ("x", "p"): "impossible",
    ("x", "q"): "a <=_p x, y <=_q c",
    ("x", "x"): "impossible",
}


@dataclass
class NineCaseReport:
    cases: Counter = field(default_factory=Counter)
    violations: list[tuple[tuple[str, str], tuple[Element, Element, Element]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "cases": {f"{k1}{k2}": n for (k1, k2), n in sorted(self.cases.items())},
            "violations": [[f"{k1}{k2}", [w.id for w in wit]] for (k1, k2), wit in self.violations],
        }


def _case_conclusion(case, p, x, q, y, a, b, c) -> bool:
    P, Q = p.order, q.order
    in_r = b in P and b in Q

    def px(u):
        return u in P and P.leq(u, x)

    def qy(u):
        return u in Q and Q.leq(y, u)

    def plt(u, v):
        return u in P and v in P and P.less(u, v)

    def qlt(u, v):
        return u in Q and v in Q and Q.less(u, v)

    if case == ("p", "p"):
        return plt(a, c)
    if case == ("p", "q"):
        return in_r and qlt(a, b) and qlt(a, c)
    if case in (("p", "x"), ("x", "q")):
        return px(a) and qy(c)
    if case == ("q", "p"):
        return in_r and plt(a, b) and plt(a, c)
    if case == ("q", "q"):
        return qlt(a, c)
    if case == ("q", "x"):
        return in_r and plt(a, b) and px(a) and qy(c)
    # impossible rows; with x = y (degenerate amalgam) they can fire and must still compose
    return x == y and bool(_clauses(p, x, q, y, a, c))


def check_nine_cases(p: Creature, x: Element, q: Creature, y: Element, *,
                     strict: bool = False) -> NineCaseReport:
    """Walk every a <* b <* c and confirm the transitivity table row that fired."""
    failed = amal_preconditions(p, x, q, y)
    if failed:
        raise PreconditionFailed(f"amalgam hypotheses fail: {', '.join(failed)}", tuple(failed))
    elems = sorted(p.carrier | q.carrier, key=lambda e: e.id)
    kinds = {}
    for a in elems:
        for b in elems:
            if a != b:
                k = _clauses(p, x, q, y, a, b)
                if k:
                    kinds[(a, b)] = k
    report = NineCaseReport()
    for (a, b), k1s in kinds.items():
        for c in elems:
            k2s = kinds.get((b, c))
            if not k2s:
                continue
            for case in product(k1s, k2s):
                report.cases[case] += 1
                if not _case_conclusion(case, p, x, q, y, a, b, c):
                    report.violations.append((case, (a, b, c)))
                    if strict:
                        raise TableViolation(f"case {case} failed", (case, (a, b, c)))
    return report


def key_fact_common_ub(p: Creature, x: Element, q: Creature, y: Element,
                       a: Element, b: Element, c: Element, *, literal: bool = False) -> bool:
    """Whether the amalgam makes c a common strict upper bound of a and b.

    The amalgam's answer is compared with the three-clause criterion applied to
    a and to b separately; ``TableViolation`` if they disagree.  With
    ``literal=True`` the comparison is against the three joint cases
    (both below c in p, both below c in q, both below x in p with y <= c in q),
    which miss the mixed case a in p and q with a <_q c, b <=_p x, y <=_q c.
    """
    if not ({a, b} <= p.carrier or {a, b} <= q.carrier):
        raise PreconditionFailed("a and b must both lie in p or both in q", (a, b))
    A = amal(p, x, q, y).order
    lhs = c in A and a in A and b in A and A.less(a, c) and A.less(b, c)
    if literal:
        P, Q = p.order, q.order

        def both(O, u, v, w):
            return all(t in O for t in (u, v, w)) and O.less(u, w) and O.less(v, w)

        rhs = (both(P, a, b, c) or both(Q, a, b, c)
               or ({a, b} <= P.carrier and P.leq(a, x) and P.leq(b, x) and c in Q and Q.leq(y, c)
                   and c not in (a, b)))
    else:
        rhs = bool(_clauses(p, x, q, y, a, c)) and bool(_clauses(p, x, q, y, b, c))
    if lhs != rhs:
        raise TableViolation("common-upper-bound criterion disagrees with the amalgam", (a, b, c))
    return lhs


# -- Delta-systems ---------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaSystem:
    indices: frozenset[int]
    heart: frozenset
    exact: bool = True

    def check(self, family: Sequence[Iterable]) -> bool:
        sets = [frozenset(family[i]) for i in sorted(self.indices)]
        return all(a & b == self.heart for a, b in combinations(sets, 2))


DELTA_EXACT_LIMIT = 20


def find_delta_system(family: Sequence[Iterable], min_size: int = 2) -> DeltaSystem:
    """Largest sub-family with a common pairwise intersection.

    Exact for families of at most 20 sets; above that a greedy pass per
    candidate heart, flagged ``exact=False``.
    """
    sets = [frozenset(s) for s in family]
    n = len(sets)
    if n == 0 or min_size > n:
        raise NotFound(f"no Delta-system of size {min_size} in a family of {n}")
    exact = n <= DELTA_EXACT_LIMIT
    best: tuple[int, tuple[int, ...], frozenset] = (1, (0,), sets[0])
    hearts = sorted({a & b for a, b in combinations(sets, 2)}, key=lambda h: (len(h), sorted(map(repr, h))))
    for heart in hearts:
        members = [i for i in range(n) if heart <= sets[i]]
        petals = {i: sets[i] - heart for i in members}
        conflict = {i: {j for j in members if j != i and petals[i] & petals[j]} for i in members}
        chosen = _max_independent(members, conflict) if exact else _greedy_independent(members, conflict)
        key = (len(chosen), tuple(sorted(chosen)))
        if len(chosen) >= 2 and (key[0] > best[0] or (key[0] == best[0] and key[1] < best[1])):
            best = (key[0], key[1], heart)
    size, idx, heart = best
    if size < min_size:
        raise NotFound(f"largest Delta-system has {size} sets, wanted {min_size}", size)
    return DeltaSystem(frozenset(idx), heart, exact)


def _max_independent(nodes: list[int], conflict: dict[int, set[int]]) -> list[int]:
    # include-first DFS over sorted nodes: the first maximum found is lexicographically least
    best: list[int] = []

    def grow(chosen: list[int], cand: list[int]) -> None:
        nonlocal best
        if not cand:
            if len(chosen) > len(best):
                best = chosen
            return
        if len(chosen) + len(cand) <= len(best):
            return
        i = cand[0]
        grow(chosen + [i], [j for j in cand[1:] if j not in conflict[i]])
        grow(chosen, cand[1:])

    grow([], sorted(nodes))
    return best


def _greedy_independent(nodes: list[int], conflict: dict[int, set[int]]) -> list[int]:
    chosen: list[int] = []
    for i in sorted(nodes, key=lambda i: (len(conflict[i]), i)):
        if not any(j in conflict[i] for j in chosen):
            chosen.append(i)
    return chosen


# -- strong chain condition probe -------------------------------------------------------


@dataclass
class ProbeResult:
    status: str  # "found" or "exhausted"
    pair: tuple[int, int] | None = None
    amalgam: Creature | None = None
    rejected: dict[tuple[int, int], str] = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status == "found"


def scc_probe(M: Creature, X_list: Sequence[tuple[Creature, Element]]) -> ProbeResult:
    """Search, lexicographically over alpha < beta, for a marked amalgam that sits inside M."""
    for k, (X, x) in enumerate(X_list):
        if x not in X.order:
            raise PreconditionFailed(f"marked element of X_{k} is not in X_{k}", k)
        if not creature_leq(X, M):
            raise PreconditionFailed(f"X_{k} is not a substructure of M", k)
    rejected = {}
    for a, b in combinations(range(len(X_list)), 2):
        (Xa, xa), (Xb, xb) = X_list[a], X_list[b]
        failed = amal_preconditions(Xa, xa, Xb, xb)
        if failed:
            rejected[(a, b)] = failed[0]
            continue
        A = amal(Xa, xa, Xb, xb, check=False)
        if creature_leq(A, M):
            return ProbeResult("found", (a, b), A, rejected)
        rejected[(a, b)] = "amalgam not inside M"
    return ProbeResult("exhausted", None, None, rejected)


__all__ = [
    "CASE_TABLE",
    "DeltaSystem",
    "NineCaseReport",
    "ProbeResult",
    "amal",
    "amal_preconditions",
    "check_agreement",
    "check_nine_cases",
    "find_delta_system",
    "intersection",
    "key_fact_common_ub",
    "oplus",
    "scc_probe",
    "star_order",
    "type_over",
]
