"""Finite audits of the four smallness conditions and the monotone-map bound.

Every verdict carries a witness that can be re-checked without this module:
an antichain, an element with its down-set, a move-set, or a certificate.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import BadInput, BudgetExceeded, NotMonotone
from .logic.definability import (DefinitionCertificate, certify, check_monotone, finite_relation_formula,
                                 synthesize_monotone_definition)
from .logic.evaluate import DEFAULT_BUDGET
from .order import ANTICHAIN_SEARCH_LIMIT, Element, Poset, max_antichain

EXHAUSTIVE_G_LIMIT = 6


@dataclass(frozen=True)
class AuditConfig:
    small_threshold: int
    eval_budget: int | None = DEFAULT_BUDGET
    antichain_search_limit: int = ANTICHAIN_SEARCH_LIMIT

    def check(self, P: Poset) -> None:
        if self.small_threshold < 0:
            raise BadInput("small_threshold must be nonnegative", self.small_threshold)
        if self.small_threshold > len(P):
            raise BadInput(f"small_threshold {self.small_threshold} exceeds carrier size {len(P)}",
                           self.small_threshold)


@dataclass
class AuditReport:
    condition: str
    passed: bool
    size: int
    threshold: int
    witness: object = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"condition": self.condition, "passed": self.passed, "size": self.size,
                "threshold": self.threshold, "witness": _json_witness(self.witness), **self.extra}


def _json_witness(w):
    if isinstance(w, Element):
        return w.id
    if isinstance(w, (set, frozenset)):
        return sorted(_json_witness(x) for x in w)
    if isinstance(w, (list, tuple)):
        return [_json_witness(x) for x in w]
    if isinstance(w, DefinitionCertificate):
        return w.to_json()
    return w


def audit_c1(P: Poset, cfg: AuditConfig) -> AuditReport:
    """Largest antichain against the threshold."""
    cfg.check(P)
    A = max_antichain(P, search_limit=cfg.antichain_search_limit)
    return AuditReport("C1", len(A) < cfg.small_threshold, len(A), cfg.small_threshold, A)


def move_set(P: Poset, g: Mapping[Element, Element]) -> frozenset[Element]:
    for x in P:
        if x not in g:
            raise BadInput(f"map undefined at {x!r}", x)
    return frozenset(g[x] for x in P if g[x] != x)


def audit_c2(P: Poset, g: Mapping[Element, Element], cfg: AuditConfig) -> AuditReport:
    """Smallest A with g(x) in A or g(x) = x everywhere is the move-set itself."""
    cfg.check(P)
    A = move_set(P, g)
    return AuditReport("C2", len(A) < cfg.small_threshold, len(A), cfg.small_threshold, A)


def audit_c2_exhaustive(P: Poset, cfg: AuditConfig) -> AuditReport:
    """C2 over every monotone self-map; only for carriers of at most six elements."""
    cfg.check(P)
    if len(P) > EXHAUSTIVE_G_LIMIT:
        raise BudgetExceeded(f"exhaustive map enumeration is capped at {EXHAUSTIVE_G_LIMIT} elements", len(P))
    worst, worst_g, count = -1, None, 0
    for g in monotone_maps(P):
        count += 1
        A = move_set(P, g)
        if len(A) > worst:
            worst, worst_g = len(A), g
    witness = sorted((x.id, worst_g[x].id) for x in P) if worst_g else []
    return AuditReport("C2*", worst < cfg.small_threshold, worst, cfg.small_threshold, witness,
                       {"maps": count})


def audit_c3(P: Poset, cfg: AuditConfig) -> AuditReport:
    """Largest strict down-set {y : y < x}, with the element attaining it."""
    cfg.check(P)
    best, best_x = 0, None
    for x in P.elements:
        n = P.down_bits(x).bit_count()
        if best_x is None or n > best:
            best, best_x = n, x
    return AuditReport("C3", best < cfg.small_threshold, best, cfg.small_threshold, best_x)


def audit_c4_sample(P: Poset, sample: Iterable[Iterable[tuple[Element, Element]]],
                    cfg: AuditConfig) -> AuditReport:
    """Define each small sampled pair-set by a finite disjunction and verify it."""
    cfg.check(P)
    certs = []
    for S in sample:
        S = frozenset(tuple(p) for p in S)
        if len(S) >= cfg.small_threshold:
            raise BadInput(f"sampled set of size {len(S)} is not small", len(S))
        certs.append(certify(S, finite_relation_formula(S), P, budget=cfg.eval_budget))
    bad = [c for c in certs if not c.verified]
    return AuditReport("C4", not bad, len(certs), cfg.small_threshold, bad[0] if bad else None,
                       {"verified": len(certs) - len(bad)})


def c4_sample(P: Poset, g: Mapping[Element, Element] | None, cfg: AuditConfig, n_random: int,
              rng: random.Random, cert: DefinitionCertificate | None = None) -> list[frozenset]:
    """Random small pair-sets plus, given g, the graphs of g on P0 and on P1."""
    out = [frozenset()]
    if g is not None:
        if cert is None:
            cert = synthesize_monotone_definition(P, g, cfg.small_threshold, budget=cfg.eval_budget)
        for key in ("P0", "P1"):
            part = [P.by_id(i) for i in cert.details[key]]
            graph = frozenset((x, g[x]) for x in part)
            if len(graph) < cfg.small_threshold:
                out.append(graph)
    elems = P.elements
    cap = max(cfg.small_threshold - 1, 0)
    for _ in range(n_random):
        k = rng.randint(0, cap) if cap else 0
        out.append(frozenset((rng.choice(elems), rng.choice(elems)) for _ in range(k)))
    return out


@dataclass
class FullAudit:
    reports: list[AuditReport]
    certificate: DefinitionCertificate | None

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def ok(self) -> bool:
        """No violation: whenever every condition passes, the synthesized definition verifies."""
        if self.certificate is None:
            return True
        return self.certificate.verified or not self.all_passed

    def to_json(self) -> dict:
        return {"all_passed": self.all_passed, "ok": self.ok,
                "reports": [r.to_json() for r in self.reports],
                "certificate": None if self.certificate is None else self.certificate.to_json()}


def audit_all(P: Poset, g: Mapping[Element, Element] | None, cfg: AuditConfig, *, seed: int = 0,
              n_random: int = 8) -> FullAudit:
    from .rng import named_rng

    reports = [audit_c1(P, cfg), audit_c3(P, cfg)]
    cert = None
    if g is not None:
        check_monotone(P, g)
        reports.insert(1, audit_c2(P, g, cfg))
        cert = synthesize_monotone_definition(P, g, cfg.small_threshold, budget=cfg.eval_budget)
    reports.append(audit_c4_sample(P, c4_sample(P, g, cfg, n_random, named_rng(seed, "c4"), cert), cfg))
    return FullAudit(reports, cert)


# -- monotone maps ------------------------------------------------------------------------


def monotone_maps(P: Poset) -> Iterator[dict[Element, Element]]:
    """Every monotone self-map, by backtracking along a linear extension."""
    order = sorted(P.elements, key=lambda x: (P.down_bits(x).bit_count(), x.id))
    elems = P.elements
    g: dict[Element, Element] = {}

    def extend(k: int):
        if k == len(order):
            yield dict(g)
            return
        x = order[k]
        below = [g[y] for y in P.down(x)]
        for v in elems:
            if all(P.leq(b, v) for b in below):
                g[x] = v
                yield from extend(k + 1)
        g.pop(x, None)

    yield from extend(0)


def random_monotone_map(P: Poset, rng: random.Random, moves: int = 4,
                        tries: int = 200) -> dict[Element, Element]:
    """Compose order-preserving moves starting from the identity.

    A point move redirects one element; a collapse sends a whole up-set
    to one value.  Each move is kept only if the map stays monotone.
    """
    g = {x: x for x in P}
    elems = P.elements
    done = 0
    for _ in range(tries):
        if done >= moves:
            break
        if rng.random() < 0.5:
            x = rng.choice(elems)
            # candidates: anything between the image of the down-set and of the up-set
            lo = [g[y] for y in P.down(x)]
            hi = [g[y] for y in P.up(x)]
            cands = [v for v in elems if v != g[x] and all(P.leq(b, v) for b in lo)
                     and all(P.leq(v, t) for t in hi)]
            if cands:
                g[x] = rng.choice(cands)
                done += 1
        else:
            a = rng.choice(elems)
            U = P.up(a) | {a}
            v = rng.choice(elems)
            trial = dict(g)
            for x in U:
                trial[x] = v
            try:
                check_monotone(P, trial)
            except NotMonotone:
                continue
            if trial != g:
                g = trial
                done += 1
    return g


def exhaustive_posets(n: int) -> Iterator[Poset]:
    """All partial orders on n labelled points up to isomorphism (n <= 5 is quick)."""
    from .order import transitive_closure

    elems = [Element(i) for i in range(n)]
    seen = set()
    pairs = [(i, j) for i in range(n) for j in range(n) if i < j]
    # every order has a linear extension, so orders compatible with 0 < 1 < ... suffice
    for mask in range(1 << len(pairs)):
        rel = [(elems[i], elems[j]) for k, (i, j) in enumerate(pairs) if mask >> k & 1]
        P = transitive_closure(rel, elems)
        if len(P.lt) != len(rel):
            continue
        key = _canonical(P)
        if key in seen:
            continue
        seen.add(key)
        yield P


def _canonical(P: Poset) -> tuple:
    n = len(P)
    idx = [[P.less(a, b) for b in P.elements] for a in P.elements]
    best = None
    for perm in itertools.permutations(range(n)):
        code = tuple(idx[perm[i]][perm[j]] for i in range(n) for j in range(n))
        if best is None or code < best:
            best = code
    return best


__all__ = [
    "AuditConfig",
    "AuditReport",
    "FullAudit",
    "audit_all",
    "audit_c1",
    "audit_c2",
    "audit_c2_exhaustive",
    "audit_c3",
    "audit_c4_sample",
    "c4_sample",
    "exhaustive_posets",
    "monotone_maps",
    "move_set",
    "random_monotone_map",
]
