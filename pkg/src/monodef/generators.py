"""Seeded instance generators shared by tests, the acceptance run and benchmarks."""

from __future__ import annotations

import itertools
import random
from typing import Iterator

from .amalgam import amal_preconditions, type_over
from .coder import StepInput
from .creature import Creature, pair
from .order import Element, Poset, minimal_upper_bounds, transitive_closure


def random_poset(rng: random.Random, n: int, p: float = 0.3, *, start: int = 0) -> Poset:
    """Random order compatible with the id order: each i < j kept with probability p, then closed."""
    E = [Element(start + i) for i in range(n)]
    pairs = [(E[i], E[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return transitive_closure(pairs, E)


def random_forest(rng: random.Random, n: int, p_root: float = 0.4) -> Poset:
    """Rooted trees growing upwards: every down-set is a chain, so no pair has an upper bound."""
    E = [Element(i) for i in range(n)]
    parent = {}
    for i in range(1, n):
        if rng.random() >= p_root:
            parent[i] = rng.randrange(i)
    return transitive_closure([(E[j], E[i]) for i, j in parent.items()], E)


def random_relation(rng: random.Random, carrier, k: int, *, diagonal: bool = True) -> frozenset:
    xs = sorted(carrier)
    out = set()
    for _ in range(k):
        a, b = rng.choice(xs), rng.choice(xs)
        if a == b and not diagonal:
            continue
        out.add((a, b))
    return frozenset(out)


def hazard_free_step(rng: random.Random, max_ground: int = 10, max_R: int = 8, *,
                     diagonal: bool = True) -> StepInput:
    """Antichain or forest ground with empty F, and a small relation on it."""
    n = rng.randint(1, max_ground)
    P = Poset(Element(i) for i in range(n)) if rng.random() < 0.5 else random_forest(rng, n)
    R = random_relation(rng, P.elements, rng.randint(0, max_R), diagonal=diagonal)
    return StepInput(Creature(P), R)


# -- amalgamation inputs --------------------------------------------------------------


def down_closed_sets(r: Poset) -> list[frozenset[Element]]:
    E = r.elements
    out = []
    for m in range(1 << len(E)):
        S = frozenset(E[i] for i in range(len(E)) if m >> i & 1)
        if all(r.down(s) <= S for s in S):
            out.append(S)
    return out


def _strict_orders_on_range(k: int) -> list[frozenset[tuple[int, int]]]:
    """Strict orders on 0..k-1 contained in the natural order (one per linear-extension class)."""
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    out = []
    for m in range(1 << len(pairs)):
        rel = {pairs[t] for t in range(len(pairs)) if m >> t & 1}
        if all((a, c) in rel for a, b in rel for b2, c in rel if b == b2):
            out.append(frozenset(rel))
    return out


def end_extensions(r: Poset, k: int, start: int) -> Iterator[Poset]:
    """Every end extension of r by k new points (ids from ``start``), up to relabelling them."""
    new = [Element(start + i) for i in range(k)]
    dcs = down_closed_sets(r)
    seen = set()
    for rel in _strict_orders_on_range(k):
        for downs in itertools.product(dcs, repeat=k):
            # a new point inherits the old part below its new predecessors
            if any(not downs[i] <= downs[j] for i, j in rel):
                continue
            key = _extension_key(r, rel, downs, k)
            if key in seen:
                continue
            seen.add(key)
            lt = set(r.lt) | {(new[i], new[j]) for i, j in rel}
            lt |= {(a, new[i]) for i in range(k) for a in downs[i]}
            yield Poset(list(r.elements) + new, lt)


def _extension_key(r: Poset, rel, downs, k: int) -> tuple:
    ids = [tuple(sorted(a.id for a in d)) for d in downs]
    best = None
    for perm in itertools.permutations(range(k)):
        inv = {perm[i]: i for i in range(k)}
        code = (tuple(sorted((inv[i], inv[j]) for i, j in rel)), tuple(ids[perm[i]] for i in range(k)))
        if best is None or code < best:
            best = code
    return best


AmalgamInput = tuple[Creature, Element, Creature, Element]


def exhaustive_amalgam_inputs(max_total: int) -> Iterator[AmalgamInput]:
    """Every valid marked-amalgam input without F or H on at most ``max_total`` points.

    The common part r runs over orders up to isomorphism, each side over its
    end extensions of r up to relabelling, and (x, y) over every pair of new
    points with equal type over r.
    """
    from .audit import exhaustive_posets

    for nr in range(0, max_total - 1):
        for r in exhaustive_posets(nr):
            for kp in range(1, max_total - nr):
                exts_p = list(end_extensions(r, kp, 100))
                for kq in range(1, max_total - nr - kp + 1):
                    exts_q = list(end_extensions(r, kq, 200))
                    for P in exts_p:
                        p = Creature(P)
                        for Q in exts_q:
                            q = Creature(Q)
                            for x in P.elements[nr:]:
                                tx = type_over(p, x, r.carrier)
                                for y in Q.elements[nr:]:
                                    if type_over(q, y, r.carrier) == tx:
                                        yield p, x, q, y


def random_amalgam_input(rng: random.Random, max_total: int = 14, *, min_total: int = 2,
                         decorate: bool = True, tries: int = 50) -> AmalgamInput:
    """Random valid input; with ``decorate`` some F and H entries are added on each part."""
    for _ in range(tries):
        inp = _random_amalgam_try(rng, min_total, max_total, decorate)
        if not amal_preconditions(*inp):
            return inp
    return _random_amalgam_try(rng, min_total, max_total, False)


def _random_amalgam_try(rng: random.Random, min_total: int, max_total: int, decorate: bool) -> AmalgamInput:
    total = rng.randint(min_total, max_total)
    nr = rng.randint(0, total - 2)
    kp = rng.randint(1, total - nr - 1)
    kq = total - nr - kp
    r = random_poset(rng, nr, rng.uniform(0.1, 0.5))
    dcs_cache: dict = {}
    P = _random_extension(rng, r, kp, 100, None, dcs_cache)
    x = rng.choice(P.elements[nr:])
    tx = frozenset(z for z in r if P.less(z, x))
    Q = _random_extension(rng, r, kq, 200, tx, dcs_cache)
    y = Q.by_id(200)
    Fr, Hr = (_decorate(rng, r, set(), frozenset()) if decorate else ({}, set()))
    Fp, Hp = (_decorate(rng, P, set(r.carrier), r.carrier, Fr) if decorate else ({}, set()))
    Fq, Hq = (_decorate(rng, Q, set(r.carrier), r.carrier, Fr) if decorate else ({}, set()))
    p = Creature(P, {**Fr, **Fp}, Hr | Hp)
    q = Creature(Q, {**Fr, **Fq}, Hr | Hq)
    return p, x, q, y


def _random_down_set(rng: random.Random, r: Poset) -> frozenset[Element]:
    S: set[Element] = set()
    for z in r.elements:
        if rng.random() < 0.3:
            S |= r.down(z) | {z}
    return frozenset(S)


def _random_extension(rng: random.Random, r: Poset, k: int, start: int, first_type, cache) -> Poset:
    """End extension by k new points; the first new point gets exactly ``first_type`` below it."""
    new = [Element(start + i) for i in range(k)]
    p = rng.uniform(0.1, 0.5)
    lt = set(r.lt)
    for j in range(k):
        d = first_type if (j == 0 and first_type is not None) else _random_down_set(rng, r)
        lt |= {(a, new[j]) for a in d}
        if j == 0 and first_type is not None:
            continue
        lt |= {(new[i], new[j]) for i in range(j) if rng.random() < p}
    return transitive_closure(lt, list(r.elements) + new)


def _decorate(rng: random.Random, P: Poset, old: set, skip: frozenset, base_F: dict | None = None):
    """A few F and H entries on pairs not entirely inside ``old``, valid for P."""
    F: dict = {}
    H: set = set()
    taken = set(base_F or {})
    pairs = [(a, b) for a, b in P.incomparable_pairs() if not (a in skip and b in skip)]
    pairs = [(a, b) for a, b in pairs if pair(a, b) not in taken]
    rng.shuffle(pairs)
    for a, b in pairs[:rng.randint(0, 3)]:
        mubs = sorted(minimal_upper_bounds(P, a, b))
        if not mubs:
            continue
        if rng.random() < 0.6:
            F[pair(a, b)] = rng.choice(mubs)
        else:
            z = rng.choice(mubs)
            H |= {(a, b, z), (b, a, z)}
        taken.add(pair(a, b))
    return F, H


__all__ = [
    "AmalgamInput",
    "down_closed_sets",
    "end_extensions",
    "exhaustive_amalgam_inputs",
    "hazard_free_step",
    "random_amalgam_input",
    "random_forest",
    "random_poset",
    "random_relation",
]
