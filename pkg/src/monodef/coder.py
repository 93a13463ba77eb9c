"""Gadget allocation, the pair-coding F extension, and its triangle decoder.

Each pair (alpha, beta) of the coded relation R gets a private gadget
A (2) + B (3) + C (1) + Delta = {a, b, c} + {gamma}; the encoder wires

    F(alpha, x) = a  for x in A
    F(beta,  x) = b  for x in B
    F(e,     x) = c  for x in C
    F(u, v) = gamma  for u != v in Delta

and the decoder reads R back from triangles with a unique base point that
are anchored at the step's e-point, using the counts 2 / 3 / 5.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from types import MappingProxyType
from typing import Iterable, Mapping

from .creature import (Creature, creature_leq, find_triangles, is_separated_extension, pair,
                       validate_creature)
from .errors import AllocationMismatch, BadInput, BudgetExceeded, PreconditionFailed
from .order import DEFAULT_LIMIT, Element, gadget_tag

GADGET_SIZES = {"A": 2, "B": 3, "C": 1, "Delta": 3, "Gamma": 1}
GADGET_SIZE = sum(GADGET_SIZES.values())
DEFAULT_SPARE_FLOOR = 100_000


@dataclass(frozen=True)
class Gadget:
    pair: tuple[Element, Element]
    A: tuple[Element, ...]
    B: tuple[Element, ...]
    C: tuple[Element, ...]
    Delta: tuple[Element, Element, Element]
    Gamma: tuple[Element]

    @property
    def members(self) -> frozenset[Element]:
        return frozenset((*self.A, *self.B, *self.C, *self.Delta, *self.Gamma))

    @property
    def a(self) -> Element:
        return self.Delta[0]

    @property
    def b(self) -> Element:
        return self.Delta[1]

    @property
    def c(self) -> Element:
        return self.Delta[2]

    @property
    def gamma(self) -> Element:
        return self.Gamma[0]


@dataclass(frozen=True)
class SparePool:
    """Reserved id range for spare elements; members are created on demand."""

    start: int
    size: int

    def __contains__(self, ident: int) -> bool:
        return self.start <= ident < self.start + self.size


@dataclass(frozen=True)
class StepInput:
    ground: Creature
    R: frozenset[tuple[Element, Element]]
    step: int | None = None
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.validate:
            rep = validate_creature(self.ground)
            if not rep.ok:
                v = rep.violations[0]
                raise BadInput(f"ground is not a creature: {v.axiom}", v.witness)
        R = frozenset((a, b) for a, b in self.R)
        object.__setattr__(self, "R", R)
        for a, b in R:
            if a not in self.ground.order or b not in self.ground.order:
                raise PreconditionFailed("R must live on the ground carrier", (a, b))
        if self.step is None:
            steps = [x.step for x in self.ground.order]
            object.__setattr__(self, "step", max(steps) + 1 if steps else 1)

    def sorted_R(self) -> list[tuple[Element, Element]]:
        return sorted(self.R, key=lambda p: (p[0].id, p[1].id))


@dataclass(frozen=True)
class GadgetAllocation:
    e: Element
    gadgets: Mapping[tuple[int, int], Gadget]
    spares: SparePool
    step: int
    _omega: Mapping[Element, frozenset[Element]] = field(default_factory=dict, repr=False)

    def omega(self, x: Element) -> frozenset[Element]:
        """Omega(x): the gadget of x plus its coded pair; empty outside gadgets."""
        return self._omega.get(x, frozenset())

    @property
    def gadget_elements(self) -> frozenset[Element]:
        return frozenset(self._omega)

    def gadget_of(self, x: Element) -> Gadget | None:
        for g in self.gadgets.values():
            if x in g.members:
                return g
        return None


def allocate_gadgets(inp: StepInput, spare_floor: int = DEFAULT_SPARE_FLOOR, *,
                     limit: int = DEFAULT_LIMIT) -> GadgetAllocation:
    """Fresh ids, in sorted pair order: e first, then one 10-element block per pair."""
    if spare_floor < 1:
        raise PreconditionFailed("the spare pool must be nonempty", spare_floor)
    pairs = inp.sorted_R()
    base = max((x.id for x in inp.ground.order), default=-1) + 1
    if len(inp.ground.order) + 1 + GADGET_SIZE * len(pairs) > limit:
        raise BudgetExceeded("gadget allocation exceeds the carrier limit",
                             len(inp.ground.order) + 1 + GADGET_SIZE * len(pairs))
    step = inp.step
    e = Element(base, "e_point", step)
    nxt = base + 1
    gadgets = {}
    omega = {}
    for alpha, beta in pairs:
        key = (alpha.id, beta.id)
        blocks = {}
        for role, size in GADGET_SIZES.items():
            if role == "Delta":
                names = ("a", "b", "c")
            elif role == "Gamma":
                names = ("gamma",)
            else:
                names = (role,) * size
            blocks[role] = tuple(Element(nxt + k, gadget_tag(names[k], key), step) for k in range(size))
            nxt += size
        g = Gadget((alpha, beta), blocks["A"], blocks["B"], blocks["C"], blocks["Delta"], blocks["Gamma"])
        gadgets[key] = g
        om = g.members | {alpha, beta}
        for x in g.members:
            omega[x] = om
    return GadgetAllocation(e, MappingProxyType(gadgets), SparePool(nxt, spare_floor), step,
                            MappingProxyType(omega))


class FSpec(Mapping):
    """The extended F as a symmetric partial map on the enlarged carrier."""

    def __init__(self, entries: Mapping[frozenset, Element], carrier: Iterable[Element]):
        self._entries = dict(entries)
        self.carrier = frozenset(carrier)
        self._by_elem: dict[Element, list[frozenset]] = {}
        for key in self._entries:
            for x in key:
                self._by_elem.setdefault(x, []).append(key)

    def __getitem__(self, key):
        return self._entries[key]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def get_pair(self, x: Element, y: Element) -> Element | None:
        return self._entries.get(pair(x, y))

    def pairs_of(self, x: Element) -> list[frozenset]:
        return self._by_elem.get(x, [])

    def restrict(self, subset: Iterable[Element]) -> dict[frozenset, Element]:
        s = frozenset(subset)
        return {k: z for k, z in self._entries.items() if k <= s}

    def triples(self) -> list[tuple[Element, Element, Element]]:
        out = []
        for key, z in self._entries.items():
            x, y = sorted(key, key=lambda e: e.id)
            out.append((x, y, z))
        out.sort(key=lambda t: (t[0].id, t[1].id))
        return out


def encode_relation(inp: StepInput, alloc: GadgetAllocation) -> FSpec:
    if set(alloc.gadgets) != {(a.id, b.id) for a, b in inp.R}:
        raise AllocationMismatch("allocation pairs differ from R")
    ground_ids = {x.id for x in inp.ground.order}
    if alloc.e.id in ground_ids or any(x.id in ground_ids for x in alloc.gadget_elements):
        raise AllocationMismatch("allocation reuses ground ids")
    F = dict(inp.ground.F)
    for g in alloc.gadgets.values():
        alpha, beta = g.pair
        for x in g.A:
            F[pair(alpha, x)] = g.a
        for x in g.B:
            F[pair(beta, x)] = g.b
        for x in g.C:
            F[pair(alloc.e, x)] = g.c
        for u, v in combinations(g.Delta, 2):
            F[pair(u, v)] = g.gamma
    carrier = inp.ground.carrier | {alloc.e} | alloc.gadget_elements
    return FSpec(F, carrier)


def _count_into(C: Creature, target: frozenset[Element]) -> Counter:
    counts: Counter = Counter()
    for key, z in C.F.items():
        if z in target and len(key) == 2:
            for u in key:
                counts[u] += 1
    return counts


def decode_relation(C: Creature, e: Element) -> frozenset[tuple[Element, Element]]:
    """Pairs read off triangles with a unique base point anchored at ``e``."""
    out = set()
    for t in find_triangles(C):
        if t.unique_base is None or e not in t.anchors:
            continue
        counts = _count_into(C, t.vertices)
        twos = [u for u, n in counts.items() if n == 2]
        threes = [u for u, n in counts.items() if n == 3]
        fives = [u for u, n in counts.items() if n == 5]
        out.update((a, b) for a in twos for b in threes if a != b)
        out.update((a, a) for a in fives)
    return frozenset(out)


def check_absoluteness(C_small: Creature, C_big: Creature, e: Element) -> bool:
    """Decode at ``e`` is unchanged by a separated extension that adds no F-values below."""
    try:
        sep = is_separated_extension(C_small, C_big)
    except PreconditionFailed:
        raise
    if not sep:
        raise PreconditionFailed(f"not a separated extension: {sep.clause}", sep.witness)
    small = C_small.carrier
    for key, z in C_big.F.items():
        if z in small and not key <= small:
            raise PreconditionFailed("an F-value of the small creature has arguments outside it",
                                     tuple(key) + (z,))
    return decode_relation(C_small, e) == decode_relation(C_big, e)


@dataclass(frozen=True)
class StepContext:
    """Everything a forcing step needs: ground creature, coded R, gadgets, extended F."""

    inp: StepInput
    alloc: GadgetAllocation
    fspec: FSpec

    @property
    def ground(self) -> Creature:
        return self.inp.ground

    @property
    def e(self) -> Element:
        return self.alloc.e

    def default_core(self) -> frozenset[Element]:
        """Ground minus earlier witnesses, plus this step's gadgets and e-point."""
        g = frozenset(x for x in self.ground.order if x.kind != "witness")
        return g | self.alloc.gadget_elements | {self.e}


def make_context(inp: StepInput, spare_floor: int = DEFAULT_SPARE_FLOOR) -> StepContext:
    alloc = allocate_gadgets(inp, spare_floor)
    return StepContext(inp, alloc, encode_relation(inp, alloc))


def encode_creature(ctx: StepContext) -> Creature:
    """Encoder output as a creature with no order yet (used for decode-before-build checks)."""
    from .order import Poset

    return Creature(Poset(ctx.fspec.carrier | ctx.ground.carrier), dict(ctx.fspec))


__all__ = [
    "FSpec",
    "GADGET_SIZE",
    "Gadget",
    "GadgetAllocation",
    "SparePool",
    "StepContext",
    "StepInput",
    "allocate_gadgets",
    "check_absoluteness",
    "decode_relation",
    "encode_creature",
    "encode_relation",
    "make_context",
]

# silence linters for helpers re-exported for callers
_ = (creature_leq, validate_creature)
