"""Creatures (M, <=, F, H), their extension notions, and triangle detection."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import NotASubstructure, PreconditionFailed, UnknownElement
from .order import Element, Poset, is_end_extension


def pair(x: Element, y: Element) -> frozenset:
    return frozenset((x, y))


class Creature:
    """A finite creature.  ``F`` maps unordered pairs to elements; ``H`` holds
    ordered triples and is closed under swapping the first two slots."""

    __slots__ = ("order", "F", "H")

    def __init__(self, order: Poset, F: Mapping[frozenset, Element] | None = None,
                 H: Iterable[tuple[Element, Element, Element]] = ()):
        F = dict(F or {})
        for key, z in F.items():
            for w in (*key, z):
                if w not in order:
                    raise UnknownElement(f"F mentions {w!r} outside the carrier", w)
        triples = set()
        for x, y, z in H:
            for w in (x, y, z):
                if w not in order:
                    raise UnknownElement(f"H mentions {w!r} outside the carrier", w)
            triples.add((x, y, z))
            triples.add((y, x, z))
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "F", MappingProxyType(F))
        object.__setattr__(self, "H", frozenset(triples))

    def __setattr__(self, name, value):
        raise AttributeError("Creature is immutable")

    @property
    def carrier(self) -> frozenset[Element]:
        return self.order.carrier

    def f(self, x: Element, y: Element) -> Element | None:
        return self.F.get(pair(x, y))

    def h(self, x: Element, y: Element) -> frozenset[Element]:
        return frozenset(z for a, b, z in self.H if a == x and b == y)

    def f_triples(self) -> list[tuple[Element, Element, Element]]:
        """F as (x, y, z) with x.id < y.id, sorted: the canonical listing."""
        out = []
        for key, z in self.F.items():
            x, y = sorted(key, key=lambda e: e.id)
            out.append((x, y, z))
        out.sort(key=lambda t: (t[0].id, t[1].id))
        return out

    def h_triples(self) -> list[tuple[Element, Element, Element]]:
        return sorted(self.H, key=lambda t: (t[0].id, t[1].id, t[2].id))

    @classmethod
    def _trusted(cls, order: Poset, F: dict, H: frozenset) -> "Creature":
        """Skip membership checks; ``H`` must already be symmetric."""
        obj = cls.__new__(cls)
        object.__setattr__(obj, "order", order)
        object.__setattr__(obj, "F", MappingProxyType(F))
        object.__setattr__(obj, "H", H)
        return obj

    def restrict(self, subset: Iterable[Element]) -> "Creature":
        keep = frozenset(subset)
        F = {k: z for k, z in self.F.items() if k <= keep and z in keep}
        H = frozenset(t for t in self.H if t[2] in keep and t[0] in keep and t[1] in keep)
        return Creature._trusted(self.order.restrict(keep), F, H)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Creature):
            return NotImplemented
        return self.order == other.order and dict(self.F) == dict(other.F) and self.H == other.H

    def __hash__(self) -> int:
        return hash((self.order, frozenset(self.F.items()), self.H))

    def __repr__(self) -> str:
        return f"Creature(n={len(self.order)}, |F|={len(self.F)}, |H|={len(self.H) // 2})"


def empty_creature() -> Creature:
    return Creature(Poset(()))


# -- validation -----------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple

    def to_json(self) -> dict:
        return {"axiom": self.axiom, "witness": [_wid(w) for w in self.witness]}


def _wid(w):
    if isinstance(w, Element):
        return w.id
    if isinstance(w, (tuple, list, frozenset, set)):
        return sorted(_wid(v) for v in w) if isinstance(w, (frozenset, set)) else [_wid(v) for v in w]
    return w


@dataclass(frozen=True)
class Report:
    """Violations found by a checker; empty means the object passed."""

    violations: tuple[Violation, ...] = ()
    notes: Mapping[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def axioms(self) -> set[str]:
        return {v.axiom for v in self.violations}

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_json() for v in self.violations]}


def f_closure(C: Creature, start: Iterable[Element]) -> frozenset[Element]:
    """Smallest superset of ``start`` closed under F (the local-finiteness witness)."""
    by_elem = defaultdict(list)
    for key, z in C.F.items():
        for x in key:
            by_elem[x].append((key, z))
    B = set(start)
    todo = list(B)
    while todo:
        x = todo.pop()
        for key, z in by_elem.get(x, ()):
            if key <= B and z not in B:
                B.add(z)
                todo.append(z)
    return frozenset(B)


def validate_creature(C: Creature, *, check_local_finiteness: bool = True) -> Report:
    P = C.order
    out: list[Violation] = []
    index, up, down = P._index, P._up, P._down
    for key, z in C.F.items():
        if len(key) != 2:
            (x,) = key
            out.append(Violation("incomparability", (x, x, z)))
            continue
        x, y = key
        ix, iy, iz = index[x], index[y], index[z]
        if up[ix] >> iy & 1 or up[iy] >> ix & 1:
            out.append(Violation("incomparability", (*sorted(key), z)))
            continue
        if not (up[ix] >> iz & 1 and up[iy] >> iz & 1):
            out.append(Violation("F-upper-bound", (*sorted(key), z)))
            continue
        # z' < z with x <= z' and y <= z'
        low = down[iz] & (up[ix] | 1 << ix) & (up[iy] | 1 << iy)
        if low:
            out.append(Violation("F-minimality", (*sorted(key), z, P.from_bits(low))))
    if check_local_finiteness:
        witnesses = {x: f_closure(C, (x,)) for x in P}
        for x, B in witnesses.items():
            if not B <= P.carrier:
                out.append(Violation("local-finiteness", (x,)))
    for x, y, z in C.H:
        if (y, x, z) not in C.H:
            out.append(Violation("H-symmetry", (x, y, z)))
        if y.id < x.id:
            continue
        ix, iy, iz = index[x], index[y], index[z]
        if ix == iy or up[ix] >> iy & 1 or up[iy] >> ix & 1:
            out.append(Violation("H-incomparability", (x, y, z)))
            continue
        common = up[ix] & up[iy]
        if not common >> iz & 1 or down[iz] & common:
            out.append(Violation("H-minimality", (x, y, z)))
        if pair(x, y) in C.F:
            out.append(Violation("H meets dom F", (x, y, z)))
    out.sort(key=lambda v: (v.axiom, repr(v.witness)))
    return Report(tuple(out))


def is_creature(C: Creature) -> bool:
    return validate_creature(C).ok


def creature_leq(C1: Creature, C2: Creature) -> bool:
    """``C1 <= C2``: C1's carrier is inside C2's and all structure is restricted."""
    M1 = C1.carrier
    if not M1 <= C2.carrier:
        return False
    if C2.order.restrict(M1) != C1.order:
        return False
    F2 = {k: z for k, z in C2.F.items() if k <= M1}
    if F2 != dict(C1.F):
        return False
    H2 = {t for t in C2.H if t[0] in M1 and t[1] in M1 and t[2] in M1}
    return H2 == C1.H


# -- triangles ---------------------------------------------------------------------


@dataclass(frozen=True)
class Triangle:
    vertices: frozenset[Element]
    base_points: frozenset[Element]
    anchors: frozenset[Element]

    @property
    def unique_base(self) -> Element | None:
        if len(self.base_points) == 1:
            return next(iter(self.base_points))
        return None

    def sorted_ids(self) -> tuple[int, ...]:
        return tuple(sorted(v.id for v in self.vertices))


def f_preimages(C: Creature) -> dict[Element, list[frozenset]]:
    pre = defaultdict(list)
    for key, z in C.F.items():
        pre[z].append(key)
    return pre


def find_triangles(C: Creature) -> list[Triangle]:
    """All 3-sets whose three pairs are F-defined, sorted by vertex ids."""
    nbrs: dict[Element, set[Element]] = defaultdict(set)
    for key in C.F:
        if len(key) == 2:
            x, y = key
            nbrs[x].add(y)
            nbrs[y].add(x)
    pre = f_preimages(C)
    found = set()
    for x in nbrs:
        for y in nbrs[x]:
            if y.id <= x.id:
                continue
            for z in nbrs[x] & nbrs[y]:
                if z.id > y.id:
                    found.add(frozenset((x, y, z)))
    out = []
    for verts in found:
        base = frozenset(v for v in verts if len(pre.get(v, ())) == 1)
        anchors = frozenset(w for b in base for key in pre[b] for w in key)
        out.append(Triangle(verts, base, anchors))
    out.sort(key=Triangle.sorted_ids)
    return out


@dataclass(frozen=True)
class SeparationResult:
    ok: bool
    clause: str | None = None
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def is_separated_extension(C1: Creature, C2: Creature) -> SeparationResult:
    if not creature_leq(C1, C2):
        raise PreconditionFailed("first creature is not a substructure of the second")
    try:
        end = is_end_extension(C1.order, C2.order)
    except NotASubstructure as exc:
        raise PreconditionFailed(str(exc)) from None
    if not end:
        raise PreconditionFailed("second creature is not an end extension of the first")
    M1 = C1.carrier
    for t in find_triangles(C2):
        inside = t.vertices & M1
        if inside and inside != t.vertices:
            return SeparationResult(False, "(i) triangle straddles", (t,))
        if not inside:
            old = t.anchors & M1
            if old:
                return SeparationResult(False, "(ii) new triangle anchored in old part", (t, min(old)))
    fresh = [t for t in C2.H if t[0] in M1 and t[1] in M1 and t[2] not in M1]
    if fresh:
        t = min(fresh, key=lambda t: (t[0].id, t[1].id, t[2].id))
        return SeparationResult(False, "(iii) new H-witness for old pair", t)
    return SeparationResult(True)


def anchored_triangles(C: Creature, e: Element) -> list[Triangle]:
    return [t for t in find_triangles(C) if e in t.anchors]


def count_f_into(C: Creature, a: Element, target: frozenset[Element]) -> int:
    """|{x : F(a, x) in target}|."""
    n = 0
    for key, z in C.F.items():
        if a in key and z in target and len(key) == 2:
            n += 1
    return n


__all__ = [
    "Creature",
    "Report",
    "SeparationResult",
    "Triangle",
    "Violation",
    "anchored_triangles",
    "count_f_into",
    "creature_leq",
    "empty_creature",
    "f_closure",
    "find_triangles",
    "is_creature",
    "is_separated_extension",
    "pair",
    "validate_creature",
]
