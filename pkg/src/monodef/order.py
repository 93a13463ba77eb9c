"""Finite strict partial orders and the order-theoretic primitives built on them.

A :class:`Poset` stores the strict relation ``<`` as one up-set bitset per
element (bit ``j`` of ``_up[i]`` set iff ``elements[i] < elements[j]``).
Non-strict ``<=`` is derived.  Construction always re-validates the order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Mapping, NamedTuple

from . import _kernels as K
from .errors import BudgetExceeded, CycleDetected, NotAPartialOrder, NotASubstructure, UnknownElement

DEFAULT_LIMIT = 4096
ANTICHAIN_SEARCH_LIMIT = 20


class Element(NamedTuple):
    """Opaque carrier member; ``tag`` records provenance, ``step`` the stage that made it.

    A named tuple so hashing and ordering (by id first) stay in C.
    """

    id: int
    tag: str = "ground"
    step: int = 0

    @property
    def kind(self) -> str:
        return self.tag.split(":", 1)[0]

    @property
    def role(self) -> str | None:
        parts = self.tag.split(":")
        return parts[1] if len(parts) > 1 else None

    def __repr__(self) -> str:
        return f"E{self.id}" if self.tag == "ground" else f"E{self.id}<{self.tag}@{self.step}>"


def gadget_tag(role: str, pair: tuple[int, int]) -> str:
    return f"gadget:{role}:{pair[0]},{pair[1]}"


def witness_tag(kind: str) -> str:
    return f"witness:{kind}"


class Poset:
    """Immutable finite strict partial order."""

    __slots__ = ("_elems", "_index", "_up", "_down", "_by_id", "_lt_cache", "_carrier")

    def __init__(self, carrier: Iterable[Element], lt: Iterable[tuple[Element, Element]] = (), *,
                 limit: int = DEFAULT_LIMIT):
        elems = _sorted_carrier(carrier, limit)
        index = {x: i for i, x in enumerate(elems)}
        up = [0] * len(elems)
        for x, y in lt:
            try:
                up[index[x]] |= 1 << index[y]
            except KeyError as exc:
                raise UnknownElement(f"{exc.args[0]!r} is not in the carrier", exc.args[0]) from None
        self._setup(elems, index, up)

    @classmethod
    def _from_rows(cls, elems: tuple[Element, ...], up: list[int]) -> "Poset":
        """Rows already known to be a strict order (a closure or a restriction)."""
        obj = cls.__new__(cls)
        obj._setup(elems, {x: i for i, x in enumerate(elems)}, up, trusted=True)
        return obj

    def _setup(self, elems, index, up, trusted: bool = False):
        bad = None if trusted else K.order_violation(up)
        if bad is not None:
            kind, idx = bad
            raise NotAPartialOrder(f"relation is not a strict order ({kind})",
                                   (kind, tuple(elems[i] for i in idx)))
        by_id = {}
        for x in elems:
            if x.id in by_id:
                raise NotAPartialOrder(f"duplicate element id {x.id}", (by_id[x.id], x))
            by_id[x.id] = x
        self._elems = elems
        self._index = index
        self._up = up
        self._down = K.transpose(up)
        self._by_id = by_id
        self._lt_cache = None
        self._carrier = frozenset(elems)

    # -- basic access -------------------------------------------------------

    @property
    def elements(self) -> tuple[Element, ...]:
        return self._elems

    @property
    def carrier(self) -> frozenset[Element]:
        return self._carrier

    @property
    def lt(self) -> frozenset[tuple[Element, Element]]:
        if self._lt_cache is None:
            e = self._elems
            self._lt_cache = frozenset(
                (e[i], e[j]) for i, row in enumerate(self._up) for j in K.iter_bits(row))
        return self._lt_cache

    def __len__(self) -> int:
        return len(self._elems)

    def __iter__(self) -> Iterator[Element]:
        return iter(self._elems)

    def __contains__(self, x: object) -> bool:
        return x in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Poset):
            return NotImplemented
        return self._elems == other._elems and self._up == other._up

    def __hash__(self) -> int:
        return hash((self._elems, tuple(self._up)))

    def __repr__(self) -> str:
        return f"Poset(n={len(self)}, hasse={sorted((a.id, b.id) for a, b in self.hasse())})"

    def index(self, x: Element) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise UnknownElement(f"{x!r} is not in the carrier", x) from None

    def by_id(self, ident: int) -> Element:
        try:
            return self._by_id[ident]
        except KeyError:
            raise UnknownElement(f"no element with id {ident}", ident) from None

    def bits(self, xs: Iterable[Element]) -> int:
        out = 0
        for x in xs:
            out |= 1 << self.index(x)
        return out

    def from_bits(self, mask: int) -> frozenset[Element]:
        e = self._elems
        return frozenset(e[i] for i in K.iter_bits(mask))

    def up_bits(self, x: Element) -> int:
        return self._up[self.index(x)]

    def down_bits(self, x: Element) -> int:
        return self._down[self.index(x)]

    # -- order queries ------------------------------------------------------

    def less(self, x: Element, y: Element) -> bool:
        return bool(self._up[self.index(x)] >> self.index(y) & 1)

    def leq(self, x: Element, y: Element) -> bool:
        return x == y or self.less(x, y)

    def comparable(self, x: Element, y: Element) -> bool:
        return self.leq(x, y) or self.less(y, x)

    def up(self, x: Element) -> frozenset[Element]:
        return self.from_bits(self.up_bits(x))

    def down(self, x: Element) -> frozenset[Element]:
        return self.from_bits(self.down_bits(x))

    def maximal(self) -> frozenset[Element]:
        return frozenset(x for i, x in enumerate(self._elems) if not self._up[i])

    def minimal(self) -> frozenset[Element]:
        return frozenset(x for i, x in enumerate(self._elems) if not self._down[i])

    def restrict(self, subset: Iterable[Element]) -> "Poset":
        keep = _sorted_carrier(subset, None)
        for x in keep:
            self.index(x)
        old = [self._index[x] for x in keep]
        mask_of = {o: n for n, o in enumerate(old)}
        kept = sum(1 << o for o in old)
        up = []
        for o in old:
            row = 0
            for j in K.iter_bits(self._up[o] & kept):
                n = mask_of.get(j)
                if n is not None:
                    row |= 1 << n
            up.append(row)
        return Poset._from_rows(keep, up)

    def hasse(self) -> list[tuple[Element, Element]]:
        """Cover pairs (transitive reduction), sorted by id."""
        e = self._elems
        out = []
        for i, row in enumerate(self._up):
            below_covers = 0
            for j in K.iter_bits(row):
                below_covers |= self._up[j]
            for j in K.iter_bits(row & ~below_covers):
                out.append((e[i], e[j]))
        out.sort(key=lambda p: (p[0].id, p[1].id))
        return out

    def incomparable_pairs(self, within: Iterable[Element] | None = None) -> Iterator[tuple[Element, Element]]:
        xs = self._elems if within is None else _sorted_carrier(within, None)
        for x, y in combinations(xs, 2):
            if not self.comparable(x, y):
                yield x, y


def _sorted_carrier(carrier: Iterable[Element], limit: int | None) -> tuple[Element, ...]:
    elems = tuple(sorted(set(carrier), key=lambda x: x.id))
    if limit is not None and len(elems) > limit:
        raise BudgetExceeded(f"carrier of size {len(elems)} exceeds limit {limit}", len(elems))
    return elems


def chain(xs: Iterable[Element]) -> Poset:
    xs = list(xs)
    return transitive_closure(zip(xs, xs[1:]), xs)


def antichain(xs: Iterable[Element]) -> Poset:
    return Poset(xs)


# -- operations ---------------------------------------------------------------


def transitive_closure(pairs: Iterable[tuple[Element, Element]], carrier: Iterable[Element], *,
                       limit: int = DEFAULT_LIMIT) -> Poset:
    """Smallest strict order containing ``pairs``; ``CycleDetected`` if none exists."""
    elems = _sorted_carrier(carrier, limit)
    index = {x: i for i, x in enumerate(elems)}
    succ = [0] * len(elems)
    for x, y in pairs:
        try:
            succ[index[x]] |= 1 << index[y]
        except KeyError as exc:
            raise UnknownElement(f"{exc.args[0]!r} is not in the carrier", exc.args[0]) from None
    try:
        rows = K.closure(succ)
    except ValueError as exc:
        cycle = [elems[i] for i in exc.args[0]]
        raise CycleDetected("relation has a cycle", cycle) from None
    return Poset._from_rows(elems, rows)


def down_set(P: Poset, x: Element) -> frozenset[Element]:
    return P.down(x)


def minimal_upper_bounds(P: Poset, x: Element, y: Element) -> frozenset[Element]:
    """Minimal common strict upper bounds of an incomparable pair; empty for comparable pairs."""
    i, j = P.index(x), P.index(y)
    if P.comparable(x, y):
        return frozenset()
    return P.from_bits(K.mub_bits(P._up, P._down, i, j))


@dataclass(frozen=True)
class UmubMap:
    """Symmetric partial map {x, y} -> unique minimal upper bound."""

    entries: Mapping[frozenset, Element] = field(default_factory=dict)

    def get(self, x: Element, y: Element) -> Element | None:
        return self.entries.get(frozenset((x, y)))

    def __contains__(self, pair) -> bool:
        return frozenset(pair) in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UmubMap):
            return NotImplemented
        return dict(self.entries) == dict(other.entries)

    def triples(self) -> list[tuple[Element, Element, Element]]:
        out = []
        for key, z in self.entries.items():
            x, y = sorted(key, key=lambda e: e.id)
            out.append((x, y, z))
        out.sort(key=lambda t: (t[0].id, t[1].id))
        return out


def umub_map(P: Poset, within: Iterable[Element] | None = None) -> UmubMap:
    """The partial function sending an incomparable pair to its unique minimal upper bound.

    ``within`` restricts the domain to pairs from that subset (values may lie anywhere).
    """
    xs = P.elements if within is None else _sorted_carrier(within, None)
    pairs = []
    for x, y in combinations(xs, 2):
        i, j = P.index(x), P.index(y)
        if P._up[i] & P._up[j] and not (P._up[i] >> j & 1 or P._up[j] >> i & 1):
            pairs.append((i, j))
    entries = {}
    for (i, j), mubs in zip(pairs, K.mub_table(P._up, P._down, pairs)):
        if mubs and not mubs & (mubs - 1):
            e = P._elems
            entries[frozenset((e[i], e[j]))] = e[mubs.bit_length() - 1]
    return UmubMap(entries)


def is_end_extension(small: Poset, big: Poset) -> bool:
    """True iff ``small`` is a suborder of ``big`` that is downward closed in it."""
    for x in small:
        if x not in big:
            raise NotASubstructure(f"{x!r} missing from the larger order", x)
    if big.restrict(small.elements) != small:
        raise NotASubstructure("orders disagree on the common carrier")
    inside = big.bits(small.elements)
    return all(not (big.down_bits(y) & ~inside) for y in small)


def max_antichain(P: Poset, *, search_limit: int = ANTICHAIN_SEARCH_LIMIT,
                  method: str = "auto") -> frozenset[Element]:
    """A maximum antichain.

    Exact branch-and-bound search up to ``search_limit`` elements; above that
    ``method="auto"`` switches to the Dilworth/Koenig matching construction
    (also exact) and ``method="search"`` raises ``BudgetExceeded``.
    """
    n = len(P)
    if n <= search_limit:
        return _antichain_search(P)
    if method == "search":
        raise BudgetExceeded(f"exact antichain search capped at {search_limit} elements", n)
    return _antichain_dilworth(P)


def max_antichain_size(P: Poset, **kw) -> int:
    return len(max_antichain(P, **kw))


def _antichain_search(P: Poset) -> frozenset[Element]:
    n = len(P)
    comp = [P._up[i] | P._down[i] for i in range(n)]
    best = 0
    best_size = 0

    def grow(chosen: int, size: int, cand: int) -> None:
        nonlocal best, best_size
        if not cand:
            if size > best_size:
                best, best_size = chosen, size
            return
        if size + cand.bit_count() <= best_size:
            return
        low = cand & -cand
        i = low.bit_length() - 1
        grow(chosen | low, size + 1, cand & ~low & ~comp[i])
        grow(chosen, size, cand & ~low)

    grow(0, 0, (1 << n) - 1)
    return P.from_bits(best)


def _antichain_dilworth(P: Poset) -> frozenset[Element]:
    import networkx as nx

    n = len(P)
    G = nx.Graph()
    left = [("L", i) for i in range(n)]
    G.add_nodes_from(left, bipartite=0)
    G.add_nodes_from((("R", i) for i in range(n)), bipartite=1)
    for i in range(n):
        for j in K.iter_bits(P._up[i]):
            G.add_edge(("L", i), ("R", j))
    matching = nx.bipartite.hopcroft_karp_matching(G, top_nodes=left)
    cover = nx.bipartite.to_vertex_cover(G, matching, top_nodes=left)
    keep = [i for i in range(n) if ("L", i) not in cover and ("R", i) not in cover]
    return frozenset(P._elems[i] for i in keep)
