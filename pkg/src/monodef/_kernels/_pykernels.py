"""Pure-Python order kernels over integer bitsets.

Row ``rows[i]`` is an int whose bit ``j`` is set iff ``i < j`` (strict).
All functions are index-based; the caller owns the element <-> index map.
"""

from __future__ import annotations

from graphlib import CycleError, TopologicalSorter
from typing import Sequence

BACKEND = "python"


def iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def closure(succ: Sequence[int]) -> list[int]:
    """Transitive closure; raises ``ValueError(cycle)`` on a cycle."""
    n = len(succ)
    for i in range(n):
        if succ[i] >> i & 1:
            raise ValueError([i, i])
    graph = {i: tuple(iter_bits(succ[i])) for i in range(n)}
    try:
        order = list(TopologicalSorter(graph).static_order())
    except CycleError as exc:
        raise ValueError(list(exc.args[1])) from None
    # static_order yields successors before predecessors
    rows = [0] * n
    for i in order:
        acc = 0
        for j in graph[i]:
            acc |= (1 << j) | rows[j]
        rows[i] = acc
    return rows


def transpose(rows: Sequence[int]) -> list[int]:
    out = [0] * len(rows)
    for i, row in enumerate(rows):
        bit = 1 << i
        for j in iter_bits(row):
            out[j] |= bit
    return out


def order_violation(up: Sequence[int]):
    """Return ``None`` for a strict order, else ``(kind, witness)``."""
    for i, row in enumerate(up):
        if row >> i & 1:
            return ("irreflexive", (i,))
        for j in iter_bits(row):
            extra = up[j] & ~row
            if extra:
                k = (extra & -extra).bit_length() - 1
                return ("transitive", (i, j, k))
    return None


def mub_bits(up: Sequence[int], down: Sequence[int], i: int, j: int) -> int:
    common = up[i] & up[j]
    out = 0
    rest = common
    while rest:
        low = rest & -rest
        z = low.bit_length() - 1
        rest ^= low
        if not down[z] & common:
            out |= low
    return out


def mub_table(up: Sequence[int], down: Sequence[int], pairs: Sequence[tuple[int, int]]) -> list[int]:
    return [mub_bits(up, down, i, j) for i, j in pairs]
