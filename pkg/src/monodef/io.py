"""JSON documents for posets, creatures, step inputs, F-specs, maps and reports.

Every writer emits sorted keys and canonical element order, so equal
objects always serialize to identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from .coder import FSpec, StepContext, StepInput
from .creature import Creature
from .errors import BadInput, MonodefError
from .order import Element, Poset, transitive_closure

SCHEMA_VERSION = 1


def _schema(kind: str) -> str:
    return f"monodef/{kind}@{SCHEMA_VERSION}"


def dumps(doc: Mapping[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write_json(path: str | Path, doc: Mapping[str, Any]) -> None:
    Path(path).write_text(dumps(doc))


def read_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInput(f"cannot read {path}: {exc}") from None


def _check_schema(doc: Mapping, kind: str) -> None:
    if not isinstance(doc, Mapping):
        raise BadInput(f"expected a JSON object for {kind}")
    got = doc.get("schema")
    if got is not None and got != _schema(kind):
        raise BadInput(f"expected schema {_schema(kind)}, got {got}")


# -- elements ---------------------------------------------------------------------


def element_to_json(x: Element) -> dict:
    return {"id": x.id, "tag": x.tag, "step": x.step}


def element_from_json(d) -> Element:
    if isinstance(d, int):
        return Element(d)
    try:
        return Element(int(d["id"]), str(d.get("tag", "ground")), int(d.get("step", 0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise BadInput(f"bad element {d!r}: {exc}") from None


def _lookup(by_id: Mapping[int, Element], ident) -> Element:
    try:
        return by_id[int(ident)]
    except (KeyError, TypeError, ValueError):
        raise BadInput(f"unknown element id {ident!r}") from None


def _triples(rows, by_id, what: str) -> list[tuple[Element, ...]]:
    out = []
    for row in rows or ():
        if not isinstance(row, (list, tuple)) or len(row) != 3:
            raise BadInput(f"{what} entries must be [x, y, z], got {row!r}")
        out.append(tuple(_lookup(by_id, v) for v in row))
    return out


# -- posets and creatures ---------------------------------------------------------


def poset_to_json(P: Poset) -> dict:
    return {"schema": _schema("poset"),
            "elements": [element_to_json(x) for x in P.elements],
            "lt": [[a.id, b.id] for a, b in P.hasse()]}


def _poset_parts(doc: Mapping) -> tuple[Poset, dict[int, Element]]:
    elems = [element_from_json(d) for d in doc.get("elements", [])]
    by_id = {}
    for x in elems:
        if x.id in by_id:
            raise BadInput(f"duplicate element id {x.id}")
        by_id[x.id] = x
    pairs = []
    for row in doc.get("lt", []):
        if not isinstance(row, (list, tuple)) or len(row) != 2:
            raise BadInput(f"lt entries must be [a, b], got {row!r}")
        pairs.append((_lookup(by_id, row[0]), _lookup(by_id, row[1])))
    return transitive_closure(pairs, elems), by_id


def poset_from_json(doc: Mapping) -> Poset:
    _check_schema(doc, "poset")
    return _poset_parts(doc)[0]


def creature_to_json(C: Creature) -> dict:
    doc = poset_to_json(C.order)
    doc["schema"] = _schema("creature")
    doc["F"] = [[x.id, y.id, z.id] for x, y, z in C.f_triples()]
    doc["H"] = [[x.id, y.id, z.id] for x, y, z in C.h_triples() if x.id < y.id]
    return doc


def creature_from_json(doc: Mapping) -> Creature:
    _check_schema(doc, "creature")
    order, by_id = _poset_parts(doc)
    F = {}
    for x, y, z in _triples(doc.get("F"), by_id, "F"):
        F[frozenset((x, y))] = z
    H = _triples(doc.get("H"), by_id, "H")
    try:
        return Creature(order, F, H)
    except MonodefError as exc:
        raise BadInput(str(exc), exc.witness) from None


# -- step inputs and F-specs ------------------------------------------------------


def step_to_json(inp: StepInput) -> dict:
    return {"schema": _schema("step"), "ground": creature_to_json(inp.ground),
            "R": [[a.id, b.id] for a, b in inp.sorted_R()], "step": inp.step}


def step_from_json(doc: Mapping) -> StepInput:
    _check_schema(doc, "step")
    if "ground" not in doc:
        raise BadInput("step document needs a 'ground' creature")
    ground = creature_from_json(doc["ground"])
    by_id = {x.id: x for x in ground.order}
    R = []
    for row in doc.get("R", []):
        if not isinstance(row, (list, tuple)) or len(row) != 2:
            raise BadInput(f"R entries must be [a, b], got {row!r}")
        R.append((_lookup(by_id, row[0]), _lookup(by_id, row[1])))
    step = doc.get("step")
    return StepInput(ground, frozenset(R), None if step is None else int(step))


def fspec_to_json(ctx: StepContext) -> dict:
    fs = ctx.fspec
    return {"schema": _schema("fspec"), "e": ctx.e.id, "step": ctx.alloc.step,
            "spares": {"start": ctx.alloc.spares.start, "size": ctx.alloc.spares.size},
            "elements": [element_to_json(x) for x in sorted(fs.carrier)],
            "F": [[x.id, y.id, z.id] for x, y, z in fs.triples()]}


def fspec_from_json(doc: Mapping) -> FSpec:
    _check_schema(doc, "fspec")
    elems = [element_from_json(d) for d in doc.get("elements", [])]
    by_id = {x.id: x for x in elems}
    F = {frozenset((x, y)): z for x, y, z in _triples(doc.get("F"), by_id, "F")}
    return FSpec(F, elems)


# -- maps -------------------------------------------------------------------------


def map_to_json(g: Mapping[Element, Element]) -> dict:
    return {"schema": _schema("map"), "map": sorted([x.id, y.id] for x, y in g.items())}


def map_from_json(doc: Mapping, P: Poset) -> dict[Element, Element]:
    _check_schema(doc, "map")
    by_id = {x.id: x for x in P}
    g = {}
    for row in doc.get("map", []):
        if not isinstance(row, (list, tuple)) or len(row) != 2:
            raise BadInput(f"map entries must be [x, g(x)], got {row!r}")
        g[_lookup(by_id, row[0])] = _lookup(by_id, row[1])
    missing = [x.id for x in P if x not in g]
    if missing:
        raise BadInput(f"map is not total; missing ids {missing[:10]}")
    return g


def report(kind: str, body: Mapping[str, Any], *, seed: int | None = None) -> dict:
    doc = {"schema": _schema(f"report/{kind}"), **body}
    if seed is not None:
        doc["seed"] = seed
    return doc
