"""Canonical JSON serialization for circuits, structures, graphs, tables."""

from __future__ import annotations

import json
from typing import Any

from .core import (
    Circuit,
    ConstantGate,
    InternalGate,
    RelationalGate,
    SymcircError,
    SYMMETRIC_KINDS,
    rank_cell,
    rank_fn,
    sym_fn,
    sym_position,
)
from .evaluation import RhoStructure
from .gireduce import BipartiteGraph
from .majcompile import SymmetricSpec

SCHEMA = "symcirc-circuit/1"


class SchemaError(SymcircError):
    pass


class UnknownGateKind(SchemaError):
    pass


def _need(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{where}: missing key {key!r}")
    return obj[key]


def parse_circuit(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    if doc.get("schema") != SCHEMA:
        raise SchemaError(f"schema must be {SCHEMA!r}")
    order = _need(doc, "order", "circuit")
    arity = _need(doc, "arity", "circuit")
    rho = [(str(r), int(k)) for r, k in _need(doc, "vocabulary", "circuit")]
    gates = []
    for i, g in enumerate(_need(doc, "gates", "circuit")):
        where = f"gates[{i}]"
        gid = str(_need(g, "id", where))
        kind = _need(g, "kind", where)
        if kind == "CONST":
            gates.append(ConstantGate(gid, int(_need(g, "bit", where))))
        elif kind == "REL":
            gates.append(
                RelationalGate(
                    gid,
                    str(_need(g, "relation", where)),
                    tuple(int(v) for v in _need(g, "tuple", where)),
                )
            )
        elif kind in SYMMETRIC_KINDS:
            fn = sym_fn(kind, int(_need(g, "inputs", where)))
            labels = {}
            for pos, child in _need(g, "labels", where):
                labels[sym_position(int(pos))] = str(child)
            gates.append(InternalGate(gid, fn, labels))
        elif kind == "RANK":
            fn = rank_fn(
                int(_need(g, "threshold", where)),
                int(_need(g, "prime", where)),
                int(_need(g, "rows", where)),
                int(_need(g, "cols", where)),
            )
            labels = {}
            for cell, child in _need(g, "labels", where):
                labels[rank_cell(int(cell[0]), int(cell[1]))] = str(child)
            gates.append(InternalGate(gid, fn, labels))
        else:
            raise UnknownGateKind(f"{where}: unknown gate kind {kind!r}")
    outputs = {}
    for tup, gid in _need(doc, "outputs", "circuit"):
        outputs[tuple(int(v) for v in tup)] = str(gid)
    try:
        return Circuit(order, rho, arity, gates, outputs)
    except ValueError as e:
        raise SchemaError(str(e)) from None


def circuit_document(c: Circuit) -> dict:
    gates = []
    for gid in sorted(c.gates):
        g = c.gates[gid]
        if isinstance(g, ConstantGate):
            gates.append({"id": gid, "kind": "CONST", "bit": g.bit})
        elif isinstance(g, RelationalGate):
            gates.append(
                {"id": gid, "kind": "REL", "relation": g.relation, "tuple": list(g.tup)}
            )
        elif g.fn.is_symmetric:
            labels = [
                [x.values[0], g.labels[x]] for x in sorted(g.labels)
            ]
            gates.append(
                {"id": gid, "kind": g.fn.kind, "inputs": g.fn.arity, "labels": labels}
            )
        else:
            labels = [
                [list(x.values), g.labels[x]] for x in sorted(g.labels)
            ]
            gates.append(
                {
                    "id": gid,
                    "kind": "RANK",
                    "threshold": g.fn.r,
                    "prime": g.fn.p,
                    "rows": g.fn.rows,
                    "cols": g.fn.cols,
                    "labels": labels,
                }
            )
    return {
        "schema": SCHEMA,
        "order": c.order,
        "arity": c.arity,
        "vocabulary": [[r, k] for r, k in c.rho],
        "gates": gates,
        "outputs": [[list(t), gid] for t, gid in sorted(c.outputs.items())],
    }


def serialize_circuit(c: Circuit) -> str:
    return json.dumps(circuit_document(c), indent=1, sort_keys=True) + "\n"


def circuits_equal(c1: Circuit, c2: Circuit) -> bool:
    return serialize_circuit(c1) == serialize_circuit(c2)


def parse_structure(text: str) -> RhoStructure:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from None
    universe = [str(u) for u in _need(doc, "universe", "structure")]
    relations = {
        str(rel): {tuple(str(v) for v in t) for t in tuples}
        for rel, tuples in _need(doc, "relations", "structure").items()
    }
    try:
        return RhoStructure(universe, relations)
    except ValueError as e:
        raise SchemaError(str(e)) from None


def serialize_structure(a: RhoStructure) -> str:
    doc = {
        "universe": list(a.universe),
        "relations": {
            rel: sorted([list(t) for t in tuples])
            for rel, tuples in sorted(a.relations.items())
        },
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def parse_bipartite(text: str) -> BipartiteGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from None
    try:
        return BipartiteGraph.make(
            int(_need(doc, "a", "graph")),
            int(_need(doc, "b", "graph")),
            _need(doc, "edges", "graph"),
        )
    except ValueError as e:
        raise SchemaError(str(e)) from None


def serialize_bipartite(g: BipartiteGraph) -> str:
    doc = {"a": g.a, "b": g.b, "edges": sorted([u, v] for u, v in g.edges)}
    return json.dumps(doc, sort_keys=True) + "\n"


def parse_tables(text: str) -> dict[str, SymmetricSpec]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from None
    out = {}
    for gid, bits in doc.items():
        try:
            out[str(gid)] = SymmetricSpec.from_bits(str(bits))
        except ValueError as e:
            raise SchemaError(f"table for {gid!r}: {e}") from None
    return out
