"""Syntactic equivalence of gates, decided layer by layer, and quotients.

Two gates are syntactically equivalent when the circuits under them are
hereditary copies of one another.  For transparent circuits (injective
labels and pairwise-inequivalent children at every non-symmetric gate)
the relation is computable by a dynamic program over depth layers: at a
symmetric gate the quotiented labellings are isomorphic iff the child
class multisets agree, and at a non-symmetric gate the candidate matching
is unique and only needs to be checked for product form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .core import (
    Circuit,
    ConstantGate,
    IndexElement,
    InternalGate,
    PreconditionError,
    RelationalGate,
    StructuredFunction,
)


class NotTransparent(PreconditionError):
    def __init__(self, gate: str, reason: str):
        super().__init__(f"gate {gate!r}: {reason}")
        self.gate = gate
        self.reason = reason


@dataclass
class EquivalenceClasses:
    """Partition of the gate set; each gate maps to its minimal-id representative."""

    rep: dict[str, str]

    def same(self, g: str, h: str) -> bool:
        return self.rep[g] == self.rep[h]

    def classes(self) -> dict[str, tuple[str, ...]]:
        acc: dict[str, list[str]] = {}
        for gid, r in self.rep.items():
            acc.setdefault(r, []).append(gid)
        return {r: tuple(sorted(v)) for r, v in acc.items()}

    def all_singleton(self) -> bool:
        return all(gid == r for gid, r in self.rep.items())


def index_iso_check(
    fn: StructuredFunction, candidate: Mapping[IndexElement, IndexElement]
) -> bool:
    """Is a bijection of ind(fn) induced by an automorphism of fn's structure?

    For symmetric kinds every bijection of the positions qualifies.  For
    RANK the map must factor as a row permutation paired with a column
    permutation.
    """
    if fn.is_symmetric:
        return True
    f_row: dict[int, int] = {}
    f_col: dict[int, int] = {}
    for x, y in candidate.items():
        (ri, ci), (rj, cj) = x.values, y.values
        if f_row.setdefault(ri, rj) != rj:
            return False
        if f_col.setdefault(ci, cj) != cj:
            return False
    return (
        len(set(f_row.values())) == len(f_row)
        and len(set(f_col.values())) == len(f_col)
    )


def _input_signature(c: Circuit, g) -> tuple:
    out = c.output_preimage().get(g.gid)
    if isinstance(g, ConstantGate):
        return ("const", g.bit, out)
    return ("rel", g.relation, g.tup, out)


def _match_nonsymmetric(
    c: Circuit, g: InternalGate, h: InternalGate, rep: dict[str, str]
) -> bool:
    """Unique-labels matching from the transparency proof, greedy in lex order."""
    index = g.fn.index()
    by_class: dict[str, IndexElement] = {}
    for y in h.fn.index():
        by_class[rep[h.labels[y]]] = y
    used: set[IndexElement] = set()
    f: dict[IndexElement, IndexElement] = {}
    for x in index:
        y = by_class.get(rep[g.labels[x]])
        if y is None or y in used:
            return False
        used.add(y)
        f[x] = y
    if len(used) != len(index):
        return False
    return index_iso_check(g.fn, f)


def syntactic_classes(c: Circuit) -> EquivalenceClasses:
    """Compute syntactic equivalence for a transparent circuit.

    Raises NotTransparent (with the first offending gate) when a
    non-symmetric gate lacks injective labels or has two equivalent
    children; the layered check doubles as the transparency decision
    procedure.
    """
    depths = c.depths()
    layers: dict[int, list[str]] = {}
    for gid, d in depths.items():
        layers.setdefault(d, []).append(gid)

    rep: dict[str, str] = {}
    sig_cache: dict[tuple, str] = {}
    for gid in sorted(layers.get(0, [])):
        sig = _input_signature(c, c.gates[gid])
        rep[gid] = sig_cache.setdefault(sig, gid)

    for d in range(1, max(layers) + 1 if layers else 1):
        gates = [c.gates[gid] for gid in sorted(layers.get(d, []))]
        # transparency at this layer, children already classed
        for g in gates:
            assert isinstance(g, InternalGate)
            if g.fn.is_symmetric:
                continue
            if len(set(g.labels.values())) != len(g.labels):
                raise NotTransparent(g.gid, "non-symmetric gate with non-injective labels")
            kid_classes = [rep[h] for h in set(g.labels.values())]
            if len(set(kid_classes)) != len(kid_classes):
                raise NotTransparent(
                    g.gid, "non-symmetric gate with syntactically equivalent children"
                )
        # symmetric gates: class = multiset of child classes
        for g in gates:
            if not g.fn.is_symmetric:
                continue
            out = c.output_preimage().get(g.gid)
            kids = tuple(sorted(rep[g.labels[x]] for x in g.fn.index()))
            sig = ("sym", g.fn, out, kids)
            rep[g.gid] = sig_cache.setdefault(sig, g.gid)
        # non-symmetric gates: pairwise unique matching within (fn, output) groups
        groups: dict[tuple, list[InternalGate]] = {}
        for g in gates:
            if g.fn.is_symmetric:
                continue
            out = c.output_preimage().get(g.gid)
            kids = tuple(sorted(rep[h] for h in set(g.labels.values())))
            groups.setdefault((g.fn, out, kids), []).append(g)
        for group in groups.values():
            leaders: list[InternalGate] = []
            for g in group:
                for lead in leaders:
                    if _match_nonsymmetric(c, lead, g, rep):
                        rep[g.gid] = rep[lead.gid]
                        break
                else:
                    leaders.append(g)
                    rep[g.gid] = g.gid
    return EquivalenceClasses(rep)


def quotient(c: Circuit) -> Circuit:
    """Merge each syntactic-equivalence class into its minimal-id gate."""
    eq = syntactic_classes(c)
    rep = eq.rep
    gates = []
    for gid in sorted(c.gates):
        if rep[gid] != gid:
            continue
        g = c.gates[gid]
        if isinstance(g, InternalGate):
            gates.append(
                InternalGate(gid, g.fn, {x: rep[h] for x, h in g.labels.items()})
            )
        else:
            gates.append(g)
    outputs = {tup: rep[gid] for tup, gid in c.outputs.items()}
    return Circuit(c.order, c.rho, c.arity, gates, outputs)
