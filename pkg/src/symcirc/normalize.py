"""Transparency / unique-labels decisions and the unique-labels transform."""

from __future__ import annotations

from typing import Optional

from .core import (
    Circuit,
    ConstantGate,
    InternalGate,
    remove_redundant,
    sym_fn,
    sym_position,
)
from .equivalence import NotTransparent, quotient, syntactic_classes

GVEE = "__gvee"
CONST_IDS = {0: "__const0", 1: "__const1"}


def is_transparent(c: Circuit) -> tuple[bool, Optional[tuple[str, str]]]:
    """Decide transparency; on failure also name the first offending gate."""
    try:
        syntactic_classes(c)
        return True, None
    except NotTransparent as e:
        return False, (e.gate, e.reason)


def has_unique_labels(c: Circuit) -> bool:
    """Every gate labels injectively and has pairwise-inequivalent children.

    Equivalent formulation used here: |ind(g)| equals the number of child
    equivalence classes, for every internal gate.
    """
    try:
        eq = syntactic_classes(c)
    except NotTransparent:
        return False
    for g in c.internal_gates():
        classes = {eq.rep[h] for h in g.labels.values()}
        if len(g.fn.index()) != len(classes):
            return False
    return True


def fresh_id(taken: set[str], base: str) -> str:
    gid = base
    while gid in taken:
        gid = gid + "_"
    taken.add(gid)
    return gid


def ensure_constants(c: Circuit) -> tuple[Circuit, dict[int, str]]:
    """Return an equivalent circuit containing both constant gates."""
    have = {g.bit: g.gid for g in c.constant_gates()}
    if len(have) == 2:
        return c, have
    taken = set(c.gates)
    gates = list(c.gates.values())
    for bit in (0, 1):
        if bit not in have:
            gid = fresh_id(taken, CONST_IDS[bit])
            have[bit] = gid
            gates.append(ConstantGate(gid, bit))
    return Circuit(c.order, c.rho, c.arity, gates, dict(c.outputs)), have


def to_unique_labels(c: Circuit) -> Circuit:
    """Transform a transparent circuit into an equivalent unique-labels one.

    Pipeline: drop redundant gates, quotient by syntactic equivalence, add
    the always-true OR gadget and widen every AND gate with it (so fan-in
    one AND gates become available as fresh chain links), then replace
    duplicate wires into the same child by chains of AND[1] gates.
    Raises NotTransparent when the input is not transparent.
    """
    c0 = quotient(remove_redundant(c))
    c0, consts = ensure_constants(c0)
    g0, g1 = consts[0], consts[1]

    taken = set(c0.gates)
    gvee = fresh_id(taken, GVEE)

    # C1: widen AND gates (and a pre-existing OR[2] over the constants) by gvee
    gates1: list = []
    for gid in sorted(c0.gates):
        g = c0.gates[gid]
        if not isinstance(g, InternalGate):
            gates1.append(g)
            continue
        if (
            g.fn == sym_fn("OR", 2)
            and set(g.labels.values()) == {g0, g1}
        ):
            labels = {
                sym_position(1): g.labels[sym_position(1)],
                sym_position(2): g.labels[sym_position(2)],
                sym_position(3): gvee,
            }
            gates1.append(InternalGate(gid, sym_fn("OR", 3), labels))
        elif g.fn.kind == "AND":
            k = g.fn.arity
            labels = dict(g.labels)
            labels[sym_position(k + 1)] = gvee
            gates1.append(InternalGate(gid, sym_fn("AND", k + 1), labels))
        else:
            gates1.append(g)
    gates1.append(
        InternalGate(gvee, sym_fn("OR", 2), {sym_position(1): g0, sym_position(2): g1})
    )
    c1 = Circuit(c0.order, c0.rho, c0.arity, gates1, dict(c0.outputs))

    # C': break up duplicate wires with AND[1] chains
    mult: dict[str, int] = {}
    for g in c1.internal_gates():
        count: dict[str, int] = {}
        for h in g.labels.values():
            count[h] = count.get(h, 0) + 1
        for h, k in count.items():
            mult[h] = max(mult.get(h, 0), k)

    taken = set(c1.gates)
    chain: dict[str, list[str]] = {}
    chain_gates: list[InternalGate] = []
    for h in sorted(mult):
        if mult[h] <= 1:
            continue
        ids = [fresh_id(taken, f"{h}#dup{i}") for i in range(1, mult[h])]
        chain[h] = ids
        prev = h
        for gid in ids:
            chain_gates.append(InternalGate(gid, sym_fn("AND", 1), {sym_position(1): prev}))
            prev = gid

    gates2: list = []
    for gid in sorted(c1.gates):
        g = c1.gates[gid]
        if not isinstance(g, InternalGate):
            gates2.append(g)
            continue
        seen: dict[str, int] = {}
        labels = {}
        for x in sorted(g.labels):  # 0-based duplicate order is lexicographic
            h = g.labels[x]
            i = seen.get(h, 0)
            seen[h] = i + 1
            labels[x] = h if i == 0 else chain[h][i - 1]
        gates2.append(InternalGate(gid, g.fn, labels))
    gates2.extend(chain_gates)
    return Circuit(c1.order, c1.rho, c1.arity, gates2, dict(c1.outputs))
