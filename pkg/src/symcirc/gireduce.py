"""Hardness-instance generators: circuits whose symmetry / equivalence
questions encode bipartite-graph isomorphism, plus the brute-force
isomorphism oracle they are checked against."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional

from .core import (
    Circuit,
    InternalGate,
    RelationalGate,
    SymcircError,
    TooLarge,
    is_prime,
    rank_cell,
    rank_fn,
    sym_fn,
    sym_position,
)
from .evaluation import NotPrime, enumeration_budget


class DimensionMismatch(SymcircError):
    pass


class GateNotFound(SymcircError):
    pass


@dataclass(frozen=True)
class BipartiteGraph:
    a: int
    b: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.edges:
            if not (1 <= u <= self.a and 1 <= v <= self.b):
                raise ValueError(f"edge ({u},{v}) outside [{self.a}]x[{self.b}]")

    @staticmethod
    def make(a: int, b: int, edges) -> "BipartiteGraph":
        return BipartiteGraph(a, b, frozenset((int(u), int(v)) for u, v in edges))


def all_bipartite_graphs(a: int, b: int) -> Iterator[BipartiteGraph]:
    cells = [(u, v) for u in range(1, a + 1) for v in range(1, b + 1)]
    for mask in range(2 ** len(cells)):
        yield BipartiteGraph.make(
            a, b, (c for i, c in enumerate(cells) if (mask >> i) & 1)
        )


def bipartite_iso(
    b1: BipartiteGraph, b2: BipartiteGraph, budget: Optional[int] = None
) -> bool:
    """Side-respecting isomorphism by brute force over Sym_a x Sym_b."""
    if (b1.a, b1.b) != (b2.a, b2.b):
        raise DimensionMismatch("graphs have different side sizes")
    if math.factorial(b1.a) * math.factorial(b1.b) > enumeration_budget(budget):
        raise TooLarge("isomorphism search exceeds budget")
    if len(b1.edges) != len(b2.edges):
        return False
    for pa in itertools.permutations(range(1, b1.a + 1)):
        for pb in itertools.permutations(range(1, b1.b + 1)):
            if all((pa[u - 1], pb[v - 1]) in b2.edges for u, v in b1.edges):
                return True
    return False


def _check_pair(b1: BipartiteGraph, b2: BipartiteGraph, p: int):
    if (b1.a, b1.b) != (b2.a, b2.b):
        raise DimensionMismatch("graphs have different side sizes")
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")


def gen_syntactic_instance(
    b1: BipartiteGraph, b2: BipartiteGraph, r: int, p: int
) -> tuple[Circuit, str, str]:
    """Order-2 circuit where the two rank gates are syntactically
    equivalent iff the graphs are bipartite-isomorphic.

    Every edge/non-edge is routed through its own single-input AND
    gadget, so the circuit has injective labels but (with two gadgets
    sharing a child) is not transparent.
    """
    _check_pair(b1, b2, p)
    a, b = b1.a, b1.b
    n = 2
    rel = [RelationalGate(f"R{i}", "R", (i,)) for i in range(1, n + 1)]
    grid = {sym_position(q): f"R{q}" for q in range(1, n + 1)}
    gand = InternalGate("gand", sym_fn("AND", n), dict(grid))
    gor = InternalGate("gor", sym_fn("OR", n), dict(grid))
    nodes = []
    for i, g in ((1, b1), (2, b2)):
        for u in range(1, a + 1):
            for v in range(1, b + 1):
                child = "gand" if (u, v) in g.edges else "gor"
                nodes.append(
                    InternalGate(
                        f"n{i}_{u}_{v}", sym_fn("AND", 1), {sym_position(1): child}
                    )
                )
    ranks = [
        InternalGate(
            f"rank{i}",
            rank_fn(r, p, a, b),
            {
                rank_cell(u, v): f"n{i}_{u}_{v}"
                for u in range(1, a + 1)
                for v in range(1, b + 1)
            },
        )
        for i in (1, 2)
    ]
    out = InternalGate(
        "out", sym_fn("AND", 2), {sym_position(1): "rank1", sym_position(2): "rank2"}
    )
    c = Circuit(n, (("R", 1),), 0, rel + [gand, gor] + nodes + ranks + [out], {(): "out"})
    return c, "rank1", "rank2"


def gen_unique_children_instance(
    b1: BipartiteGraph, b2: BipartiteGraph, r: int, p: int
) -> tuple[Circuit, str, str]:
    """Same reduction with the node gadgets deleted: the rank gates read
    the AND/OR designators directly, so every non-symmetric gate has
    unique children but the labels are no longer injective."""
    _check_pair(b1, b2, p)
    a, b = b1.a, b1.b
    n = 2
    rel = [RelationalGate(f"R{i}", "R", (i,)) for i in range(1, n + 1)]
    grid = {sym_position(q): f"R{q}" for q in range(1, n + 1)}
    gand = InternalGate("gand", sym_fn("AND", n), dict(grid))
    gor = InternalGate("gor", sym_fn("OR", n), dict(grid))
    ranks = []
    for i, g in ((1, b1), (2, b2)):
        labels = {
            rank_cell(u, v): ("gand" if (u, v) in g.edges else "gor")
            for u in range(1, a + 1)
            for v in range(1, b + 1)
        }
        ranks.append(InternalGate(f"rank{i}", rank_fn(r, p, a, b), labels))
    out = InternalGate(
        "out", sym_fn("AND", 2), {sym_position(1): "rank1", sym_position(2): "rank2"}
    )
    c = Circuit(n, (("R", 1),), 0, rel + [gand, gor] + ranks + [out], {(): "out"})
    return c, "rank1", "rank2"


def gen_symmetry_instance(
    b1: BipartiteGraph, b2: BipartiteGraph, r: int, p: int
) -> Circuit:
    """Order-2 circuit that is symmetric iff the graphs are isomorphic.

    Each side gets its own AND/OR designator pair anchored to one of the
    two unary inputs, so the transposition (1 2) extends exactly when the
    rank-gate labellings match up to row/column permutations.
    """
    _check_pair(b1, b2, p)
    a, b = b1.a, b1.b
    gates: list = [RelationalGate(f"R{i}", "R", (i,)) for i in (1, 2)]
    for i in (1, 2):
        gates.append(
            InternalGate(f"and{i}", sym_fn("AND", 1), {sym_position(1): f"R{i}"})
        )
        gates.append(
            InternalGate(f"or{i}", sym_fn("OR", 1), {sym_position(1): f"R{i}"})
        )
    for i, g in ((1, b1), (2, b2)):
        labels = {
            rank_cell(u, v): (f"and{i}" if (u, v) in g.edges else f"or{i}")
            for u in range(1, a + 1)
            for v in range(1, b + 1)
        }
        gates.append(InternalGate(f"rank{i}", rank_fn(r, p, a, b), labels))
    gates.append(
        InternalGate(
            "out", sym_fn("AND", 2), {sym_position(1): "rank1", sym_position(2): "rank2"}
        )
    )
    return Circuit(2, (("R", 1),), 0, gates, {(): "out"})


def gen_unique_labels_instance(
    c: Circuit, g1: str, g2: str
) -> tuple[Circuit, str]:
    """Prune to the input cones of g1 and g2 and hang an AND over them.

    The new output gate fails to have unique children exactly when g1
    and g2 are syntactically equivalent in the pruned circuit.
    """
    if g1 not in c.gates or g2 not in c.gates:
        raise GateNotFound(f"{g1!r} or {g2!r} not in circuit")
    if g1 == g2:
        raise GateNotFound("need two distinct gates")
    keep = {g1, g2}
    stack = [g1, g2]
    children = c.children_map()
    while stack:
        gid = stack.pop()
        for h in children[gid]:
            if h not in keep:
                keep.add(h)
                stack.append(h)
    taken = set(keep)
    out = "__ul_out"
    while out in taken:
        out = out + "_"
    gates = [c.gates[gid] for gid in sorted(keep)]
    gates.append(
        InternalGate(out, sym_fn("AND", 2), {sym_position(1): g1, sym_position(2): g2})
    )
    return Circuit(c.order, c.rho, 0, gates, {(): out}), out
