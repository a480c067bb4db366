"""Circuit evaluation on encoded structures, plus brute-force semantic oracles.

Everything here is exact: matrix rank is computed by modular elimination
over the integers, and the invariance/equality oracles enumerate all
structures and encodings within a configured budget.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .core import (
    Circuit,
    ConstantGate,
    IndexElement,
    InternalGate,
    RelationalGate,
    StructuredFunction,
    SymcircError,
    TooLarge,
    is_prime,
    rank_cell,
)

DEFAULT_BUDGET = 10**7

AT_LEAST_HALF = "at-least-half"
STRICT = "strict"


class OrderMismatch(SymcircError):
    pass


class PartialAssignment(SymcircError):
    pass


class NotPrime(SymcircError):
    pass


def enumeration_budget(override: Optional[int] = None) -> int:
    if override is not None:
        return override
    env = os.environ.get("SYMCIRC_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class BitMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("matrix dimensions must be positive")
        if len(self.entries) != self.rows or any(
            len(r) != self.cols for r in self.entries
        ):
            raise ValueError("entry shape does not match dimensions")


def rank_mod_p(m: BitMatrix | Sequence[Sequence[int]], p: int) -> int:
    """Matrix rank over F_p by exact fraction-free elimination."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    rows = [list(r) for r in (m.entries if isinstance(m, BitMatrix) else m)]
    if not rows or not rows[0]:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next(
            (r for r in range(rank, len(rows)) if rows[r][col] % p != 0), None
        )
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], p - 2, p)
        rows[rank] = [(v * inv) % p for v in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col] % p:
                f = rows[r][col] % p
                rows[r] = [(a - f * b) % p for a, b in zip(rows[r], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def apply_function(
    fn: StructuredFunction,
    assignment: Mapping[IndexElement, int],
    majority_convention: str = AT_LEAST_HALF,
) -> int:
    """Evaluate one structured function on a total index assignment."""
    index = fn.index()
    missing = [x for x in index if x not in assignment]
    if missing:
        raise PartialAssignment(
            f"{fn.name}: no bit for index element {missing[0].values}"
        )
    bits = [assignment[x] & 1 for x in index]
    if fn.kind == "AND":
        return int(all(bits))
    if fn.kind == "OR":
        return int(any(bits))
    if fn.kind == "NAND":
        return int(not all(bits))
    if fn.kind == "MAJ":
        ones = sum(bits)
        if majority_convention == STRICT:
            return int(2 * ones > fn.arity)
        return int(2 * ones >= fn.arity)
    matrix = [
        [assignment[rank_cell(i, j)] & 1 for j in range(1, fn.cols + 1)]
        for i in range(1, fn.rows + 1)
    ]
    return int(rank_mod_p(matrix, fn.p) <= fn.r)


@dataclass
class RhoStructure:
    """A finite relational structure: named universe plus relation contents."""

    universe: list[str]
    relations: dict[str, set[tuple[str, ...]]]

    def __post_init__(self):
        if len(set(self.universe)) != len(self.universe):
            raise ValueError("universe names must be distinct")
        names = set(self.universe)
        for rel, tuples in self.relations.items():
            for t in tuples:
                if any(v not in names for v in t):
                    raise ValueError(f"tuple {t} of {rel} leaves the universe")

    @property
    def size(self) -> int:
        return len(self.universe)


Gamma = dict[str, int]


def check_gamma(a: RhoStructure, gamma: Mapping[str, int], n: int) -> None:
    if set(gamma) != set(a.universe):
        raise OrderMismatch("bijection domain must equal the structure universe")
    if sorted(gamma.values()) != list(range(1, n + 1)):
        raise OrderMismatch("bijection image must be [1..n]")


def evaluate_gates(
    c: Circuit,
    a: RhoStructure,
    gamma: Mapping[str, int],
    majority_convention: str = AT_LEAST_HALF,
) -> dict[str, int]:
    """Recursively evaluate every gate of c on the encoding gamma(a)."""
    if a.size != c.order:
        raise OrderMismatch(f"structure size {a.size} != circuit order {c.order}")
    check_gamma(a, gamma, c.order)
    inv = {v: k for k, v in gamma.items()}
    bits: dict[str, int] = {}
    for gid in c.topo_order():
        g = c.gates[gid]
        if isinstance(g, ConstantGate):
            bits[gid] = g.bit
        elif isinstance(g, RelationalGate):
            named = tuple(inv[v] for v in g.tup)
            bits[gid] = int(named in a.relations.get(g.relation, set()))
        else:
            assignment = {x: bits[h] for x, h in g.labels.items()}
            bits[gid] = apply_function(g.fn, assignment, majority_convention)
    return bits


def evaluate(
    c: Circuit,
    a: RhoStructure,
    gamma: Mapping[str, int],
    majority_convention: str = AT_LEAST_HALF,
) -> dict[tuple[str, ...], int]:
    """The q-ary query defined by c on (a, gamma): universe tuple -> bit."""
    bits = evaluate_gates(c, a, gamma, majority_convention)
    out: dict[tuple[str, ...], int] = {}
    for named in itertools.product(a.universe, repeat=c.arity):
        key = tuple(gamma[v] for v in named)
        out[named] = bits[c.outputs[key]]
    return out


# -- exhaustive enumeration ---------------------------------------------


def relation_slots(rho: Sequence[tuple[str, int]], n: int) -> list[tuple[str, tuple[int, ...]]]:
    """All (relation, tuple) input positions of an order-n circuit, lex order."""
    slots = []
    for rel, k in rho:
        for tup in itertools.product(range(1, n + 1), repeat=k):
            slots.append((rel, tup))
    return slots


def canonical_universe(n: int) -> list[str]:
    return [f"u{i}" for i in range(1, n + 1)]


def all_structures(
    rho: Sequence[tuple[str, int]], universe: Sequence[str]
) -> Iterator[RhoStructure]:
    """Every rho-structure over the given universe, in a deterministic order."""
    per_rel = []
    for rel, k in rho:
        tuples = list(itertools.product(universe, repeat=k))
        per_rel.append((rel, tuples))
    counts = [len(t) for _, t in per_rel]
    for mask_bits in itertools.product(*[range(2**k) for k in counts]):
        rels = {}
        for (rel, tuples), mask in zip(per_rel, mask_bits):
            rels[rel] = {t for i, t in enumerate(tuples) if (mask >> i) & 1}
        yield RhoStructure(list(universe), rels)


def all_gammas(universe: Sequence[str], n: int) -> Iterator[Gamma]:
    for perm in itertools.permutations(range(1, n + 1)):
        yield dict(zip(universe, perm))


def invariance_work(c: Circuit) -> int:
    slots = len(relation_slots(c.rho, c.order))
    if slots > 60:
        return 2**62
    return math.factorial(c.order) * (2**slots)


def decide_invariant(
    c: Circuit, max_n: int = 4, budget: Optional[int] = None
) -> bool:
    """True iff the computed query never depends on the encoding bijection.

    Enumerates every structure of size n and every pair of bijections;
    refuses when the order exceeds max_n or the work exceeds the budget.
    Per-encoding evaluations are memoized: the gate values depend only on
    the encoded structure gamma(a).
    """
    if c.order > max_n:
        raise TooLarge(f"order {c.order} exceeds max_n={max_n}")
    if invariance_work(c) > enumeration_budget(budget):
        raise TooLarge("invariance enumeration exceeds budget")
    universe = canonical_universe(c.order)
    slots = relation_slots(c.rho, c.order)
    memo: dict[tuple[int, ...], dict[str, int]] = {}

    def gate_bits(a: RhoStructure, gamma: Gamma) -> dict[str, int]:
        inv = {v: k for k, v in gamma.items()}
        key = tuple(
            int(tuple(inv[v] for v in tup) in a.relations.get(rel, set()))
            for rel, tup in slots
        )
        got = memo.get(key)
        if got is None:
            got = memo[key] = evaluate_gates(c, a, gamma)
        return got

    gammas = list(all_gammas(universe, c.order))
    for a in all_structures(c.rho, universe):
        baseline = None
        for gamma in gammas:
            bits = gate_bits(a, gamma)
            outs = tuple(
                bits[c.outputs[tuple(gamma[v] for v in named)]]
                for named in itertools.product(universe, repeat=c.arity)
            )
            if baseline is None:
                baseline = outs
            elif outs != baseline:
                return False
    return True


def semantic_gate_equal(
    c: Circuit, g: str, h: str, budget: Optional[int] = None
) -> bool:
    """True iff gates g and h evaluate equally on every (structure, bijection)."""
    if g == h:
        return True
    if invariance_work(c) > enumeration_budget(budget):
        raise TooLarge("gate-equality enumeration exceeds budget")
    universe = canonical_universe(c.order)
    for a in all_structures(c.rho, universe):
        for gamma in all_gammas(universe, c.order):
            bits = evaluate_gates(c, a, gamma)
            if bits[g] != bits[h]:
                return False
    return True


def evaluate_inputs(
    c: Circuit,
    f: Mapping[tuple[str, tuple[int, ...]], int],
    majority_convention: str = AT_LEAST_HALF,
) -> dict[str, int]:
    """Evaluate treating f as the bit carried by each relational input slot.

    This is the structured-function view of the circuit: f assigns a bit to
    every (relation, tuple) position over [n].
    """
    bits: dict[str, int] = {}
    for gid in c.topo_order():
        g = c.gates[gid]
        if isinstance(g, ConstantGate):
            bits[gid] = g.bit
        elif isinstance(g, RelationalGate):
            bits[gid] = f.get((g.relation, g.tup), 0) & 1
        else:
            assignment = {x: bits[hh] for x, hh in g.labels.items()}
            bits[gid] = apply_function(g.fn, assignment, majority_convention)
    return bits


def all_input_maps(c: Circuit) -> Iterator[dict[tuple[str, tuple[int, ...]], int]]:
    slots = relation_slots(c.rho, c.order)
    for mask in range(2 ** len(slots)):
        yield {slot: (mask >> i) & 1 for i, slot in enumerate(slots)}
