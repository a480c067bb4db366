"""Compile arbitrary symmetric Boolean functions to the majority basis.

A symmetric function of n bits is the set of accepted one-counts.  Each
accepted count a is recognized by a pair of padded majority gates (fires
at >= a but not at >= a+1); the padding uses repeated wires into the two
constant gates.  The end counts a = 0 and a = n need only half a gadget,
which keeps the gate count within 5n + 3 even when both are accepted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .core import (
    Circuit,
    ConstantGate,
    InternalGate,
    RelationalGate,
    SymcircError,
    sym_fn,
    sym_position,
)
from .evaluation import AT_LEAST_HALF, STRICT, RhoStructure
from .normalize import ensure_constants


class NonSymmetricGate(SymcircError):
    pass


class MissingSpec(SymcircError):
    pass


@dataclass(frozen=True)
class SymmetricSpec:
    """A symmetric function of n bits: the set of accepted one-counts."""

    n: int
    counts: frozenset[int]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one input")
        if any(not (0 <= a <= self.n) for a in self.counts):
            raise ValueError("accepted counts must lie in {0..n}")

    @staticmethod
    def from_bits(bits: str) -> "SymmetricSpec":
        if any(ch not in "01" for ch in bits) or len(bits) < 2:
            raise ValueError("expected a 0/1 string of length n+1")
        n = len(bits) - 1
        return SymmetricSpec(n, frozenset(a for a, ch in enumerate(bits) if ch == "1"))

    def to_bits(self) -> str:
        return "".join("1" if a in self.counts else "0" for a in range(self.n + 1))

    def fires(self, ones: int) -> bool:
        return ones in self.counts


def _threshold_padding(n: int, t: int, convention: str) -> tuple[int, int]:
    """(pad bit, pad count) making MAJ over n inputs fire iff #ones >= t."""
    if convention == STRICT:
        if 2 * t >= n + 1:
            return 0, 2 * t - n - 1
        return 1, n - 2 * t + 1
    if 2 * t >= n:
        return 0, 2 * t - n
    return 1, n - 2 * t


def _fragment(
    spec: SymmetricSpec,
    inputs: list[str],
    consts: dict[int, str],
    prefix: str,
    convention: str,
) -> tuple[list[InternalGate], str]:
    """Internal gates of the compiled fragment plus the output gate id.

    `inputs` are the n child gate ids the fragment reads; padding wires
    repeat positions into the constant gates (legal at symmetric gates).
    """
    n = spec.n
    gates: list[InternalGate] = []

    def maj_at_least(t: int, gid: str) -> str:
        bit, pad = _threshold_padding(n, t, convention)
        labels = {sym_position(i + 1): h for i, h in enumerate(inputs)}
        for k in range(pad):
            labels[sym_position(n + 1 + k)] = consts[bit]
        gates.append(InternalGate(gid, sym_fn("MAJ", n + pad), labels))
        return gid

    or_children: list[str] = []
    for a in sorted(spec.counts):
        if a == 0:
            m = maj_at_least(1, f"{prefix}majn0")
            gates.append(
                InternalGate(f"{prefix}not0", sym_fn("NAND", 1), {sym_position(1): m})
            )
            or_children.append(f"{prefix}not0")
        elif a == n:
            or_children.append(maj_at_least(n, f"{prefix}maj{n}"))
        else:
            lo = maj_at_least(a, f"{prefix}maj{a}")
            hi = maj_at_least(a + 1, f"{prefix}majn{a}")
            gates.append(
                InternalGate(f"{prefix}not{a}", sym_fn("NAND", 1), {sym_position(1): hi})
            )
            gates.append(
                InternalGate(
                    f"{prefix}cnt{a}",
                    sym_fn("AND", 2),
                    {sym_position(1): lo, sym_position(2): f"{prefix}not{a}"},
                )
            )
            or_children.append(f"{prefix}cnt{a}")
    out = f"{prefix}out"
    gates.append(
        InternalGate(
            out,
            sym_fn("OR", len(or_children)),
            {sym_position(i + 1): h for i, h in enumerate(or_children)},
        )
    )
    return gates, out


def compile_symmetric(
    spec: SymmetricSpec, convention: str = AT_LEAST_HALF
) -> Circuit:
    """Depth-5 majority-basis circuit computing the symmetric function.

    The result is an order-n circuit over one unary relation X whose
    inputs are the relational gates X(1)..X(n); it is symmetric, of size
    at most 5n + 3, width at most 2n + 2, and depth at most 5.
    """
    n = spec.n
    gates: list = [RelationalGate(f"x{i}", "X", (i,)) for i in range(1, n + 1)]
    gates.append(ConstantGate("c0", 0))
    gates.append(ConstantGate("c1", 1))
    consts = {0: "c0", 1: "c1"}
    frag, out = _fragment(spec, [f"x{i}" for i in range(1, n + 1)], consts, "", convention)
    gates.extend(frag)
    return Circuit(n, (("X", 1),), 0, gates, {(): out})


def lower_to_majority(
    c: Circuit,
    tables: Mapping[str, SymmetricSpec],
    convention: str = AT_LEAST_HALF,
) -> Circuit:
    """Replace each gate named in `tables` by its compiled fragment.

    Gates already over the majority basis are kept verbatim; a rank gate
    anywhere is an error.  The spec for a gate must cover its fan-in.
    """
    for g in c.internal_gates():
        if not g.fn.is_symmetric:
            raise NonSymmetricGate(f"gate {g.gid!r} computes {g.fn.name}")
    for gid, spec in tables.items():
        if gid not in c.gates:
            raise MissingSpec(f"table entry {gid!r} names no gate")
        g = c.gates[gid]
        if not isinstance(g, InternalGate):
            raise MissingSpec(f"table entry {gid!r} is not an internal gate")
        if spec.n != len(g.fn.index()):
            raise MissingSpec(
                f"table for {gid!r} covers {spec.n} inputs, gate has {len(g.fn.index())}"
            )
    if not tables:
        return c

    base, consts = ensure_constants(c)
    replacement = {gid: f"{gid}::out" for gid in tables}
    new_gates: list = []
    for gid in sorted(tables):
        g = base.gates[gid]
        children = [replacement.get(h, h) for _, h in sorted(g.labels.items())]
        frag, out = _fragment(tables[gid], children, consts, f"{gid}::", convention)
        assert out == replacement[gid]
        if any(fg.gid in base.gates for fg in frag):
            raise ValueError(f"fragment ids for {gid!r} collide with existing gates")
        new_gates.extend(frag)

    gates: list = list(new_gates)
    for gid in sorted(base.gates):
        if gid in replacement:
            continue
        g = base.gates[gid]
        if isinstance(g, InternalGate):
            labels = {x: replacement.get(h, h) for x, h in g.labels.items()}
            gates.append(InternalGate(gid, g.fn, labels))
        else:
            gates.append(g)
    outputs = {tup: replacement.get(gid, gid) for tup, gid in base.outputs.items()}
    return Circuit(base.order, base.rho, base.arity, gates, outputs)


def evaluate_with_tables(
    c: Circuit,
    tables: Mapping[str, SymmetricSpec],
    a: RhoStructure,
    gamma: Mapping[str, int],
    convention: str = AT_LEAST_HALF,
) -> dict[str, int]:
    """Reference semantics for a circuit with table-backed symmetric gates."""
    from .evaluation import apply_function

    if a.size != c.order:
        raise SymcircError("structure size differs from circuit order")
    inv = {v: k for k, v in gamma.items()}
    bits: dict[str, int] = {}
    for gid in c.topo_order():
        g = c.gates[gid]
        if isinstance(g, ConstantGate):
            bits[gid] = g.bit
        elif isinstance(g, RelationalGate):
            named = tuple(inv[v] for v in g.tup)
            bits[gid] = int(named in a.relations.get(g.relation, set()))
        elif gid in tables:
            ones = sum(bits[h] for h in g.labels.values())
            bits[gid] = int(tables[gid].fires(ones))
        else:
            bits[gid] = apply_function(
                g.fn, {x: bits[h] for x, h in g.labels.items()}, convention
            )
    return bits
