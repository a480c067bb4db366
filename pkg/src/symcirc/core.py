"""Circuit model: structured gate functions, gates, circuits, validation.

A circuit of order n takes encodings of relational structures with
universe [n].  Internal gates compute structured functions (AND/OR/NAND/MAJ
over multisets of inputs, or RANK over a 0/1 matrix of inputs); each
internal gate carries a labelling from the function's index set to its
child gates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Optional


class SymcircError(Exception):
    """Base class for library errors."""


class PreconditionError(SymcircError):
    """An algorithmic precondition does not hold (e.g. not transparent)."""


class TooLarge(SymcircError):
    """Requested enumeration exceeds the configured budget."""


SYMMETRIC_KINDS = ("AND", "OR", "NAND", "MAJ")
KINDS = SYMMETRIC_KINDS + ("RANK",)

# Sort/relation names used for the index structures of the two function
# shapes.  Symmetric functions live over one sort with one unary relation;
# rank functions over a row sort and a column sort with one binary relation.
SYM_SORT = "s"
SYM_REL = "X"
ROW_SORT = "row"
COL_SORT = "col"
RANK_REL = "M"


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Vocabulary:
    """Many-sorted vocabulary: sort names plus typed relation symbols."""

    sorts: tuple[str, ...]
    relations: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        names = [r for r, _ in self.relations]
        if len(set(names)) != len(names):
            raise ValueError("duplicate relation names")
        if not self.relations:
            raise ValueError("vocabulary needs at least one relation")
        for rel, typ in self.relations:
            for s in typ:
                if s not in self.sorts:
                    raise ValueError(f"relation {rel} uses unknown sort {s}")


@dataclass
class SortedUniverse:
    """Universe sizes per sort; sort s carries the initial segment [d_s]."""

    sizes: dict[str, int]

    def __post_init__(self):
        for s, d in self.sizes.items():
            if d < 1:
                raise ValueError(f"sort {s} needs a positive size, got {d}")


class IndexElement:
    """One position of a structured function's input: a tagged sorted tuple.

    Instances from sym_position / rank_cell are interned, so equality
    usually resolves by identity.
    """

    __slots__ = ("tag", "entries", "_hash")

    def __init__(self, tag: str, entries: tuple[tuple[str, int], ...]):
        self.tag = tag
        self.entries = entries
        self._hash = hash((tag, entries))

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.entries)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (
            isinstance(other, IndexElement)
            and self.tag == other.tag
            and self.entries == other.entries
        )

    def __lt__(self, other):
        return (self.tag, self.entries) < (other.tag, other.entries)

    def __repr__(self):
        return f"IndexElement({self.tag!r}, {self.entries!r})"


@lru_cache(maxsize=None)
def sym_position(i: int) -> IndexElement:
    return IndexElement(SYM_REL, ((SYM_SORT, i),))


@lru_cache(maxsize=None)
def rank_cell(i: int, j: int) -> IndexElement:
    return IndexElement(RANK_REL, ((ROW_SORT, i), (COL_SORT, j)))


class StructuredFunction:
    """A basis function: AND/OR/NAND/MAJ over m inputs, or RANK^r_p[a,b]."""

    __slots__ = ("kind", "arity", "r", "p", "rows", "cols", "_hash")

    def __init__(
        self,
        kind: str,
        arity: int = 0,
        r: int = 0,
        p: int = 0,
        rows: int = 0,
        cols: int = 0,
    ):
        if kind not in KINDS:
            raise ValueError(f"unknown gate kind {kind!r}")
        if kind == "RANK":
            if not is_prime(p):
                raise ValueError(f"RANK needs a prime modulus, got {p}")
            if rows < 1 or cols < 1:
                raise ValueError("RANK needs positive matrix dimensions")
            if not (0 <= r <= min(rows, cols)):
                raise ValueError("RANK threshold out of range")
            if arity:
                raise ValueError("RANK does not take an input count")
        else:
            if arity < 0:
                raise ValueError("input count must be non-negative")
            if r or p or rows or cols:
                raise ValueError("matrix parameters only apply to RANK")
        self.kind = kind
        self.arity = arity
        self.r = r
        self.p = p
        self.rows = rows
        self.cols = cols
        self._hash = hash((kind, arity, r, p, rows, cols))

    def _key(self):
        return (self.kind, self.arity, self.r, self.p, self.rows, self.cols)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (
            isinstance(other, StructuredFunction) and self._key() == other._key()
        )

    def __repr__(self):
        return f"StructuredFunction{self._key()!r}"

    @property
    def is_symmetric(self) -> bool:
        return self.kind != "RANK"

    def index(self) -> tuple[IndexElement, ...]:
        return _index_of(self)

    def universe(self) -> tuple[tuple[str, int], ...]:
        if self.is_symmetric:
            return tuple((SYM_SORT, i) for i in range(1, self.arity + 1))
        rows = tuple((ROW_SORT, i) for i in range(1, self.rows + 1))
        cols = tuple((COL_SORT, j) for j in range(1, self.cols + 1))
        return rows + cols

    def vocabulary(self) -> Vocabulary:
        if self.is_symmetric:
            return Vocabulary((SYM_SORT,), ((SYM_REL, (SYM_SORT,)),))
        return Vocabulary((ROW_SORT, COL_SORT), ((RANK_REL, (ROW_SORT, COL_SORT)),))

    def sorted_universe(self) -> SortedUniverse:
        if self.is_symmetric:
            return SortedUniverse({SYM_SORT: self.arity})
        return SortedUniverse({ROW_SORT: self.rows, COL_SORT: self.cols})

    @property
    def name(self) -> str:
        if self.is_symmetric:
            return f"{self.kind}[{self.arity}]"
        return f"RANK^{self.r}_{self.p}[{self.rows},{self.cols}]"


@lru_cache(maxsize=None)
def _index_of(fn: StructuredFunction) -> tuple[IndexElement, ...]:
    if fn.is_symmetric:
        return tuple(sym_position(i) for i in range(1, fn.arity + 1))
    return tuple(
        rank_cell(i, j)
        for i in range(1, fn.rows + 1)
        for j in range(1, fn.cols + 1)
    )


@lru_cache(maxsize=None)
def sym_fn(kind: str, m: int) -> StructuredFunction:
    return StructuredFunction(kind, arity=m)


@lru_cache(maxsize=None)
def rank_fn(r: int, p: int, a: int, b: int) -> StructuredFunction:
    return StructuredFunction("RANK", r=r, p=p, rows=a, cols=b)


def index_of(fn: StructuredFunction) -> tuple[IndexElement, ...]:
    """Index set of a structured function, in lexicographic order."""
    return fn.index()


@dataclass
class ConstantGate:
    gid: str
    bit: int


@dataclass
class RelationalGate:
    gid: str
    relation: str
    tup: tuple[int, ...]


@dataclass
class InternalGate:
    gid: str
    fn: StructuredFunction
    labels: dict[IndexElement, str]


Gate = ConstantGate | RelationalGate | InternalGate


class Circuit:
    """A circuit of order n over input vocabulary rho, computing a q-ary query.

    Treated as immutable once built; derived structure (wires, depths) is
    computed lazily and cached.  Equality is identity; compare circuits
    structurally via their canonical serialization.
    """

    def __init__(
        self,
        order: int,
        rho: Iterable[tuple[str, int]],
        arity: int,
        gates: Iterable[Gate],
        outputs: Mapping[tuple[int, ...], str],
    ):
        self.order = order
        self.rho = tuple((str(r), int(k)) for r, k in rho)
        self.arity = arity
        self.gates: dict[str, Gate] = {}
        for g in gates:
            if g.gid in self.gates:
                raise ValueError(f"duplicate gate id {g.gid!r}")
            self.gates[g.gid] = g
        self.outputs = {tuple(k): v for k, v in outputs.items()}
        self._cache: dict[str, object] = {}

    # -- basic views ----------------------------------------------------

    def gate(self, gid: str) -> Gate:
        return self.gates[gid]

    def gate_ids(self) -> list[str]:
        return sorted(self.gates)

    def internal_gates(self) -> list[InternalGate]:
        return [g for g in self.gates.values() if isinstance(g, InternalGate)]

    def relational_gates(self) -> list[RelationalGate]:
        return [g for g in self.gates.values() if isinstance(g, RelationalGate)]

    def constant_gates(self) -> list[ConstantGate]:
        return [g for g in self.gates.values() if isinstance(g, ConstantGate)]

    def is_output(self, gid: str) -> bool:
        return gid in self.output_preimage()

    def output_preimage(self) -> dict[str, tuple[int, ...]]:
        """Map output gate id -> its (unique, by injectivity) output tuple."""
        got = self._cache.get("output_preimage")
        if got is None:
            got = {gid: tup for tup, gid in self.outputs.items()}
            self._cache["output_preimage"] = got
        return got

    def children_of(self, gid: str) -> tuple[str, ...]:
        """Distinct children of a gate (the W(. , g) set), sorted."""
        return self.children_map()[gid]

    def children_map(self) -> dict[str, tuple[str, ...]]:
        got = self._cache.get("children")
        if got is None:
            got = {}
            for gid, g in self.gates.items():
                if isinstance(g, InternalGate):
                    got[gid] = tuple(sorted(set(g.labels.values())))
                else:
                    got[gid] = ()
            self._cache["children"] = got
        return got

    def parents_map(self) -> dict[str, tuple[str, ...]]:
        got = self._cache.get("parents")
        if got is None:
            acc: dict[str, set[str]] = {gid: set() for gid in self.gates}
            for gid, kids in self.children_map().items():
                for h in kids:
                    if h in acc:
                        acc[h].add(gid)
            got = {gid: tuple(sorted(v)) for gid, v in acc.items()}
            self._cache["parents"] = got
        return got

    def topo_order(self) -> list[str]:
        """Children-first topological order, lexicographic tie-break."""
        got = self._cache.get("topo")
        if got is None:
            children = self.children_map()
            pending = {gid: len(children[gid]) for gid in self.gates}
            parents = self.parents_map()
            import heapq

            ready = [gid for gid, k in pending.items() if k == 0]
            heapq.heapify(ready)
            out = []
            while ready:
                gid = heapq.heappop(ready)
                out.append(gid)
                for par in parents[gid]:
                    pending[par] -= 1
                    if pending[par] == 0:
                        heapq.heappush(ready, par)
            if len(out) != len(self.gates):
                raise ValueError("circuit wires contain a cycle")
            self._cache["topo"] = got = out
        return got

    def depths(self) -> dict[str, int]:
        """Longest input-to-gate path per gate; input gates have depth 0."""
        got = self._cache.get("depths")
        if got is None:
            children = self.children_map()
            parents = self.parents_map()
            pending = {gid: len(children[gid]) for gid in self.gates}
            queue = [gid for gid, k in pending.items() if k == 0]
            got = {gid: 0 for gid in queue}
            seen = len(queue)
            while queue:
                nxt = []
                for gid in queue:
                    d = got[gid] + 1
                    for par in parents[gid]:
                        if d > got.get(par, -1):
                            got[par] = d
                        pending[par] -= 1
                        if pending[par] == 0:
                            nxt.append(par)
                seen += len(nxt)
                queue = nxt
            if seen != len(self.gates):
                raise ValueError("circuit wires contain a cycle")
            self._cache["depths"] = got
        return got

    def heights(self) -> dict[str, Optional[int]]:
        """Longest gate-to-output path per gate; None when no output is reachable."""
        got = self._cache.get("heights")
        if got is None:
            parents = self.parents_map()
            outs = self.output_preimage()
            got = {}
            for gid in reversed(self.topo_order()):
                best = 0 if gid in outs else None
                for par in parents[gid]:
                    q = got[par]
                    if q is not None and (best is None or q + 1 > best):
                        best = q + 1
                got[gid] = best
            self._cache["heights"] = got
        return got

    def max_depth(self) -> int:
        d = self.depths()
        return max(d.values(), default=0)

    def relation_arity(self, name: str) -> Optional[int]:
        for r, k in self.rho:
            if r == name:
                return k
        return None

    def lambda_lookup(self) -> dict[tuple[str, tuple[int, ...]], str]:
        """Map (relation, tuple) -> relational gate id."""
        got = self._cache.get("lambda")
        if got is None:
            got = {}
            for g in self.relational_gates():
                got[(g.relation, g.tup)] = g.gid
            self._cache["lambda"] = got
        return got


@dataclass
class Violation:
    code: str
    gate: Optional[str]
    message: str


@dataclass
class ValidationReport:
    ok: bool
    errors: list[Violation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def validate(c: Circuit) -> ValidationReport:
    """Check every circuit and gate invariant; warnings are non-fatal."""
    errors: list[Violation] = []
    warnings: list[str] = []

    def err(code: str, gate: Optional[str], msg: str):
        errors.append(Violation(code, gate, msg))

    rel_arity = dict(c.rho)
    by_bit: dict[int, list[str]] = {0: [], 1: []}
    lam_seen: dict[tuple[str, tuple[int, ...]], str] = {}
    for gid in sorted(c.gates):
        g = c.gates[gid]
        if isinstance(g, ConstantGate):
            if g.bit not in (0, 1):
                err("ArityMismatch", gid, f"constant bit {g.bit} not 0/1")
            else:
                by_bit[g.bit].append(gid)
        elif isinstance(g, RelationalGate):
            if g.relation not in rel_arity:
                err("ArityMismatch", gid, f"unknown relation {g.relation!r}")
                continue
            if len(g.tup) != rel_arity[g.relation]:
                err(
                    "ArityMismatch",
                    gid,
                    f"tuple {g.tup} has wrong arity for {g.relation}",
                )
            if any(not (1 <= v <= c.order) for v in g.tup):
                err("ArityMismatch", gid, f"tuple {g.tup} leaves [1..{c.order}]")
            key = (g.relation, g.tup)
            if key in lam_seen:
                err(
                    "NonInjectiveLambda",
                    gid,
                    f"{g.relation}{g.tup} already labels gate {lam_seen[key]!r}",
                )
            else:
                lam_seen[key] = gid
        else:
            want = set(g.fn.index())
            have = set(g.labels)
            if want != have:
                err(
                    "ArityMismatch",
                    gid,
                    f"labelling domain does not match ind({g.fn.name})",
                )
            for x, h in sorted(g.labels.items()):
                if h not in c.gates:
                    err("DanglingGateId", gid, f"label {x.values} -> missing {h!r}")
    for bit, gids in by_bit.items():
        if len(gids) > 1:
            err("DuplicateConstant", gids[1], f"more than one constant {bit} gate")

    seen_out: dict[str, tuple[int, ...]] = {}
    for tup, gid in sorted(c.outputs.items()):
        if len(tup) != c.arity:
            err("ArityMismatch", gid, f"output tuple {tup} has arity != {c.arity}")
        if any(not (1 <= v <= c.order) for v in tup):
            err("ArityMismatch", gid, f"output tuple {tup} leaves [1..{c.order}]")
        if gid not in c.gates:
            err("DanglingGateId", gid, f"output tuple {tup} names a missing gate")
        if gid in seen_out:
            err("NonInjectiveOmega", gid, f"gate is the output for {seen_out[gid]} and {tup}")
        else:
            seen_out[gid] = tup
    if not c.outputs:
        err("NonInjectiveOmega", None, "circuit has no output gate")

    if not any(True for _ in errors):
        try:
            c.topo_order()
        except ValueError:
            err("NotAcyclic", None, "wire relation has a cycle")

    if not any(len(g.tup) > 0 for g in c.relational_gates()):
        warnings.append("no relational gate of non-zero arity; circuit is constant")

    return ValidationReport(ok=not errors, errors=errors, warnings=warnings)


@dataclass
class GateMetrics:
    depth: int
    height: Optional[int]  # longest path to an output; None if unreachable
    children: tuple[str, ...]
    parents: tuple[str, ...]


def structural_metrics(c: Circuit) -> dict[str, GateMetrics]:
    depths = c.depths()
    heights = c.heights()
    children = c.children_map()
    parents = c.parents_map()
    return {
        gid: GateMetrics(depths[gid], heights[gid], children[gid], parents[gid])
        for gid in c.gates
    }


def remove_redundant(c: Circuit) -> Circuit:
    """Drop every gate with no wire path to an output gate."""
    keep = set(c.outputs.values())
    stack = list(keep)
    children = c.children_map()
    while stack:
        gid = stack.pop()
        for h in children[gid]:
            if h not in keep:
                keep.add(h)
                stack.append(h)
    gates = [c.gates[gid] for gid in sorted(keep)]
    return Circuit(c.order, c.rho, c.arity, gates, dict(c.outputs))


def circuit_width(c: Circuit) -> int:
    """Maximum number of gates sharing a depth."""
    counts: dict[int, int] = {}
    for d in c.depths().values():
        counts[d] = counts.get(d, 0) + 1
    return max(counts.values(), default=0)
