"""Brute-force oracles: automorphism search, syntactic equivalence by
exhaustive isomorphism, coarsest supporting partitions by partition
enumeration.  Everything here is exponential and meant for desk-scale
cross-checks of the fast algorithms."""

from __future__ import annotations

import functools
import itertools
import operator
from typing import Iterator, Optional

from .core import (
    Circuit,
    ConstantGate,
    InternalGate,
    RelationalGate,
)
from .partitions import Partition, join_all
from .symmetry import (
    Permutation,
    all_permutations,
    check_automorphism,
    transpositions,
)


def all_extensions(c: Circuit, sigma: Permutation) -> list[dict[str, str]]:
    """Every automorphism of c extending sigma, by backtracking search."""
    outs = c.output_preimage()
    lam_lookup = c.lambda_lookup()
    order = c.topo_order()  # children first: label matching is checkable on arrival
    by_fn: dict = {}
    for g in c.internal_gates():
        by_fn.setdefault(g.fn, []).append(g.gid)

    results: list[dict[str, str]] = []
    mapping: dict[str, str] = {}
    used: set[str] = set()

    def candidates(gid: str) -> list[str]:
        g = c.gates[gid]
        if isinstance(g, ConstantGate):
            return [gid]
        if isinstance(g, RelationalGate):
            t = lam_lookup.get((g.relation, sigma.apply_tuple(g.tup)))
            return [t] if t else []
        out = []
        for hid in by_fn[g.fn]:
            h = c.gates[hid]
            if _out_ok(c, sigma, gid, hid, outs) and _labels_ok(g, h, mapping):
                out.append(hid)
        return out

    def rec(i: int):
        if i == len(order):
            if check_automorphism(c, sigma, mapping) is not None:
                results.append(dict(mapping))
            return
        gid = order[i]
        for hid in candidates(gid):
            if hid in used:
                continue
            if not _out_ok(c, sigma, gid, hid, outs):
                continue
            mapping[gid] = hid
            used.add(hid)
            rec(i + 1)
            used.discard(hid)
            del mapping[gid]

    rec(0)
    return results


def _out_ok(c, sigma, gid, hid, outs) -> bool:
    a, b = outs.get(gid), outs.get(hid)
    if (a is None) != (b is None):
        return False
    return a is None or sigma.apply_tuple(a) == b


@functools.lru_cache(maxsize=None)
def _flat_getters(a: int, b: int):
    """Itemgetters applying every (row perm, column perm) to a flattened
    a x b matrix: flat index of (i,j) is i*b + j."""
    getters = []
    for rperm in itertools.permutations(range(a)):
        for cperm in itertools.permutations(range(b)):
            idx = [rperm[i] * b + cperm[j] for i in range(a) for j in range(b)]
            if len(idx) == 1:
                getters.append(lambda flat: (flat[0],))
            else:
                getters.append(operator.itemgetter(*idx))
    return tuple(getters)


@functools.lru_cache(maxsize=None)
def _flat_cells(a: int, b: int):
    from .core import rank_cell

    return tuple(
        rank_cell(i, j) for i in range(1, a + 1) for j in range(1, b + 1)
    )


def _labels_ok(g: InternalGate, h: InternalGate, mapping: dict[str, str]) -> bool:
    """Does some index isomorphism carry mapping(L(g)) onto L(h)?"""
    index = g.fn.index()
    if g.fn.is_symmetric:
        want = sorted(mapping[g.labels[x]] for x in index)
        return want == sorted(h.labels[y] for y in index)
    a, b = g.fn.rows, g.fn.cols
    cells = _flat_cells(a, b)
    flat_g = tuple(mapping[g.labels[x]] for x in cells)
    flat_h = tuple(h.labels[x] for x in cells)
    return any(flat_g == get(flat_h) for get in _flat_getters(a, b))


def brute_unique_extensions(c: Circuit) -> bool:
    """At most one automorphism per permutation, by exhaustive search."""
    return all(len(all_extensions(c, s)) <= 1 for s in all_permutations(c.order))


def brute_is_symmetric(c: Circuit) -> bool:
    """Each transposition (hence each permutation) extends to an automorphism."""
    return all(
        len(all_extensions(c, Permutation.transposition(c.order, u, v))) > 0
        for u, v in transpositions(c.order)
    )


# -- syntactic equivalence with exhaustive isomorphism checks ------------


def brute_syntactic_classes(c: Circuit) -> dict[str, str]:
    """Gate -> minimal-id representative, valid for arbitrary circuits.

    Same depth-layered dynamic program as the transparent-circuit
    algorithm, but the isomorphism question at non-symmetric gates is
    answered by trying every row/column permutation; the rank gates are
    canonicalized by the minimum of their class matrices over the
    product group.
    """
    depths = c.depths()
    layers: dict[int, list[str]] = {}
    for gid, d in depths.items():
        layers.setdefault(d, []).append(gid)
    outs = c.output_preimage()
    rep: dict[str, str] = {}
    sig_cache: dict = {}
    for gid in sorted(layers.get(0, [])):
        g = c.gates[gid]
        if isinstance(g, ConstantGate):
            sig = ("const", g.bit, outs.get(gid))
        else:
            sig = ("rel", g.relation, g.tup, outs.get(gid))
        rep[gid] = sig_cache.setdefault(sig, gid)
    for d in range(1, max(layers) + 1 if layers else 1):
        for gid in sorted(layers.get(d, [])):
            g = c.gates[gid]
            if g.fn.is_symmetric:
                kids = tuple(sorted(rep[g.labels[x]] for x in g.fn.index()))
                sig = ("sym", g.fn, outs.get(gid), kids)
            else:
                canon = _canonical_class_matrix(g, rep)
                sig = ("rank", g.fn, outs.get(gid), canon)
            rep[gid] = sig_cache.setdefault(sig, gid)
    return rep


def _canonical_class_matrix(g: InternalGate, rep: dict[str, str]) -> tuple:
    a, b = g.fn.rows, g.fn.cols
    flat = tuple(rep[g.labels[x]] for x in _flat_cells(a, b))
    return min(get(flat) for get in _flat_getters(a, b))


def brute_equiv(c: Circuit, g: str, h: str) -> bool:
    rep = brute_syntactic_classes(c)
    return rep[g] == rep[h]


def brute_transparent(c: Circuit) -> bool:
    rep = brute_syntactic_classes(c)
    for g in c.internal_gates():
        if g.fn.is_symmetric:
            continue
        if len(set(g.labels.values())) != len(g.labels):
            return False
        kids = [rep[hid] for hid in set(g.labels.values())]
        if len(set(kids)) != len(kids):
            return False
    return True


def brute_unique_children(c: Circuit, gid: str) -> bool:
    rep = brute_syntactic_classes(c)
    g = c.gates[gid]
    assert isinstance(g, InternalGate)
    kids = [rep[h] for h in set(g.labels.values())]
    return len(set(kids)) == len(kids)


# -- coarsest supporting partitions by enumeration -----------------------


def enumerate_partitions(n: int) -> Iterator[Partition]:
    """All partitions of [n] (Bell(n) many)."""

    def rec(i: int, parts: list[list[int]]):
        if i > n:
            yield Partition.from_parts(n, [list(p) for p in parts])
            return
        for p in parts:
            p.append(i)
            yield from rec(i + 1, parts)
            p.pop()
        parts.append([i])
        yield from rec(i + 1, parts)
        parts.pop()

    yield from rec(1, [])


def partition_setwise_stabilizer(p: Partition) -> list[Permutation]:
    """All permutations fixing every part of p setwise."""
    out = []
    for sigma in all_permutations(p.n):
        if all(set(sigma(i) for i in part) == set(part) for part in p.parts):
            out.append(sigma)
    return out


def brute_sp_of_group(n: int, members: set[tuple[int, ...]]) -> Partition:
    """Coarsest supporting partition of an explicitly listed subgroup.

    A partition supports the group when its setwise stabilizer is inside
    the group; the coarsest one is the join of all supporting partitions.
    """
    supporting = []
    for p in enumerate_partitions(n):
        if all(s.img in members for s in partition_setwise_stabilizer(p)):
            supporting.append(p)
    return join_all(n, supporting)


def brute_gate_stabilizer(c: Circuit, gid: str) -> set[tuple[int, ...]]:
    """One-line forms of the permutations whose unique extension fixes gid.

    Only meaningful on circuits with unique extensions; asserts as much.
    """
    out = set()
    for sigma in all_permutations(c.order):
        exts = all_extensions(c, sigma)
        assert len(exts) <= 1, "circuit does not have unique extensions"
        if exts and exts[0][gid] == gid:
            out.add(sigma.img)
    return out


def brute_coarsest_sp_of_gate(c: Circuit, gid: str) -> Partition:
    return brute_sp_of_group(c.order, brute_gate_stabilizer(c, gid))
