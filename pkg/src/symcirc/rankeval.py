"""Support-based evaluation of rank gates.

For a symmetric unique-labels circuit, the evaluation of a gate depends
only on where the encoding sends the gate's canonical support.  EV sets
record the support assignments under which a gate fires.  For a rank
gate the child values assemble into a matrix indexed by orbit
representatives of rows/columns paired with compatible support
assignments; after shifting column assignments into compatibility and
quotienting by mutual stability, that matrix has the same rank as the
gate's actual input matrix under any matching encoding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .core import Circuit, InternalGate, SymcircError, rank_cell
from .evaluation import RhoStructure, evaluate_gates, rank_mod_p
from .partitions import SupportInfo
from .symmetry import (
    NoSmallSupport,
    NotSymmetric,
    Permutation,
    SymmetryAnalysis,
    analysis,
)


class Incompatible(SymcircError):
    pass


class InsufficientFreshElements(SymcircError):
    pass


@dataclass(frozen=True, order=True)
class SupportAssignment:
    """Injective map from a subset of [n] to universe element names."""

    pairs: tuple[tuple[int, str], ...]

    @staticmethod
    def make(mapping: Mapping[int, str]) -> "SupportAssignment":
        pairs = tuple(sorted((int(k), v) for k, v in mapping.items()))
        vals = [v for _, v in pairs]
        if len(set(vals)) != len(vals):
            raise ValueError("assignment must be injective")
        return SupportAssignment(pairs)

    @property
    def domain(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.pairs)

    @property
    def image(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.pairs)

    def as_dict(self) -> dict[int, str]:
        return dict(self.pairs)

    def __call__(self, k: int) -> str:
        for kk, v in self.pairs:
            if kk == k:
                return v
        raise KeyError(k)


def compatible(f: SupportAssignment, q: SupportAssignment) -> bool:
    """Agree on the shared domain; disjoint images off it."""
    fd, qd = f.as_dict(), q.as_dict()
    shared = set(fd) & set(qd)
    if any(fd[k] != qd[k] for k in shared):
        return False
    f_only = {fd[k] for k in fd if k not in shared}
    q_only = {qd[k] for k in qd if k not in shared}
    return not (f_only & q_only)


def combine(f: SupportAssignment, q: SupportAssignment) -> SupportAssignment:
    if not compatible(f, q):
        raise Incompatible(f"{f.pairs} is not compatible with {q.pairs}")
    merged = f.as_dict()
    merged.update(q.as_dict())
    return SupportAssignment.make(merged)


@dataclass(frozen=True)
class EvSet:
    gate: str
    support: tuple[int, ...]
    members: frozenset[SupportAssignment]

    def __contains__(self, eta: SupportAssignment) -> bool:
        return eta in self.members


def complete_gamma(
    eta: SupportAssignment, universe: Sequence[str], n: int, variant: int = 0
) -> dict[str, int]:
    """A bijection gamma: U -> [n] whose inverse is compatible with eta."""
    gamma = {v: k for k, v in eta.pairs}
    rest_names = [u for u in universe if u not in gamma]
    rest_slots = [i for i in range(1, n + 1) if i not in set(eta.domain)]
    if variant:
        rest_names = list(reversed(rest_names))
    for name, slot in zip(rest_names, rest_slots):
        gamma[name] = slot
    return gamma


def injective_assignments(
    domain: Sequence[int], values: Sequence[str]
) -> Iterable[SupportAssignment]:
    for image in itertools.permutations(values, len(domain)):
        yield SupportAssignment(tuple(zip(sorted(domain), image)))


def ev_set(c: Circuit, a: RhoStructure, gid: str) -> EvSet:
    """Support assignments under which the gate evaluates true.

    Picks one completion per assignment and spot-checks a second
    completion; by the support property the choice cannot matter.
    """
    an = analysis(c)
    report = an.gate_orbits()
    if not report.symmetric:
        raise NotSymmetric("circuit is not symmetric")
    info = report.support[gid]
    if not info.small:
        raise NoSmallSupport(f"gate {gid!r} has no small support")
    support = info.canonical_support
    members = []
    for eta in injective_assignments(support, a.universe):
        gamma = complete_gamma(eta, a.universe, c.order)
        bit = evaluate_gates(c, a, gamma)[gid]
        gamma2 = complete_gamma(eta, a.universe, c.order, variant=1)
        if gamma2 != gamma:
            assert evaluate_gates(c, a, gamma2)[gid] == bit, (
                "gate value depends on the completion, support is wrong"
            )
        if bit:
            members.append(eta)
    return EvSet(gid, support, frozenset(members))


def all_ev_sets(c: Circuit, a: RhoStructure) -> dict[str, EvSet]:
    """EV sets of every gate, from one sweep over all encodings.

    Also asserts gamma-independence: encodings agreeing on a gate's
    support must evaluate the gate identically.
    """
    an = analysis(c)
    report = an.gate_orbits()
    if not report.symmetric:
        raise NotSymmetric("circuit is not symmetric")
    supports = {}
    for gid in c.gates:
        info = report.support[gid]
        if not info.small:
            raise NoSmallSupport(f"gate {gid!r} has no small support")
        supports[gid] = info.canonical_support
    seen: dict[str, dict[SupportAssignment, int]] = {gid: {} for gid in c.gates}
    for perm in itertools.permutations(range(1, c.order + 1)):
        gamma = dict(zip(a.universe, perm))
        inv = {v: k for k, v in gamma.items()}
        bits = evaluate_gates(c, a, gamma)
        for gid, sup in supports.items():
            eta = SupportAssignment(tuple((k, inv[k]) for k in sup))
            prev = seen[gid].setdefault(eta, bits[gid])
            assert prev == bits[gid], "support does not determine evaluation"
    return {
        gid: EvSet(gid, supports[gid], frozenset(e for e, b in seen[gid].items() if b))
        for gid in c.gates
    }


def _complete_to_permutation(
    n: int, partial: Mapping[int, int]
) -> Permutation:
    """Extend an injective partial map order-preservingly to Sym_n."""
    img = dict(partial)
    used = set(img.values())
    rest_dom = [i for i in range(1, n + 1) if i not in img]
    rest_img = [i for i in range(1, n + 1) if i not in used]
    img.update(dict(zip(rest_dom, rest_img)))
    return Permutation(tuple(img[i] for i in range(1, n + 1)))


@dataclass
class RankEntry:
    child: str
    shift: tuple[tuple[int, int], ...]  # the column-support shift vector
    w: SupportAssignment
    bit: int


@dataclass
class RankMatrix:
    gate: str
    eta: SupportAssignment
    row_index: list[tuple[tuple[str, int], SupportAssignment]]  # I
    col_index: list[tuple[tuple[str, int], SupportAssignment]]  # J
    entries: dict[tuple, RankEntry]
    row_classes: list[list[int]]  # positions into row_index, grouped by mutual stability
    col_classes: list[list[int]]

    def matrix(self) -> list[list[int]]:
        return [
            [self.entries[(ri, ci)].bit for ci in self.col_index]
            for ri in self.row_index
        ]

    def quotient_matrix(self) -> list[list[int]]:
        return [
            [
                self.entries[(self.row_index[rc[0]], self.col_index[cc[0]])].bit
                for cc in self.col_classes
            ]
            for rc in self.row_classes
        ]


class RankGateContext:
    """Shared support/orbit data for evaluating one rank gate on one structure."""

    def __init__(self, c: Circuit, a: RhoStructure, gid: str):
        g = c.gates[gid]
        if not isinstance(g, InternalGate) or g.fn.is_symmetric:
            raise ValueError(f"{gid!r} is not a rank gate")
        self.circuit = c
        self.structure = a
        self.gid = gid
        self.gate = g
        self.analysis: SymmetryAnalysis = analysis(c)
        report = self.analysis.gate_orbits()
        if not report.symmetric:
            raise NotSymmetric("circuit is not symmetric")
        self.report = report
        info = report.support[gid]
        if not info.small:
            raise NoSmallSupport(f"gate {gid!r} has no small support")
        self.gate_support: tuple[int, ...] = info.canonical_support
        self.universe_info = self.analysis.universe_orbits(gid)
        for elem, uo in self.universe_info.items():
            if not uo.support.small:
                raise NoSmallSupport(f"universe element {elem} of {gid!r}")

    def elem_support(self, elem: tuple[str, int]) -> tuple[int, ...]:
        return self.universe_info[elem].support.canonical_support

    def orbit_minima(self, sort: str) -> list[tuple[str, int]]:
        seen = set()
        out = []
        for elem in sorted(e for e in self.universe_info if e[0] == sort):
            if elem in seen:
                continue
            orb = self.universe_info[elem].orbit
            seen.update(orb)
            out.append(min(orb))
        return sorted(out)

    def assignments_for(
        self, elem: tuple[str, int], eta: SupportAssignment
    ) -> list[SupportAssignment]:
        """A_elem: assignments to the element's support compatible with eta."""
        sup = self.elem_support(elem)
        ed = eta.as_dict()
        fixed = {k: ed[k] for k in sup if k in ed}
        free = [k for k in sup if k not in ed]
        avail = [u for u in self.structure.universe if u not in set(eta.image)]
        out = []
        for image in itertools.permutations(avail, len(free)):
            m = dict(fixed)
            m.update(zip(free, image))
            out.append(SupportAssignment.make(m))
        return sorted(out)

    def local_stabilizer(self, elem: tuple[str, int]) -> list[dict[int, int]]:
        """Action of stab(elem) within stab(consp(g)) on the element's support.

        The action of a permutation on the element depends only on its
        restriction to the element's support, so each candidate bijection
        needs a single completion tried.
        """
        sup = self.elem_support(elem)
        fixed = set(self.gate_support)
        movable = [k for k in sup if k not in fixed]
        out = []
        for image in itertools.permutations(movable):
            pi0 = {k: k for k in sup if k in fixed}
            pi0.update(dict(zip(movable, image)))
            sigma = _complete_to_permutation_fixing(
                self.circuit.order, pi0, fixed
            )
            if self.analysis.element_action(sigma, self.gid, elem) == elem:
                out.append(pi0)
        return out

    def mutually_stable(
        self,
        elem: tuple[str, int],
        x1: SupportAssignment,
        x2: SupportAssignment,
        local: list[dict[int, int]],
    ) -> bool:
        d1, d2 = x1.as_dict(), x2.as_dict()
        return any(all(d1[k] == d2[pi0[k]] for k in d1) for pi0 in local)

    def shift_vector(
        self,
        eta: SupportAssignment,
        i_row: tuple[tuple[str, int], SupportAssignment],
        j_col: tuple[tuple[str, int], SupportAssignment],
    ) -> dict[int, int]:
        """The domain shift making the column assignment compatible.

        Identity on the gate support, routed through the row assignment
        where images already agree, fresh elements elsewhere.
        """
        i_elem, x = i_row
        j_elem, y = j_col
        sup_g = set(self.gate_support)
        sup_i = set(self.elem_support(i_elem))
        sup_j = list(self.elem_support(j_elem))
        xd, yd = x.as_dict(), y.as_dict()
        x_inv = {v: k for k, v in xd.items()}
        x_off = {xd[k] for k in xd if k not in sup_g}
        shift: dict[int, int] = {}
        rest = []
        for a_ in sup_j:
            if a_ in sup_g:
                shift[a_] = a_
            elif yd[a_] in x_off:
                shift[a_] = x_inv[yd[a_]]
            else:
                rest.append(a_)
        fresh = [
            u
            for u in range(1, self.circuit.order + 1)
            if u not in sup_g and u not in sup_i
        ]
        if len(rest) > len(fresh):
            raise InsufficientFreshElements(
                f"need {len(rest)} fresh elements, have {len(fresh)}"
            )
        for k, a_ in enumerate(rest):
            shift[a_] = fresh[k]
        # postconditions from the shift lemma
        shifted = SupportAssignment.make({shift[a_]: yd[a_] for a_ in sup_j})
        if not compatible(shifted, eta) or not compatible(x, shifted):
            raise SymcircError("shift vector failed its compatibility contract")
        return shift

    def build_matrix(
        self,
        eta: SupportAssignment,
        child_evs: Mapping[str, EvSet],
    ) -> RankMatrix:
        if tuple(eta.domain) != tuple(self.gate_support):
            raise ValueError("eta must assign exactly the gate support")
        n = self.circuit.order
        rows = self.orbit_minima("row")
        cols = self.orbit_minima("col")
        I = [(i, x) for i in rows for x in self.assignments_for(i, eta)]
        J = [(j, y) for j in cols for y in self.assignments_for(j, eta)]
        entries: dict[tuple, RankEntry] = {}
        for i_row in I:
            for j_col in J:
                shift = self.shift_vector(eta, i_row, j_col)
                sigma = _complete_to_permutation_fixing(
                    n, shift, set(self.gate_support)
                )
                j_moved = self.analysis.element_action(sigma, self.gid, j_col[0])
                cell = rank_cell(i_row[0][1], j_moved[1])
                child = self.gate.labels[cell]
                yd = j_col[1].as_dict()
                merged = dict(i_row[1].pairs)
                for a_, target in shift.items():
                    if target in merged and merged[target] != yd[a_]:
                        raise SymcircError("row/column assignments disagree")
                    merged[target] = yd[a_]
                ev = child_evs[child]
                missing = [k for k in ev.support if k not in merged]
                if missing:
                    raise SymcircError(
                        f"child support {ev.support} not covered at {missing}"
                    )
                w = SupportAssignment.make({k: merged[k] for k in ev.support})
                entries[(i_row, j_col)] = RankEntry(
                    child, tuple(sorted(shift.items())), w, int(w in ev.members)
                )
        row_classes = self._stability_classes(rows, I)
        col_classes = self._stability_classes(cols, J)
        rm = RankMatrix(self.gid, eta, I, J, entries, row_classes, col_classes)
        self._assert_quotient_well_defined(rm)
        return rm

    def _stability_classes(self, minima, index) -> list[list[int]]:
        local = {e: self.local_stabilizer(e) for e in minima}
        classes: list[list[int]] = []
        for pos, (elem, x) in enumerate(index):
            for cls in classes:
                e0, x0 = index[cls[0]]
                if e0 == elem and self.mutually_stable(elem, x0, x, local[elem]):
                    cls.append(pos)
                    break
            else:
                classes.append([pos])
        return classes

    def _assert_quotient_well_defined(self, rm: RankMatrix):
        for rc in rm.row_classes:
            for cc in rm.col_classes:
                vals = {
                    rm.entries[(rm.row_index[r], rm.col_index[c])].bit
                    for r in rc
                    for c in cc
                }
                assert len(vals) == 1, "matrix not constant on stability classes"

    # -- reference data ---------------------------------------------------

    def direct_label_matrix(self, gamma: Mapping[str, int]) -> list[list[int]]:
        bits = evaluate_gates(self.circuit, self.structure, gamma)
        fn = self.gate.fn
        return [
            [bits[self.gate.labels[rank_cell(i, j)]] for j in range(1, fn.cols + 1)]
            for i in range(1, fn.rows + 1)
        ]

    def direct_bit(self, eta: SupportAssignment) -> int:
        gamma = complete_gamma(eta, self.structure.universe, self.circuit.order)
        return evaluate_gates(self.circuit, self.structure, gamma)[self.gid]

    def support_permutation(
        self, gamma: Mapping[str, int], f: SupportAssignment
    ) -> Permutation:
        """A permutation fixing the gate support with a -> gamma(f(a))."""
        partial = {k: gamma[v] for k, v in f.pairs}
        return _complete_to_permutation_fixing(
            self.circuit.order, partial, set(self.gate_support)
        )


def _complete_to_permutation_fixing(
    n: int, partial: Mapping[int, int], fixed: set[int]
) -> Permutation:
    img = {k: k for k in fixed}
    for k, v in partial.items():
        if k in img and img[k] != v:
            raise ValueError(f"conflicting image for {k}")
        img[k] = v
    if len(set(img.values())) != len(img):
        raise ValueError("partial map is not injective")
    used = set(img.values())
    rest_dom = [i for i in range(1, n + 1) if i not in img]
    rest_img = [i for i in range(1, n + 1) if i not in used]
    img.update(dict(zip(rest_dom, rest_img)))
    return Permutation(tuple(img[i] for i in range(1, n + 1)))


def child_ev_sets(c: Circuit, a: RhoStructure, gid: str) -> dict[str, EvSet]:
    evs = all_ev_sets(c, a)
    return {h: evs[h] for h in c.children_of(gid)}


def shift_vector(
    c: Circuit,
    a: RhoStructure,
    gid: str,
    eta: SupportAssignment,
    i_row: tuple[tuple[str, int], SupportAssignment],
    j_col: tuple[tuple[str, int], SupportAssignment],
) -> dict[int, int]:
    return RankGateContext(c, a, gid).shift_vector(eta, i_row, j_col)


def build_rank_matrix(
    c: Circuit,
    a: RhoStructure,
    gid: str,
    eta: SupportAssignment,
    child_evs: Optional[Mapping[str, EvSet]] = None,
) -> RankMatrix:
    ctx = RankGateContext(c, a, gid)
    if child_evs is None:
        child_evs = child_ev_sets(c, a, gid)
    return ctx.build_matrix(eta, child_evs)


def rank_gate_from_supports(
    c: Circuit,
    a: RhoStructure,
    gid: str,
    eta: SupportAssignment,
    child_evs: Optional[Mapping[str, EvSet]] = None,
) -> int:
    """Evaluate the rank gate from child EV sets alone."""
    ctx = RankGateContext(c, a, gid)
    if child_evs is None:
        child_evs = child_ev_sets(c, a, gid)
    rm = ctx.build_matrix(eta, child_evs)
    fn = ctx.gate.fn
    return int(rank_mod_p(rm.matrix(), fn.p) <= fn.r)
