"""Automorphism extension, orbits, and canonical supports of circuit parts.

For a circuit with unique labels, each permutation of [n] extends to at
most one automorphism, and that extension is computable: first map the
quotient circuit bottom-up by depth, then walk the circuit itself with
parents before children, forcing each image through the already-mapped
parents, and finally verify the candidate really is an automorphism.
Orbits and coarsest supporting partitions then come from the action of
the transpositions alone.
"""

from __future__ import annotations

import itertools
import re
import weakref
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional

from .core import (
    Circuit,
    ConstantGate,
    IndexElement,
    InternalGate,
    PreconditionError,
    RelationalGate,
)
from .equivalence import index_iso_check, quotient, syntactic_classes
from .normalize import has_unique_labels
from .partitions import (
    Partition,
    SupportInfo,
    canonical_support,
    join,
    transposition_partition,
)


class NotUniqueLabels(PreconditionError):
    pass


class NoExtension(PreconditionError):
    pass


class NotStabilized(PreconditionError):
    pass


class ActionUndefined(PreconditionError):
    pass


class NotSymmetric(PreconditionError):
    pass


class NoSmallSupport(PreconditionError):
    pass


@dataclass(frozen=True)
class Permutation:
    """Element of Sym_n in one-line notation: img[i-1] is the image of i."""

    img: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.img) != list(range(1, len(self.img) + 1)):
            raise ValueError(f"not a permutation of [n]: {self.img}")

    @property
    def n(self) -> int:
        return len(self.img)

    def __call__(self, i: int) -> int:
        return self.img[i - 1]

    def apply_tuple(self, t: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(self.img[i - 1] for i in t)

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self*other)(i) = self(other(i))."""
        return Permutation(tuple(self.img[j - 1] for j in other.img))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.img, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(self.img[i - 1] == i for i in range(1, self.n + 1))

    def one_line(self) -> str:
        return " ".join(str(i) for i in self.img)

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(tuple(range(1, n + 1)))

    @staticmethod
    def transposition(n: int, u: int, v: int) -> "Permutation":
        img = list(range(1, n + 1))
        img[u - 1], img[v - 1] = v, u
        return Permutation(tuple(img))

    @staticmethod
    def from_mapping(n: int, mapping: Mapping[int, int]) -> "Permutation":
        img = [mapping.get(i, i) for i in range(1, n + 1)]
        return Permutation(tuple(img))


def parse_permutation(text: str, n: int) -> Permutation:
    """Parse one-line form "2 1 3" or cycle form "(1 2)(3)"."""
    text = text.strip()
    if text.startswith("("):
        mapping: dict[int, int] = {}
        for cyc in re.findall(r"\(([^()]*)\)", text):
            vals = [int(v) for v in cyc.replace(",", " ").split()]
            for a, b in zip(vals, vals[1:] + vals[:1]):
                if a in mapping:
                    raise ValueError(f"element {a} repeated in cycles")
                mapping[a] = b
        return Permutation.from_mapping(n, mapping)
    img = tuple(int(v) for v in text.replace(",", " ").split())
    if len(img) != n:
        raise ValueError(f"one-line form has {len(img)} entries, expected {n}")
    return Permutation(img)


def all_permutations(n: int) -> Iterator[Permutation]:
    for img in itertools.permutations(range(1, n + 1)):
        yield Permutation(img)


def transpositions(n: int, fixed: Iterable[int] = ()) -> Iterator[tuple[int, int]]:
    """All transpositions of [n] \\ fixed, lexicographic."""
    avoid = set(fixed)
    pool = [i for i in range(1, n + 1) if i not in avoid]
    for u, v in itertools.combinations(pool, 2):
        yield (u, v)


@dataclass
class GateMap:
    """An automorphism: gate bijection plus a per-gate index witness."""

    sigma: Permutation
    mapping: dict[str, str]
    witnesses: dict[str, dict[IndexElement, IndexElement]]

    def __call__(self, gid: str) -> str:
        return self.mapping[gid]


def check_automorphism(
    c: Circuit, sigma: Permutation, mapping: Mapping[str, str]
) -> Optional[dict[str, dict[IndexElement, IndexElement]]]:
    """Full automorphism check; returns the label-isomorphism witnesses.

    Works on arbitrary circuits: when a non-symmetric gate's labelling is
    not injective the witness is found by exhausting row/column
    permutations, so this also serves as the brute-force checker.
    """
    if set(mapping) != set(c.gates) or len(set(mapping.values())) != len(mapping):
        return None
    outs = c.output_preimage()
    for tup, gid in c.outputs.items():
        if mapping[gid] != c.outputs.get(sigma.apply_tuple(tup)):
            return None
    witnesses: dict[str, dict[IndexElement, IndexElement]] = {}
    for gid in c.gates:
        g = c.gates[gid]
        h = c.gates[mapping[gid]]
        if type(g) is not type(h):
            return None
        if (gid in outs) != (mapping[gid] in outs):
            return None
        if isinstance(g, ConstantGate):
            if g.bit != h.bit:
                return None
        elif isinstance(g, RelationalGate):
            if g.relation != h.relation or sigma.apply_tuple(g.tup) != h.tup:
                return None
        else:
            if g.fn != h.fn:
                return None
            w = _label_iso_witness(g, h, mapping)
            if w is None:
                return None
            witnesses[gid] = w
    return witnesses


def _label_iso_witness(
    g: InternalGate, h: InternalGate, mapping: Mapping[str, str]
) -> Optional[dict[IndexElement, IndexElement]]:
    """A bijection lam of ind with h.labels[lam(x)] == mapping[g.labels[x]]."""
    index = g.fn.index()
    target = {x: mapping[g.labels[x]] for x in index}
    if g.fn.is_symmetric:
        # group positions by carried gate; any value-respecting pairing works
        by_gate: dict[str, list[IndexElement]] = {}
        for y in index:
            by_gate.setdefault(h.labels[y], []).append(y)
        need: dict[str, list[IndexElement]] = {}
        for x in index:
            need.setdefault(target[x], []).append(x)
        if {k: len(v) for k, v in by_gate.items()} != {
            k: len(v) for k, v in need.items()
        }:
            return None
        return {
            x: y
            for gate, xs in need.items()
            for x, y in zip(xs, by_gate[gate])
        }
    inverse: dict[str, list[IndexElement]] = {}
    for y in index:
        inverse.setdefault(h.labels[y], []).append(y)
    if all(len(v) == 1 for v in inverse.values()):
        lam = {}
        for x in index:
            ys = inverse.get(target[x])
            if ys is None:
                return None
            lam[x] = ys[0]
        if len(set(lam.values())) != len(index):
            return None
        return lam if index_iso_check(g.fn, lam) else None
    # non-injective labels: exhaust product permutations
    rows = range(1, g.fn.rows + 1)
    cols = range(1, g.fn.cols + 1)
    from .core import rank_cell

    for rperm in itertools.permutations(rows):
        for cperm in itertools.permutations(cols):
            lam = {
                rank_cell(i, j): rank_cell(rperm[i - 1], cperm[j - 1])
                for i in rows
                for j in cols
            }
            if all(h.labels[lam[x]] == target[x] for x in index):
                return lam
    return None


class SymmetryAnalysis:
    """Per-circuit cache for extensions, orbits, and supports."""

    def __init__(self, c: Circuit):
        if not has_unique_labels(c):
            raise NotUniqueLabels("circuit does not have unique labels")
        self.circuit = c
        self.eq = syntactic_classes(c)
        self.quot = quotient(c)
        self._ext: dict[tuple[int, ...], Optional[GateMap]] = {}
        self._gate_orbits: Optional[OrbitReport] = None
        self._universe: dict[str, dict] = {}

    # -- extension of a permutation to an automorphism -------------------

    def extend(self, sigma: Permutation) -> Optional[GateMap]:
        if sigma.n != self.circuit.order:
            raise ValueError("permutation degree differs from circuit order")
        got = self._ext.get(sigma.img, "miss")
        if got != "miss":
            return got
        result = self._extend(sigma)
        self._ext[sigma.img] = result
        return result

    def _extend(self, sigma: Permutation) -> Optional[GateMap]:
        c = self.circuit
        pi_q = self._extend_on_quotient(sigma)
        if pi_q is None:
            return None
        # members of the image class, per original gate
        classes = self.eq.classes()
        image_class = {gid: classes[pi_q[self.eq.rep[gid]]] for gid in c.gates}

        outs = c.output_preimage()
        lam_lookup = c.lambda_lookup()
        parents = c.parents_map()
        children = c.children_map()
        pi: dict[str, str] = {}
        used: set[str] = set()

        def choose(gid: str, candidates: list[str]) -> Optional[str]:
            live = [h for h in candidates if h not in used]
            if not live:
                return None
            return live[0]

        # parents before children; ties by gate id for determinism
        order = list(reversed(c.topo_order()))
        for gid in order:
            g = c.gates[gid]
            allowed: Optional[set[str]] = None
            for par in parents[gid]:
                into = set(children[pi[par]])
                allowed = into if allowed is None else (allowed & into)
                if not allowed:
                    return None
            if gid in outs:
                target = c.outputs.get(sigma.apply_tuple(outs[gid]))
                if target is None:
                    return None
                cands = [target]
            elif isinstance(g, ConstantGate):
                cands = [gid]
            elif isinstance(g, RelationalGate):
                target = lam_lookup.get((g.relation, sigma.apply_tuple(g.tup)))
                if target is None:
                    return None
                cands = [target]
            else:
                cands = [h for h in image_class[gid] if allowed is None or h in allowed]
            if allowed is not None:
                cands = [h for h in cands if h in allowed]
            pick = choose(gid, sorted(cands))
            if pick is None:
                return None
            pi[gid] = pick
            used.add(pick)

        witnesses = check_automorphism(c, sigma, pi)
        if witnesses is None:
            return None
        return GateMap(sigma, pi, witnesses)

    def _extend_on_quotient(self, sigma: Permutation) -> Optional[dict[str, str]]:
        """Unique automorphism of the (reduced) quotient extending sigma."""
        cq = self.quot
        depths = cq.depths()
        layers: dict[int, list[str]] = {}
        for gid, d in depths.items():
            layers.setdefault(d, []).append(gid)
        outs = cq.output_preimage()
        lam_lookup = cq.lambda_lookup()
        pi: dict[str, str] = {}

        def output_ok(g: str, h: str) -> bool:
            a, b = outs.get(g), outs.get(h)
            if (a is None) != (b is None):
                return False
            return a is None or sigma.apply_tuple(a) == b

        for gid in sorted(layers.get(0, [])):
            g = cq.gates[gid]
            if isinstance(g, ConstantGate):
                target = gid
            else:
                target = lam_lookup.get((g.relation, sigma.apply_tuple(g.tup)))
            if target is None or not output_ok(gid, target):
                return None
            pi[gid] = target

        for d in range(1, max(layers) + 1 if layers else 1):
            level = sorted(layers.get(d, []))
            by_key: dict[tuple, list[str]] = {}
            for hid in level:
                h = cq.gates[hid]
                by_key.setdefault((h.fn,), []).append(hid)
            for gid in level:
                g = cq.gates[gid]
                found = None
                for hid in by_key.get((g.fn,), []):
                    if not output_ok(gid, hid):
                        continue
                    if self._quotient_label_match(g, cq.gates[hid], pi):
                        found = hid
                        break
                if found is None:
                    return None
                pi[gid] = found
        if len(set(pi.values())) != len(pi):
            return None
        return pi

    @staticmethod
    def _quotient_label_match(
        g: InternalGate, h: InternalGate, pi: Mapping[str, str]
    ) -> bool:
        index = g.fn.index()
        if g.fn.is_symmetric:
            want = sorted(pi[g.labels[x]] for x in index)
            have = sorted(h.labels[y] for y in index)
            return want == have
        inv = {hid: y for y, hid in h.labels.items()}  # injective on quotient
        lam = {}
        for x in index:
            y = inv.get(pi[g.labels[x]])
            if y is None:
                return False
            lam[x] = y
        return len(set(lam.values())) == len(index) and index_iso_check(g.fn, lam)

    # -- universe-element action ----------------------------------------

    def element_action(
        self, sigma: Permutation, gid: str, elem: tuple[str, int]
    ) -> tuple[str, int]:
        ext = self.extend(sigma)
        if ext is None:
            raise NoExtension(f"{sigma.one_line()} does not extend")
        if ext.mapping[gid] != gid:
            raise NotStabilized(f"{sigma.one_line()} moves gate {gid!r}")
        g = self.circuit.gates[gid]
        if not isinstance(g, InternalGate):
            raise ValueError("universe action only applies to internal gates")
        lam = ext.witnesses[gid]
        for x in g.fn.index():
            for k, (sort, val) in enumerate(x.entries):
                if (sort, val) == elem:
                    return lam[x].entries[k]
        raise ValueError(f"{elem} is not in the universe of {gid!r}")

    # -- orbits and supports ---------------------------------------------

    def transposition_maps(self) -> dict[tuple[int, int], Optional[GateMap]]:
        n = self.circuit.order
        return {
            (u, v): self.extend(Permutation.transposition(n, u, v))
            for u, v in transpositions(n)
        }

    def gate_orbits(self) -> "OrbitReport":
        if self._gate_orbits is not None:
            return self._gate_orbits
        n = self.circuit.order
        maps = self.transposition_maps()
        bad = sorted(t for t, m in maps.items() if m is None)
        if bad:
            report = OrbitReport(False, bad[0], {}, {}, {})
            self._gate_orbits = report
            return report
        orbits: dict[str, tuple[str, ...]] = {}
        sps: dict[str, Partition] = {}
        supports: dict[str, SupportInfo] = {}
        for gid in self.circuit.gates:

            def act(u: int, v: int, x: str) -> str:
                return maps[(u, v)].mapping[x]

            orb, sp = orbit_and_sp(n, (), gid, act)
            orbits[gid] = orb
            sps[gid] = sp
            supports[gid] = canonical_support(sp)
        report = OrbitReport(True, None, orbits, sps, supports)
        self._gate_orbits = report
        return report

    def universe_orbits(self, gid: str) -> dict[tuple[str, int], "UniverseOrbit"]:
        got = self._universe.get(gid)
        if got is not None:
            return got
        report = self.gate_orbits()
        if not report.symmetric:
            raise NotSymmetric("circuit is not symmetric")
        info = report.support[gid]
        if not info.small:
            raise NoSmallSupport(f"gate {gid!r} has no small support")
        g = self.circuit.gates[gid]
        if not isinstance(g, InternalGate):
            raise ValueError("universe orbits only apply to internal gates")
        n = self.circuit.order
        fixed = info.canonical_support

        def act(u: int, v: int, elem: tuple[str, int]) -> tuple[str, int]:
            sigma = Permutation.transposition(n, u, v)
            return self.element_action(sigma, gid, elem)

        out = {}
        for elem in g.fn.universe():
            orb, sp = orbit_and_sp(n, fixed, elem, act)
            out[elem] = UniverseOrbit(elem, orb, sp, canonical_support(sp))
        self._universe[gid] = out
        return out

    def is_symmetric(self) -> bool:
        return self.gate_orbits().symmetric


@dataclass
class OrbitReport:
    symmetric: bool
    witness: Optional[tuple[int, int]]  # a transposition with no extension
    orbit: dict[str, tuple[str, ...]]
    sp: dict[str, Partition]
    support: dict[str, SupportInfo]


@dataclass
class UniverseOrbit:
    element: tuple[str, int]
    orbit: tuple[tuple[str, int], ...]
    sp: Partition
    support: SupportInfo


def orbit_and_sp(
    n: int,
    fixed: Iterable[int],
    x,
    action: Callable[[int, int, object], object],
) -> tuple[tuple, Partition]:
    """Orbit and coarsest supporting partition of x under stab(fixed).

    The action is consulted only on the transpositions of [n] \\ fixed,
    which generate the stabiliser: the coarsest supporting partition is
    the join of the {u,v} partitions over fixing transpositions, and the
    orbit is the closure of {x} under all of them.  The callable may
    raise ActionUndefined to signal that the action (and hence symmetry)
    fails upstream.
    """
    fixed = tuple(sorted(set(fixed)))
    trans = list(transpositions(n, fixed))
    sp = Partition.singletons(n)
    for u, v in trans:
        if action(u, v, x) == x:
            sp = join(sp, transposition_partition(n, u, v))
    orbit = {x}
    frontier = [x]
    while frontier:
        nxt = []
        for y in frontier:
            for u, v in trans:
                z = action(u, v, y)
                if z not in orbit:
                    orbit.add(z)
                    nxt.append(z)
        frontier = nxt
    return tuple(sorted(orbit)), sp


_analyses: "weakref.WeakKeyDictionary[Circuit, SymmetryAnalysis]" = (
    weakref.WeakKeyDictionary()
)


def analysis(c: Circuit) -> SymmetryAnalysis:
    got = _analyses.get(c)
    if got is None:
        got = SymmetryAnalysis(c)
        _analyses[c] = got
    return got


def extend_permutation(c: Circuit, sigma: Permutation) -> Optional[GateMap]:
    """Image of every gate under the unique automorphism extending sigma."""
    return analysis(c).extend(sigma)


def element_action(
    c: Circuit, sigma: Permutation, gid: str, elem: tuple[str, int]
) -> tuple[str, int]:
    """Image of a universe element of a sigma-stabilized gate."""
    return analysis(c).element_action(sigma, gid, elem)


def gate_orbits(c: Circuit) -> OrbitReport:
    """Symmetry decision plus per-gate orbit, SP, and canonical support."""
    return analysis(c).gate_orbits()


def universe_orbits(c: Circuit, gid: str) -> dict[tuple[str, int], UniverseOrbit]:
    """Orbit and SP of each universe element of g, relative to stab(consp(g))."""
    return analysis(c).universe_orbits(gid)


def is_symmetric(c: Circuit) -> bool:
    return analysis(c).is_symmetric()
