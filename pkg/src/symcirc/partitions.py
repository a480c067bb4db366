"""Supporting-partition algebra: joins, norms, canonical supports."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .core import SymcircError


class GroundSetMismatch(SymcircError):
    pass


@dataclass(frozen=True)
class Partition:
    """A partition of [n], stored canonically: parts sorted by minimum."""

    n: int
    parts: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_parts(n: int, parts: Iterable[Iterable[int]]) -> "Partition":
        norm = sorted((tuple(sorted(set(p))) for p in parts if p), key=lambda p: p[0])
        seen: set[int] = set()
        for p in norm:
            for v in p:
                if v in seen:
                    raise ValueError(f"element {v} appears in two parts")
                seen.add(v)
        if seen != set(range(1, n + 1)):
            raise ValueError("parts do not cover [n]")
        return Partition(n, tuple(norm))

    @staticmethod
    def singletons(n: int) -> "Partition":
        return Partition(n, tuple((i,) for i in range(1, n + 1)))

    def part_of(self, v: int) -> tuple[int, ...]:
        for p in self.parts:
            if v in p:
                return p
        raise KeyError(v)

    @property
    def norm(self) -> int:
        """min over parts P of |[n] \\ P|, i.e. n minus the largest part size."""
        return self.n - max(len(p) for p in self.parts)

    def as_coarse_as(self, other: "Partition") -> bool:
        """True when every part of `other` sits inside a part of self."""
        if self.n != other.n:
            raise GroundSetMismatch(f"ground sets {self.n} != {other.n}")
        lookup = {}
        for idx, p in enumerate(self.parts):
            for v in p:
                lookup[v] = idx
        return all(len({lookup[v] for v in p}) == 1 for p in other.parts)

    def permute(self, image: dict[int, int]) -> "Partition":
        return Partition.from_parts(
            self.n, [[image[v] for v in p] for p in self.parts]
        )


def join(p1: Partition, p2: Partition) -> Partition:
    """Transitive-closure join: coarsest-common-coarsening via union-find."""
    if p1.n != p2.n:
        raise GroundSetMismatch(f"ground sets {p1.n} != {p2.n}")
    parent = list(range(p1.n + 1))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(u: int, v: int):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)

    for part in p1.parts + p2.parts:
        for v in part[1:]:
            union(part[0], v)
    groups: dict[int, list[int]] = {}
    for v in range(1, p1.n + 1):
        groups.setdefault(find(v), []).append(v)
    return Partition.from_parts(p1.n, groups.values())


def join_all(n: int, ps: Iterable[Partition]) -> Partition:
    acc = Partition.singletons(n)
    for p in ps:
        acc = join(acc, p)
    return acc


@dataclass(frozen=True)
class SupportInfo:
    partition: Partition
    norm: int
    canonical_support: Optional[tuple[int, ...]]

    @property
    def small(self) -> bool:
        return self.canonical_support is not None


def canonical_support(p: Partition) -> SupportInfo:
    """Complement of the unique largest part, when the norm is below n/2."""
    norm = p.norm
    if 2 * norm >= p.n:
        return SupportInfo(p, norm, None)
    size = p.n - norm
    big = [part for part in p.parts if len(part) == size]
    assert len(big) == 1, "norm < n/2 forces a unique largest part"
    support = tuple(sorted(set(range(1, p.n + 1)) - set(big[0])))
    return SupportInfo(p, norm, support)


def transposition_partition(n: int, u: int, v: int) -> Partition:
    """The partition with the single non-trivial part {u, v}."""
    parts = [[u, v]] + [[w] for w in range(1, n + 1) if w not in (u, v)]
    return Partition.from_parts(n, parts)
