"""Candidate generation: every standard-form pair of arc-disjoint covers.

For each integer partition of n into parts >= 2, the first cover is the
partition's identity layout.  Second covers are built directly in normal
form by backtracking (leader = a not-yet-used label, every later member
larger than the leader, equal-length leaders increasing), pruning as
soon as an arc collides with the first cover.  The emitted sequence is a
pure function of n: partitions in descending lexicographic order, then
second-cover partitions likewise, then depth-first label order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .core import check_n
from .encoding import CoverEncoding, CoverPairEncoding, identity_layout


def partitions_of(n: int) -> list[tuple[int, ...]]:
    """All partitions of n with parts >= 2, descending parts, in
    descending lexicographic order."""
    if n < 2:
        raise ValueError(f"no partitions of {n} into parts >= 2")
    out: list[tuple[int, ...]] = []

    def rec(remaining: int, cap: int, prefix: tuple[int, ...]):
        if remaining == 0:
            out.append(prefix)
            return
        for part in range(min(cap, remaining), 1, -1):
            if remaining - part == 1:
                continue  # would strand a unit part
            rec(remaining - part, part, prefix + (part,))

    rec(n, n, ())
    return out


def second_covers(
    first: CoverEncoding, max_partition: tuple[int, ...] | None = None
) -> Iterator[CoverEncoding]:
    """All normal-form covers arc-disjoint from `first`, with partition
    lexicographically <= max_partition (default: first's partition)."""
    n = first.n
    if max_partition is None:
        max_partition = first.partition
    forbidden = [0] * n  # forbidden[u] = v iff u->v is in the first cover
    for cyc in first.cycles:
        for i, u in enumerate(cyc):
            forbidden[u] = cyc[(i + 1) % len(cyc)]
    for partition in partitions_of(n):
        if partition > max_partition:
            continue
        yield from _covers_with_partition(n, partition, forbidden)


def _covers_with_partition(
    n: int, partition: tuple[int, ...], forbidden: list[int]
) -> Iterator[CoverEncoding]:
    used = [False] * n
    cycles: list[tuple[int, ...]] = []

    def build_cycle(j: int) -> Iterator[CoverEncoding]:
        if j == len(partition):
            yield CoverEncoding(tuple(cycles))
            return
        p = partition[j]
        min_leader = -1
        if j > 0 and partition[j - 1] == p:
            min_leader = cycles[-1][0]
        for leader in range(min_leader + 1, n - p + 1):
            if used[leader]:
                continue
            if sum(1 for k in range(leader + 1, n) if not used[k]) < p - 1:
                continue
            used[leader] = True
            yield from extend(j, p, leader, (leader,))
            used[leader] = False

    def extend(
        j: int, p: int, leader: int, partial: tuple[int, ...]
    ) -> Iterator[CoverEncoding]:
        if len(partial) == p:
            if forbidden[partial[-1]] == leader:  # closing arc collides
                return
            cycles.append(partial)
            yield from build_cycle(j + 1)
            cycles.pop()
            return
        prev = partial[-1]
        for k in range(leader + 1, n):
            if used[k] or forbidden[prev] == k:
                continue
            used[k] = True
            yield from extend(j, p, leader, partial + (k,))
            used[k] = False

    yield from build_cycle(0)


@dataclass(frozen=True)
class WorkUnit:
    """One independently enumerable shard: a first-cover partition."""

    n: int
    partition_index: int

    @property
    def partition(self) -> tuple[int, ...]:
        return partitions_of(self.n)[self.partition_index]


def work_units(n: int) -> list[WorkUnit]:
    check_n(n)
    return [WorkUnit(n, i) for i in range(len(partitions_of(n)))]


def enumerate_unit(unit: WorkUnit) -> Iterator[CoverPairEncoding]:
    first = identity_layout(unit.partition)
    for second in second_covers(first):
        yield CoverPairEncoding(first, second)


def enumerate_candidates(
    n: int, max_candidates: int | None = None
) -> Iterator[CoverPairEncoding]:
    """Every candidate pair for n, in a deterministic order.

    Emits (first, second) with first an identity layout, second any
    normal-form cover with partition <= first's, and the two covers
    arc-disjoint.  Every pure half-integer vertex is isomorphic to the
    combination of at least one emitted pair.
    """
    if n < 4:
        raise ValueError(f"candidate enumeration needs n >= 4, got {n}")
    check_n(n)
    count = 0
    for unit in work_units(n):
        for pair in enumerate_unit(unit):
            if max_candidates is not None and count >= max_candidates:
                return
            count += 1
            yield pair


class CandidateStream:
    """Resumable view of enumerate_candidates.

    The cursor (partition index, count consumed within that partition)
    fully determines the resume point because the per-unit sequence is
    deterministic.
    """

    def __init__(self, n: int, cursor: tuple[int, int] = (0, 0)):
        check_n(n)
        self.n = n
        self._units = work_units(n)
        self._unit_index, self._consumed = cursor
        self._iter = None

    @property
    def cursor(self) -> tuple[int, int]:
        return (self._unit_index, self._consumed)

    def __iter__(self) -> Iterator[CoverPairEncoding]:
        return self

    def __next__(self) -> CoverPairEncoding:
        while self._unit_index < len(self._units):
            if self._iter is None:
                self._iter = enumerate_unit(self._units[self._unit_index])
                for _ in range(self._consumed):  # skip to the resume point
                    next(self._iter)
            try:
                pair = next(self._iter)
            except StopIteration:
                self._unit_index += 1
                self._consumed = 0
                self._iter = None
                continue
            self._consumed += 1
            return pair
        raise StopIteration
