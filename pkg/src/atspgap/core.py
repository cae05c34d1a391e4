"""Foundational value types: nodes, arcs, cycle covers, half-integer points.

Nodes are integers in [0, n); an arc is a (tail, head) pair with
tail != head.  Arcs are also addressed by a dense index so vectors over
the arc set can live in flat arrays.  The engine is capped at n <= 16 so
node subsets fit in a 16-bit mask word.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .rationals import HALF, ONE, Rational, ZERO, rat

MIN_NODES = 2
MAX_NODES = 16


def check_n(n: int) -> None:
    if not MIN_NODES <= n <= MAX_NODES:
        raise ValueError(f"n must be in [{MIN_NODES}, {MAX_NODES}], got {n}")


def num_arcs(n: int) -> int:
    return n * (n - 1)


def arc_id(tail: int, head: int, n: int) -> int:
    """Dense index of the arc tail->head in [0, n(n-1))."""
    if tail == head:
        raise ValueError(f"self-loop {tail}->{head}")
    return tail * (n - 1) + (head if head < tail else head - 1)


def arc_from_id(index: int, n: int) -> tuple[int, int]:
    """Inverse of arc_id."""
    tail, rest = divmod(index, n - 1)
    head = rest if rest < tail else rest + 1
    return tail, head


def all_arcs(n: int) -> Iterator[tuple[int, int]]:
    """All arcs of the complete digraph in arc_id order."""
    for a in range(num_arcs(n)):
        yield arc_from_id(a, n)


@dataclass(frozen=True)
class CycleCover:
    """A spanning set of vertex-disjoint directed cycles, all of length >= 2.

    Stored as a successor permutation: successor[u] = v iff the arc u->v
    belongs to the cover.
    """

    successor: tuple[int, ...]

    def __post_init__(self):
        n = len(self.successor)
        check_n(n)
        seen = [False] * n
        for u, v in enumerate(self.successor):
            if not 0 <= v < n:
                raise ValueError(f"successor {v} out of range for n={n}")
            if v == u:
                raise ValueError(f"fixed point at node {u}: cycles must have length >= 2")
            if seen[v]:
                raise ValueError(f"node {v} has in-degree > 1")
            seen[v] = True

    @property
    def n(self) -> int:
        return len(self.successor)

    def arcs(self) -> list[tuple[int, int]]:
        return list(enumerate(self.successor))

    def cycles(self) -> list[list[int]]:
        """Cycles as node lists, each starting at its minimal node."""
        n = self.n
        seen = [False] * n
        out = []
        for start in range(n):
            if seen[start]:
                continue
            cyc = []
            u = start
            while not seen[u]:
                seen[u] = True
                cyc.append(u)
                u = self.successor[u]
            out.append(cyc)
        return out

    def arc_disjoint(self, other: "CycleCover") -> bool:
        return all(v != w for v, w in zip(self.successor, other.successor))


@dataclass(frozen=True)
class HalfPoint:
    """A degree-feasible point with entries in {0, 1/2, 1} over the arc set.

    value is indexed by arc_id.  Out- and in-degree sums are checked to
    equal one exactly on construction.
    """

    n: int
    value: tuple[Rational, ...]

    def __post_init__(self):
        check_n(self.n)
        n = self.n
        if len(self.value) != num_arcs(n):
            raise ValueError("value vector has wrong length")
        allowed = (ZERO, HALF, ONE)
        for q in self.value:
            if q not in allowed:
                raise ValueError(f"entry {q} not in {{0, 1/2, 1}}")
        for u in range(n):
            out_sum = sum(
                (self.value[arc_id(u, v, n)] for v in range(n) if v != u), ZERO
            )
            if out_sum != ONE:
                raise ValueError(f"out-degree sum at node {u} is {out_sum}, not 1")
        for v in range(n):
            in_sum = sum(
                (self.value[arc_id(u, v, n)] for u in range(n) if u != v), ZERO
            )
            if in_sum != ONE:
                raise ValueError(f"in-degree sum at node {v} is {in_sum}, not 1")

    @property
    def pure(self) -> bool:
        """True iff no entry equals 1."""
        return ONE not in self.value

    def twice(self) -> list[int]:
        """The integer vector 2x, entries in {0, 1, 2}."""
        return [int(2 * q) for q in self.value]

    def support_out_masks(self) -> list[int]:
        """Per-node bitmask of support out-neighbours."""
        masks = [0] * self.n
        for u, v in support(self):
            masks[u] |= 1 << v
        return masks


def combine_covers(y1: CycleCover, y2: CycleCover) -> HalfPoint:
    """The average (chi(y1) + chi(y2)) / 2 as a half-integer point.

    The result is pure iff the covers are arc-disjoint.
    """
    if y1.n != y2.n:
        raise ValueError("covers live on different node counts")
    n = y1.n
    value = [ZERO] * num_arcs(n)
    for u in range(n):
        value[arc_id(u, y1.successor[u], n)] += HALF
        value[arc_id(u, y2.successor[u], n)] += HALF
    return HalfPoint(n, tuple(value))


def support(x: HalfPoint) -> set[tuple[int, int]]:
    """The arcs carrying positive value."""
    n = x.n
    return {arc_from_id(a, n) for a, q in enumerate(x.value) if q > ZERO}


def half_point_from_support(n: int, arcs: Iterable[tuple[int, int]]) -> HalfPoint:
    """The point with value 1/2 on the given arcs and 0 elsewhere."""
    value = [ZERO] * num_arcs(n)
    for u, v in arcs:
        value[arc_id(u, v, n)] = HALF
    return HalfPoint(n, tuple(value))


@dataclass(frozen=True)
class VertexRecord:
    """One pipeline result row: a candidate class and its final status."""

    n: int
    pair: str
    certificate: str
    status: str  # candidate | infeasible | non_extreme | vertex
    gap_numerator: int | None = None
    gap_denominator: int | None = None

    def __post_init__(self):
        if self.status not in ("candidate", "infeasible", "non_extreme", "vertex"):
            raise ValueError(f"unknown status {self.status!r}")
        has_gap = self.gap_numerator is not None and self.gap_denominator is not None
        if has_gap != (self.status == "vertex"):
            raise ValueError("gap fields must be populated exactly for vertices")
        if has_gap and rat(self.gap_numerator, self.gap_denominator) < ONE:
            raise ValueError("vertex gap below 1")

    @property
    def gap(self) -> Rational | None:
        if self.gap_numerator is None:
            return None
        return rat(self.gap_numerator, self.gap_denominator)
