"""Property checks for candidate points: decomposition, subtour
feasibility, and extremality.

A degree-feasible half-integer point always splits as the average of two
cycle covers; the first is recovered by a perfect matching on the
bipartite tails-by-heads support graph and the second is its complement,
which the degree equations force to be a cover as well.

Extremality is decided two independent ways.  The production path walks
the support arcs of a pure point into circuit/dual pairs (each node has
exactly two support out-arcs and two in-arcs, so following the
out-sibling then the in-sibling alternates degree constraints until the
walk closes) and then merges those pairs along the projections of active
subtour cuts, each of which touches exactly two support arcs.  The point
is extreme exactly when the count of non-shorted circuit pairs reaches
zero.  The test oracle instead builds all active constraint rows and
computes an exact rational rank.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .core import CycleCover, HalfPoint, arc_id, num_arcs, support
from .rationals import rat

Arc = tuple[int, int]
Label = tuple[int, int]  # (circuit id, side bit)


def _support_adjacency(x: HalfPoint):
    """Per-node lists of support out-neighbours and in-neighbours."""
    outs: list[list[int]] = [[] for _ in range(x.n)]
    ins: list[list[int]] = [[] for _ in range(x.n)]
    for u, v in sorted(support(x)):
        outs[u].append(v)
        ins[v].append(u)
    return outs, ins


def decompose_half_point(x: HalfPoint) -> tuple[CycleCover, CycleCover]:
    """Split x into covers (y1, y2) with combine_covers(y1, y2) == x.

    y1 comes from a perfect matching of tails to heads within the
    support; y2 is the complement 2x - y1.  A matching always exists for
    a valid half point, so failure means the input violated a
    precondition.
    """
    outs, _ = _support_adjacency(x)
    match_head: list[int | None] = [None] * x.n  # head -> matched tail

    def augment(u: int, visited: set[int]) -> bool:
        for v in outs[u]:
            if v in visited:
                continue
            visited.add(v)
            if match_head[v] is None or augment(match_head[v], visited):
                match_head[v] = u
                return True
        return False

    for u in range(x.n):
        if not augment(u, set()):
            raise ValueError(f"no perfect matching on the support of node {u}; "
                             "input is not a valid half point")
    succ1 = [0] * x.n
    for v, u in enumerate(match_head):
        succ1[u] = v
    y1 = CycleCover(tuple(succ1))

    twice = x.twice()
    succ2 = [0] * x.n
    for u in range(x.n):
        rest = [v for v in outs[u] if twice[arc_id(u, v, x.n)] - (1 if succ1[u] == v else 0) > 0]
        if len(rest) != 1:
            raise ValueError("complement is not a cover; input is not a valid half point")
        succ2[u] = rest[0]
    return y1, CycleCover(tuple(succ2))


def all_first_covers(x: HalfPoint) -> Iterator[CycleCover]:
    """Every cover of the support graph, i.e. every perfect matching of
    tails to heads (used to exercise the complement construction)."""
    outs, _ = _support_adjacency(x)
    n = x.n
    taken = [False] * n
    succ = [0] * n

    def rec(u: int) -> Iterator[CycleCover]:
        if u == n:
            yield CycleCover(tuple(succ))
            return
        for v in outs[u]:
            if not taken[v]:
                taken[v] = True
                succ[u] = v
                yield from rec(u + 1)
                taken[v] = False

    yield from rec(0)


def proper_subsets(n: int) -> Iterator[int]:
    """Node subsets S with 2 <= |S| <= n-2, as bitmasks in ascending order."""
    for mask in range(3, 1 << n):
        k = mask.bit_count()
        if 2 <= k <= n - 2:
            yield mask


def _cut_twice(x: HalfPoint, out_masks: list[int], twice: list[int], mask: int) -> int:
    """2 * (out-cut value of S): integer, exact."""
    n = x.n
    total = 0
    rest = mask
    while rest:
        u = (rest & -rest).bit_length() - 1
        cross = out_masks[u] & ~mask
        while cross:
            v = (cross & -cross).bit_length() - 1
            total += twice[arc_id(u, v, n)]
            cross &= cross - 1
        rest &= rest - 1
    return total


def subtour_feasible(x: HalfPoint) -> bool:
    """True iff every proper subset's out-cut is >= 1, checked exactly."""
    out_masks = x.support_out_masks()
    twice = x.twice()
    return all(
        _cut_twice(x, out_masks, twice, mask) >= 2 for mask in proper_subsets(x.n)
    )


@dataclass(frozen=True)
class ProjectedPair:
    """The two support arcs of a projected constraint vector, unordered."""

    e1: Arc
    e2: Arc

    def __post_init__(self):
        if self.e1 == self.e2:
            raise ValueError("projected pair needs two distinct arcs")
        a, b = sorted((self.e1, self.e2))
        object.__setattr__(self, "e1", a)
        object.__setattr__(self, "e2", b)


def active_subtour_masks(x: HalfPoint) -> list[int]:
    """Subsets whose out-cut equals 1 exactly, ascending by mask."""
    out_masks = x.support_out_masks()
    twice = x.twice()
    return [
        mask
        for mask in proper_subsets(x.n)
        if _cut_twice(x, out_masks, twice, mask) == 2
    ]


def active_subtour_pairs(x: HalfPoint) -> list[tuple[int, ProjectedPair]]:
    """For each subset with out-cut exactly 1, the two support arcs
    crossing it.  Requires a feasible pure point; subsets ascend by mask."""
    out_masks = x.support_out_masks()
    n = x.n
    result = []
    for mask in active_subtour_masks(x):
        crossing = []
        rest = mask
        while rest:
            u = (rest & -rest).bit_length() - 1
            cross = out_masks[u] & ~mask
            while cross:
                v = (cross & -cross).bit_length() - 1
                crossing.append((u, v))
                cross &= cross - 1
            rest &= rest - 1
        if len(crossing) != 2:
            raise AssertionError("active cut crossed by != 2 support arcs")
        result.append((mask, ProjectedPair(*sorted(crossing))))
    return result


@dataclass
class CircuitState:
    """Working state of the circuit extremality algorithm.

    part never changes after initialization; duals and shorted track
    merges through label indirection.  c counts non-shorted circuit
    pairs.
    """

    part: dict[Arc, Label]
    duals: dict[Label, set[Label]]
    shorted: set[Label] = field(default_factory=set)
    c: int = 0

    def labels(self) -> list[Label]:
        return sorted(self.duals)


def circuit_partition(x: HalfPoint) -> CircuitState:
    """Partition the support arcs of a pure point into circuit/dual pairs.

    Starting from an unvisited arc, repeatedly step to the out-sibling
    (same tail) and then to that arc's in-sibling (same head), labeling
    the alternating sides (k, 0) and (k, 1) until the walk closes.
    """
    if not x.pure:
        raise ValueError("circuit partition needs a pure point")
    outs, ins = _support_adjacency(x)
    n = x.n

    def out_sibling(a: Arc) -> Arc:
        u, v = a
        w = outs[u][1] if outs[u][0] == v else outs[u][0]
        return (u, w)

    def in_sibling(a: Arc) -> Arc:
        u, v = a
        w = ins[v][1] if ins[v][0] == u else ins[v][0]
        return (w, v)

    part: dict[Arc, Label] = {}
    arcs = sorted(support(x))
    k = 0
    for start in arcs:
        if start in part:
            continue
        e = start
        while e not in part:
            part[e] = (k, 0)
            sib = out_sibling(e)
            if sib in part:
                raise AssertionError("circuit walk collided; input not 2-regular")
            part[sib] = (k, 1)
            e = in_sibling(sib)
        if e != start:
            raise AssertionError("circuit walk closed away from its start")
        k += 1
    duals = {}
    for i in range(k):
        duals[(i, 0)] = {(i, 1)}
        duals[(i, 1)] = {(i, 0)}
    return CircuitState(part=part, duals=duals, c=k)


def _merge_in_place(st: CircuitState, pair: ProjectedPair) -> None:
    l1 = st.part[pair.e1]
    l2 = st.part[pair.e2]
    if l2 in st.duals[l1]:
        return  # the cut vector lies in the span already present
    if l1 in st.shorted and l2 in st.shorted:
        return  # joining two shorted circuits changes no count
    st.c -= 1
    duals = st.duals
    if l1 != l2 and (l1 in st.shorted) != (l2 in st.shorted):
        alive = l2 if l1 in st.shorted else l1
        duals[alive] = duals[alive] | {alive}
    for a, b in ((l1, l2), (l2, l1)):
        union = set(duals[a])
        for lab in duals[b]:
            union |= duals[lab]
        duals[a] = union
    for a, b in ((l1, l2), (l2, l1)):
        for lab in list(duals[b]):
            duals[lab] = set(duals[a])
        if a in duals[a]:
            st.shorted |= duals[a]


def merge_step(st: CircuitState, pair: ProjectedPair) -> CircuitState:
    """Apply one active-cut vector to a copy of the state."""
    new = CircuitState(
        part=st.part,
        duals={k: set(v) for k, v in st.duals.items()},
        shorted=set(st.shorted),
        c=st.c,
    )
    _merge_in_place(new, pair)
    return new


def count_live_pairs(st: CircuitState) -> int:
    """Recount non-shorted circuit pairs from the duals map (debug check
    that c is maintained correctly)."""
    classes = set()
    for lab in st.duals:
        if lab in st.shorted:
            continue
        mates = frozenset(st.duals[next(iter(st.duals[lab]))])
        partners = frozenset(st.duals[lab])
        classes.add(frozenset((mates, partners)))
    return len(classes)


def is_extreme_circuit(x: HalfPoint) -> bool:
    """Extremality via circuit merging; expects a feasible pure point.

    Processes active cut vectors in ascending subset-mask order (any
    order gives the same answer) and reports True exactly when the
    non-shorted pair count reaches zero.
    """
    st = circuit_partition(x)
    for _, pair in active_subtour_pairs(x):
        _merge_in_place(st, pair)
        if st.c == 0:
            return True
    return False


def extremality_rank_oracle(x: HalfPoint) -> bool:
    """Extremality via exact rank of the active constraint rows.

    Rows over the full arc space: degree equalities, subtour rows with
    cut exactly 1, and the bounds of zero-valued arcs.  The point is
    extreme iff the rank equals the number of arcs.
    """
    n = x.n
    m = num_arcs(n)
    supp = {arc_id(u, v, n) for u, v in support(x)}

    rows: list[dict[int, int]] = []
    for u in range(n):
        rows.append({arc_id(u, v, n): 1 for v in range(n) if v != u})
    for v in range(n):
        rows.append({arc_id(u, v, n): 1 for u in range(n) if u != v})
    for mask in active_subtour_masks(x):
        row = {}
        for u in range(n):
            if mask & (1 << u):
                for v in range(n):
                    if v != u and not mask & (1 << v):
                        row[arc_id(u, v, n)] = 1
        rows.append(row)

    # Bound rows x_e = 0 are unit vectors; eliminating them first just
    # deletes their columns, so the remaining rows are ranked over the
    # support columns and the bound rows contribute m - |support| each.
    zero_cols = set(range(m)) - supp
    reduced = []
    for row in rows:
        kept = {j: rat(c) for j, c in row.items() if j not in zero_cols}
        if kept:
            reduced.append(kept)
    rank = len(zero_cols) + _rational_rank(reduced)
    return rank == m


def _rational_rank(rows: list[dict[int, "object"]]) -> int:
    """Gaussian elimination over exact rationals on sparse rows."""
    rows = [dict(r) for r in rows]
    rank = 0
    while rows:
        pivot_row = rows.pop(0)
        if not pivot_row:
            continue
        rank += 1
        j = min(pivot_row)
        pj = pivot_row[j]
        for other in rows:
            f = other.get(j)
            if not f:
                continue
            scale = f / pj
            for k, v in pivot_row.items():
                newv = other.get(k, 0) - scale * v
                if newv:
                    other[k] = newv
                else:
                    other.pop(k, None)
    return rank
