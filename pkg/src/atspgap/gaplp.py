"""The auxiliary LP whose optimum at a vertex is the reciprocal of that
vertex's integrality gap.

Variables: a cost c_uv per arc (nonnegative), free node potentials
y_out_u and y_in_v, and a nonnegative multiplier d_S per node subset
with 2 <= |S| <= n-2.  Rows: triangle inequalities making c metric, a
unit lower bound on the cost of every tour, and per-arc rows
c_uv - y_out_u - y_in_v - sum of d_S over subsets whose out-cut contains
the arc, held at zero on the support of the vertex and nonnegative
elsewhere.  The objective minimizes the vertex's value under c.

Tours enter lazily through an exact Held-Karp separation oracle.  By
default the solver also activates triangle and off-support rows only
when violated, and prices subset multipliers into the basis on demand;
it stops only when every row of the full model holds exactly and no
undeclared column prices below zero, so the result is the exact optimum
of the fully materialized model.  An eager mode builds everything up
front for cross-checking at small n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .core import HalfPoint, arc_from_id, arc_id, num_arcs, support
from .rationals import ONE, Rational, ZERO, rat
from .simplex import EQ, GE, ExactSimplex, LinearProgram, solve_lp

_PRICE_BATCH = 150
_ROW_BATCH = 200


class GapSolveError(RuntimeError):
    """The model failed to solve; the input was not a vertex or the
    builder is broken."""


@dataclass(frozen=True)
class TourOracleResult:
    tour: tuple[int, ...]  # nodes in visiting order, starting at 0
    cost: Rational


def tour_arc_ids(tour: tuple[int, ...], n: int) -> list[int]:
    return [arc_id(tour[i], tour[(i + 1) % len(tour)], n) for i in range(len(tour))]


def min_tour(costs, n: int) -> TourOracleResult:
    """Exact minimum-cost directed Hamiltonian cycle, anchored at node 0,
    by dynamic programming over node subsets."""
    if n < 2:
        raise ValueError("tours need n >= 2")
    if n == 2:
        return TourOracleResult((0, 1), costs[arc_id(0, 1, 2)] + costs[arc_id(1, 0, 2)])
    full = (1 << n) - 1
    dp = {}
    parent = {}
    for j in range(1, n):
        dp[(1 | (1 << j), j)] = costs[arc_id(0, j, n)]
    for mask in range(1, full + 1, 2):  # ascending masks topologically order growth
        for j in range(1, n):
            key = (mask, j)
            if key not in dp:
                continue
            base = dp[key]
            rest = (~mask) & full
            while rest:
                k = (rest & -rest).bit_length() - 1
                cand = base + costs[arc_id(j, k, n)]
                nkey = (mask | (1 << k), k)
                if nkey not in dp or cand < dp[nkey]:
                    dp[nkey] = cand
                    parent[nkey] = j
                rest &= rest - 1
    best = None
    best_j = None
    for j in range(1, n):
        total = dp[(full, j)] + costs[arc_id(j, 0, n)]
        if best is None or total < best:
            best = total
            best_j = j
    order = [best_j]
    mask, j = full, best_j
    while (mask, j) in parent:
        p = parent[(mask, j)]
        mask ^= 1 << j
        j = p
        order.append(j)
    order.append(0)
    order.reverse()
    return TourOracleResult(tuple(order), best)


def all_tours(n: int):
    """Every directed Hamiltonian cycle, anchored at node 0."""
    for perm in itertools.permutations(range(1, n)):
        yield (0,) + perm


def brute_force_min_tour(costs, n: int) -> Rational:
    """Permutation brute force; test oracle for the dynamic program."""
    best = None
    for tour in all_tours(n):
        total = sum((costs[a] for a in tour_arc_ids(tour, n)), ZERO)
        if best is None or total < best:
            best = total
    return best


@dataclass
class GapModel:
    """The static model for one half-integer point, fully materialized.

    Variable order: c (by arc id), y_out, y_in, then d (by subset mask
    ascending).  Static rows: triangle rows (arc by id, then middle
    node), then one dual-slackness row per arc.  Tour rows are dynamic.
    """

    n: int
    x: HalfPoint
    subsets: list[int]
    lp: LinearProgram
    support_ids: frozenset[int]
    tours: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def m(self) -> int:
        return num_arcs(self.n)

    def c_var(self, a: int) -> int:
        return a

    def y_out_var(self, u: int) -> int:
        return self.m + u

    def y_in_var(self, v: int) -> int:
        return self.m + self.n + v

    def d_var(self, subset_index: int) -> int:
        return self.m + 2 * self.n + subset_index

    def tour_row(self, tour: tuple[int, ...]):
        return ({self.c_var(a): ONE for a in tour_arc_ids(tour, self.n)}, GE, ONE)


def _crossing_subset_indices(n: int, subsets: list[int]) -> list[list[int]]:
    crossing: list[list[int]] = [[] for _ in range(num_arcs(n))]
    for si, mask in enumerate(subsets):
        for u in range(n):
            if not mask & (1 << u):
                continue
            for v in range(n):
                if v != u and not mask & (1 << v):
                    crossing[arc_id(u, v, n)].append(si)
    return crossing


def build_gap_model(x: HalfPoint) -> GapModel:
    """Materialize objective, triangle rows, and dual-slackness rows."""
    n = x.n
    m = num_arcs(n)
    subsets = [mask for mask in range(1 << n) if 2 <= mask.bit_count() <= n - 2]
    assert len(subsets) == (1 << n) - 2 - 2 * n
    nvars = m + 2 * n + len(subsets)
    support_ids = frozenset(arc_id(u, v, n) for u, v in support(x))

    objective = [ZERO] * nvars
    for a in range(m):
        objective[a] = x.value[a]

    rows = []
    for a in range(m):
        u, v = arc_from_id(a, n)
        for w in range(n):
            if w == u or w == v:
                continue
            rows.append(
                ({arc_id(u, w, n): ONE, arc_id(w, v, n): ONE, a: rat(-1)}, GE, ZERO)
            )
    assert len(rows) == m * (n - 2)

    crossing = _crossing_subset_indices(n, subsets)
    equalities = 0
    for a in range(m):
        u, v = arc_from_id(a, n)
        coeffs = {a: ONE, m + u: rat(-1), m + n + v: rat(-1)}
        for si in crossing[a]:
            coeffs[m + 2 * n + si] = rat(-1)
        rel = EQ if a in support_ids else GE
        equalities += rel == EQ
        rows.append((coeffs, rel, ZERO))
    assert equalities == len(support_ids)

    lp = LinearProgram(
        n_vars=nvars,
        objective=tuple(objective),
        rows=tuple(rows),
        free_vars=frozenset(range(m, m + 2 * n)),
    )
    return GapModel(n=n, x=x, subsets=subsets, lp=lp, support_ids=support_ids)


@dataclass
class GapResult:
    gap: Rational
    objective: Rational
    costs: tuple[Rational, ...]
    y_out: tuple[Rational, ...]
    y_in: tuple[Rational, ...]
    d_values: dict[int, Rational]  # subset mask -> nonzero value
    tours: list[tuple[int, ...]]
    rounds: int


def solve_gap_instance(
    x: HalfPoint, *, eager: bool = False, active_cuts_only: bool = False
) -> Rational:
    """The integrality gap of the vertex x: one over the model optimum."""
    return solve_gap_details(x, eager=eager, active_cuts_only=active_cuts_only).gap


def solve_gap_details(
    x: HalfPoint, *, eager: bool = False, active_cuts_only: bool = False
) -> GapResult:
    """As solve_gap_instance but returning the certified optimum data.

    active_cuts_only is experimental: it restricts the subset multipliers
    to cuts tight at x and must be validated against the full model.
    """
    model = build_gap_model(x)
    allowed = set(_active_cut_indices(model)) if active_cuts_only else None
    result = _solve_eager(model, allowed) if eager else _solve_lazy(model, allowed)
    _certify(model, result, allowed)
    return result


def _active_cut_indices(model: GapModel) -> list[int]:
    twice = model.x.twice()
    out = []
    for si, mask in enumerate(model.subsets):
        total = 0
        for u in range(model.n):
            if not mask & (1 << u):
                continue
            for v in range(model.n):
                if v != u and not mask & (1 << v):
                    total += twice[arc_id(u, v, model.n)]
        if total == 2:
            out.append(si)
    return out


def _solve_eager(model: GapModel, allowed: set[int] | None) -> GapResult:
    rows = list(model.lp.rows)
    tours = list(all_tours(model.n))
    for tour in tours:
        rows.append(model.tour_row(tour))
    if allowed is not None:
        blocked = [
            model.d_var(si) for si in range(len(model.subsets)) if si not in allowed
        ]
        if blocked:
            rows.append(({v: ONE for v in blocked}, EQ, ZERO))
    lp = LinearProgram(
        model.lp.n_vars, model.lp.objective, tuple(rows), model.lp.free_vars
    )
    sol = solve_lp(lp)
    if sol.status != "optimal":
        raise GapSolveError(f"eager model status {sol.status}")
    model.tours = tours
    m, n = model.m, model.n
    d_values = {
        model.subsets[si]: sol.x[model.d_var(si)]
        for si in range(len(model.subsets))
        if sol.x[model.d_var(si)] != ZERO
    }
    return GapResult(
        gap=ONE / sol.objective_value,
        objective=sol.objective_value,
        costs=tuple(sol.x[:m]),
        y_out=tuple(sol.x[m : m + n]),
        y_in=tuple(sol.x[m + n : m + 2 * n]),
        d_values=d_values,
        tours=tours,
        rounds=1,
    )


def _solve_lazy(model: GapModel, allowed: set[int] | None) -> GapResult:
    n, m = model.n, model.m
    eng = ExactSimplex()
    for a in range(m):
        eng.add_variable(("c", a), model.x.value[a])
    for u in range(n):
        eng.add_variable(("yo", u), ZERO, free=True)
    for v in range(n):
        eng.add_variable(("yi", v), ZERO, free=True)

    dual_row_of: dict[int, int] = {}  # arc id -> engine row index
    declared: dict[int, object] = {}  # subset index -> engine var key
    tri_active: set[tuple[int, int]] = set()
    tours: list[tuple[int, ...]] = []

    def dual_row_coeffs(a: int):
        u, v = arc_from_id(a, n)
        coeffs = {("c", a): ONE, ("yo", u): rat(-1), ("yi", v): rat(-1)}
        for si, key in declared.items():
            mask = model.subsets[si]
            if mask & (1 << u) and not mask & (1 << v):
                coeffs[key] = rat(-1)
        return coeffs

    for a in sorted(model.support_ids):
        dual_row_of[a] = eng.add_constraint(dual_row_coeffs(a), EQ, ZERO)

    canonical = tuple(range(n))
    tours.append(canonical)
    eng.add_constraint({("c", a): ONE for a in tour_arc_ids(canonical, n)}, GE, ONE)

    status = eng.solve()
    rounds = 0
    while True:
        rounds += 1
        if status != "optimal":
            raise GapSolveError(f"model status {status}; not a vertex or builder bug")

        # Price undeclared subset multipliers: the reduced cost is the sum
        # of the duals of the active slackness rows the cut crosses.
        pi = eng.dual_values()
        arc_duals = []
        for a, r in dual_row_of.items():
            if pi[r]:
                u, v = arc_from_id(a, n)
                arc_duals.append((u, v, pi[r]))
        candidates = []
        pool = allowed if allowed is not None else range(len(model.subsets))
        for si in pool:
            if si in declared:
                continue
            mask = model.subsets[si]
            rc = ZERO
            for u, v, p in arc_duals:
                if mask & (1 << u) and not mask & (1 << v):
                    rc += p
            if rc < ZERO:
                candidates.append((rc, si))
        if candidates:
            candidates.sort()
            for _, si in candidates[:_PRICE_BATCH]:
                mask = model.subsets[si]
                column = {}
                for a, r in dual_row_of.items():
                    u, v = arc_from_id(a, n)
                    if mask & (1 << u) and not mask & (1 << v):
                        column[r] = rat(-1)
                key = ("d", mask)
                eng.add_variable_with_column(key, ZERO, column)
                declared[si] = key
            status = eng.solve()
            continue

        # Row separation, cheapest useful order: off-support slackness,
        # then tours, then triangle rows only once everything else holds
        # (triangle rows cut against early garbage costs never bind).
        cvals = [eng.value(("c", a)) for a in range(m)]
        d_now = {si: eng.value(key) for si, key in declared.items()}
        slack_violations = []
        for a in range(m):
            if a in dual_row_of:
                continue
            u, v = arc_from_id(a, n)
            lhs = cvals[a] - eng.value(("yo", u)) - eng.value(("yi", v))
            for si, val in d_now.items():
                if val:
                    mask = model.subsets[si]
                    if mask & (1 << u) and not mask & (1 << v):
                        lhs -= val
            if lhs < ZERO:
                slack_violations.append(a)
        if slack_violations:
            for a in slack_violations:
                dual_row_of[a] = eng.add_constraint(dual_row_coeffs(a), GE, ZERO)
            status = eng.solve()
            continue

        oracle = min_tour(cvals, n)
        if oracle.cost < ONE:
            tours.append(oracle.tour)
            eng.add_constraint(
                {("c", a): ONE for a in tour_arc_ids(oracle.tour, n)}, GE, ONE
            )
            status = eng.solve()
            continue

        added = 0
        for a in range(m):
            u, v = arc_from_id(a, n)
            ca = cvals[a]
            for w in range(n):
                if w == u or w == v or (a, w) in tri_active:
                    continue
                if cvals[arc_id(u, w, n)] + cvals[arc_id(w, v, n)] < ca:
                    eng.add_constraint(
                        {
                            ("c", arc_id(u, w, n)): ONE,
                            ("c", arc_id(w, v, n)): ONE,
                            ("c", a): rat(-1),
                        },
                        GE,
                        ZERO,
                    )
                    tri_active.add((a, w))
                    added += 1
                    if added >= _ROW_BATCH:
                        break
            if added >= _ROW_BATCH:
                break
        if added:
            status = eng.solve()
            continue
        break

    model.tours = tours
    objective = eng.objective_value()
    d_values = {}
    for si, key in declared.items():
        val = eng.value(key)
        if val != ZERO:
            d_values[model.subsets[si]] = val
    return GapResult(
        gap=ONE / objective,
        objective=objective,
        costs=tuple(eng.value(("c", a)) for a in range(m)),
        y_out=tuple(eng.value(("yo", u)) for u in range(n)),
        y_in=tuple(eng.value(("yi", v)) for v in range(n)),
        d_values=d_values,
        tours=tours,
        rounds=rounds,
    )


def _certify(model: GapModel, result: GapResult, allowed: set[int] | None) -> None:
    """Exact substitute-and-check of every full-model row at the optimum."""
    n, m = model.n, model.m
    costs = result.costs
    if not (ZERO < result.objective <= ONE):
        raise GapSolveError(f"objective {result.objective} outside (0, 1]")
    if any(c < ZERO for c in costs):
        raise GapSolveError("negative cost at optimum")
    if any(v < ZERO for v in result.d_values.values()):
        raise GapSolveError("negative cut multiplier at optimum")
    for a in range(m):
        u, v = arc_from_id(a, n)
        for w in range(n):
            if w != u and w != v:
                if costs[arc_id(u, w, n)] + costs[arc_id(w, v, n)] < costs[a]:
                    raise GapSolveError("optimum cost vector is not metric")
    slack = [costs[a] for a in range(m)]
    for a in range(m):
        u, v = arc_from_id(a, n)
        slack[a] -= result.y_out[u] + result.y_in[v]
    for mask, val in result.d_values.items():
        for u in range(n):
            if not mask & (1 << u):
                continue
            for v in range(n):
                if v != u and not mask & (1 << v):
                    slack[arc_id(u, v, n)] -= val
    for a in range(m):
        if a in model.support_ids:
            if slack[a] != ZERO:
                raise GapSolveError("support slackness row not tight at optimum")
        elif slack[a] < ZERO:
            raise GapSolveError("off-support slackness row violated at optimum")
    oracle = min_tour(costs, n)
    if oracle.cost < ONE:
        raise GapSolveError("a tour beats the unit bound at the optimum")
    value = sum((model.x.value[a] * costs[a] for a in range(m)), ZERO)
    if value != result.objective:
        raise GapSolveError("objective does not match the cost vector")
    if result.gap * result.objective != ONE:
        raise GapSolveError("gap is not the reciprocal of the objective")


def gap_n(records) -> Rational:
    """The maximum per-vertex gap over a full census of vertex records."""
    gaps = [r.gap for r in records if r.status == "vertex"]
    if not gaps:
        raise ValueError("no vertex records; cannot aggregate a gap")
    return max(gaps)
