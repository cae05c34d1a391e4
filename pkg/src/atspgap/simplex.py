"""Exact rational linear programming.

Two-phase primal simplex over exact rationals on a dense tableau, with
two warm-start paths: rows added after an optimum trigger dual-simplex
reoptimization, and columns added later are priced into the current
basis.  Entering variables follow Dantzig's rule with deterministic
index tie-breaks; a run of degenerate pivots switches to Bland's rule
until progress resumes, which is what guarantees termination.  Identical
inputs always produce identical pivot sequences and bases.

Free variables are split into differences of two nonnegative parts.
Infeasible and unbounded are reported as statuses, not exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .rationals import ONE, Rational, ZERO, rat

GE = ">="
EQ = "=="

_BLAND_AFTER = 40  # consecutive degenerate pivots before switching rules


@dataclass(frozen=True)
class LinearProgram:
    """min objective . x subject to rows; variables are nonnegative
    unless listed in free_vars."""

    n_vars: int
    objective: tuple[Rational, ...]
    rows: tuple[tuple[Mapping[int, Rational], str, Rational], ...]
    free_vars: frozenset[int] = frozenset()

    def __post_init__(self):
        if len(self.objective) != self.n_vars:
            raise ValueError("objective length != n_vars")
        for coeffs, rel, _ in self.rows:
            if rel not in (GE, EQ):
                raise ValueError(f"unknown relation {rel!r}")
            for j in coeffs:
                if not 0 <= j < self.n_vars:
                    raise ValueError(f"row references unknown variable {j}")


@dataclass(frozen=True)
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    x: tuple[Rational, ...] | None
    objective_value: Rational | None
    basis: tuple[str, ...] | None
    engine: "ExactSimplex | None" = field(default=None, compare=False, repr=False)


class ExactSimplex:
    """Stateful solver: build columns and rows, solve, then optionally
    keep adding rows or columns and re-solving."""

    def __init__(self):
        self.ncols = 0
        self.col_label: list[str] = []
        self.col_cost: list[Rational] = []
        self.col_enterable: list[bool] = []
        self.var_cols: dict[object, tuple[int, int | None]] = {}  # key -> (+col, -col)
        self.rows_raw: list[tuple[dict[object, Rational], str, Rational]] = []
        self.tableau: list[list[Rational]] = []
        self.rhs: list[Rational] = []
        self.basis: list[int] = []
        self.init_col: list[int] = []  # per row: the column that started as its unit
        self.row_sign: list[int] = []  # stored row = sign * original row
        self.zrow: list[Rational] = []
        self.zval = ZERO
        self.solved = False
        self.status: str | None = None
        self.pivots = 0

    # -- model building ------------------------------------------------

    def add_variable(self, key, cost, free: bool = False) -> None:
        if key in self.var_cols:
            raise ValueError(f"variable {key!r} added twice")
        if self.solved and free:
            raise ValueError("late variables must be nonnegative")
        cost = rat(cost)
        pos = self._new_col(f"x:{key}", cost)
        neg = self._new_col(f"x:{key}:-", -cost) if free else None
        self.var_cols[key] = (pos, neg)

    def add_variable_with_column(self, key, cost, column: Mapping[int, Rational]) -> None:
        """Add a nonnegative variable after solving; column maps existing
        row indices to coefficients."""
        if not self.solved:
            raise ValueError("use add_variable before the first solve")
        cost = rat(cost)
        col = self._new_col(f"x:{key}", cost)
        self.var_cols[key] = (col, None)
        # Representation in the current basis: B^-1 times the stored column.
        tcol = [ZERO] * len(self.tableau)
        for r, coeff in column.items():
            coeff = coeff * self.row_sign[r]
            if not coeff:
                continue
            binv_col = self.init_col[r]
            for i in range(len(self.tableau)):
                entry = self.tableau[i][binv_col]
                if entry:
                    tcol[i] += coeff * entry
        for i, row in enumerate(self.tableau):
            row[col] = tcol[i]
        rc = cost
        for r, coeff in column.items():
            if coeff:
                rc -= coeff * self._dual_value(r)
        self.zrow[col] = rc

    def add_constraint(self, coeffs: Mapping[object, Rational], rel: str, rhs) -> int:
        """Add a row; before the first solve it joins the initial build,
        afterwards it is pivoted into the current basis (GE only)."""
        if rel not in (GE, EQ):
            raise ValueError(f"unknown relation {rel!r}")
        rhs = rat(rhs)
        coeffs = {k: rat(v) for k, v in coeffs.items() if rat(v) != ZERO}
        index = len(self.rows_raw)
        self.rows_raw.append((coeffs, rel, rhs))
        if self.solved:
            if rel != GE:
                raise ValueError("late rows must be >=")
            self._attach_row(coeffs, rhs)
        return index

    def _new_col(self, label: str, cost: Rational) -> int:
        j = self.ncols
        self.ncols += 1
        self.col_label.append(label)
        self.col_cost.append(cost)
        self.col_enterable.append(True)
        for row in self.tableau:
            row.append(ZERO)
        if self.zrow:
            self.zrow.append(ZERO)
        return j

    def _expand(self, coeffs: Mapping[object, Rational]) -> dict[int, Rational]:
        out: dict[int, Rational] = {}
        for key, v in coeffs.items():
            pos, neg = self.var_cols[key]
            out[pos] = v
            if neg is not None:
                out[neg] = -v
        return out

    # -- solving -------------------------------------------------------

    def solve(self) -> str:
        if not self.solved:
            self._initial_solve()
            return self.status
        neg_rhs = any(b < ZERO for b in self.rhs)
        neg_rc = any(
            self.col_enterable[j] and self.zrow[j] < ZERO for j in range(self.ncols)
        )
        if neg_rhs and neg_rc:
            raise AssertionError(
                "rows and columns both pending; re-solve between the two batches"
            )
        if neg_rhs:
            self.status = self._dual_simplex()
            if self.status != "optimal":
                return self.status
        self.status = self._primal_simplex()
        return self.status

    def _initial_solve(self) -> None:
        artificials = []
        for coeffs, rel, rhs in self.rows_raw:
            cols = self._expand(coeffs)
            r = len(self.tableau)
            row = [ZERO] * self.ncols
            for j, v in cols.items():
                row[j] = v
            if rel == GE:
                s = self._new_col(f"s{r}", ZERO)
                row.append(-ONE)
            else:
                s = None
            sign = 1
            if rhs < ZERO:
                row = [-v for v in row]
                rhs = -rhs
                sign = -1
            if s is not None and row[s] == ONE:
                basic = s
                init = s
            else:
                a = self._new_col(f"a{r}", ZERO)
                self.col_enterable[a] = False
                row.append(ONE)
                artificials.append(a)
                basic = a
                init = a
            for other in self.tableau:
                while len(other) < self.ncols:
                    other.append(ZERO)
            while len(row) < self.ncols:
                row.append(ZERO)
            self.tableau.append(row)
            self.rhs.append(rhs)
            self.basis.append(basic)
            self.init_col.append(init)
            self.row_sign.append(sign)

        for row in self.tableau:
            while len(row) < self.ncols:
                row.append(ZERO)

        if artificials:
            phase1_cost = [ZERO] * self.ncols
            for a in artificials:
                phase1_cost[a] = ONE
            self._set_costs(phase1_cost)
            for a in artificials:
                self.col_enterable[a] = True
            status = self._primal_simplex()
            for a in artificials:
                self.col_enterable[a] = False
            if status != "optimal" or self.zval != ZERO:
                self.status = "infeasible"
                self.solved = True
                return
            self._evict_artificials(set(artificials))
        self._set_costs(list(self.col_cost))
        self.status = self._primal_simplex()
        self.solved = True

    def _set_costs(self, costs: list[Rational]) -> None:
        """Recompute the reduced-cost row for the given cost vector."""
        z = list(costs)
        zval = ZERO
        for r, row in enumerate(self.tableau):
            cb = costs[self.basis[r]]
            if cb:
                for j, v in enumerate(row):
                    if v:
                        z[j] -= cb * v
                zval -= cb * self.rhs[r]
        self.zrow = z
        self.zval = zval
        self._active_costs = costs

    def _evict_artificials(self, artificials: set[int]) -> None:
        """Pivot basic artificials out where possible; rows that cannot
        release theirs are redundant and keep a zero artificial basic."""
        for r in range(len(self.tableau)):
            if self.basis[r] not in artificials:
                continue
            row = self.tableau[r]
            for j in range(self.ncols):
                if j not in artificials and row[j] != ZERO:
                    self._pivot(r, j)
                    break

    def _pivot(self, r: int, j: int) -> None:
        self.pivots += 1
        tableau = self.tableau
        row = tableau[r]
        piv = row[j]
        if piv != ONE:
            inv = ONE / piv
            tableau[r] = row = [v * inv if v else v for v in row]
            self.rhs[r] *= inv
        nz = [k for k, v in enumerate(row) if v]
        br = self.rhs[r]
        for i, other in enumerate(tableau):
            if i == r:
                continue
            f = other[j]
            if f:
                for k in nz:
                    other[k] -= f * row[k]
                if br:
                    self.rhs[i] -= f * br
        f = self.zrow[j]
        if f:
            z = self.zrow
            for k in nz:
                z[k] -= f * row[k]
            if br:
                self.zval -= f * br
        self.basis[r] = j

    def _primal_simplex(self) -> str:
        degenerate_streak = 0
        while True:
            bland = degenerate_streak >= _BLAND_AFTER
            j = self._entering(bland)
            if j is None:
                return "optimal"
            r = self._leaving(j, bland)
            if r is None:
                return "unbounded"
            ratio_zero = self.rhs[r] == ZERO
            self._pivot(r, j)
            degenerate_streak = degenerate_streak + 1 if ratio_zero else 0

    def _entering(self, bland: bool) -> int | None:
        z = self.zrow
        if bland:
            for j in range(self.ncols):
                if self.col_enterable[j] and z[j] < ZERO:
                    return j
            return None
        best = None
        best_val = ZERO
        for j in range(self.ncols):
            if self.col_enterable[j] and z[j] < best_val:
                best_val = z[j]
                best = j
        return best

    def _leaving(self, j: int, bland: bool) -> int | None:
        # Ties on the ratio prefer the larger pivot element; degenerate
        # plateaus are common here and large pivots escape them faster.
        # Bland mode breaks ties by basis index alone, which is what
        # guarantees termination.
        best = None
        best_key = None
        for r, row in enumerate(self.tableau):
            a = row[j]
            if a > ZERO:
                ratio = self.rhs[r] / a
                key = (ratio, self.basis[r]) if bland else (ratio, -a, self.basis[r])
                if best_key is None or key < best_key:
                    best_key = key
                    best = r
        return best

    def _dual_simplex(self) -> str:
        degenerate_streak = 0
        while True:
            bland = degenerate_streak >= _BLAND_AFTER
            r = self._dual_leaving(bland)
            if r is None:
                return "optimal"
            j = self._dual_entering(r, bland)
            if j is None:
                return "infeasible"
            improving = self.zrow[j] != ZERO
            self._pivot(r, j)
            degenerate_streak = 0 if improving else degenerate_streak + 1

    def _dual_leaving(self, bland: bool) -> int | None:
        best = None
        best_key = None
        for r, b in enumerate(self.rhs):
            if b < ZERO:
                key = (self.basis[r],) if bland else (b, self.basis[r])
                if best_key is None or key < best_key:
                    best_key = key
                    best = r
        return best

    def _dual_entering(self, r: int, bland: bool) -> int | None:
        # Same tie-break idea as the primal ratio test: favour the larger
        # pivot magnitude off the degenerate plateau unless Bland mode is
        # needed for the termination guarantee.
        row = self.tableau[r]
        best = None
        best_key = None
        for j in range(self.ncols):
            if not self.col_enterable[j]:
                continue
            a = row[j]
            if a < ZERO:
                ratio = self.zrow[j] / -a
                key = (ratio, j) if bland else (ratio, a, j)
                if best_key is None or key < best_key:
                    best_key = key
                    best = j
        return best

    def _attach_row(self, coeffs: dict[object, Rational], rhs: Rational) -> None:
        """Express a late >= row in the current basis; its surplus becomes
        basic (possibly at a negative value, fixed by the next solve)."""
        cols = self._expand(coeffs)
        r = len(self.tableau)
        s = self._new_col(f"s{r}", ZERO)
        row = [ZERO] * self.ncols
        for j, v in cols.items():
            row[j] = v
        row[s] = -ONE
        for i, other in enumerate(self.tableau):
            f = row[self.basis[i]]
            if f:
                for k, v in enumerate(other):
                    if v:
                        row[k] -= f * v
                rhs -= f * self.rhs[i]
        row = [-v for v in row]
        rhs = -rhs
        self.tableau.append(row)
        self.rhs.append(rhs)
        self.basis.append(s)
        self.init_col.append(s)
        self.row_sign.append(-1)
        if self.zrow[s] != ZERO:
            raise AssertionError("fresh surplus must have zero reduced cost")

    # -- solution access -----------------------------------------------

    def _dual_value(self, r: int) -> Rational:
        # Initial columns carry zero cost, so the stored-system dual is
        # -rc at the unit column; the sign maps it back to the original
        # row orientation.
        return -self.zrow[self.init_col[r]] * self.row_sign[r]

    def dual_values(self) -> list[Rational]:
        return [self._dual_value(r) for r in range(len(self.tableau))]

    def column_value(self, j: int) -> Rational:
        for r, bj in enumerate(self.basis):
            if bj == j:
                return self.rhs[r]
        return ZERO

    def value(self, key) -> Rational:
        pos, neg = self.var_cols[key]
        v = self.column_value(pos)
        if neg is not None:
            v -= self.column_value(neg)
        return v

    def objective_value(self) -> Rational:
        total = ZERO
        for r, j in enumerate(self.basis):
            c = self.col_cost[j]
            if c:
                total += c * self.rhs[r]
        return total

    def basis_labels(self) -> tuple[str, ...]:
        return tuple(self.col_label[j] for j in self.basis)

    def reduced_cost(self, cost, column: Mapping[int, Rational]) -> Rational:
        """Reduced cost of a hypothetical nonnegative column."""
        rc = rat(cost)
        for r, coeff in column.items():
            if coeff:
                rc -= coeff * self._dual_value(r)
        return rc


def _engine_from(lp: LinearProgram) -> ExactSimplex:
    eng = ExactSimplex()
    for j in range(lp.n_vars):
        eng.add_variable(j, lp.objective[j], free=j in lp.free_vars)
    for coeffs, rel, rhs in lp.rows:
        eng.add_constraint(coeffs, rel, rhs)
    return eng


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Exact optimum with certifying basis; deterministic."""
    eng = _engine_from(lp)
    status = eng.solve()
    if status != "optimal":
        return LpSolution(status, None, None, None, engine=eng)
    x = tuple(eng.value(j) for j in range(lp.n_vars))
    return LpSolution(
        status="optimal",
        x=x,
        objective_value=eng.objective_value(),
        basis=eng.basis_labels(),
        engine=eng,
    )


def resolve_with_rows(
    prev: LpSolution,
    lp: LinearProgram,
    new_rows: Sequence[tuple[Mapping[int, Rational], str, Rational]],
) -> LpSolution:
    """Optimum of lp plus new_rows, warm-started from prev when possible.

    Semantically identical to solve_lp on the augmented program.
    """
    eng = prev.engine
    if eng is None or prev.status != "optimal":
        merged = LinearProgram(
            lp.n_vars, lp.objective, lp.rows + tuple(new_rows), lp.free_vars
        )
        return solve_lp(merged)
    for coeffs, rel, rhs in new_rows:
        eng.add_constraint(coeffs, rel, rhs)
    status = eng.solve()
    if status != "optimal":
        return LpSolution(status, None, None, None, engine=eng)
    x = tuple(eng.value(j) for j in range(lp.n_vars))
    return LpSolution("optimal", x, eng.objective_value(), eng.basis_labels(), engine=eng)


def check_solution(lp: LinearProgram, sol: LpSolution) -> None:
    """Substitute-and-check with exact arithmetic; raises on any violation."""
    if sol.status != "optimal":
        raise ValueError("nothing to check for a non-optimal status")
    x = sol.x
    for j, v in enumerate(x):
        if j not in lp.free_vars and v < ZERO:
            raise AssertionError(f"variable {j} negative: {v}")
    for coeffs, rel, rhs in lp.rows:
        lhs = sum((x[j] * c for j, c in coeffs.items()), ZERO)
        if rel == GE and lhs < rhs:
            raise AssertionError(f"row violated: {lhs} < {rhs}")
        if rel == EQ and lhs != rhs:
            raise AssertionError(f"equality violated: {lhs} != {rhs}")
    value = sum((x[j] * c for j, c in enumerate(lp.objective)), ZERO)
    if value != sol.objective_value:
        raise AssertionError("objective mismatch")


def dump_lp(lp: LinearProgram, names: Sequence[str] | None = None) -> str:
    """Human-readable LP text (CPLEX-style) for debugging."""
    if names is None:
        names = [f"v{j}" for j in range(lp.n_vars)]

    def term(c, j, lead):
        sign = "-" if c < ZERO else ("" if lead else "+")
        mag = abs(c)
        coef = "" if mag == ONE else f"{mag} "
        return f"{sign} {coef}{names[j]}".strip()

    lines = ["Minimize", " obj: " + " ".join(
        term(c, j, j == 0) for j, c in enumerate(lp.objective) if c != ZERO
    )]
    lines.append("Subject To")
    for i, (coeffs, rel, rhs) in enumerate(lp.rows):
        body = " ".join(
            term(c, j, k == 0) for k, (j, c) in enumerate(sorted(coeffs.items()))
        )
        op = ">=" if rel == GE else "="
        lines.append(f" c{i}: {body} {op} {rhs}")
    if lp.free_vars:
        lines.append("Bounds")
        for j in sorted(lp.free_vars):
            lines.append(f" {names[j]} free")
    lines.append("End")
    return "\n".join(lines) + "\n"
