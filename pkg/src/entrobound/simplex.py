"""Exact two-phase simplex over rationals.

Solves  min c.x  subject to  a.x >= b / a.x == b  rows and x >= 0.  Returns
exact primal values, row duals, and reduced costs; the weak-duality identity
c = A^T y + reduced_costs is asserted before returning, so a reported optimum
is always certifiable.

Pivoting is Dantzig's rule with the lexicographic ratio test, so runs are
reproducible and cycle-free even on heavily degenerate instances.  Surplus columns
serve as the starting basis wherever the right-hand side allows; artificials
are added only for equality rows and positive-rhs inequalities.

Uses gmpy2.mpq internally when available (same semantics as Fraction,
several times faster); all public values are fractions.Fraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is an optional speedup
    _Q = Fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
STALLED = "stalled"  # pivot budget exhausted before reaching an optimum

# rows are (coefficients by column, right-hand side, is_equality)
Row = tuple[Mapping[int, Fraction], Fraction, bool]


@dataclass
class LPSolution:
    status: str
    value: Fraction | None
    x: list[Fraction]
    duals: list[Fraction]
    reduced_costs: list[Fraction]


def _to_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    return Fraction(int(q.numerator), int(q.denominator))


class _Tableau:
    def __init__(self, objective: Sequence[Fraction], rows: Sequence[Row],
                 max_pivots: int | None = None):
        self.pivots_left = max_pivots
        zero, one = _Q(0), _Q(1)
        self.zero, self.one = zero, one
        self.nvar = len(objective)
        self.m = len(rows)
        self.c = [_Q(Fraction(v)) for v in objective]

        self.surplus_col: dict[int, int] = {}
        col = self.nvar
        for k, (_, _, is_eq) in enumerate(rows):
            if not is_eq:
                self.surplus_col[k] = col
                col += 1
        self.art_col: dict[int, int] = {}
        self.flip = [one] * self.m
        needs_art = []
        for k, (_, b, is_eq) in enumerate(rows):
            b = Fraction(b)
            if is_eq or b > 0:
                needs_art.append(k)
        for k in needs_art:
            self.art_col[k] = col
            col += 1
        self.ncols = col
        self.art_set = frozenset(self.art_col.values())

        self.rows: list[list] = []
        self.rhs: list = []
        self.basis: list[int] = []
        for k, (coeffs, b, is_eq) in enumerate(rows):
            row = [zero] * self.ncols
            for j, v in coeffs.items():
                row[j] = _Q(Fraction(v))
            b = _Q(Fraction(b))
            if not is_eq:
                row[self.surplus_col[k]] = -one
            if is_eq:
                if b < 0:
                    row = [-v for v in row]
                    b = -b
                    self.flip[k] = -one
                row[self.art_col[k]] = one
                self.basis.append(self.art_col[k])
            elif b > 0:
                row[self.art_col[k]] = one
                self.basis.append(self.art_col[k])
            else:
                # flip so the surplus column starts basic at -b >= 0
                row = [-v for v in row]
                b = -b
                self.flip[k] = -one
                self.basis.append(self.surplus_col[k])
            self.rows.append(row)
            self.rhs.append(b)

    def _pivot(self, r: int, j: int, cost: list) -> None:
        rows, rhs = self.rows, self.rhs
        zero = self.zero
        piv = rows[r][j]
        if piv != self.one:
            inv = self.one / piv
            rows[r] = [v * inv for v in rows[r]]
            rhs[r] *= inv
        prow = rows[r]
        nz = [j2 for j2, v in enumerate(prow) if v]
        prhs = rhs[r]
        for i in range(self.m):
            if i == r:
                continue
            f = rows[i][j]
            if f:
                target = rows[i]
                for j2 in nz:
                    target[j2] -= f * prow[j2]
                rhs[i] -= f * prhs
        f = cost[j]
        if f:
            for j2 in nz:
                cost[j2] -= f * prow[j2]
        self.basis[r] = j

    def _lex_less(self, i: int, ai, k: int, ak) -> bool:
        # lexicographic comparison of rows i and k scaled by their pivot
        # entries; rows are linearly independent so a difference exists
        ri, rk = self.rows[i], self.rows[k]
        for j in range(self.ncols):
            d = ri[j] * ak - rk[j] * ai
            if d:
                return d < self.zero
        return False

    def _run(self, cost: list, allow_art: bool) -> str:
        zero = self.zero
        # Dantzig entering rule with the lexicographic ratio test: cycle-free
        # and fast off degenerate plateaus.
        while True:
            enter, best = -1, zero
            for j in range(self.ncols):
                v = cost[j]
                if v < best and (allow_art or j not in self.art_set):
                    best, enter = v, j
            if enter < 0:
                return OPTIMAL
            leave, ratio, apiv = -1, None, None
            for i in range(self.m):
                a = self.rows[i][enter]
                if a > zero:
                    r = self.rhs[i] / a
                    if ratio is None or r < ratio:
                        leave, ratio, apiv = i, r, a
                    elif r == ratio and self._lex_less(i, a, leave, apiv):
                        leave, apiv = i, a
            if leave < 0:
                return UNBOUNDED
            if self.pivots_left is not None:
                if self.pivots_left <= 0:
                    return STALLED
                self.pivots_left -= 1
            self._pivot(leave, enter, cost)

    def solve(self) -> LPSolution:
        zero = self.zero
        # Phase 1: minimize the sum of artificials (skipped when none start
        # basic, i.e. the all-slack basis is already feasible).
        if self.art_col:
            cost = [zero] * self.ncols
            for i in range(self.m):
                if self.basis[i] in self.art_set:
                    row = self.rows[i]
                    for j, v in enumerate(row):
                        if v:
                            cost[j] -= v
            for j in self.art_set:
                cost[j] = zero
            status = self._run(cost, allow_art=True)
            if status == STALLED:
                return LPSolution(STALLED, None, [], [], [])
            assert status == OPTIMAL, "phase 1 cannot be unbounded"
            infeas = sum((self.rhs[i] for i in range(self.m)
                          if self.basis[i] in self.art_set), zero)
            if infeas != zero:
                return LPSolution(INFEASIBLE, None, [], [], [])
            for i in range(self.m):
                if self.basis[i] in self.art_set:
                    row = self.rows[i]
                    for j in range(self.ncols):
                        if j not in self.art_set and row[j] != zero:
                            dummy = [zero] * self.ncols
                            self._pivot(i, j, dummy)
                            break
        # Phase 2.
        cost = list(self.c) + [zero] * (self.ncols - self.nvar)
        for i in range(self.m):
            f = cost[self.basis[i]]
            if f:
                row = self.rows[i]
                for j, v in enumerate(row):
                    if v:
                        cost[j] -= f * v
        status = self._run(cost, allow_art=False)
        if status == UNBOUNDED:
            return LPSolution(UNBOUNDED, None, [], [], [])
        if status == STALLED:
            return LPSolution(STALLED, None, [], [], [])
        x = [zero] * self.nvar
        for i in range(self.m):
            if self.basis[i] < self.nvar:
                x[self.basis[i]] = self.rhs[i]
        value = sum((cj * xj for cj, xj in zip(self.c, x) if xj), zero)
        duals = [zero] * self.m
        for k in range(self.m):
            # duals read off reduced costs: for an inequality row the surplus
            # reduced cost equals the original-row dual under either flip; an
            # equality row's dual comes from its artificial column.
            if k in self.surplus_col:
                duals[k] = cost[self.surplus_col[k]]
            else:
                duals[k] = -cost[self.art_col[k]] * self.flip[k]
        reduced = cost[: self.nvar]
        return LPSolution(OPTIMAL, _to_fraction(value),
                          [_to_fraction(v) for v in x],
                          [_to_fraction(v) for v in duals],
                          [_to_fraction(v) for v in reduced])


def solve_lp(objective: Sequence[Fraction], rows: Sequence[Row],
             max_pivots: int | None = None) -> LPSolution:
    """Solve min c.x over the given rows with x >= 0, exactly.

    When the row count dwarfs the variable count and the objective is
    componentwise nonnegative, the dual program is solved instead: it has one
    row per variable and its all-surplus basis is immediately feasible, which
    skips phase 1 and keeps the tableau small.

    `max_pivots` caps the total pivot count (a deterministic work budget);
    when it is exhausted the returned status is `stalled` and no values are
    reported.
    """
    nvar = len(objective)
    if len(rows) > 2 * nvar and all(Fraction(v) >= 0 for v in objective):
        return _solve_via_dual(objective, rows, max_pivots)
    sol = _Tableau(objective, rows, max_pivots).solve()
    if sol.status != OPTIMAL:
        return sol
    _check_optimality(objective, rows, sol)
    return sol


def _solve_via_dual(objective: Sequence[Fraction], rows: Sequence[Row],
                    max_pivots: int | None = None) -> LPSolution:
    # Dual of  min c.x : Ax >= b (duals y >= 0), Ex = d (duals z free), x >= 0
    # is      max b.y + d.z : A^T y + E^T z <= c.
    # Encoded below as a minimization with z split into z+ - z- and the <=
    # rows negated, so every dual row has nonpositive rhs (-c) and the
    # tableau starts from its surplus basis.
    nvar = len(objective)
    cols: list[tuple[int, int]] = []  # (row index, sign) per dual variable
    dual_obj: list[Fraction] = []
    for k, (_, b, is_eq) in enumerate(rows):
        b = Fraction(b)
        cols.append((k, 1))
        dual_obj.append(-b)
        if is_eq:
            cols.append((k, -1))
            dual_obj.append(b)
    by_var: list[dict[int, Fraction]] = [{} for _ in range(nvar)]
    for t, (k, sign) in enumerate(cols):
        for j, v in rows[k][0].items():
            v = Fraction(v)
            if v:
                by_var[j][t] = by_var[j].get(t, Fraction(0)) - sign * v
    dual_rows: list[Row] = [
        (by_var[j], -Fraction(objective[j]), False) for j in range(nvar)
    ]
    sol = _Tableau(dual_obj, dual_rows, max_pivots).solve()
    if sol.status == UNBOUNDED:
        return LPSolution(INFEASIBLE, None, [], [], [])
    if sol.status == STALLED:
        return LPSolution(STALLED, None, [], [], [])
    assert sol.status == OPTIMAL, "dual LP is feasible whenever c >= 0"
    duals = [Fraction(0)] * len(rows)
    for t, (k, sign) in enumerate(cols):
        duals[k] += sign * sol.x[t]
    x = list(sol.duals)  # duals of the dual rows recover the primal point
    reduced = []
    for j in range(nvar):
        rc = Fraction(objective[j])
        for t, v in by_var[j].items():
            if sol.x[t]:
                rc += v * sol.x[t]  # by_var holds -sign*A, so += undoes it
        reduced.append(rc)
    out = LPSolution(OPTIMAL, -sol.value, x, duals, reduced)
    _check_optimality(objective, rows, out)
    return out


def _check_optimality(objective, rows, sol: LPSolution) -> None:
    # Exact weak-duality identity; a failure here is an implementation bug.
    nvar = len(objective)
    lhs = list(sol.reduced_costs)
    for (coeffs, _, _), y in zip(rows, sol.duals):
        if y:
            for j, v in coeffs.items():
                lhs[j] += y * Fraction(v)
    for j in range(nvar):
        if lhs[j] != Fraction(objective[j]):
            raise AssertionError("dual identity violated (simplex bug)")
        if sol.reduced_costs[j] < 0:
            raise AssertionError("negative reduced cost at optimum (simplex bug)")
    dual_value = sum((y * Fraction(b) for (_, b, _), y in zip(rows, sol.duals)),
                     Fraction(0))
    if dual_value != sol.value:
        raise AssertionError("dual objective mismatch (simplex bug)")
    for (coeffs, b, is_eq), y in zip(rows, sol.duals):
        if not is_eq and y < 0:
            raise AssertionError("negative dual on inequality row (simplex bug)")
