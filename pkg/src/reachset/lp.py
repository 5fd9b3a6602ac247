"""Dense two-phase simplex solver with Bland's anti-cycling rule.

Solves small linear programs of the form

    maximize    c @ x
    subject to  A @ x <= b          (x free)

All geometry operations (redundancy removal, support functions, Chebyshev
centering, containment) route through this module, so determinism matters
more than raw speed: Bland's rule makes the pivot sequence reproducible and
cycle-free.  Problem sizes are at most a few hundred constraints.

Long pivot sequences accumulate roundoff in the tableau, so every
termination is verified by refactorizing the claimed basis against the
original data; if the fresh reduced costs disagree with the claim, the
tableau is rebuilt from the basis and the iteration continues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEASIBILITY_TOL = 1e-9
_MAX_PIVOTS = 20_000
_MAX_REFRESH = 40

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpProblem:
    """maximize c @ x subject to A @ x <= b with x free."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 2:
            raise ValueError("constraint matrix must be two-dimensional")
        if c.shape != (A.shape[1],) or b.shape != (A.shape[0],):
            raise ValueError("inconsistent LP dimensions")
        if not (np.isfinite(c).all() and np.isfinite(A).all() and np.isfinite(b).all()):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class LpResult:
    status: str
    x: np.ndarray | None = None
    value: float | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    # re-zero the pivot column exactly to keep later comparisons clean
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0
    basis[row] = col


def _run_simplex(tableau: np.ndarray, basis: np.ndarray, tol: float,
                 artificial_start: int | None = None,
                 twin: np.ndarray | None = None) -> str:
    """Iterate Bland pivots until optimal or unbounded.

    The last tableau row holds reduced costs for a maximization; a positive
    entry means the corresponding variable can still improve the objective.
    With `artificial_start` set (phase 1), iteration stops as soon as no
    artificial variable remains basic: the objective is exactly zero then,
    and any leftover positive reduced cost is roundoff.

    `twin` marks pairs of columns that are exact negatives of each other
    (the xp/xm halves of a split free variable).  While one half is basic
    its twin's true reduced cost is zero, so the twin never enters; allowing
    it in would only chase roundoff and could build a singular basis.
    """
    m = tableau.shape[0] - 1
    stalled = 0
    pure_bland = False
    for _ in range(_MAX_PIVOTS):
        if artificial_start is not None and not np.any(basis >= artificial_start):
            return OPTIMAL
        reduced = tableau[-1, :-1].copy()
        if twin is not None:
            basic_twins = twin[basis]
            reduced[basic_twins[basic_twins >= 0]] = -np.inf
        improving = np.nonzero(reduced > tol)[0]
        if improving.size == 0:
            return OPTIMAL
        col = improving[0]  # Bland: smallest variable index
        column = tableau[:m, col]
        rows = np.nonzero(column > tol)[0]
        if rows.size == 0:
            return UNBOUNDED
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * (1.0 + abs(best))]
        if not pure_bland:
            # prefer well-scaled pivots; on degenerate stalls revert to the
            # pure Bland rule, whose index discipline cannot cycle
            strong = ties[column[ties] >= 1e-7]
            if strong.size:
                ties = strong
            if best <= tol:
                stalled += 1
                if stalled > 60:
                    pure_bland = True
            else:
                stalled = 0
        row = ties[np.argmin(basis[ties])]  # Bland: smallest basic index
        _pivot(tableau, basis, row, col)
    raise RuntimeError("simplex failed to terminate (pivot cap exceeded)")


def _refactor(W: np.ndarray, d: np.ndarray, c: np.ndarray, basis: np.ndarray):
    """Recompute basic solution and reduced costs from the original data."""
    B = W[:, basis]
    try:
        xB = np.linalg.solve(B, d)
        z = np.linalg.solve(B.T, c[basis])
    except np.linalg.LinAlgError:
        xB = np.linalg.lstsq(B, d, rcond=None)[0]
        z = np.linalg.lstsq(B.T, c[basis], rcond=None)[0]
    reduced = c - W.T @ z
    reduced[basis] = 0.0
    return xB, reduced


def _tableau_from_basis(W: np.ndarray, d: np.ndarray, c: np.ndarray,
                        basis: np.ndarray):
    m, n = W.shape
    B = W[:, basis]
    tableau = np.zeros((m + 1, n + 1))
    try:
        tableau[:m, :n] = np.linalg.solve(B, W)
        tableau[:m, -1] = np.linalg.solve(B, d)
        z = np.linalg.solve(B.T, c[basis])
    except np.linalg.LinAlgError:
        tableau[:m, :n] = np.linalg.lstsq(B, W, rcond=None)[0]
        tableau[:m, -1] = np.linalg.lstsq(B, d, rcond=None)[0]
        z = np.linalg.lstsq(B.T, c[basis], rcond=None)[0]
    tableau[-1, :n] = c - W.T @ z
    tableau[-1, basis] = 0.0
    return tableau


def _simplex_verified(W: np.ndarray, d: np.ndarray, c: np.ndarray,
                      basis: np.ndarray, tol: float,
                      artificial_start: int | None = None,
                      twin: np.ndarray | None = None,
                      tableau: np.ndarray | None = None):
    """Run the simplex, refactorizing on termination until the claimed
    status is confirmed against the original data.  Returns (status, basis,
    xB) with xB the refactorized basic values."""
    if tableau is None:
        tableau = _tableau_from_basis(W, d, c, basis)
    for _ in range(_MAX_REFRESH):
        status = _run_simplex(tableau, basis, tol, artificial_start, twin)
        xB, reduced = _refactor(W, d, c, basis)
        if artificial_start is not None and not np.any(basis >= artificial_start):
            return OPTIMAL, basis, xB
        reduced = reduced.copy()
        if twin is not None:
            basic_twins = twin[basis]
            reduced[basic_twins[basic_twins >= 0]] = -np.inf
        improving = np.nonzero(reduced > 10.0 * tol)[0]
        if status == OPTIMAL and improving.size == 0:
            return OPTIMAL, basis, xB
        if status == UNBOUNDED and improving.size:
            col = improving[0]
            try:
                direction = np.linalg.solve(W[:, basis], W[:, col])
            except np.linalg.LinAlgError:
                direction = np.linalg.lstsq(W[:, basis], W[:, col], rcond=None)[0]
            if np.all(direction <= tol):
                return UNBOUNDED, basis, xB
        # claim not confirmed: rebuild the tableau from the basis and retry
        tableau = _tableau_from_basis(W, d, c, basis)
        tableau[:len(xB), -1] = np.maximum(tableau[:len(xB), -1], 0.0)
    raise RuntimeError("simplex failed to confirm a termination status")


def _solve_canonical(W: np.ndarray, d: np.ndarray, c: np.ndarray, tol: float,
                     twin: np.ndarray | None = None):
    """maximize c @ y subject to W y = d, y >= 0, with d >= 0.

    Two phases with a full artificial basis.  Returns (status, y, value).
    """
    m, n = W.shape
    if m == 0:
        if np.any(c > tol):
            return UNBOUNDED, None, None
        return OPTIMAL, np.zeros(n), 0.0

    # Phase 1: maximize -sum(artificials) starting from the artificial basis.
    W1 = np.hstack([W, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), -np.ones(m)])
    twin1 = None
    if twin is not None:
        twin1 = np.concatenate([twin, -np.ones(m, dtype=int)])
    basis = np.arange(n, n + m)
    # the artificial basis is the identity: write its tableau down directly
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n + m] = W1
    tableau[:m, -1] = d
    tableau[-1, :n] = W.sum(axis=0)
    tableau[-1, -1] = d.sum()
    status, basis, xB = _simplex_verified(W1, d, c1, basis, tol,
                                          artificial_start=n, twin=twin1,
                                          tableau=tableau)
    residual = xB[basis >= n].sum() if np.any(basis >= n) else 0.0
    if status != OPTIMAL or residual > tol * (1.0 + d.sum()):
        return INFEASIBLE, None, None

    # Drive any degenerate artificials out of the basis; rows they cannot
    # leave are redundant and get dropped.
    if np.any(basis >= n):
        tableau = _tableau_from_basis(W1, d, c1, basis)
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n:
                nonzero = np.nonzero(np.abs(tableau[i, :n]) > 1e-7)[0]
                if nonzero.size:
                    _pivot(tableau, basis, i, nonzero[0])
                else:
                    keep[i] = False
        if not keep.all():
            W, d = W[keep], d[keep]
            basis = basis[keep]
            m = int(keep.sum())
        if np.any(basis >= n):  # still stuck: give up on those rows
            return INFEASIBLE, None, None

    # Phase 2: original objective over the original columns.
    status, basis, xB = _simplex_verified(W, d, c, basis, tol, twin=twin)
    if status != OPTIMAL:
        return status, None, None
    y = np.zeros(n)
    y[basis] = np.maximum(xB, 0.0)
    return OPTIMAL, y, float(c @ y)


def lp_solve(problem: LpProblem, tol: float = FEASIBILITY_TOL) -> LpResult:
    """Solve an inequality-form LP with free variables.

    Free variables are split as x = xp - xm and each row gets a slack, after
    which the canonical two-phase simplex runs.  Status is one of "optimal",
    "infeasible" or "unbounded"; the latter two are ordinary returns.
    """
    c, A, b = problem.c, problem.A, problem.b
    m, n = A.shape

    flip = b < 0.0
    sign = np.where(flip, -1.0, 1.0)[:, None]
    W = np.hstack([A * sign, -A * sign, np.diag(np.where(flip, -1.0, 1.0))])
    d = np.abs(b)
    c_ext = np.concatenate([c, -c, np.zeros(m)])
    twin = np.concatenate([np.arange(n, 2 * n), np.arange(n),
                           -np.ones(m, dtype=int)])

    status, y, _ = _solve_canonical(W, d, c_ext, tol, twin=twin)
    if status != OPTIMAL:
        return LpResult(status)
    x = y[:n] - y[n:2 * n]
    return LpResult(OPTIMAL, x=x, value=float(c @ x))


def feasible_combination(columns: np.ndarray, target: np.ndarray,
                         tol: float = FEASIBILITY_TOL) -> np.ndarray | None:
    """Find y >= 0 with columns @ y = target, or None if none exists.

    Used for convex-combination membership tests: stacking a row of ones
    under the point coordinates asks whether `target` is a convex
    combination of the columns.
    """
    W = np.asarray(columns, dtype=float)
    d = np.asarray(target, dtype=float)
    flip = d < 0.0
    Wf = np.where(flip[:, None], -W, W)
    status, y, _ = _solve_canonical(Wf, np.abs(d), np.zeros(W.shape[1]), tol)
    return y if status == OPTIMAL else None
