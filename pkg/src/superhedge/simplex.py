"""Dense two-phase simplex for the small LPs in this package.

Minimizes c.x subject to A_ub x <= b_ub, A_eq x = b_eq, with a per-variable
free/nonnegative flag.  Free variables are split internally.  Pivoting uses
the largest-coefficient rule and falls back to Bland's rule after an
iteration budget, which makes the method cycling-proof.  Problem sizes here
are tens of variables, so a dense tableau is plenty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
OPT_TOL = 1e-9


@dataclass
class LPResult:
    status: str                 # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _iterate(T, basis, cost, allowed, max_iter):
    """Run simplex steps on tableau T for the given cost row.

    cost is the reduced-cost row (modified in place), allowed masks columns
    permitted to enter.  Returns "optimal" or "unbounded".
    """
    m = T.shape[0]
    bland_after = max_iter // 2
    for it in range(max_iter):
        red = np.where(allowed, cost[:-1], np.inf)
        if it < bland_after:
            col = int(np.argmin(red))
            if red[col] >= -OPT_TOL:
                return "optimal"
        else:
            negs = np.flatnonzero(red < -OPT_TOL)
            if negs.size == 0:
                return "optimal"
            col = int(negs[0])
        ratios = np.full(m, np.inf)
        pos = T[:, col] > FEAS_TOL
        ratios[pos] = T[pos, -1] / T[pos, col]
        row = int(np.argmin(ratios))
        if not np.isfinite(ratios[row]):
            return "unbounded"
        # deterministic tie-break: smallest basis index among minimal ratios
        ties = np.flatnonzero(np.abs(ratios - ratios[row]) <= FEAS_TOL)
        if ties.size > 1:
            row = int(ties[np.argmin(np.asarray(basis)[ties])])
        _pivot(T, basis, row, col)
        cost -= cost[col] * T[row]
    raise RuntimeError("simplex iteration budget exhausted")


def linprog_min(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None,
                free=None) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    free = np.zeros(n, dtype=bool) if free is None else np.asarray(free, bool)

    rows = []
    rhs = []
    n_ub = 0
    if A_ub is not None and len(A_ub):
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        rows.append(A_ub)
        rhs.append(np.asarray(b_ub, dtype=float))
        n_ub = A_ub.shape[0]
    if A_eq is not None and len(A_eq):
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        rows.append(A_eq)
        rhs.append(np.asarray(b_eq, dtype=float))
    if not rows:
        if np.any(c[free] != 0) or np.any(c[~free] < -OPT_TOL):
            return LPResult("unbounded", None, None)
        return LPResult("optimal", np.zeros(n), 0.0)
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    m = A.shape[0]

    # split free variables, append slacks for the inequality block
    n_split = int(free.sum())
    split_idx = np.flatnonzero(free)
    A_std = np.hstack([A, -A[:, split_idx],
                       np.vstack([np.eye(n_ub),
                                  np.zeros((m - n_ub, n_ub))])])
    c_std = np.concatenate([c, -c[split_idx], np.zeros(n_ub)])
    n_std = A_std.shape[1]

    flip = b < 0
    A_std[flip] *= -1.0
    b = np.abs(b)

    # starting basis: slack columns where usable, artificials elsewhere
    basis = [-1] * m
    for i in range(n_ub):
        if not flip[i]:
            basis[i] = n + n_split + i
    art_cols = []
    art_of_row = {}
    for i in range(m):
        if basis[i] == -1:
            art_of_row[i] = n_std + len(art_cols)
            art_cols.append(i)
            basis[i] = art_of_row[i]
    n_art = len(art_cols)

    T = np.zeros((m, n_std + n_art + 1))
    T[:, :n_std] = A_std
    for i in art_cols:
        T[i, art_of_row[i]] = 1.0
    T[:, -1] = b

    max_iter = 200 * (m + n_std + n_art) + 500

    if n_art:
        cost1 = np.zeros(n_std + n_art + 1)
        cost1[n_std:n_std + n_art] = 1.0
        for i in art_cols:
            cost1 -= T[i]
        allowed = np.ones(n_std + n_art, dtype=bool)
        status = _iterate(T, basis, cost1, allowed, max_iter)
        if status != "optimal" or -cost1[-1] > FEAS_TOL * max(1.0, abs(b).max()):
            return LPResult("infeasible", None, None)
        # drive leftover artificials out of the basis
        for i in range(m):
            if basis[i] >= n_std:
                cand = np.flatnonzero(np.abs(T[i, :n_std]) > FEAS_TOL)
                if cand.size:
                    _pivot(T, basis, i, int(cand[0]))

    cost2 = np.zeros(n_std + n_art + 1)
    cost2[:n_std] = c_std
    for i in range(m):
        if basis[i] < n_std and cost2[basis[i]] != 0.0:
            cost2 -= cost2[basis[i]] * T[i]
    allowed = np.zeros(n_std + n_art, dtype=bool)
    allowed[:n_std] = True
    status = _iterate(T, basis, cost2, allowed, max_iter)
    if status == "unbounded":
        return LPResult("unbounded", None, None)

    x_std = np.zeros(n_std + n_art)
    for i in range(m):
        x_std[basis[i]] = T[i, -1]
    x = x_std[:n]
    x[split_idx] -= x_std[n:n + n_split]
    return LPResult("optimal", x, float(c @ x))


def l1_residual(A, b, free=None) -> tuple[float, np.ndarray]:
    """Smallest L1 violation of A x = b over the given sign pattern.

    Minimizes sum |A x - b| by splitting the residual into two nonnegative
    slack blocks.  Returns (residual, x).  Zero residual means the system
    is solvable with the requested variable signs.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    free = np.zeros(n, dtype=bool) if free is None else np.asarray(free, bool)
    A_full = np.hstack([A, np.eye(m), -np.eye(m)])
    c = np.concatenate([np.zeros(n), np.ones(2 * m)])
    free_full = np.concatenate([free, np.zeros(2 * m, dtype=bool)])
    res = linprog_min(c, A_eq=A_full, b_eq=b, free=free_full)
    if res.status != "optimal":
        return np.inf, np.zeros(n)
    return max(res.objective, 0.0), res.x[:n]
