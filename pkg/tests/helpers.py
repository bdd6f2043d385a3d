"""Independent oracles used by the tests.

Everything here deliberately avoids the package's own solvers: conjugates
are recomputed by grid maximization with golden-section refinement, and
linear programs are re-solved with scipy's HiGHS backend.  Agreement
between these routes and the package is what the tests certify.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from superhedge import (exponential_utility, gains_space,
                        glued_unbounded_utility, log_utility, power_utility,
                        slow_loss_utility)

_PHI = (np.sqrt(5.0) - 1.0) / 2.0
_E = float(np.e)


def conjugate_oracle_setup(kind):
    """Utility, payoff function g(x, y) = u(x) - x y, and an x grid.

    The grids cover each family's own maximizer range so the coarse
    argmax lands near the true one before golden-section refinement.
    The slow_loss payoff is regrouped algebraically so huge losses
    never evaluate as inf - inf.
    """
    if kind == "exponential":
        u = exponential_utility()
        grid = np.sinh(np.linspace(-12.0, 12.0, 6001))
    elif kind == "log":
        u = log_utility()
        grid = np.geomspace(1e-7, 1e7, 6001)
    elif kind == "power":
        u = power_utility()
        grid = np.geomspace(1e-10, 1e10, 6001)
    elif kind == "glued_unbounded":
        u = glued_unbounded_utility()
        grid = np.unique(np.concatenate([
            np.sinh(np.linspace(-12.0, 12.0, 3001)),
            np.geomspace(1.0, 1e10, 3001),
        ]))
    else:
        u = slow_loss_utility()
        grid = np.unique(np.concatenate([
            -np.geomspace(_E, 1.7e308, 4001),
            np.linspace(-_E, 25.0, 2001),
        ]))
    if kind == "slow_loss":
        def g(x, y):
            mag = np.maximum(np.abs(x), 1e-300)
            lo = mag * (y - np.log(mag))
            hi = (2.0 - _E) - 2.0 * np.exp(-(x + _E)) - x * y
            return np.where(x <= -_E, lo, hi)
    else:
        def g(x, y):
            return u.u(x) - x * y
    return u, g, grid


def legendre_oracle(g_fn, ys, x_grid, iters=140):
    """sup_x g(x, y) per y: coarse argmax on x_grid, then golden section.

    g_fn must accept (x_array, y_array) broadcasting elementwise and is
    expected to be concave in x for each fixed y.
    """
    ys = np.asarray(ys, dtype=float).reshape(-1)
    x_grid = np.asarray(x_grid, dtype=float)
    with np.errstate(all="ignore"):
        table = g_fn(x_grid[None, :], ys[:, None])
    table = np.where(np.isnan(table), -np.inf, table)
    k = np.argmax(table, axis=1)
    lo = x_grid[np.maximum(k - 1, 0)]
    hi = x_grid[np.minimum(k + 1, x_grid.size - 1)]
    a, b = lo.copy(), hi.copy()
    with np.errstate(all="ignore"):
        for _ in range(iters):
            c = b - _PHI * (b - a)
            d = a + _PHI * (b - a)
            gc = g_fn(c, ys)
            gd = g_fn(d, ys)
            gc = np.where(np.isnan(gc), -np.inf, gc)
            gd = np.where(np.isnan(gd), -np.inf, gd)
            right = gc < gd
            a = np.where(right, c, a)
            b = np.where(right, b, d)
        xm = 0.5 * (a + b)
        out = g_fn(xm, ys)
        # the refined value can only improve on the coarse table
        best = np.max(table, axis=1)
        out = np.where(np.isnan(out), -np.inf, out)
    return np.maximum(out, best)


def scipy_primal_price(m, payoff):
    """Cheapest dominating capital via scipy HiGHS, primal route only."""
    payoff = np.asarray(payoff, dtype=float).reshape(-1)
    gens = gains_space(m).generators
    n = payoff.size
    a_ub = -np.column_stack([np.ones(n), gens.T])
    c = np.zeros(1 + gens.shape[0])
    c[0] = 1.0
    res = linprog(c, A_ub=a_ub, b_ub=-payoff,
                  bounds=[(None, None)] * c.size, method="highs")
    if res.status != 0:
        return None
    return float(res.fun)


def scipy_polytope_max(m, payoff):
    """sup of E_Q[payoff] over separating measures via scipy HiGHS."""
    payoff = np.asarray(payoff, dtype=float).reshape(-1)
    gens = gains_space(m).generators
    n = payoff.size
    a_eq = np.vstack([np.ones((1, n)), gens])
    b_eq = np.zeros(a_eq.shape[0])
    b_eq[0] = 1.0
    res = linprog(-payoff, A_eq=a_eq, b_eq=b_eq,
                  bounds=[(0.0, None)] * n, method="highs")
    if res.status != 0:
        return None
    return float(-res.fun)


def scipy_lp_min(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, free=None):
    """Reference solution of the package's standard LP shape via HiGHS."""
    c = np.asarray(c, dtype=float)
    n = c.size
    if free is None:
        bounds = [(0.0, None)] * n
    else:
        fr = np.asarray(free, dtype=bool)
        bounds = [((None, None) if fr[j] else (0.0, None)) for j in range(n)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    return res
