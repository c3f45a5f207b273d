"""Independent oracles used by the unit and acceptance tests.

The LP oracle enumerates basic solutions directly (choose basic columns,
pin every nonbasic variable at one of its bounds, solve the square system)
and therefore shares no code path with the simplex implementation.
"""

from __future__ import annotations

import itertools

import numpy as np

FEAS_TOL = 1e-8


def enumerate_lp_optimum(c, A_eq, b_eq, lower, upper):
    """Brute-force optimum of min c.x s.t. A_eq x = b_eq, lower <= x <= upper
    with all bounds finite.  Returns (status, objective).

    The feasible region is a bounded polytope, so if it is nonempty some
    vertex is optimal, and every vertex arises from a choice of p basic
    columns plus a bound assignment of the rest.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A_eq, dtype=float))
    b = np.asarray(b_eq, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    p, n = A.shape if A.size else (0, c.size)
    best = None
    if p == 0:
        x = np.where(c >= 0, lower, upper)
        return "optimal", float(c @ x)
    for basic in itertools.combinations(range(n), p):
        basic = list(basic)
        B = A[:, basic]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        nonbasic = [j for j in range(n) if j not in basic]
        for corner in itertools.product((0, 1), repeat=len(nonbasic)):
            x = np.empty(n)
            for j, side in zip(nonbasic, corner):
                x[j] = upper[j] if side else lower[j]
            rhs = b - A[:, nonbasic] @ x[nonbasic] if nonbasic else b
            x[basic] = np.linalg.solve(B, rhs)
            if np.any(x < lower - FEAS_TOL) or np.any(x > upper + FEAS_TOL):
                continue
            val = float(c @ x)
            if best is None or val < best:
                best = val
    if best is None:
        return "infeasible", np.nan
    return "optimal", best


def random_bounded_lp(rng, max_n=8, max_p=4):
    """A random small LP with finite bounds; equality rows built so that
    roughly half the instances are feasible."""
    n = int(rng.integers(1, max_n + 1))
    p = int(rng.integers(0, min(max_p, n) + 1))
    c = rng.standard_normal(n)
    lower = rng.uniform(-2, 0, n)
    upper = lower + rng.uniform(0, 3, n)
    A = rng.standard_normal((p, n)) if p else np.zeros((0, n))
    if p and rng.random() < 0.7:
        # right-hand side from an interior point: certainly feasible
        x0 = rng.uniform(lower, upper)
        b = A @ x0
    else:
        b = rng.standard_normal(p)
    return c, A, b, lower, upper
