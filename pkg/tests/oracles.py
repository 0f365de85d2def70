"""Independent reference computations used by the test suite.

Nothing here shares code paths with the trained solver beyond the kernel
matrix it is handed: the dual maximum is recovered by KKT active-set
enumeration (exact for a convex QP), cross-checked by a generic SQP solver
and, for the smallest problems, a literal grid search.
"""

import itertools

import numpy as np
from scipy.optimize import minimize


def dual_objective(K, y, alpha):
    """W(a) = sum a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij."""
    coef = alpha * y
    return float(alpha.sum() - 0.5 * coef @ K @ coef)


def max_dual_active_set(K, y, c, tol=1e-7):
    """Exact maximum of the soft-margin dual by enumerating KKT patterns.

    Every multiplier is either 0, at C, or interior; for each of the 3^n
    patterns the stationarity system (interior margins equal 1, multipliers
    balanced across classes) is solved and checked for feasibility and
    complementarity. Any pattern that validates is a KKT point and hence,
    by convexity, the global maximum. Returns the best objective found, or
    None when no pattern validates numerically.
    """
    n = len(y)
    y = np.asarray(y, dtype=np.float64)
    best = None
    for pattern in itertools.product((0, 1, 2), repeat=n):
        pat = np.array(pattern)
        interior = np.nonzero(pat == 1)[0]
        alpha = np.where(pat == 2, c, 0.0)
        s = interior.size
        if s > 0:
            # unknowns: alpha over the interior set, then b
            A = np.zeros((s + 1, s + 1))
            rhs = np.zeros(s + 1)
            for row, i in enumerate(interior):
                A[row, :s] = y[interior] * K[i, interior]
                A[row, s] = 1.0
                rhs[row] = y[i] - (alpha * y) @ K[:, i]
            A[s, :s] = y[interior]
            rhs[s] = -(alpha @ y)
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if not np.all(np.isfinite(sol)) or np.abs(A @ sol - rhs).max() > tol:
                continue
            a_int, b = sol[:s], sol[s]
            if np.any(a_int < -tol) or np.any(a_int > c + tol):
                continue
            alpha = alpha.copy()
            alpha[interior] = np.clip(a_int, 0.0, c)
        else:
            if abs(alpha @ y) > tol:
                continue
            b = None
        g = (alpha * y) @ K
        if b is None:
            # bias only constrained by the bound points; need a feasible value
            pos = y > 0
            at_zero, at_c = pat == 0, pat == 2
            lower = np.concatenate([1.0 - g[at_zero & pos], -1.0 - g[at_c & ~pos]])
            upper = np.concatenate([-1.0 - g[at_zero & ~pos], 1.0 - g[at_c & pos]])
            b_lo = lower.max() if lower.size else -np.inf
            b_hi = upper.min() if upper.size else np.inf
            if b_lo > b_hi + tol:
                continue
            b = np.clip(0.0, b_lo, b_hi)
        margins = y * (g + b)
        if np.any(margins[pat == 0] < 1.0 - tol):
            continue
        if np.any(margins[pat == 2] > 1.0 + tol):
            continue
        if np.any(np.abs(margins[pat == 1] - 1.0) > tol):
            continue
        w = dual_objective(K, y, alpha)
        if best is None or w > best:
            best = w
    return best


def max_dual_slsqp(K, y, c, tries=8, seed=0):
    """Best dual objective found by a generic constrained optimizer from
    multiple starts; feasibility is verified before a value is accepted."""
    n = len(y)
    y = np.asarray(y, dtype=np.float64)
    Q = (y[:, None] * y[None, :]) * K
    Q = 0.5 * (Q + Q.T)

    def neg(a):
        return -(a.sum() - 0.5 * a @ Q @ a)

    def neg_jac(a):
        return -(1.0 - Q @ a)

    constraints = [{"type": "eq", "fun": lambda a: a @ y, "jac": lambda a: y}]
    rng = np.random.default_rng(seed)
    starts = [np.zeros(n)] + [rng.uniform(0.0, c, n) for _ in range(tries)]
    best = -np.inf
    for start in starts:
        res = minimize(neg, start, jac=neg_jac, method="SLSQP",
                       bounds=[(0.0, c)] * n, constraints=constraints,
                       options={"maxiter": 500, "ftol": 1e-14})
        a = np.clip(res.x, 0.0, c)
        if abs(a @ y) < 1e-8:
            best = max(best, dual_objective(K, y, a))
    return best


def max_dual_grid(K, y, c, steps=200):
    """Literal grid search: the first n-1 multipliers walk a [0, C] grid with
    step C/steps and the last is fixed by the balance constraint. Only
    feasible for n <= 3."""
    n = len(y)
    y = np.asarray(y, dtype=np.float64)
    if n > 3:
        raise ValueError("grid oracle is limited to 3 points")
    axis = np.linspace(0.0, c, steps + 1)
    grids = np.meshgrid(*([axis] * (n - 1)), indexing="ij")
    free = np.stack([grid.ravel() for grid in grids], axis=1)
    a_last = -y[-1] * (free @ y[:-1])
    keep = (a_last >= 0.0) & (a_last <= c)
    alphas = np.concatenate([free[keep], a_last[keep, None]], axis=1)
    coef = alphas * y
    w = alphas.sum(axis=1) - 0.5 * np.einsum("bi,ij,bj->b", coef, K, coef)
    return float(w.max())


def reference_dual_max(K, y, c, seed=0):
    """Best dual objective across all independent routes."""
    candidates = [max_dual_slsqp(K, y, c, seed=seed)]
    exact = max_dual_active_set(K, y, c)
    if exact is not None:
        candidates.append(exact)
    if len(y) <= 3:
        candidates.append(max_dual_grid(K, y, c))
    return max(candidates)


def quadratic_feature_map(x, coef0):
    """Explicit degree-2 map phi with phi(x).phi(z) = (x.z + coef0)^2: all
    ordered coordinate products, then sqrt(2*coef0)*x, then coef0."""
    x = np.asarray(x, dtype=np.float64)
    products = np.outer(x, x).ravel()
    return np.concatenate([products, np.sqrt(2.0 * coef0) * x, [coef0]])


def dirichlet_phase(delta_bins, n):
    """Phase of sum_{k=0}^{n-1} exp(j*2*pi*delta*k/n): the spectral-leakage
    phase of a tone offset by delta_bins from a DFT bin."""
    total = np.exp(1j * 2.0 * np.pi * delta_bins * np.arange(n) / n).sum()
    return float(np.angle(total))
