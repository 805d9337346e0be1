"""Independent reference implementations the library is checked against.

They are deliberately naive: plain Python loops, sort-and-index statistics
and a general-purpose convex solver.
"""
from __future__ import annotations

import math

import numpy as np


def knn_predict(train_x, train_y, queries, k):
    """Brute-force kNN: rank every row by (squared distance, row index), average the first k."""
    train_x, train_y = np.asarray(train_x).tolist(), np.asarray(train_y).tolist()
    out = []
    for q in np.asarray(queries).tolist():
        ranked = []
        for i, row in enumerate(train_x):
            d = 0.0
            for a, b in zip(q, row):
                t = a - b
                d += t * t
            ranked.append((d, i))
        ranked.sort()
        acc = list(train_y[ranked[0][1]])
        for _, i in ranked[1:k]:
            acc = [s + v for s, v in zip(acc, train_y[i])]
        out.append([s / k for s in acc])
    return np.array(out)


def summary(values_pct, nonphysical=None):
    """Sort-and-count statistics over per-point mean errors in percent.

    ``values_pct`` holds one finite value per point; ``nonphysical`` marks
    points whose value should be treated as infinite.
    """
    flags = list(nonphysical) if nonphysical is not None else [False] * len(values_pct)
    vals = [math.inf if f else float(v) for v, f in zip(values_pct, flags)]
    n = len(vals)
    ordered = sorted(vals)
    finite = [v for v in vals if math.isfinite(v)]
    mean = math.fsum(finite) / len(finite) if finite else math.inf
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in finite) / len(finite)) if finite else math.inf
    return {
        "mean": mean, "std": std,
        "p75": ordered[_rank(75, n) - 1],
        "p90": ordered[_rank(90, n) - 1],
        "pct_below_2": 100.0 * len([v for v in vals if v < 2]) / n,
        "pct_below_5": 100.0 * len([v for v in vals if v < 5]) / n,
        "pct_outlier_above_20": 100.0 * len([v for v in vals if v > 20]) / n,
        "n": n, "n_nonphysical": sum(flags),
    }


def _rank(pct, n):
    # smallest rank r whose share r/n of the sample reaches pct percent
    r = 1
    while 100 * r < pct * n:
        r += 1
    return r


def rbf(a, b, gamma):
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-gamma * d2)


def svr_primal_reference(x, y, C, epsilon, gamma):
    """Optimal value of 1/2 c'Kc + C sum max(0, |y - Kc - b| - eps), solved with cvxpy.

    The dual, min 1/2 beta'K beta - y'beta + eps |beta|_1 subject to
    sum(beta) = 0 and |beta| <= C, is a well-conditioned QP; by strong
    duality the primal optimum is minus its optimal value.
    """
    import cvxpy as cp

    k = rbf(x, x, gamma)
    beta = cp.Variable(len(y))
    objective = 0.5 * cp.quad_form(beta, cp.psd_wrap(k)) - y @ beta + epsilon * cp.norm1(beta)
    prob = cp.Problem(cp.Minimize(objective), [cp.sum(beta) == 0, cp.abs(beta) <= C])
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    if prob.status != cp.OPTIMAL:
        raise RuntimeError(f"reference solve ended with status {prob.status}")
    return -float(prob.value)
