"""Epsilon-insensitive support vector regression with an RBF kernel.

Each output column gets its own machine. The dual is solved by sequential
minimal optimisation on the stacked 2n-variable form (alpha, alpha*) with
second-order working-set selection, stopping once the maximal KKT violation
falls below ``tol``.
"""
from __future__ import annotations

from collections import OrderedDict

import numpy as np

from ..errors import ConvergenceFailure

TAU = 1e-12
FULL_KERNEL_ROWS = 4000
CACHE_BYTES = 256 * 2**20


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    d2 = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * a @ b.T
    return np.exp(-gamma * np.maximum(d2, 0.0))


class _KernelRows:
    """Kernel rows K[i, :] on demand, fully precomputed for small problems."""

    def __init__(self, x: np.ndarray, gamma: float):
        self.x, self.gamma = x, gamma
        n = len(x)
        self.full = rbf_kernel(x, x, gamma) if n <= FULL_KERNEL_ROWS else None
        self.cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self.capacity = max(2, CACHE_BYTES // (8 * n))

    def row(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[i]
        r = self.cache.get(i)
        if r is not None:
            self.cache.move_to_end(i)
            return r
        r = rbf_kernel(self.x[i:i + 1], self.x, self.gamma)[0]
        self.cache[i] = r
        if len(self.cache) > self.capacity:
            self.cache.popitem(last=False)
        return r


def solve_dual(kernel: _KernelRows, y: np.ndarray, C: float, epsilon: float, tol: float,
               max_iter: int) -> tuple[np.ndarray, float, int]:
    """Return (dual coefficients alpha - alpha*, bias, iterations)."""
    n = len(y)
    s = np.r_[np.ones(n), -np.ones(n)]
    alpha = np.zeros(2 * n)
    grad = np.r_[epsilon - y, epsilon + y]
    qd = np.ones(2 * n)  # RBF diagonal

    def q_row(t: int) -> np.ndarray:
        k = kernel.row(t % n)
        return s[t] * s * np.r_[k, k]

    it = 0
    while True:
        up = ((s > 0) & (alpha < C)) | ((s < 0) & (alpha > 0))
        low = ((s > 0) & (alpha > 0)) | ((s < 0) & (alpha < C))
        neg_sg = np.where(up, -s * grad, -np.inf)
        i = int(np.argmax(neg_sg))
        g_max = neg_sg[i]
        sg = np.where(low, s * grad, -np.inf)
        if g_max + sg.max() < tol:
            break
        if it >= max_iter:
            raise ConvergenceFailure(f"SMO did not reach tol={tol} in {max_iter} iterations")
        it += 1
        qi = q_row(i)
        diff = g_max + sg
        quad = qd[i] + qd - 2.0 * s[i] * s * qi
        quad = np.where(quad > 0, quad, TAU)
        obj = np.where(low & (diff > 0), -(diff * diff) / quad, np.inf)
        j = int(np.argmin(obj))
        if not np.isfinite(obj[j]):
            break
        qj = q_row(j)
        ai, aj = alpha[i], alpha[j]
        if s[i] != s[j]:
            qc = qd[i] + qd[j] + 2.0 * qi[j]
            delta = (-grad[i] - grad[j]) / (qc if qc > 0 else TAU)
            d = ai - aj
            ni, nj = ai + delta, aj + delta
            if d > 0:
                if nj < 0:
                    nj, ni = 0.0, d
            elif ni < 0:
                ni, nj = 0.0, -d
            if d > 0:
                if ni > C:
                    ni, nj = C, C - d
            elif nj > C:
                nj, ni = C, C + d
        else:
            qc = qd[i] + qd[j] - 2.0 * qi[j]
            delta = (grad[i] - grad[j]) / (qc if qc > 0 else TAU)
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        alpha[i], alpha[j] = ni, nj
        grad += qi * (ni - ai) + qj * (nj - aj)

    return alpha[:n] - alpha[n:], -_rho(alpha, grad, s, C), it


def _rho(alpha, grad, s, C) -> float:
    yg = s * grad
    at_upper, at_lower = alpha >= C, alpha <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        return float(yg[free].mean())
    ub_mask = (at_upper & (s < 0)) | (at_lower & (s > 0))
    lb_mask = (at_upper & (s > 0)) | (at_lower & (s < 0))
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2.0)


def primal_objective(k: np.ndarray, coef: np.ndarray, bias: float, y: np.ndarray, C: float,
                     epsilon: float) -> float:
    """0.5 * ||w||^2 + C * sum(max(0, |y - f(x)| - epsilon)) for one output."""
    kc = k @ coef
    resid = np.abs(y - (kc + bias))
    return float(0.5 * coef @ kc + C * np.maximum(resid - epsilon, 0.0).sum())


class SVRRegressor:
    def __init__(self, C: float = 1.0, epsilon: float = 0.1, gamma: float | None = None,
                 tol: float = 1e-4, max_iter: int = 10_000_000):
        if C <= 0 or epsilon < 0:
            raise ValueError("SVR needs C > 0 and epsilon >= 0")
        self.C, self.epsilon, self.gamma = float(C), float(epsilon), gamma
        self.tol, self.max_iter = float(tol), int(max_iter)
        self.gamma_: float | None = None
        self.support_x: np.ndarray | None = None
        self.coef: np.ndarray | None = None   # (n_train, n_outputs)
        self.bias: np.ndarray | None = None
        self.iterations: list[int] = []

    def fit(self, x: np.ndarray, y: np.ndarray) -> "SVRRegressor":
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        self.gamma_ = float(self.gamma) if self.gamma is not None else 1.0 / x.shape[1]
        kernel = _KernelRows(x, self.gamma_)
        coefs, biases, self.iterations = [], [], []
        for col in y.T:
            c, b, it = solve_dual(kernel, col, self.C, self.epsilon, self.tol, self.max_iter)
            coefs.append(c)
            biases.append(b)
            self.iterations.append(it)
        self.support_x = x.copy()
        self.coef = np.stack(coefs, axis=1)
        self.bias = np.array(biases)
        return self

    def predict(self, x: np.ndarray, batch: int = 2048) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.empty((len(x), self.coef.shape[1]))
        for lo in range(0, len(x), batch):
            out[lo:lo + batch] = rbf_kernel(x[lo:lo + batch], self.support_x, self.gamma_) @ self.coef + self.bias
        return out

    def objectives(self, y: np.ndarray) -> np.ndarray:
        """Primal objective per output on the training data ``y``."""
        k = rbf_kernel(self.support_x, self.support_x, self.gamma_)
        return np.array([primal_objective(k, self.coef[:, o], self.bias[o], y[:, o], self.C,
                                          self.epsilon) for o in range(self.coef.shape[1])])

    def state(self) -> tuple[dict, dict]:
        meta = {"C": self.C, "epsilon": self.epsilon, "gamma": self.gamma, "gamma_": self.gamma_,
                "tol": self.tol, "max_iter": self.max_iter}
        return meta, {"support_x": self.support_x, "coef": self.coef, "bias": self.bias}

    @classmethod
    def from_state(cls, meta: dict, arrays: dict) -> "SVRRegressor":
        m = cls(meta["C"], meta["epsilon"], meta["gamma"], meta["tol"], meta["max_iter"])
        m.gamma_ = meta["gamma_"]
        m.support_x, m.coef, m.bias = arrays["support_x"], arrays["coef"], arrays["bias"]
        return m
