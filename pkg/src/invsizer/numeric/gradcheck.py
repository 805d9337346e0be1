"""Central-difference gradient checking."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor


def relative_discrepancy(analytic: float, numeric: float, floor: float = 1e-8) -> float:
    """|a - n| / max(|a|, |n|, floor); the floor keeps vanishing gradients from dividing by ~0."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def grad_check(f: Callable[[], Tensor | float], params: Sequence[Tensor], h: float = 1e-6,
               coords_per_param: int | None = None,
               rng: np.random.Generator | None = None, floor: float = 1e-8,
               refine: bool = False) -> float:
    """Largest relative discrepancy between reverse-mode and finite-difference gradients.

    ``f`` takes no arguments and must read the current values of ``params``.
    By default every coordinate is checked; ``coords_per_param`` limits the
    check to that many coordinates per tensor, drawn with ``rng``, which keeps
    the cost manageable for large networks.

    Central differences carry round-off of roughly eps * |f| / h, so a
    gradient that is exactly zero (a bias the output is invariant to, say)
    cannot be resolved below that level; ``floor`` should sit above it.

    With ``refine`` the step is halved until two successive estimates agree.
    A stencil that straddles a ReLU switch gives a wrong slope however
    accurate the arithmetic is; shrinking the step moves the switch outside.
    """
    for p in params:
        p.zero_grad()
    out = f()
    if not isinstance(out, Tensor):
        return _numeric_only(f, params, h, coords_per_param, rng, floor, refine)
    out.backward()
    worst = 0.0
    for p in params:
        analytic = np.zeros_like(p.data) if p.grad is None else p.grad
        for idx in _coordinates(p.data, coords_per_param, rng):
            num = _central_difference(f, p, idx, h, refine)
            worst = max(worst, relative_discrepancy(float(analytic[idx]), num, floor))
    return worst


def _numeric_only(f, params, h, coords_per_param, rng, floor, refine) -> float:
    # f returned a constant: its reverse-mode gradient is zero everywhere
    worst = 0.0
    for p in params:
        for idx in _coordinates(p.data, coords_per_param, rng):
            worst = max(worst, relative_discrepancy(0.0, _central_difference(f, p, idx, h, refine), floor))
    return worst


def _value(v) -> float:
    return float(v.data) if isinstance(v, Tensor) else float(v)


MAX_HALVINGS = 6
AGREE_REL = 1e-6


def _stencil(f, p: Tensor, idx, h: float) -> tuple[float, float]:
    """Central difference and a bound on its floating-point round-off."""
    orig = p.data[idx]
    p.data[idx] = orig + h
    up = _value(f())
    p.data[idx] = orig - h
    down = _value(f())
    p.data[idx] = orig
    noise = 4 * np.finfo(float).eps * (abs(up) + abs(down)) / (2 * h)
    return (up - down) / (2 * h), noise


def _central_difference(f, p: Tensor, idx, h: float, refine: bool = False) -> float:
    est, _ = _stencil(f, p, idx, h)
    if not refine:
        return est
    for _ in range(MAX_HALVINGS):
        h /= 2
        nxt, noise = _stencil(f, p, idx, h)
        if abs(nxt - est) <= AGREE_REL * max(abs(nxt), abs(est)) + 2 * noise:
            return nxt
        est = nxt
    return est


def _coordinates(a: np.ndarray, k: int | None, rng: np.random.Generator | None):
    if k is None or k >= a.size:
        return list(np.ndindex(a.shape))
    if rng is None:
        rng = np.random.default_rng(0)
    flat = rng.choice(a.size, size=k, replace=False)
    return [np.unravel_index(i, a.shape) for i in flat]
