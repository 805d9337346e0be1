"""Adam with bias correction."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatch
from .tensor import Tensor

# Moments of parameters whose gradient stays zero (dead ReLU units) decay
# geometrically into subnormal floats, which are very slow on most CPUs.
# Every FLUSH_EVERY steps anything below FLUSH_BELOW is set to zero; its
# contribution to an update is < lr * 1e-280 either way.
FLUSH_EVERY = 100
FLUSH_BELOW = 1e-290


@dataclass
class AdamState:
    shapes: list[tuple]
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if not self.m:
            self.m = [np.zeros(s) for s in self.shapes]
            self.v = [np.zeros(s) for s in self.shapes]
        self._scratch: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def scratch(self, i: int, shape: tuple) -> tuple[np.ndarray, np.ndarray]:
        buf = self._scratch.get(i)
        if buf is None or buf[0].shape != shape:
            buf = self._scratch[i] = (np.empty(shape), np.empty(shape))
        return buf

    @classmethod
    def for_params(cls, params: list[Tensor], **hyper) -> "AdamState":
        return cls([p.shape for p in params], **hyper)


def adam_step(state: AdamState, params: list, grads: list) -> list:
    """One bias-corrected Adam update, applied in place.

    ``params`` may be Tensors or plain arrays; the same objects are returned.
    The step counter is incremented before the moments are corrected.
    """
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ShapeMismatch(f"Adam state tracks {len(state.m)} tensors, got "
                            f"{len(params)} params and {len(grads)} grads")
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for i, (p, g, m, v) in enumerate(zip(params, grads, state.m, state.v)):
        theta = p.data if isinstance(p, Tensor) else p
        if g is None:
            g = np.zeros_like(theta)
        if g.shape != theta.shape or m.shape != theta.shape:
            raise ShapeMismatch(f"gradient {g.shape} / moment {m.shape} vs parameter {theta.shape}")
        s1, s2 = state.scratch(i, theta.shape)
        m *= b1
        np.multiply(g, 1.0 - b1, out=s1)
        m += s1
        v *= b2
        np.multiply(g, g, out=s1)
        s1 *= 1.0 - b2
        v += s1
        # theta -= lr * (m / c1) / (sqrt(v / c2) + eps), without temporaries
        np.divide(v, c2, out=s1)
        np.sqrt(s1, out=s1)
        s1 += state.eps
        np.divide(m, c1, out=s2)
        np.multiply(state.lr, s2, out=s2)
        s2 /= s1
        theta -= s2
        if t % FLUSH_EVERY == 0:
            m[np.abs(m) < FLUSH_BELOW] = 0.0
            v[v < FLUSH_BELOW] = 0.0
    return params
