"""Mini-batch Adam training shared by the two neural regressors."""
from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import NonFiniteLoss
from ..numeric import AdamState, Tensor, adam_step, l1_loss, no_grad


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=(fan_in, fan_out))


class Network:
    """Base for a differentiable model: an ordered dict of named parameter tensors."""

    def __init__(self):
        self.params: dict[str, Tensor] = {}

    def add(self, name: str, value: np.ndarray) -> Tensor:
        t = Tensor(value, requires_grad=True, name=name)
        self.params[name] = t
        return t

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def forward(self, x: np.ndarray, training: bool = False,
                rng: np.random.Generator | None = None) -> Tensor:
        raise NotImplementedError

    def predict(self, x: np.ndarray, batch: int = 4096) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        with no_grad():
            parts = [self.forward(x[i:i + batch]).data for i in range(0, len(x), batch)]
        return np.concatenate(parts) if parts else np.empty((0, self.n_outputs))

    def arrays(self) -> dict[str, np.ndarray]:
        return {k: t.data for k, t in self.params.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for k, t in self.params.items():
            if arrays[k].shape != t.shape:
                raise ValueError(f"checkpoint tensor {k} has shape {arrays[k].shape}, "
                                 f"expected {t.shape}")
            t.data = np.array(arrays[k], dtype=np.float64)


def train(net: Network, x: np.ndarray, y: np.ndarray, epochs: int, batch_size: int, lr: float,
          seed: int, on_epoch: Callable[[int, float], None] | None = None) -> list[float]:
    """Minimise the mean absolute error of ``net`` on (x, y); returns per-epoch mean loss."""
    shuffle_rng, dropout_rng = (np.random.default_rng(s)
                                for s in np.random.SeedSequence([seed, 1]).spawn(2))
    params = net.parameters()
    state = AdamState.for_params(params, lr=lr)
    n = len(x)
    history = []
    for epoch in range(epochs):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for lo in range(0, n, batch_size):
            idx = order[lo:lo + batch_size]
            for p in params:
                p.grad = None
            loss = l1_loss(net.forward(x[idx], training=True, rng=dropout_rng), y[idx])
            value = float(loss.data)
            if not np.isfinite(value):
                raise NonFiniteLoss(f"loss became {value} in epoch {epoch + 1}")
            loss.backward()
            adam_step(state, params, [p.grad for p in params])
            total += value * len(idx)
        history.append(total / n)
        if on_epoch is not None:
            on_epoch(epoch + 1, history[-1])
    return history
