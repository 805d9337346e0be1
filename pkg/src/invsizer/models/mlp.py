from __future__ import annotations

import numpy as np

from ..numeric import Tensor, relu
from .neural import Network, glorot_uniform


class MLP(Network):
    """Fully connected ReLU network with a linear output layer."""

    def __init__(self, n_inputs: int, n_outputs: int, hidden=(200, 300, 500, 500, 300, 200),
                 seed: int = 0):
        super().__init__()
        self.n_inputs, self.n_outputs = n_inputs, n_outputs
        self.hidden = [int(h) for h in hidden]
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
        sizes = [n_inputs, *self.hidden, n_outputs]
        for i, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
            self.add(f"W{i}", glorot_uniform(rng, a, b))
            self.add(f"b{i}", np.zeros(b))
        self.n_layers = len(sizes) - 1

    def forward(self, x, training=False, rng=None) -> Tensor:
        h = Tensor(x)
        for i in range(self.n_layers):
            h = h @ self.params[f"W{i}"] + self.params[f"b{i}"]
            if i < self.n_layers - 1:
                h = relu(h)
        return h
