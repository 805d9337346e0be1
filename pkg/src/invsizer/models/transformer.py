"""Encoder-only transformer that reads each metric as one token.

A scalar metric value v at position t becomes ``v * w_embed + b_embed + P[t]``.
Each encoder layer applies multi-head self-attention and a ReLU feed-forward
block, each followed by dropout, a residual connection and layer
normalisation. Token states are mean-pooled and mapped linearly to the
parameter vector.
"""
from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from ..numeric import Tensor, dropout, layer_norm, relu, softmax
from .neural import Network, glorot_uniform


class Transformer(Network):
    def __init__(self, n_inputs: int, n_outputs: int, d_model: int = 200, heads: int = 2,
                 ffn_hidden: int = 200, layers: int = 6, dropout: float = 0.1, seed: int = 0):
        super().__init__()
        if d_model % heads:
            raise ValueError(f"d_model={d_model} is not divisible by heads={heads}")
        self.n_inputs, self.n_outputs = n_inputs, n_outputs
        self.d_model, self.heads, self.layers = d_model, heads, layers
        self.d_k = d_model // heads
        self.ffn_hidden, self.dropout_p = ffn_hidden, dropout
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
        d = d_model
        self.add("w_embed", glorot_uniform(rng, 1, d)[0])
        self.add("b_embed", np.zeros(d))
        self.add("pos", glorot_uniform(rng, n_inputs, d))
        for i in range(layers):
            for name in ("q", "k", "v", "o"):
                self.add(f"L{i}.W{name}", glorot_uniform(rng, d, d))
                self.add(f"L{i}.b{name}", np.zeros(d))
            self.add(f"L{i}.ln1.g", np.ones(d))
            self.add(f"L{i}.ln1.b", np.zeros(d))
            self.add(f"L{i}.W1", glorot_uniform(rng, d, ffn_hidden))
            self.add(f"L{i}.b1", np.zeros(ffn_hidden))
            self.add(f"L{i}.W2", glorot_uniform(rng, ffn_hidden, d))
            self.add(f"L{i}.b2", np.zeros(d))
            self.add(f"L{i}.ln2.g", np.ones(d))
            self.add(f"L{i}.ln2.b", np.zeros(d))
        self.add("W_out", glorot_uniform(rng, d, n_outputs))
        self.add("b_out", np.zeros(n_outputs))

    def embed(self, x: np.ndarray) -> Tensor:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_inputs:
            raise ShapeMismatch(f"expected rows of {self.n_inputs} metric tokens, got shape {x.shape}")
        p = self.params
        return Tensor(x[:, :, None]) * p["w_embed"] + p["b_embed"] + p["pos"]

    def attention(self, h: Tensor, i: int, training: bool = False, rng=None,
                  return_weights: bool = False):
        p = self.params
        b, n, _ = h.shape

        def split(t: Tensor) -> Tensor:
            return t.reshape(b, n, self.heads, self.d_k).transpose(0, 2, 1, 3)

        q = split(h @ p[f"L{i}.Wq"] + p[f"L{i}.bq"])
        k = split(h @ p[f"L{i}.Wk"] + p[f"L{i}.bk"])
        v = split(h @ p[f"L{i}.Wv"] + p[f"L{i}.bv"])
        weights = softmax(q @ k.transpose(0, 1, 3, 2) / np.sqrt(self.d_k))
        ctx = (weights @ v).transpose(0, 2, 1, 3).reshape(b, n, self.d_model)
        out = ctx @ p[f"L{i}.Wo"] + p[f"L{i}.bo"]
        return (out, weights) if return_weights else out

    def encode(self, x: np.ndarray, training: bool = False, rng=None) -> Tensor:
        p = self.params
        h = self.embed(x)
        for i in range(self.layers):
            a = dropout(self.attention(h, i), self.dropout_p, rng, training)
            h = layer_norm(h + a, p[f"L{i}.ln1.g"], p[f"L{i}.ln1.b"])
            f = relu(h @ p[f"L{i}.W1"] + p[f"L{i}.b1"]) @ p[f"L{i}.W2"] + p[f"L{i}.b2"]
            f = dropout(f, self.dropout_p, rng, training)
            h = layer_norm(h + f, p[f"L{i}.ln2.g"], p[f"L{i}.ln2.b"])
        return h

    def pooled(self, x: np.ndarray, training: bool = False, rng=None) -> Tensor:
        return self.encode(x, training, rng).mean(axis=1)

    def forward(self, x, training=False, rng=None) -> Tensor:
        return self.pooled(x, training, rng) @ self.params["W_out"] + self.params["b_out"]
