"""One fit/predict contract over the five regressor families."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..data import Dataset, Normalizer, Split, fit_normalizer
from ..errors import DimensionMismatch, EmptyTrainingSet
from .config import Family, RegressorConfig
from .forest import RandomForestRegressor
from .knn import KNNRegressor
from .mlp import MLP
from .neural import Network, train
from .svr import SVRRegressor
from .transformer import Transformer

log = logging.getLogger(__name__)


@dataclass
class TrainedModel:
    """A fitted regressor from normalised metrics (N inputs) to normalised parameters (D outputs)."""
    config: RegressorConfig
    n_inputs: int
    n_outputs: int
    estimator: object
    normalizer: Normalizer | None = None
    history: list[float] = field(default_factory=list)
    circuit: str | None = None

    @property
    def family(self) -> Family:
        return self.config.family

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        rows = x[None, :] if single else x
        if rows.ndim != 2 or rows.shape[1] != self.n_inputs:
            raise DimensionMismatch(f"{self.family.value} model expects {self.n_inputs} inputs, "
                                    f"got shape {x.shape}")
        if not np.all(np.isfinite(rows)):
            raise ValueError("inputs must be finite")
        out = self.estimator.predict(rows)
        return out[0] if single else out

    def predict_physical(self, metrics) -> np.ndarray:
        """Map raw metric values to parameter values through the stored normaliser."""
        if self.normalizer is None:
            raise ValueError("this model carries no normaliser")
        return self.normalizer.denormalize_y(self.predict(self.normalizer.normalize_x(metrics)))


def _check_training_rows(x: np.ndarray, y: np.ndarray) -> None:
    if x.ndim != 2 or y.ndim != 2:
        raise DimensionMismatch(f"training arrays must be 2-D, got {x.shape} and {y.shape}")
    if len(x) == 0:
        raise EmptyTrainingSet("cannot fit a model on zero rows")
    if len(x) != len(y):
        raise DimensionMismatch(f"{len(x)} input rows but {len(y)} target rows")
    if x.shape[1] == 0 or y.shape[1] == 0:
        raise DimensionMismatch("inputs and targets need at least one column")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("training data must be finite")


def build_network(config: RegressorConfig, n_inputs: int, n_outputs: int) -> Network:
    h = config.hyperparameters
    if config.family is Family.MLP:
        return MLP(n_inputs, n_outputs, h["hidden"], seed=config.seed)
    return Transformer(n_inputs, n_outputs, h["d_model"], h["heads"], h["ffn_hidden"], h["layers"],
                       h["dropout"], seed=config.seed)


def fit(config: RegressorConfig, x, y, normalizer: Normalizer | None = None,
        on_epoch: Callable[[int, float], None] | None = None) -> TrainedModel:
    """Fit ``config`` to normalised training rows (x = metrics, y = parameters)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_training_rows(x, y)
    h = config.hyperparameters
    fam = config.family
    history: list[float] = []
    if fam in (Family.MLP, Family.TRANSFORMER):
        est = build_network(config, x.shape[1], y.shape[1])
        history = train(est, x, y, h["epochs"], h["batch_size"], h["lr"], config.seed, on_epoch)
    elif fam is Family.RF:
        est = RandomForestRegressor(h["n_trees"], h["max_depth"], h["min_samples_leaf"],
                                    h["bootstrap"], seed=config.seed).fit(x, y)
    elif fam is Family.KNN:
        est = KNNRegressor(h["k"]).fit(x, y)
    else:
        est = SVRRegressor(h["C"], h["epsilon"], h["gamma"], h["tol"], h["max_iter"]).fit(x, y)
    log.debug("fitted %s on %d rows", fam.value, len(x))
    return TrainedModel(config, x.shape[1], y.shape[1], est, normalizer, history)


def predict(model: TrainedModel, x) -> np.ndarray:
    return model.predict(x)


def fit_dataset(config: RegressorConfig, ds: Dataset, split: Split,
                on_epoch: Callable[[int, float], None] | None = None) -> TrainedModel:
    """Fit on the training rows of ``ds`` with a normaliser fitted on those rows only."""
    if len(split.train_indices) == 0:
        raise EmptyTrainingSet("the split has no training rows")
    norm = fit_normalizer(ds, split)
    tr = split.train_indices
    model = fit(config, norm.normalize_x(ds.x[tr]), norm.normalize_y(ds.y[tr]), norm, on_epoch)
    model.circuit = ds.circuit_id.value
    return model
