"""Inverse regressors from performance metrics to design parameters."""
from .base import TrainedModel, build_network, fit, fit_dataset, predict
from .checkpoint import load_model, save_model
from .config import DEFAULTS, Family, RegressorConfig
from .forest import RandomForestRegressor, Tree, grow_tree
from .knn import KNNRegressor, neighbour_indices
from .mlp import MLP
from .svr import SVRRegressor, primal_objective, rbf_kernel
from .transformer import Transformer

__all__ = ["DEFAULTS", "Family", "KNNRegressor", "MLP", "RandomForestRegressor", "RegressorConfig",
           "SVRRegressor", "TrainedModel", "Transformer", "Tree", "build_network", "fit",
           "fit_dataset", "grow_tree", "load_model", "neighbour_indices", "predict",
           "primal_objective", "rbf_kernel", "save_model"]
