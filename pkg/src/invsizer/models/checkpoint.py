"""Model checkpoints as deterministic zip archives.

An archive holds ``meta.json`` (format version, config, dimensions,
normaliser, loss history and estimator settings) plus one ``.npy`` entry per
array. Entries are written in sorted order with a fixed timestamp, so saving
the same model twice yields identical bytes.
"""
from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path

import numpy as np

from ..data import Normalizer
from ..errors import ParseError
from .base import TrainedModel, build_network
from .config import Family, RegressorConfig
from .forest import RandomForestRegressor
from .knn import KNNRegressor
from .neural import Network
from .svr import SVRRegressor

FORMAT_VERSION = 1
_EPOCH = (1980, 1, 1, 0, 0, 0)
_CLASSES = {Family.RF: RandomForestRegressor, Family.KNN: KNNRegressor, Family.SVR: SVRRegressor}


def _entry(name: str) -> zipfile.ZipInfo:
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    return info


def save_model(model: TrainedModel, path: str | Path) -> Path:
    path = Path(path)
    if isinstance(model.estimator, Network):
        est_meta, arrays = {}, model.estimator.arrays()
    else:
        est_meta, arrays = model.estimator.state()
    meta = {
        "format_version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "n_inputs": model.n_inputs,
        "n_outputs": model.n_outputs,
        "normalizer": None if model.normalizer is None else model.normalizer.to_dict(),
        "history": list(model.history),
        "circuit": model.circuit,
        "estimator": est_meta,
        "arrays": sorted(arrays),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(path, "w") as zf:
        zf.writestr(_entry("meta.json"), json.dumps(meta, sort_keys=True, indent=1))
        for name in sorted(arrays):
            buf = io.BytesIO()
            np.save(buf, np.ascontiguousarray(arrays[name]), allow_pickle=False)
            zf.writestr(_entry(f"arrays/{name}.npy"), buf.getvalue())
    return path


def load_model(path: str | Path) -> TrainedModel:
    try:
        with zipfile.ZipFile(path) as zf:
            meta = json.loads(zf.read("meta.json"))
            arrays = {name: np.load(io.BytesIO(zf.read(f"arrays/{name}.npy")), allow_pickle=False)
                      for name in meta["arrays"]}
    except (zipfile.BadZipFile, KeyError, json.JSONDecodeError, ValueError) as exc:
        raise ParseError(f"{path}: not a model checkpoint ({exc})") from exc
    if meta.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported checkpoint version {meta.get('format_version')}")
    config = RegressorConfig.from_dict(meta["config"])
    n_in, n_out = meta["n_inputs"], meta["n_outputs"]
    if config.family in _CLASSES:
        est = _CLASSES[config.family].from_state(meta["estimator"], arrays)
    else:
        est = build_network(config, n_in, n_out)
        est.load_arrays(arrays)
    norm = None if meta["normalizer"] is None else Normalizer.from_dict(meta["normalizer"])
    return TrainedModel(config, n_in, n_out, est, norm, list(meta["history"]), meta.get("circuit"))
