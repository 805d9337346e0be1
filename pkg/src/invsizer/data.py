"""Dataset generation, normalisation, splitting and CSV persistence."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DatasetTooSmall, EmptyDataset, ParseError, SchemaMismatch
from .schema import CircuitId, CircuitSchema, builtin_schema, read_schema, write_schema
from .surrogate import simulate_batch

log = logging.getLogger(__name__)

TRAIN_FRACTION = 0.9


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Aligned rows of performance vectors ``x`` and parameter vectors ``y``."""
    schema: CircuitSchema
    x: np.ndarray
    y: np.ndarray
    provenance: dict = field(default_factory=dict)
    dropped: int = 0

    def __post_init__(self):
        x, y = _frozen(self.x), _frozen(self.y)
        if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ValueError(f"misaligned dataset arrays {x.shape} and {y.shape}")
        if x.shape[1] != self.schema.n_metrics or y.shape[1] != self.schema.n_parameters:
            raise SchemaMismatch(f"dataset has {x.shape[1]} metric and {y.shape[1]} parameter "
                                 f"columns, schema {self.schema.circuit_id.value} expects "
                                 f"{self.schema.n_metrics} and {self.schema.n_parameters}")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("dataset contains non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def circuit_id(self) -> CircuitId:
        return self.schema.circuit_id

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.schema, self.x[idx], self.y[idx],
                       {**self.provenance, "subset_of": len(self)}, 0)


def generate(circuit: str | CircuitId, seed: int = 0, subsample: float | None = None,
             noise_seed: int | None = None) -> Dataset:
    """Sweep the circuit's grid through the surrogate.

    With ``subsample`` in (0, 1) a seeded uniform sample of
    ``round(subsample * grid_size)`` grid points is simulated instead, kept
    in grid order. Points the surrogate rejects as non-physical are dropped
    and counted in ``Dataset.dropped``.
    """
    schema = builtin_schema(circuit)
    grid = schema.grid()
    if subsample is not None:
        if not 0.0 < subsample <= 1.0:
            raise ValueError(f"subsample must lie in (0, 1], got {subsample}")
        if subsample < 1.0:
            m = max(1, int(math.floor(subsample * len(grid) + 0.5)))
            rng = np.random.default_rng(seed)
            grid = grid[np.sort(rng.choice(len(grid), size=m, replace=False))]
    x, ok = simulate_batch(schema.circuit_id, grid, noise_seed=noise_seed)
    dropped = int((~ok).sum())
    if not ok.any():
        raise EmptyDataset(f"every one of the {len(grid)} {schema.circuit_id.value} points is non-physical")
    log.info("%s: simulated %d points, dropped %d non-physical", schema.circuit_id.value,
             len(grid), dropped)
    provenance = {"kind": "generated", "seed": int(seed), "subsample": subsample,
                  "noise_seed": noise_seed, "grid_points": int(len(grid))}
    return Dataset(schema, x[ok], grid[ok], provenance, dropped)


# --- normalisation -----------------------------------------------------------

@dataclass(frozen=True)
class Normalizer:
    """Per-column min-max map onto [-1, 1] for both x and y columns."""
    x_min: np.ndarray
    x_max: np.ndarray
    y_min: np.ndarray
    y_max: np.ndarray

    def __post_init__(self):
        for name in ("x_min", "x_max", "y_min", "y_max"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if (self.x_max < self.x_min).any() or (self.y_max < self.y_min).any():
            raise ValueError("normalizer max below min")

    @staticmethod
    def _fwd(v, lo, hi):
        return 2.0 * (np.asarray(v, dtype=np.float64) - lo) / (hi - lo) - 1.0

    @staticmethod
    def _inv(v, lo, hi):
        return (np.asarray(v, dtype=np.float64) + 1.0) * 0.5 * (hi - lo) + lo

    def normalize_x(self, x):
        return self._fwd(x, self.x_min, self.x_max)

    def normalize_y(self, y):
        return self._fwd(y, self.y_min, self.y_max)

    def denormalize_x(self, x):
        return self._inv(x, self.x_min, self.x_max)

    def denormalize_y(self, y):
        return self._inv(y, self.y_min, self.y_max)

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("x_min", "x_max", "y_min", "y_max")}

    @classmethod
    def from_dict(cls, d: dict) -> "Normalizer":
        return cls(*(np.asarray(d[k], dtype=np.float64) for k in ("x_min", "x_max", "y_min", "y_max")))


def _column_bounds(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = a.min(axis=0), a.max(axis=0)
    # a constant column would divide by zero; widen it so its values map to -1
    hi = np.where(hi > lo, hi, lo + 1.0)
    return lo, hi


def fit_normalizer_arrays(x: np.ndarray, y: np.ndarray) -> Normalizer:
    if len(x) == 0:
        raise ValueError("cannot fit a normalizer on zero rows")
    return Normalizer(*_column_bounds(np.asarray(x, float)), *_column_bounds(np.asarray(y, float)))


def fit_normalizer(ds: Dataset, split: "Split") -> Normalizer:
    """Min-max bounds from the training rows only."""
    idx = split.train_indices
    if len(idx) == 0:
        raise ValueError("split has no training rows")
    return fit_normalizer_arrays(ds.x[idx], ds.y[idx])


# --- splitting -------------------------------------------------------------------

@dataclass(frozen=True)
class Split:
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int

    def __post_init__(self):
        for name in ("train_indices", "test_indices"):
            a = np.array(getattr(self, name), dtype=np.int64, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if np.intersect1d(self.train_indices, self.test_indices).size:
            raise ValueError("train and test indices overlap")


def n_train_rows(n: int, fraction: float = TRAIN_FRACTION) -> int:
    """``round(fraction * n)`` with halves rounded up."""
    return int(math.floor(fraction * n + 0.5))


def split_dataset(ds: Dataset | int, seed: int, train_fraction: float = TRAIN_FRACTION) -> Split:
    """Seeded shuffle into train/test index sets, each returned in ascending order."""
    n = ds if isinstance(ds, int) else len(ds)
    if n < 10:
        raise DatasetTooSmall(f"need at least 10 rows to split, got {n}")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train fraction must lie in (0, 1), got {train_fraction}")
    perm = np.random.default_rng(seed).permutation(n)
    k = n_train_rows(n, train_fraction)
    return Split(np.sort(perm[:k]), np.sort(perm[k:]), int(seed))


# --- persistence -----------------------------------------------------------------

def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".schema.json")


def save(ds: Dataset, path: str | Path) -> Path:
    """Write CSV (metrics then parameters) plus the schema sidecar; returns the sidecar path."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ds.schema.metric_names + ds.schema.parameter_names)
        for xr, yr in zip(ds.x.tolist(), ds.y.tolist()):
            w.writerow([repr(v) for v in xr + yr])
    side = sidecar_path(path)
    write_schema(ds.schema, side)
    return side


def load(path: str | Path, schema: CircuitSchema | str | CircuitId | None = None) -> Dataset:
    """Read a dataset CSV.

    The schema comes from ``schema`` if given (a schema object or a circuit
    id) and otherwise from the sidecar file. The header must list exactly
    the schema's metric names followed by its parameter names.
    """
    path = Path(path)
    if schema is None:
        side = sidecar_path(path)
        if not side.exists():
            raise SchemaMismatch(f"no schema given and sidecar {side} is missing")
        try:
            schema = read_schema(side)
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"unreadable schema sidecar {side}: {exc}") from exc
    elif not isinstance(schema, CircuitSchema):
        schema = builtin_schema(schema)

    expected = schema.metric_names + schema.parameter_names
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path} is empty")
    header = rows[0]
    if header != expected:
        missing = [c for c in expected if c not in header]
        unknown = [c for c in header if c not in expected]
        raise SchemaMismatch(f"{path} header does not match {schema.circuit_id.value}: "
                             f"missing {missing}, unknown {unknown}"
                             + ("" if missing or unknown else ", wrong column order"))
    data = np.empty((len(rows) - 1, len(expected)))
    for i, row in enumerate(rows[1:]):
        if len(row) != len(expected):
            raise ParseError(f"{path}:{i + 2}: expected {len(expected)} fields, got {len(row)}")
        try:
            data[i] = [float(v) for v in row]
        except ValueError as exc:
            raise ParseError(f"{path}:{i + 2}: {exc}") from exc
    if not np.isfinite(data).all():
        raise ParseError(f"{path} contains non-finite values")
    n_m = schema.n_metrics
    return Dataset(schema, data[:, :n_m], data[:, n_m:], {"kind": "loaded", "path": str(path)}, 0)

