"""End-to-end evaluation: predict parameters, re-simulate, score the metrics.

Relative errors are stored as fractions in :class:`ErrorRecord`; every
summary statistic and histogram is expressed in percent. A prediction the
surrogate rejects as non-physical gets infinite error and counts as an
outlier. Mean and standard deviation are taken over the finite errors only,
while percentiles and threshold shares always include every record.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .data import Dataset, Split, generate, split_dataset
from .errors import EmptyRecords, SchemaMismatch
from .models import RegressorConfig, TrainedModel, fit_dataset
from .schema import CircuitId, CircuitSchema
from .surrogate import simulate_batch

DENOMINATOR_FLOOR = 1e-9
HISTOGRAM_LIMIT = 50
OUTLIER_PCT = 20.0

Simulator = Callable[[np.ndarray], "tuple[np.ndarray, np.ndarray]"]


@dataclass(frozen=True)
class ErrorRecord:
    index: int
    errors: tuple[float, ...]
    mean: float
    nonphysical: bool = False
    clamped: bool = False
    floored: bool = False

    @property
    def mean_pct(self) -> float:
        return self.mean * 100.0

    @property
    def is_outlier(self) -> bool:
        return self.nonphysical or self.mean_pct > OUTLIER_PCT


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    std: float
    p75: float
    p90: float
    pct_below_2: float
    pct_below_5: float
    pct_outlier_above_20: float
    n: int
    n_nonphysical: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Histogram:
    name: str
    edges: tuple[float, ...]   # len(counts) + 1 edges; the last is +inf
    counts: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"name": self.name, "edges": list(self.edges), "counts": list(self.counts)}


def relative_errors(x: np.ndarray, x_hat: np.ndarray) -> np.ndarray:
    """|x - x_hat| / max(|x|, 1e-9), elementwise."""
    x = np.asarray(x, dtype=np.float64)
    return np.abs(x - np.asarray(x_hat, dtype=np.float64)) / np.maximum(np.abs(x), DENOMINATOR_FLOOR)


def score(x_true: np.ndarray, x_hat: np.ndarray, ok: np.ndarray, indices: Sequence[int] | None = None,
          clamped: np.ndarray | None = None) -> list[ErrorRecord]:
    """Turn true and re-simulated metric rows into error records."""
    x_true = np.atleast_2d(np.asarray(x_true, dtype=np.float64))
    n, k = x_true.shape
    indices = range(n) if indices is None else indices
    clamped = np.zeros(n, dtype=bool) if clamped is None else clamped
    floored = np.any(np.abs(x_true) < DENOMINATOR_FLOOR, axis=1)
    with np.errstate(invalid="ignore"):
        rel = relative_errors(x_true, np.where(np.asarray(ok)[:, None], x_hat, 0.0))
    out = []
    for r, idx in enumerate(indices):
        if ok[r]:
            errs = tuple(float(e) for e in rel[r])
            out.append(ErrorRecord(int(idx), errs, math.fsum(errs) / k, False,
                                   bool(clamped[r]), bool(floored[r])))
        else:
            out.append(ErrorRecord(int(idx), (math.inf,) * k, math.inf, True,
                                   bool(clamped[r]), bool(floored[r])))
    return out


def evaluate(model: TrainedModel, x: np.ndarray, schema: CircuitSchema,
             indices: Sequence[int] | None = None, simulator: Simulator | None = None,
             clamp: bool = False, noise_seed: int | None = None) -> list[ErrorRecord]:
    """Predict parameters for metric rows ``x``, re-simulate them and score the result.

    Predictions are mapped back to physical units and simulated as given, so a
    prediction outside the device's valid region shows up as a non-physical
    outlier. ``clamp=True`` limits them to the sweep bounds first and flags
    the affected records.
    """
    if model.n_inputs != schema.n_metrics or model.n_outputs != schema.n_parameters:
        raise SchemaMismatch(f"model maps {model.n_inputs}->{model.n_outputs} but {schema.circuit_id.value} "
                             f"has {schema.n_metrics} metrics and {schema.n_parameters} parameters")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != schema.n_metrics:
        raise SchemaMismatch(f"metric rows have {x.shape[1]} columns, schema has {schema.n_metrics}")
    params = model.predict_physical(x)
    clamped = np.zeros(len(x), dtype=bool)
    if clamp:
        lo, hi = schema.lower_bounds(), schema.upper_bounds()
        bounded = np.clip(params, lo, hi)
        clamped = np.any(bounded != params, axis=1)
        params = bounded
    if simulator is None:
        x_hat, ok = simulate_batch(schema.circuit_id, params, noise_seed=noise_seed)
    else:
        x_hat, ok = simulator(params)
    return score(x, x_hat, np.asarray(ok, dtype=bool), indices, clamped)


def nearest_rank(sorted_values: Sequence[float], pct: int) -> float:
    """Value at 1-based rank ceil(pct * n / 100) of an ascending sequence."""
    n = len(sorted_values)
    rank = max(1, (pct * n + 99) // 100)
    return sorted_values[rank - 1]


def summarize(records: Sequence[ErrorRecord]) -> SummaryStats:
    if not records:
        raise EmptyRecords("no records to summarise")
    vals = sorted(r.mean_pct for r in records)
    n = len(vals)
    finite = [v for v in vals if math.isfinite(v)]
    if finite:
        mean = math.fsum(finite) / len(finite)
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in finite) / len(finite))
    else:
        mean = std = math.inf
    return SummaryStats(
        mean=mean, std=std, p75=nearest_rank(vals, 75), p90=nearest_rank(vals, 90),
        pct_below_2=100.0 * sum(v < 2.0 for v in vals) / n,
        pct_below_5=100.0 * sum(v < 5.0 for v in vals) / n,
        pct_outlier_above_20=100.0 * sum(r.is_outlier for r in records) / n,
        n=n, n_nonphysical=sum(r.nonphysical for r in records))


def _bin_counts(values_pct: Sequence[float]) -> tuple[int, ...]:
    counts = [0] * (HISTOGRAM_LIMIT + 1)
    for v in values_pct:
        counts[HISTOGRAM_LIMIT if not v < HISTOGRAM_LIMIT else int(math.floor(v))] += 1
    return tuple(counts)


def emit_histograms(records: Sequence[ErrorRecord],
                    metric_names: Sequence[str] | None = None) -> list[Histogram]:
    """One histogram per metric plus one for the per-point mean; 1-point bins on [0, 50) and overflow."""
    if not records:
        raise EmptyRecords("no records to bin")
    k = len(records[0].errors)
    names = list(metric_names) if metric_names is not None else [f"metric_{i}" for i in range(k)]
    edges = tuple(float(e) for e in range(HISTOGRAM_LIMIT + 1)) + (math.inf,)
    hists = [Histogram(names[i], edges, _bin_counts([r.errors[i] * 100.0 for r in records]))
             for i in range(k)]
    hists.append(Histogram("mean", edges, _bin_counts([r.mean_pct for r in records])))
    return hists


# -- runs and reports ----------------------------------------------------------

@dataclass
class RunResult:
    model: TrainedModel
    records: list[ErrorRecord]
    summary: SummaryStats
    histograms: list[Histogram]
    dataset: Dataset
    split: Split
    train_indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def counts(self) -> dict:
        return {"n_train": int(len(self.train_indices)), "n_evaluated": len(self.records),
                "dropped_nonphysical_rows": int(self.dataset.dropped),
                "nonphysical_predictions": sum(r.nonphysical for r in self.records),
                "clamped_predictions": sum(r.clamped for r in self.records),
                "floored_denominators": sum(r.floored for r in self.records)}


def run(config: RegressorConfig, dataset: Dataset, split: Split | None = None,
        train_indices: np.ndarray | None = None, on_epoch=None) -> RunResult:
    """Fit on the (optionally reduced) training rows and evaluate on the test rows."""
    split = split or split_dataset(dataset, config.seed)
    tr = split.train_indices if train_indices is None else np.asarray(train_indices)
    model = fit_dataset(config, dataset, Split(tr, split.test_indices, split.seed), on_epoch)
    te = split.test_indices
    records = evaluate(model, dataset.x[te], dataset.schema, indices=te)
    return RunResult(model, records, summarize(records),
                     emit_histograms(records, dataset.schema.metric_names), dataset, split, tr)


def nested_train_subsets(split: Split, fractions: Sequence[float], seed: int) -> list[np.ndarray]:
    """Sorted training subsets, each the prefix of one seeded permutation, so smaller ⊂ larger."""
    fractions = [float(f) for f in fractions]
    if not fractions or any(not 0.0 < f <= 1.0 for f in fractions):
        raise ValueError(f"fractions must lie in (0, 1], got {fractions}")
    if any(b <= a for a, b in zip(fractions, fractions[1:])):
        raise ValueError(f"fractions must be strictly ascending, got {fractions}")
    perm = np.random.default_rng(seed).permutation(split.train_indices)
    n = len(perm)
    return [np.sort(perm[:max(1, int(math.floor(f * n + 0.5)))]) for f in fractions]


@dataclass(frozen=True)
class ScalingPoint:
    fraction: float
    n_train: int
    summary: SummaryStats


def scaling_study(circuit: str | CircuitId | Dataset, config: RegressorConfig,
                  fractions: Sequence[float] = (0.1, 0.25, 0.5, 1.0), seed: int = 0,
                  on_result: Callable[[float, RunResult], None] | None = None) -> list[ScalingPoint]:
    """Retrain from scratch on nested training subsets; the test rows stay fixed."""
    ds = circuit if isinstance(circuit, Dataset) else generate(circuit, seed=seed)
    split = split_dataset(ds, seed)
    points = []
    for f, tr in zip(fractions, nested_train_subsets(split, fractions, seed)):
        res = run(config, ds, split, tr)
        if on_result is not None:
            on_result(float(f), res)
        points.append(ScalingPoint(float(f), len(tr), res.summary))
    return points


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, np.generic):
        return _json_safe(v.item())
    return v


def build_report(config: dict, summary: SummaryStats, counts: dict,
                 histograms: Sequence[Histogram], **extra) -> dict:
    """Report layout: ``config``, ``summary``, ``counts``, ``histograms`` (+ optional extras).

    Non-finite numbers (infinite errors, unbounded overflow edges) become null.
    """
    report = {"config": config, "summary": summary.to_dict(), "counts": counts,
              "histograms": [h.to_dict() for h in histograms]}
    report.update(extra)
    return _json_safe(report)


def write_report(report: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_json_safe(report), indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


def aggregate(summaries: Sequence[SummaryStats]) -> dict:
    """Field-wise arithmetic mean of several summaries (non-finite fields stay non-finite)."""
    if not summaries:
        raise EmptyRecords("no summaries to aggregate")
    keys = summaries[0].to_dict().keys()
    return {k: float(np.mean([s.to_dict()[k] for s in summaries])) for k in keys}
