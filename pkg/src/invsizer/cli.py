"""Command-line front end: ``invsizer {gen-data,train,evaluate,scaling}``.

Settings come from (lowest to highest precedence) built-in defaults, an
optional JSON ``--config`` file and explicit flags. Artifacts land in
``--out``, which defaults to ``$INVSIZER_OUT`` or ``./runs``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import data as data_mod
from .errors import InvSizerError, SchemaMismatch
from .evaluation import (aggregate, build_report, emit_histograms, evaluate, nested_train_subsets,
                         run, summarize, write_report)
from .models import Family, RegressorConfig, load_model, save_model
from .models.base import fit_dataset
from .schema import CircuitId

OUT_ENV = "INVSIZER_OUT"
DEFAULT_FRACTIONS = (0.1, 0.25, 0.5, 1.0)
NEURAL = (Family.MLP, Family.TRANSFORMER)

log = logging.getLogger("invsizer")


@dataclass
class RunConfig:
    circuit: str | None = None
    model: str = "knn"
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0
    epochs: int = 100
    batch_size: int = 64
    train_fraction: float = data_mod.TRAIN_FRACTION
    subsample: float | None = None
    out: str | None = None
    seeds: int = 1
    fractions: list[float] = field(default_factory=lambda: list(DEFAULT_FRACTIONS))
    data: str | None = None
    checkpoint: str | None = None
    split: str = "test"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def out_dir(self) -> Path:
        return Path(self.out or os.environ.get(OUT_ENV) or "runs")

    def regressor(self, seed: int | None = None) -> RegressorConfig:
        fam = Family.parse(self.model)
        hyper = dict(self.hyperparameters)
        if fam in NEURAL:
            hyper.setdefault("epochs", self.epochs)
            hyper.setdefault("batch_size", self.batch_size)
        return RegressorConfig(fam, hyper, self.seed if seed is None else seed)


# -- argument handling -----------------------------------------------------------

def _fractions(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _circuit(text: str) -> str:
    try:
        return CircuitId.parse(text).value
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _family(text: str) -> str:
    try:
        return Family.parse(text).value
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invsizer",
                                     description="Inverse circuit sizing: data, training, evaluation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        p.add_argument("--config", type=Path, help="JSON file of settings; flags override it")
        p.add_argument("--circuit", type=_circuit, default=argparse.SUPPRESS)
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        p.add_argument("--subsample", type=float, default=argparse.SUPPRESS,
                       help="fraction of the sweep grid to simulate")
        p.add_argument("--out", default=argparse.SUPPRESS,
                       help=f"output directory (default ${OUT_ENV} or ./runs)")
        if model:
            p.add_argument("--data", default=argparse.SUPPRESS, help="dataset CSV from gen-data")
            p.add_argument("--model", type=_family, default=argparse.SUPPRESS)
            p.add_argument("--epochs", type=int, default=argparse.SUPPRESS)
            p.add_argument("--batch-size", dest="batch_size", type=int, default=argparse.SUPPRESS)
            p.add_argument("--train-fraction", dest="train_fraction", type=float,
                           default=argparse.SUPPRESS)
        return p

    common(sub.add_parser("gen-data", help="simulate a sweep grid into a CSV dataset"), model=False)
    common(sub.add_parser("train", help="fit a model and write a checkpoint"))
    ev = common(sub.add_parser("evaluate", help="score a model by re-simulating its predictions"))
    ev.add_argument("--checkpoint", default=argparse.SUPPRESS)
    ev.add_argument("--seeds", type=int, default=argparse.SUPPRESS,
                    help="train and evaluate this many consecutive seeds")
    ev.add_argument("--split", choices=["test", "train"], default=argparse.SUPPRESS,
                    help="rows to evaluate on (default test)")
    sc = common(sub.add_parser("scaling", help="retrain on nested training fractions"))
    sc.add_argument("--fractions", type=_fractions, default=argparse.SUPPRESS,
                    help="comma-separated, ascending, in (0, 1]")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if getattr(args, "config", None):
        base = json.loads(Path(args.config).read_text())
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "command", "verbose")}
    cfg = RunConfig.from_dict({**base, **flags})
    if cfg.circuit is not None:
        cfg.circuit = CircuitId.parse(cfg.circuit).value
    return cfg


# -- helpers -----------------------------------------------------------------------

def _stem(cfg: RunConfig, circuit: str, with_model: bool = True) -> str:
    parts = [circuit.lower()]
    if with_model:
        parts.append(Family.parse(cfg.model).value)
    parts.append(f"seed{cfg.seed}")
    return "_".join(parts)


def _attach_log(path: Path) -> logging.Handler:
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(path, mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter("%(message)s"))
    logging.getLogger("invsizer").addHandler(handler)
    return handler


def _detach(handler: logging.Handler) -> None:
    logging.getLogger("invsizer").removeHandler(handler)
    handler.close()


def _dataset(cfg: RunConfig) -> data_mod.Dataset:
    if cfg.data:
        if not Path(cfg.data).exists():
            raise FileNotFoundError(f"dataset {cfg.data} does not exist")
        ds = data_mod.load(cfg.data, cfg.circuit)
        log.info("loaded %d rows from %s", len(ds), cfg.data)
        return ds
    if cfg.circuit is None:
        raise ValueError("give --circuit or --data")
    ds = data_mod.generate(cfg.circuit, seed=cfg.seed, subsample=cfg.subsample)
    log.info("generated %d rows for %s (dropped %d)", len(ds), cfg.circuit, ds.dropped)
    return ds


def _echo(cfg: RunConfig, circuit: str) -> dict:
    # the output location is not a run setting; leaving it out keeps reports path-independent
    echo = cfg.to_dict()
    echo.pop("out", None)
    echo["circuit"] = circuit
    return echo


def _epoch_logger(epoch: int, loss: float) -> None:
    log.info("epoch %d loss %.6g", epoch, loss)


# -- commands ----------------------------------------------------------------------

def cmd_gen_data(cfg: RunConfig) -> int:
    if cfg.circuit is None:
        raise ValueError("gen-data needs --circuit")
    out = cfg.out_dir()
    stem = _stem(cfg, cfg.circuit, with_model=False)
    handler = _attach_log(out / f"{stem}.log")
    try:
        ds = data_mod.generate(cfg.circuit, seed=cfg.seed, subsample=cfg.subsample)
        csv_path = out / f"{stem}.csv"
        sidecar = data_mod.save(ds, csv_path)
        log.info("circuit %s", cfg.circuit)
        log.info("seed %d", cfg.seed)
        log.info("subsample %s", cfg.subsample)
        log.info("grid points %d", ds.provenance["grid_points"])
        log.info("simulated rows %d", len(ds) + ds.dropped)
        log.info("dropped non-physical rows %d", ds.dropped)
        log.info("rows written %d", len(ds))
        log.info("dataset %s", csv_path)
        log.info("schema %s", sidecar)
    finally:
        _detach(handler)
    print(csv_path)
    return 0


def cmd_train(cfg: RunConfig) -> int:
    ds = _dataset(cfg)
    circuit = ds.circuit_id.value
    out = cfg.out_dir()
    stem = _stem(cfg, circuit)
    handler = _attach_log(out / f"{stem}_train.log")
    try:
        rc = cfg.regressor()
        split = data_mod.split_dataset(ds, cfg.seed, cfg.train_fraction)
        log.info("model %s %s", rc.family.value, json.dumps(rc.hyperparameters, sort_keys=True))
        log.info("train rows %d test rows %d", len(split.train_indices), len(split.test_indices))
        model = fit_dataset(rc, ds, split, _epoch_logger if rc.family in NEURAL else None)
        if rc.family in (Family.RF, Family.SVR):
            train_pred = model.predict(model.normalizer.normalize_x(ds.x[split.train_indices]))
            resid = np.abs(train_pred - model.normalizer.normalize_y(ds.y[split.train_indices]))
            log.info("fit done; mean absolute training residual (normalised) %.6g", resid.mean())
        path = save_model(model, out / f"{stem}.ckpt")
        log.info("checkpoint %s", path)
    finally:
        _detach(handler)
    print(path)
    return 0


def _rows(cfg: RunConfig, split: data_mod.Split) -> np.ndarray:
    return split.train_indices if cfg.split == "train" else split.test_indices


def cmd_evaluate(cfg: RunConfig) -> int:
    ds = _dataset(cfg)
    circuit = ds.circuit_id.value
    out = cfg.out_dir()
    split = data_mod.split_dataset(ds, cfg.seed, cfg.train_fraction)
    echo = _echo(cfg, circuit)
    if cfg.checkpoint:
        model = load_model(cfg.checkpoint)
        if model.circuit is not None and model.circuit != circuit:
            raise SchemaMismatch(f"checkpoint was trained on {model.circuit}, dataset is {circuit}")
        rows = _rows(cfg, split)
        records = evaluate(model, ds.x[rows], ds.schema, indices=rows)
        echo["model"] = model.family.value
        echo["regressor"] = model.config.to_dict()
        counts = {"n_train": int(len(split.train_indices)), "n_evaluated": len(records),
                  "dropped_nonphysical_rows": int(ds.dropped),
                  "nonphysical_predictions": sum(r.nonphysical for r in records),
                  "clamped_predictions": sum(r.clamped for r in records),
                  "floored_denominators": sum(r.floored for r in records)}
        report = build_report(echo, summarize(records), counts,
                              emit_histograms(records, ds.schema.metric_names))
        stem = f"{circuit.lower()}_{model.family.value}_seed{model.config.seed}"
    else:
        blocks = []
        summaries = []
        for s in range(cfg.seed, cfg.seed + max(1, cfg.seeds)):
            sp = data_mod.split_dataset(ds, s, cfg.train_fraction)
            res = run(cfg.regressor(s), ds, sp)
            if cfg.split == "train":
                res.records = evaluate(res.model, ds.x[sp.train_indices], ds.schema,
                                       indices=sp.train_indices)
                res.summary = summarize(res.records)
                res.histograms = emit_histograms(res.records, ds.schema.metric_names)
            counts = res.counts()
            block = build_report({}, res.summary, counts, res.histograms)
            block.pop("config")
            blocks.append({"seed": s, **block})
            summaries.append(res.summary)
            log.info("seed %d mean relative error %.4f%%", s, res.summary.mean)
        echo["regressor"] = cfg.regressor().to_dict()
        if len(blocks) == 1:
            report = build_report(echo, summaries[0], blocks[0]["counts"], res.histograms)
        else:
            agg = aggregate(summaries)
            report = {"config": echo, "summary": agg, "counts": {"seeds": len(blocks)},
                      "histograms": [], "per_seed": blocks, "aggregate": agg}
        stem = _stem(cfg, circuit) + (f"_seeds{len(blocks)}" if len(blocks) > 1 else "")
    path = write_report(report, out / f"{stem}_report.json")
    s = report["summary"]
    print(f"{path}\nmean relative error {s['mean']}% (P90 {s['p90']}%, outliers "
          f"{s['pct_outlier_above_20']}%)")
    return 0


def cmd_scaling(cfg: RunConfig) -> int:
    ds = _dataset(cfg)
    circuit = ds.circuit_id.value
    out = cfg.out_dir()
    stem = _stem(cfg, circuit)
    split = data_mod.split_dataset(ds, cfg.seed, cfg.train_fraction)
    subsets = nested_train_subsets(split, cfg.fractions, cfg.seed)
    echo = _echo(cfg, circuit)
    echo["regressor"] = cfg.regressor().to_dict()
    trend = []
    for frac, tr in zip(cfg.fractions, subsets):
        res = run(cfg.regressor(), ds, split, tr)
        report = build_report({**echo, "fraction": frac}, res.summary, res.counts(), res.histograms)
        write_report(report, out / f"{stem}_scaling_{frac:g}.json")
        trend.append({"fraction": frac, "n_train": int(len(tr)), "mean": res.summary.mean,
                      "p90": res.summary.p90,
                      "pct_outlier_above_20": res.summary.pct_outlier_above_20})
    write_report({"config": echo, "trend": trend}, out / f"{stem}_scaling_trend.json")
    lines = [f"{'fraction':>8}  {'n_train':>7}  {'mean %':>9}  {'p90 %':>9}"]
    lines += [f"{t['fraction']:>8g}  {t['n_train']:>7d}  {t['mean']:>9.4f}  {t['p90']:>9.4f}"
              for t in trend]
    table = "\n".join(lines)
    (out / f"{stem}_scaling_trend.txt").write_text(table + "\n")
    print(table)
    return 0


COMMANDS = {"gen-data": cmd_gen_data, "train": cmd_train, "evaluate": cmd_evaluate,
            "scaling": cmd_scaling}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    pkg_log = logging.getLogger("invsizer")
    pkg_log.setLevel(logging.DEBUG if args.verbose else logging.INFO)
    pkg_log.propagate = args.verbose
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (InvSizerError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"invsizer {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
