"""The command-line workflow, driven from Python for a self-contained run.

Equivalent shell session:

    invsizer gen-data --circuit lna --seed 0 --out runs
    invsizer train    --data runs/lna_seed0.csv --model rf --out runs
    invsizer evaluate --data runs/lna_seed0.csv --checkpoint runs/lna_rf_seed0.ckpt --out runs
"""
import json
import sys
import tempfile
from pathlib import Path

from invsizer.cli import main as cli


def step(*argv):
    print("$ invsizer", " ".join(argv))
    code = cli(list(argv))
    if code:
        sys.exit(code)


with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp)
    step("gen-data", "--circuit", "lna", "--seed", "0", "--subsample", "0.2", "--out", str(out))
    data = out / "lna_seed0.csv"
    step("train", "--data", str(data), "--model", "rf", "--out", str(out))
    step("evaluate", "--data", str(data), "--checkpoint", str(out / "lna_rf_seed0.ckpt"), "--out", str(out))

    print("\nfiles:", ", ".join(sorted(p.name for p in out.iterdir())))
    report = json.loads((out / "lna_rf_seed0_report.json").read_text())
    print("summary:", json.dumps(report["summary"], indent=1))
    mean_hist = report["histograms"][-1]
    print("mean-error histogram, first 10 one-point bins:", mean_hist["counts"][:10])
