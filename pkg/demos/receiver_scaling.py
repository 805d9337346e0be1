"""How much data does the receiver chain need?

The receiver is sized as a whole (LNA, mixer and amplifier parameters
together), so its sweep is large. This retrains the nearest-neighbour
baseline on nested fractions of the training rows and scores every model on
the same held-out designs.

    python3 demos/receiver_scaling.py --subsample 0.1   # quick look
    python3 demos/receiver_scaling.py                   # full sweep, a few minutes
"""
import argparse
import time

from invsizer.data import generate
from invsizer.evaluation import scaling_study
from invsizer.models import RegressorConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--subsample", type=float, default=None, help="keep this share of the sweep grid")
    ap.add_argument("--model", default="knn")
    args = ap.parse_args()

    t0 = time.perf_counter()
    ds = generate("Receiver", seed=0, subsample=args.subsample)
    print(f"receiver: {len(ds.x)} designs, {ds.schema.n_parameters} parameters, "
          f"{ds.schema.n_metrics} metrics ({time.perf_counter() - t0:.1f} s to sweep)")

    def progress(fraction, res):
        print(f"  trained on {fraction:>4.0%} ({len(res.train_indices)} rows) "
              f"after {time.perf_counter() - t0:.0f} s")

    points = scaling_study(ds, RegressorConfig.create(args.model, seed=0), seed=0, on_result=progress)
    print(f"\n{'fraction':>8} {'n_train':>8} {'mean %':>8} {'P90 %':>8} {'<2 %':>7}")
    for p in points:
        s = p.summary
        print(f"{p.fraction:>8.2f} {p.n_train:>8d} {s.mean:>8.3f} {s.p90:>8.3f} {s.pct_below_2:>7.1f}")
    first, last = points[0].summary.mean, points[-1].summary.mean
    print(f"\nmean error falls {first / last:.1f}x from the smallest to the full training set")


if __name__ == "__main__":
    main()
