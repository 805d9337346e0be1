"""Walk through one inverse-design run on the common-source voltage amplifier.

Sweep the surrogate to build a dataset, learn metrics -> parameters with a
nearest-neighbour baseline, then look at a single held-out design: the
parameters the model proposes, and the performance those parameters really
achieve when simulated.

    python3 demos/csva_inverse_design.py            # kNN, a few seconds
    python3 demos/csva_inverse_design.py --mlp 20   # add an MLP trained for 20 epochs
"""
import argparse

import numpy as np

from invsizer.data import generate, split_dataset
from invsizer.evaluation import run
from invsizer.models import RegressorConfig
from invsizer.surrogate import simulate


def show_summary(label, s):
    print(f"{label:>5}: mean {s.mean:.2f}%  std {s.std:.2f}%  P90 {s.p90:.2f}%  "
          f"<2% {s.pct_below_2:.1f}%  >20% {s.pct_outlier_above_20:.1f}%")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mlp", type=int, metavar="EPOCHS", help="also train the MLP")
    args = ap.parse_args()

    ds = generate("CSVA", seed=0)
    split = split_dataset(ds, seed=0)
    print(f"CSVA: {len(ds.x)} physical designs ({ds.dropped} dropped), "
          f"{len(split.train_indices)} train / {len(split.test_indices)} test")
    print("parameters:", ", ".join(ds.schema.parameter_names))
    print("metrics:   ", ", ".join(ds.schema.metric_names))

    knn = run(RegressorConfig.create("knn", seed=0), ds, split)
    show_summary("kNN", knn.summary)
    if args.mlp:
        mlp = run(RegressorConfig.create("mlp", seed=0, epochs=args.mlp), ds, split,
                  on_epoch=lambda e, loss: print(f"  epoch {e:3d}  loss {loss:.4f}"))
        show_summary("MLP", mlp.summary)

    # one held-out design, end to end
    i = split.test_indices[0]
    target = ds.x[i]
    proposed = knn.model.predict_physical(target[None, :])[0]
    achieved = simulate("CSVA", proposed)
    print(f"\nheld-out row {i}")
    for name, true, got in zip(ds.schema.parameter_names, ds.y[i], proposed):
        print(f"  {name:>9}  true {true:10.4g}  proposed {got:10.4g}")
    for name, want, got in zip(ds.schema.metric_names, target, achieved):
        err = abs(want - got) / max(abs(want), 1e-9) * 100
        print(f"  {name:>9}  target {want:10.4g}  achieved {got:10.4g}  ({err:.2f}%)")
    print(f"  mean relative error {np.mean(np.abs(target - achieved) / np.maximum(np.abs(target), 1e-9)) * 100:.2f}%")


if __name__ == "__main__":
    main()
