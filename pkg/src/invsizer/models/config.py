"""Regressor families and their default hyperparameters."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field


class Family(str, enum.Enum):
    MLP = "mlp"
    TRANSFORMER = "transformer"
    RF = "rf"
    KNN = "knn"
    SVR = "svr"

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, cls):
            return value
        aliases = {"random_forest": "rf", "randomforest": "rf", "forest": "rf",
                   "nn": "knn", "kneighbors": "knn"}
        key = str(value).lower()
        key = aliases.get(key, key)
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown model family {value!r}; expected one of "
                         f"{', '.join(m.value for m in cls)}")


DEFAULTS: dict[Family, dict] = {
    Family.MLP: {"hidden": [200, 300, 500, 500, 300, 200], "epochs": 100, "batch_size": 64,
                 "lr": 1e-3},
    Family.TRANSFORMER: {"d_model": 200, "heads": 2, "ffn_hidden": 200, "layers": 6,
                         "dropout": 0.1, "epochs": 100, "batch_size": 64, "lr": 1e-3},
    Family.RF: {"n_trees": 100, "max_depth": None, "min_samples_leaf": 1, "bootstrap": True},
    Family.KNN: {"k": 5},
    Family.SVR: {"C": 1.0, "epsilon": 0.1, "gamma": None, "tol": 1e-4, "max_iter": 10_000_000},
}


@dataclass(frozen=True)
class RegressorConfig:
    family: Family
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        fam = Family.parse(self.family)
        object.__setattr__(self, "family", fam)
        unknown = set(self.hyperparameters) - set(DEFAULTS[fam])
        if unknown:
            raise ValueError(f"unknown {fam.value} hyperparameters: {sorted(unknown)}")
        merged = {**DEFAULTS[fam], **self.hyperparameters}
        object.__setattr__(self, "hyperparameters", merged)

    @classmethod
    def create(cls, family: str | Family, seed: int = 0, **overrides) -> "RegressorConfig":
        return cls(Family.parse(family), overrides, seed)

    def __getitem__(self, key):
        return self.hyperparameters[key]

    def to_dict(self) -> dict:
        return {"family": self.family.value, "hyperparameters": dict(self.hyperparameters),
                "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "RegressorConfig":
        return cls(Family.parse(d["family"]), dict(d.get("hyperparameters", {})), int(d.get("seed", 0)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)
