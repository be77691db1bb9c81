"""Interchangeable accuracy regressors: MLP, GBRT and random forest."""

import json
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .forest import ForestRegressor
from .gbrt import GbrtRegressor
from .mlp import MlpRegressor
from .tree import RegressionTree

__all__ = [
    "TrainingPair", "MlpParams", "GbrtParams", "ForestParams",
    "PredictorConfig", "fit_predictor", "pairs_to_arrays",
    "save_model", "load_model",
    "RegressionTree", "GbrtRegressor", "ForestRegressor", "MlpRegressor",
]


@dataclass(frozen=True)
class TrainingPair:
    features: Tuple[float, ...]
    target: float


@dataclass(frozen=True)
class MlpParams:
    hidden: Tuple[int, ...] = (1000, 1000, 1000, 1000)
    epochs: int = 200
    step_size: float = 1e-3
    batch_size: int = 32

    def __post_init__(self):
        if any(h < 1 for h in self.hidden) or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("MLP sizes, epochs and batch_size must be >= 1")


@dataclass(frozen=True)
class GbrtParams:
    num_trees: int = 1000
    max_depth: int = 6
    shrinkage: float = 0.1
    min_leaf: int = 1

    def __post_init__(self):
        if self.num_trees < 1 or self.min_leaf < 1:
            raise ValueError("num_trees and min_leaf must be >= 1")
        if not 0.0 < self.shrinkage <= 1.0:
            raise ValueError("shrinkage must lie in (0, 1]")


@dataclass(frozen=True)
class ForestParams:
    num_trees: int = 1000
    max_depth: int = 0  # 0 = unlimited
    feature_fraction: float = 1 / 3
    bootstrap: bool = True

    def __post_init__(self):
        if self.num_trees < 1:
            raise ValueError("num_trees must be >= 1")
        if not 0.0 < self.feature_fraction <= 1.0:
            raise ValueError("feature_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class PredictorConfig:
    kind: str = "gbrt"  # "mlp" | "gbrt" | "forest"
    mlp: MlpParams = field(default_factory=MlpParams)
    gbrt: GbrtParams = field(default_factory=GbrtParams)
    forest: ForestParams = field(default_factory=ForestParams)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("mlp", "gbrt", "forest"):
            raise ValueError(f"unknown predictor kind: {self.kind!r}")


def pairs_to_arrays(pairs):
    X = np.array([p.features for p in pairs], dtype=np.float64)
    y = np.array([p.target for p in pairs], dtype=np.float64)
    return X, y


def make_predictor(config: PredictorConfig):
    if config.kind == "gbrt":
        g = config.gbrt
        return GbrtRegressor(num_trees=g.num_trees, max_depth=g.max_depth,
                             shrinkage=g.shrinkage, min_leaf=g.min_leaf,
                             seed=config.seed)
    if config.kind == "forest":
        f = config.forest
        return ForestRegressor(num_trees=f.num_trees, max_depth=f.max_depth,
                               feature_fraction=f.feature_fraction,
                               bootstrap=f.bootstrap, seed=config.seed)
    m = config.mlp
    return MlpRegressor(hidden=m.hidden, epochs=m.epochs,
                        step_size=m.step_size, batch_size=m.batch_size,
                        seed=config.seed)


def fit_predictor(pairs, config: PredictorConfig):
    """Train a fresh regressor of the configured kind on (features, target) pairs."""
    if len(pairs) < 2:
        raise ValueError("need at least 2 training pairs")
    X, y = pairs_to_arrays(pairs)
    return fit_predictor_arrays(X, y, config)


def fit_predictor_arrays(X, y, config: PredictorConfig):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("features must be a 2-d array aligned with targets")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 training pairs")
    if np.any(~np.isfinite(X)) or np.any(~np.isfinite(y)):
        raise ValueError("features and targets must be finite")
    return make_predictor(config).fit(X, y)


def save_model(model, path: str) -> None:
    """Debug-only JSON dump; the format is not stability-guaranteed."""
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh)


def load_model(path: str):
    with open(path) as fh:
        d = json.load(fh)
    cls = {"gbrt": GbrtRegressor, "forest": ForestRegressor, "mlp": MlpRegressor}
    return cls[d["kind"]].from_dict(d)
