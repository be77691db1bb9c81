"""Random forest regression: bagged trees with per-split feature subsets."""

import numpy as np

from .tree import RegressionTree


class ForestRegressor:
    """Ensemble prediction is the exact arithmetic mean over trees.

    Each tree gets its own RNG stream derived from (seed, tree index),
    so building trees in any order (or in parallel) yields the same
    forest.
    """

    def __init__(self, num_trees=1000, max_depth=0, feature_fraction=1 / 3,
                 bootstrap=True, min_leaf=1, seed=0):
        if num_trees < 1:
            raise ValueError("num_trees must be >= 1")
        if not 0.0 < feature_fraction <= 1.0:
            raise ValueError("feature_fraction must lie in (0, 1]")
        self.num_trees = num_trees
        self.max_depth = max_depth
        self.feature_fraction = feature_fraction
        self.bootstrap = bootstrap
        self.min_leaf = min_leaf
        self.seed = seed
        self.trees_ = []
        self.loss_trace = []

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n, d = X.shape
        if self.feature_fraction >= 1.0:
            max_features = d
        else:
            max_features = max(1, int(self.feature_fraction * d))
        self.trees_ = []
        self.loss_trace = []
        running = np.zeros(n, dtype=np.float64)
        for t in range(self.num_trees):
            rng = np.random.default_rng([self.seed, t])
            if self.bootstrap:
                sample_idx = rng.integers(0, n, size=n)
            else:
                sample_idx = np.arange(n)
            tree = RegressionTree.fit(X, y, sample_idx=sample_idx,
                                      max_depth=self.max_depth,
                                      min_leaf=self.min_leaf,
                                      max_features=max_features, rng=rng)
            self.trees_.append(tree)
            running += tree.predict(X)
            self.loss_trace.append(float(np.mean((running / (t + 1) - y) ** 2)))
        return self

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        out = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees_:
            tree.accumulate(X, 1.0, out)
        return out / len(self.trees_)

    def to_dict(self):
        return {"kind": "forest", "trees": [t.to_dict() for t in self.trees_]}

    @classmethod
    def from_dict(cls, d):
        model = cls(num_trees=max(len(d["trees"]), 1))
        model.trees_ = [RegressionTree.from_dict(t) for t in d["trees"]]
        return model
