"""Gradient boosted regression trees with squared-error loss.

Stage-wise fitting: the model starts at the target mean and each round
adds ``shrinkage`` times a tree fit to the current residuals. With
shrinkage in (0, 2) and leaf values equal to residual means, training
MSE is non-increasing per round.
"""

import numpy as np

from .tree import RegressionTree


class GbrtRegressor:
    def __init__(self, num_trees=1000, max_depth=6, shrinkage=0.1,
                 min_leaf=1, seed=0):
        if num_trees < 1 or min_leaf < 1:
            raise ValueError("num_trees and min_leaf must be >= 1")
        if not 0.0 < shrinkage <= 1.0:
            raise ValueError("shrinkage must lie in (0, 1]")
        self.num_trees = num_trees
        self.max_depth = max_depth
        self.shrinkage = shrinkage
        self.min_leaf = min_leaf
        self.seed = seed
        self.base_ = 0.0
        self.trees_ = []
        self.loss_trace = []

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        self.base_ = float(np.mean(y))
        self.trees_ = []
        self.loss_trace = []
        residual = y - self.base_
        for _ in range(self.num_trees):
            tree = RegressionTree.fit(X, residual, max_depth=self.max_depth,
                                      min_leaf=self.min_leaf)
            residual = residual - self.shrinkage * tree.predict(X)
            self.trees_.append(tree)
            self.loss_trace.append(float(np.mean(residual**2)))
        return self

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        out = np.full(X.shape[0], self.base_, dtype=np.float64)
        for tree in self.trees_:
            tree.accumulate(X, self.shrinkage, out)
        return out

    def to_dict(self):
        return {
            "kind": "gbrt",
            "base": self.base_,
            "shrinkage": self.shrinkage,
            "trees": [t.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d):
        model = cls(num_trees=max(len(d["trees"]), 1), shrinkage=d["shrinkage"])
        model.base_ = d["base"]
        model.trees_ = [RegressionTree.from_dict(t) for t in d["trees"]]
        return model
