"""Single regression tree built on the flat-array kernels."""

import numpy as np

from .. import kernels


class RegressionTree:
    """Exact-greedy squared-error regression tree.

    Thin wrapper over :func:`weaknas.kernels.grow_tree`; holds the flat
    node arrays and predicts by accumulation.
    """

    def __init__(self, feature, threshold, left, right, value):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value

    @classmethod
    def fit(cls, X, y, sample_idx=None, max_depth=0, min_leaf=1,
            max_features=None, rng=None):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        if sample_idx is None:
            sample_idx = np.arange(X.shape[0], dtype=np.int64)
        else:
            sample_idx = np.asarray(sample_idx, dtype=np.int64)
        d = X.shape[1]
        if max_features is None or max_features >= d:
            max_features = d
            feat_keys = np.zeros((1, d), dtype=np.float64)
        else:
            if rng is None:
                raise ValueError("feature subsampling requires an rng")
            # one key row per potential split attempt
            feat_keys = rng.random((2 * sample_idx.size + 1, d))
        feature, threshold, left, right, value, _ = kernels.grow_tree(
            X, y, sample_idx, max_depth, min_leaf, max_features, feat_keys)
        return cls(feature.copy(), threshold.copy(), left.copy(),
                   right.copy(), value.copy())

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        out = np.zeros(X.shape[0], dtype=np.float64)
        kernels.accumulate_tree(self.feature, self.threshold, self.left,
                                self.right, self.value, X, 1.0, out)
        return out

    def accumulate(self, X, scale, out) -> None:
        kernels.accumulate_tree(self.feature, self.threshold, self.left,
                                self.right, self.value, X, scale, out)

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["feature"], dtype=np.int64),
                   np.asarray(d["threshold"], dtype=np.float64),
                   np.asarray(d["left"], dtype=np.int64),
                   np.asarray(d["right"], dtype=np.int64),
                   np.asarray(d["value"], dtype=np.float64))
