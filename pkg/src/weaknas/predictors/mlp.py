"""Fully-connected MLP regressor trained with mini-batch Adam.

Hidden layers use ReLU (a linear variant exists for gradient testing),
the output is linear, and the loss is mean squared error. Targets are
min-max scaled to [0, 1] internally and unscaled at predict time; when
all targets coincide the scale degenerates and predictions are exactly
that constant.
"""

import numpy as np


def _init_params(dims, rng):
    params = []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        w = rng.normal(0.0, np.sqrt(2.0 / d_in), size=(d_in, d_out))
        b = np.zeros(d_out)
        params.append([w, b])
    return params


class MlpRegressor:
    def __init__(self, hidden=(1000, 1000, 1000, 1000), epochs=200,
                 step_size=1e-3, batch_size=32, activation="relu", seed=0):
        if epochs < 1 or batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if activation not in ("relu", "linear"):
            raise ValueError(f"unknown activation: {activation!r}")
        self.hidden = tuple(hidden)
        self.epochs = epochs
        self.step_size = step_size
        self.batch_size = batch_size
        self.activation = activation
        self.seed = seed
        self.params_ = None
        self.loss_trace = []
        self._lo = 0.0
        self._range = 1.0

    # --- forward / backward -----------------------------------------------

    def _forward(self, X):
        """Returns per-layer pre-activations and activations."""
        acts = [X]
        zs = []
        a = X
        n_layers = len(self.params_)
        for i, (w, b) in enumerate(self.params_):
            z = a @ w + b
            zs.append(z)
            if i < n_layers - 1 and self.activation == "relu":
                a = np.maximum(z, 0.0)
            else:
                a = z
            acts.append(a)
        return zs, acts

    def _loss_and_grads(self, X, y):
        """MSE loss and gradients w.r.t. every parameter."""
        n = X.shape[0]
        zs, acts = self._forward(X)
        pred = acts[-1][:, 0]
        delta = (2.0 / n) * (pred - y)[:, None]
        grads = [None] * len(self.params_)
        for i in range(len(self.params_) - 1, -1, -1):
            a_prev = acts[i]
            grads[i] = [a_prev.T @ delta, delta.sum(axis=0)]
            if i > 0:
                delta = delta @ self.params_[i][0].T
                if self.activation == "relu":
                    delta = delta * (zs[i - 1] > 0.0)
        loss = float(np.mean((pred - y) ** 2))
        return loss, grads

    # --- training ----------------------------------------------------------

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n, d = X.shape
        lo, hi = float(np.min(y)), float(np.max(y))
        self._lo = lo
        self._range = hi - lo
        self.loss_trace = []
        rng = np.random.default_rng(self.seed)
        dims = (d,) + self.hidden + (1,)
        self.params_ = _init_params(dims, rng)
        if self._range < 1e-12:
            # constant targets: unscaling maps any output to lo exactly
            return self
        y_scaled = (y - lo) / self._range

        m_state = [[np.zeros_like(w), np.zeros_like(b)] for w, b in self.params_]
        v_state = [[np.zeros_like(w), np.zeros_like(b)] for w, b in self.params_]
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        step = 0
        for _ in range(self.epochs):
            order = rng.permutation(n)
            epoch_loss = 0.0
            n_batches = 0
            for lo_i in range(0, n, self.batch_size):
                batch = order[lo_i:lo_i + self.batch_size]
                loss, grads = self._loss_and_grads(X[batch], y_scaled[batch])
                epoch_loss += loss
                n_batches += 1
                step += 1
                c1 = 1.0 - beta1**step
                c2 = 1.0 - beta2**step
                for p, g, ms, vs in zip(self.params_, grads, m_state, v_state):
                    for k in range(2):
                        ms[k] = beta1 * ms[k] + (1.0 - beta1) * g[k]
                        vs[k] = beta2 * vs[k] + (1.0 - beta2) * g[k] ** 2
                        p[k] -= self.step_size * (ms[k] / c1) / (
                            np.sqrt(vs[k] / c2) + eps)
            self.loss_trace.append(epoch_loss / n_batches)
        return self

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self._range < 1e-12:
            return np.full(X.shape[0], self._lo)
        _, acts = self._forward(X)
        return self._lo + acts[-1][:, 0] * self._range

    # --- gradient verification ---------------------------------------------

    def gradient_check(self, X, y, step=1e-5) -> float:
        """Max relative error of analytic vs central-difference gradients.

        Intended for small networks only; perturbs every parameter twice.
        """
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.params_ is None:
            rng = np.random.default_rng(self.seed)
            dims = (X.shape[1],) + self.hidden + (1,)
            # finite differences are invalid across a ReLU kink, so pick
            # an evaluation point with every pre-activation clear of zero
            # (small random biases; retry on the measure-zero misses)
            for _ in range(20):
                self.params_ = _init_params(dims, rng)
                for _, b in self.params_:
                    b += rng.normal(0.0, 0.1, size=b.shape)
                zs, _ = self._forward(X)
                if min(np.min(np.abs(z)) for z in zs) > 10.0 * step:
                    break
        _, grads = self._loss_and_grads(X, y)
        worst = 0.0
        for layer, (w, b) in enumerate(self.params_):
            for k, arr in enumerate((w, b)):
                flat = arr.reshape(-1)
                gflat = grads[layer][k].reshape(-1)
                for j in range(flat.size):
                    orig = flat[j]
                    flat[j] = orig + step
                    lp, _ = self._loss_and_grads(X, y)
                    flat[j] = orig - step
                    lm, _ = self._loss_and_grads(X, y)
                    flat[j] = orig
                    numeric = (lp - lm) / (2.0 * step)
                    denom = max(abs(gflat[j]) + abs(numeric), 1e-8)
                    worst = max(worst, abs(gflat[j] - numeric) / denom)
        return worst

    def to_dict(self):
        return {
            "kind": "mlp",
            "lo": self._lo,
            "range": self._range,
            "weights": [[w.tolist(), b.tolist()] for w, b in self.params_],
        }

    @classmethod
    def from_dict(cls, d):
        model = cls(hidden=tuple(len(b) for _, b in d["weights"][:-1]))
        model.params_ = [[np.asarray(w), np.asarray(b)] for w, b in d["weights"]]
        model._lo = d["lo"]
        model._range = d["range"]
        return model
