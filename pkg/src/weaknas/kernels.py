"""JIT-compiled kernels for regression tree fitting and prediction.

These inner loops dominate the runtime of the tree-based predictors
(gradient boosting and random forest), so they are compiled with numba
when available. Set the environment variable ``WEAKNAS_NUMBA=0`` to force
the pure-Python/NumPy fallback; both paths run the identical source, so
results do not depend on the backend.

Trees are stored as flat parallel arrays (``feature``, ``threshold``,
``left``, ``right``, ``value``). ``feature[i] < 0`` marks node ``i`` as a
leaf. Split search is exact greedy over sorted feature values with
deterministic tie-breaking: lowest feature index first, then lowest
threshold.
"""

import os

import numpy as np


def _numba_requested():
    flag = os.environ.get("WEAKNAS_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


NUMBA_ENABLED = False
if _numba_requested():
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:
        pass

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        """No-op replacement for numba.njit (fallback backend)."""
        if args and callable(args[0]):
            return args[0]

        def decorate(fn):
            return fn

        return decorate


# Minimum sum-of-squares improvement for a split to be accepted. Guards
# against splitting constant-target nodes on floating-point noise.
MIN_GAIN = 1e-12


@njit(cache=True)
def grow_tree(X, y, sample_idx, max_depth, min_leaf, max_features, feat_keys):
    """Fit a regression tree by exact greedy squared-error splitting.

    Parameters
    ----------
    X : (n_rows, n_features) float64
        Full feature matrix; the tree trains on the rows named by
        ``sample_idx`` (repeats allowed, e.g. a bootstrap sample).
    y : (n_rows,) float64
        Targets aligned with ``X``.
    sample_idx : (n,) int64
        Row ids composing the training set of this tree.
    max_depth : int
        Depth limit; ``<= 0`` means unlimited.
    min_leaf : int
        Minimum number of samples on each side of a split.
    max_features : int
        Number of candidate features per split. When equal to the total
        feature count no subsampling happens and ``feat_keys`` is unused.
    feat_keys : (n_nodes_cap, n_features) float64
        Pre-drawn random keys; split attempt ``t`` considers the
        ``max_features`` features with the smallest keys in row ``t``.
        Drawing keys outside the kernel keeps the two backends and any
        parallel schedule bit-identical.

    Returns
    -------
    (feature, threshold, left, right, value, n_nodes)
        Flat-array tree representation, trimmed to ``n_nodes``.
    """
    n = sample_idx.size
    d = X.shape[1]
    cap = 2 * n + 1

    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap, np.float64)

    # dense copies of the training rows; positions 0..n-1 name samples
    Xv = np.empty((n, d), np.float64)
    ys = np.empty(n, np.float64)
    for p in range(n):
        r = sample_idx[p]
        ys[p] = y[r]
        for f in range(d):
            Xv[p, f] = X[r, f]

    # presorted sample positions per feature; every node owns the same
    # contiguous segment in all rows of `pos`, kept consistent by stable
    # partitioning at each split
    pos = np.empty((d, n), np.int64)
    for f in range(d):
        pos[f] = np.argsort(Xv[:, f])

    # explicit stack: (node, start, end, depth)
    stack = np.empty((cap, 4), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    sp = 1
    n_nodes = 1
    key_row = 0

    feats = np.empty(d, np.int64)
    is_left = np.empty(n, np.uint8)
    buf = np.empty(n, np.int64)

    while sp > 0:
        sp -= 1
        node = stack[sp, 0]
        start = stack[sp, 1]
        end = stack[sp, 2]
        depth = stack[sp, 3]
        m = end - start

        total = 0.0
        for i in range(start, end):
            total += ys[pos[0, i]]
        value[node] = total / m

        if m < 2 or m < 2 * min_leaf:
            continue
        if max_depth > 0 and depth >= max_depth:
            continue

        # candidate features, ascending ids for deterministic tie-breaks
        if max_features < d:
            keys = feat_keys[key_row]
            key_row += 1
            taken = np.zeros(d, np.uint8)
            for j in range(max_features):
                best_k = np.inf
                best_f = -1
                for f in range(d):
                    if taken[f] == 0 and keys[f] < best_k:
                        best_k = keys[f]
                        best_f = f
                taken[best_f] = 1
                feats[j] = best_f
            nf = max_features
            feats[:nf].sort()
        else:
            for f in range(d):
                feats[f] = f
            nf = d

        base = total * total / m
        best_gain = MIN_GAIN
        best_feat = -1
        best_thr = 0.0

        for j in range(nf):
            f = feats[j]
            left_sum = 0.0
            for i in range(start, end - 1):
                p = pos[f, i]
                left_sum += ys[p]
                v0 = Xv[p, f]
                v1 = Xv[pos[f, i + 1], f]
                if v1 <= v0:
                    continue
                nl = i + 1 - start
                nr = m - nl
                if nl < min_leaf or nr < min_leaf:
                    continue
                rs = total - left_sum
                gain = left_sum * left_sum / nl + rs * rs / nr - base
                if gain > best_gain:
                    best_gain = gain
                    best_feat = f
                    best_thr = 0.5 * (v0 + v1)

        if best_feat < 0:
            continue

        # stable partition of every feature's segment
        n_left = 0
        for i in range(start, end):
            p = pos[best_feat, i]
            if Xv[p, best_feat] <= best_thr:
                is_left[p] = 1
                n_left += 1
            else:
                is_left[p] = 0
        for f in range(d):
            lo = 0
            hi = 0
            for i in range(start, end):
                p = pos[f, i]
                if is_left[p] == 1:
                    pos[f, start + lo] = p
                    lo += 1
                else:
                    buf[hi] = p
                    hi += 1
            for i in range(hi):
                pos[f, start + lo + i] = buf[i]

        feature[node] = best_feat
        threshold[node] = best_thr
        lchild = n_nodes
        rchild = n_nodes + 1
        n_nodes += 2
        left[node] = lchild
        right[node] = rchild

        stack[sp, 0] = rchild
        stack[sp, 1] = start + n_left
        stack[sp, 2] = end
        stack[sp, 3] = depth + 1
        sp += 1
        stack[sp, 0] = lchild
        stack[sp, 1] = start
        stack[sp, 2] = start + n_left
        stack[sp, 3] = depth + 1
        sp += 1

    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes],
            right[:n_nodes], value[:n_nodes], n_nodes)


@njit(cache=True)
def accumulate_tree(feature, threshold, left, right, value, X, scale, out):
    """Add ``scale * tree(X[r])`` to ``out[r]`` for every row ``r``."""
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] += scale * value[node]
