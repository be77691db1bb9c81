"""Progressive weak-predictor search and baseline searchers.

The core loop alternates a sampling stage (rank every unsampled
architecture with the current predictor, draw new candidates from the
predicted top pool) and a learning stage (refit the predictor from
scratch on everything sampled so far). Iteration 1 has no predictor yet,
so its samples are uniform; a run of K iterations with M samples each
therefore costs exactly K * M queries.
"""

import hashlib
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from . import metrics
from . import space as sp
from .benchmark import TabularBenchmark
from .predictors import PredictorConfig, fit_predictor_arrays

STRATEGIES = ("uniform", "linear", "exponential", "nearest")
DIAG_TOP = 50  # size of the "true top" set used for diagnostics


@dataclass(frozen=True)
class SearchConfig:
    iterations: int = 20          # K
    samples_per_iter: int = 100   # M
    top_pool: int = 1000          # N
    strategy: str = "uniform"
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    encoding: str = "onehot"
    signal: str = "val"
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1 or self.samples_per_iter < 1:
            raise ValueError("iterations and samples_per_iter must be >= 1")
        if self.samples_per_iter > self.top_pool:
            raise ValueError("samples_per_iter must not exceed top_pool")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy: {self.strategy!r}")
        if self.signal != "val":
            raise ValueError("search signal must be validation accuracy")


@dataclass
class IterationRecord:
    iteration: int
    new_indices: List[int]
    score_hash: Optional[str]
    top50_hits: int
    top50_fraction: Optional[float]
    tau_top50: Optional[float]
    first_hit_query: Optional[int]


@dataclass
class RunResult:
    method: str
    seed: int
    best_index: int
    best_val_acc: float
    test_acc_of_best: float
    total_queries: int
    query_log: List[int]
    val_log: List[float]
    history: List[IterationRecord]


# --- sampling primitives ---------------------------------------------------

def initial_sample(spec: sp.SpaceSpec, m: int, rng) -> np.ndarray:
    """m distinct architecture indices, uniform without replacement."""
    if m > spec.size:
        raise ValueError("cannot sample more architectures than the space holds")
    return rng.choice(spec.size, size=m, replace=False)


def strategy_weights(pool_size: int, strategy: str) -> np.ndarray:
    """Normalized rank weights over a top pool (rank 0 = best predicted)."""
    ranks = np.arange(1, pool_size + 1, dtype=np.float64)
    if strategy == "uniform":
        w = np.ones(pool_size)
    elif strategy == "linear":
        w = pool_size - ranks + 1
    elif strategy == "exponential":
        # rank-N weight is e^-5 of rank-1
        w = np.exp(-5.0 * ranks / pool_size)
    else:
        raise ValueError(f"no rank weights for strategy {strategy!r}")
    return w / w.sum()


def _weighted_draw_without_replacement(items, weights, m, rng):
    items = list(items)
    w = np.asarray(weights, dtype=np.float64).copy()
    chosen = []
    for _ in range(m):
        p = w / w.sum()
        pick = int(rng.choice(len(items), p=p))
        chosen.append(items.pop(pick))
        w = np.delete(w, pick)
    return chosen


def rank_unsampled(scores: np.ndarray, sampled_mask: np.ndarray) -> np.ndarray:
    """Unsampled indices sorted by predicted score desc, ties broken low."""
    cand = np.flatnonzero(~sampled_mask)
    order = np.argsort(-scores[cand], kind="stable")
    return cand[order]


def sampling_stage(scores, sampled_mask, m, n, strategy, rng) -> List[int]:
    """Draw m new architectures from the predicted top-n pool."""
    ranked = rank_unsampled(scores, sampled_mask)
    if m > ranked.size:
        raise ValueError("fewer unsampled architectures than requested samples")
    pool = ranked[:min(n, ranked.size)]
    if m >= pool.size:
        return [int(i) for i in pool]
    weights = strategy_weights(pool.size, strategy)
    return [int(i) for i in
            _weighted_draw_without_replacement(pool, weights, m, rng)]


def nearest_neighbor_sampling(scores, sampled_mask, known_vals, bench,
                              m, n, rng) -> List[int]:
    """Hill-climbing variant: walk from top-pool starts to local maxima.

    Each walk queries all not-yet-known neighbors of the current
    architecture (charged against the per-iteration budget m), moves to
    the best neighbor by true validation accuracy, and stops at a local
    maximum; remaining budget starts a fresh walk from the top pool.
    """
    spec = bench.spec
    ranked = rank_unsampled(scores, sampled_mask)
    pool = [int(i) for i in ranked[:min(n, ranked.size)]]
    known = dict(known_vals)
    new: List[int] = []

    def query_new(idx):
        if idx in known:
            return
        known[idx] = bench.query(idx, "val")
        new.append(idx)

    while len(new) < m:
        avail = [i for i in pool if i not in known]
        if not avail:
            # pool exhausted; keep the budget accounting intact by
            # falling back to the remaining ranked candidates
            avail = [int(i) for i in ranked if int(i) not in known]
            if not avail:
                break
        start = avail[int(rng.integers(len(avail)))]
        query_new(start)
        current = start
        while len(new) < m:
            nbr_idx = sorted(
                sp.encode_index(spec, a.ops, a.adjacency)
                for a in sp.neighbors(sp.decode(spec, current), spec))
            for v in nbr_idx:
                if v not in known:
                    query_new(v)
                    if len(new) >= m:
                        return new
            best = min(nbr_idx, key=lambda v: (-known[v], v))
            if known[best] > known[current]:
                current = best
            else:
                break  # local maximum
    return new


# --- searchers -------------------------------------------------------------

def _finalize(method, seed, query_log, val_log, bench, history) -> RunResult:
    best_pos = int(np.argmax(val_log))
    best_index = query_log[best_pos]
    return RunResult(
        method=method, seed=seed,
        best_index=best_index,
        best_val_acc=float(val_log[best_pos]),
        test_acc_of_best=float(bench.test_acc[best_index]),
        total_queries=len(query_log),
        query_log=list(query_log), val_log=list(val_log),
        history=history)


def _score_hash(scores: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(scores).tobytes()).hexdigest()[:16]


def run_weak_nas(bench: TabularBenchmark, cfg: SearchConfig) -> RunResult:
    """The progressive loop: sample, query, refit, for K iterations."""
    spec = bench.spec
    size = spec.size
    if cfg.samples_per_iter > size:
        raise ValueError("samples_per_iter exceeds the space size")
    rng = np.random.default_rng(cfg.seed)
    features = bench.features(cfg.encoding)

    n_top = min(DIAG_TOP, size)
    top_set_idx = bench.top_indices(n_top, signal="val")
    top_set = set(int(i) for i in top_set_idx)
    truth_top = bench.val_acc[top_set_idx]

    sampled_mask = np.zeros(size, dtype=bool)
    s_indices: List[int] = []
    s_values: List[float] = []
    known = {}
    history: List[IterationRecord] = []
    scores = None

    for k in range(1, cfg.iterations + 1):
        m_k = min(cfg.samples_per_iter, size - len(s_indices))
        if m_k == 0:
            break
        if k == 1:
            new = [int(i) for i in initial_sample(spec, m_k, rng)]
        elif cfg.strategy == "nearest":
            new = nearest_neighbor_sampling(scores, sampled_mask, known,
                                            bench, m_k, cfg.top_pool, rng)
        else:
            new = sampling_stage(scores, sampled_mask, m_k, cfg.top_pool,
                                 cfg.strategy, rng)

        first_hit = None
        for idx in new:
            val = bench.query(idx, "val")
            s_indices.append(idx)
            s_values.append(val)
            known[idx] = val
            sampled_mask[idx] = True
            if idx == bench.optimum_val_index:
                first_hit = len(s_indices)

        # learning stage: refit from scratch on everything sampled so far;
        # a single sample cannot constrain a regressor, so fall back to
        # flat scores (rank = index order) until a second one arrives
        if len(s_indices) >= 2:
            pred_cfg = replace(cfg.predictor, seed=cfg.predictor.seed * 1009 + k)
            model = fit_predictor_arrays(features[s_indices],
                                         np.array(s_values), pred_cfg)
            scores = model.predict(features)
            score_hash = _score_hash(scores)
        else:
            scores = np.zeros(size)
            score_hash = None

        hits = sum(1 for i in new if i in top_set)
        tau = metrics.kendall_tau(scores[top_set_idx], truth_top) \
            if n_top >= 2 and score_hash is not None else None
        history.append(IterationRecord(
            iteration=k,
            new_indices=list(new),
            score_hash=score_hash,
            top50_hits=hits,
            top50_fraction=hits / len(new) if new else None,
            tau_top50=tau,
            first_hit_query=first_hit))

    return _finalize("weaknas", cfg.seed, s_indices, s_values, bench, history)


def learning_stage(indices, values, features, predictor_cfg: PredictorConfig):
    """Fit a fresh predictor on the enlarged sample set."""
    return fit_predictor_arrays(np.asarray(features)[list(indices)],
                                np.asarray(values, dtype=np.float64),
                                predictor_cfg)


def run_random_search(bench: TabularBenchmark, budget: int, seed: int) -> RunResult:
    """Uniform search without replacement; the reference baseline."""
    if budget > bench.size:
        raise ValueError("budget exceeds the space size")
    rng = np.random.default_rng(seed)
    order = rng.permutation(bench.size)[:budget]
    query_log = [int(i) for i in order]
    val_log = [float(bench.val_acc[i]) for i in query_log]
    return _finalize("random", seed, query_log, val_log, bench, [])


def run_regularized_evolution(bench: TabularBenchmark, budget: int,
                              population: int = 100, tournament: int = 10,
                              seed: int = 0) -> RunResult:
    """Aging evolution: tournament selection, single-edit mutation, FIFO death.

    An architecture is only ever charged one query; a mutation that
    lands on an already-evaluated architecture reuses the cached value.
    """
    if population > budget:
        raise ValueError("population must not exceed the budget")
    if tournament < 1 or tournament > population:
        raise ValueError("tournament size must lie in [1, population]")
    spec = bench.spec
    rng = np.random.default_rng(seed)

    query_log: List[int] = []
    val_log: List[float] = []
    known = {}

    def query(idx):
        if idx not in known:
            known[idx] = bench.query(idx, "val")
            query_log.append(idx)
            val_log.append(known[idx])
        return known[idx]

    pop = [int(i) for i in initial_sample(spec, min(population, budget), rng)]
    for idx in pop:
        query(idx)

    max_steps = 100 * budget
    steps = 0
    while len(query_log) < budget and steps < max_steps:
        steps += 1
        contenders = rng.choice(len(pop), size=min(tournament, len(pop)),
                                replace=False)
        parent = max((pop[int(c)] for c in contenders),
                     key=lambda i: (known[i], -i))
        nbrs = sp.neighbors(sp.decode(spec, parent), spec)
        if not nbrs:
            break
        child_arch = nbrs[int(rng.integers(len(nbrs)))]
        child = sp.encode_index(spec, child_arch.ops, child_arch.adjacency)
        query(child)
        pop.append(child)
        pop.pop(0)

    # stall guard: top up with uniform unseen samples
    if len(query_log) < budget:
        unseen = [i for i in range(bench.size) if i not in known]
        rng.shuffle(unseen)
        for idx in unseen[:budget - len(query_log)]:
            query(idx)

    return _finalize("evolution", seed, query_log, val_log, bench, [])
