"""Quantitative diagnostics: regret, queries-to-optimal, Kendall tau-b,
error EDFs, top-N hit fractions and multi-run aggregates."""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np


def test_regret(result, bench) -> float:
    """Max test accuracy in the benchmark minus the selected model's."""
    best = float(bench.test_acc[bench.optimum_test_index])
    return best - float(bench.test_acc[result.best_index])


def queries_to_optimal(result, bench, signal: str = "val") -> Optional[int]:
    """1-based query-log position of the first hit on the optimum, or None."""
    target = bench.optimum_val_index if signal == "val" else bench.optimum_test_index
    for pos, idx in enumerate(result.query_log, start=1):
        if idx == target:
            return pos
    return None


def kendall_tau(pred, truth) -> Optional[float]:
    """Tie-corrected Kendall tau-b via O(n^2) pair counting.

    Returns None when either list has zero variance (tau undefined).
    """
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    n = pred.size
    if n != truth.size or n < 2:
        raise ValueError("need two equal-length lists of at least 2 scores")
    concordant = discordant = 0
    ties_x = ties_y = 0
    for i in range(n):
        dx = pred[i] - pred[i + 1:]
        dy = truth[i] - truth[i + 1:]
        s = dx * dy
        concordant += int(np.sum(s > 0))
        discordant += int(np.sum(s < 0))
        ties_x += int(np.sum(dx == 0))
        ties_y += int(np.sum(dy == 0))
    n0 = n * (n - 1) // 2
    denom = np.sqrt(float(n0 - ties_x) * float(n0 - ties_y))
    if denom == 0.0:
        return None
    return (concordant - discordant) / denom


def edf(errors, grid) -> np.ndarray:
    """Empirical distribution function of errors evaluated on a grid."""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.size == 0:
        raise ValueError("errors must be nonempty")
    grid = np.asarray(grid, dtype=np.float64)
    return np.array([np.mean(errors <= g) for g in grid])


def top_n_hit_fraction(new_samples, bench, n_top: int) -> Optional[float]:
    """Fraction of the new samples inside the true top-n by validation."""
    if len(new_samples) == 0:
        return None
    top = set(int(i) for i in bench.top_indices(n_top, signal="val"))
    hits = sum(1 for i in new_samples if int(i) in top)
    return hits / len(new_samples)


@dataclass
class Stats:
    mean: float
    sd: float
    min: float
    max: float

    @classmethod
    def of(cls, values) -> "Stats":
        arr = np.asarray(values, dtype=np.float64)
        sd = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
        return cls(mean=float(np.mean(arr)), sd=sd,
                   min=float(np.min(arr)), max=float(np.max(arr)))


@dataclass
class RunSetSummary:
    n_runs: int
    test_acc: Stats
    test_regret: Stats
    queries_to_optimal: Optional[Stats]  # over runs that hit the optimum
    n_never_optimal: int
    top50_fraction_curve: List[float]
    tau_curve: List[Optional[float]]


def aggregate(results, bench) -> RunSetSummary:
    """Summarize a set of runs of one configuration on one benchmark.

    Runs that never query the optimum are excluded from the
    queries-to-optimal statistics but reported via ``n_never_optimal``.
    """
    if not results:
        raise ValueError("need at least one run")
    accs = [float(bench.test_acc[r.best_index]) for r in results]
    regrets = [test_regret(r, bench) for r in results]
    q2o = [queries_to_optimal(r, bench) for r in results]
    hits = [q for q in q2o if q is not None]

    n_iters = max((len(r.history) for r in results), default=0)
    frac_curve = []
    tau_curve = []
    for k in range(n_iters):
        fracs = [r.history[k].top50_fraction for r in results
                 if len(r.history) > k and r.history[k].top50_fraction is not None]
        taus = [r.history[k].tau_top50 for r in results
                if len(r.history) > k and r.history[k].tau_top50 is not None]
        frac_curve.append(float(np.mean(fracs)) if fracs else None)
        tau_curve.append(float(np.mean(taus)) if taus else None)

    return RunSetSummary(
        n_runs=len(results),
        test_acc=Stats.of(accs),
        test_regret=Stats.of(regrets),
        queries_to_optimal=Stats.of(hits) if hits else None,
        n_never_optimal=len(results) - len(hits),
        top50_fraction_curve=frac_curve,
        tau_curve=tau_curve,
    )
