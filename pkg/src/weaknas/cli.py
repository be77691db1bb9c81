"""Command-line front end: benchmark generation, multi-seed search runs,
and machine-readable result emission.

Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
"""

import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import click
import numpy as np

from . import benchmark as bm
from . import metrics
from . import search as srch
from . import space as sp
from .predictors import ForestParams, GbrtParams, MlpParams, PredictorConfig

SCHEMA_VERSION = 1


@click.group()
def main():
    """Progressive weak-predictor architecture search."""


def _fail(message, code=1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


# --- gen-bench -------------------------------------------------------------

@main.command("gen-bench")
@click.option("--kind", type=click.Choice(["fixed", "variable"]), default="fixed")
@click.option("--edges", type=int, default=6, help="Edges per cell (fixed kind).")
@click.option("--ops", type=int, default=5, help="Operator choices.")
@click.option("--nodes", type=int, default=7, help="Max nodes (variable kind).")
@click.option("--max-edges", type=int, default=9, help="Max edges (variable kind).")
@click.option("--clusters", type=int, default=4)
@click.option("--noise", type=float, default=0.5)
@click.option("--seed", type=int, default=0)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
def cmd_gen_bench(kind, edges, ops, nodes, max_edges, clusters, noise, seed, output):
    """Generate a synthetic clustered tabular benchmark file."""
    try:
        if kind == "fixed":
            spec = sp.SpaceSpec(kind="fixed", num_edges=edges, num_ops=ops)
        else:
            spec = sp.SpaceSpec(kind="variable", max_nodes=nodes,
                                max_edges=max_edges, op_set_size=ops)
        if clusters < 1:
            raise bm.BenchmarkError("clusters must be >= 1")
    except (sp.SpaceError, bm.BenchmarkError) as exc:
        raise click.UsageError(str(exc))
    try:
        bench = bm.generate_synthetic_benchmark(spec, clusters, noise, seed)
        bm.save_benchmark(bench, output)
    except (sp.SpaceError, bm.BenchmarkError) as exc:
        raise click.UsageError(str(exc))
    except OSError as exc:
        _fail(str(exc))
    click.echo(f"wrote {output}: {spec.kind} space, {spec.size} architectures")
    click.echo(f"optimum val index {bench.optimum_val_index} "
               f"({bench.val_acc[bench.optimum_val_index]:.4f}%), "
               f"optimum test index {bench.optimum_test_index} "
               f"({bench.test_acc[bench.optimum_test_index]:.4f}%)")


# --- search ----------------------------------------------------------------

_WORKER_BENCH = None
_WORKER_TASK = None


def _worker_init(bench_path, task):
    global _WORKER_BENCH, _WORKER_TASK
    _WORKER_BENCH = bm.load_benchmark(bench_path)
    if task["method"] == "weaknas":
        _WORKER_BENCH.features(task["search_cfg"].encoding)
    _WORKER_TASK = task


def _worker_run(seed):
    return _run_one(_WORKER_BENCH, _WORKER_TASK, seed)


def _run_one(bench, task, seed):
    method = task["method"]
    if method == "weaknas":
        cfg = task["search_cfg"]
        cfg = srch.SearchConfig(
            iterations=cfg.iterations, samples_per_iter=cfg.samples_per_iter,
            top_pool=cfg.top_pool, strategy=cfg.strategy,
            predictor=cfg.predictor, encoding=cfg.encoding, seed=seed)
        return srch.run_weak_nas(bench, cfg)
    if method == "random":
        return srch.run_random_search(bench, task["budget"], seed)
    return srch.run_regularized_evolution(
        bench, task["budget"], population=task["population"],
        tournament=task["tournament"], seed=seed)


def _run_row(result, bench):
    return {
        "seed": result.seed,
        "total_queries": result.total_queries,
        "best_index": result.best_index,
        "best_val_acc": result.best_val_acc,
        "test_acc": result.test_acc_of_best,
        "test_regret": metrics.test_regret(result, bench),
        "queries_to_optimal": metrics.queries_to_optimal(result, bench),
        "iterations": [
            {
                "iteration": rec.iteration,
                "top50_hits": rec.top50_hits,
                "top50_fraction": rec.top50_fraction,
                "tau_top50": rec.tau_top50,
                "score_hash": rec.score_hash,
                "first_hit_query": rec.first_hit_query,
            }
            for rec in result.history
        ],
        "val_log": result.val_log,
    }


def _aggregate_dict(results, bench):
    agg = metrics.aggregate(results, bench)
    return {
        "n_runs": agg.n_runs,
        "test_acc_mean": agg.test_acc.mean,
        "test_acc_sd": agg.test_acc.sd,
        "test_regret_mean": agg.test_regret.mean,
        "test_regret_sd": agg.test_regret.sd,
        "queries_to_optimal_mean":
            agg.queries_to_optimal.mean if agg.queries_to_optimal else None,
        "queries_to_optimal_sd":
            agg.queries_to_optimal.sd if agg.queries_to_optimal else None,
        "n_never_optimal": agg.n_never_optimal,
        "top50_fraction_curve": agg.top50_fraction_curve,
        "tau_curve": agg.tau_curve,
    }


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _write_csv(path, doc):
    n_iters = max((len(r["iterations"]) for r in doc["runs"]), default=0)
    fields = ["schema_version", "method", "seed", "total_queries",
              "best_index", "best_val_acc", "test_acc", "test_regret",
              "queries_to_optimal"]
    for k in range(1, n_iters + 1):
        fields += [f"iter{k}_top50_frac", f"iter{k}_tau"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for r in doc["runs"]:
            row = {
                "schema_version": SCHEMA_VERSION,
                "method": doc["method"],
                "seed": r["seed"],
                "total_queries": r["total_queries"],
                "best_index": r["best_index"],
                "best_val_acc": r["best_val_acc"],
                "test_acc": r["test_acc"],
                "test_regret": r["test_regret"],
                "queries_to_optimal": r["queries_to_optimal"],
            }
            for k, it in enumerate(r["iterations"], start=1):
                row[f"iter{k}_top50_frac"] = it["top50_fraction"]
                row[f"iter{k}_tau"] = it["tau_top50"]
            writer.writerow(row)
        agg = doc["aggregate"]
        row = {
            "schema_version": SCHEMA_VERSION,
            "method": doc["method"],
            "seed": "aggregate",
            "total_queries": "",
            "best_index": "",
            "best_val_acc": "",
            "test_acc": agg["test_acc_mean"],
            "test_regret": agg["test_regret_mean"],
            "queries_to_optimal": agg["queries_to_optimal_mean"],
        }
        for k in range(1, n_iters + 1):
            row[f"iter{k}_top50_frac"] = agg["top50_fraction_curve"][k - 1]
            row[f"iter{k}_tau"] = agg["tau_curve"][k - 1]
        writer.writerow(row)


# config-file key for each option whose flag spelling differs
CONFIG_KEYS = {"iterations": "K", "samples_per_iter": "M", "top_pool": "N",
               "fmt": "format"}


def _cfg_default(ctx, name, config, value):
    """Prefer an explicit CLI flag, then the config file, then the default."""
    src = ctx.get_parameter_source(name)
    if src is not None and src.name != "DEFAULT":
        return value
    key = CONFIG_KEYS.get(name, name.replace("_", "-"))
    if key in config:
        return config[key]
    return config.get(name, value)


@main.command("search")
@click.option("--bench", "bench_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["weaknas", "random", "evolution"]),
              default="weaknas")
@click.option("--K", "iterations", type=int, default=20)
@click.option("--M", "samples_per_iter", type=int, default=100)
@click.option("--N", "top_pool", type=int, default=1000)
@click.option("--strategy",
              type=click.Choice(["uniform", "linear", "exponential", "nearest"]),
              default="uniform")
@click.option("--predictor", type=click.Choice(["gbrt", "mlp", "forest"]),
              default="gbrt")
@click.option("--encoding", type=click.Choice(["onehot", "adjacency"]),
              default=None, help="Defaults to the space's natural encoding.")
@click.option("--trees", type=int, default=1000, help="Tree count (gbrt/forest).")
@click.option("--depth", type=int, default=None,
              help="Max tree depth; default 6 for gbrt, unlimited for forest.")
@click.option("--shrinkage", type=float, default=0.1)
@click.option("--mlp-hidden", type=str, default="1000,1000,1000,1000")
@click.option("--mlp-epochs", type=int, default=200)
@click.option("--budget", type=int, default=None,
              help="Query budget for random/evolution baselines.")
@click.option("--population", type=int, default=100)
@click.option("--tournament", type=int, default=10)
@click.option("--runs", type=int, default=1)
@click.option("--seed", type=int, default=0, help="Base seed; run i uses seed+i.")
@click.option("--jobs", type=int, default=None,
              help="Worker processes; default $WEAKNAS_JOBS or 1.")
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None,
              help="Defaults to the output extension.")
@click.option("--no-timestamp", is_flag=True, default=False)
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON file mirroring these flags.")
@click.pass_context
def cmd_search(ctx, bench_path, method, iterations, samples_per_iter, top_pool,
               strategy, predictor, encoding, trees, depth, shrinkage,
               mlp_hidden, mlp_epochs, budget, population, tournament, runs,
               seed, jobs, output, fmt, no_timestamp, config_path):
    """Run one search method for several seeds and write results."""
    config = {}
    if config_path:
        with open(config_path) as fh:
            config = json.load(fh)
    method = _cfg_default(ctx, "method", config, method)
    iterations = _cfg_default(ctx, "iterations", config, iterations)
    samples_per_iter = _cfg_default(ctx, "samples_per_iter", config, samples_per_iter)
    top_pool = _cfg_default(ctx, "top_pool", config, top_pool)
    strategy = _cfg_default(ctx, "strategy", config, strategy)
    predictor = _cfg_default(ctx, "predictor", config, predictor)
    encoding = _cfg_default(ctx, "encoding", config, encoding)
    trees = _cfg_default(ctx, "trees", config, trees)
    depth = _cfg_default(ctx, "depth", config, depth)
    shrinkage = _cfg_default(ctx, "shrinkage", config, shrinkage)
    mlp_hidden = _cfg_default(ctx, "mlp_hidden", config, mlp_hidden)
    mlp_epochs = _cfg_default(ctx, "mlp_epochs", config, mlp_epochs)
    budget = _cfg_default(ctx, "budget", config, budget)
    population = _cfg_default(ctx, "population", config, population)
    tournament = _cfg_default(ctx, "tournament", config, tournament)
    runs = _cfg_default(ctx, "runs", config, runs)
    seed = _cfg_default(ctx, "seed", config, seed)
    jobs = _cfg_default(ctx, "jobs", config, jobs)
    fmt = _cfg_default(ctx, "fmt", config, fmt)

    if runs < 1:
        raise click.UsageError("--runs must be >= 1")
    if jobs is None:
        jobs = int(os.environ.get("WEAKNAS_JOBS", "1"))
    if fmt is None:
        fmt = "json" if output.endswith(".json") else "csv"

    try:
        bench = bm.load_benchmark(bench_path)
    except (bm.BenchmarkError, sp.SpaceError, OSError) as exc:
        raise click.UsageError(str(exc))

    if encoding is None:
        encoding = bm.default_encoding(bench.spec)

    task = {"method": method}
    config_out = {"method": method, "runs": runs, "base_seed": seed}
    try:
        if method == "weaknas":
            sp.feature_dim(bench.spec, encoding)  # encoding/space match
            if isinstance(mlp_hidden, str):
                hidden = tuple(int(h) for h in mlp_hidden.split(",") if h)
            else:
                hidden = tuple(mlp_hidden)
            pred_cfg = PredictorConfig(
                kind=predictor,
                gbrt=GbrtParams(num_trees=trees,
                                max_depth=6 if depth is None else depth,
                                shrinkage=shrinkage),
                forest=ForestParams(num_trees=trees,
                                    max_depth=0 if depth is None else depth),
                mlp=MlpParams(hidden=hidden, epochs=mlp_epochs),
                seed=0)
            search_cfg = srch.SearchConfig(
                iterations=iterations, samples_per_iter=samples_per_iter,
                top_pool=top_pool, strategy=strategy, predictor=pred_cfg,
                encoding=encoding, seed=seed)
            if iterations * samples_per_iter > bench.size:
                raise click.UsageError(
                    "query budget K*M exceeds the space size")
            task["search_cfg"] = search_cfg
            config_out.update({
                "K": iterations, "M": samples_per_iter, "N": top_pool,
                "strategy": strategy, "predictor": predictor,
                "encoding": encoding, "trees": trees, "depth": depth,
                "shrinkage": shrinkage, "mlp_hidden": list(hidden),
                "mlp_epochs": mlp_epochs})
        else:
            if budget is None:
                raise click.UsageError(f"--budget is required for {method}")
            if budget > bench.size:
                raise click.UsageError("budget exceeds the space size")
            task["budget"] = budget
            config_out["budget"] = budget
            if method == "evolution":
                task["population"] = population
                task["tournament"] = tournament
                config_out.update({"population": population,
                                   "tournament": tournament})
    except (sp.SpaceError, ValueError) as exc:
        raise click.UsageError(str(exc))

    seeds = [seed + i for i in range(runs)]
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs, initializer=_worker_init,
                                     initargs=(bench_path, task)) as pool:
                results = list(pool.map(_worker_run, seeds))
        else:
            results = [_run_one(bench, task, s) for s in seeds]

        doc = {
            "schema_version": SCHEMA_VERSION,
            "method": method,
            "benchmark": bench_path,
            "config": config_out,
            "runs": [_run_row(r, bench) for r in results],
            "aggregate": _aggregate_dict(results, bench),
        }
        if not no_timestamp:
            doc["generated_at"] = datetime.now(timezone.utc).isoformat()
        if fmt == "json":
            _write_json(output, doc)
        else:
            _write_csv(output, doc)
    except click.UsageError:
        raise
    except Exception as exc:
        _fail(str(exc))
    click.echo(f"wrote {output}: {runs} runs of {method}, "
               f"mean test regret "
               f"{doc['aggregate']['test_regret_mean']:.4f}%")


# --- report ----------------------------------------------------------------

def _load_results(path):
    if path.endswith(".csv"):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"{path}: empty results file")
        if any(int(r["schema_version"]) != SCHEMA_VERSION for r in rows):
            raise ValueError(f"{path}: unknown schema version")
        agg_rows = [r for r in rows if r["seed"] == "aggregate"]
        runs = [r for r in rows if r["seed"] != "aggregate"]
        agg = agg_rows[0] if agg_rows else {}
        return {
            "method": rows[0]["method"],
            "runs": runs,
            "aggregate": {
                "n_runs": len(runs),
                "test_acc_mean": float(agg["test_acc"]) if agg else None,
                "test_regret_mean": float(agg["test_regret"]) if agg else None,
                "queries_to_optimal_mean":
                    float(agg["queries_to_optimal"])
                    if agg and agg["queries_to_optimal"] else None,
                "n_never_optimal": None,
            },
            "has_val_logs": False,
        }
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: unknown schema version "
                         f"{doc.get('schema_version')!r}")
    doc["has_val_logs"] = all("val_log" in r for r in doc["runs"])
    return doc


def _best_acc_curve(doc):
    """Mean/SD of the running-best validation accuracy per query count."""
    logs = [np.maximum.accumulate(np.asarray(r["val_log"], dtype=np.float64))
            for r in doc["runs"]]
    n = min(len(log) for log in logs)
    mat = np.stack([log[:n] for log in logs])
    mean = mat.mean(axis=0)
    sd = mat.std(axis=0, ddof=1) if mat.shape[0] > 1 else np.zeros(n)
    return mean, sd


@main.command("report")
@click.argument("files", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--curves", "curves_dir", type=click.Path(file_okay=False),
              default=None, help="Write best-accuracy-vs-samples curve CSVs.")
def cmd_report(files, curves_dir):
    """Print an aggregate comparison table for one or more results files."""
    try:
        docs = [_load_results(path) for path in files]
    except (ValueError, OSError, KeyError) as exc:
        _fail(str(exc))

    header = (f"{'method':<12} {'file':<28} {'runs':>5} {'test_acc':>9} "
              f"{'regret':>8} {'q2o_mean':>9} {'missed':>7}")
    click.echo(header)
    click.echo("-" * len(header))
    for path, doc in zip(files, docs):
        agg = doc["aggregate"]
        q2o = agg.get("queries_to_optimal_mean")
        missed = agg.get("n_never_optimal")
        click.echo(
            f"{doc['method']:<12} {os.path.basename(path)[:28]:<28} "
            f"{agg.get('n_runs') or len(doc['runs']):>5} "
            f"{agg.get('test_acc_mean') if agg.get('test_acc_mean') is not None else float('nan'):>9.4f} "
            f"{agg.get('test_regret_mean') if agg.get('test_regret_mean') is not None else float('nan'):>8.4f} "
            f"{q2o if q2o is not None else float('nan'):>9.1f} "
            f"{missed if missed is not None else '-':>7}")

    if curves_dir:
        os.makedirs(curves_dir, exist_ok=True)
        for path, doc in zip(files, docs):
            if not doc.get("has_val_logs"):
                _fail(f"{path}: curves need JSON results with per-run logs")
            mean, sd = _best_acc_curve(doc)
            out = os.path.join(
                curves_dir,
                os.path.splitext(os.path.basename(path))[0] + "_curve.csv")
            with open(out, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["x", "y", "y_lo", "y_hi"])
                for x in range(mean.size):
                    writer.writerow([x + 1, mean[x], mean[x] - sd[x],
                                     mean[x] + sd[x]])
            click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
