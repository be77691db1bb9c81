"""Compare the numba tree kernels against the pure-numpy fallback.

Runs the same GBRT / random-forest fits in two subprocesses, one with
numba enabled and one with WEAKNAS_NUMBA=0, reports wall times, and
checks that the predictions agree exactly.

Usage: python3 benchmarks/bench_backends.py
"""

import json
import os
import subprocess
import sys
import tempfile
import textwrap

WORKLOAD = textwrap.dedent("""
    import json, sys, time
    import numpy as np
    from weaknas import kernels
    from weaknas.predictors import ForestRegressor, GbrtRegressor

    rng = np.random.default_rng(0)
    X = rng.random((500, 30))
    y = 20.0 * np.sin(X.sum(axis=1)) + 60.0 + rng.normal(0, 0.5, 500)
    probe = rng.random((2000, 30))

    # warm-up compiles the kernels so the timing is steady state
    GbrtRegressor(num_trees=2, max_depth=3, seed=0).fit(X[:50], y[:50])

    t0 = time.perf_counter()
    gbrt = GbrtRegressor(num_trees=100, max_depth=6, seed=0).fit(X, y)
    t_gbrt = time.perf_counter() - t0

    t0 = time.perf_counter()
    forest = ForestRegressor(num_trees=50, seed=0).fit(X, y)
    t_forest = time.perf_counter() - t0

    out = {
        "numba": kernels.NUMBA_ENABLED,
        "gbrt_s": t_gbrt,
        "forest_s": t_forest,
        "gbrt_pred": gbrt.predict(probe).tolist(),
        "forest_pred": forest.predict(probe).tolist(),
    }
    json.dump(out, open(sys.argv[1], "w"))
""")


def run_backend(numba_flag):
    env = dict(os.environ, WEAKNAS_NUMBA="1" if numba_flag else "0")
    with tempfile.TemporaryDirectory() as tmp:
        script = os.path.join(tmp, "workload.py")
        out = os.path.join(tmp, "out.json")
        with open(script, "w") as fh:
            fh.write(WORKLOAD)
        subprocess.run([sys.executable, script, out], check=True, env=env)
        return json.load(open(out))


def main():
    numba = run_backend(True)
    plain = run_backend(False)
    if not numba["numba"]:
        print("warning: numba unavailable, both runs used the fallback")

    print(f"{'workload':<22} {'numba':>9} {'fallback':>9} {'speedup':>8}")
    for key, label in (("gbrt_s", "gbrt 100x depth-6"),
                       ("forest_s", "forest 50 trees")):
        ratio = plain[key] / numba[key]
        print(f"{label:<22} {numba[key]:>8.3f}s {plain[key]:>8.3f}s "
              f"{ratio:>7.1f}x")

    for key in ("gbrt_pred", "forest_pred"):
        if numba[key] != plain[key]:
            print(f"MISMATCH: {key} differs between backends")
            sys.exit(1)
    print("predictions identical across backends")


if __name__ == "__main__":
    main()
