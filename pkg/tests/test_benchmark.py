import json

import numpy as np
import pytest

import weaknas as w
from weaknas import benchmark as bm
from weaknas import space as sp

SMALL = sp.SpaceSpec(kind="fixed", num_edges=2, num_ops=3)


def test_synthetic_deterministic():
    a = w.generate_synthetic_benchmark(SMALL, 2, 0.3, seed=42)
    b = w.generate_synthetic_benchmark(SMALL, 2, 0.3, seed=42)
    assert np.array_equal(a.val_acc, b.val_acc)
    assert np.array_equal(a.test_acc, b.test_acc)
    c = w.generate_synthetic_benchmark(SMALL, 2, 0.3, seed=43)
    assert not np.array_equal(a.val_acc, c.val_acc)


def test_synthetic_noise_free_single_peak():
    spec = sp.SpaceSpec(kind="fixed", num_edges=4, num_ops=3)
    bench = w.generate_synthetic_benchmark(spec, 1, 0.0, seed=9)
    feats = sp.encode_all(spec, "onehot")
    # the optimum must be (one of) the architectures closest to the center;
    # recover the center as the argmax itself and check monotonicity in distance
    center = feats[bench.optimum_val_index]
    d2 = np.sum((feats - center) ** 2, axis=1)
    order = np.argsort(d2, kind="stable")
    acc_by_dist = bench.test_acc[order]
    for a, b in zip(d2[order], d2[order][1:]):
        assert a <= b
    # grouped by distance shell, mean accuracy strictly decreases
    shells = {}
    for dist, acc in zip(d2, bench.test_acc):
        shells.setdefault(round(float(dist), 9), []).append(acc)
    keys = sorted(shells)
    means = [np.mean(shells[k]) for k in keys]
    assert all(x > y for x, y in zip(means, means[1:]))


def test_synthetic_unique_val_optimum_under_zero_noise():
    bench = w.generate_synthetic_benchmark(SMALL, 1, 0.0, seed=1)
    top = np.max(bench.val_acc)
    assert np.sum(bench.val_acc == top) == 1


def test_synthetic_rejects_bad_cluster_count():
    with pytest.raises(bm.BenchmarkError):
        w.generate_synthetic_benchmark(SMALL, 0, 0.1, seed=0)


def test_neighbor_autocorrelation_on_big_space():
    spec = sp.SpaceSpec(kind="fixed", num_edges=6, num_ops=5)
    bench = w.generate_synthetic_benchmark(spec, 4, 0.5, seed=7)
    rng = np.random.default_rng(0)
    picks = rng.integers(0, spec.size, size=400)
    nbr_diffs = []
    rand_diffs = []
    for idx in picks:
        arch = sp.decode(spec, int(idx))
        nbrs = sp.neighbors(arch, spec)
        other = nbrs[int(rng.integers(len(nbrs)))]
        nbr_diffs.append(abs(bench.val_acc[idx] - bench.val_acc[other.index]))
        rand_idx = int(rng.integers(spec.size))
        rand_diffs.append(abs(bench.val_acc[idx] - bench.val_acc[rand_idx]))
    assert np.mean(nbr_diffs) < np.mean(rand_diffs)


def test_val_and_test_argmax_can_disagree():
    disagree = any(
        (b := w.generate_synthetic_benchmark(SMALL, 2, 1.5, seed=s))
        .optimum_val_index != b.optimum_test_index
        for s in range(20))
    assert disagree


def test_query_lookup_and_purity():
    bench = w.generate_synthetic_benchmark(SMALL, 2, 0.4, seed=5)
    opt = bench.optimum_val_index
    assert bench.query(opt, "val") == np.max(bench.val_acc)
    assert bench.query(3, "val") == bench.query(3, "val")
    with pytest.raises(bm.BenchmarkError):
        bench.query(SMALL.size, "val")
    with pytest.raises(bm.BenchmarkError):
        bench.query(0, "train")


def test_save_load_roundtrip(tmp_path):
    bench = w.generate_synthetic_benchmark(SMALL, 2, 0.4, seed=5)
    path = tmp_path / "bench.json"
    w.save_benchmark(bench, str(path))
    loaded = w.load_benchmark(str(path))
    assert loaded.spec == bench.spec
    assert np.allclose(loaded.val_acc, bench.val_acc)
    assert np.allclose(loaded.test_acc, bench.test_acc)
    assert loaded.optimum_val_index == bench.optimum_val_index


def _write_doc(tmp_path, doc):
    path = tmp_path / "bench.json"
    path.write_text(json.dumps(doc))
    return str(path)


def _fixture_doc():
    # hand-picked accuracies; argmax val at 5, argmax test at 3
    vals = [50, 60, 55, 70, 65, 80, 40, 45, 52]
    tests = [51, 59, 56, 79, 64, 78, 41, 44, 53]
    return {
        "kind": "fixed", "num_edges": 2, "num_ops": 3, "size": 9,
        "records": [
            {"index": i, "ops": list(sp.decode(SMALL, i).ops),
             "val_acc": float(v), "test_acc": float(t)}
            for i, (v, t) in enumerate(zip(vals, tests))
        ],
    }


def test_load_fixture_with_known_argmax(tmp_path):
    bench = w.load_benchmark(_write_doc(tmp_path, _fixture_doc()))
    assert bench.size == 9
    assert bench.optimum_val_index == 5
    assert bench.optimum_test_index == 3
    assert bench.query(5, "val") == 80


def test_load_averages_multi_trial_records(tmp_path):
    doc = _fixture_doc()
    doc["records"][0]["val_acc"] = [40.0, 60.0, 50.0]
    bench = w.load_benchmark(_write_doc(tmp_path, doc))
    assert bench.query(0, "val") == 50.0


def test_load_missing_index_names_it(tmp_path):
    doc = _fixture_doc()
    del doc["records"][4]
    with pytest.raises(bm.BenchmarkError, match="index 4"):
        w.load_benchmark(_write_doc(tmp_path, doc))


def test_load_duplicate_index(tmp_path):
    doc = _fixture_doc()
    doc["records"][4]["index"] = 3
    with pytest.raises(bm.BenchmarkError, match="duplicate"):
        w.load_benchmark(_write_doc(tmp_path, doc))


def test_load_rejects_out_of_range_accuracy(tmp_path):
    doc = _fixture_doc()
    doc["records"][2]["test_acc"] = 104.0
    with pytest.raises(bm.BenchmarkError, match=r"\[0, 100\]"):
        w.load_benchmark(_write_doc(tmp_path, doc))


def test_load_rejects_inconsistent_ops(tmp_path):
    doc = _fixture_doc()
    doc["records"][2]["ops"] = [0, 0]
    with pytest.raises(bm.BenchmarkError, match="inconsistent"):
        w.load_benchmark(_write_doc(tmp_path, doc))


def test_top_indices_ties_break_low():
    vals = np.array([50.0, 80.0, 80.0, 10.0])
    spec = sp.SpaceSpec(kind="fixed", num_edges=2, num_ops=2)
    bench = bm.TabularBenchmark(spec=spec, val_acc=vals, test_acc=vals)
    assert bench.top_indices(2).tolist() == [1, 2]
    assert bench.optimum_val_index == 1
