"""Tabular architecture-to-accuracy benchmarks.

A benchmark stores validation and test accuracy for every architecture
of a space, so a "training run" is just a table lookup. Benchmarks are
either loaded from a JSON file (see ``docs/benchmark_format.md``) or
generated synthetically with a clustered accuracy landscape.
"""

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import space as sp

SCHEMA_FIELDS = ("kind", "num_ops", "size")


class BenchmarkError(ValueError):
    pass


@dataclass
class TabularBenchmark:
    """Complete architecture -> (val accuracy, test accuracy) mapping."""

    spec: sp.SpaceSpec
    val_acc: np.ndarray   # (size,) percent
    test_acc: np.ndarray  # (size,) percent
    optimum_val_index: int = field(init=False)
    optimum_test_index: int = field(init=False)

    def __post_init__(self):
        self.val_acc = np.asarray(self.val_acc, dtype=np.float64)
        self.test_acc = np.asarray(self.test_acc, dtype=np.float64)
        size = self.spec.size
        if self.val_acc.shape != (size,) or self.test_acc.shape != (size,):
            raise BenchmarkError("accuracy tables must cover the whole space")
        for name, acc in (("val", self.val_acc), ("test", self.test_acc)):
            if np.any(~np.isfinite(acc)) or acc.min() < 0 or acc.max() > 100:
                raise BenchmarkError(f"{name} accuracies must lie in [0, 100]")
        # np.argmax returns the first maximum, i.e. ties break low
        self.optimum_val_index = int(np.argmax(self.val_acc))
        self.optimum_test_index = int(np.argmax(self.test_acc))
        self._feature_cache = {}

    @property
    def size(self) -> int:
        return self.spec.size

    def query(self, index: int, signal: str = "val") -> float:
        """Accuracy lookup; pure, query accounting is the caller's job."""
        if not 0 <= index < self.size:
            raise BenchmarkError(f"architecture index {index} out of range")
        if signal == "val":
            return float(self.val_acc[index])
        if signal == "test":
            return float(self.test_acc[index])
        raise BenchmarkError(f"unknown signal: {signal!r}")

    def features(self, encoding: str) -> np.ndarray:
        """Whole-space feature matrix, cached per encoding."""
        if encoding not in self._feature_cache:
            self._feature_cache[encoding] = sp.encode_all(self.spec, encoding)
        return self._feature_cache[encoding]

    def top_indices(self, n: int, signal: str = "val") -> np.ndarray:
        """Indices of the true top-n, best first, ties broken low."""
        acc = self.val_acc if signal == "val" else self.test_acc
        # sort by (-acc, index): stable mergesort on index order
        order = np.argsort(-acc, kind="stable")
        return order[:n]


def default_encoding(spec: sp.SpaceSpec) -> str:
    return "onehot" if spec.kind == "fixed" else "adjacency"


def generate_synthetic_benchmark(spec: sp.SpaceSpec, num_clusters: int,
                                 noise_sd: float, seed: int,
                                 base: float = 50.0,
                                 amplitude_range=(13.0, 13.6),
                                 bandwidth_range=(4.5, 5.5)) -> TabularBenchmark:
    """Clustered synthetic benchmark with a known landscape.

    Accuracy is a sum of Gaussian radial bumps in encoding space centred
    on randomly chosen architectures, plus i.i.d. Gaussian noise (drawn
    independently for the validation and test signals), clipped to
    [0, 100]. Architectures near a centre therefore score alike, which is
    exactly the clustered landscape the progressive search exploits. The
    validation optimum is made unique by an epsilon perturbation.
    """
    if num_clusters < 1:
        raise BenchmarkError("num_clusters must be >= 1")
    if spec.size > sp.SPACE_SIZE_GUARD:
        raise BenchmarkError("space too large for synthetic generation")

    rng = np.random.default_rng(seed)
    feats = sp.encode_all(spec, default_encoding(spec))
    centers = feats[rng.choice(spec.size, size=num_clusters, replace=False)]
    amplitudes = rng.uniform(*amplitude_range, size=num_clusters)
    bandwidths = rng.uniform(*bandwidth_range, size=num_clusters)

    clean = np.full(spec.size, base, dtype=np.float64)
    for c in range(num_clusters):
        d2 = np.sum((feats - centers[c]) ** 2, axis=1)
        clean += amplitudes[c] * np.exp(-d2 / bandwidths[c] ** 2)

    val = clean + rng.normal(0.0, noise_sd, size=spec.size)
    test = clean + rng.normal(0.0, noise_sd, size=spec.size)
    val = np.clip(val, 0.0, 100.0)
    test = np.clip(test, 0.0, 100.0)

    # enforce a unique validation optimum (exact ties happen at noise 0)
    top = np.max(val)
    ties = np.flatnonzero(val == top)
    if ties.size > 1:
        if top <= 100.0 - 1e-6:
            val[ties[0]] += 1e-6
        else:
            val[ties[1:]] -= 1e-6

    return TabularBenchmark(spec=spec, val_acc=val, test_acc=test)


# --- file format -----------------------------------------------------------

def save_benchmark(bench: TabularBenchmark, path: str) -> None:
    """Write the JSON tabular benchmark file format."""
    spec = bench.spec
    header = {"kind": spec.kind, "size": spec.size}
    if spec.kind == "fixed":
        header["num_edges"] = spec.num_edges
        header["num_ops"] = spec.num_ops
    else:
        header["max_nodes"] = spec.max_nodes
        header["max_edges"] = spec.max_edges
        header["num_ops"] = spec.op_set_size
    records = []
    for arch in sp.enumerate_space(spec):
        rec = {
            "index": arch.index,
            "ops": list(arch.ops),
            "val_acc": float(bench.val_acc[arch.index]),
            "test_acc": float(bench.test_acc[arch.index]),
        }
        if arch.adjacency is not None:
            rec["adjacency"] = [b for row in arch.adjacency for b in row]
        records.append(rec)
    doc = {**header, "records": records}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=None, separators=(",", ":"))
        fh.write("\n")


def _spec_from_header(doc) -> sp.SpaceSpec:
    kind = doc.get("kind")
    if kind == "fixed":
        return sp.SpaceSpec(kind="fixed", num_edges=int(doc["num_edges"]),
                            num_ops=int(doc["num_ops"]))
    if kind == "variable":
        return sp.SpaceSpec(kind="variable", max_nodes=int(doc["max_nodes"]),
                            max_edges=int(doc["max_edges"]),
                            op_set_size=int(doc["num_ops"]))
    raise BenchmarkError(f"unknown benchmark kind: {kind!r}")


def _mean_acc(value, what: str, pos: int) -> float:
    """Accept a single float or a per-trial list; return the mean."""
    if isinstance(value, (int, float)):
        values = [float(value)]
    elif isinstance(value, list) and value and all(
            isinstance(v, (int, float)) for v in value):
        values = [float(v) for v in value]
    else:
        raise BenchmarkError(f"record {pos}: malformed {what}")
    mean = sum(values) / len(values)
    if not 0.0 <= mean <= 100.0:
        raise BenchmarkError(f"record {pos}: {what} {mean} outside [0, 100]")
    return mean


def load_benchmark(path: str) -> TabularBenchmark:
    """Load and fully validate a tabular benchmark file.

    Errors name the offending record's position in the ``records`` array
    and the architecture index involved.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BenchmarkError(f"{path}: invalid JSON at line {exc.lineno}") from exc

    for key in SCHEMA_FIELDS:
        if key not in doc:
            raise BenchmarkError(f"{path}: missing header field {key!r}")
    spec = _spec_from_header(doc)
    if int(doc["size"]) != spec.size:
        raise BenchmarkError(
            f"{path}: header size {doc['size']} != computed space size {spec.size}")

    records = doc.get("records")
    if not isinstance(records, list):
        raise BenchmarkError(f"{path}: missing records array")

    val = np.full(spec.size, np.nan)
    test = np.full(spec.size, np.nan)
    for pos, rec in enumerate(records):
        if not isinstance(rec, dict) or "index" not in rec:
            raise BenchmarkError(f"record {pos}: malformed record")
        index = rec["index"]
        if not isinstance(index, int) or not 0 <= index < spec.size:
            raise BenchmarkError(f"record {pos}: index {index!r} out of range")
        if not np.isnan(val[index]):
            raise BenchmarkError(f"record {pos}: duplicate index {index}")
        arch = sp.decode(spec, index)
        if "ops" in rec and tuple(rec["ops"]) != arch.ops:
            raise BenchmarkError(
                f"record {pos}: ops {rec['ops']} inconsistent with index {index}")
        if spec.kind == "variable" and "adjacency" in rec:
            flat = [b for row in arch.adjacency for b in row]
            if list(rec["adjacency"]) != flat:
                raise BenchmarkError(
                    f"record {pos}: adjacency inconsistent with index {index}")
        val[index] = _mean_acc(rec["val_acc"], "val_acc", pos)
        test[index] = _mean_acc(rec["test_acc"], "test_acc", pos)

    missing = np.flatnonzero(np.isnan(val))
    if missing.size:
        raise BenchmarkError(
            f"{path}: missing {missing.size} architectures, first missing "
            f"index {int(missing[0])}")
    return TabularBenchmark(spec=spec, val_acc=val, test_acc=test)
