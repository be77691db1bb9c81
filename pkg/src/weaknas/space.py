"""Finite architecture search spaces, encodings and neighborhoods.

Two families of spaces are supported:

* ``fixed``: a cell with a fixed DAG, one operator choice per edge.
  Space size is ``num_ops ** num_edges`` and an architecture is just the
  tuple of operator ids, indexed by positional base-``num_ops`` digits
  (least significant digit = edge 0).
* ``variable``: a cell with up to ``max_nodes`` nodes, an arbitrary
  upper-triangular adjacency with at most ``max_edges`` edges, and one
  operator choice per intermediate node. Node 0 is the input, node
  ``max_nodes - 1`` the output. Architectures are indexed by ranking the
  adjacency bitmask (ascending integer value among masks with at most
  ``max_edges`` bits) combined with the base-``op_set_size`` digits of
  the intermediate-node operators.

Both indexings are bijections between ``[0, size)`` and structures.
"""

from dataclasses import dataclass
from math import comb
from typing import Iterator, Optional, Tuple

import numpy as np

# Full-space enumeration (and whole-space predictor scoring) must stay
# tractable; refuse spaces beyond this size.
SPACE_SIZE_GUARD = 10**7


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class SpaceSpec:
    """Parameters of a finite architecture space."""

    kind: str  # "fixed" | "variable"
    num_edges: int = 0
    num_ops: int = 0
    max_nodes: int = 0
    max_edges: int = 0
    op_set_size: int = 0

    def __post_init__(self):
        if self.kind == "fixed":
            if self.num_edges < 1 or self.num_ops < 1:
                raise SpaceError("fixed space needs num_edges >= 1 and num_ops >= 1")
        elif self.kind == "variable":
            if self.max_nodes < 2:
                raise SpaceError("variable space needs max_nodes >= 2")
            if self.max_edges < 0 or self.op_set_size < 1:
                raise SpaceError("variable space needs max_edges >= 0 and op_set_size >= 1")
        else:
            raise SpaceError(f"unknown space kind: {self.kind!r}")

    @property
    def num_pairs(self) -> int:
        return self.max_nodes * (self.max_nodes - 1) // 2

    @property
    def num_intermediate(self) -> int:
        return max(self.max_nodes - 2, 0)

    @property
    def size(self) -> int:
        if self.kind == "fixed":
            return self.num_ops**self.num_edges
        adj = sum(comb(self.num_pairs, e) for e in range(self.max_edges + 1))
        return adj * self.op_set_size**self.num_intermediate


@dataclass(frozen=True)
class Architecture:
    """One point of a search space.

    ``ops`` holds per-edge operator ids for fixed spaces and per
    intermediate node for variable spaces. ``adjacency`` (variable spaces
    only) is an upper-triangular 0/1 matrix stored as a tuple of row
    tuples so the dataclass stays hashable.
    """

    index: int
    ops: Tuple[int, ...]
    adjacency: Optional[Tuple[Tuple[int, ...], ...]] = None

    def adjacency_matrix(self) -> np.ndarray:
        if self.adjacency is None:
            raise SpaceError("architecture has no adjacency matrix")
        return np.array(self.adjacency, dtype=np.int64)


# --- upper-triangular pair <-> bit position -------------------------------

def _pair_bits(max_nodes: int):
    """(i, j) pairs with i < j in row-major order; bit t = t-th pair."""
    return [(i, j) for i in range(max_nodes) for j in range(i + 1, max_nodes)]


def _mask_rank(mask: int, n_bits: int, max_ones: int) -> int:
    """Rank of ``mask`` among masks with popcount <= max_ones, ascending."""
    rank = 0
    ones = 0
    for b in range(n_bits - 1, -1, -1):
        if mask >> b & 1:
            budget = max_ones - ones
            rank += sum(comb(b, j) for j in range(0, budget + 1))
            ones += 1
    return rank


def _mask_unrank(rank: int, n_bits: int, max_ones: int) -> int:
    mask = 0
    ones = 0
    for b in range(n_bits - 1, -1, -1):
        budget = max_ones - ones
        below = sum(comb(b, j) for j in range(0, budget + 1))
        if rank >= below:
            rank -= below
            mask |= 1 << b
            ones += 1
    return mask


def _mask_to_adjacency(mask: int, spec: SpaceSpec) -> Tuple[Tuple[int, ...], ...]:
    adj = [[0] * spec.max_nodes for _ in range(spec.max_nodes)]
    for t, (i, j) in enumerate(_pair_bits(spec.max_nodes)):
        if mask >> t & 1:
            adj[i][j] = 1
    return tuple(tuple(row) for row in adj)


def _adjacency_to_mask(adjacency, spec: SpaceSpec) -> int:
    mat = np.asarray(adjacency)
    if mat.shape != (spec.max_nodes, spec.max_nodes):
        raise SpaceError("adjacency has wrong shape")
    if np.any(np.tril(mat) != 0):
        raise SpaceError("adjacency must be strictly upper-triangular")
    mask = 0
    for t, (i, j) in enumerate(_pair_bits(spec.max_nodes)):
        if mat[i, j]:
            mask |= 1 << t
    return mask


# --- index <-> structure ---------------------------------------------------

def decode(spec: SpaceSpec, index: int) -> Architecture:
    """Build the architecture with the given dense index."""
    if not 0 <= index < spec.size:
        raise SpaceError(f"index {index} out of range for space of size {spec.size}")
    if spec.kind == "fixed":
        ops = []
        rem = index
        for _ in range(spec.num_edges):
            ops.append(rem % spec.num_ops)
            rem //= spec.num_ops
        return Architecture(index=index, ops=tuple(ops))

    op_combos = spec.op_set_size**spec.num_intermediate
    adj_rank, op_rank = divmod(index, op_combos)
    mask = _mask_unrank(adj_rank, spec.num_pairs, spec.max_edges)
    ops = []
    rem = op_rank
    for _ in range(spec.num_intermediate):
        ops.append(rem % spec.op_set_size)
        rem //= spec.op_set_size
    return Architecture(index=index, ops=tuple(ops),
                        adjacency=_mask_to_adjacency(mask, spec))


def encode_index(spec: SpaceSpec, ops, adjacency=None) -> int:
    """Dense index of the structure (inverse of :func:`decode`)."""
    if spec.kind == "fixed":
        if len(ops) != spec.num_edges:
            raise SpaceError("ops length must equal num_edges")
        index = 0
        for e in range(spec.num_edges - 1, -1, -1):
            op = ops[e]
            if not 0 <= op < spec.num_ops:
                raise SpaceError(f"op id {op} out of range")
            index = index * spec.num_ops + op
        return index

    if adjacency is None:
        raise SpaceError("variable space needs an adjacency matrix")
    if len(ops) != spec.num_intermediate:
        raise SpaceError("ops length must equal max_nodes - 2")
    mask = _adjacency_to_mask(adjacency, spec)
    if bin(mask).count("1") > spec.max_edges:
        raise SpaceError("too many edges")
    op_rank = 0
    for i in range(spec.num_intermediate - 1, -1, -1):
        op = ops[i]
        if not 0 <= op < spec.op_set_size:
            raise SpaceError(f"op id {op} out of range")
        op_rank = op_rank * spec.op_set_size + op
    adj_rank = _mask_rank(mask, spec.num_pairs, spec.max_edges)
    return adj_rank * spec.op_set_size**spec.num_intermediate + op_rank


def enumerate_space(spec: SpaceSpec) -> Iterator[Architecture]:
    """Yield every architecture once, in index order."""
    if spec.size > SPACE_SIZE_GUARD:
        raise SpaceError(
            f"space of size {spec.size} exceeds the enumeration guard "
            f"({SPACE_SIZE_GUARD})")
    for index in range(spec.size):
        yield decode(spec, index)


# --- feature encodings -----------------------------------------------------

def feature_dim(spec: SpaceSpec, encoding: str) -> int:
    if encoding == "onehot":
        if spec.kind != "fixed":
            raise SpaceError("one-hot encoding requires a fixed space")
        return spec.num_edges * spec.num_ops
    if encoding == "adjacency":
        if spec.kind != "variable":
            raise SpaceError("adjacency encoding requires a variable space")
        return spec.max_nodes**2 + spec.max_nodes * (spec.op_set_size + 2)
    raise SpaceError(f"unknown encoding: {encoding!r}")


def encode_one_hot(arch: Architecture, spec: SpaceSpec) -> np.ndarray:
    """One hot per edge: slot ``e * num_ops + ops[e]`` is set."""
    if spec.kind != "fixed":
        raise SpaceError("one-hot encoding requires a fixed space")
    vec = np.zeros(spec.num_edges * spec.num_ops, dtype=np.float64)
    for e, op in enumerate(arch.ops):
        vec[e * spec.num_ops + op] = 1.0
    return vec


def encode_adjacency(arch: Architecture, spec: SpaceSpec) -> np.ndarray:
    """Flattened adjacency plus per-node operator one-hots.

    Layout: row-major ``max_nodes x max_nodes`` adjacency, then for each
    node a vector of width ``op_set_size + 2``. The two extra slots mark
    the input and output nodes. Nodes with no incident edge are treated
    as absent and encoded as all zeros.
    """
    if spec.kind != "variable":
        raise SpaceError("adjacency encoding requires a variable space")
    mat = arch.adjacency_matrix()
    if np.any(np.tril(mat) != 0):
        raise SpaceError("adjacency must be strictly upper-triangular")
    width = spec.op_set_size + 2
    vec = np.zeros(spec.max_nodes**2 + spec.max_nodes * width, dtype=np.float64)
    vec[: spec.max_nodes**2] = mat.reshape(-1)
    degree = mat.sum(axis=0) + mat.sum(axis=1)
    base = spec.max_nodes**2
    for node in range(spec.max_nodes):
        if degree[node] == 0:
            continue
        if node == 0:
            slot = spec.op_set_size  # input marker
        elif node == spec.max_nodes - 1:
            slot = spec.op_set_size + 1  # output marker
        else:
            slot = arch.ops[node - 1]
        vec[base + node * width + slot] = 1.0
    return vec


def encode(arch: Architecture, spec: SpaceSpec, encoding: str) -> np.ndarray:
    if encoding == "onehot":
        return encode_one_hot(arch, spec)
    if encoding == "adjacency":
        return encode_adjacency(arch, spec)
    raise SpaceError(f"unknown encoding: {encoding!r}")


def encode_all(spec: SpaceSpec, encoding: str) -> np.ndarray:
    """Feature matrix of the whole space, row ``i`` = architecture ``i``."""
    out = np.empty((spec.size, feature_dim(spec, encoding)), dtype=np.float64)
    for arch in enumerate_space(spec):
        out[arch.index] = encode(arch, spec, encoding)
    return out


# --- neighborhoods ---------------------------------------------------------

def neighbors(arch: Architecture, spec: SpaceSpec):
    """All architectures at edit distance exactly one.

    Fixed spaces: change one edge's operator. Variable spaces: change one
    intermediate node's operator, or toggle one edge subject to the
    max_edges budget. The relation is symmetric and never contains the
    architecture itself.
    """
    result = []
    if spec.kind == "fixed":
        for e in range(spec.num_edges):
            for op in range(spec.num_ops):
                if op == arch.ops[e]:
                    continue
                ops = list(arch.ops)
                ops[e] = op
                result.append(decode(spec, encode_index(spec, ops)))
        return result

    mask = _adjacency_to_mask(arch.adjacency, spec)
    n_edges = bin(mask).count("1")
    for i in range(spec.num_intermediate):
        for op in range(spec.op_set_size):
            if op == arch.ops[i]:
                continue
            ops = list(arch.ops)
            ops[i] = op
            result.append(decode(spec, encode_index(spec, ops, arch.adjacency)))
    for t in range(spec.num_pairs):
        flipped = mask ^ (1 << t)
        if bin(flipped).count("1") > spec.max_edges:
            continue
        adj = _mask_to_adjacency(flipped, spec)
        result.append(decode(spec, encode_index(spec, arch.ops, adj)))
    return result
