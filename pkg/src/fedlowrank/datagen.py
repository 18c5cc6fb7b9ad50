"""Synthetic federated datasets (signal-plus-noise) and matrix partitioning.

The synthetic generator builds a global matrix as a rank-r* signal
X = U diag(signal) V^T (orthonormal factors from QR of Gaussian blocks)
plus i.i.d. Gaussian noise, then splits it row-wise across clients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import DenseMatrix, gaussian, orthonormalize
from .seeding import derive_seed

PARTITION_MODES = ("row-split", "by-label", "random")


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape and spectrum of a synthetic signal-plus-noise federation."""

    num_clients: int
    rows_per_client: int
    dim: int
    true_rank: int
    signal_values: tuple[float, ...]
    noise_std: float
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "signal_values", tuple(float(v) for v in self.signal_values))
        n = self.num_clients * self.rows_per_client
        if self.num_clients < 1 or self.rows_per_client < 1 or self.dim < 1:
            raise ValueError("num_clients, rows_per_client and dim must be >= 1")
        if not 1 <= self.true_rank <= min(n, self.dim):
            raise ValueError(
                f"true_rank must be in [1, min(n, d)] = [1, {min(n, self.dim)}]"
            )
        if len(self.signal_values) != self.true_rank:
            raise ValueError("signal_values length must equal true_rank")
        if any(v <= 0 for v in self.signal_values):
            raise ValueError("signal_values must be strictly positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")


@dataclass(frozen=True)
class FederatedDataset:
    """N row-shards of a global matrix, all sharing the column count."""

    shards: tuple[DenseMatrix, ...]
    name: str = "dataset"
    partition: str = "row-split"

    def __post_init__(self) -> None:
        object.__setattr__(self, "shards", tuple(self.shards))
        if not self.shards:
            raise ValueError("a federated dataset needs at least one shard")
        d = self.shards[0].cols
        if any(s.cols != d for s in self.shards):
            raise ValueError("all shards must share the same column count")
        if self.partition not in PARTITION_MODES:
            raise ValueError(f"unknown partition mode {self.partition!r}")

    @property
    def num_clients(self) -> int:
        return len(self.shards)

    @property
    def dim(self) -> int:
        return self.shards[0].cols

    @property
    def total_rows(self) -> int:
        return sum(s.rows for s in self.shards)

    def concatenated(self) -> DenseMatrix:
        """Vertical concatenation of all shards (the global matrix)."""
        return DenseMatrix(np.vstack([s.ndarray for s in self.shards]))


def _shard_sizes(n: int, num_clients: int) -> list[int]:
    # Remainder rows go one-per-client starting from client 0.
    base, extra = divmod(n, num_clients)
    return [base + (1 if i < extra else 0) for i in range(num_clients)]


def _split_rows(matrix: np.ndarray, num_clients: int, name: str, mode: str) -> FederatedDataset:
    sizes = _shard_sizes(matrix.shape[0], num_clients)
    if min(sizes) < 1:
        raise ValueError(
            f"cannot split {matrix.shape[0]} rows across {num_clients} clients"
        )
    offsets = np.cumsum([0] + sizes)
    shards = [
        DenseMatrix(matrix[offsets[i]:offsets[i + 1]]) for i in range(num_clients)
    ]
    return FederatedDataset(shards=tuple(shards), name=name, partition=mode)


def generate_synthetic(spec: SyntheticSpec) -> FederatedDataset:
    """Build S = X + E and split it row-wise into equal client shards.

    X = U diag(signal_values) V^T with U, V orthonormalized Gaussian blocks
    (only the first true_rank columns of the orthogonal factors matter, so
    only those are generated); E has i.i.d. N(0, noise_std^2) entries.
    Fully determined by spec.seed.
    """
    n = spec.num_clients * spec.rows_per_client
    u = orthonormalize(gaussian(n, spec.true_rank, derive_seed(spec.seed, "synthetic-u")))
    v = orthonormalize(gaussian(spec.dim, spec.true_rank, derive_seed(spec.seed, "synthetic-v")))
    x = (u.ndarray * np.asarray(spec.signal_values)) @ v.ndarray.T
    if spec.noise_std > 0:
        noise = gaussian(n, spec.dim, derive_seed(spec.seed, "synthetic-noise"))
        s = x + spec.noise_std * noise.ndarray
    else:
        s = x
    return _split_rows(s, spec.num_clients, name="synthetic", mode="row-split")


def partition(
    s_rows: DenseMatrix,
    labels: np.ndarray | list[int] | None,
    num_clients: int,
    mode: str,
    seed: int = 0,
) -> FederatedDataset:
    """Split a matrix's rows into row-disjoint, exhaustive client shards.

    row-split: contiguous blocks preserving row order.
    by-label:  all rows of one label land on the same client (labels are
               assigned to clients round-robin in sorted label order);
               requires at least `num_clients` distinct labels.
    random:    seeded shuffle, then near-equal contiguous blocks.
    """
    if num_clients < 1:
        raise ValueError("num_clients must be >= 1")
    if mode not in PARTITION_MODES:
        raise ValueError(f"unknown partition mode {mode!r}")
    m = s_rows.ndarray

    if mode == "row-split":
        return _split_rows(m, num_clients, name="partitioned", mode=mode)

    if mode == "random":
        rng = np.random.Generator(np.random.Philox(key=derive_seed(seed, "partition")))
        perm = rng.permutation(m.shape[0])
        return _split_rows(m[perm], num_clients, name="partitioned", mode=mode)

    # by-label
    if labels is None:
        raise ValueError("by-label partitioning requires labels")
    lab = np.asarray(labels, dtype=np.int64)
    if lab.shape != (m.shape[0],):
        raise ValueError("labels length must match the number of rows")
    distinct = np.unique(lab)
    if distinct.size < num_clients:
        raise ValueError(
            f"by-label needs >= {num_clients} distinct labels, got {distinct.size}"
        )
    row_groups: list[list[int]] = [[] for _ in range(num_clients)]
    for k, value in enumerate(distinct):
        row_groups[k % num_clients].extend(np.flatnonzero(lab == value).tolist())
    shards = [DenseMatrix(m[rows]) for rows in row_groups]
    return FederatedDataset(shards=tuple(shards), name="partitioned", partition=mode)
