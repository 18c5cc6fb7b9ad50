"""Simulated N-client/one-server federation.

Implements the distributed randomized power initialization: every client
multiplies its shard against a private Gaussian probe, the server sums the
uploads through a masked secure-aggregation round, and the shared d x r
matrix is broadcast back. After alpha extra power rounds the result equals
the centralized (S^T S)^alpha S^T Phi, where Phi stacks the per-client
probes, while no d x d matrix ever gets materialized and the server never
sees an unmasked contribution.

Communication and computation are metered by a CostLedger: one aggregation
round moves N*d*r floats up and N*d*r floats down, so a full
initialization costs exactly 2*N*d*r*(alpha+1) communicated floats.
Per-client work is recorded as 2*n_i*d*r operations per round (the probe
product, and each power round counted as one two-sided sweep over the
shard, following the source cost model) — a raw 2mnk count of the two
matmuls inside a power round would be twice that.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linalg import DenseMatrix, gaussian
from .seeding import derive_seed


@dataclass
class ClientState:
    """One simulated client: its shard and the seed of its private RNG."""

    id: int
    shard: DenseMatrix
    rng_seed: int
    local_u: DenseMatrix | None = None


@dataclass
class CostLedger:
    """Monotone counters for communicated floats and arithmetic work."""

    floats_communicated: int = 0
    server_flops: int = 0
    client_flops: dict[int, int] = field(default_factory=dict)
    aggregation_rounds: int = 0

    def add_upload(self, num_clients: int, floats_each: int) -> None:
        self.floats_communicated += num_clients * floats_each

    def add_broadcast(self, num_clients: int, floats_each: int) -> None:
        self.floats_communicated += num_clients * floats_each

    def add_server_flops(self, flops: int) -> None:
        self.server_flops += int(flops)

    def add_client_flops(self, client_id: int, flops: int) -> None:
        self.client_flops[client_id] = self.client_flops.get(client_id, 0) + int(flops)

    def total_client_flops(self) -> int:
        return sum(self.client_flops.values())


@dataclass(frozen=True)
class AggregationRound:
    """Contributions of equal shape plus the master seed of pairwise masks.

    mask_seed None disables masking (uploads equal raw contributions).
    """

    contributions: tuple[DenseMatrix, ...]
    mask_seed: int | None

    def __post_init__(self) -> None:
        object.__setattr__(self, "contributions", tuple(self.contributions))
        if not self.contributions:
            raise ValueError("aggregation round needs at least one contribution")
        shape = self.contributions[0].shape
        if any(c.shape != shape for c in self.contributions):
            raise ValueError("all contributions must share one shape")


def phi_seed(seed: int, client_id: int) -> int:
    """Seed of client `client_id`'s Gaussian probe for a given global seed.

    Public so tests and oracles can reconstruct the stacked probe matrix.
    """
    return derive_seed(seed, "phi", client_id)


def _pair_mask(mask_seed: int, i: int, j: int, rows: int, cols: int) -> np.ndarray:
    # Shared mask for the ordered pair i < j; standard normal, unit scale.
    return gaussian(rows, cols, derive_seed(mask_seed, "mask", i, j)).ndarray


def masked_uploads(rnd: AggregationRound) -> list[DenseMatrix]:
    """What each client actually sends: contribution plus pairwise masks.

    Client i adds M_ij for every j > i and subtracts M_ji for every j < i,
    so the masks cancel in the server-side sum while every single upload
    is (almost surely) different from its raw contribution.
    """
    n = len(rnd.contributions)
    rows, cols = rnd.contributions[0].shape
    if rnd.mask_seed is None or n == 1:
        return list(rnd.contributions)
    uploads = []
    for i in range(n):
        u = rnd.contributions[i].ndarray.copy()
        for j in range(n):
            if j == i:
                continue
            lo, hi = min(i, j), max(i, j)
            mask = _pair_mask(rnd.mask_seed, lo, hi, rows, cols)
            u += mask if i == lo else -mask
        uploads.append(DenseMatrix(u))
    return uploads


def secure_aggregate(rnd: AggregationRound, ledger: CostLedger | None = None) -> DenseMatrix:
    """Sum the clients' uploads in fixed client order.

    The result equals the plain sum of the raw contributions up to mask
    cancellation roundoff (~1e-9 relative is the contract; unit-scale masks
    keep it far below that). With a single client the round degenerates to
    a pass-through of the sole contribution.
    """
    uploads = masked_uploads(rnd)
    total = uploads[0].ndarray.copy()
    for u in uploads[1:]:
        total += u.ndarray
    result = DenseMatrix(total)
    if ledger is not None:
        n = len(uploads)
        ledger.add_upload(n, result.rows * result.cols)
        ledger.add_server_flops(n * result.rows * result.cols)
        ledger.aggregation_rounds += 1
    return result


def broadcast(v: DenseMatrix, clients: list[ClientState], ledger: CostLedger | None = None) -> dict[int, DenseMatrix]:
    """Hand every client a copy of V; meters N*d*r downstream floats."""
    if ledger is not None:
        ledger.add_broadcast(len(clients), v.rows * v.cols)
    # DenseMatrix is immutable, so sharing the value is a faithful copy.
    return {c.id: v for c in clients}


def make_clients(dataset, seed: int) -> list[ClientState]:
    """Wrap a FederatedDataset's shards into ClientState records."""
    return [
        ClientState(id=i, shard=shard, rng_seed=derive_seed(seed, "client", i))
        for i, shard in enumerate(dataset.shards)
    ]


def _client_round_map(clients, fn, parallel: bool):
    # Results keyed by position, independent of completion order.
    if not parallel or len(clients) == 1:
        return [fn(c) for c in clients]
    with ThreadPoolExecutor(max_workers=min(8, len(clients))) as pool:
        return list(pool.map(fn, clients))


def power_init(
    clients: list[ClientState],
    alpha: int,
    r: int,
    seed: int,
    ledger: CostLedger | None = None,
    masked: bool = True,
    parallel: bool = False,
) -> tuple[DenseMatrix, CostLedger]:
    """Distributed randomized power initialization of the shared V.

    Round 0: client i forms V^i = (S^i)^T Phi^i with Phi^i ~ N(0,1) of
    shape n_i x r seeded by phi_seed(seed, i); the masked aggregate
    V = sum_i V^i is broadcast. Each of the alpha further rounds sends
    V^i = (S^i)^T (S^i V), evaluated right to left so only n_i x r and
    d x r intermediates exist. The result equals the centralized
    (S^T S)^alpha S^T Phi up to mask-cancellation roundoff.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if r < 1:
        raise ValueError("r must be >= 1")
    dims = {c.shard.cols for c in clients}
    if len(dims) != 1:
        raise ValueError("all client shards must share the feature dimension d")
    if ledger is None:
        ledger = CostLedger()

    def probe_product(c: ClientState) -> DenseMatrix:
        phi = gaussian(c.shard.rows, r, phi_seed(seed, c.id))
        ledger.add_client_flops(c.id, 2 * c.shard.rows * c.shard.cols * r)
        return DenseMatrix(c.shard.ndarray.T @ phi.ndarray)

    contributions = _client_round_map(clients, probe_product, parallel)
    mask_seed = derive_seed(seed, "round", 0) if masked else None
    v = secure_aggregate(AggregationRound(tuple(contributions), mask_seed), ledger)
    broadcast(v, clients, ledger)

    for a in range(1, alpha + 1):
        def power_product(c: ClientState, v_in=v) -> DenseMatrix:
            t = c.shard.ndarray @ v_in.ndarray
            ledger.add_client_flops(c.id, 2 * c.shard.rows * c.shard.cols * r)
            return DenseMatrix(c.shard.ndarray.T @ t)

        contributions = _client_round_map(clients, power_product, parallel)
        mask_seed = derive_seed(seed, "round", a) if masked else None
        v = secure_aggregate(AggregationRound(tuple(contributions), mask_seed), ledger)
        broadcast(v, clients, ledger)

    return v, ledger
