"""Per-client solvers for the fixed-V least-squares factorization problem.

With V frozen, each client's objective
    F_i(U) = 0.5 * ||S_i - U V^T||_F^2  (+ 0.5 * ridge * ||U||_F^2)
is smooth and strongly convex with constants L = sigma_max(V)^2 and
mu = sigma_min(V)^2, so plain gradient descent with step 1/L contracts the
excess loss by (1 - mu/L) per iteration, and Nesterov's extrapolation with
beta_t = t/(t+3) improves the dependence to sqrt(mu/L). The exact
minimizer S V (V^T V)^+ is available for reference and for tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datagen import FederatedDataset
from .federation import CostLedger, make_clients, phi_seed
from .linalg import (
    DenseMatrix,
    FlopCounter,
    condition_number,
    gaussian,
    matmul,
    pinv_gram,
    singular_values,
)
from .resampler import ResamplePolicy, resample_phi
from .seeding import derive_seed

MOMENTUM_MODES = ("none", "nesterov")
SOLVE_METHODS = ("gd", "exact")


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the local descent; step_size "auto" means 1/L."""

    iterations: int = 100
    step_size: float | str = "auto"
    momentum: str = "none"
    ridge: float = 0.0
    record_trajectory: bool = True
    method: str = "gd"

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if isinstance(self.step_size, str):
            if self.step_size != "auto":
                raise ValueError('step_size must be a positive float or "auto"')
        elif self.step_size <= 0:
            raise ValueError("explicit step_size must be > 0")
        if self.momentum not in MOMENTUM_MODES:
            raise ValueError(f"momentum must be one of {MOMENTUM_MODES}")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if self.method not in SOLVE_METHODS:
            raise ValueError(f"method must be one of {SOLVE_METHODS}")


@dataclass(frozen=True)
class CurvatureBounds:
    """Smoothness L = sigma_max(V)^2 and strong convexity mu = sigma_min(V)^2."""

    L: float
    mu: float


@dataclass
class RunRecord:
    """Outcome of a federated solve: trajectory, conditioning, costs, errors."""

    alpha: int
    rank: int
    momentum: str
    method: str
    kappa_v: float
    draws: tuple[tuple[int, float], ...]
    global_losses: list[float]
    final_loss: float
    final_error: float
    exact_loss: float
    exact_error: float
    ledger: CostLedger


def loss_value(s: DenseMatrix, u: DenseMatrix, v: DenseMatrix) -> float:
    """F(U) = 0.5 ||S - U V^T||_F^2 evaluated from the explicit residual."""
    r = s.ndarray - u.ndarray @ v.ndarray.T
    return 0.5 * float(np.vdot(r, r))


def curvature(v: DenseMatrix) -> CurvatureBounds:
    s = singular_values(v)
    return CurvatureBounds(L=s.sigma_max**2, mu=s.sigma_min**2)


def grad_u(
    u: DenseMatrix,
    v: DenseMatrix,
    s: DenseMatrix,
    ridge: float = 0.0,
    counter: FlopCounter | None = None,
) -> DenseMatrix:
    """Gradient (U V^T - S) V + ridge * U of the (ridged) local objective."""
    if u.cols != v.cols or v.rows != s.cols or u.rows != s.rows:
        raise ValueError(
            f"incompatible shapes: U {u.shape}, V {v.shape}, S {s.shape}"
        )
    residual = matmul(u, v.transpose(), counter).ndarray - s.ndarray
    g = matmul(DenseMatrix(residual), v, counter).ndarray
    if ridge:
        g = g + ridge * u.ndarray
    return DenseMatrix(g)


def _resolve_step(config: SolverConfig, v: DenseMatrix) -> float:
    if config.step_size == "auto":
        bounds = curvature(v)
        if bounds.L <= 0:
            raise ValueError('step_size "auto" needs sigma_max(V) > 0')
        return 1.0 / bounds.L
    return float(config.step_size)


def local_descent(
    s: DenseMatrix,
    v: DenseMatrix,
    config: SolverConfig,
    seed: int = 0,
    counter: FlopCounter | None = None,
    u0: DenseMatrix | None = None,
) -> tuple[DenseMatrix, list[float]]:
    """Run T gradient steps on F(., V) from a seeded Gaussian start.

    With momentum="nesterov" the gradient is taken at the extrapolated
    point y_t = U_t + beta_t (U_t - U_{t-1}) with beta_t = t/(t+3); plain
    mode is vanilla descent. Returns the final iterate and the recorded
    losses F(U_0), ..., F(U_T) (just [F(U_T)] when record_trajectory is
    off). The counter sees the two gradient products per iteration
    (4*n*d*r flops); loss bookkeeping is not metered.
    """
    gamma = _resolve_step(config, v)
    if u0 is None:
        u0 = gaussian(s.rows, v.cols, seed)
    elif u0.rows != s.rows or u0.cols != v.cols:
        raise ValueError(f"u0 shape {u0.shape} incompatible with S, V")

    sm, vm = s.ndarray, v.ndarray
    n, d, r = s.rows, s.cols, v.cols
    grad_flops = 4 * n * d * r

    def fval(um: np.ndarray) -> float:
        res = sm - um @ vm.T
        return 0.5 * float(np.vdot(res, res))

    u = u0.ndarray.copy()
    losses = [fval(u)] if config.record_trajectory else []

    if config.momentum == "none":
        residual = u @ vm.T - sm
        for _ in range(config.iterations):
            g = residual @ vm
            if config.ridge:
                g += config.ridge * u
            u = u - gamma * g
            residual = u @ vm.T - sm
            if counter is not None:
                counter.add(grad_flops)
            if config.record_trajectory:
                losses.append(0.5 * float(np.vdot(residual, residual)))
    else:
        u_prev = u
        for t in range(config.iterations):
            beta = t / (t + 3.0)
            y = u + beta * (u - u_prev)
            g = (y @ vm.T - sm) @ vm
            if config.ridge:
                g += config.ridge * y
            u_prev, u = u, y - gamma * g
            if counter is not None:
                counter.add(grad_flops)
            if config.record_trajectory:
                losses.append(fval(u))

    if not config.record_trajectory:
        losses = [fval(u)]
    return DenseMatrix(u), losses


def exact_solution(
    s: DenseMatrix,
    v: DenseMatrix,
    ridge: float = 0.0,
    counter: FlopCounter | None = None,
) -> DenseMatrix:
    """Closed-form minimizer S V (V^T V + ridge I)^+ of the local objective."""
    if v.rows != s.cols:
        raise ValueError(f"incompatible shapes: V {v.shape}, S {s.shape}")
    gram = matmul(v.transpose(), v, counter).ndarray
    if ridge:
        gram = gram + ridge * np.eye(v.cols)
    ginv = pinv_gram(DenseMatrix(gram), counter)
    sv = matmul(s, v, counter)
    return matmul(sv, ginv, counter)


class _ClientCounter:
    """FlopCounter-shaped adapter feeding a ledger's per-client tally."""

    __slots__ = ("_ledger", "_cid")

    def __init__(self, ledger: CostLedger, cid: int):
        self._ledger = ledger
        self._cid = cid

    def add(self, flops: int) -> None:
        self._ledger.add_client_flops(self._cid, flops)


def federated_solve(
    dataset: FederatedDataset,
    alpha: int,
    r: int,
    config: SolverConfig,
    resample: ResamplePolicy,
    parallel: bool = False,
) -> RunRecord:
    """Power-initialize V, then solve every client independently.

    The resampling policy owns the master seed: probe draws use
    base_seed + j, client starting points derive from (base_seed, "u0", id),
    so identical policies reproduce identical runs bit for bit. The record
    carries the summed per-client loss trajectory, kappa(V), all draw
    condition numbers, the communication/computation ledger, and both the
    achieved and the exact-solution global errors.
    """
    clients = make_clients(dataset, resample.base_seed)
    result = resample_phi(clients, alpha, r, resample, parallel=parallel)
    v, ledger = result.v, result.ledger
    kappa_v = condition_number(v)

    trajectories: list[list[float]] = []
    exact_losses: list[float] = []
    for c in clients:
        counter = _ClientCounter(ledger, c.id)
        if config.method == "exact":
            u = exact_solution(c.shard, v, ridge=config.ridge, counter=counter)
            traj = [loss_value(c.shard, u, v)]
        else:
            u, traj = local_descent(
                c.shard, v, config,
                seed=derive_seed(resample.base_seed, "u0", c.id),
                counter=counter,
            )
        c.local_u = u
        trajectories.append(traj)
        u_hat = exact_solution(c.shard, v, ridge=config.ridge)
        exact_losses.append(loss_value(c.shard, u_hat, v))

    length = min(len(t) for t in trajectories)
    global_losses = [sum(t[k] for t in trajectories) for k in range(length)]
    final_loss = global_losses[-1]
    exact_loss = sum(exact_losses)
    return RunRecord(
        alpha=alpha,
        rank=r,
        momentum=config.momentum,
        method=config.method,
        kappa_v=kappa_v,
        draws=result.draws,
        global_losses=global_losses,
        final_loss=final_loss,
        final_error=2.0 * final_loss,
        exact_loss=exact_loss,
        exact_error=2.0 * exact_loss,
        ledger=ledger,
    )
