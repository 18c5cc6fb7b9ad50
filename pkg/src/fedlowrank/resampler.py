"""Probe resampling: draw several Gaussian initializations, keep the best.

The condition number of the power-initialized V is random through the
probe Phi. Each draw lands under an explicit high-probability ceiling
(`kappa_p_bound`), and with probability at least one half a draw is good,
so ceil(-log2(1 - P)) independent draws produce a well-conditioned V with
probability at least P. Policies: a fixed draw count, a count derived
from a target probability, or draw-until-threshold with a hard cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import RankDeficientError, ThresholdUnmetError
from .federation import ClientState, CostLedger, power_init
from .linalg import DenseMatrix, Spectrum, condition_number

RESAMPLE_MODES = ("fixed_m", "target_probability", "threshold")

# Which exponent the spectral-ratio tail term carries in kappa_p_bound.
# The derivation of record applies 2*(2*alpha+1) to both ratio terms
# ("appendix"); the condensed statement uses 2*alpha on the tail term
# ("main_text"). Both are exposed; "appendix" is the default.
KAPPA_VARIANTS = ("appendix", "main_text")


@dataclass(frozen=True)
class ResamplePolicy:
    """How many probe draws to pay for and how to pick the winner."""

    mode: str
    base_seed: int
    m: int = 1
    probability: float = 0.5
    kappa_target: float = 2.0
    max_draws: int = 10

    def __post_init__(self) -> None:
        if self.mode not in RESAMPLE_MODES:
            raise ValueError(f"mode must be one of {RESAMPLE_MODES}")
        if self.mode == "fixed_m" and self.m < 1:
            raise ValueError("fixed_m requires m >= 1")
        if self.mode == "target_probability" and not 0.0 < self.probability < 1.0:
            raise ValueError("target probability must lie in (0, 1)")
        if self.mode == "threshold":
            if self.kappa_target <= 1.0:
                raise ValueError("kappa_target must be > 1")
            if self.max_draws < 1:
                raise ValueError("max_draws must be >= 1")

    @classmethod
    def fixed(cls, m: int, base_seed: int) -> "ResamplePolicy":
        return cls(mode="fixed_m", base_seed=base_seed, m=m)

    @classmethod
    def for_probability(cls, probability: float, base_seed: int) -> "ResamplePolicy":
        return cls(mode="target_probability", base_seed=base_seed, probability=probability)

    @classmethod
    def until_threshold(cls, kappa_target: float, max_draws: int, base_seed: int) -> "ResamplePolicy":
        return cls(
            mode="threshold", base_seed=base_seed,
            kappa_target=kappa_target, max_draws=max_draws,
        )

    def num_draws(self) -> int:
        """Draw budget: exact for fixed/probability modes, cap for threshold."""
        if self.mode == "fixed_m":
            return self.m
        if self.mode == "target_probability":
            return m_for_probability(self.probability)
        return self.max_draws


@dataclass(frozen=True)
class BoundInputs:
    """Spectrum and protocol parameters feeding kappa_p_bound."""

    spectrum: Spectrum
    r: int
    alpha: int
    d: int
    p: float

    def __post_init__(self) -> None:
        if not 1 <= self.r <= len(self.spectrum):
            raise ValueError("r must be in [1, len(spectrum)]")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")


def m_for_probability(probability: float) -> int:
    """Smallest m with 1 - 2^-m >= probability, i.e. ceil(-log2(1 - P)).

    Each draw independently succeeds with probability >= 1/2, so m draws
    miss with probability <= 2^-m. The ceiling (rather than the floor)
    keeps the guarantee: floor would give m = 9 for P = 1 - 1e-3, whose
    1 - 2^-9 falls short of P, while m = 10 suffices.
    """
    if not 0.0 < probability < 1.0:
        raise ValueError("probability must lie in (0, 1)")
    return max(1, math.ceil(-math.log2(1.0 - probability)))


def kappa_p_terms(inputs: BoundInputs, variant: str = "appendix") -> tuple[float, float]:
    """The two addends of kappa_p_bound (head term, spectral-tail term)."""
    if variant not in KAPPA_VARIANTS:
        raise ValueError(f"variant must be one of {KAPPA_VARIANTS}")
    s = inputs.spectrum
    sigma_r = s.sigma(inputs.r)
    if sigma_r <= 0.0:
        raise RankDeficientError(
            f"kappa_p_bound needs sigma_r > 0 (r={inputs.r})", sigma_min=sigma_r
        )
    e1 = 2 * (2 * inputs.alpha + 1)
    e2 = e1 if variant == "appendix" else 2 * inputs.alpha
    head = 9.0 * inputs.r**2 * (s.sigma_max / sigma_r) ** e1
    tail_ratio = s.sigma(inputs.r + 1) / sigma_r
    tail = 4.0 * inputs.r * (inputs.d + math.log(2.0 / inputs.p)) * tail_ratio**e2
    return head / inputs.p**2, tail / inputs.p**2


def kappa_p_bound(inputs: BoundInputs, variant: str = "appendix") -> float:
    """High-probability ceiling on kappa(V)^2 after power initialization.

    kappa_p^2 = (1/p^2) * ( 9 r^2 (sigma_max/sigma_r)^e1
                 + 4 r (d + ln(2/p)) (sigma_{r+1}/sigma_r)^e2 )
    with e1 = 2(2 alpha + 1) in both variants and e2 = e1 ("appendix",
    the derivation's final form) or e2 = 2 alpha ("main_text"). Holds
    with probability at least 1 - 3p over the Gaussian probe.
    """
    head, tail = kappa_p_terms(inputs, variant)
    return head + tail


@dataclass(frozen=True)
class ResampleResult:
    """Winning V, the (seed, kappa) of every draw, and the summed ledger."""

    v: DenseMatrix
    draws: tuple[tuple[int, float], ...]
    ledger: CostLedger

    @property
    def best_index(self) -> int:
        kappas = [k for _, k in self.draws]
        return kappas.index(min(kappas))

    @property
    def best_kappa(self) -> float:
        return min(k for _, k in self.draws)


def resample_phi(
    clients: list[ClientState],
    alpha: int,
    r: int,
    policy: ResamplePolicy,
    masked: bool = True,
    parallel: bool = False,
) -> ResampleResult:
    """Run power_init once per draw (seeds base_seed + j) and select V.

    fixed_m / target_probability draw their full budget and return the
    arg-min of kappa(V); threshold mode stops at the first draw with
    kappa <= kappa_target and raises ThresholdUnmetError (carrying the
    best kappa seen) if max_draws all miss. The ledger accumulates the
    communication of every draw, so resampling honestly multiplies the
    exchange count. A draw whose V is numerically rank-deficient scores
    kappa = inf and is never selected unless every draw degenerates.
    """
    ledger = CostLedger()
    draws: list[tuple[int, float]] = []
    best_v: DenseMatrix | None = None
    best_kappa = math.inf

    for j in range(policy.num_draws()):
        seed = policy.base_seed + j
        v, _ = power_init(
            clients, alpha, r, seed, ledger=ledger, masked=masked, parallel=parallel
        )
        try:
            kappa = condition_number(v)
        except RankDeficientError:
            kappa = math.inf
        draws.append((seed, kappa))
        if kappa < best_kappa or best_v is None:
            best_v, best_kappa = v, kappa
        if policy.mode == "threshold" and kappa <= policy.kappa_target:
            return ResampleResult(v=v, draws=tuple(draws), ledger=ledger)

    if policy.mode == "threshold":
        raise ThresholdUnmetError(
            f"no draw reached kappa <= {policy.kappa_target} "
            f"within {policy.max_draws} draws (best {best_kappa})",
            best_kappa=best_kappa,
        )
    if not math.isfinite(best_kappa):
        raise RankDeficientError(
            "every resampling draw produced a rank-deficient V", sigma_min=0.0
        )
    return ResampleResult(v=best_v, draws=tuple(draws), ledger=ledger)
