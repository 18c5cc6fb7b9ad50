"""Dense real-matrix kernel used by every other module.

Values are immutable `DenseMatrix` wrappers around row-major float64 numpy
arrays; all operations are pure functions of their inputs, so results are
safe to share across threads. Randomness comes from the Philox 4x64
counter-based bit generator with numpy's ziggurat normal transform, which
makes every (seed, shape) pair reproduce bit-for-bit.

Heavy kernels (products, symmetric eigendecomposition, QR) are delegated to
numpy/LAPACK behind the contracts below; the test suite checks each one
against independent oracles (triple loops, reconstruction residuals,
Penrose identities).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficientError

# Relative eigenvalue cutoff below which pinv_gram treats a mode as null.
PINV_RELATIVE_CUTOFF = 1e-12

# Relative asymmetry tolerated by sym_eig before the input is rejected.
SYM_TOLERANCE = 1e-9

# Gram eigenvalues below this fraction of lambda_max are eigensolver noise
# (the squared-spectrum route bottoms out around machine epsilon times
# lambda_max) and are treated as exact zeros by singular_values. Keeps
# rank detection sharp while preserving genuine values down to
# sigma_min/sigma_max ~ 5e-7, i.e. condition numbers through ~1e6.
GRAM_NOISE_FLOOR = 1e3 * 2.220446049250313e-16


class FlopCounter:
    """Contention-safe accumulator for floating-point operation counts.

    `matmul` and the solvers report 2*m*k*n flops per (m x k)(k x n)
    product to whichever counter is injected.
    """

    __slots__ = ("_total", "_lock")

    def __init__(self) -> None:
        self._total = 0
        self._lock = threading.Lock()

    def add(self, flops: int) -> None:
        with self._lock:
            self._total += int(flops)

    @property
    def total(self) -> int:
        return self._total

    def reset(self) -> None:
        with self._lock:
            self._total = 0


class DenseMatrix:
    """Immutable dense real matrix (row-major, 64-bit floats)."""

    __slots__ = ("_a",)

    def __init__(self, values) -> None:
        a = np.ascontiguousarray(values, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D array, got ndim={a.ndim}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"matrix dimensions must be >= 1, got {a.shape}")
        if not np.isfinite(a).all():
            raise ValueError("matrix entries must be finite (no NaN/Inf)")
        a.setflags(write=False)
        self._a = a

    @classmethod
    def from_flat(cls, rows: int, cols: int, flat) -> "DenseMatrix":
        data = np.asarray(flat, dtype=np.float64)
        if data.size != rows * cols:
            raise ValueError(
                f"flat data has {data.size} entries, expected {rows * cols}"
            )
        return cls(data.reshape(rows, cols))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "DenseMatrix":
        return cls(np.zeros((rows, cols)))

    @classmethod
    def identity(cls, n: int) -> "DenseMatrix":
        return cls(np.eye(n))

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def data(self) -> np.ndarray:
        """Flat row-major view of the entries (read-only)."""
        return self._a.reshape(-1)

    @property
    def ndarray(self) -> np.ndarray:
        """The backing 2-D array (read-only)."""
        return self._a

    def transpose(self) -> "DenseMatrix":
        return DenseMatrix(self._a.T)

    def __repr__(self) -> str:
        return f"DenseMatrix({self.rows}x{self.cols})"


@dataclass(frozen=True)
class Spectrum:
    """Descending singular values sigma_1 >= ... >= sigma_{min(n,d)} >= 0."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("spectrum must be a non-empty 1-D array")
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise ValueError("spectrum must be non-negative and non-increasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def sigma(self, k: int) -> float:
        """sigma_k with 1-based index; 0.0 past the end of the spectrum."""
        if k < 1:
            raise ValueError(f"singular value index must be >= 1, got {k}")
        if k > self.values.size:
            return 0.0
        return float(self.values[k - 1])

    @property
    def sigma_max(self) -> float:
        return float(self.values[0])

    @property
    def sigma_min(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class SymEigResult:
    """Eigenvalues (descending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: DenseMatrix


def gaussian(rows: int, cols: int, seed: int) -> DenseMatrix:
    """Matrix of i.i.d. standard normal entries, reproducible in (seed, shape).

    Generator: Philox 4x64 keyed by the 64-bit seed; transform: numpy's
    ziggurat `standard_normal`. Identical (seed, rows, cols) gives a
    bit-identical matrix.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"gaussian dimensions must be >= 1, got {rows}x{cols}")
    rng = np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1)))
    return DenseMatrix(rng.standard_normal((rows, cols)))


def matmul(a: DenseMatrix, b: DenseMatrix, counter: FlopCounter | None = None) -> DenseMatrix:
    """Product A @ B; reports 2*m*k*n flops to `counter` when given."""
    if a.cols != b.rows:
        raise ValueError(
            f"shape mismatch for matmul: {a.rows}x{a.cols} @ {b.rows}x{b.cols}"
        )
    if counter is not None:
        counter.add(2 * a.rows * a.cols * b.cols)
    return DenseMatrix(a.ndarray @ b.ndarray)


def frobenius_sq(a: DenseMatrix) -> float:
    """Squared Frobenius norm, the sum of squared entries."""
    flat = a.data
    return float(flat @ flat)


def sym_eig(a: DenseMatrix) -> SymEigResult:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending.

    Rejects inputs with ||A - A^T||_F > 1e-9 ||A||_F. The decomposition
    satisfies A v_k = lambda_k v_k to ~1e-9 ||A||_F and Q^T Q = I to
    ~1e-10 sqrt(d) (LAPACK syevd behind the contract).
    """
    m = a.ndarray
    if a.rows != a.cols:
        raise ValueError(f"sym_eig needs a square matrix, got {a.rows}x{a.cols}")
    scale = np.linalg.norm(m)
    if np.linalg.norm(m - m.T) > SYM_TOLERANCE * max(scale, 1e-300):
        raise ValueError("sym_eig input is not symmetric within tolerance")
    w, q = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    return SymEigResult(
        eigenvalues=np.ascontiguousarray(w[order]),
        eigenvectors=DenseMatrix(q[:, order]),
    )


def singular_values(m: DenseMatrix) -> Spectrum:
    """Singular values via the smaller Gram matrix (M^T M or M M^T).

    Square roots of the Gram eigenvalues, returned in descending order;
    length is min(rows, cols). Negative eigenvalues and eigenvalues below
    GRAM_NOISE_FLOOR * lambda_max are clamped to zero, so rank-deficient
    inputs report exact zeros instead of sqrt-of-roundoff dust.
    """
    a = m.ndarray
    if m.rows >= m.cols:
        gram = a.T @ a
    else:
        gram = a @ a.T
    gram = (gram + gram.T) / 2.0
    eigvals = np.linalg.eigvalsh(gram)[::-1]
    eigvals = np.clip(eigvals, 0.0, None)
    if eigvals.size and eigvals[0] > 0.0:
        eigvals[eigvals < GRAM_NOISE_FLOOR * eigvals[0]] = 0.0
    return Spectrum(np.sqrt(eigvals))


def condition_number(m: DenseMatrix) -> float:
    """sigma_max / sigma_min; raises RankDeficientError when sigma_min ~ 0."""
    s = singular_values(m)
    smax, smin = s.sigma_max, s.sigma_min
    if smin <= 1e-12 * smax:
        raise RankDeficientError(
            f"matrix is numerically rank-deficient (sigma_min={smin:.3e})",
            sigma_min=smin,
        )
    return smax / smin


def orthonormalize(m: DenseMatrix) -> DenseMatrix:
    """Orthonormal basis Q of the column span of M (Householder QR).

    Requires rows >= cols and full column rank; Q satisfies
    ||Q^T Q - I||_F <= ~1e-10 sqrt(cols) and span(Q) = span(M).
    """
    if m.rows < m.cols:
        raise ValueError(
            f"orthonormalize needs rows >= cols, got {m.rows}x{m.cols}"
        )
    q, r = np.linalg.qr(m.ndarray, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-12 * max(diag.max(), 1e-300):
        raise RankDeficientError(
            "orthonormalize input is column rank-deficient",
            sigma_min=float(diag.min()),
        )
    return DenseMatrix(q)


def pinv_gram(g: DenseMatrix, counter: FlopCounter | None = None) -> DenseMatrix:
    """Moore-Penrose pseudo-inverse of a symmetric PSD Gram matrix.

    Eigenvalues lambda <= PINV_RELATIVE_CUTOFF * lambda_max are treated as
    zero, so rank deficiency never raises here.
    """
    eig = sym_eig(g)
    lam = eig.eigenvalues
    lam_max = float(lam[0]) if lam.size else 0.0
    inv = np.zeros_like(lam)
    if lam_max > 0.0:
        keep = lam > PINV_RELATIVE_CUTOFF * lam_max
        inv[keep] = 1.0 / lam[keep]
    q = eig.eigenvectors.ndarray
    if counter is not None:
        counter.add(4 * g.rows * g.rows * g.rows)
    return DenseMatrix((q * inv) @ q.T)
