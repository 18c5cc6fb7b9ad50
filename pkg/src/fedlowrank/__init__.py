"""Federated low-rank matrix factorization toolkit.

Distributed randomized power initialization of a shared right factor,
masked secure aggregation, per-client (accelerated) gradient descent with
exact closed-form references, probabilistic conditioning/error bound
calculators, and a seeded experiment harness.
"""

from .bounds import ErrorReport, cor1_eps, eps_min, error_report, thm3_bound, verify_thm3_montecarlo
from .datagen import FederatedDataset, SyntheticSpec, generate_synthetic, partition
from .errors import ParseError, RankDeficientError, ThresholdUnmetError
from .federation import (
    AggregationRound,
    ClientState,
    CostLedger,
    broadcast,
    make_clients,
    masked_uploads,
    phi_seed,
    power_init,
    secure_aggregate,
)
from .ingest import LabeledTable, center_columns, load_csv, load_libsvm, write_csv
from .linalg import (
    DenseMatrix,
    FlopCounter,
    Spectrum,
    SymEigResult,
    condition_number,
    frobenius_sq,
    gaussian,
    matmul,
    orthonormalize,
    pinv_gram,
    singular_values,
    sym_eig,
)
from .resampler import (
    BoundInputs,
    ResamplePolicy,
    ResampleResult,
    kappa_p_bound,
    kappa_p_terms,
    m_for_probability,
    resample_phi,
)
from .seeding import derive_seed
from .solver import (
    CurvatureBounds,
    RunRecord,
    SolverConfig,
    curvature,
    exact_solution,
    federated_solve,
    grad_u,
    local_descent,
    loss_value,
)

__version__ = "0.1.0"
