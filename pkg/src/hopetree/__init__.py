"""Greedy sparse recovery by hope-tree search, with baseline pursuits and a benchmark harness."""

from .errors import (
    AllPathsDegenerate,
    ConfigError,
    DimensionMismatch,
    DriverStalled,
    HopeTreeError,
    InstanceTooLarge,
    NotEnoughCandidates,
    RankDeficient,
    SupportTooLarge,
    ZeroSignal,
)
from .gsra import (
    GsraConfig,
    create_hope_tree,
    depth_bound,
    gsra_recover,
    layer_orders,
    preselect,
    rectify_support,
    subspace_schedule,
)
from .instances import (
    NoiseModel,
    SignalModel,
    SparseSignal,
    derive_seed,
    gen_noise_for_smnr,
    gen_sensing_matrix,
    gen_sparse_signal,
)
from .linalg import (
    SensingMatrix,
    correlation_scores,
    least_squares_on_support,
    residual,
    top_l_indices,
)
from .metrics import empirical_smnr, exact_recovery, srer
from .oracle import l0_solve
from .pursuits import PursuitConfig, RecoveryResult, gomp, mmp, omp, sp

__version__ = "0.1.0"
