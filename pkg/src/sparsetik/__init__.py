"""Weighted l^p sparsity-constrained Tikhonov regularization, 0 <= p <= 2."""

from sparsetik.errors import (
    BoundViolationError,
    DimensionError,
    DivergenceError,
    FBIViolationError,
    MultivaluedPointError,
    NetTooCoarseError,
    PreconditionError,
    SparsetikError,
    UnsupportedCaseError,
)
from sparsetik.operators import (
    DenseNetOperator,
    DenseOperator,
    DiagonalOperator,
    adjoint_apply,
    apply,
    build_dense_net,
    fbi_check,
    operator_norm,
    pseudo_inverse_apply,
    restricted_smallest_singular_value,
)
from sparsetik.penalty import (
    BregmanTaylorConstants,
    WeightedPenalty,
    bregman_R,
    bregman_taylor_lambda,
    check_p_inequality,
    kappa,
    subgradient_element,
    taylor_T,
)
from sparsetik.seqspace import (
    WeightSequence,
    multivalued_sign_contains,
    support_count,
    weighted_p_norm_power,
)
from sparsetik.solvers import (
    RegularizedProblem,
    SolveResult,
    minimizer_support_check,
    optimality_certificate,
    solve_diagonal,
    solve_iterative,
)
from sparsetik.source import (
    SourceCertificate,
    construct_sourced_instance,
    lp_membership_diagnostic,
    verify_source,
)
from sparsetik.thresholding import (
    ThresholdSpec,
    effective_threshold,
    g_map,
    oracle_threshold,
    threshold,
)

__version__ = "0.1.0"
