"""Subdifferential calculus for matrix-valued functions that are convex in
the Loewner order."""

from .exceptions import (
    BudgetZero,
    DimensionMismatch,
    DimensionTooLarge,
    MatSubdiffError,
    NegativeScale,
    NoSmoothSamples,
    NonFinite,
    NotDifferentiable,
    NotPsd,
    NotUnivariate,
    PreconditionViolated,
    SpecParseError,
    UnknownExample,
    ZeroDirection,
)
from .expr import (
    AbsCoord,
    AffineScalar,
    ConvexMatrixExpr,
    Interval1D,
    MaxAffine,
    dir_deriv,
    evaluate,
    max_affine,
    mk_affine,
    mk_block_diag,
    mk_congruence,
    mk_const,
    mk_diag,
    mk_double,
    mk_hadamard,
    mk_lift,
    mk_precompose,
    mk_scale,
    mk_sum,
    one_sided_1d,
    scalarize_eval,
)
from .oracle import Outcome, Verdict, check_scalarized, check_subgradient, falsify_convexity, merge_verdicts
from .repro import build_example
from .subgrad import (
    MatTuple,
    SubgradientCert,
    clarke_sample,
    gradient_if_smooth,
    subdiff_interval_1d,
    subgradient,
)
from .symmat import (
    PsdOutcome,
    PsdVerdict,
    Spectrum,
    SymMat,
    eigen_sym,
    frobenius,
    loewner_leq,
    order_ball_bound_check,
    psd_verdict,
)

__version__ = "0.1.0"
