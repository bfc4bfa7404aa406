"""Numerical toolkit for geometrically infinitely divisible laws and renewal processes."""

from .distributions import (
    DistributionSpec,
    RngState,
    closed_form_transform,
    empirical_transform,
    invert_lt,
    ks_statistic,
    make_rng,
    ml_cdf,
    sample_geometric_sum,
    sample_linnik,
    sample_mittag_leffler,
    sample_positive_stable,
)
from .transform_core import (
    CMReport,
    GeometricParams,
    PsiFunction,
    TransformFn,
    check_complete_monotone,
    check_gid,
    compound_then_scale_fixed_point_residual,
    geometric_compound,
    lt_from_psi,
    scale_argument,
    semi_scaling_residual,
)

__version__ = "0.1.0"
