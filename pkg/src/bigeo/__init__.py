"""Bi-invariant geodesic regression on matrix Lie groups."""

from bigeo.lie import (
    SE3,
    SO3,
    BranchCutError,
    GeodesicParams,
    GroupId,
    GroupPoint,
    Tangent,
    ccs_exp,
    ccs_log,
    compose,
    euclidean,
    geodesic,
    group_exp,
    group_log,
    identity,
    inverse,
    rn,
    se3,
    so3,
)
from bigeo.regression import Dataset, FitResult, Sample, SolverConfig, fit_biinvariant, group_mean, net_force

__version__ = "0.1.0"
