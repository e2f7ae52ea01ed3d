"""Bi-invariant geodesic regression and the exponential barycenter."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from bigeo.geodiff import inv_d_geodesic_mat
from bigeo.lie import (
    GeodesicParams,
    GroupId,
    GroupPoint,
    Tangent,
    aux_norm,
    exp_mat,
    geodesic_mat,
    inv_mat,
    log_mat,
)


@dataclass(frozen=True)
class Sample:
    point: GroupPoint
    t: float

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"sample time {self.t} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: tuple

    def __post_init__(self):
        samples = tuple(self.samples)
        object.__setattr__(self, "samples", samples)
        if len(samples) < 2:
            raise ValueError("a dataset needs at least two samples")
        grp = samples[0].point.group
        if any(s.point.group != grp for s in samples):
            raise ValueError("all samples must belong to the same group")
        if len({s.t for s in samples}) < 2:
            raise ValueError("need at least two distinct sample times")

    @classmethod
    def from_arrays(cls, group: GroupId, mats, times) -> "Dataset":
        return cls(tuple(Sample(GroupPoint(group, m), float(t)) for m, t in zip(mats, times)))

    @property
    def group(self) -> GroupId:
        return self.samples[0].point.group

    @property
    def mats(self) -> np.ndarray:
        return np.stack([s.point.mat for s in self.samples])

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def __len__(self):
        return len(self.samples)

    def extremal_params(self) -> GeodesicParams:
        """Samples with minimal and maximal t; ties go to the earliest sample."""
        ts = self.times
        return GeodesicParams(self.samples[int(np.argmin(ts))].point, self.samples[int(np.argmax(ts))].point)


@dataclass(frozen=True)
class SolverConfig:
    stepsize: float = 0.1
    max_iters: int = 5000
    tol: float = 1e-9
    # None means "extremal samples"
    init: Optional[GeodesicParams] = field(default=None, compare=False)

    def __post_init__(self):
        if self.stepsize <= 0 or self.tol <= 0 or self.max_iters < 1:
            raise ValueError("stepsize, tol and max_iters must be positive")

    @classmethod
    def knee(cls, **kw) -> "SolverConfig":
        return cls(**{"stepsize": 0.01, **kw})

    def with_init(self, init: Optional[GeodesicParams]) -> "SolverConfig":
        return replace(self, init=init)


@dataclass(frozen=True, eq=False)
class FitResult:
    params: GeodesicParams
    iterations: int
    final_update_norm: float
    converged: bool

    def to_dict(self) -> dict:
        return {
            "g0": self.params.g0.mat.tolist(),
            "g1": self.params.g1.mat.tolist(),
            "iterations": self.iterations,
            "final_update_norm": self.final_update_norm,
            "converged": self.converged,
        }


def net_force_mat(group: GroupId, g0, g1, F, ts):
    """Identity-coordinate net force on (g0, g1) from data ``F`` at times ``ts``."""
    B = geodesic_mat(group, g0, g1, ts)
    # Log_{b_i}(f_i) in ambient coordinates
    L = B @ log_mat(group, inv_mat(group, B) @ F)
    X0 = np.zeros((group.size, group.size))
    X1 = np.zeros((group.size, group.size))
    w0 = (1.0 - ts) ** 2
    m = w0 > 0
    if np.any(m):
        X = inv_d_geodesic_mat(group, g0, g1, ts[m], L[m], "start", f=B[m])
        X0 = np.einsum("i,ijk->jk", w0[m], X)
    w1 = ts**2
    m = w1 > 0
    if np.any(m):
        X = inv_d_geodesic_mat(group, g0, g1, ts[m], L[m], "end", f=B[m])
        X1 = np.einsum("i,ijk->jk", w1[m], X)
    return X0, X1


def net_force(g0: GroupPoint, g1: GroupPoint, data: Dataset) -> tuple[Tangent, Tangent]:
    X0, X1 = net_force_mat(data.group, g0.mat, g1.mat, data.mats, data.times)
    return Tangent(g0, g0.mat @ X0), Tangent(g1, g1.mat @ X1)


def update_norm(group: GroupId, X0, X1) -> float:
    return float(np.hypot(aux_norm(group, X0), aux_norm(group, X1)))


def fit_biinvariant(data: Dataset, cfg: SolverConfig = SolverConfig()) -> FitResult:
    """Fixed-point iteration g_j <- Exp_{g_j}(stepsize * v_j) on the net force.

    Stops once the auxiliary norm of the force drops below ``cfg.tol``.
    Non-convergence is reported through ``FitResult.converged``.
    """
    grp = data.group
    init = cfg.init if cfg.init is not None else data.extremal_params()
    g0, g1 = init.g0.mat.copy(), init.g1.mat.copy()
    F, ts = data.mats, data.times
    lam = cfg.stepsize
    norm = np.inf
    it = 0
    for it in range(cfg.max_iters + 1):
        X0, X1 = net_force_mat(grp, g0, g1, F, ts)
        norm = update_norm(grp, X0, X1)
        if norm < cfg.tol or it == cfg.max_iters:
            break
        g0 = g0 @ exp_mat(grp, lam * X0)
        g1 = g1 @ exp_mat(grp, lam * X1)
    params = GeodesicParams(GroupPoint(grp, g0), GroupPoint(grp, g1))
    return FitResult(params, it, norm, bool(norm < cfg.tol))


@dataclass(frozen=True, eq=False)
class MeanResult:
    point: GroupPoint
    iterations: int
    final_update_norm: float
    converged: bool


def group_mean(points: Sequence[GroupPoint], cfg: SolverConfig = SolverConfig()) -> MeanResult:
    """Exponential barycenter via m <- Exp_m(stepsize * mean_i Log_m(f_i)).

    ``cfg.init``, if given, seeds the iteration with its ``g0``; otherwise the
    first point is used.
    """
    if not points:
        raise ValueError("no points to average")
    grp = points[0].group
    F = np.stack([p.mat for p in points])
    m = (cfg.init.g0 if cfg.init is not None else points[0]).mat.copy()
    norm = np.inf
    it = 0
    for it in range(cfg.max_iters + 1):
        X = log_mat(grp, inv_mat(grp, m) @ F).mean(axis=0)
        norm = float(aux_norm(grp, X))
        if norm < cfg.tol or it == cfg.max_iters:
            break
        m = m @ exp_mat(grp, cfg.stepsize * X)
    return MeanResult(GroupPoint(grp, m), it, norm, bool(norm < cfg.tol))
