"""Riemannian geodesic regression on SE(3) with the SO(3) x R^3 product metric.

The product metric is left- but not right-invariant on SE(3). Its geodesics
split into a rotation geodesic (a translated one-parameter subgroup of
SO(3)) and a straight line for the translation. Tangents use the same
ambient 4x4 coordinates as the rest of the package: the rotational block is
the velocity of R, the last column the velocity of x.
"""

from __future__ import annotations

import numpy as np

from bigeo.lie import (
    SE3,
    SO3,
    BranchCutError,
    GeodesicParams,
    GroupPoint,
    Tangent,
    _pack_se3,
    ccs_exp,
    ccs_log,
    exp_mat,
    geodesic_mat,
    log_mat,
    skew,
    unskew,
)
from bigeo.regression import Dataset, FitResult, SolverConfig, group_mean

# central-difference steps; E is exactly quadratic in the translations
ROT_STEP = 1e-5
TRANS_STEP = 1e-2
MAX_HALVINGS = 40
# energy changes below this many ulps of E are rounding, not increases
ENERGY_ULPS = 64


class UndefinedR2Error(ValueError):
    pass


def _split(M):
    return M[..., :3, :3], M[..., :3, 3]


def _rot_angle2(Ra, Rb):
    """Squared rotation angle of Ra^T Rb (broadcasting)."""
    w = unskew(log_mat(SO3, np.swapaxes(Ra, -1, -2) @ Rb))
    return (w * w).sum(-1)


def riem_exp(g: GroupPoint, v: Tangent) -> GroupPoint:
    if g.group.kind != "SE3":
        return ccs_exp(g, v)
    R, x = _split(g.mat)
    A, u = _split(v.mat)
    return GroupPoint(SE3, _pack_se3(R @ exp_mat(SO3, R.T @ A), x + u))


def riem_log(g: GroupPoint, f: GroupPoint) -> Tangent:
    if g.group.kind != "SE3":
        return ccs_log(g, f)
    R, x = _split(g.mat)
    Q, y = _split(f.mat)
    return Tangent(g, _pack_se3(R @ log_mat(SO3, R.T @ Q), y - x, corner=0.0))


def riem_dist2(a: GroupPoint, b: GroupPoint) -> float:
    """theta^2 + |x_a - x_b|^2 on SE(3); the plain log norm on SO(3) or R^n."""
    if a.group != b.group:
        raise ValueError("group mismatch")
    if a.group.kind == "SO3":
        return float(_rot_angle2(a.mat, b.mat))
    if a.group.kind == "R":
        return float(np.sum((a.translation - b.translation) ** 2))
    Ra, xa = _split(a.mat)
    Rb, xb = _split(b.mat)
    return float(_rot_angle2(Ra, Rb) + np.sum((xa - xb) ** 2))


def lc_geodesic_mat(g0, g1, t):
    """Levi-Civita geodesic of the product metric, broadcasting over t."""
    t = np.asarray(t, dtype=float)
    R0, x0 = _split(g0)
    R1, x1 = _split(g1)
    R = geodesic_mat(SO3, R0, R1, t)
    x = x0 + t[..., None] * (x1 - x0)
    return _pack_se3(R, x)


def lc_geodesic(t: float, params: GeodesicParams) -> GroupPoint:
    return GroupPoint(SE3, lc_geodesic_mat(params.g0.mat, params.g1.mat, t))


def _residuals(R0, x0, R1, x1, Rf, xf, ts):
    """Per-sample squared rotational and translational residuals.

    Leading axes of the endpoint arrays broadcast against the sample axis,
    which is last in the outputs.
    """
    R = geodesic_mat(SO3, R0[..., None, :, :], R1[..., None, :, :], ts)
    x = x0[..., None, :] + ts[:, None] * (x1 - x0)[..., None, :]
    return _rot_angle2(R, Rf), np.sum((x - xf) ** 2, axis=-1)


def sse(data: Dataset, params: GeodesicParams) -> float:
    R0, x0 = _split(params.g0.mat)
    R1, x1 = _split(params.g1.mat)
    Rf, xf = _split(data.mats)
    r, q = _residuals(R0, x0, R1, x1, Rf, xf, data.times)
    return float(np.sum(r) + np.sum(q))


_BASIS = np.eye(3)


def _gradient(R0, x0, R1, x1, Rf, xf, ts):
    """Central-difference gradient of E in orthonormal coordinates at (g0, g1).

    Returns a (2, 6) array: rows for g0 and g1, columns (rotation, translation).
    Per-sample residual differences are formed before summation so the large
    translational terms do not swamp the rotational increments.
    """
    rot = exp_mat(SO3, skew(ROT_STEP * np.concatenate([_BASIS, -_BASIS])))  # +e_k then -e_k
    shift = TRANS_STEP * np.concatenate([_BASIS, -_BASIS])
    ends = ((R0, x0), (R1, x1))
    grad = np.zeros((2, 6))
    for j, (R, x) in enumerate(ends):
        stacked = [[np.broadcast_to(a, (6,) + a.shape) for a in pair] for pair in ends]
        stacked[j][0] = R @ rot
        r, _ = _residuals(*stacked[0], *stacked[1], Rf, xf, ts)
        stacked[j][0] = np.broadcast_to(R, (6, 3, 3))
        stacked[j][1] = x + shift
        _, q = _residuals(*stacked[0], *stacked[1], Rf, xf, ts)
        # E = 1/2 sum(r + q); only r moves under rotations, only q under translations
        grad[j, :3] = 0.5 * np.sum(r[:3] - r[3:], axis=-1) / (2 * ROT_STEP)
        grad[j, 3:] = 0.5 * np.sum(q[:3] - q[3:], axis=-1) / (2 * TRANS_STEP)
    return grad


def _energy(R0, x0, R1, x1, Rf, xf, ts):
    r, q = _residuals(R0, x0, R1, x1, Rf, xf, ts)
    return 0.5 * (np.sum(r) + np.sum(q))


def fit_riemannian(data: Dataset, cfg: SolverConfig = SolverConfig(), trace: list | None = None) -> FitResult:
    """Gradient descent on E(g0, g1) = 1/2 sum dist^2(gamma_LC(t_i), f_i).

    Fixed step ``cfg.stepsize`` along the negative numeric gradient, halved
    until E does not increase beyond rounding level. Stops when the gradient norm is below
    ``cfg.tol`` or no non-increasing step can be found. If ``trace`` is a
    list, the energy at every accepted iterate is appended to it.
    """
    if data.group.kind != "SE3":
        raise ValueError("Riemannian regression is implemented for SE(3) data")
    init = cfg.init if cfg.init is not None else data.extremal_params()
    R0, x0 = (a.copy() for a in _split(init.g0.mat))
    R1, x1 = (a.copy() for a in _split(init.g1.mat))
    Rf, xf = _split(data.mats)
    ts = data.times
    E = _energy(R0, x0, R1, x1, Rf, xf, ts)
    gnorm = np.inf
    it = 0
    if trace is not None:
        trace.append(float(E))
    for it in range(cfg.max_iters + 1):
        grad = _gradient(R0, x0, R1, x1, Rf, xf, ts)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < cfg.tol or it == cfg.max_iters:
            break
        step = cfg.stepsize
        for _ in range(MAX_HALVINGS):
            nR0 = R0 @ exp_mat(SO3, skew(-step * grad[0, :3]))
            nR1 = R1 @ exp_mat(SO3, skew(-step * grad[1, :3]))
            nx0 = x0 - step * grad[0, 3:]
            nx1 = x1 - step * grad[1, 3:]
            try:
                nE = _energy(nR0, nx0, nR1, nx1, Rf, xf, ts)
            except BranchCutError:
                nE = np.inf
            if nE <= E + ENERGY_ULPS * np.finfo(float).eps * E:
                break
            step *= 0.5
        else:
            break
        R0, x0, R1, x1, E = nR0, nx0, nR1, nx1, nE
        if trace is not None:
            trace.append(float(E))
    params = GeodesicParams(GroupPoint(SE3, _pack_se3(R0, x0)), GroupPoint(SE3, _pack_se3(R1, x1)))
    return FitResult(params, it, gnorm, bool(gnorm < cfg.tol))


def frechet_mean(points) -> GroupPoint:
    """Product-metric Frechet mean: SO(3) Karcher mean times the Euclidean mean."""
    rots = [GroupPoint(SO3, p.mat[:3, :3]) for p in points]
    res = group_mean(rots, SolverConfig(stepsize=1.0, max_iters=1000, tol=1e-13))
    x = np.mean([p.mat[:3, 3] for p in points], axis=0)
    return GroupPoint(SE3, _pack_se3(res.point.mat, x))


def r_squared(data: Dataset, params: GeodesicParams, geometry: str = "riemannian") -> float:
    """Coefficient of determination 1 - SSE / SSvar under the product metric."""
    if geometry != "riemannian":
        raise ValueError(f"unsupported geometry {geometry!r}")
    mean = frechet_mean([s.point for s in data.samples])
    ss_var = sum(riem_dist2(s.point, mean) for s in data.samples)
    if ss_var == 0.0:
        raise UndefinedR2Error("R^2 undefined: all data points coincide")
    return 1.0 - sse(data, params) / ss_var
