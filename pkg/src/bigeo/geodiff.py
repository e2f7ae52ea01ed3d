"""Differentials of the geodesic boundary map and their inverses.

Derivatives are taken by pushing a dual perturbation of one endpoint through
the closed-form geodesic ``g0 exp(t log(g0^-1 g1))``. The inverse of the
start-point differential at ``t0`` is the end-point differential of the
geodesic from ``g1`` through ``f = gamma(t0)``, evaluated at ``1/(1 - t0)``
(that extended geodesic lands back on ``g0``); the end-point case uses
``1/t0`` with the roles of the endpoints swapped.
"""

from __future__ import annotations

from typing import Literal

import numpy as np

from bigeo.dual import Dual
from bigeo.lie import (
    GeodesicParams,
    GroupId,
    GroupPoint,
    Tangent,
    geodesic_mat,
    inv_mat,
    project_algebra,
)

Endpoint = Literal["start", "end"]

#: minimal distance of t0 from the endpoint whose differential degenerates
T0_MARGIN = 1e-9


def d_geodesic_mat(group: GroupId, g0, g1, t, V, endpoint: Endpoint = "start"):
    """Batched directional derivative of an endpoint of the geodesic map.

    ``V`` holds ambient tangents at ``g0`` (``endpoint="start"``) or ``g1``.
    Returns ``(gamma, X)`` with ``gamma = geodesic(t)`` and ``X`` the
    derivative in identity coordinates at ``gamma``, projected onto the Lie
    algebra.
    """
    if endpoint == "start":
        out = geodesic_mat(group, Dual(g0, V), g1, t)
    elif endpoint == "end":
        out = geodesic_mat(group, g0, Dual(g1, V), t)
    else:
        raise ValueError(f"endpoint must be 'start' or 'end', got {endpoint!r}")
    gam = out.re
    return gam, project_algebra(group, inv_mat(group, gam) @ out.du)


def _check_t0(t0, endpoint: Endpoint):
    t0 = np.asarray(t0, dtype=float)
    if np.any(t0 < 0.0) or np.any(t0 > 1.0):
        raise ValueError("t0 must lie in [0, 1]")
    if endpoint == "start" and np.any(t0 > 1.0 - T0_MARGIN):
        raise ValueError("start-point differential is singular at t0 = 1")
    if endpoint == "end" and np.any(t0 < T0_MARGIN):
        raise ValueError("end-point differential is singular at t0 = 0")
    return t0


def inv_d_geodesic_mat(group: GroupId, g0, g1, t0, W, endpoint: Endpoint = "start", f=None):
    """Batched inverse differential.

    ``W`` are ambient tangents at ``f = geodesic(t0)`` (computed if not
    given). Returns identity coordinates of the preimage at ``g0`` (start) or
    ``g1`` (end).
    """
    t0 = _check_t0(t0, endpoint)
    if f is None:
        f = geodesic_mat(group, g0, g1, t0)
    if endpoint == "start":
        _, X = d_geodesic_mat(group, g1, f, 1.0 / (1.0 - t0), W, "end")
    else:
        _, X = d_geodesic_mat(group, g0, f, 1.0 / t0, W, "end")
    return X


def d_geodesic(params: GeodesicParams, t0: float, v: Tangent, endpoint: Endpoint = "start") -> Tangent:
    """Push ``v`` (at g0 or g1) forward to the geodesic point at ``t0``."""
    grp = params.group
    anchor = params.g0 if endpoint == "start" else params.g1
    if v.group != grp or not np.allclose(v.base.mat, anchor.mat, atol=1e-9):
        raise ValueError(f"vector must be based at the {endpoint} point")
    gam, X = d_geodesic_mat(grp, params.g0.mat, params.g1.mat, t0, v.mat, endpoint)
    base = GroupPoint(grp, gam)
    return Tangent(base, base.mat @ X)


def inv_d_geodesic(params: GeodesicParams, t0: float, w: Tangent, endpoint: Endpoint = "start") -> Tangent:
    """Pull ``w`` at ``geodesic(t0)`` back to the start (or end) point."""
    grp = params.group
    t0 = float(_check_t0(t0, endpoint))
    f = geodesic_mat(grp, params.g0.mat, params.g1.mat, t0)
    if w.group != grp or not np.allclose(w.base.mat, f, atol=1e-9):
        raise ValueError("vector must be based at geodesic(t0)")
    X = inv_d_geodesic_mat(grp, params.g0.mat, params.g1.mat, t0, w.mat, endpoint, f=f)
    anchor = params.g0 if endpoint == "start" else params.g1
    return Tangent(anchor, anchor.mat @ X)
