import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from bigeo.geodiff import d_geodesic, d_geodesic_mat, inv_d_geodesic, inv_d_geodesic_mat
from bigeo.lie import (
    SE3,
    SO3,
    GeodesicParams,
    GroupPoint,
    Tangent,
    d_translate,
    euclidean,
    exp_mat,
    geodesic,
    geodesic_mat,
    hat,
    rn,
    tangent_from_coords,
    translate,
)
from conftest import random_coords, random_point

T0S = (0.1, 0.25, 0.5, 0.75, 0.9)


def random_params(rng, group=SE3, max_angle=2.5):
    g0 = random_point(rng, group)
    g1 = GroupPoint(group, g0.mat @ exp_mat(group, hat(group, random_coords(rng, group, 1, max_angle)[0])))
    return GeodesicParams(g0, g1)


def five_point(f, h):
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


def fd_differential(params, t0, X, endpoint, h=1e-3):
    """Central differences of t0 -> geodesic along the curve anchor * expm(s X)."""
    grp = params.group
    g0, g1 = params.g0.mat, params.g1.mat
    if endpoint == "start":
        return five_point(lambda s: geodesic_mat(grp, g0 @ expm(s * X), g1, t0), h)
    return five_point(lambda s: geodesic_mat(grp, g0, g1 @ expm(s * X), t0), h)


def rel_err(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


# --- closed forms ------------------------------------------------------------


@pytest.mark.parametrize("t0", [0.0, *T0S])
def test_euclidean_forward_is_scaled(t0, rng):
    p = GeodesicParams(rn(rng.normal(size=3)), rn(rng.normal(size=3)))
    v = tangent_from_coords(p.g0, rng.normal(size=3))
    np.testing.assert_allclose(d_geodesic(p, t0, v, "start").coords(), (1 - t0) * v.coords(), atol=1e-14)
    u = tangent_from_coords(p.g1, rng.normal(size=3))
    np.testing.assert_allclose(d_geodesic(p, t0, u, "end").coords(), t0 * u.coords(), atol=1e-14)


@pytest.mark.parametrize("t0", [0.0, *T0S])
def test_euclidean_inverse_is_scaled(t0, rng):
    p = GeodesicParams(rn(rng.normal(size=2)), rn(rng.normal(size=2)))
    w = tangent_from_coords(geodesic(t0, p), rng.normal(size=2))
    np.testing.assert_allclose(inv_d_geodesic(p, t0, w, "start").coords(), w.coords() / (1 - t0), atol=1e-13)
    if t0 > 0:
        np.testing.assert_allclose(inv_d_geodesic(p, t0, w, "end").coords(), w.coords() / t0, atol=1e-13)


@pytest.mark.parametrize("group", [SO3, SE3], ids=str)
def test_start_differential_is_identity_at_zero(group, rng):
    p = random_params(rng, group)
    v = tangent_from_coords(p.g0, rng.normal(size=group.dim))
    np.testing.assert_allclose(d_geodesic(p, 0.0, v).mat, v.mat, atol=1e-13)
    np.testing.assert_allclose(inv_d_geodesic(p, 0.0, v).mat, v.mat, atol=1e-12)


def test_end_differential_vanishes_at_zero(rng):
    p = random_params(rng)
    u = tangent_from_coords(p.g1, rng.normal(size=6))
    assert np.abs(d_geodesic(p, 0.0, u, "end").mat).max() < 1e-13


# --- finite-difference oracle ------------------------------------------------


@pytest.mark.parametrize("group", [SO3, SE3, euclidean(3)], ids=str)
@pytest.mark.parametrize("endpoint", ["start", "end"])
def test_forward_matches_finite_differences(group, endpoint, rng):
    for _ in range(20):
        p = random_params(rng, group)
        t0 = rng.uniform(0, 1)
        X = hat(group, rng.normal(size=group.dim))
        anchor = p.g0 if endpoint == "start" else p.g1
        out = d_geodesic(p, t0, Tangent(anchor, anchor.mat @ X), endpoint)
        assert rel_err(out.mat, fd_differential(p, t0, X, endpoint)) < 1e-6


# the start differential vanishes at t0 = 1, where a relative error is meaningless
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t0=st.floats(0.0, 0.95))
def test_forward_fd_property(seed, t0):
    rng = np.random.default_rng(seed)
    p = random_params(rng)
    X = hat(SE3, rng.normal(size=6))
    out = d_geodesic(p, t0, Tangent(p.g0, p.g0.mat @ X))
    assert rel_err(out.mat, fd_differential(p, t0, X, "start")) < 1e-6


def test_batched_matches_single(rng):
    p = random_params(rng)
    ts = np.array(T0S)
    V = p.g0.mat @ hat(SE3, rng.normal(size=(len(ts), 6)))
    gam, X = d_geodesic_mat(SE3, p.g0.mat, p.g1.mat, ts, V, "start")
    for k, t0 in enumerate(ts):
        single = d_geodesic(p, t0, Tangent(p.g0, V[k]))
        np.testing.assert_allclose(gam[k] @ X[k], single.mat, atol=1e-13)


# --- inverse -----------------------------------------------------------------


@pytest.mark.parametrize("endpoint", ["start", "end"])
@pytest.mark.parametrize("t0", T0S)
def test_inversion_identity(endpoint, t0, rng):
    for _ in range(40):
        p = random_params(rng)
        w = tangent_from_coords(geodesic(t0, p), rng.normal(size=6))
        back = d_geodesic(p, t0, inv_d_geodesic(p, t0, w, endpoint), endpoint)
        assert rel_err(back.mat, w.mat) < 1e-6
        np.testing.assert_allclose(back.base.mat, w.base.mat, atol=1e-12)


@pytest.mark.parametrize("endpoint", ["start", "end"])
def test_inverse_is_linear(endpoint, rng):
    for _ in range(20):
        p = random_params(rng)
        t0 = rng.uniform(0.05, 0.95)
        f = geodesic(t0, p)
        w1, w2 = (tangent_from_coords(f, rng.normal(size=6)) for _ in range(2))
        a, b = rng.normal(size=2)
        lhs = inv_d_geodesic(p, t0, a * w1 + b * w2, endpoint)
        rhs = a * inv_d_geodesic(p, t0, w1, endpoint) + b * inv_d_geodesic(p, t0, w2, endpoint)
        assert np.abs(lhs.mat - rhs.mat).max() < 1e-8


@pytest.mark.parametrize("side", ["left", "right"])
@pytest.mark.parametrize("endpoint", ["start", "end"])
def test_inverse_is_equivariant(side, endpoint, rng):
    for _ in range(20):
        p = random_params(rng)
        h = random_point(rng)
        t0 = rng.uniform(0.05, 0.95)
        moved = GeodesicParams(translate(p.g0, h, side), translate(p.g1, h, side))
        w = tangent_from_coords(geodesic(t0, p), rng.normal(size=6))
        lhs = inv_d_geodesic(moved, t0, d_translate(w, h, side), endpoint)
        rhs = d_translate(inv_d_geodesic(p, t0, w, endpoint), h, side)
        assert np.abs(lhs.mat - rhs.mat).max() < 1e-8


def test_degenerate_t0_rejected(rng):
    p = random_params(rng)
    W = np.zeros((4, 4))
    with pytest.raises(ValueError, match="singular"):
        inv_d_geodesic_mat(SE3, p.g0.mat, p.g1.mat, 1.0, W, "start")
    with pytest.raises(ValueError, match="singular"):
        inv_d_geodesic_mat(SE3, p.g0.mat, p.g1.mat, 0.0, W, "end")
    with pytest.raises(ValueError):
        inv_d_geodesic_mat(SE3, p.g0.mat, p.g1.mat, 1.5, W, "start")


def test_base_point_checked(rng):
    p = random_params(rng)
    v = tangent_from_coords(p.g1, np.ones(6))
    with pytest.raises(ValueError):
        d_geodesic(p, 0.5, v, "start")
    with pytest.raises(ValueError):
        inv_d_geodesic(p, 0.5, v, "start")
    with pytest.raises(ValueError):
        d_geodesic(p, 0.5, tangent_from_coords(p.g0, np.ones(6)), "middle")
