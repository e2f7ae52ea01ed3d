"""Matrix Lie groups and the canonical Cartan-Schouten calculus.

All groups are homogeneous matrix groups, so translations and their
differentials are plain matrix products. Tangent vectors are stored in
ambient matrix coordinates at their base point; ``base.mat^-1 @ mat`` gives
the identity (Lie algebra) coordinates.

The array kernels (``exp_mat``, ``log_mat``, ``inv_mat``, ``geodesic_mat``)
broadcast over leading axes and accept :class:`bigeo.dual.Dual` inputs, which
is how geodesic differentials are obtained.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from bigeo import dual as D

#: rotation angles below this use Taylor expansions of the closed forms
SMALL_ANGLE = 1e-4
#: log is refused at or beyond pi - BRANCH_MARGIN
BRANCH_MARGIN = 1e-6

Side = Literal["left", "right"]


class BranchCutError(ArithmeticError):
    """Group log requested outside the principal branch (angle near pi)."""


class GroupMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class GroupId:
    kind: str  # "SO3", "SE3" or "R"
    n: int = 3

    def __post_init__(self):
        if self.kind not in ("SO3", "SE3", "R"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.kind == "R" and self.n < 1:
            raise ValueError("Euclidean dimension must be >= 1")

    @property
    def size(self) -> int:
        """Side length of the matrix representation."""
        return {"SO3": 3, "SE3": 4}.get(self.kind, self.n + 1)

    @property
    def dim(self) -> int:
        return {"SO3": 3, "SE3": 6}.get(self.kind, self.n)

    def __str__(self):
        return f"R{self.n}" if self.kind == "R" else self.kind


SO3 = GroupId("SO3")
SE3 = GroupId("SE3")


def euclidean(n: int) -> GroupId:
    return GroupId("R", n)


# ---------------------------------------------------------------------------
# coordinates

def skew(w):
    """(..., 3) -> (..., 3, 3) cross-product matrices."""
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape + (3,))
    out[..., 0, 1], out[..., 0, 2] = -w[..., 2], w[..., 1]
    out[..., 1, 0], out[..., 1, 2] = w[..., 2], -w[..., 0]
    out[..., 2, 0], out[..., 2, 1] = -w[..., 1], w[..., 0]
    return out


def unskew(W):
    W = np.asarray(W, dtype=float)
    return 0.5 * np.stack(
        [W[..., 2, 1] - W[..., 1, 2], W[..., 0, 2] - W[..., 2, 0], W[..., 1, 0] - W[..., 0, 1]],
        axis=-1,
    )


def hat(group: GroupId, coords) -> np.ndarray:
    """Orthonormal coordinates -> Lie algebra matrix.

    SE3 coordinates are ordered (rotation, translation). The basis is
    orthonormal for <A, B> = tr(A^T B)/2 on the rotational block plus the
    Euclidean product on the translational column.
    """
    c = np.asarray(coords, dtype=float)
    if c.shape[-1] != group.dim:
        raise ValueError(f"{group} expects {group.dim} coordinates, got {c.shape[-1]}")
    if group.kind == "SO3":
        return skew(c)
    out = np.zeros(c.shape[:-1] + (group.size, group.size))
    if group.kind == "SE3":
        out[..., :3, :3] = skew(c[..., :3])
        out[..., :3, 3] = c[..., 3:]
    else:
        out[..., :-1, -1] = c
    return out


def vee(group: GroupId, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if group.kind == "SO3":
        return unskew(X)
    if group.kind == "SE3":
        return np.concatenate([unskew(X[..., :3, :3]), X[..., :3, 3]], axis=-1)
    return X[..., :-1, -1].copy()


def project_algebra(group: GroupId, X) -> np.ndarray:
    """Orthogonal projection of an ambient matrix onto the Lie algebra."""
    return hat(group, vee(group, X))


def aux_norm(group: GroupId, X) -> np.ndarray:
    """Norm of identity-based tangents: sqrt(tr(W^T W)/2 + |u|^2)."""
    return np.linalg.norm(vee(group, X), axis=-1)


# ---------------------------------------------------------------------------
# array kernels (broadcasting, Dual-aware)

def _pack_se3(R, x, corner=1.0):
    def build(R, x, c):
        R = np.asarray(R)
        x = np.asarray(x)
        shape = np.broadcast_shapes(R.shape[:-2], x.shape[:-1])
        out = np.zeros(shape + (4, 4))
        out[..., :3, :3] = R
        out[..., :3, 3] = x
        out[..., 3, 3] = c
        return out

    if isinstance(R, D.Dual) or isinstance(x, D.Dual):
        return D.Dual(build(D.real(R), D.real(x), corner), build(D.tangent(R), D.tangent(x), 0.0))
    return build(R, x, corner)


def _eye(n):
    return np.eye(n)


def _exp_coeffs(th2):
    """sin(th)/th, (1-cos th)/th^2, (th - sin th)/th^3 as functions of th^2."""
    small = D.real(th2) < SMALL_ANGLE**2
    t2 = D.where(small, 1.0, th2)
    th = D.sqrt(t2)
    s = D.sin(th)
    h = D.sin(0.5 * th) / (0.5 * th)
    a = D.where(small, 1.0 - th2 / 6.0 + th2 * th2 / 120.0, s / th)
    b = D.where(small, 0.5 - th2 / 24.0 + th2 * th2 / 720.0, 0.5 * h * h)
    c = D.where(small, 1.0 / 6.0 - th2 / 120.0 + th2 * th2 / 5040.0, (th - s) / (t2 * th))
    return a, b, c


def _so3_exp(W):
    w = D.linear(unskew, W)
    th2 = (w * w).sum(-1)
    a, b, _ = _exp_coeffs(th2)
    return _eye(3) + a[..., None, None] * W + b[..., None, None] * (W @ W)


def _so3_log(R):
    s = D.linear(lambda M: unskew(M), R)  # (R - R^T)/2 in vector form
    c = 0.5 * (R[..., 0, 0] + R[..., 1, 1] + R[..., 2, 2] - 1.0)
    s2 = (s * s).sum(-1)
    s2r, cr = D.real(s2), D.real(c)
    theta = np.arctan2(np.sqrt(s2r), cr)
    if np.any(theta >= np.pi - BRANCH_MARGIN) or not np.all(np.isfinite(theta)):
        raise BranchCutError(
            f"rotation angle {float(np.max(theta)):.9g} lies outside the maximal normal "
            "convex neighborhood (principal branch requires angle < pi - 1e-6)"
        )
    small = (s2r < SMALL_ANGLE**2) & (cr > 0)
    s2safe = D.where(small, 1.0, s2)
    sn = D.sqrt(s2safe)
    # theta/sin(theta) = arcsin(x)/x series in x^2 = sin^2(theta) on the small branch
    f = D.where(small, 1.0 + s2 / 6.0 + 3.0 * s2 * s2 / 40.0, D.arctan2(sn, c) / sn)
    return D.linear(skew, f[..., None] * s)


def _se3_exp(X):
    W = X[..., :3, :3]
    v = X[..., :3, 3]
    w = D.linear(unskew, W)
    th2 = (w * w).sum(-1)
    a, b, c = _exp_coeffs(th2)
    W2 = W @ W
    R = _eye(3) + a[..., None, None] * W + b[..., None, None] * W2
    V = _eye(3) + b[..., None, None] * W + c[..., None, None] * W2
    x = (V @ v[..., None])[..., 0]
    return _pack_se3(R, x)


def _se3_log(G):
    W = _so3_log(G[..., :3, :3])
    x = G[..., :3, 3]
    w = D.linear(unskew, W)
    th2 = (w * w).sum(-1)
    small = D.real(th2) < SMALL_ANGLE**2
    t2 = D.where(small, 1.0, th2)
    half = 0.5 * D.sqrt(t2)
    # (1 - (th/2) cot(th/2)) / th^2
    d = D.where(
        small,
        1.0 / 12.0 + th2 / 720.0 + th2 * th2 / 30240.0,
        (1.0 - half * D.cos(half) / D.sin(half)) / t2,
    )
    Vinv = _eye(3) - 0.5 * W + d[..., None, None] * (W @ W)
    u = (Vinv @ x[..., None])[..., 0]
    return _pack_se3(W, u, corner=0.0)


def exp_mat(group: GroupId, X):
    """Group exponential of identity-based algebra matrices."""
    if group.kind == "SO3":
        return _so3_exp(X)
    if group.kind == "SE3":
        return _se3_exp(X)
    return _eye(group.size) + X


def log_mat(group: GroupId, G):
    """Principal group logarithm; raises BranchCutError near angle pi."""
    if group.kind == "SO3":
        return _so3_log(G)
    if group.kind == "SE3":
        return _se3_log(G)
    return G - _eye(group.size)


def inv_mat(group: GroupId, G):
    if group.kind == "SO3":
        return G.mT if isinstance(G, D.Dual) else np.swapaxes(G, -1, -2)
    if group.kind == "SE3":
        R = G[..., :3, :3]
        Rt = R.mT if isinstance(R, D.Dual) else np.swapaxes(R, -1, -2)
        x = G[..., :3, 3]
        return _pack_se3(Rt, -(Rt @ x[..., None])[..., 0])
    return 2.0 * _eye(group.size) - G


def geodesic_mat(group: GroupId, g0, g1, t):
    """g0 exp(t log(g0^-1 g1)), broadcasting ``t`` over leading axes."""
    t = np.asarray(t, dtype=float) if not isinstance(t, D.Dual) else t
    X = log_mat(group, inv_mat(group, g0) @ g1)
    return g0 @ exp_mat(group, t[..., None, None] * X)


# ---------------------------------------------------------------------------
# value types

@dataclass(frozen=True, eq=False)
class GroupPoint:
    group: GroupId
    mat: np.ndarray

    def __post_init__(self):
        m = np.array(self.mat, dtype=float)
        if m.shape != (self.group.size, self.group.size):
            raise ValueError(f"{self.group} expects a {self.group.size}x{self.group.size} matrix, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    def __matmul__(self, other: "GroupPoint") -> "GroupPoint":
        return compose(self, other)

    def inv(self) -> "GroupPoint":
        return inverse(self)

    @property
    def rotation(self) -> np.ndarray:
        return self.mat[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.mat[:-1, -1]

    def is_valid(self, tol: float = 1e-9) -> bool:
        return point_is_valid(self.group, self.mat, tol)

    def __repr__(self):
        return f"GroupPoint({self.group}, {self.mat.tolist()})"


@dataclass(frozen=True, eq=False)
class Tangent:
    base: GroupPoint
    mat: np.ndarray

    def __post_init__(self):
        m = np.array(self.mat, dtype=float)
        if m.shape != self.base.mat.shape:
            raise ValueError(f"tangent shape {m.shape} does not match base {self.base.mat.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def group(self) -> GroupId:
        return self.base.group

    def at_identity(self) -> np.ndarray:
        """Identity coordinates: base^-1 @ mat."""
        return inv_mat(self.group, self.base.mat) @ self.mat

    def coords(self) -> np.ndarray:
        return vee(self.group, self.at_identity())

    def norm(self) -> float:
        return float(aux_norm(self.group, self.at_identity()))

    def _check(self, other: "Tangent"):
        if other.group != self.group or not np.allclose(other.base.mat, self.base.mat, atol=1e-9):
            raise ValueError("tangent vectors live at different base points")

    def __add__(self, other: "Tangent") -> "Tangent":
        self._check(other)
        return Tangent(self.base, self.mat + other.mat)

    def __sub__(self, other: "Tangent") -> "Tangent":
        self._check(other)
        return Tangent(self.base, self.mat - other.mat)

    def __mul__(self, a: float) -> "Tangent":
        return Tangent(self.base, a * self.mat)

    __rmul__ = __mul__

    def __neg__(self) -> "Tangent":
        return Tangent(self.base, -self.mat)


@dataclass(frozen=True, eq=False)
class GeodesicParams:
    g0: GroupPoint
    g1: GroupPoint

    def __post_init__(self):
        _same_group(self.g0, self.g1)

    @property
    def group(self) -> GroupId:
        return self.g0.group


def point_is_valid(group: GroupId, M, tol: float = 1e-9) -> bool:
    M = np.asarray(M, dtype=float)
    if M.shape != (group.size, group.size) or not np.all(np.isfinite(M)):
        return False
    I = np.eye(group.size)
    if group.kind == "R":
        return bool(np.abs(M[:, :-1] - I[:, :-1]).max() <= tol and abs(M[-1, -1] - 1.0) <= tol)
    R = M[:3, :3]
    ok = np.linalg.norm(R.T @ R - np.eye(3)) <= tol and abs(np.linalg.det(R) - 1.0) <= tol
    if group.kind == "SE3":
        ok = ok and np.abs(M[3] - I[3]).max() <= tol
    return bool(ok)


def tangent_is_valid(v: Tangent, tol: float = 1e-9) -> bool:
    X = v.at_identity()
    return bool(np.linalg.norm(X - project_algebra(v.group, X)) <= tol * max(1.0, np.linalg.norm(X)))


# ---------------------------------------------------------------------------
# constructors

def identity(group: GroupId) -> GroupPoint:
    return GroupPoint(group, np.eye(group.size))


def se3(R, x) -> GroupPoint:
    return GroupPoint(SE3, _pack_se3(np.asarray(R, float), np.asarray(x, float)))


def so3(R) -> GroupPoint:
    return GroupPoint(SO3, R)


def rn(x) -> GroupPoint:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    M = np.eye(x.size + 1)
    M[:-1, -1] = x
    return GroupPoint(euclidean(x.size), M)


def algebra(group: GroupId, coords) -> Tangent:
    """Identity-based tangent from orthonormal coordinates."""
    return Tangent(identity(group), hat(group, coords))


def tangent_from_coords(base: GroupPoint, coords) -> Tangent:
    """Left-translate algebra coordinates to ``base``."""
    return Tangent(base, base.mat @ hat(base.group, coords))


# ---------------------------------------------------------------------------
# group operations

def _same_group(a: GroupPoint, b: GroupPoint):
    if a.group != b.group:
        raise GroupMismatchError(f"group mismatch: {a.group} vs {b.group}")


def compose(a: GroupPoint, b: GroupPoint) -> GroupPoint:
    _same_group(a, b)
    M = a.mat @ b.mat
    if a.group.kind != "SO3":
        # keep the homogeneous rows exact
        M[-1] = 0.0
        M[-1, -1] = 1.0
    if a.group.kind == "R":
        M[:-1, :-1] = np.eye(a.group.n)
    return GroupPoint(a.group, M)


def inverse(g: GroupPoint) -> GroupPoint:
    return GroupPoint(g.group, inv_mat(g.group, g.mat))


def _require_identity_base(v: Tangent):
    if not np.allclose(v.base.mat, np.eye(v.group.size), rtol=0.0, atol=1e-9):
        raise ValueError("tangent must be based at the identity")


def group_exp(v: Tangent) -> GroupPoint:
    _require_identity_base(v)
    return GroupPoint(v.group, exp_mat(v.group, v.mat))


def group_log(g: GroupPoint) -> Tangent:
    return Tangent(identity(g.group), log_mat(g.group, g.mat))


def translate(g: GroupPoint, h: GroupPoint, side: Side) -> GroupPoint:
    if side == "left":
        return compose(h, g)
    if side == "right":
        return compose(g, h)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def d_translate(v: Tangent, h: GroupPoint, side: Side) -> Tangent:
    _same_group(v.base, h)
    if side == "left":
        return Tangent(compose(h, v.base), h.mat @ v.mat)
    if side == "right":
        return Tangent(compose(v.base, h), v.mat @ h.mat)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def _require_base(g: GroupPoint, v: Tangent):
    _same_group(g, v.base)
    if not np.allclose(g.mat, v.base.mat, rtol=0.0, atol=1e-9):
        raise ValueError("tangent is not based at the given point")


def ccs_exp(g: GroupPoint, v: Tangent) -> GroupPoint:
    """Connection exponential: g exp(g^-1 v)."""
    _require_base(g, v)
    X = inv_mat(g.group, g.mat) @ v.mat
    return GroupPoint(g.group, g.mat @ exp_mat(g.group, X))


def ccs_exp_right(g: GroupPoint, v: Tangent) -> GroupPoint:
    """Right-translated form exp(v g^-1) g; agrees with :func:`ccs_exp`."""
    _require_base(g, v)
    X = v.mat @ inv_mat(g.group, g.mat)
    return GroupPoint(g.group, exp_mat(g.group, X) @ g.mat)


def ccs_log(g: GroupPoint, f: GroupPoint) -> Tangent:
    """Connection logarithm: g log(g^-1 f)."""
    _same_group(g, f)
    return Tangent(g, g.mat @ log_mat(g.group, inv_mat(g.group, g.mat) @ f.mat))


def ccs_log_right(g: GroupPoint, f: GroupPoint) -> Tangent:
    _same_group(g, f)
    return Tangent(g, log_mat(g.group, f.mat @ inv_mat(g.group, g.mat)) @ g.mat)


def geodesic(t: float, params: GeodesicParams) -> GroupPoint:
    grp = params.group
    if t == 0.0:
        return params.g0
    if t == 1.0:
        return params.g1
    return GroupPoint(grp, geodesic_mat(grp, params.g0.mat, params.g1.mat, t))


def geodesic_right(t: float, params: GeodesicParams) -> GroupPoint:
    """exp(t log(g1 g0^-1)) g0, the right-translated form."""
    grp = params.group
    X = log_mat(grp, params.g1.mat @ inv_mat(grp, params.g0.mat))
    return GroupPoint(grp, exp_mat(grp, t * X) @ params.g0.mat)


def log_distance(a: GroupPoint, b: GroupPoint) -> float:
    """Auxiliary-norm size of log(a^-1 b); inf when the log is undefined."""
    _same_group(a, b)
    try:
        return float(aux_norm(a.group, log_mat(a.group, inv_mat(a.group, a.mat) @ b.mat)))
    except BranchCutError:
        return float("inf")
