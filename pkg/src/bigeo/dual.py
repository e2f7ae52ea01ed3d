"""Forward-mode dual numbers over numpy arrays.

A :class:`Dual` carries a value array ``re`` and a tangent array ``du`` of the
same shape. Arithmetic propagates first-order derivatives, so evaluating a
closed-form expression on ``Dual(x, v)`` yields the directional derivative of
that expression at ``x`` along ``v`` in ``du``.

The helpers at the bottom (:func:`sin`, :func:`where`, ...) accept plain
arrays as well, which lets the group kernels be written once for both cases.
"""

from __future__ import annotations

import numpy as np


class Dual:
    __slots__ = ("re", "du")
    # defer to our reflected operators instead of numpy's elementwise loops
    __array_ufunc__ = None

    def __init__(self, re, du=None):
        self.re = np.asarray(re, dtype=float)
        self.du = np.zeros_like(self.re) if du is None else np.asarray(du, dtype=float)

    @property
    def shape(self):
        return self.re.shape

    @property
    def ndim(self):
        return self.re.ndim

    @property
    def mT(self):
        return Dual(np.swapaxes(self.re, -1, -2), np.swapaxes(self.du, -1, -2))

    def __getitem__(self, idx):
        return Dual(self.re[idx], self.du[idx])

    def __neg__(self):
        return Dual(-self.re, -self.du)

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re + other.re, self.du + other.du)
        return Dual(self.re + other, self.du + np.zeros_like(other, dtype=float))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re - other.re, self.du - other.du)
        return Dual(self.re - other, self.du + np.zeros_like(other, dtype=float))

    def __rsub__(self, other):
        return Dual(other - self.re, -self.du + np.zeros_like(other, dtype=float))

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re * other.re, self.re * other.du + self.du * other.re)
        return Dual(self.re * other, self.du * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            q = self.re / other.re
            return Dual(q, (self.du - q * other.du) / other.re)
        return Dual(self.re / other, self.du / other)

    def __rtruediv__(self, other):
        q = other / self.re
        return Dual(q, -q * self.du / self.re)

    def __matmul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re @ other.re, self.re @ other.du + self.du @ other.re)
        return Dual(self.re @ other, self.du @ other)

    def __rmatmul__(self, other):
        return Dual(other @ self.re, other @ self.du)

    def sum(self, axis=None):
        return Dual(self.re.sum(axis=axis), self.du.sum(axis=axis))

    def __repr__(self):
        return f"Dual(re={self.re!r}, du={self.du!r})"


def real(x):
    return x.re if isinstance(x, Dual) else np.asarray(x, dtype=float)


def tangent(x):
    return x.du if isinstance(x, Dual) else np.zeros_like(np.asarray(x, dtype=float))


def linear(f, *args):
    """Apply a map that is linear in the array parts of ``args``.

    Constant offsets inside ``f`` must be passed via closures only when the
    caller handles the tangent part separately (see ``lie._pack``).
    """
    if any(isinstance(a, Dual) for a in args):
        return Dual(f(*(real(a) for a in args)), f(*(tangent(a) for a in args)))
    return f(*args)


def sin(x):
    if isinstance(x, Dual):
        return Dual(np.sin(x.re), np.cos(x.re) * x.du)
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(np.cos(x.re), -np.sin(x.re) * x.du)
    return np.cos(x)


def sqrt(x):
    if isinstance(x, Dual):
        r = np.sqrt(x.re)
        return Dual(r, 0.5 * x.du / r)
    return np.sqrt(x)


def arctan2(y, x):
    if isinstance(y, Dual) or isinstance(x, Dual):
        yr, xr = real(y), real(x)
        return Dual(np.arctan2(yr, xr), (xr * tangent(y) - yr * tangent(x)) / (xr * xr + yr * yr))
    return np.arctan2(y, x)


def where(cond, a, b):
    """Elementwise select; ``cond`` is a plain boolean array."""
    if isinstance(a, Dual) or isinstance(b, Dual):
        return Dual(np.where(cond, real(a), real(b)), np.where(cond, tangent(a), tangent(b)))
    return np.where(cond, a, b)
