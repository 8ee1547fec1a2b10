"""Truncated order-2 jets of complex tensors.

A :class:`Jet` carries a tensor value together with its first and second
partial derivatives with respect to the chart coordinates.  Derivative axes
are stored *leading*: ``grad[k]`` is the derivative along coordinate ``k`` and
``hess[k, l]`` the mixed second derivative, each with the tensor's own shape.
Keeping derivative axes in front means any bilinear numpy operation
(``*``, ``@``, ``einsum`` with ellipsis) lifts to jets through one generic
product rule.

Jets obtained by differentiating (see :meth:`Jet.deriv`) lose one order; the
``order`` attribute tracks which derivative levels are still valid, and asking
for a level that is gone raises :class:`JetOrderError`.
"""
from __future__ import annotations

from typing import Callable

import numpy as np


class JetOrderError(ValueError):
    """A derivative was requested beyond the order this jet still carries."""


class Jet:
    __slots__ = ("val", "grad", "hess", "order", "dim")
    __array_ufunc__ = None  # make ndarray (op) Jet defer to the reflected Jet method

    def __init__(self, val, grad=None, hess=None, order=None, dim=None):
        self.val = np.asarray(val, dtype=complex)
        if order is None:
            order = 2 if hess is not None else (1 if grad is not None else 0)
        if dim is None:
            if grad is None:
                raise ValueError("dim is required for an order-0 jet")
            dim = np.shape(grad)[0]
        self.order = order
        self.dim = dim
        self.grad = None if order < 1 else np.asarray(grad, dtype=complex)
        self.hess = None if order < 2 else np.asarray(hess, dtype=complex)

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, value, dim: int) -> "Jet":
        v = np.asarray(value, dtype=complex)
        return cls(v, np.zeros((dim,) + v.shape, complex), np.zeros((dim, dim) + v.shape, complex), 2, dim)

    @classmethod
    def variable(cls, point, index: int) -> "Jet":
        dim = len(point)
        g = np.zeros(dim, complex)
        g[index] = 1.0
        return cls(point[index], g, np.zeros((dim, dim), complex), 2, dim)

    @property
    def shape(self):
        return self.val.shape

    def _need(self, order):
        if self.order < order:
            raise JetOrderError(f"jet carries order {self.order}, order {order} requested")

    def gradient(self) -> np.ndarray:
        self._need(1)
        return self.grad

    def hessian(self) -> np.ndarray:
        self._need(2)
        return self.hess

    def truncate(self, order: int) -> "Jet":
        order = min(order, self.order)
        return Jet(self.val, self.grad, self.hess, order, self.dim)

    # structural ops -----------------------------------------------------
    def _map(self, fn: Callable[[np.ndarray, int], np.ndarray]) -> "Jet":
        """Apply a linear, shape-only operation (index, transpose, reshape)."""
        g = fn(self.grad, 1) if self.order >= 1 else None
        h = fn(self.hess, 2) if self.order >= 2 else None
        return Jet(fn(self.val, 0), g, h, self.order, self.dim)

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        return self._map(lambda a, n: a[(slice(None),) * n + key])

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def transpose(self, *axes) -> "Jet":
        nd = self.val.ndim
        perm = tuple(axes) if axes else tuple(reversed(range(nd)))
        return self._map(lambda a, n: a.transpose(tuple(range(n)) + tuple(p + n for p in perm)))

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return self._map(lambda a, n: a.reshape(a.shape[:n] + tuple(shape)))

    def conj(self) -> "Jet":
        return self._map(lambda a, n: np.conj(a))

    @property
    def real(self) -> "Jet":
        return self._map(lambda a, n: np.real(a).astype(complex))

    # arithmetic ---------------------------------------------------------
    def _linear2(self, other: "Jet", fn) -> "Jet":
        order = min(self.order, other.order)
        g = fn(self.grad, other.grad) if order >= 1 else None
        h = fn(self.hess, other.hess) if order >= 2 else None
        return Jet(fn(self.val, other.val), g, h, order, self.dim)

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.dim != self.dim:
                raise ValueError(f"jet dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return Jet.const(other, self.dim)

    def __add__(self, other):
        return self._linear2(self._coerce(other), np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._linear2(self._coerce(other), np.subtract)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return self._map(lambda a, n: -a)

    def __mul__(self, other):
        if np.isscalar(other):
            return self._map(lambda a, n: a * other)
        return multiply(self, self._coerce(other))

    def __rmul__(self, other):
        if np.isscalar(other):
            return self._map(lambda a, n: other * a)
        return multiply(self._coerce(other), self)

    def __truediv__(self, other):
        if np.isscalar(other):
            return self._map(lambda a, n: a / other)
        return self * reciprocal(self._coerce(other))

    def __matmul__(self, other):
        return matmul(self, self._coerce(other))

    def __rmatmul__(self, other):
        return matmul(self._coerce(other), self)

    # differentiation ----------------------------------------------------
    def deriv(self) -> "Jet":
        """Jet of the partial-derivative tensor; the new last axis indexes the coordinate."""
        self._need(1)
        val = np.moveaxis(self.grad, 0, -1)
        if self.order >= 2:
            # hess[k, l, ...] = d_k d_l; keep k as the derivative axis, move l last
            return Jet(val, np.moveaxis(self.hess, 1, -1), None, 1, self.dim)
        return Jet(val, None, None, 0, self.dim)

    def embed(self, dim: int, offset: int) -> "Jet":
        """Re-express this jet on a product chart where its coordinates start at ``offset``."""
        g = h = None
        if self.order >= 1:
            g = np.zeros((dim,) + self.shape, complex)
            g[offset:offset + self.dim] = self.grad
        if self.order >= 2:
            h = np.zeros((dim, dim) + self.shape, complex)
            h[offset:offset + self.dim, offset:offset + self.dim] = self.hess
        return Jet(self.val, g, h, self.order, dim)

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.shape}, val={self.val!r})"


def bilinear(fn, a: Jet, b: Jet) -> Jet:
    """Lift a bilinear numpy operation to jets by the product (Leibniz) rule."""
    order = min(a.order, b.order)
    val = fn(a.val, b.val)
    g = h = None
    if order >= 1:
        g = fn(a.grad, b.val) + fn(a.val, b.grad)
    if order >= 2:
        h = (fn(a.hess, b.val) + fn(a.val, b.hess)
             + fn(a.grad[:, None], b.grad[None, :]) + fn(a.grad[None, :], b.grad[:, None]))
    return Jet(val, g, h, order, a.dim)


def _expand(j: Jet, nd: int) -> Jet:
    extra = nd - j.val.ndim
    if extra <= 0:
        return j
    return j._map(lambda a, n: a.reshape(a.shape[:n] + (1,) * extra + a.shape[n:]))


def multiply(a: Jet, b: Jet) -> Jet:
    """Elementwise product with numpy broadcasting on the tensor axes."""
    nd = max(a.val.ndim, b.val.ndim)
    return bilinear(np.multiply, _expand(a, nd), _expand(b, nd))


_MATMUL_SPECS = {(2, 2): "ij,jk->ik", (2, 1): "ij,j->i", (1, 2): "j,jk->k", (1, 1): "j,j->"}


def matmul(a: Jet, b: Jet) -> Jet:
    return einsum(_MATMUL_SPECS[a.val.ndim, b.val.ndim], a, b)


def einsum(subscripts: str, a: Jet, b: Jet) -> Jet:
    """Bilinear ``np.einsum`` on jets; ``subscripts`` names only the tensor axes."""
    ins, out = subscripts.split("->")
    sa, sb = ins.split(",")
    return bilinear(lambda x, y: np.einsum(f"...{sa},...{sb}->...{out}", x, y), a, b)


def elementwise(a: Jet, f0, f1, f2) -> Jet:
    """Apply a scalar function given its value and first two derivatives at ``a.val``."""
    val = f0
    g = h = None
    if a.order >= 1:
        g = f1 * a.grad
    if a.order >= 2:
        h = f1 * a.hess + f2 * a.grad[:, None] * a.grad[None, :]
    return Jet(val, g, h, a.order, a.dim)


def reciprocal(a: Jet) -> Jet:
    v = a.val
    if np.any(np.abs(v) == 0):
        raise ZeroDivisionError("jet reciprocal of a vanishing value")
    return elementwise(a, 1 / v, -1 / v**2, 2 / v**3)


def exp(a: Jet) -> Jet:
    e = np.exp(a.val)
    return elementwise(a, e, e, e)


def inv(a: Jet) -> Jet:
    """Matrix inverse with jets: d(A^-1) = -A^-1 dA A^-1."""
    ai = np.linalg.inv(a.val)
    g = h = None
    if a.order >= 1:
        g = -ai @ a.grad @ ai
    if a.order >= 2:
        ag = a.grad @ ai  # dA_k A^-1
        h = ai @ (ag[:, None] @ a.grad[None, :] + ag[None, :] @ a.grad[:, None] - a.hess) @ ai
    return Jet(ai, g, h, a.order, a.dim)


def stack(jets, axis: int = 0) -> Jet:
    jets = list(jets)
    order = min(j.order for j in jets)
    dim = jets[0].dim
    val = np.stack([j.val for j in jets], axis=axis)
    g = np.stack([j.grad for j in jets], axis=axis + 1) if order >= 1 else None
    h = np.stack([j.hess for j in jets], axis=axis + 2) if order >= 2 else None
    return Jet(val, g, h, order, dim)


def concatenate(jets, axis: int = 0) -> Jet:
    jets = list(jets)
    order = min(j.order for j in jets)
    dim = jets[0].dim
    val = np.concatenate([j.val for j in jets], axis=axis)
    g = np.concatenate([j.grad for j in jets], axis=axis + 1) if order >= 1 else None
    h = np.concatenate([j.hess for j in jets], axis=axis + 2) if order >= 2 else None
    return Jet(val, g, h, order, dim)


def block(rows) -> Jet:
    """Assemble a block matrix of 2-d jets (``np.block`` analogue)."""
    return concatenate([concatenate(r, axis=1) for r in rows], axis=0)
