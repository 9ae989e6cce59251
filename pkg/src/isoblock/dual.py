"""Forward-mode automatic differentiation with vectorized dual numbers.

A :class:`Dual` carries a value array of shape ``S`` and a gradient array of
shape ``(n,) + S``: one tangent direction per coordinate, so a single sweep
through an expression tree yields a full Jacobian row at every point of a
batch.
"""

from __future__ import annotations

import numpy as np


class Dual:
    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = val
        self.grad = grad

    @classmethod
    def variables(cls, coords):
        """Seed dual numbers for coordinates ``coords`` (shape ``(n,) + S``)."""
        coords = np.asarray(coords, dtype=float)
        n = coords.shape[0]
        eye = np.eye(n).reshape((n, n) + (1,) * (coords.ndim - 1))
        out = []
        for i in range(n):
            grad = np.broadcast_to(eye[:, i], (n,) + coords.shape[1:])
            out.append(cls(coords[i], grad))
        return out

    def __repr__(self):
        return f"Dual({self.val!r}, {self.grad!r})"

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.grad + other.grad)
        return Dual(self.val + other, self.grad)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.grad - other.grad)
        return Dual(self.val - other, self.grad)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.grad)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.grad * other.val + other.grad * self.val)
        return Dual(self.val * other, self.grad * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            q = self.val / other.val
            return Dual(q, (self.grad - other.grad * q) / other.val)
        return Dual(self.val / other, self.grad / other)

    def __rtruediv__(self, other):
        q = other / self.val
        return Dual(q, -self.grad * (q / self.val))

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)):
            raise TypeError("dual numbers support integer powers only")
        if k == 0:
            return Dual(np.ones_like(self.val), np.zeros_like(self.grad))
        return Dual(self.val**k, self.grad * (k * self.val ** (k - 1)))


def dsin(a: Dual) -> Dual:
    return Dual(np.sin(a.val), a.grad * np.cos(a.val))


def dcos(a: Dual) -> Dual:
    return Dual(np.cos(a.val), -a.grad * np.sin(a.val))


def dexp(a: Dual) -> Dual:
    e = np.exp(a.val)
    return Dual(e, a.grad * e)


def dsqrt(a: Dual) -> Dual:
    r = np.sqrt(a.val)
    return Dual(r, a.grad * (0.5 / r))


def lift(value, n, shape):
    """Promote a constant (possibly scalar) to a Dual with zero gradient."""
    if isinstance(value, Dual):
        return value
    val = np.broadcast_to(np.asarray(value, dtype=float), shape)
    return Dual(val, np.zeros((n,) + tuple(shape)))
