"""Second-order jets: value, gradient and Hessian carried through arithmetic.

Arrays are batched: ``value`` has shape ``S``, ``grad`` ``S + (n,)`` and
``hess`` ``S + (n, n)``. Every operation builds the Hessian from symmetric
pieces, so it stays exactly symmetric.
"""

from __future__ import annotations

import numpy as np


class DomainError(ValueError):
    """Evaluation left the domain of an operation (division by ~0, sqrt of a negative)."""


DIV_EPS = 1e-14


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


class Jet2:
    __slots__ = ("value", "grad", "hess")
    __array_priority__ = 100

    def __init__(self, value, grad, hess):
        self.value = np.asarray(value, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    @classmethod
    def constant(cls, c, shape=(), nvars: int = 4) -> "Jet2":
        value = np.broadcast_to(np.asarray(c, dtype=float), shape).copy()
        return cls(value, np.zeros(shape + (nvars,)), np.zeros(shape + (nvars, nvars)))

    @classmethod
    def variable(cls, x, index: int, nvars: int = 4) -> "Jet2":
        x = np.asarray(x, dtype=float)
        grad = np.zeros(x.shape + (nvars,))
        grad[..., index] = 1.0
        return cls(x.copy(), grad, np.zeros(x.shape + (nvars, nvars)))

    @property
    def shape(self):
        return self.value.shape

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        tail = (slice(None),)
        return Jet2(self.value[idx], self.grad[idx + tail], self.hess[idx + tail + tail])

    def __repr__(self):
        return f"Jet2(value={self.value!r}, grad={self.grad!r})"

    def _coerce(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        n = self.grad.shape[-1]
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(other.shape, self.shape)
        return Jet2.constant(other, shape, n)

    def __add__(self, other):
        o = self._coerce(other)
        return Jet2(self.value + o.value, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=float)
            return Jet2(self.value * c, self.grad * c[..., None], self.hess * c[..., None, None])
        f, g = self, other
        fv, gv = f.value[..., None], g.value[..., None]
        hess = (
            fv[..., None] * g.hess
            + gv[..., None] * f.hess
            + (_outer(f.grad, g.grad) + _outer(g.grad, f.grad))
        )
        return Jet2(f.value * g.value, fv * g.grad + gv * f.grad, hess)

    __rmul__ = __mul__

    def apply(self, f0, f1, f2) -> "Jet2":
        """Compose with a scalar function given its value and first two derivatives."""
        d1 = f1[..., None]
        return Jet2(f0, d1 * self.grad, d1[..., None] * self.hess + f2[..., None, None] * _outer(self.grad, self.grad))

    def reciprocal(self, label: str = "denominator") -> "Jet2":
        v = self.value
        if np.any(np.abs(v) < DIV_EPS):
            raise DomainError(f"division by ~0 in {label}")
        return self.apply(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, n: int):
        if int(n) != n:
            raise TypeError("jets support integer exponents only")
        n = int(n)
        if n == 0:
            return Jet2.constant(1.0, self.shape, self.grad.shape[-1])
        if n < 0:
            return (self ** (-n)).reciprocal()
        v = self.value
        return self.apply(v**n, n * v ** (n - 1), n * (n - 1) * v ** max(n - 2, 0) if n >= 2 else np.zeros_like(v))

    def sqrt(self, label: str = "sqrt argument") -> "Jet2":
        v = self.value
        if np.any(v <= 0.0):
            raise DomainError(f"sqrt of non-positive value in {label}")
        r = np.sqrt(v)
        return self.apply(r, 0.5 / r, -0.25 / (r * v))

    def sin(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self.apply(s, c, -s)

    def cos(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self.apply(c, -s, -c)

    def exp(self):
        e = np.exp(self.value)
        return self.apply(e, e, e)

    def tanh(self):
        t = np.tanh(self.value)
        d = 1.0 - t * t
        return self.apply(t, d, -2.0 * t * d)

    def cosh(self):
        c, s = np.cosh(self.value), np.sinh(self.value)
        return self.apply(c, s, c)

    def sinh(self):
        c, s = np.cosh(self.value), np.sinh(self.value)
        return self.apply(s, c, s)


def stack(jets, axis: int = -1) -> Jet2:
    """Stack scalar-shaped jets along a new value axis (negative axes count from the value shape)."""
    ndim = jets[0].value.ndim + 1
    ax = axis % ndim
    return Jet2(
        np.stack([j.value for j in jets], axis=ax),
        np.stack([j.grad for j in jets], axis=ax),
        np.stack([j.hess for j in jets], axis=ax),
    )
