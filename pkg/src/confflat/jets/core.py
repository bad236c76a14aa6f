"""Order-3 truncated Taylor (jet) scalars and the math functions that
operate on them.

Evaluators of smooth maps are written against the functions in this module
(sin, cos, exp, ...), which accept plain floats and Jet instances alike, so
a single evaluator yields both values and exact derivatives.
"""
from __future__ import annotations

import math

import numpy as np

from . import _backend

__all__ = [
    "Jet",
    "variable",
    "constant",
    "apply_univariate",
    "sin",
    "cos",
    "exp",
    "log",
    "sqrt",
    "sinh",
    "cosh",
    "dot",
    "norm_sq",
]


class Jet:
    """Scalar together with its partial derivatives up to `order` in n
    chart variables."""

    __slots__ = ("n", "order", "v", "g", "h", "t")

    def __init__(self, n, order, v, g=None, h=None, t=None):
        self.n = n
        self.order = order
        self.v = float(v)
        self.g = np.zeros(n) if g is None else g
        self.h = np.zeros((n, n)) if h is None else h
        self.t = np.zeros((n, n, n)) if t is None else t

    # -- construction ---------------------------------------------------

    @staticmethod
    def variable(value, index, n, order=3):
        g = np.zeros(n)
        if order >= 1:
            g[index] = 1.0
        return Jet(n, order, value, g)

    @staticmethod
    def constant(value, n, order=3):
        return Jet(n, order, value)

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet(self.n, self.order, float(other))

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.n, min(self.order, other.order), self.v + other.v,
                       self.g + other.g, self.h + other.h, self.t + other.t)
        return Jet(self.n, self.order, self.v + float(other), self.g, self.h, self.t)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.n, self.order, -self.v, -self.g, -self.h, -self.t)

    def __sub__(self, other):
        return self.__add__(-other if isinstance(other, Jet) else -float(other))

    def __rsub__(self, other):
        return (-self).__add__(float(other))

    def __mul__(self, other):
        if isinstance(other, Jet):
            order = min(self.order, other.order)
            v, g, h, t = _backend.mul(order, self.v, self.g, self.h, self.t,
                                      other.v, other.g, other.h, other.t)
            return Jet(self.n, order, v, g, h, t)
        s = float(other)
        return Jet(self.n, self.order, self.v * s, self.g * s, self.h * s, self.t * s)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other._reciprocal()
        return self * (1.0 / float(other))

    def __rtruediv__(self, other):
        return self._reciprocal() * float(other)

    def __pow__(self, p):
        p = float(p)
        u = self.v
        return self._compose(u ** p, p * u ** (p - 1.0),
                             p * (p - 1.0) * u ** (p - 2.0),
                             p * (p - 1.0) * (p - 2.0) * u ** (p - 3.0))

    def _compose(self, c0, c1, c2, c3):
        v, g, h, t = _backend.compose(self.order, self.v, self.g, self.h, self.t,
                                      c0, c1, c2, c3)
        return Jet(self.n, self.order, v, g, h, t)

    def _reciprocal(self):
        u = self.v
        return self._compose(1.0 / u, -1.0 / u ** 2, 2.0 / u ** 3, -6.0 / u ** 4)

    def __float__(self):
        return self.v

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"Jet(order={self.order}, v={self.v}, g={self.g})"


variable = Jet.variable
constant = Jet.constant


def apply_univariate(x, c0, c1, c2, c3):
    """Compose a jet (or float) with a univariate function given by its
    value and first three derivatives at x's value."""
    if isinstance(x, Jet):
        return x._compose(c0, c1, c2, c3)
    return c0


def _apply(x, f_float, coeffs):
    if isinstance(x, Jet):
        return x._compose(*coeffs(x.v))
    return f_float(x)


def sin(x):
    return _apply(x, math.sin,
                  lambda u: (math.sin(u), math.cos(u), -math.sin(u), -math.cos(u)))


def cos(x):
    return _apply(x, math.cos,
                  lambda u: (math.cos(u), -math.sin(u), -math.cos(u), math.sin(u)))


def exp(x):
    def coeffs(u):
        e = math.exp(u)
        return (e, e, e, e)
    return _apply(x, math.exp, coeffs)


def log(x):
    return _apply(x, math.log,
                  lambda u: (math.log(u), 1.0 / u, -1.0 / u ** 2, 2.0 / u ** 3))


def sqrt(x):
    def coeffs(u):
        s = math.sqrt(u)
        return (s, 0.5 / s, -0.25 / (s * u), 0.375 / (s * u * u))
    return _apply(x, math.sqrt, coeffs)


def sinh(x):
    return _apply(x, math.sinh,
                  lambda u: (math.sinh(u), math.cosh(u), math.sinh(u), math.cosh(u)))


def cosh(x):
    return _apply(x, math.cosh,
                  lambda u: (math.cosh(u), math.sinh(u), math.cosh(u), math.sinh(u)))


def dot(xs, ys):
    """Euclidean inner product of two sequences of scalars or jets."""
    acc = xs[0] * ys[0]
    for a, b in zip(xs[1:], ys[1:]):
        acc = acc + a * b
    return acc


def norm_sq(xs):
    return dot(xs, xs)
