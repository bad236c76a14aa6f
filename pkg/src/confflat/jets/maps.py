"""Chart domains, smooth parametrized maps and their jets.

A SmoothMap wraps a pure evaluator written against confflat.jets.core;
evaluate_jet propagates jet scalars through it (exact derivatives), while
finite_difference_jet provides the independent central-difference oracle.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, EvaluationError
from .core import Jet

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ChartDomain:
    """Rectangular coordinate neighborhood with an optional uniform grid."""

    dim: int
    box: tuple  # ((lo, hi), ...) per axis
    grid_shape: tuple | None = None

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if len(self.box) != self.dim:
            raise ValueError("box must have one interval per axis")
        for lo, hi in self.box:
            if not lo < hi:
                raise ValueError(f"degenerate interval ({lo}, {hi})")
        if self.grid_shape is not None:
            if len(self.grid_shape) != self.dim:
                raise ValueError("grid_shape must have one count per axis")
            if any(s < 3 for s in self.grid_shape):
                raise ValueError("grids used for discrete derivatives need >= 3 points per axis")

    def axes(self):
        if self.grid_shape is None:
            raise ValueError("domain carries no grid")
        return [np.linspace(lo, hi, s) for (lo, hi), s in zip(self.box, self.grid_shape)]

    def spacings(self):
        return np.array([(hi - lo) / (s - 1)
                         for (lo, hi), s in zip(self.box, self.grid_shape)])

    def grid_points(self):
        """All grid points, shape grid_shape + (dim,)."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def contains(self, point, margin=0.0):
        """Closed-box membership (up to rounding), shrunk by `margin`."""
        point = np.asarray(point, float)
        return all(lo + margin - 1e-12 * (hi - lo) <= x <= hi - margin + 1e-12 * (hi - lo)
                   for (lo, hi), x in zip(self.box, point))

    def center(self):
        return np.array([(lo + hi) / 2.0 for lo, hi in self.box])

    def sample_points(self, count, rng, margin_frac=0.1):
        """Deterministic interior samples, uniform in the shrunken box."""
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        m = margin_frac * (hi - lo)
        return rng.uniform(lo + m, hi - m, size=(count, self.dim))


@dataclass
class Jet3:
    """Value and partial derivatives to order 3 of a map at a chart point."""

    value: np.ndarray          # (N,)
    d1: np.ndarray             # (n, N)
    d2: np.ndarray             # (n, n, N)
    d3: np.ndarray             # (n, n, n, N)
    order: int = 3

    @property
    def n(self):
        return self.d1.shape[0]

    @property
    def codim(self):
        return self.value.shape[0]


@dataclass
class SmoothMap:
    """Parametrized map from a chart into R^codomain_dim, differentiable to
    order 3.  The evaluator takes a sequence of scalars (floats or jets) and
    returns a sequence of scalars."""

    domain: ChartDomain
    codomain_dim: int
    evaluator: object
    name: str = ""

    def value(self, point):
        out = self.evaluator(list(np.asarray(point, float)))
        return np.array([float(c) for c in out])

    def jet(self, point, order=3):
        return evaluate_jet(self, point, order)


def evaluate_jet(smooth_map: SmoothMap, point, order=3) -> Jet3:
    """Exact jets of the evaluator via truncated Taylor propagation."""
    point = np.asarray(point, float)
    n = smooth_map.domain.dim
    if not smooth_map.domain.contains(point):
        raise DomainError(f"point {point} outside chart box {smooth_map.domain.box}")
    seeds = [Jet.variable(point[i], i, n, order) for i in range(n)]
    out = smooth_map.evaluator(seeds)
    N = len(out)
    value = np.zeros(N)
    d1 = np.zeros((n, N))
    d2 = np.zeros((n, n, N))
    d3 = np.zeros((n, n, n, N))
    for a, c in enumerate(out):
        if isinstance(c, Jet):
            value[a] = c.v
            d1[:, a] = c.g
            d2[:, :, a] = c.h
            d3[:, :, :, a] = c.t
        else:
            value[a] = float(c)
    if not (np.all(np.isfinite(value)) and np.all(np.isfinite(d1))
            and np.all(np.isfinite(d2)) and np.all(np.isfinite(d3))):
        raise EvaluationError(f"non-finite jet output at {point}")
    return Jet3(value, d1, d2, d3, order)


# second-order central stencils per derivative order, in units of h
_STENCILS = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}


def finite_difference_jet(smooth_map: SmoothMap, point, order=3, h=None) -> Jet3:
    """Central-difference oracle for evaluate_jet; error O(h^2) per order."""
    point = np.asarray(point, float)
    n = smooth_map.domain.dim
    if h is None:
        h = _EPS ** 0.25 * max(1.0, float(np.max(np.abs(point))))
    for (lo, hi), x in zip(smooth_map.domain.box, point):
        if x - 3 * h <= lo or x + 3 * h >= hi:
            raise DomainError(f"stencil of step {h} around {point} exits the chart box")

    cache = {}

    def f(offsets):
        key = tuple(offsets)
        if key not in cache:
            cache[key] = smooth_map.value(point + h * np.asarray(offsets, float))
        return cache[key]

    def deriv(counts):
        """Derivative for the per-axis multi-index `counts` (sum <= 3)."""
        axes = [i for i in range(n) if counts[i] > 0]
        total = np.zeros(smooth_map.codomain_dim)
        per_axis = [_STENCILS[counts[i]] for i in axes]
        for combo in itertools.product(*per_axis):
            offsets = [0] * n
            coeff = 1.0
            for ax, (off, c) in zip(axes, combo):
                offsets[ax] = off
                coeff *= c
            total = total + coeff * f(offsets)
        return total / h ** sum(counts)

    N = smooth_map.codomain_dim
    value = f([0] * n)
    d1 = np.zeros((n, N))
    d2 = np.zeros((n, n, N))
    d3 = np.zeros((n, n, n, N))
    if order >= 1:
        for i in range(n):
            c = [0] * n
            c[i] = 1
            d1[i] = deriv(c)
    if order >= 2:
        for i in range(n):
            for j in range(i, n):
                c = [0] * n
                c[i] += 1
                c[j] += 1
                val = deriv(c)
                d2[i, j] = d2[j, i] = val
    if order >= 3:
        for i in range(n):
            for j in range(i, n):
                for k in range(j, n):
                    c = [0] * n
                    c[i] += 1
                    c[j] += 1
                    c[k] += 1
                    val = deriv(c)
                    for p, q, r in itertools.permutations((i, j, k)):
                        d3[p, q, r] = val
    return Jet3(value, d1, d2, d3, order)
