"""Polynomial-annihilation (PA) discontinuity sensor.

The PA operator of order ``m`` applied at ``x`` combines ``m + 1`` nearby
samples with weights that annihilate polynomials of degree below ``m``; the
result approximates the jump ``s(x+) - s(x-)``. Comparing the largest
order-3 and order-1 values inside an element tells smooth data (the ratio
decays with resolution) from discontinuous data (the ratio stays near 1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DegenerateStencilError(ValueError):
    """The normalization factor of a PA stencil vanishes."""


class UnsupportedOrderError(ValueError):
    """Too few nodes in the element for the requested PA order."""


@dataclass(frozen=True, eq=False)
class Stencil:
    points: np.ndarray
    eval_point: float

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).reshape(-1)
        if p.size < 2:
            raise ValueError("a stencil needs at least two points")
        if np.any(np.diff(p) <= 0.0):
            raise ValueError("stencil points must be distinct and strictly increasing")
        if p[-1] < self.eval_point:
            raise ValueError("no stencil point lies at or right of the evaluation point")
        object.__setattr__(self, "points", p)

    @property
    def order(self) -> int:
        return self.points.size - 1

    @property
    def spacing(self) -> float:
        return float(np.max(np.diff(self.points)))


@dataclass(frozen=True)
class SensorConfig:
    kappa: float = 0.5
    low_order: int = 1
    high_order: int = 3
    s1_floor: float = 1e-12

    def __post_init__(self):
        if not self.low_order < self.high_order:
            raise ValueError("low_order must be smaller than high_order")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")


@dataclass(frozen=True)
class SensorReading:
    s1: float
    s3: float
    ratio: float
    alpha: float


def annihilation_coefficients(st: Stencil) -> np.ndarray:
    """``c_j = m! / prod_{i != j} (xi_j - xi_i)``."""
    xi = st.points
    diff = xi[:, None] - xi[None, :]
    np.fill_diagonal(diff, 1.0)
    omega = np.prod(diff, axis=1)
    if np.any(omega == 0.0):
        raise ValueError("duplicate stencil points")
    return math.factorial(st.order) / omega


def normalization_factor(st: Stencil, coeffs=None) -> float:
    """Sum of the annihilation coefficients over stencil points ``>= x``."""
    c = annihilation_coefficients(st) if coeffs is None else np.asarray(coeffs, dtype=float)
    q = float(np.sum(c[st.points >= st.eval_point]))
    if abs(q) < 1e-14:
        raise DegenerateStencilError(f"normalization factor {q:g} vanishes for this stencil")
    return q


def pa_weights(st: Stencil) -> np.ndarray:
    """Weights ``c_j / q_m`` so that ``L_m[s](x) = weights @ s(xi)``."""
    c = annihilation_coefficients(st)
    return c / normalization_factor(st, c)


def pa_apply(values: Sequence[float], st: Stencil) -> float:
    v = np.asarray(values, dtype=float)
    if v.size != st.points.size:
        raise ValueError("need one value per stencil point")
    c = annihilation_coefficients(st)
    # constants are annihilated exactly, not just up to rounding
    return float(np.dot(c, v - v[0]) / normalization_factor(st, c))


def midpoint_stencil(nodes: np.ndarray, k: int, order: int) -> Stencil:
    """Stencil of ``order + 1`` consecutive nodes around the midpoint of ``[x_k, x_{k+1}]``.

    Centered where possible and shifted inward near the element ends so the
    stencil never leaves the element.
    """
    n = len(nodes)
    start = min(max(k - (order - 1) // 2, 0), n - (order + 1))
    return Stencil(nodes[start : start + order + 1], 0.5 * (nodes[k] + nodes[k + 1]))


def pa_operator_matrix(nodes, order: int) -> np.ndarray:
    """Rows give ``L_m`` at each midpoint as a linear functional of the nodal values."""
    x = np.asarray(nodes, dtype=float)
    n = x.size
    if n < order + 1:
        raise UnsupportedOrderError(f"{n} nodes cannot support PA order {order}")
    A = np.zeros((n - 1, n))
    for k in range(n - 1):
        st = midpoint_stencil(x, k, order)
        start = int(np.searchsorted(x, st.points[0]))
        A[k, start : start + order + 1] = pa_weights(st)
    return A


def ramp(S, kappa: float):
    """Blending parameter: 1 below ``kappa``, 0 from 1 on, linear in between."""
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    S = np.asarray(S, dtype=float)
    out = np.clip((1.0 - S) / (1.0 - kappa), 0.0, 1.0)
    out = np.where(S <= kappa, 1.0, out)
    return float(out) if out.ndim == 0 else out


def _check_nodes(n_nodes: int, cfg: SensorConfig):
    if n_nodes < cfg.high_order + 1:
        raise UnsupportedOrderError(
            f"{n_nodes} nodes per element cannot support PA order {cfg.high_order}"
        )
    if n_nodes == 4:
        warnings.warn(
            "the PA sensor is unreliable for N = 3 and may misidentify troubled elements",
            stacklevel=3,
        )


def element_sensor(node_values, nodes, cfg: SensorConfig) -> SensorReading:
    """Sensor reading for one element from its nodal values."""
    u = np.asarray(node_values, dtype=float)
    x = np.asarray(nodes, dtype=float)
    _check_nodes(x.size, cfg)
    S = {}
    for m in (cfg.low_order, cfg.high_order):
        vals = []
        for k in range(x.size - 1):
            st = midpoint_stencil(x, k, m)
            i0 = int(np.searchsorted(x, st.points[0]))
            vals.append(abs(pa_apply(u[i0 : i0 + m + 1], st)))
        S[m] = max(vals)
    s1, s3 = S[cfg.low_order], S[cfg.high_order]
    floor = cfg.s1_floor * max(1.0, float(np.max(np.abs(u))))
    ratio = s3 / s1 if s1 > floor else 0.0
    return SensorReading(s1, s3, ratio, ramp(ratio, cfg.kappa))


class BatchSensor:
    """Vectorized sensor over all elements sharing one set of reference nodes.

    The PA operator is invariant under affine maps of the stencil, so the
    weights computed on the reference element apply to every element.
    """

    def __init__(self, nodes, cfg: SensorConfig):
        x = np.asarray(nodes, dtype=float)
        _check_nodes(x.size, cfg)
        self.cfg = cfg
        self.low = pa_operator_matrix(x, cfg.low_order)
        self.high = pa_operator_matrix(x, cfg.high_order)

    def __call__(self, U: np.ndarray):
        """Return ``(s1, s3, ratio, alpha)`` arrays for the ``(I, N+1)`` values ``U``."""
        V = U - U[:, :1]
        s1 = np.max(np.abs(V @ self.low.T), axis=1)
        s3 = np.max(np.abs(V @ self.high.T), axis=1)
        floor = self.cfg.s1_floor * np.maximum(1.0, np.max(np.abs(U), axis=1))
        active = s1 > floor
        ratio = np.zeros_like(s1)
        np.divide(s3, s1, out=ratio, where=active)
        kappa = self.cfg.kappa
        alpha = np.clip((1.0 - ratio) / (1.0 - kappa), 0.0, 1.0)
        alpha[ratio <= kappa] = 1.0
        return s1, s3, ratio, alpha
