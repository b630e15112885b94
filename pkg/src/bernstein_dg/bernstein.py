"""Bernstein polynomials and the (bounded) Bernstein reconstruction.

A :class:`BernsteinPoly` is stored by its Bernstein coefficients on an
interval ``[a, b]``. The value of the polynomial always lies between the
smallest and largest coefficient, which is what makes the reconstruction
useful as a shock-capturing device: clipping the coefficients into
``[m, M]`` enforces ``m <= B <= M`` everywhere on the interval.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre
from scipy.special import comb

from .nodal import lgl_nodes_weights


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"interval needs a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a


REFERENCE = Interval(-1.0, 1.0)
UNIT = Interval(0.0, 1.0)


@dataclass(frozen=True)
class BoundsSpec:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"bounds need lower <= upper, got ({self.lower}, {self.upper})")


@dataclass(frozen=True, eq=False)
class BernsteinPoly:
    coeffs: np.ndarray
    interval: Interval = UNIT

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.size == 0:
            raise ValueError("a Bernstein polynomial needs at least one coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, x):
        return eval_bernstein(self, x)


class TargetBasis(str, enum.Enum):
    LAGRANGE_GAUSS_LOBATTO = "lagrange"
    LEGENDRE = "legendre"


@dataclass(frozen=True, eq=False)
class TransformMatrix:
    entries: np.ndarray
    target_basis: TargetBasis

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EntropyFunctional:
    evaluate: Callable = field(default=np.square)

    def __call__(self, u):
        return self.evaluate(u)


L2_ENTROPY = EntropyFunctional()


def basis_eval(n: int, N: int, x, iv: Interval = UNIT):
    """Bernstein basis polynomial ``b_{n,N}`` on ``iv`` at ``x``."""
    if not 0 <= n <= N:
        raise ValueError(f"basis index n={n} outside 0..{N}")
    t = (np.asarray(x, dtype=float) - iv.a) / iv.length
    return comb(N, n, exact=False) * t**n * (1.0 - t) ** (N - n)


def basis_matrix(N: int, x, iv: Interval = UNIT) -> np.ndarray:
    """``out[k, n] = b_{n,N}(x_k)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.stack([basis_eval(n, N, x, iv) for n in range(N + 1)], axis=-1)


def equispaced_points(N: int, iv: Interval = UNIT) -> np.ndarray:
    return iv.a + iv.length * np.arange(N + 1) / N


def reconstruct(samples: Sequence[float], iv: Interval = UNIT) -> BernsteinPoly:
    """Bernstein reconstruction from values at the ``N + 1`` equispaced points of ``iv``."""
    s = np.asarray(samples, dtype=float)
    if s.size < 2:
        raise ValueError("Bernstein reconstruction needs at least 2 samples (N >= 1)")
    return BernsteinPoly(s, iv)


def reconstruct_bounded(samples: Sequence[float], iv: Interval, bounds: BoundsSpec) -> BernsteinPoly:
    """Bernstein reconstruction with the samples clipped into ``[lower, upper]``."""
    if bounds.lower > bounds.upper:
        raise ValueError("bounds need lower <= upper")
    s = np.clip(np.asarray(samples, dtype=float), bounds.lower, bounds.upper)
    return reconstruct(s, iv)


def eval_bernstein(p: BernsteinPoly, x):
    """Evaluate ``p`` at ``x`` (scalar or array) with de Casteljau's algorithm."""
    xa = np.asarray(x, dtype=float)
    iv = p.interval
    tol = 1e-12 * max(1.0, abs(iv.a), abs(iv.b))
    if np.any(xa < iv.a - tol) or np.any(xa > iv.b + tol):
        raise ValueError(f"evaluation point outside [{iv.a}, {iv.b}]")
    t = np.clip((xa - iv.a) / iv.length, 0.0, 1.0)
    s = 1.0 - t
    beta = np.broadcast_to(p.coeffs, t.shape + p.coeffs.shape).copy()
    for r in range(p.degree, 0, -1):
        beta = s[..., None] * beta[..., :r] + t[..., None] * beta[..., 1 : r + 1]
    out = beta[..., 0]
    return float(out) if out.ndim == 0 else out


def split(p: BernsteinPoly, t: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of ``p`` restricted to the two parts of its interval split at local parameter ``t``."""
    beta = p.coeffs.copy()
    N = p.degree
    left = np.empty(N + 1)
    right = np.empty(N + 1)
    left[0], right[N] = beta[0], beta[N]
    for r in range(1, N + 1):
        beta = (1.0 - t) * beta[:-1] + t * beta[1:]
        left[r] = beta[0]
        right[N - r] = beta[-1]
    return left, right


def derivative(p: BernsteinPoly) -> BernsteinPoly:
    N = p.degree
    if N == 0:
        return BernsteinPoly(np.zeros(1), p.interval)
    return BernsteinPoly(N * np.diff(p.coeffs) / p.interval.length, p.interval)


def build_transform(N: int, basis: TargetBasis | str) -> TransformMatrix:
    """Change-of-basis matrix from Bernstein coefficients on [-1, 1].

    For the Lagrange target, row ``k`` holds the basis values at the ``k``-th
    Gauss-Lobatto node. For the Legendre target, row ``l`` holds the Legendre
    coefficients ``(2l+1)/2 * int b_{n,N} P_l`` computed by Gauss quadrature
    with ``N + 5`` points, which is exact for these integrands.
    """
    if N < 1:
        raise ValueError(f"transform needs N >= 1, got {N}")
    basis = TargetBasis(basis)
    if basis is TargetBasis.LAGRANGE_GAUSS_LOBATTO:
        nodes, _ = lgl_nodes_weights(N)
        T = basis_matrix(N, nodes, REFERENCE)
    else:
        g, w = legendre.leggauss(N + 5)
        B = basis_matrix(N, g, REFERENCE)
        P = legendre.legvander(g, N)
        scale = (2.0 * np.arange(N + 1) + 1.0) / 2.0
        T = scale[:, None] * (P.T @ (w[:, None] * B))
    T.setflags(write=False)
    return TransformMatrix(T, basis)


def to_basis_coeffs(p: BernsteinPoly, T: TransformMatrix) -> np.ndarray:
    if T.size != p.degree + 1:
        raise ValueError(f"transform of size {T.size} does not fit degree {p.degree}")
    return T.entries @ p.coeffs


def condition_number(T: TransformMatrix | np.ndarray) -> float:
    """Spectral condition number from the eigenvalues of ``T^T T``."""
    A = T.entries if isinstance(T, TransformMatrix) else np.asarray(T, dtype=float)
    lam = np.linalg.eigvalsh(A.T @ A)
    if lam[0] <= lam[-1] * np.finfo(float).eps * A.shape[0]:
        raise np.linalg.LinAlgError("transform matrix is numerically singular")
    return float(np.sqrt(lam[-1] / lam[0]))


def blend(original, bernstein, alpha: float) -> np.ndarray:
    """Convex combination ``alpha * original + (1 - alpha) * bernstein``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    u = np.asarray(original, dtype=float)
    b = np.asarray(bernstein, dtype=float)
    if u.shape != b.shape:
        raise ValueError("blend operands must have equal shape")
    if alpha == 1.0:
        return u.copy()
    if alpha == 0.0:
        return b.copy()
    return alpha * u + (1.0 - alpha) * b


def _monotone_pieces(dcoeffs: np.ndarray, lo: float, hi: float, tol: float, out: list):
    # dcoeffs: Bernstein coefficients of p' on [lo, hi] (local parameter)
    if np.all(dcoeffs >= 0.0) or np.all(dcoeffs <= 0.0) or hi - lo <= tol:
        out.append((lo, hi))
        return
    left, right = split(BernsteinPoly(dcoeffs), 0.5)
    mid = 0.5 * (lo + hi)
    _monotone_pieces(left, lo, mid, tol, out)
    _monotone_pieces(right, mid, hi, tol, out)


def total_variation(p: BernsteinPoly, tol: float = 1e-12) -> float:
    """``int |p'|`` over the interval.

    The interval is subdivided until the derivative's Bernstein coefficients
    share a sign on every piece (or the piece is narrower than ``tol``); ``p``
    is monotone on each such piece, so the variation is the sum of the
    absolute end-value differences.
    """
    if p.degree == 0:
        return 0.0
    iv = p.interval
    pieces: list[tuple[float, float]] = []
    _monotone_pieces(derivative(p).coeffs, 0.0, 1.0, tol / iv.length, pieces)
    t = np.array([pieces[0][0]] + [hi for _, hi in pieces])
    vals = eval_bernstein(p, iv.a + iv.length * t)
    return float(np.sum(np.abs(np.diff(vals))))


def total_entropy(p: BernsteinPoly, U: EntropyFunctional | Callable = L2_ENTROPY) -> float:
    """``int U(p(x)) dx`` by Gauss-Legendre quadrature with ``2 N + 8`` points."""
    npts = 2 * p.degree + 8
    g, w = legendre.leggauss(npts)
    iv = p.interval
    x = iv.a + 0.5 * iv.length * (g + 1.0)
    return float(0.5 * iv.length * np.sum(w * U(eval_bernstein(p, x))))
