"""Benchmark problems and their reference solutions.

Four periodic test cases: linear advection of a box, Burgers with a sine
perturbation (shock forms at t = 2), a concave flux producing a rarefaction,
and Buckley-Leverett producing a compound shock-rarefaction wave.

References are the exact translation (advection), Newton-solved
characteristics (Burgers before breaking), and otherwise a fine first-order
Rusanov finite-volume solution, which converges to the entropy solution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import legendre

from .bernstein import Interval
from .dg import ElementBasis, FluxSpec, Mesh, SolutionState, rusanov_flux
from .nodal import interpolation_matrix


class OracleError(RuntimeError):
    """A reference solution could not be computed reliably."""


class ProblemId(str, enum.Enum):
    LINEAR = "linear"
    BURGERS = "burgers"
    CONCAVE = "concave"
    BUCKLEY_LEVERETT = "buckley-leverett"


class ReferenceKind(str, enum.Enum):
    CLOSED_FORM = "closed-form"
    CHARACTERISTICS = "characteristics"
    FV_ORACLE = "fv-oracle"


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    id: ProblemId
    flux: FluxSpec
    domain: Interval
    initial: Callable
    initial_prime: Callable | None = None
    break_time: float | None = None
    reference: ReferenceKind = ReferenceKind.FV_ORACLE


@dataclass(frozen=True)
class FVOracleConfig:
    cells: int = 20000
    cfl: float = 0.4


@dataclass(frozen=True, eq=False)
class FVProfile:
    """Piecewise-constant profile on a uniform periodic grid."""

    edges: np.ndarray
    values: np.ndarray
    time: float

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def __call__(self, x):
        a, b = self.edges[0], self.edges[-1]
        n = self.values.size
        xw = a + np.mod(np.asarray(x, dtype=float) - a, b - a)
        idx = np.clip(np.floor((xw - a) / (b - a) * n).astype(int), 0, n - 1)
        return self.values[idx]


def _box(lo: float, hi: float):
    def u0(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= lo) & (x <= hi), 1.0, 0.0)
    return u0


def _wave_speed(f_prime, lo, hi):
    u = np.linspace(lo, hi, 2001)
    return float(np.max(np.abs(f_prime(u))))


def _bl_flux(u):
    return u * u / (u * u + (1.0 - u) ** 2)


def _bl_prime(u):
    d = u * u + (1.0 - u) ** 2
    return 2.0 * u * (1.0 - u) / (d * d)


def make_problem(id: ProblemId | str) -> ProblemSpec:
    id = ProblemId(id)
    if id is ProblemId.LINEAR:
        flux = FluxSpec(lambda u: 1.0 * u, lambda u: np.ones_like(u), 1.0)
        return ProblemSpec(id, flux, Interval(0.0, 1.0), _box(0.4, 0.8),
                           reference=ReferenceKind.CLOSED_FORM)
    if id is ProblemId.BURGERS:
        amp = 1.0 / (4.0 * np.pi)

        def u0(x):
            return 1.0 + amp * np.sin(2.0 * np.pi * np.asarray(x, dtype=float))

        def du0(x):
            return 0.5 * np.cos(2.0 * np.pi * np.asarray(x, dtype=float))

        flux = FluxSpec(lambda u: 0.5 * u * u, lambda u: 1.0 * u, 1.0 + amp)
        # t_b = -1 / min u0' with min u0' = -1/2
        return ProblemSpec(id, flux, Interval(0.0, 1.0), u0, du0, break_time=2.0,
                           reference=ReferenceKind.CHARACTERISTICS)
    if id is ProblemId.CONCAVE:
        fp = lambda u: 1.0 - 2.0 * u  # noqa: E731
        flux = FluxSpec(lambda u: u * (1.0 - u), fp, _wave_speed(fp, 0.0, 1.0))
        return ProblemSpec(id, flux, Interval(0.0, 2.0), _box(0.5, 1.5))
    # with g = u(1 - u), f' = 2g / (1 - 2g)^2 is extremal at u = 1/2 (value 2) and
    # where g = -1/2, i.e. u = (1 +- sqrt 3) / 2, which matters once u leaves [0, 1]
    crit = (0.5 * (1.0 - np.sqrt(3.0)), 0.5, 0.5 * (1.0 + np.sqrt(3.0)))
    flux = FluxSpec(_bl_flux, _bl_prime, _wave_speed(_bl_prime, 0.0, 1.0), crit)
    return ProblemSpec(id, flux, Interval(0.0, 2.0), _box(0.5, 1.5))


def exact_advection(u0: Callable, x, t: float, domain: Interval):
    """``u0(x - t)`` wrapped periodically into ``domain``."""
    L = domain.length
    xs = np.asarray(x, dtype=float) - t
    return u0(domain.a + (xs - domain.a) - L * np.floor((xs - domain.a) / L))


def burgers_characteristic(u0: Callable, u0_prime: Callable, x, t: float,
                           tol: float = 1e-13, maxiter: int = 50):
    """Solve ``u = u0(x - t u)`` by Newton's method, starting from ``u0(x)``."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u0(x), dtype=float).copy()
    if t == 0.0:
        return u
    for _ in range(maxiter):
        xi = x - t * u
        g = u - u0(xi)
        if np.all(np.abs(g) <= tol):
            return u
        dg = 1.0 + t * u0_prime(xi)
        if np.any(dg <= 0.0):
            raise OracleError("characteristics cross; use the finite-volume oracle")
        u = u - g / dg
    g = u - u0(x - t * u)
    if np.all(np.abs(g) <= tol):
        return u
    raise OracleError(
        f"Newton did not converge (max residual {np.max(np.abs(g)):.3g}); "
        "t is too close to breaking, use the finite-volume oracle"
    )


def cell_averages(f: Callable, edges: np.ndarray, npts: int = 5) -> np.ndarray:
    g, w = legendre.leggauss(npts)
    h = np.diff(edges)
    x = edges[:-1, None] + 0.5 * h[:, None] * (g[None, :] + 1.0)
    return 0.5 * (f(x) @ w)


def fv_reference(problem: ProblemSpec, t: float, cfg: FVOracleConfig = FVOracleConfig()) -> FVProfile:
    """First-order Rusanov finite-volume solution with forward Euler.

    The scheme is monotone, so it is TVD and obeys the maximum principle;
    both are checked every step and a violation raises :class:`OracleError`.
    """
    if cfg.cells < 100:
        raise ValueError("the finite-volume oracle needs at least 100 cells")
    dom = problem.domain
    edges = np.linspace(dom.a, dom.b, cfg.cells + 1)
    dx = dom.length / cfg.cells
    u = cell_averages(problem.initial, edges)
    lo, hi = float(u.min()), float(u.max())
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    flux = problem.flux
    dt = cfg.cfl * dx / flux.global_wave_speed
    tv = np.sum(np.abs(np.diff(u))) + abs(u[0] - u[-1])
    time = 0.0
    while time < t:
        h = min(dt, t - time)
        F = rusanov_flux(u, np.roll(u, -1), flux)
        u = u - (h / dx) * (F - np.roll(F, 1))
        time = t if h == t - time else time + h
        tv_new = np.sum(np.abs(np.diff(u))) + abs(u[0] - u[-1])
        if tv_new > tv + tol * cfg.cells:
            raise OracleError(f"oracle total variation increased at t={time:.6g}")
        if u.min() < lo - tol or u.max() > hi + tol:
            raise OracleError(f"oracle left the initial range at t={time:.6g}")
        tv = tv_new
    return FVProfile(edges, u, time)


def reference_function(problem: ProblemSpec, t: float, cfg: FVOracleConfig = FVOracleConfig()):
    """Callable reference ``x -> u(t, x)`` appropriate for the problem and time."""
    if problem.reference is ReferenceKind.CLOSED_FORM:
        return lambda x: exact_advection(problem.initial, x, t, problem.domain)
    if problem.reference is ReferenceKind.CHARACTERISTICS and t < problem.break_time:

        def ref(x):
            return burgers_characteristic(problem.initial, problem.initial_prime, x, t)
        return ref
    return fv_reference(problem, t, cfg)


def error_norms(state: SolutionState, reference: Callable, mesh: Mesh, basis: ElementBasis,
                p: float = 1) -> float:
    """``L^p`` distance between the DG polynomial and ``reference``.

    Each element is sampled at ``4 (N + 1)`` Gauss points.
    """
    if p not in (1, 2, np.inf):
        raise ValueError("p must be 1, 2 or inf")
    U = state.values if isinstance(state, SolutionState) else np.asarray(state)
    g, w = legendre.leggauss(4 * basis.num_nodes)
    E = interpolation_matrix(basis.nodes, g)
    uh = U @ E.T
    x = mesh.element_edges[:-1, None] + 0.5 * mesh.width * (g[None, :] + 1.0)
    err = np.abs(uh - reference(x))
    if p == np.inf:
        return float(err.max())
    return float((0.5 * mesh.width * np.sum(err**p @ w)) ** (1.0 / p))
