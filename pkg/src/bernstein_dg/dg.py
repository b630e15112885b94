"""Nodal collocation DG solver for periodic scalar conservation laws in 1D.

Strong-form DG on Legendre-Gauss-Lobatto nodes with a lumped mass matrix,
Rusanov interface fluxes, SSPRK(3,3) time stepping and an optional
shock-capturing post-processing step (Bernstein blend or mean-value filter).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .bernstein import REFERENCE, BoundsSpec, Interval, basis_matrix, equispaced_points
from .nodal import diff_matrix, interpolation_matrix, lgl_nodes_weights
from .sensor import BatchSensor, SensorConfig

log = logging.getLogger(__name__)


class SolverBlowUp(RuntimeError):
    """Non-finite values appeared in the solution."""

    def __init__(self, time: float, element: int, last_good=None, diagnostics=None):
        super().__init__(f"non-finite solution at t={time:.6g} in element {element}")
        self.time = time
        self.element = element
        self.last_good = last_good
        self.diagnostics = diagnostics


# {{{ data

@dataclass(frozen=True, eq=False)
class ElementBasis:
    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    diff_matrix: np.ndarray
    bernstein_sample_points: np.ndarray
    lagrange_to_bernstein_samples: np.ndarray
    bernstein_to_nodal: np.ndarray

    @property
    def num_nodes(self) -> int:
        return self.degree + 1

    @classmethod
    def build(cls, N: int) -> "ElementBasis":
        x, w = lgl_nodes_weights(N)
        xs = equispaced_points(N, REFERENCE)
        return cls(
            degree=N,
            nodes=x,
            weights=w,
            diff_matrix=diff_matrix(x),
            bernstein_sample_points=xs,
            lagrange_to_bernstein_samples=interpolation_matrix(x, xs),
            bernstein_to_nodal=basis_matrix(N, x, REFERENCE),
        )


@dataclass(frozen=True)
class Mesh:
    domain: Interval
    num_elements: int

    def __post_init__(self):
        if self.num_elements < 1:
            raise ValueError("mesh needs at least one element")

    @property
    def width(self) -> float:
        return self.domain.length / self.num_elements

    @property
    def element_edges(self) -> np.ndarray:
        return self.domain.a + self.width * np.arange(self.num_elements + 1)

    def node_coordinates(self, basis: ElementBasis) -> np.ndarray:
        left = self.element_edges[:-1]
        return left[:, None] + 0.5 * self.width * (basis.nodes[None, :] + 1.0)


@dataclass(frozen=True, eq=False)
class SolutionState:
    values: np.ndarray
    time: float = 0.0


@dataclass(frozen=True, eq=False)
class FluxSpec:
    """Flux ``f`` with derivative ``f_prime``.

    ``speed_critical_points`` lists the interior extrema of ``f'``; the local
    Rusanov speed is the max of ``|f'|`` over the bracket ends and these
    points. ``None`` falls back to a 33-point scan of the bracket.
    """

    f: Callable
    f_prime: Callable
    global_wave_speed: float
    speed_critical_points: tuple | None = ()

    def local_speed(self, a, b):
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        lam = np.maximum(np.abs(self.f_prime(lo)), np.abs(self.f_prime(hi)))
        if self.speed_critical_points is None:
            s = np.linspace(0.0, 1.0, 33)
            u = lo[..., None] + (hi - lo)[..., None] * s
            return np.maximum(lam, np.max(np.abs(self.f_prime(u)), axis=-1))
        for c in self.speed_critical_points:
            inside = (lo <= c) & (c <= hi)
            if np.any(inside):
                lam = np.where(inside, np.maximum(lam, abs(self.f_prime(c))), lam)
        return lam


class CaptureMode(str, enum.Enum):
    NONE = "none"
    BERNSTEIN = "bernstein"
    MEAN = "mean"


class ApplyPoint(str, enum.Enum):
    PER_STAGE = "stage"
    PER_STEP = "step"


@dataclass(frozen=True)
class CaptureConfig:
    mode: CaptureMode = CaptureMode.BERNSTEIN
    sensor: SensorConfig = field(default_factory=SensorConfig)
    bounds: BoundsSpec | None = None
    apply_point: ApplyPoint = ApplyPoint.PER_STAGE


@dataclass(frozen=True)
class RunConfig:
    mesh: Mesh
    degree: int
    t_final: float
    cfl_constant: float = 0.1

    def __post_init__(self):
        if self.cfl_constant <= 0.0:
            raise ValueError("CFL constant must be positive")
        if self.t_final < 0.0:
            raise ValueError("final time must be nonnegative")
        if self.degree < 1:
            raise ValueError("polynomial degree must be at least 1")


class SensorReadings(NamedTuple):
    s1: np.ndarray
    s3: np.ndarray
    ratio: np.ndarray
    alpha: np.ndarray


@dataclass
class DiagnosticsSeries:
    step: list = field(default_factory=list)
    t: list = field(default_factory=list)
    dt: list = field(default_factory=list)
    tv: list = field(default_factory=list)
    umin: list = field(default_factory=list)
    umax: list = field(default_factory=list)
    troubled: list = field(default_factory=list)
    entropy: list = field(default_factory=list)
    conservation_defect: list = field(default_factory=list)
    # (step, SensorReadings) snapshots
    sensor_log: list = field(default_factory=list)
    initial_mass: float = 0.0

    COLUMNS = ("step", "t", "dt", "tv", "umin", "umax", "troubled", "entropy", "conservation_defect")

    def append(self, **row):
        for k in self.COLUMNS:
            getattr(self, k).append(row[k])

    def rows(self):
        return zip(*(getattr(self, k) for k in self.COLUMNS))

# }}}


# {{{ spatial operator

def rusanov_flux(u_minus, u_plus, flux: FluxSpec):
    """Local Lax-Friedrichs flux with the max characteristic speed between the states."""
    um = np.asarray(u_minus, dtype=float)
    up = np.asarray(u_plus, dtype=float)
    lam = flux.local_speed(um, up)
    out = 0.5 * (flux.f(up) + flux.f(um)) - 0.5 * lam * (up - um)
    return float(out) if np.ndim(out) == 0 else out


def dg_rhs(values: np.ndarray, flux: FluxSpec, basis: ElementBasis, mesh: Mesh) -> np.ndarray:
    """Semidiscrete strong-form operator ``L(u)`` with periodic coupling."""
    U = values.values if isinstance(values, SolutionState) else values
    F = flux.f(U)
    I = U.shape[0]
    # fstar[i] lives on the right interface of element i
    right_neighbor = np.concatenate((U[1:, 0], U[:1, 0]))
    fstar = rusanov_flux(U[:, -1], right_neighbor, flux)
    fleft = np.concatenate((fstar[I - 1:], fstar[: I - 1]))
    rhs = -F @ basis.diff_matrix.T
    w = basis.weights
    rhs[:, -1] += (F[:, -1] - fstar) / w[-1]
    rhs[:, 0] -= (F[:, 0] - fleft) / w[0]
    return rhs * (2.0 / mesh.width)


def compute_dt(run: RunConfig, flux: FluxSpec) -> float:
    """``C |Omega| / (I (2N+1)^2 max|f'|)``."""
    if not flux.global_wave_speed > 0.0:
        raise ValueError("zero wave speed: the problem is static")
    mesh = run.mesh
    return run.cfl_constant * mesh.domain.length / (
        mesh.num_elements * (2 * run.degree + 1) ** 2 * flux.global_wave_speed
    )

# }}}


# {{{ time stepping

def _check_finite(U: np.ndarray, t: float):
    if not np.isfinite(U.sum()):
        bad = int(np.argmax(~np.all(np.isfinite(U), axis=1)))
        raise SolverBlowUp(t, bad)


def ssprk33_step(state: SolutionState, dt: float, rhs: Callable, capture: Callable | None = None,
                 apply_point: ApplyPoint = ApplyPoint.PER_STAGE) -> SolutionState:
    """One SSPRK(3,3) step; ``capture`` maps values to values."""
    if not dt > 0.0:
        raise ValueError("time step must be positive")
    per_stage = capture is not None and ApplyPoint(apply_point) is ApplyPoint.PER_STAGE
    t = state.time
    u = state.values

    u1 = u + dt * rhs(u)
    _check_finite(u1, t + dt)
    if per_stage:
        u1 = capture(u1)
    u2 = 0.75 * u + 0.25 * u1 + 0.25 * dt * rhs(u1)
    _check_finite(u2, t + 0.5 * dt)
    if per_stage:
        u2 = capture(u2)
    un = u / 3.0 + (2.0 / 3.0) * u2 + (2.0 / 3.0) * dt * rhs(u2)
    _check_finite(un, t + dt)
    if capture is not None:
        un = capture(un)
    return SolutionState(un, t + dt)

# }}}


# {{{ shock capturing

def _as_values(state):
    return state.values if isinstance(state, SolutionState) else np.asarray(state, dtype=float)


def bernstein_capture_values(U: np.ndarray, basis: ElementBasis, alpha: np.ndarray,
                             bounds: BoundsSpec | None = None) -> np.ndarray:
    """Blend each element with its Bernstein reconstruction using its own ``alpha``."""
    out = U.copy()
    idx = np.flatnonzero(alpha < 1.0)
    if idx.size == 0:
        return out
    Ut = U[idx]
    samples = Ut @ basis.lagrange_to_bernstein_samples.T
    if bounds is not None:
        samples = np.clip(samples, bounds.lower, bounds.upper)
    B = samples @ basis.bernstein_to_nodal.T
    a = alpha[idx, None]
    out[idx] = np.where(a == 0.0, B, a * Ut + (1.0 - a) * B)
    return out


def apply_bernstein_capture(state, basis: ElementBasis, capture: CaptureConfig,
                            sensor: BatchSensor | None = None):
    """Sense every element, then blend troubled ones with their Bernstein reconstruction.

    Returns ``(new_state, readings)``; elements with ``alpha == 1`` are
    returned unchanged.
    """
    U = _as_values(state)
    sensor = sensor or BatchSensor(basis.nodes, capture.sensor)
    readings = SensorReadings(*sensor(U))
    out = bernstein_capture_values(U, basis, readings.alpha, capture.bounds)
    if isinstance(state, SolutionState):
        out = SolutionState(out, state.time)
    return out, readings


def apply_mean_filter(state, basis: ElementBasis, sensor_cfg: SensorConfig,
                      sensor: BatchSensor | None = None, return_readings: bool = False):
    """Replace elements with sensor ratio >= 1 by their LGL-quadrature mean."""
    U = _as_values(state)
    sensor = sensor or BatchSensor(basis.nodes, sensor_cfg)
    readings = SensorReadings(*sensor(U))
    out = U.copy()
    troubled = readings.ratio >= 1.0
    if np.any(troubled):
        means = 0.5 * (U[troubled] @ basis.weights)
        out[troubled] = means[:, None]
    if isinstance(state, SolutionState):
        out = SolutionState(out, state.time)
    if return_readings:
        return out, readings
    return out


class _Capturer:
    """Stateful capture callable used by the time loop to collect diagnostics."""

    def __init__(self, basis: ElementBasis, capture: CaptureConfig):
        self.basis = basis
        self.cfg = capture
        self.sensor = BatchSensor(basis.nodes, capture.sensor)
        self.readings: SensorReadings | None = None
        self.troubled_any = 0

    def __call__(self, U: np.ndarray) -> np.ndarray:
        if self.cfg.mode is CaptureMode.BERNSTEIN:
            out, r = apply_bernstein_capture(U, self.basis, self.cfg, self.sensor)
            touched = int(np.count_nonzero(r.alpha < 1.0))
        else:
            out, r = apply_mean_filter(U, self.basis, self.cfg.sensor, self.sensor, return_readings=True)
            touched = int(np.count_nonzero(r.ratio >= 1.0))
        self.troubled_any = max(self.troubled_any, touched)
        self.readings = r
        return out

# }}}


# {{{ diagnostics

def total_mass(U: np.ndarray, basis: ElementBasis, mesh: Mesh) -> float:
    return float(0.5 * mesh.width * np.sum(U @ basis.weights))


def discrete_tv(U: np.ndarray) -> float:
    """Periodic total variation of the nodal sequence, interface jumps included."""
    flat = U.reshape(-1)
    return float(np.sum(np.abs(np.diff(flat))) + abs(flat[0] - flat[-1]))


def total_entropy_l2(U: np.ndarray, basis: ElementBasis, mesh: Mesh) -> float:
    return float(0.5 * mesh.width * np.sum((U * U) @ basis.weights))

# }}}


def initial_state(problem, run_cfg: RunConfig, basis: ElementBasis | None = None) -> SolutionState:
    basis = basis or ElementBasis.build(run_cfg.degree)
    x = run_cfg.mesh.node_coordinates(basis)
    return SolutionState(np.asarray(problem.initial(x), dtype=float), 0.0)


def run(problem, run_cfg: RunConfig, capture: CaptureConfig | None = None,
        sensor_every: int | None = None) -> tuple[SolutionState, DiagnosticsSeries]:
    """Evolve ``problem`` to ``run_cfg.t_final``.

    ``sensor_every`` controls how often (in steps) the per-element sensor
    readings are stored in ``diagnostics.sensor_log``; the final step is
    always stored when capturing.
    """
    capture = capture or CaptureConfig(mode=CaptureMode.NONE)
    basis = ElementBasis.build(run_cfg.degree)
    mesh = run_cfg.mesh
    flux = problem.flux
    state = initial_state(problem, run_cfg, basis)
    mass = total_mass(state.values, basis, mesh)
    diags = DiagnosticsSeries(initial_mass=mass)
    if run_cfg.t_final == 0.0:
        return state, diags

    dt = compute_dt(run_cfg, flux)
    capturer = None if capture.mode is CaptureMode.NONE else _Capturer(basis, capture)

    def rhs(U):
        return dg_rhs(U, flux, basis, mesh)

    T = run_cfg.t_final
    step = 0
    while state.time < T:
        remaining = T - state.time
        h = remaining if remaining <= dt * (1.0 + 1e-10) else dt
        if capturer is not None:
            capturer.troubled_any = 0
        try:
            new = ssprk33_step(state, h, rhs, capturer, capture.apply_point)
        except SolverBlowUp as exc:
            exc.last_good = state
            exc.diagnostics = diags
            log.warning("blow-up at t=%.6g (element %d)", exc.time, exc.element)
            raise
        step += 1
        if h == remaining:
            new = SolutionState(new.values, T)
        state = new
        U = state.values
        # the DG operator is conservative, so any mass change comes from capture
        new_mass = total_mass(U, basis, mesh)
        diags.append(
            step=step, t=state.time, dt=h, tv=discrete_tv(U),
            umin=float(U.min()), umax=float(U.max()),
            troubled=capturer.troubled_any if capturer else 0,
            entropy=total_entropy_l2(U, basis, mesh),
            conservation_defect=new_mass - mass if capturer else 0.0,
        )
        mass = new_mass
        if capturer is not None and capturer.readings is not None:
            if (sensor_every and step % sensor_every == 0) or state.time >= T:
                diags.sensor_log.append((step, capturer.readings))
    return state, diags
