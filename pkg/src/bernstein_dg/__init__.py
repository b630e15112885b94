"""Bernstein-polynomial shock capturing for nodal DG solvers of 1D scalar conservation laws."""

from .bernstein import (
    BernsteinPoly, BoundsSpec, EntropyFunctional, Interval, TargetBasis, TransformMatrix,
    basis_eval, blend, build_transform, condition_number, derivative, eval_bernstein,
    reconstruct, reconstruct_bounded, to_basis_coeffs, total_entropy, total_variation,
)
from .dg import (
    ApplyPoint, CaptureConfig, CaptureMode, ElementBasis, FluxSpec, Mesh, RunConfig,
    SolutionState, SolverBlowUp, apply_bernstein_capture, apply_mean_filter, compute_dt,
    dg_rhs, run, rusanov_flux, ssprk33_step,
)
from .nodal import diff_matrix, lgl_nodes_weights
from .problems import (
    FVOracleConfig, ProblemId, ProblemSpec, burgers_characteristic, error_norms,
    exact_advection, fv_reference, make_problem,
)
from .sensor import (
    SensorConfig, SensorReading, Stencil, annihilation_coefficients, element_sensor,
    normalization_factor, pa_apply, ramp,
)

__version__ = "0.1.0"
