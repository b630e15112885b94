"""Command-line driver: single runs and parameter sweeps with CSV output.

Examples::

    bernstein-dg run --problem linear --degree 4 --elements 40 --kappa 0.5 \\
        --tmax 1 --filter bernstein --out runs/linear
    bernstein-dg sweep --problem linear --degree 4 --kappa-list 0.25,0.5,0.75 \\
        --elements-list 10,20,40,80 --tmax 1 --out runs/kappa
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import itertools
import logging
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .bernstein import BoundsSpec
from .dg import (ApplyPoint, CaptureConfig, CaptureMode, ElementBasis, Mesh, RunConfig,
                 SolutionState, SolverBlowUp, run)
from .problems import (FVOracleConfig, ProblemId, ReferenceKind, error_norms, make_problem,
                       reference_function)
from .sensor import SensorConfig

log = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "BERNSTEIN_DG_OUTPUT_ROOT"

# tuned on I = 10 meshes; not values taken from any publication
DEFAULT_KAPPA = {
    ProblemId.LINEAR: 0.5,
    ProblemId.BURGERS: 0.5,
    ProblemId.CONCAVE: 0.5,
    ProblemId.BUCKLEY_LEVERETT: 0.4,
}

EXIT_OK, EXIT_USAGE, EXIT_BLOWUP = 0, 2, 3


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % v


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemId = ProblemId.LINEAR
    N: int = 4
    I: int = 40
    kappa: float | None = None
    t_final: float = 1.0
    cfl_constant: float = 0.1
    filter: CaptureMode = CaptureMode.BERNSTEIN
    bounds: tuple[float, float] | None = None
    capture_timing: ApplyPoint = ApplyPoint.PER_STAGE
    output_dir: str = "out"
    reference: str = "auto"
    fv_cells: int = 20000
    sensor_every: int = 0

    def __post_init__(self):
        object.__setattr__(self, "problem", ProblemId(self.problem))
        object.__setattr__(self, "filter", CaptureMode(self.filter))
        object.__setattr__(self, "capture_timing", ApplyPoint(self.capture_timing))
        if self.kappa is None:
            object.__setattr__(self, "kappa", DEFAULT_KAPPA[self.problem])
        if self.bounds is not None:
            lo, hi = (float(b) for b in self.bounds)
            BoundsSpec(lo, hi)
            object.__setattr__(self, "bounds", (lo, hi))
        if self.N < 1:
            raise ValueError("degree must be at least 1")
        if self.filter is not CaptureMode.NONE and self.N < 3:
            raise ValueError("the PA sensor needs degree N >= 3")
        if self.I < 1:
            raise ValueError("number of elements must be at least 1")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError("kappa must lie in (0, 1)")
        if self.t_final < 0.0:
            raise ValueError("final time must be nonnegative")
        if self.cfl_constant <= 0.0:
            raise ValueError("CFL constant must be positive")
        if self.reference not in ("auto", "none") and self.reference not in {r.value for r in ReferenceKind}:
            raise ValueError(f"unknown reference {self.reference!r}")
        if self.fv_cells < 100 or self.sensor_every < 0:
            raise ValueError("fv_cells must be >= 100 and sensor_every >= 0")


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if isinstance(v, tuple):
            v = ",".join(_fmt(b) for b in v)
        elif hasattr(v, "value"):
            v = v.value
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name}={v}")
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat ``key=value`` lines; ``#`` starts a comment."""
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in ("N", "I", "fv_cells", "sensor_every"):
            kw[key] = int(val)
        elif key in ("kappa", "t_final", "cfl_constant"):
            kw[key] = float(val)
        elif key == "bounds":
            kw[key] = _parse_bounds(val)
        else:
            kw[key] = val
    return ExperimentConfig(**kw)


def _parse_bounds(text: str):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 2:
        raise ValueError("bounds must be given as m,M")
    return float(parts[0]), float(parts[1])


def _reference(cfg: ExperimentConfig, problem):
    if cfg.reference == "none":
        return None
    if cfg.reference != "auto":
        problem = dataclasses.replace(problem, reference=ReferenceKind(cfg.reference))
    return reference_function(problem, cfg.t_final, FVOracleConfig(cells=cfg.fv_cells))


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_solution(path: Path, state: SolutionState, mesh: Mesh, basis: ElementBasis, ref):
    x = mesh.node_coordinates(basis)
    uref = np.full_like(x, np.nan) if ref is None else np.asarray(ref(x), dtype=float)
    I, n = state.values.shape
    rows = ((i, k, x[i, k], state.values[i, k], uref[i, k]) for i in range(I) for k in range(n))
    _write_csv(path, ("element", "node", "x", "u_numeric", "u_reference"), rows)


def _write_diagnostics(out: Path, diags):
    _write_csv(out / "diagnostics.csv", diags.COLUMNS, diags.rows())
    rows = []
    for step, r in diags.sensor_log:
        for i in range(r.s1.size):
            rows.append((step, i, r.s1[i], r.s3[i], r.ratio[i], r.alpha[i]))
    _write_csv(out / "sensor.csv", ("step", "element", "S1", "S3", "ratio", "alpha"), rows)


def resolve_output(path: str | os.PathLike) -> Path:
    p = Path(path)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not p.is_absolute():
        p = Path(root) / p
    return p


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run one configuration and write its CSV files.

    Returns a summary dict with ``status`` ("ok" or "blowup"), error norms
    and range/TV information.
    """
    out = resolve_output(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(serialize_config(cfg))
    problem = make_problem(cfg.problem)
    mesh = Mesh(problem.domain, cfg.I)
    rc = RunConfig(mesh, cfg.N, cfg.t_final, cfg.cfl_constant)
    capture = CaptureConfig(
        mode=cfg.filter,
        sensor=SensorConfig(kappa=cfg.kappa),
        bounds=BoundsSpec(*cfg.bounds) if cfg.bounds else None,
        apply_point=cfg.capture_timing,
    )
    basis = ElementBasis.build(cfg.N)
    summary = {"status": "ok"}
    try:
        state, diags = run(problem, rc, capture, sensor_every=cfg.sensor_every or None)
    except SolverBlowUp as exc:
        summary.update(status="blowup", time=exc.time, element=exc.element)
        state, diags = exc.last_good, exc.diagnostics
        _write_solution(out / "solution.csv", state, mesh, basis, None)
        _write_diagnostics(out, diags)
        _write_summary(out, summary)
        return summary

    ref = _reference(cfg, problem)
    _write_solution(out / "solution.csv", state, mesh, basis, ref)
    _write_diagnostics(out, diags)
    U = state.values
    summary.update(
        steps=len(diags.t),
        umin=float(U.min()),
        umax=float(U.max()),
        tv=diags.tv[-1] if diags.tv else float(np.sum(np.abs(np.diff(U.reshape(-1))))),
    )
    if ref is not None:
        for name, p in (("L1", 1), ("L2", 2), ("Linf", np.inf)):
            summary[name] = error_norms(state, ref, mesh, basis, p)
    _write_summary(out, summary)
    return summary


def _write_summary(out: Path, summary: dict):
    line = " ".join(f"{k}={v if isinstance(v, str) else _fmt(v)}" for k, v in summary.items())
    (out / "summary.txt").write_text(line + "\n")
    print(line)


def sweep(base: ExperimentConfig, kappa_list, N_list, I_list) -> list[dict]:
    """Run every (kappa, N, I) combination into its own subdirectory and write ``index.csv``."""
    if not (kappa_list and N_list and I_list):
        raise ValueError("sweep lists must be nonempty")
    root = resolve_output(base.output_dir).resolve()
    root.mkdir(parents=True, exist_ok=True)
    results = []
    for kappa, N, I in itertools.product(kappa_list, N_list, I_list):
        sub = f"kappa{kappa:g}_N{N}_I{I}"
        row = {"kappa": kappa, "N": N, "I": I, "dir": sub}
        try:
            cfg = dataclasses.replace(base, kappa=kappa, N=N, I=I, output_dir=str(root / sub))
            row.update(run_experiment(cfg))
        except Exception as exc:  # recorded, sweep continues
            log.exception("sweep member %s failed", sub)
            row.update(status="error", message=str(exc))
        results.append(row)
    header = ("kappa", "N", "I", "dir", "status", "L1", "L2", "Linf", "umin", "umax", "tv")
    with open(root / "index.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in results:
            w.writerow([
                row.get(k, "") if isinstance(row.get(k, ""), str) else _fmt(row[k])
                for k in header
            ])
    return results


def _float_list(text: str):
    return [float(s) for s in text.split(",") if s.strip()]


def _int_list(text: str):
    return [int(s) for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bernstein-dg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value file; command-line options override it")
        p.add_argument("--problem", choices=[e.value for e in ProblemId])
        p.add_argument("--kappa", type=float)
        p.add_argument("--tmax", type=float)
        p.add_argument("--cfl", type=float)
        p.add_argument("--filter", choices=[e.value for e in CaptureMode])
        p.add_argument("--bounds", type=_parse_bounds, metavar="m,M")
        p.add_argument("--timing", choices=[e.value for e in ApplyPoint])
        p.add_argument("--reference", choices=["auto", "none"] + [r.value for r in ReferenceKind])
        p.add_argument("--fv-cells", type=int)
        p.add_argument("--sensor-every", type=int)
        p.add_argument("--out")
        p.add_argument("-v", "--verbose", action="store_true")

    prun = sub.add_parser("run", help="single experiment")
    common(prun)
    prun.add_argument("--degree", type=int)
    prun.add_argument("--elements", type=int)

    psw = sub.add_parser("sweep", help="parameter sweep over kappa, N and I")
    common(psw)
    psw.add_argument("--degree", type=int)
    psw.add_argument("--elements", type=int)
    psw.add_argument("--kappa-list", type=_float_list)
    psw.add_argument("--degree-list", type=_int_list)
    psw.add_argument("--elements-list", type=_int_list)
    return parser


def _config_from_args(args) -> ExperimentConfig:
    base = parse_config(Path(args.config).read_text()) if args.config else ExperimentConfig()
    kw = {}
    if args.problem is not None:
        kw["problem"] = args.problem
        if args.kappa is None and not args.config:
            kw["kappa"] = DEFAULT_KAPPA[ProblemId(args.problem)]
    for opt, key in (("degree", "N"), ("elements", "I"), ("kappa", "kappa"), ("tmax", "t_final"),
                     ("cfl", "cfl_constant"), ("filter", "filter"), ("bounds", "bounds"),
                     ("timing", "capture_timing"), ("reference", "reference"),
                     ("fv_cells", "fv_cells"), ("sensor_every", "sensor_every"), ("out", "output_dir")):
        val = getattr(args, opt, None)
        if val is not None:
            kw[key] = val
    return dataclasses.replace(base, **kw)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = _config_from_args(args)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    if args.command == "run":
        summary = run_experiment(cfg)
        return EXIT_BLOWUP if summary["status"] == "blowup" else EXIT_OK
    results = sweep(
        cfg,
        args.kappa_list or [cfg.kappa],
        args.degree_list or [cfg.N],
        args.elements_list or [cfg.I],
    )
    return EXIT_OK if all(r["status"] == "ok" for r in results) else EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
