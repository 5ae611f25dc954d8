"""Benchmark orchestration: configs, the DoF-matched pipeline, reports.

A benchmark run fits the spectral surrogate, matches the FEM resolution to
its effective DoF, runs the matched Crank-Nicolson solve, and measures both
against a fine-grid reference. Results go to a CSV (one row per solver)
and a JSON document; snapshot grids can be exported for plotting.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, asdict, fields as dc_fields
from pathlib import Path

import numpy as np

from . import fem, metrics, reference, spectral
from .dof_matching import match_cn_to_dof
from .mesh import build_structured_mesh
from .problem import WaveProblem

__all__ = ["ExperimentConfig", "BenchmarkResult", "run_benchmark",
           "emit_snapshots", "CSV_HEADER"]

CSV_HEADER = ["ic", "solver", "st_l2", "st_rel", "linf_l2", "linf_rel",
              "improvement", "edof_or_dof", "runtime_s"]


@dataclass
class ExperimentConfig:
    """Validated benchmark configuration; serializes to/from strict JSON."""

    L1: float = 1.0
    L2: float = 1.0
    c: float = 1.0
    T: float = 1.0
    ic: str = "polynomial"
    ic_params: dict = field(default_factory=dict)
    N: int = 40
    m: int = 5000
    seed: int = 0
    sample_mode: str = "jittered"
    lambda_min: float = 1e-12
    lambda_max: float = 1e2
    lambda_per_decade: int = 8
    ref_nx: int = 200
    ref_ny: int = 200
    dt_ref: float | None = None          # default 1 / (2 ref_nx)
    Nt_eval: int = 200
    paper_simpson: bool = False
    paper_update: bool = False
    snapshot_times: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    output_dir: str = "wavebench_out"

    def __post_init__(self):
        if self.dt_ref is None:
            self.dt_ref = 1.0 / (2 * self.ref_nx)
        if self.dt_ref >= min(self.L1 / self.ref_nx, self.L2 / self.ref_ny):
            raise ValueError("dt_ref must be smaller than the reference grid "
                             "spacing")
        if self.Nt_eval < 2 or self.Nt_eval % 2:
            raise ValueError("Nt_eval must be even and >= 2")
        if self.N < 1 or self.m < 1:
            raise ValueError("N and m must be positive")
        if self.lambda_min <= 0 or self.lambda_max <= self.lambda_min:
            raise ValueError("need 0 < lambda_min < lambda_max")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        known = {f.name for f in dc_fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def problem(self) -> WaveProblem:
        return WaveProblem(self.L1, self.L2, self.c, self.T, self.ic,
                           dict(self.ic_params))

    def lambda_grid(self) -> np.ndarray:
        decades = np.log10(self.lambda_max / self.lambda_min)
        n = int(round(decades * self.lambda_per_decade)) + 1
        return np.logspace(np.log10(self.lambda_min),
                           np.log10(self.lambda_max), n)

    def paper_scale(self) -> "ExperimentConfig":
        """Copy of this config at the full 400 x 400 reference resolution."""
        doc = asdict(self)
        doc.update(ref_nx=400, ref_ny=400, dt_ref=None)
        return ExperimentConfig(**doc)


@dataclass
class BenchmarkResult:
    """Everything a benchmark run produces, before serialization."""

    config: ExperimentConfig
    model: spectral.SpectralModel
    match: object
    trajectory: fem.FemTrajectory
    ep_report: metrics.ErrorReport
    cn_report: metrics.ErrorReport
    improvement_st: float
    improvement_linf: float
    fit_seconds: float
    solve_seconds: float

    def rows(self):
        """CSV rows in the layout of the accuracy tables."""
        ep, cn = self.ep_report, self.cn_report
        return [
            [self.config.ic, "bepgp", ep.st_l2, ep.st_rel, ep.linf_l2,
             ep.linf_rel, self.improvement_st, self.model.edof,
             self.fit_seconds],
            [self.config.ic, "cn_fem", cn.st_l2, cn.st_rel, cn.linf_l2,
             cn.linf_rel, self.improvement_st, self.match.dof_cn,
             self.solve_seconds],
        ]

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in self.rows():
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "lambda": self.model.lam,
            "edof": self.model.edof,
            "match": {"n": self.match.n, "dt": self.match.dt,
                      "Nt": self.match.Nt, "dof_cn": self.match.dof_cn,
                      "mismatch": self.match.mismatch},
            "bepgp": self.ep_report.to_dict(),
            "cn_fem": self.cn_report.to_dict(),
            "improvement_st": self.improvement_st,
            "improvement_linf": self.improvement_linf,
            "fit_seconds": self.fit_seconds,
            "solve_seconds": self.solve_seconds,
        }


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return v


def get_reference(config: ExperimentConfig, cache=True):
    """Build or load the fine-grid reference for this config."""
    cache_dir = Path(config.output_dir) / "cache" if cache else None
    return reference.generate_reference(config.problem(), config.ref_nx,
                                        config.ref_ny, config.dt_ref,
                                        cache_dir)


def fit_surrogate(config: ExperimentConfig) -> tuple[spectral.SpectralModel, float]:
    """Fit the spectral model (including the GCV search), timed."""
    t0 = time.perf_counter()
    model = spectral.fit_spectral_model(
        config.problem(), config.N, config.m, seed=config.seed,
        sample_mode=config.sample_mode, lambda_grid=config.lambda_grid())
    return model, time.perf_counter() - t0


def solve_matched_fem(config: ExperimentConfig, match):
    """Run the DoF-matched Crank-Nicolson solve, timed."""
    problem = config.problem()
    mesh = build_structured_mesh(problem.L1, problem.L2, match.n, match.n)
    t0 = time.perf_counter()
    system = fem.FemSystem.build(mesh, problem.c)
    u0 = fem.interior_values(problem.initial_condition(), mesh)
    if config.paper_update:
        traj = fem.cn_solve(system, u0, match.dt, match.Nt,
                            scheme="dissipative", start="hold")
    else:
        traj = fem.cn_solve(system, u0, match.dt, match.Nt)
    return traj, mesh, time.perf_counter() - t0


def run_benchmark(config: ExperimentConfig, ref=None,
                  write_outputs: bool = True) -> BenchmarkResult:
    """Full DoF-matched benchmark for one initial condition."""
    if ref is None:
        ref = get_reference(config)

    model, fit_s = fit_surrogate(config)
    match = match_cn_to_dof(model.edof, config.T)
    traj, eval_mesh, solve_s = solve_matched_fem(config, match)

    ep_field = lambda x, y, t: spectral.predict(model, x, y, t)
    cn_field = traj.field()
    ep_report = metrics.compute_error_report(
        ep_field, ref, eval_mesh, config.Nt_eval, config.paper_simpson,
        timings={"fit_seconds": fit_s})
    cn_report = metrics.compute_error_report(
        cn_field, ref, eval_mesh, config.Nt_eval, config.paper_simpson,
        timings={"solve_seconds": solve_s})

    result = BenchmarkResult(
        config=config, model=model, match=match, trajectory=traj,
        ep_report=ep_report, cn_report=cn_report,
        improvement_st=cn_report.st_l2 / ep_report.st_l2,
        improvement_linf=cn_report.linf_l2 / ep_report.linf_l2,
        fit_seconds=fit_s, solve_seconds=solve_s)

    if write_outputs:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"report_{config.ic}.csv").write_text(result.csv_text())
        (out / f"report_{config.ic}.json").write_text(
            json.dumps(result.to_dict(), indent=2))
    return result


def emit_snapshots(config: ExperimentConfig, model, traj, ref,
                   out_dir=None) -> list:
    """Write plot-ready snapshot grids for each method and snapshot time.

    Per time: the reference on its native grid, the FEM solution
    interpolated to the reference grid, and the surrogate on a 50 x 50
    grid. Each snapshot is written both as CSV (x, y, value) and in the
    binary grid format. Boundary rows and columns are exact zeros.
    """
    out = Path(out_dir or config.output_dir) / "snapshots"
    out.mkdir(parents=True, exist_ok=True)
    problem = config.problem()
    written = []

    ref_xs = np.linspace(0.0, problem.L1, ref.grid_nx + 1)
    ref_ys = np.linspace(0.0, problem.L2, ref.grid_ny + 1)
    ep_xs = np.linspace(0.0, problem.L1, 51)
    ep_ys = np.linspace(0.0, problem.L2, 51)
    cn_field = traj.field()
    RX, RY = np.meshgrid(ref_xs, ref_ys)

    for t in config.snapshot_times:
        grids = {
            "reference": (ref.at_time(t), ref_xs, ref_ys),
            "cn_fem": (cn_field(RX.ravel(), RY.ravel(), t).reshape(RX.shape),
                       ref_xs, ref_ys),
            "bepgp": (spectral.predict_grid(model, ep_xs, ep_ys, t),
                      ep_xs, ep_ys),
        }
        for name, (grid, xs, ys) in grids.items():
            grid = np.array(grid, dtype=float)
            grid[0, :] = 0.0
            grid[-1, :] = 0.0
            grid[:, 0] = 0.0
            grid[:, -1] = 0.0
            stem = f"{config.ic}_{name}_t{t:.2f}"
            _write_grid_csv(out / f"{stem}.csv", grid, xs, ys)
            snap = reference.ReferenceSolution(
                problem, xs.size - 1, ys.size - 1, problem.T, 0,
                grid[None, :, :])
            reference.write_reference(snap, out / f"{stem}.wben")
            written.append(out / f"{stem}.csv")
            written.append(out / f"{stem}.wben")
    return written


def _write_grid_csv(path, grid, xs, ys):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        for iy, yv in enumerate(ys):
            for ix, xv in enumerate(xs):
                w.writerow([_fmt(float(xv)), _fmt(float(yv)),
                            _fmt(float(grid[iy, ix]))])
