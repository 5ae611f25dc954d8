"""Command-line interface.

Subcommands: reference (build/cache the fine-grid reference), fit (spectral
surrogate only), solve (matched FEM only), match (print the DoF-matched
resolution), benchmark (full pipeline), snapshots (grid export).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import runner, spectral
from .dof_matching import match_cn_to_dof
from .runner import ExperimentConfig


def _load_config(args) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.from_json(Path(args.config).read_text())
    else:
        config = ExperimentConfig()
    doc = asdict(config)
    if getattr(args, "ic", None):
        doc["ic"] = args.ic.replace("-", "_")
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "output", None):
        doc["output_dir"] = args.output
    if getattr(args, "paper_simpson", False):
        doc["paper_simpson"] = True
    if getattr(args, "paper_update", False):
        doc["paper_update"] = True
    config = ExperimentConfig(**doc)
    if getattr(args, "paper_scale", False):
        config = config.paper_scale()
    return config


def _add_common(p):
    p.add_argument("--config", help="path to a JSON config file")
    p.add_argument("--ic", choices=["polynomial", "mollifier", "single-mode"],
                   help="initial condition")
    p.add_argument("--seed", type=int, help="sampling seed")
    p.add_argument("--paper-scale", action="store_true",
                   help="use the full 400x400 reference resolution")
    p.add_argument("--paper-simpson", action="store_true",
                   help="halved first Simpson weight, for comparison only")
    p.add_argument("--paper-update", action="store_true",
                   help="one-sided stiffness average in the matched FEM solve")
    p.add_argument("--output", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavebench",
        description="DoF-matched wave-equation solver benchmarking")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in [
        ("reference", "build and cache the fine-grid reference solution"),
        ("fit", "fit the spectral surrogate and write the model JSON"),
        ("solve", "run the DoF-matched Crank-Nicolson solve"),
        ("benchmark", "full benchmark; writes report CSV/JSON"),
        ("snapshots", "export snapshot grids for plotting"),
    ]:
        p = sub.add_parser(name, help=help_)
        _add_common(p)

    p = sub.add_parser("match", help="print the DoF-matched FEM resolution")
    p.add_argument("dof", type=float, help="target effective DoF")
    p.add_argument("--T", type=float, default=1.0, help="final time")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "match":
        r = match_cn_to_dof(args.dof, args.T)
        print(json.dumps({"n": r.n, "dt": r.dt, "Nt": r.Nt,
                          "dof_cn": r.dof_cn, "mismatch": r.mismatch}))
        return 0

    config = _load_config(args)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    if args.command == "reference":
        ref = runner.get_reference(config)
        print(f"reference ready: {ref.grid_nx}x{ref.grid_ny}, "
              f"Nt={ref.Nt_ref}, dt={ref.dt_ref}")
        return 0

    if args.command == "fit":
        model, seconds = runner.fit_surrogate(config)
        path = out / f"model_{config.ic}.json"
        path.write_text(model.to_json())
        print(f"fitted in {seconds:.3f}s: lambda={model.lam:.3e}, "
              f"edof={model.edof:.1f} -> {path}")
        return 0

    if args.command == "solve":
        model, _ = runner.fit_surrogate(config)
        match = match_cn_to_dof(model.edof, config.T)
        traj, _, seconds = runner.solve_matched_fem(config, match)
        print(f"matched n={match.n}, dt={match.dt:.5f}; solved "
              f"{traj.Nt} steps in {seconds:.3f}s")
        return 0

    if args.command == "benchmark":
        result = runner.run_benchmark(config)
        sys.stdout.write(result.csv_text())
        return 0

    if args.command == "snapshots":
        ref = runner.get_reference(config)
        result = runner.run_benchmark(config, ref=ref, write_outputs=False)
        files = runner.emit_snapshots(config, result.model,
                                      result.trajectory, ref)
        print(f"wrote {len(files)} snapshot files to "
              f"{Path(config.output_dir) / 'snapshots'}")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
