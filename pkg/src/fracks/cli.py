"""Command-line interface: simulate | verify | oracle-compare | sweep.

Exit codes are a stable contract: 0 success, 1 usage or configuration error,
2 blow-up detected (or a failed sweep gate), 3 step-size underflow.  All
numeric output uses 17 significant digits, so identical configurations and
seeds reproduce byte-identical CSV files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .evolution import ModelParams, Outcome, SolverConfig, run, save_trajectory
from .grid import FLOAT_FORMAT, Field, TorusGrid
from .initial_conditions import make_initial_condition
from .operators import DriftVariant, fractional_laplacian
from .oracle import QuadratureSpec, lambda_alpha_field, lambda_alpha_point_with_tolerance
from .verification import (
    VerdictReport,
    bump_field,
    check_elliptic_suite,
    check_entropy_suite,
    check_largetime_bound,
    check_log_sobolev,
    check_lower_bound_lemma,
    check_norm_evolution,
    check_pointwise_identity,
    format_report_table,
    reports_to_json,
)

__all__ = ["main", "entry", "SweepSpec", "cmd_simulate", "cmd_verify", "cmd_oracle_compare", "cmd_sweep"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BLOWUP = 2
EXIT_DT_UNDERFLOW = 3

_OUTCOME_EXIT = {
    Outcome.COMPLETED: EXIT_OK,
    Outcome.BLOWUP_DETECTED: EXIT_BLOWUP,
    Outcome.DT_UNDERFLOW: EXIT_DT_UNDERFLOW,
}

REGIME_MAP_COLUMNS = "alpha,chi,r,outcome,t_final,sup_linf,alpha_star_strong,alpha_star_weak"


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad flags; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


@dataclass
class SweepSpec:
    """Parsed sweep configuration: parameter grids plus a shared solver setup."""

    alpha_grid: list[float]
    chi_grid: list[float]
    r_grid: list[float]
    ic: str
    n: int = 512
    beta: float = 2.0
    variant: str = "helmholtz"
    dt_init: float = 5e-4
    t_end: float = 10.0
    dt_min: float = 1e-10
    record_every: int = 50
    mollify_ic_eps: float = 0.5
    parallelism: int = 1

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"sweep config is not valid JSON: {exc}") from exc
        known = {f: raw[f] for f in cls.__dataclass_fields__ if f in raw}
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown sweep config fields: {sorted(unknown)}")
        missing = {f for f in ("alpha_grid", "chi_grid", "r_grid", "ic") if f not in known}
        if missing:
            raise ValueError(f"sweep config is missing required fields: {sorted(missing)}")
        spec = cls(**known)
        for name in ("alpha_grid", "chi_grid", "r_grid"):
            grid = getattr(spec, name)
            if not isinstance(grid, list) or not grid:
                raise ValueError(f"sweep config field {name} must be a nonempty list")
        if spec.parallelism < 1:
            raise ValueError("sweep config field parallelism must be >= 1")
        return spec


def _run_sweep_cell(payload: dict) -> dict:
    """One (alpha, chi, r) cell; top-level so process pools can pickle it."""
    grid = TorusGrid(payload["n"])
    u0 = make_initial_condition(payload["ic"], grid)
    params = ModelParams(
        alpha=payload["alpha"],
        beta=payload["beta"],
        chi=payload["chi"],
        r=payload["r"],
        variant=DriftVariant(payload["variant"]),
    )
    config = SolverConfig(
        n=payload["n"],
        dt_init=payload["dt_init"],
        t_end=payload["t_end"],
        adapt=True,
        dt_min=payload["dt_min"],
        record_every=payload["record_every"],
        mollify_ic_eps=payload["mollify_ic_eps"],
    )
    traj = run(u0, params, config)
    return {
        "alpha": params.alpha,
        "chi": params.chi,
        "r": params.r,
        "outcome": traj.outcome.value,
        "t_final": traj.t_final,
        "sup_linf": max(rec.lp_inf for rec in traj.records),
        "alpha_star_strong": params.alpha_star_strong,
        "alpha_star_weak": params.alpha_star_weak,
    }


def cmd_simulate(args) -> int:
    grid = TorusGrid(args.n)
    try:
        u0 = make_initial_condition(args.ic, grid)
        params = ModelParams(
            alpha=args.alpha,
            beta=args.beta,
            chi=args.chi,
            r=args.r,
            epsilon=args.eps,
            variant=DriftVariant(args.variant),
        )
        config = SolverConfig(
            n=args.n,
            dt_init=args.dt,
            t_end=args.t_end,
            adapt=not args.no_adapt,
            dt_min=args.dt_min,
            record_every=args.record_every,
            mollify_ic_eps=args.mollify_ic,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    traj = run(u0, params, config)
    run_dir = save_trajectory(traj, args.out)
    print(f"outcome: {traj.outcome.value}")
    print(f"t_final: {FLOAT_FORMAT % traj.t_final}")
    print(f"run_dir: {run_dir}")
    return _OUTCOME_EXIT[traj.outcome]


def _norm_suite_reports(trials: int, seed: int, n: int) -> list[VerdictReport]:
    """Short canned trajectories driving the norm-ladder and large-time checks."""
    grid = TorusGrid(n)
    u0 = Field(grid, 3.0 * (1.0 + np.cos(grid.x)))
    params = ModelParams(alpha=1.2, beta=2.0, chi=1.0, r=0.6)
    config = SolverConfig(n=n, dt_init=1e-3, t_end=10.0, adapt=True, dt_min=1e-9, record_every=20)
    traj = run(u0, params, config)
    reports = []
    if traj.outcome is Outcome.COMPLETED:
        reports.append(check_norm_evolution(traj))
        reports.append(check_largetime_bound(traj))
    else:
        reports.append(VerdictReport("norm_evolution", 1, 1, -1.0, 1e-4))
    return reports


def cmd_verify(args) -> int:
    if args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    suites = {
        "elliptic": lambda: [
            check_elliptic_suite(args.trials, args.beta, DriftVariant.HELMHOLTZ, args.seed, n=args.n),
            check_elliptic_suite(args.trials, args.beta, DriftVariant.RIESZ, args.seed, n=args.n),
        ],
        "identity": lambda: [
            check_pointwise_identity(args.trials, a, args.seed, n=min(args.n, 256))
            for a in (0.5, 1.0)
        ],
        "lowerbound": lambda: [
            check_lower_bound_lemma(bump_field(TorusGrid(max(args.n, 256)), m), a, 1.0)
            for a in (0.5, 1.0)
            for m in (8, 32, 128)
        ],
        "entropy": lambda: check_entropy_suite(args.trials, args.seed, n=min(args.n, 256)),
        "logsobolev": lambda: [check_log_sobolev(args.trials, args.seed, n=min(args.n, 256))],
        "norms": lambda: _norm_suite_reports(args.trials, args.seed, min(args.n, 256)),
    }
    if args.suite == "all":
        selected = list(suites)
    elif args.suite in suites:
        selected = [args.suite]
    else:
        print(f"error: unknown suite {args.suite!r}", file=sys.stderr)
        return EXIT_USAGE
    reports: list[VerdictReport] = []
    for name in selected:
        reports.extend(suites[name]())
    print(format_report_table(reports))
    if args.out:
        Path(args.out).write_text(reports_to_json(reports) + "\n")
    if all(r.all_skipped for r in reports):
        print("error: every check was skipped; hypothesis constructions never fired", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if all(r.pass_ for r in reports) else EXIT_BLOWUP


def cmd_oracle_compare(args) -> int:
    if not 0.0 < args.alpha < 2.0:
        print(f"error: --alpha must lie in (0, 2), got {args.alpha}", file=sys.stderr)
        return EXIT_USAGE
    grid = TorusGrid(args.n)
    try:
        f = make_initial_condition(args.ic, grid)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    q = QuadratureSpec(refinement=args.refine, image_cutoff=args.cutoff)
    spectral = fractional_laplacian(f, args.alpha).values
    oracle_vals = lambda_alpha_field(f, args.alpha, q)
    dev = np.abs(spectral - oracle_vals)
    scale = float(np.max(np.abs(spectral)))
    max_abs = float(np.max(dev))
    max_rel = max_abs / scale if scale > 0 else max_abs
    _, self_tol = lambda_alpha_point_with_tolerance(f, args.alpha, int(np.argmax(dev)), q)
    self_tol_rel = self_tol / scale if scale > 0 else self_tol
    print(f"max_abs_deviation: {FLOAT_FORMAT % max_abs}")
    print(f"max_rel_deviation: {FLOAT_FORMAT % max_rel}")
    print(f"oracle_self_tolerance_rel: {FLOAT_FORMAT % self_tol_rel}")
    return EXIT_OK if max_rel <= max(1e-3, self_tol_rel) else EXIT_BLOWUP


def cmd_sweep(args) -> int:
    path = Path(args.config)
    if not path.exists():
        print(f"error: sweep config {path} does not exist", file=sys.stderr)
        return EXIT_USAGE
    try:
        spec = SweepSpec.from_json(path.read_text())
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parallelism = int(os.environ.get("FRACKS_THREADS", spec.parallelism))
    cells = [
        {
            "alpha": alpha, "chi": chi, "r": r, "ic": spec.ic, "n": spec.n,
            "beta": spec.beta, "variant": spec.variant, "dt_init": spec.dt_init,
            "t_end": spec.t_end, "dt_min": spec.dt_min,
            "record_every": spec.record_every, "mollify_ic_eps": spec.mollify_ic_eps,
        }
        for alpha in spec.alpha_grid
        for chi in spec.chi_grid
        for r in spec.r_grid
    ]
    if parallelism > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            rows = list(pool.map(_run_sweep_cell, cells))
    else:
        rows = [_run_sweep_cell(cell) for cell in cells]
    rows.sort(key=lambda row: (row["alpha"], row["chi"], row["r"]))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [REGIME_MAP_COLUMNS]
    for row in rows:
        lines.append(
            ",".join(
                [
                    FLOAT_FORMAT % row["alpha"], FLOAT_FORMAT % row["chi"], FLOAT_FORMAT % row["r"],
                    row["outcome"], FLOAT_FORMAT % row["t_final"], FLOAT_FORMAT % row["sup_linf"],
                    FLOAT_FORMAT % row["alpha_star_strong"], FLOAT_FORMAT % row["alpha_star_weak"],
                ]
            )
        )
    csv_path = out_dir / "regime_map.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    print(f"regime_map: {csv_path}")

    gate_failures = [
        row
        for row in rows
        if row["alpha"] > row["alpha_star_strong"] + 0.05
        and row["alpha"] >= 0.3
        and row["outcome"] != Outcome.COMPLETED.value
    ]
    for row in gate_failures:
        print(
            f"gate failure: alpha={row['alpha']:g} chi={row['chi']:g} r={row['r']:g} "
            f"above threshold {row['alpha_star_strong']:g} ended {row['outcome']}",
            file=sys.stderr,
        )
    return EXIT_BLOWUP if gate_failures else EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="fracks", description="Fractional drift-diffusion laboratory")
    parser.add_argument("--version", action="version", version=f"fracks {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate one model instance")
    sim.add_argument("--alpha", type=float, required=True, help="diffusion order in (0, 2]")
    sim.add_argument("--beta", type=float, default=2.0, help="drift kernel order")
    sim.add_argument("--chi", type=float, default=0.0, help="chemosensitivity")
    sim.add_argument("--r", type=float, default=0.0, help="logistic strength")
    sim.add_argument("--eps", type=float, default=0.0, help="hyperviscous regularization strength")
    sim.add_argument("--variant", choices=["helmholtz", "riesz"], default="helmholtz")
    sim.add_argument("--n", type=int, default=256, help="grid size (even, >= 8)")
    sim.add_argument("--dt", type=float, default=1e-3, help="initial time step")
    sim.add_argument("--t-end", type=float, required=True, help="final time")
    sim.add_argument("--ic", required=True, help="initial condition, e.g. cosine:0.1, bump:5, expcos")
    sim.add_argument("--out", default="runs", help="parent directory for the run directory")
    sim.add_argument("--no-adapt", action="store_true", help="fixed time step")
    sim.add_argument("--dt-min", type=float, default=1e-9)
    sim.add_argument("--record-every", type=int, default=10)
    sim.add_argument("--mollify-ic", type=float, default=0.0, help="heat-mollify the data at this time")
    sim.set_defaults(fn=cmd_simulate)

    ver = sub.add_parser("verify", help="run verification suites")
    ver.add_argument(
        "--suite",
        required=True,
        help="one of elliptic|identity|lowerbound|entropy|logsobolev|norms|all",
    )
    ver.add_argument("--trials", type=int, default=100)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--n", type=int, default=256)
    ver.add_argument("--beta", type=float, default=2.0)
    ver.add_argument("--out", default=None, help="write the JSON summary here")
    ver.set_defaults(fn=cmd_verify)

    orc = sub.add_parser("oracle-compare", help="spectral vs kernel-quadrature cross-check")
    orc.add_argument("--alpha", type=float, required=True)
    orc.add_argument("--n", type=int, default=256)
    orc.add_argument("--cutoff", type=int, default=200, help="explicit kernel images")
    orc.add_argument("--refine", type=int, default=4, help="quadrature refinement factor")
    orc.add_argument("--ic", default="expcos")
    orc.set_defaults(fn=cmd_oracle_compare)

    swp = sub.add_parser("sweep", help="regime map over (alpha, chi, r)")
    swp.add_argument("--config", required=True, help="JSON sweep configuration")
    swp.add_argument("--out", default="sweep_out")
    swp.set_defaults(fn=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())
