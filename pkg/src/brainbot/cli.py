"""Command-line front end.

Subcommands: ``simulate``, ``encode``, ``analyze``, ``rmsd``, ``scan``.
Exit codes: 0 success, 2 bad input file or spec, 3 bad program file,
4 runtime precondition failure. All outputs are UTF-8 CSVs with LF line
endings and a header row; identical inputs and seeds reproduce them
byte for byte.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, io, programs
from .kinematics import simulate


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def _load_config(path) -> io.RunConfig:
    try:
        return io.read_config(path)
    except OSError as exc:
        raise CliError(2, f"cannot read config: {exc}")
    except ValueError as exc:
        raise CliError(2, f"malformed config: {exc}")


def _load_program(path):
    try:
        return io.read_program(path)
    except OSError as exc:
        raise CliError(3, f"cannot read program: {exc}")
    except ValueError as exc:
        raise CliError(3, f"malformed program: {exc}")


def _load_trajectories(paths):
    trajs = []
    for path in paths:
        try:
            trajs.append(io.read_trajectory_csv(path))
        except OSError as exc:
            raise CliError(2, f"cannot read trajectory: {exc}")
        except ValueError as exc:
            raise CliError(2, f"invalid trajectory: {exc}")
    return trajs


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    program = _load_program(args.program)
    try:
        traj = simulate(
            program,
            geometry=config.geometry,
            mode_map=config.mode_map,
            arena=config.arena,
            noise=config.noise,
            tau_m=config.tau_m,
            dt=config.dt,
            initial=config.initial,
        )
    except ValueError as exc:
        raise CliError(4, f"simulation failed: {exc}")
    io.write_trajectory_csv(traj, args.output)
    net = math.hypot(traj.x[-1] - traj.x[0], traj.y[-1] - traj.y[0])
    duration = traj.duration
    print(
        f"duration={_fmt(duration)} s net_displacement={_fmt(net)} cm "
        f"mean_speed={_fmt(net / duration)} cm/s samples={len(traj)}"
    )
    return 0


def cmd_encode(args) -> int:
    try:
        if args.kind == "ballistic":
            spec = programs.BallisticSpec(args.T, args.n, args.v_eff)
            program = programs.encode_ballistic(spec)
        else:
            spec = programs.RunTumbleSpec(
                args.tmin, args.tmax, args.total, args.v_eff, args.seed
            )
            program = programs.encode_run_and_tumble(spec)
    except ValueError as exc:
        raise CliError(2, f"invalid spec: {exc}")
    io.write_program(program, args.output)
    print(
        f"wrote {len(program)} segments, total {_fmt(program.total_duration)} s "
        f"to {args.output}"
    )
    return 0


def cmd_analyze(args) -> int:
    trajs = _load_trajectories(args.trajectories)
    bands = tuple(args.bands)
    if len(bands) != 3:
        raise CliError(2, "--bands needs exactly three values")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pooled = []
    for path, traj in zip(args.trajectories, trajs):
        try:
            vel = analysis.differentiate(traj, args.window, args.degree)
        except ValueError as exc:
            raise CliError(2, f"{path}: {exc}")
        etas = analysis.eta_series(vel, l_leg=args.l_leg, eps_v=args.eps_v)
        icr = analysis.icr_series(traj, vel, eps_omega=args.eps_omega)
        pooled.append(etas)
        stem = Path(path).stem
        table_path = out_dir / f"{stem}_kinematics.csv"
        with open(table_path, "w", encoding="utf-8", newline="") as fh:
            fh.write("t,vx,vy,omega,eta,icr_x,icr_y,valid\n")
            for i in range(len(vel)):
                fh.write(
                    f"{_fmt(vel.t[i])},{_fmt(vel.vx[i])},{_fmt(vel.vy[i])},"
                    f"{_fmt(vel.omega[i])},{_fmt(etas.eta[i])},"
                    f"{_fmt(icr[i, 0])},{_fmt(icr[i, 1])},"
                    f"{1 if etas.valid[i] else 0}\n"
                )
        try:
            label = analysis.classify(etas, bands)
        except ValueError as exc:
            raise CliError(2, f"{path}: {exc}")
        median = float(np.median(etas.valid_values))
        print(
            f"{path} {label.value} median_eta={_fmt(median)} "
            f"valid={int(np.count_nonzero(etas.valid))}/{len(etas)}"
        )
    hist = analysis.eta_histogram(pooled, args.bin_width)
    hist_path = out_dir / "eta_histogram.csv"
    with open(hist_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("bin_left,bin_right,count\n")
        for lo, hi, count in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
            fh.write(f"{_fmt(lo)},{_fmt(hi)},{int(count)}\n")
    print(f"eta histogram ({hist.n_invalid} invalid samples) -> {hist_path}")
    return 0


def cmd_rmsd(args) -> int:
    trajs = _load_trajectories(args.trajectories)
    dt = trajs[0].dt
    tau_min = args.tau_min if args.tau_min is not None else 2.0 * dt
    tau_max = args.tau_max if args.tau_max is not None else min(
        tr.duration for tr in trajs
    ) / 4.0
    try:
        taus = analysis.log_tau_grid(tau_min, tau_max, dt, args.per_decade)
        curve = analysis.rmsd(trajs, taus)
        fit = analysis.fit_regimes(curve, min_pairs=args.min_pairs)
    except ValueError as exc:
        raise CliError(2, f"rmsd analysis failed: {exc}")
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        fh.write("tau,rmsd,n_pairs\n")
        for tau, value, pairs in zip(curve.tau, curve.rmsd, curve.n_pairs):
            fh.write(f"{_fmt(tau)},{_fmt(value)},{int(pairs)}\n")
    line = (
        f"{_fmt(fit.slope_short)} {_fmt(fit.slope_long)} "
        f"{_fmt(fit.tau_star)} {_fmt(fit.residual)}"
    )
    if fit.degenerate:
        line += " degenerate"
    print(line)
    return 0


def cmd_scan(args) -> int:
    config = _load_config(args.config)
    try:
        result = programs.scan_optimal_T(
            args.tmin,
            args.tmax,
            args.steps,
            v_eff=args.v_eff,
            geometry=config.geometry,
            mode_map=config.mode_map,
            tau_m=config.tau_m,
            dt=config.dt,
        )
    except ValueError as exc:
        raise CliError(2, f"scan failed: {exc}")
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        fh.write("T,v_mean\n")
        for period, speed in zip(result.t_values, result.v_values):
            fh.write(f"{_fmt(period)},{_fmt(speed)}\n")
    print(f"T_opt={_fmt(result.t_opt)} s v_opt={_fmt(result.v_opt)} cm/s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brainbot",
        description="Simulate, encode and analyze vibration-driven bot motion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a motor program from a config")
    p.add_argument("config")
    p.add_argument("program")
    p.add_argument("-o", "--output", required=True, help="trajectory CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("encode", help="write a motor program file")
    kinds = p.add_subparsers(dest="kind", required=True)

    pb = kinds.add_parser("ballistic", help="alternating CW/CCW rotations")
    pb.add_argument("--T", type=float, required=True, help="segment duration [s]")
    pb.add_argument("--n", type=int, required=True, help="number of segments")
    pb.add_argument("--v-eff", type=float, default=programs.DEFAULT_V_EFF)
    pb.add_argument("-o", "--output", required=True)
    pb.set_defaults(func=cmd_encode, kind="ballistic")

    pr = kinds.add_parser("runtumble", help="random directions and durations")
    pr.add_argument("--tmin", type=float, default=0.4)
    pr.add_argument("--tmax", type=float, default=1.0)
    pr.add_argument("--total", type=float, required=True, help="total duration [s]")
    pr.add_argument("--v-eff", type=float, default=programs.DEFAULT_V_EFF)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("-o", "--output", required=True)
    pr.set_defaults(func=cmd_encode, kind="runtumble")

    p = sub.add_parser("analyze", help="velocities, rotation centres, spin ratio")
    p.add_argument("trajectories", nargs="+")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--window", type=int, default=analysis.DEFAULT_WINDOW)
    p.add_argument("--degree", type=int, default=analysis.DEFAULT_DEGREE)
    p.add_argument("--l-leg", type=float, default=1.45)
    p.add_argument("--eps-v", type=float, default=analysis.DEFAULT_EPS_V)
    p.add_argument("--eps-omega", type=float, default=analysis.DEFAULT_EPS_OMEGA)
    p.add_argument("--bin-width", type=float, default=0.05)
    p.add_argument(
        "--bands", type=float, nargs=3, default=list(analysis.DEFAULT_ETA_BANDS),
        metavar=("TRANSLATION_MAX", "SPIN_LOW", "SPIN_HIGH"),
    )
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("rmsd", help="RMS displacement curve and regime fit")
    p.add_argument("trajectories", nargs="+")
    p.add_argument("-o", "--output", required=True, help="curve CSV path")
    p.add_argument("--tau-min", type=float, default=None)
    p.add_argument("--tau-max", type=float, default=None)
    p.add_argument("--per-decade", type=int, default=analysis.DEFAULT_PER_DECADE)
    p.add_argument("--min-pairs", type=int, default=analysis.DEFAULT_MIN_PAIRS)
    p.set_defaults(func=cmd_rmsd)

    p = sub.add_parser("scan", help="segment-duration scan for peak mean speed")
    p.add_argument("config")
    p.add_argument("--tmin", type=float, default=0.2)
    p.add_argument("--tmax", type=float, default=4.0)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--v-eff", type=float, default=programs.DEFAULT_V_EFF)
    p.add_argument("-o", "--output", required=True, help="curve CSV path")
    p.set_defaults(func=cmd_scan)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
