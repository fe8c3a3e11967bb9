"""File formats: trajectory CSV, program text, mode-map and run-config files.

Trajectory CSV: header ``t,x,y,phi``, one row per sample, units s/cm/cm/rad.
Program files: one segment per line, ``<CW|CCW|OFF> <v_eff> <duration>``,
``#`` comments allowed. Config and mode-map files: flat ``key = value``
lines with dotted keys. All numeric output uses 9 significant digits, UTF-8
and LF line endings, so identical inputs produce byte-identical files.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    BotGeometry,
    Direction,
    MotionProgram,
    MotorCommand,
    Pose,
    Trajectory,
    TrajectoryError,
    validate_trajectory_arrays,
)
from .kinematics import (
    DEFAULT_DT,
    DEFAULT_TAU_M,
    ArenaConfig,
    ModeMap,
    NoiseConfig,
    WallMode,
    default_mode_map,
)

TRAJECTORY_HEADER = "t,x,y,phi"


class FileFormatError(ValueError):
    """A data file does not match its documented format."""

    def __init__(self, path, line: int | None, message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def write_trajectory_csv(traj: Trajectory, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(TRAJECTORY_HEADER + "\n")
        for t, x, y, phi in zip(traj.t, traj.x, traj.y, traj.phi):
            fh.write(f"{_fmt(t)},{_fmt(x)},{_fmt(y)},{_fmt(phi)}\n")


def read_trajectory_csv(path) -> Trajectory:
    """Read and validate a trajectory CSV; diagnostics carry the line number."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TRAJECTORY_HEADER:
            raise FileFormatError(path, 1, f"expected header '{TRAJECTORY_HEADER}'")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise FileFormatError(path, lineno, f"expected 4 fields, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise FileFormatError(path, lineno, f"non-numeric field in '{line}'")
    if not rows:
        raise FileFormatError(path, None, "no data rows")
    data = np.array(rows)
    try:
        return validate_trajectory_arrays(data[:, 0], data[:, 1], data[:, 2], data[:, 3])
    except TrajectoryError as exc:
        line = None if exc.index is None else exc.index + 2
        raise FileFormatError(path, line, str(exc)) from exc


def write_program(program: MotionProgram, path):
    # durations use repr: the shortest digits that round-trip exactly, so a
    # written program reproduces the in-memory one bit for bit
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# motion program, seed = {program.seed}\n")
        for seg in program.segments:
            fh.write(
                f"{seg.direction.value} {seg.v_eff!r} {seg.duration!r}\n"
            )


def read_program(path) -> MotionProgram:
    """Parse a program file; diagnostics carry the line number."""
    segments = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise FileFormatError(
                    path, lineno, f"expected '<CW|CCW|OFF> <v_eff> <duration>', got '{line}'"
                )
            name, v_raw, d_raw = parts
            try:
                direction = Direction(name.upper())
            except ValueError:
                raise FileFormatError(path, lineno, f"unknown direction '{name}'")
            try:
                v_eff = float(v_raw)
                duration = float(d_raw)
            except ValueError:
                raise FileFormatError(path, lineno, f"non-numeric field in '{line}'")
            try:
                segments.append(MotorCommand(direction, v_eff, duration))
            except ValueError as exc:
                raise FileFormatError(path, lineno, str(exc)) from exc
    if not segments:
        raise FileFormatError(path, None, "program file has no segments")
    return MotionProgram(tuple(segments))


def _parse_kv_lines(path) -> dict[str, tuple[str, int]]:
    """Flat ``key = value`` parser shared by config and mode-map files."""
    out: dict[str, tuple[str, int]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FileFormatError(path, lineno, f"expected 'key = value', got '{line}'")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key or not value:
                raise FileFormatError(path, lineno, f"empty key or value in '{line}'")
            if key in out:
                raise FileFormatError(path, lineno, f"duplicate key '{key}'")
            out[key] = (value, lineno)
    return out


def _floats(path, lineno, value: str) -> list[float]:
    try:
        return [float(part) for part in value.split()]
    except ValueError:
        raise FileFormatError(path, lineno, f"expected numbers, got '{value}'")


def read_mode_map(path) -> ModeMap:
    """Mode-map file: ``v_grid``/``alpha_grid`` rows plus ``eta.<i>``/``omega.<i>``
    rows (one per alpha-grid entry, values across the voltage grid)."""
    entries = _parse_kv_lines(path)

    def take(key):
        if key not in entries:
            raise FileFormatError(path, None, f"missing key '{key}'")
        return entries.pop(key)

    value, lineno = take("v_grid")
    v_grid = _floats(path, lineno, value)
    value, lineno = take("alpha_grid")
    alpha_grid = _floats(path, lineno, value)
    eta_rows, omega_rows = [], []
    for i in range(len(alpha_grid)):
        value, lineno = take(f"eta.{i}")
        eta_rows.append(_floats(path, lineno, value))
        value, lineno = take(f"omega.{i}")
        omega_rows.append(_floats(path, lineno, value))
    if entries:
        key = next(iter(entries))
        raise FileFormatError(path, entries[key][1], f"unknown key '{key}'")
    try:
        return ModeMap(v_grid, alpha_grid, eta_rows, omega_rows)
    except ValueError as exc:
        raise FileFormatError(path, None, str(exc)) from exc


def write_mode_map(mode_map: ModeMap, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("v_grid = " + " ".join(_fmt(v) for v in mode_map.v_grid) + "\n")
        fh.write("alpha_grid = " + " ".join(_fmt(a) for a in mode_map.alpha_grid) + "\n")
        for i in range(mode_map.alpha_grid.size):
            fh.write(f"eta.{i} = " + " ".join(_fmt(v) for v in mode_map.eta[i]) + "\n")
            fh.write(f"omega.{i} = " + " ".join(_fmt(v) for v in mode_map.omega[i]) + "\n")


@dataclass(frozen=True)
class RunConfig:
    """Everything a simulation run needs besides the program itself."""

    geometry: BotGeometry = field(default_factory=BotGeometry)
    arena: ArenaConfig = field(default_factory=ArenaConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    tau_m: float = DEFAULT_TAU_M
    dt: float = DEFAULT_DT
    seed: int = 0
    mode_map: ModeMap = field(default_factory=default_mode_map)
    initial: Pose | None = None

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not (math.isfinite(self.tau_m) and self.tau_m >= 0):
            raise ValueError(f"tau_m must be >= 0, got {self.tau_m!r}")


_CONFIG_KEYS = {
    "geometry.semi_major": float,
    "geometry.semi_minor": float,
    "geometry.l_leg": float,
    "geometry.alpha_leg": float,
    "geometry.n_leg_pairs": int,
    "arena.width": float,
    "arena.height": float,
    "arena.wall_mode": str,
    "noise.sigma_xy": float,
    "noise.sigma_phi": float,
    "noise.seed": int,
    "tau_m": float,
    "dt": float,
    "seed": int,
    "mode_map": str,
    "initial.x": float,
    "initial.y": float,
    "initial.phi": float,
}


def read_config(path) -> RunConfig:
    """Parse a run-config file (flat dotted keys; all keys optional).

    ``mode_map`` names a mode-map file, resolved relative to the config
    file. When ``noise.seed`` is absent the top-level ``seed`` feeds the
    noise stream.
    """
    entries = _parse_kv_lines(path)
    values: dict[str, object] = {}
    for key, (raw, lineno) in entries.items():
        if key not in _CONFIG_KEYS:
            raise FileFormatError(path, lineno, f"unknown key '{key}'")
        caster = _CONFIG_KEYS[key]
        try:
            values[key] = caster(raw)
        except ValueError:
            raise FileFormatError(
                path, lineno, f"bad value for '{key}': '{raw}'"
            )

    def build(cls, prefix, **extra):
        kwargs = {
            key.split(".", 1)[1]: val
            for key, val in values.items()
            if key.startswith(prefix + ".")
        }
        kwargs.update(extra)
        try:
            return cls(**kwargs)
        except ValueError as exc:
            raise FileFormatError(path, None, str(exc)) from exc

    wall_raw = values.pop("arena.wall_mode", None)
    extra = {}
    if wall_raw is not None:
        try:
            extra["wall_mode"] = WallMode(str(wall_raw).upper())
        except ValueError:
            raise FileFormatError(path, None, f"unknown wall mode '{wall_raw}'")
    arena = build(ArenaConfig, "arena", **extra)

    seed = int(values.get("seed", 0))
    if "noise.seed" not in values:
        values["noise.seed"] = seed
    noise = build(NoiseConfig, "noise")
    geometry = build(BotGeometry, "geometry")

    if "mode_map" in values:
        map_path = Path(path).parent / str(values["mode_map"])
        mode_map = read_mode_map(map_path)
    else:
        mode_map = default_mode_map()

    initial = None
    if any(k.startswith("initial.") for k in values):
        try:
            initial = Pose(
                float(values.get("initial.x", arena.width / 2.0)),
                float(values.get("initial.y", arena.height / 2.0)),
                float(values.get("initial.phi", 0.0)),
            )
        except ValueError as exc:
            raise FileFormatError(path, None, str(exc)) from exc

    try:
        return RunConfig(
            geometry=geometry,
            arena=arena,
            noise=noise,
            tau_m=float(values.get("tau_m", DEFAULT_TAU_M)),
            dt=float(values.get("dt", DEFAULT_DT)),
            seed=seed,
            mode_map=mode_map,
            initial=initial,
        )
    except ValueError as exc:
        raise FileFormatError(path, None, str(exc)) from exc
