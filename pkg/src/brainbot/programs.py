"""Motor-program encoders and their emergent translational statistics.

Ballistic motion comes from strictly alternating CW/CCW rotations of equal
duration: each reversal turns the chord of the circular arc by a fixed
angle, so the bot zigzags along a straight mean path. Diffusive
(run-and-tumble) motion comes from randomizing both the spin direction and
the segment duration.

Constructors and predictors are pure; grid scans may evaluate points
concurrently since every point is independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BotGeometry,
    Direction,
    MotionProgram,
    MotorCommand,
    Pose,
    Trajectory,
    wrap_angle,
)
from .kinematics import (
    DEFAULT_DT,
    DEFAULT_TAU_M,
    ArenaConfig,
    ModeMap,
    NoiseConfig,
    WallMode,
    simulate,
)

DEFAULT_V_EFF = 2.25


@dataclass(frozen=True)
class BallisticSpec:
    """Alternating-rotation gait: ``n_segments`` spins of duration ``T`` each.

    ``alpha_chord`` is the inter-chord angle used by the mean-speed
    predictor; in simulation it is an emergent quantity, not a control.
    """

    T: float
    n_segments: int
    v_eff: float = DEFAULT_V_EFF
    alpha_chord: float = math.pi

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValueError(f"T must be positive, got {self.T!r}")
        if self.n_segments < 1:
            raise ValueError("need at least one segment (empty program)")
        if not (0.0 < self.alpha_chord <= math.pi):
            raise ValueError("alpha_chord must lie in (0, pi]")


@dataclass(frozen=True)
class RunTumbleSpec:
    """Random-gait parameters: i.i.d. directions, durations ~ U[T_min, T_max]."""

    t_min: float
    t_max: float
    total_time: float
    v_eff: float = DEFAULT_V_EFF
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.t_min <= self.t_max):
            raise ValueError(
                f"require 0 < t_min <= t_max, got [{self.t_min}, {self.t_max}]"
            )
        if not (math.isfinite(self.total_time) and self.total_time > 0):
            raise ValueError("total_time must be positive")


def encode_ballistic(spec: BallisticSpec, start: Direction = Direction.CW) -> MotionProgram:
    """Strictly alternating CW/CCW program (starting CW by default)."""
    if start not in (Direction.CW, Direction.CCW):
        raise ValueError("start direction must be CW or CCW")
    other = Direction.CCW if start is Direction.CW else Direction.CW
    segments = tuple(
        MotorCommand(start if i % 2 == 0 else other, spec.v_eff, spec.T)
        for i in range(spec.n_segments)
    )
    return MotionProgram(segments)


def encode_run_and_tumble(spec: RunTumbleSpec) -> MotionProgram:
    """Random directions with durations ~ U[t_min, t_max], seeded by ``spec.seed``.

    The last segment is truncated so the total duration equals
    ``spec.total_time`` exactly; the truncation bias is negligible whenever
    the total is much longer than ``t_max``.
    """
    if spec.total_time < spec.t_min:
        raise ValueError(
            f"total_time {spec.total_time} shorter than the minimum run {spec.t_min}"
        )
    rng = np.random.default_rng(spec.seed)
    segments = []
    acc = 0.0
    while acc < spec.total_time - 1e-12:
        duration = float(rng.uniform(spec.t_min, spec.t_max))
        direction = Direction.CCW if rng.integers(0, 2) else Direction.CW
        if acc + duration >= spec.total_time:
            duration = spec.total_time - acc
        segments.append(MotorCommand(direction, spec.v_eff, duration))
        acc += duration
    return MotionProgram(tuple(segments), seed=spec.seed)


def predict_mean_speed(radius: float, omega: float, duration: float,
                       alpha_chord: float) -> float:
    """Closed-form mean translational speed of the alternating gait.

    ``(2 * radius / duration) * sin(omega * duration / 2) * sin(alpha_chord / 2)``
    for arcs of the given radius and rotation rate, chords meeting at
    ``alpha_chord``. An upper limit on the realized speed: motor lag at
    every reversal only shortens the arcs. Valid for
    ``omega * duration <= 2 * pi`` (beyond a full turn the chord reverses).
    """
    if not (math.isfinite(radius) and radius > 0):
        raise ValueError(f"radius must be positive, got {radius!r}")
    if not (math.isfinite(omega) and omega > 0):
        raise ValueError(f"omega must be positive, got {omega!r}")
    if not (math.isfinite(duration) and duration > 0):
        raise ValueError(f"duration must be positive, got {duration!r}")
    if not (0.0 <= alpha_chord <= math.pi):
        raise ValueError("alpha_chord must lie in [0, pi]")
    return (2.0 * radius / duration) * math.sin(omega * duration / 2.0) \
        * math.sin(alpha_chord / 2.0)


@dataclass(frozen=True)
class ZigzagStats:
    """Measurements extracted from a simulated alternating-rotation run."""

    mean_speed: float
    chord_angle: float
    chord_length: float
    n_pairs: int


def measure_zigzag(traj: Trajectory, period: float) -> ZigzagStats:
    """Chords and net speed of an alternating run with segment duration ``period``.

    Segment boundaries must land on samples. The mean speed is the net
    displacement over an integer number of CW/CCW pairs divided by the
    elapsed time, so the transverse zigzag oscillation cancels. The chord
    angle is inferred from consecutive chord directions.
    """
    m = period / traj.dt
    if abs(m - round(m)) > 1e-6:
        raise ValueError("segment duration must be a multiple of the sampling step")
    m = int(round(m))
    n_chords = (len(traj) - 1) // m
    if n_chords < 2:
        raise ValueError("need at least one CW/CCW pair to measure")
    idx = np.arange(n_chords + 1) * m
    pts = traj.positions[idx]
    chords = np.diff(pts, axis=0)
    lengths = np.hypot(chords[:, 0], chords[:, 1])
    dirs = np.arctan2(chords[:, 1], chords[:, 0])
    turns = [abs(wrap_angle(float(b - a))) for a, b in zip(dirs[:-1], dirs[1:])]
    n_pairs = n_chords // 2
    net = pts[2 * n_pairs] - pts[0]
    elapsed = 2 * n_pairs * m * traj.dt
    return ZigzagStats(
        mean_speed=float(np.hypot(*net)) / elapsed,
        chord_angle=math.pi - float(np.mean(turns)),
        chord_length=float(np.mean(lengths)),
        n_pairs=n_pairs,
    )


def realized_mean_speed(
    period: float,
    *,
    v_eff: float = DEFAULT_V_EFF,
    geometry: BotGeometry | None = None,
    mode_map: ModeMap | None = None,
    tau_m: float = DEFAULT_TAU_M,
    dt: float = DEFAULT_DT,
    n_pairs: int = 12,
) -> ZigzagStats:
    """Simulate a noiseless alternating run and measure its zigzag statistics.

    The sampling step is snapped to an integer divisor of ``period`` so
    segment boundaries land exactly on samples (the integrator itself is
    step-size independent).
    """
    if n_pairs < 1:
        raise ValueError("need at least one pair")
    steps_per_seg = max(1, round(period / dt))
    dt_run = period / steps_per_seg
    program = encode_ballistic(BallisticSpec(period, 2 * n_pairs, v_eff))
    traj = simulate(
        program,
        geometry=geometry,
        mode_map=mode_map,
        arena=ArenaConfig(1.0, 1.0, WallMode.NONE),
        noise=NoiseConfig(),
        tau_m=tau_m,
        dt=dt_run,
        initial=Pose(0.0, 0.0, 0.0),
    )
    return measure_zigzag(traj, period)


@dataclass(frozen=True)
class ScanResult:
    """Outcome of a segment-duration scan."""

    t_opt: float
    v_opt: float
    t_values: np.ndarray
    v_values: np.ndarray


def scan_optimal_T(
    t_min: float,
    t_max: float,
    steps: int,
    *,
    v_eff: float = DEFAULT_V_EFF,
    geometry: BotGeometry | None = None,
    mode_map: ModeMap | None = None,
    tau_m: float = DEFAULT_TAU_M,
    dt: float = DEFAULT_DT,
    pair_time: float = 36.0,
) -> ScanResult:
    """Scan the segment duration of the alternating gait for peak mean speed.

    Simulates a noiseless run per grid point (enough pairs to cover roughly
    ``pair_time`` seconds), measures the realized mean speed, and returns
    the argmax together with the whole curve.
    """
    if steps < 3:
        raise ValueError(f"need at least 3 grid points, got {steps}")
    if not (0.0 < t_min < t_max):
        raise ValueError(f"invalid duration range [{t_min}, {t_max}]")
    t_values = np.linspace(t_min, t_max, steps)
    v_values = np.empty(steps)
    for i, period in enumerate(t_values):
        n_pairs = max(4, math.ceil(pair_time / (2.0 * period)))
        stats = realized_mean_speed(
            float(period),
            v_eff=v_eff,
            geometry=geometry,
            mode_map=mode_map,
            tau_m=tau_m,
            dt=dt,
            n_pairs=n_pairs,
        )
        v_values[i] = stats.mean_speed
    best = int(np.argmax(v_values))
    return ScanResult(
        t_opt=float(t_values[best]),
        v_opt=float(v_values[best]),
        t_values=t_values,
        v_values=v_values,
    )
