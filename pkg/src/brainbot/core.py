"""Shared domain types: planar poses, sampled trajectories, bot geometry and
motor-command programs.

Units are fixed package-wide: centimetres, seconds, radians. Degrees appear
only at configuration and CLI boundaries. Orientation angles are stored
unwrapped (no 2*pi jumps between consecutive samples); :func:`wrap_angle` is
a presentation helper only.

All types are immutable after construction and all functions are pure, so
everything here is safe to share between concurrent callers.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Maximum deviation from the nominal sampling interval, in seconds.
DT_TOLERANCE = 1e-6

# Motor drive limits (effective PWM voltage).
V_EFF_MAX = 3.0

# Validated leg-tilt range in degrees.
ALPHA_LEG_MIN = 5.0
ALPHA_LEG_MAX = 25.0


class TrajectoryError(ValueError):
    """Raw samples cannot form a valid trajectory.

    ``index`` is the offending sample index when a single sample is to
    blame, else ``None``.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


def wrap_angle(phi: float) -> float:
    """Map an angle to the interval (-pi, pi].

    The result is congruent to ``phi`` modulo 2*pi. Presentation helper;
    internal storage keeps angles unwrapped.
    """
    if not math.isfinite(phi):
        raise ValueError(f"angle must be finite, got {phi!r}")
    return math.pi - (math.pi - phi) % TWO_PI


@dataclass(frozen=True)
class Pose:
    """Planar pose of the ellipse centre: position in cm, orientation in rad.

    ``phi`` is the (unwrapped) angle between the x-axis and the body major
    axis.
    """

    x: float
    y: float
    phi: float

    def __post_init__(self):
        for name in ("x", "y", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"Pose.{name} must be finite")

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class TrajectorySample:
    """One timestamped pose."""

    t: float
    pose: Pose

    def __post_init__(self):
        if not math.isfinite(self.t) or self.t < 0:
            raise ValueError(f"sample time must be finite and >= 0, got {self.t!r}")


class Trajectory:
    """Uniformly sampled pose time series.

    Attributes
    ----------
    t, x, y, phi : ndarray
        Read-only 1-D float arrays of equal length (>= 2). ``phi`` is
        unwrapped: consecutive values differ by less than pi.
    dt : float
        Nominal sampling interval in seconds; actual spacing deviates by at
        most ``DT_TOLERANCE``.
    """

    __slots__ = ("t", "x", "y", "phi", "dt")

    def __init__(self, t, x, y, phi, dt: float):
        t, x, y, phi = (np.asarray(a, dtype=float).copy() for a in (t, x, y, phi))
        if not (t.ndim == 1 and t.shape == x.shape == y.shape == phi.shape):
            raise TrajectoryError("t, x, y, phi must be 1-D arrays of equal length")
        n = t.size
        if n < 2:
            raise TrajectoryError(f"need at least 2 samples, got {n}")
        if not (math.isfinite(dt) and dt > 0):
            raise TrajectoryError(f"dt must be finite and positive, got {dt!r}")
        for name, arr in (("t", t), ("x", x), ("y", y), ("phi", phi)):
            bad = np.flatnonzero(~np.isfinite(arr))
            if bad.size:
                raise TrajectoryError(
                    f"non-finite {name} at index {bad[0]}", index=int(bad[0])
                )
        if t[0] < 0:
            raise TrajectoryError("timestamps must be >= 0", index=0)
        steps = np.diff(t)
        bad = np.flatnonzero(steps <= 0)
        if bad.size:
            i = int(bad[0]) + 1
            raise TrajectoryError(f"non-monotonic timestamp at index {i}", index=i)
        bad = np.flatnonzero(np.abs(steps - dt) > DT_TOLERANCE)
        if bad.size:
            i = int(bad[0]) + 1
            raise TrajectoryError(
                f"sample spacing at index {i} deviates from dt={dt!r} "
                f"by more than {DT_TOLERANCE} s",
                index=i,
            )
        bad = np.flatnonzero(np.abs(np.diff(phi)) >= math.pi)
        if bad.size:
            i = int(bad[0]) + 1
            raise TrajectoryError(
                f"orientation jump of >= pi at index {i}; phi must be unwrapped",
                index=i,
            )
        for arr in (t, x, y, phi):
            arr.flags.writeable = False
        self.t, self.x, self.y, self.phi = t, x, y, phi
        self.dt = float(dt)

    def __len__(self) -> int:
        return self.t.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.dt == other.dt
            and self.t.shape == other.t.shape
            and bool(
                np.all(self.t == other.t)
                and np.all(self.x == other.x)
                and np.all(self.y == other.y)
                and np.all(self.phi == other.phi)
            )
        )

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def positions(self) -> np.ndarray:
        """(n, 2) array of centre positions."""
        return np.column_stack([self.x, self.y])

    @property
    def samples(self) -> list[TrajectorySample]:
        return [
            TrajectorySample(float(ti), Pose(float(xi), float(yi), float(pi)))
            for ti, xi, yi, pi in zip(self.t, self.x, self.y, self.phi)
        ]


def _unwrap(phi: np.ndarray) -> np.ndarray:
    """Remove 2*pi jumps. Returns the input unchanged when already continuous."""
    d = np.diff(phi)
    if not np.any(np.abs(d) >= math.pi):
        return phi
    corrections = np.where(np.abs(d) >= math.pi, -TWO_PI * np.round(d / TWO_PI), 0.0)
    out = phi.copy()
    out[1:] += np.cumsum(corrections)
    return out


def validate_trajectory_arrays(t, x, y, phi) -> Trajectory:
    """Validate raw sample arrays and build a :class:`Trajectory`.

    Orientation is unwrapped and ``dt`` is inferred from the median spacing
    (robust to a single corrupt row). Raises :class:`TrajectoryError` naming
    the offending sample index on failure.
    """
    t, x, y, phi = (np.asarray(a, dtype=float) for a in (t, x, y, phi))
    if t.size < 2:
        raise TrajectoryError(f"need at least 2 samples, got {t.size}")
    for name, arr in (("t", t), ("x", x), ("y", y), ("phi", phi)):
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise TrajectoryError(
                f"non-finite {name} at index {bad[0]}", index=int(bad[0])
            )
    steps = np.diff(t)
    bad = np.flatnonzero(steps <= 0)
    if bad.size:
        i = int(bad[0]) + 1
        raise TrajectoryError(f"non-monotonic timestamp at index {i}", index=i)
    dt = float(np.median(steps))
    bad = np.flatnonzero(np.abs(steps - dt) > DT_TOLERANCE)
    if bad.size:
        i = int(bad[0]) + 1
        raise TrajectoryError(
            f"sample spacing at index {i} deviates from median dt={dt!r} "
            f"by more than {DT_TOLERANCE} s",
            index=i,
        )
    return Trajectory(t, x, y, _unwrap(phi), dt)


def validate_trajectory(samples) -> Trajectory:
    """Validate a sequence of raw samples and build a :class:`Trajectory`.

    Accepts :class:`TrajectorySample` instances or ``(t, (x, y, phi))``
    tuples. See :func:`validate_trajectory_arrays` for the checks performed.
    """
    ts, xs, ys, phis = [], [], [], []
    for item in samples:
        if isinstance(item, TrajectorySample):
            ts.append(item.t)
            xs.append(item.pose.x)
            ys.append(item.pose.y)
            phis.append(item.pose.phi)
        else:
            ti, pose = item
            xi, yi, pi = pose
            ts.append(ti)
            xs.append(xi)
            ys.append(yi)
            phis.append(pi)
    return validate_trajectory_arrays(ts, xs, ys, phis)


@dataclass(frozen=True)
class BotGeometry:
    """Body geometry of the elliptical bot.

    Defaults match the reference build: a 5.5 x 3 cm ellipse with five leg
    pairs and a rear leg 1.45 cm behind the geometric centre. ``alpha_leg``
    is the leg tilt in degrees (validated range 5-25).
    """

    semi_major: float = 2.75
    semi_minor: float = 1.5
    l_leg: float = 1.45
    alpha_leg: float = 15.0
    n_leg_pairs: int = 5

    def __post_init__(self):
        if not (self.semi_major > self.semi_minor > 0):
            raise ValueError("require semi_major > semi_minor > 0")
        if not (0 < self.l_leg < self.semi_major):
            raise ValueError("require 0 < l_leg < semi_major")
        if not (ALPHA_LEG_MIN <= self.alpha_leg <= ALPHA_LEG_MAX):
            raise ValueError(
                f"alpha_leg must lie in [{ALPHA_LEG_MIN}, {ALPHA_LEG_MAX}] degrees"
            )
        if self.n_leg_pairs < 1:
            raise ValueError("need at least one leg pair")
        if self.l_leg <= self.leg_half_spacing:
            raise ValueError("l_leg must exceed the leg-row half spacing")

    @property
    def leg_half_spacing(self) -> float:
        """Lateral offset of each leg row from the midline (cm).

        Leg rows sit at half the semi-minor axis; the exact lateral
        placement is a build convention, not a measured quantity.
        """
        return self.semi_minor / 2.0

    def rear_leg_offset(self, side: int) -> np.ndarray:
        """Body-frame position of a rear leg, ``side`` +1 left / -1 right.

        The rear pair sits at distance ``l_leg`` from the centre, behind it
        (negative body x), one leg per row.
        """
        if side not in (-1, 1):
            raise ValueError("side must be +1 (left) or -1 (right)")
        w = self.leg_half_spacing
        return np.array([-math.sqrt(self.l_leg**2 - w**2), side * w])


class Direction(enum.Enum):
    """Motor spin command. CCW is positive body rotation."""

    CW = "CW"
    CCW = "CCW"
    OFF = "OFF"

    @property
    def sign(self) -> int:
        if self is Direction.CCW:
            return 1
        if self is Direction.CW:
            return -1
        return 0


@dataclass(frozen=True)
class MotorCommand:
    """One motor segment: spin direction, drive voltage, duration."""

    direction: Direction
    v_eff: float
    duration: float

    def __post_init__(self):
        if not isinstance(self.direction, Direction):
            raise ValueError(f"bad direction {self.direction!r}")
        if not (math.isfinite(self.v_eff) and 0.0 <= self.v_eff <= V_EFF_MAX):
            raise ValueError(
                f"v_eff must lie in [0, {V_EFF_MAX}] V, got {self.v_eff!r}"
            )
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"duration must be finite and > 0, got {self.duration!r}")


@dataclass(frozen=True)
class MotionProgram:
    """Ordered motor-command segments, plus the seed that generated them."""

    segments: tuple[MotorCommand, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("a motion program needs at least one segment")
        for seg in self.segments:
            if not isinstance(seg, MotorCommand):
                raise ValueError(f"bad segment {seg!r}")

    @property
    def total_duration(self) -> float:
        return math.fsum(seg.duration for seg in self.segments)

    def __len__(self) -> int:
        return len(self.segments)
