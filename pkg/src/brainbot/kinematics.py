"""Forward simulation of spontaneous bot motion.

The body moves by rigid rotation about an instantaneous centre of rotation
(ICR). In a pure spin the ICR sits on the rear leg on the inner side of the
turn (right-rear for CW, left-rear for CCW), at distance ``l_leg`` from the
geometric centre. Mixed modes superpose that rotation with a body-forward
translation; the superposed velocity field is itself a rotation about a
body-fixed centre at distance ``l_leg / eta`` from the geometric centre, so
every noiseless segment is integrated as an exact rotation about a fixed
world point. Backward modes (eta > 1) place the centre at ``l_leg / eta``
inward of the rear leg.

The motor does not reach its target rotation rate instantly; a first-order
lag with time constant ``tau_m`` models the spin-up and braking delays.
Measurement noise is applied to the recorded poses only, never to the
integrated state, mirroring a camera-tracking pipeline.

Simulation state is confined to one run; independent runs are embarrassingly
parallel. Every function is pure given its inputs and each run owns its RNG.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import BotGeometry, Direction, MotionProgram, Pose, Trajectory, wrap_angle
from .core import ALPHA_LEG_MAX, ALPHA_LEG_MIN, TWO_PI, V_EFF_MAX

DEFAULT_TAU_M = 0.2
DEFAULT_DT = 0.02

_EPS_T = 1e-12


class OutOfRangeError(ValueError):
    """Control point falls outside the mode map's grid."""


class WallMode(enum.Enum):
    REFLECT = "REFLECT"
    NONE = "NONE"


@dataclass(frozen=True)
class ArenaConfig:
    """Rectangular arena [0, width] x [0, height] in cm."""

    width: float = 100.0
    height: float = 80.0
    wall_mode: WallMode = WallMode.REFLECT

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("arena width and height must be positive")

    def contains(self, x: float, y: float, strict: bool = False) -> bool:
        if strict:
            return 0.0 < x < self.width and 0.0 < y < self.height
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


@dataclass(frozen=True)
class NoiseConfig:
    """Additive Gaussian measurement noise applied to recorded poses."""

    sigma_xy: float = 0.0
    sigma_phi: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma_xy < 0 or self.sigma_phi < 0:
            raise ValueError("noise standard deviations must be >= 0")


@dataclass
class MotorState:
    """Current and commanded signed body rotation rate (rad/s).

    Between command boundaries ``omega`` approaches ``target_omega``
    monotonically; the first-order model cannot overshoot.
    """

    omega: float = 0.0
    target_omega: float = 0.0


@dataclass(frozen=True)
class ModeParams:
    """Spontaneous-motion parameters induced by one control point.

    ``eta_target`` is the spin ratio |omega| * l_leg / |v| the mode settles
    at; ``omega_max`` the signed steady rotation rate (> 0 CCW); and
    ``icr_offset`` the body-frame rotation centre for the CCW sense (the
    simulator mirrors it across the body axis for CW commands). For
    ``eta_target == 0`` the body heading never changes and ``omega_max``
    together with ``|icr_offset|`` only set the translation speed.
    """

    eta_target: float
    omega_max: float
    icr_offset: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.eta_target) and self.eta_target >= 0):
            raise ValueError("eta_target must be finite and >= 0")
        if not math.isfinite(self.omega_max):
            raise ValueError("omega_max must be finite")
        offset = np.asarray(self.icr_offset, dtype=float).copy()
        if offset.shape != (2,) or not np.all(np.isfinite(offset)):
            raise ValueError("icr_offset must be a finite 2-vector")
        offset.flags.writeable = False
        object.__setattr__(self, "icr_offset", offset)


def body_rotation_centre(
    eta_target: float, geometry: BotGeometry, side: int = 1
) -> np.ndarray:
    """Body-frame rotation centre for a spin mode with the given spin ratio.

    ``side`` is +1 for the left-rear leg (CCW turns) and -1 for the
    right-rear leg (CW turns). For ``eta_target == 1`` the centre is the
    rear leg itself; below 1 it slides laterally outward (rotation plus
    forward translation), above 1 it moves radially inward. In every case
    its distance from the geometric centre is ``l_leg / eta_target``.
    """
    if eta_target <= 0:
        raise ValueError("pure translation has no finite rotation centre")
    leg = geometry.rear_leg_offset(side)
    if eta_target >= 1.0:
        return leg / eta_target
    d = geometry.l_leg / eta_target
    return np.array([leg[0], math.copysign(math.sqrt(d * d - leg[0] ** 2), side)])


def expected_chord_angle(mode: ModeParams) -> float:
    """Angle between successive chords of an alternating CW/CCW program.

    Pure kinematic consequence of where the rotation centre sits in the
    body frame: the velocity of the centre leads the heading by a fixed
    angle beta, and each reversal turns the chord direction by 2*beta,
    independent of the segment duration. Returns pi (collinear chords)
    for pure translation.
    """
    if mode.eta_target == 0:
        return math.pi
    cx, cy = mode.icr_offset
    beta = math.atan2(-cx, abs(cy))
    return math.pi - 2.0 * beta


# Illustrative control map: grid of steady-mode parameters over effective
# voltage (V) and leg tilt (deg). Spin dominates at low drive, translation
# at high drive, and larger tilts favour mixed modes. The node at
# (2.25 V, 15 deg) is pinned by the zigzag speed calibration; all other
# values are qualitative placeholders, replaceable from a map file.
_DEFAULT_V_GRID = (1.5, 1.875, 2.25, 2.625, 3.0)
_DEFAULT_ALPHA_GRID = (5.0, 10.0, 15.0, 20.0, 25.0)
_DEFAULT_ETA = (
    (1.05, 0.80, 0.34, 0.15, 0.08),
    (1.04, 0.82, 0.37, 0.18, 0.10),
    (1.02, 0.85, 0.40, 0.22, 0.12),
    (1.00, 0.86, 0.45, 0.28, 0.16),
    (0.98, 0.88, 0.50, 0.32, 0.20),
)
_DEFAULT_OMEGA = (
    (1.593, 1.766, 1.360, 0.683, 0.397),
    (1.578, 1.810, 1.480, 0.819, 0.497),
    (1.548, 1.876, 1.600, 1.001, 0.596),
    (1.517, 1.898, 1.800, 1.274, 0.794),
    (1.487, 1.942, 2.000, 1.457, 0.993),
)


@dataclass(frozen=True)
class ModeMap:
    """Empirical (v_eff, alpha_leg) -> (eta, omega) lookup table.

    Values at arbitrary control points are bilinearly interpolated over the
    rectangular grid. ``eta[i][j]`` and ``omega[i][j]`` correspond to
    ``alpha_grid[i]`` and ``v_grid[j]``.
    """

    v_grid: np.ndarray
    alpha_grid: np.ndarray
    eta: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v_grid, dtype=float).copy()
        a = np.asarray(self.alpha_grid, dtype=float).copy()
        eta = np.asarray(self.eta, dtype=float).copy()
        omega = np.asarray(self.omega, dtype=float).copy()
        if v.ndim != 1 or a.ndim != 1 or v.size < 1 or a.size < 1:
            raise ValueError("grids must be non-empty 1-D arrays")
        if np.any(np.diff(v) <= 0) or np.any(np.diff(a) <= 0):
            raise ValueError("grids must be strictly increasing")
        if eta.shape != (a.size, v.size) or omega.shape != eta.shape:
            raise ValueError(
                f"tables must have shape ({a.size}, {v.size}), got {eta.shape}"
            )
        if not np.all(np.isfinite(eta)) or not np.all(np.isfinite(omega)):
            raise ValueError("table entries must be finite")
        if np.any(eta < 0):
            raise ValueError("eta entries must be >= 0")
        for arr in (v, a, eta, omega):
            arr.flags.writeable = False
        object.__setattr__(self, "v_grid", v)
        object.__setattr__(self, "alpha_grid", a)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "omega", omega)

    @classmethod
    def constant(cls, eta: float, omega: float) -> "ModeMap":
        """Single-node map pinning every control point to one mode."""
        return cls((0.0, V_EFF_MAX), (ALPHA_LEG_MIN, ALPHA_LEG_MAX),
                   ((eta, eta), (eta, eta)), ((omega, omega), (omega, omega)))

    def lookup(self, v_eff: float, alpha_leg: float) -> tuple[float, float]:
        """Bilinear (eta, omega) at a control point inside the grid hull."""
        v, a = self.v_grid, self.alpha_grid
        if not (v[0] <= v_eff <= v[-1]) or not (a[0] <= alpha_leg <= a[-1]):
            raise OutOfRangeError(
                f"control point ({v_eff} V, {alpha_leg} deg) outside map grid "
                f"[{v[0]}, {v[-1]}] V x [{a[0]}, {a[-1]}] deg"
            )
        j = min(np.searchsorted(v, v_eff, side="right") - 1, v.size - 2) if v.size > 1 else 0
        i = min(np.searchsorted(a, alpha_leg, side="right") - 1, a.size - 2) if a.size > 1 else 0
        fv = 0.0 if v.size == 1 else (v_eff - v[j]) / (v[j + 1] - v[j])
        fa = 0.0 if a.size == 1 else (alpha_leg - a[i]) / (a[i + 1] - a[i])
        j1 = min(j + 1, v.size - 1)
        i1 = min(i + 1, a.size - 1)

        def interp(tbl):
            return float(
                tbl[i, j] * (1 - fa) * (1 - fv)
                + tbl[i, j1] * (1 - fa) * fv
                + tbl[i1, j] * fa * (1 - fv)
                + tbl[i1, j1] * fa * fv
            )

        return interp(self.eta), interp(self.omega)


def default_mode_map() -> ModeMap:
    return ModeMap(_DEFAULT_V_GRID, _DEFAULT_ALPHA_GRID, _DEFAULT_ETA, _DEFAULT_OMEGA)


def mode_from_controls(
    v_eff: float,
    alpha_leg: float,
    table: ModeMap | None = None,
    geometry: BotGeometry | None = None,
) -> ModeParams:
    """Mode parameters induced by a (v_eff, alpha_leg) control point.

    ``eta`` and ``omega`` come from the table by bilinear interpolation; the
    body-frame rotation centre is then derived from ``eta`` and the bot
    geometry (CCW sense; the simulator mirrors it for CW). For an
    interpolated ``eta`` of exactly 0 the offset magnitude defaults to
    ``l_leg`` so that the translation speed stays ``|omega| * l_leg``.
    """
    if not (math.isfinite(v_eff) and 0.0 <= v_eff <= V_EFF_MAX):
        raise ValueError(f"v_eff must lie in [0, {V_EFF_MAX}] V, got {v_eff!r}")
    if not (math.isfinite(alpha_leg) and ALPHA_LEG_MIN <= alpha_leg <= ALPHA_LEG_MAX):
        raise ValueError(
            f"alpha_leg must lie in [{ALPHA_LEG_MIN}, {ALPHA_LEG_MAX}] deg, "
            f"got {alpha_leg!r}"
        )
    table = table if table is not None else default_mode_map()
    geometry = geometry if geometry is not None else BotGeometry()
    eta, omega = table.lookup(v_eff, alpha_leg)
    if eta > 0:
        offset = body_rotation_centre(eta, geometry, side=1)
    else:
        offset = geometry.rear_leg_offset(1)
    return ModeParams(eta_target=eta, omega_max=omega, icr_offset=offset)


def icr_velocity(pose: Pose, omega: float, r_c) -> np.ndarray:
    """Velocity of the body centre rotating at ``omega`` about world point ``r_c``.

    Planar restriction of v = omega x (r - r_c):
    ``(-omega * (y - y_c), omega * (x - x_c))``.
    """
    xc, yc = float(r_c[0]), float(r_c[1])
    if not all(map(math.isfinite, (omega, xc, yc))):
        raise ValueError("icr_velocity inputs must be finite")
    return np.array([-omega * (pose.y - yc), omega * (pose.x - xc)])


def motor_response(omega: float, target: float, dt: float, tau_m: float) -> float:
    """Rotation rate after ``dt`` of first-order approach toward ``target``.

    ``target + (omega - target) * exp(-dt / tau_m)``: monotone, never
    overshoots.
    """
    if not (math.isfinite(tau_m) and tau_m > 0):
        raise ValueError(f"tau_m must be positive, got {tau_m!r}")
    if not (math.isfinite(dt) and dt >= 0):
        raise ValueError(f"dt must be >= 0, got {dt!r}")
    return target + (omega - target) * math.exp(-dt / tau_m)


def _fold(value: float, size: float) -> tuple[float, int]:
    """Billiard fold of a coordinate into [0, size].

    Returns the folded coordinate and +1/-1 for an even/odd number of wall
    reflections (odd means the axis is mirrored).
    """
    m = value % (2.0 * size)
    if m <= size:
        return m, 1
    return 2.0 * size - m, -1


def reflect_at_wall(pose: Pose, heading: float, arena: ArenaConfig) -> tuple[Pose, float]:
    """Specular wall reflection of a pose and its motion heading.

    Positions beyond a wall are folded back inside; the heading obeys the
    specular law (vertical wall: theta -> pi - theta, horizontal wall:
    theta -> -theta). The body orientation is mirrored the same way, on the
    2*pi branch nearest the incoming value. Poses already inside come back
    unchanged.
    """
    if arena.wall_mode is not WallMode.REFLECT:
        raise ValueError("reflect_at_wall requires REFLECT wall mode")
    x, sx = _fold(pose.x, arena.width)
    y, sy = _fold(pose.y, arena.height)
    if sx == 1 and sy == 1:
        return pose, heading
    h = heading
    p = pose.phi
    if sx == -1:
        h = math.pi - h
        p = math.pi - p
    if sy == -1:
        h = -h
        p = -p
    p += TWO_PI * round((pose.phi - p) / TWO_PI)
    return Pose(x, y, p), wrap_angle(h)


def _omega_integrals(
    omega0: float, target: float, h: float, tau_m: float
) -> tuple[float, float, float]:
    """Integrals of the first-order motor response over a step of length h.

    Returns (signed angle, unsigned angle, final rate): the exact
    integral of omega(t), the integral of |omega(t)| (splitting at the
    zero crossing when the rate changes sign), and omega(h).
    """
    if tau_m == 0.0:
        return target * h, abs(target) * h, target
    e = math.exp(-h / tau_m)
    omega_h = target + (omega0 - target) * e
    area = target * h + (omega0 - target) * tau_m * (1.0 - e)
    if omega0 == 0.0 or omega_h == 0.0 or (omega0 > 0) == (omega_h > 0):
        return area, abs(area), omega_h
    # sign change inside the step: split at omega(t*) = 0
    t_star = tau_m * math.log((target - omega0) / target)
    e_star = math.exp(-t_star / tau_m)
    area1 = target * t_star + (omega0 - target) * tau_m * (1.0 - e_star)
    return area, abs(area1) + abs(area - area1), omega_h


class _SegmentState:
    """Exact integrator for one command segment.

    Anchors the pose at the segment start. Rotating modes advance by exact
    rotation about the fixed world image of the body-frame centre;
    translation modes advance along the (fixed) heading. Accumulators keep
    per-step work O(1) and dt-independent.
    """

    __slots__ = (
        "mode", "side", "target", "speed_scale",
        "x0", "y0", "phi0", "c_world", "theta_acc", "dist_acc",
    )

    def __init__(self, pose: Pose, direction: Direction, mode: ModeParams,
                 prev_side: int):
        self.mode = mode
        sign = direction.sign
        self.side = sign if sign != 0 else prev_side
        self.target = sign * abs(mode.omega_max)
        self.theta_acc = 0.0
        self.dist_acc = 0.0
        self.speed_scale = float(np.hypot(*mode.icr_offset))
        self.rebase(pose)

    def rebase(self, pose: Pose):
        """Re-anchor at a pose (segment start or wall reflection)."""
        self.x0, self.y0, self.phi0 = pose.x, pose.y, pose.phi
        self.theta_acc = 0.0
        self.dist_acc = 0.0
        if self.mode.eta_target > 0:
            cb = self.mode.icr_offset
            cbx, cby = cb[0], self.side * abs(cb[1])
            c, s = math.cos(pose.phi), math.sin(pose.phi)
            self.c_world = (
                pose.x + c * cbx - s * cby,
                pose.y + s * cbx + c * cby,
            )
        else:
            self.c_world = None

    def advance(self, motor: MotorState, h: float, tau_m: float):
        d_angle, d_abs, omega_h = _omega_integrals(
            motor.omega, self.target, h, tau_m
        )
        if self.c_world is not None:
            self.theta_acc += d_angle
        else:
            self.dist_acc += d_abs * self.speed_scale
        motor.omega = omega_h

    def pose(self) -> Pose:
        if self.c_world is not None:
            cwx, cwy = self.c_world
            ct, st = math.cos(self.theta_acc), math.sin(self.theta_acc)
            rx, ry = self.x0 - cwx, self.y0 - cwy
            return Pose(
                cwx + ct * rx - st * ry,
                cwy + st * rx + ct * ry,
                self.phi0 + self.theta_acc,
            )
        return Pose(
            self.x0 + self.dist_acc * math.cos(self.phi0),
            self.y0 + self.dist_acc * math.sin(self.phi0),
            self.phi0,
        )

    def velocity_heading(self, pose: Pose, omega: float) -> float:
        if self.c_world is not None and abs(omega) > 1e-9:
            v = icr_velocity(pose, omega, self.c_world)
            return math.atan2(v[1], v[0])
        return pose.phi


def simulate(
    program: MotionProgram,
    *,
    geometry: BotGeometry | None = None,
    mode_map: ModeMap | None = None,
    arena: ArenaConfig | None = None,
    noise: NoiseConfig | None = None,
    tau_m: float = DEFAULT_TAU_M,
    dt: float = DEFAULT_DT,
    initial: Pose | None = None,
) -> Trajectory:
    """Run a motor program and return the trajectory sampled every ``dt``.

    Each segment looks up its mode from ``mode_map`` at the commanded
    voltage and the geometry's leg tilt, then integrates an exact rotation
    about the mode's rotation centre (or a straight translation for
    eta 0) while the rotation rate relaxes toward the commanded value with
    time constant ``tau_m`` (`0` means instant response). Measurement noise
    is added to recorded samples only. With REFLECT walls the pose is
    specularly folded back whenever a recorded step leaves the arena.

    Deterministic: identical inputs and seeds give bit-identical output.
    """
    geometry = geometry if geometry is not None else BotGeometry()
    mode_map = mode_map if mode_map is not None else default_mode_map()
    arena = arena if arena is not None else ArenaConfig()
    noise = noise if noise is not None else NoiseConfig()
    if not (math.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not (math.isfinite(tau_m) and tau_m >= 0):
        raise ValueError(f"tau_m must be >= 0, got {tau_m!r}")
    if initial is None:
        initial = Pose(arena.width / 2.0, arena.height / 2.0, 0.0)
    if arena.wall_mode is WallMode.REFLECT and not arena.contains(
        initial.x, initial.y, strict=True
    ):
        raise ValueError(
            f"initial pose ({initial.x}, {initial.y}) outside the "
            f"{arena.width} x {arena.height} arena"
        )

    # OFF segments have no mode of their own: the motor brakes and the bot
    # coasts along the geometry of the preceding segment.
    modes = []
    prev_mode = ModeParams(1.0, 0.0, geometry.rear_leg_offset(1))
    for seg in program.segments:
        if seg.direction is Direction.OFF:
            modes.append(prev_mode)
        else:
            prev_mode = mode_from_controls(
                seg.v_eff, geometry.alpha_leg, mode_map, geometry
            )
            modes.append(prev_mode)
    ends = np.cumsum([seg.duration for seg in program.segments])
    total = float(ends[-1])
    n_steps = int(math.floor(total / dt + 1e-9))

    noisy = noise.sigma_xy > 0 or noise.sigma_phi > 0
    rng = np.random.default_rng(noise.seed) if noisy else None

    motor = MotorState(omega=0.0, target_omega=0.0)
    seg_i = 0
    state = _SegmentState(initial, program.segments[0].direction, modes[0], 1)
    motor.target_omega = state.target
    reflecting = arena.wall_mode is WallMode.REFLECT
    last = len(program.segments) - 1

    ts = np.arange(n_steps + 1) * dt
    xs = np.empty(n_steps + 1)
    ys = np.empty(n_steps + 1)
    phis = np.empty(n_steps + 1)

    def record(k: int, pose: Pose):
        if noisy:
            ex, ey, ep = rng.standard_normal(3)
            xs[k] = pose.x + noise.sigma_xy * ex
            ys[k] = pose.y + noise.sigma_xy * ey
            phis[k] = pose.phi + noise.sigma_phi * ep
        else:
            xs[k] = pose.x
            ys[k] = pose.y
            phis[k] = pose.phi

    record(0, initial)

    t_now = 0.0
    for k in range(1, n_steps + 1):
        t_target = k * dt
        while t_target - t_now > _EPS_T:
            seg_end = float(ends[seg_i])
            if seg_i == last:
                # final segment absorbs float slack in the grid alignment
                state.advance(motor, t_target - t_now, tau_m)
                t_now = t_target
            elif seg_end <= t_now + _EPS_T:
                seg_i += 1
                state = _SegmentState(
                    state.pose(), program.segments[seg_i].direction,
                    modes[seg_i], state.side,
                )
                motor.target_omega = state.target
            elif seg_end < t_target:
                state.advance(motor, seg_end - t_now, tau_m)
                t_now = seg_end
            else:
                state.advance(motor, t_target - t_now, tau_m)
                t_now = t_target
        pose = state.pose()
        if reflecting and not arena.contains(pose.x, pose.y):
            heading = state.velocity_heading(pose, motor.omega)
            pose, _ = reflect_at_wall(pose, heading, arena)
            state.rebase(pose)
        record(k, pose)

    return Trajectory(ts, xs, ys, phis, dt)
