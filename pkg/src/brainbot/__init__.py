"""Simulation and trajectory analysis for vibration-driven elliptical robots.

Layers:

- :mod:`brainbot.core` - shared domain types (poses, trajectories, geometry,
  motor programs)
- :mod:`brainbot.kinematics` - forward simulation of the spontaneous motion
  modes
- :mod:`brainbot.programs` - encoders for ballistic and run-and-tumble motor
  programs plus their speed statistics
- :mod:`brainbot.analysis` - measurement pipeline: smoothing, derivatives,
  rotation-centre and spin-ratio estimation, displacement statistics and
  regime fits
- :mod:`brainbot.io` / :mod:`brainbot.cli` - file formats and the ``brainbot``
  command line tool
"""

from .core import (
    BotGeometry,
    Direction,
    MotionProgram,
    MotorCommand,
    Pose,
    Trajectory,
    TrajectoryError,
    TrajectorySample,
    validate_trajectory,
    validate_trajectory_arrays,
    wrap_angle,
)
from .kinematics import (
    ArenaConfig,
    ModeMap,
    ModeParams,
    MotorState,
    NoiseConfig,
    OutOfRangeError,
    WallMode,
    body_rotation_centre,
    default_mode_map,
    expected_chord_angle,
    icr_velocity,
    mode_from_controls,
    motor_response,
    reflect_at_wall,
    simulate,
)
from .programs import (
    BallisticSpec,
    RunTumbleSpec,
    ScanResult,
    ZigzagStats,
    encode_ballistic,
    encode_run_and_tumble,
    measure_zigzag,
    predict_mean_speed,
    realized_mean_speed,
    scan_optimal_T,
)
from .analysis import (
    EtaHistogram,
    EtaSeries,
    MotionClass,
    RegimeFit,
    RmsdCurve,
    SavitzkyGolay,
    SegmentedPowerLawFit,
    VelocitySeries,
    classify,
    compute_eta,
    differentiate,
    estimate_icr,
    eta_histogram,
    eta_series,
    fit_regimes,
    icr_series,
    log_tau_grid,
    rmsd,
    savgol_kernel,
    smooth,
)

__version__ = "0.1.0"
