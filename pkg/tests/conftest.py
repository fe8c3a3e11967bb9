import pytest

from brainbot import (
    ArenaConfig,
    BotGeometry,
    Direction,
    ModeMap,
    MotionProgram,
    MotorCommand,
    NoiseConfig,
    Pose,
    WallMode,
    simulate,
)


def no_walls() -> ArenaConfig:
    return ArenaConfig(1000.0, 1000.0, WallMode.NONE)


def single_segment(direction=Direction.CCW, duration=20.0, v_eff=2.25) -> MotionProgram:
    return MotionProgram((MotorCommand(direction, v_eff, duration),))


def spin_run(omega=5.0, duration=20.0, *, eta=1.0, tau_m=0.2, dt=0.02,
             noise=None, direction=Direction.CCW, initial=Pose(0.0, 0.0, 0.0)):
    """Noise-optional pure-mode run around a constant mode map."""
    return simulate(
        single_segment(direction, duration),
        mode_map=ModeMap.constant(eta, omega),
        arena=no_walls(),
        noise=noise or NoiseConfig(),
        tau_m=tau_m,
        dt=dt,
        initial=initial,
    )


@pytest.fixture
def geometry():
    return BotGeometry()
