import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from brainbot import (
    BallisticSpec,
    Direction,
    RunTumbleSpec,
    encode_ballistic,
    encode_run_and_tumble,
    expected_chord_angle,
    mode_from_controls,
    predict_mean_speed,
    realized_mean_speed,
    scan_optimal_T,
)


def two_chord_oracle(radius, omega, duration, alpha_chord):
    """Net displacement per time of two explicit chord vectors.

    Independent geometric construction: chords of length
    2 * radius * sin(omega * duration / 2) meeting at alpha_chord.
    """
    length = 2.0 * radius * math.sin(omega * duration / 2.0)
    turn = math.pi - alpha_chord
    first = np.array([length, 0.0])
    second = length * np.array([math.cos(turn), math.sin(turn)])
    return float(np.hypot(*(first + second))) / (2.0 * duration)


class TestEncodeBallistic:
    def test_featured_duration_alternation(self):
        prog = encode_ballistic(BallisticSpec(1.5, 4))
        assert [s.direction for s in prog.segments] == [
            Direction.CW, Direction.CCW, Direction.CW, Direction.CCW,
        ]
        assert all(s.duration == 1.5 for s in prog.segments)

    def test_single_segment(self):
        prog = encode_ballistic(BallisticSpec(1.0, 1))
        assert len(prog) == 1
        assert prog.segments[0].direction is Direction.CW

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            BallisticSpec(1.0, 0)

    def test_start_ccw_flag(self):
        prog = encode_ballistic(BallisticSpec(1.0, 2), start=Direction.CCW)
        assert prog.segments[0].direction is Direction.CCW
        assert prog.segments[1].direction is Direction.CW


class TestEncodeRunAndTumble:
    def test_durations_in_interval_and_exact_total(self):
        spec = RunTumbleSpec(0.4, 1.0, 60.0, seed=7)
        prog = encode_run_and_tumble(spec)
        durations = [s.duration for s in prog.segments]
        assert all(0.4 <= d <= 1.0 for d in durations[:-1])
        assert durations[-1] <= 1.0
        assert math.fsum(durations) == pytest.approx(60.0, abs=1e-9)

    def test_degenerate_uniform(self):
        prog = encode_run_and_tumble(RunTumbleSpec(0.5, 0.5, 2.0))
        assert len(prog) == 4
        assert all(s.duration == pytest.approx(0.5) for s in prog.segments)

    def test_deterministic_per_seed(self):
        spec = RunTumbleSpec(0.4, 1.0, 30.0, seed=123)
        a = encode_run_and_tumble(spec)
        b = encode_run_and_tumble(spec)
        assert a.segments == b.segments
        c = encode_run_and_tumble(RunTumbleSpec(0.4, 1.0, 30.0, seed=124))
        assert c.segments != a.segments

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            RunTumbleSpec(1.0, 0.4, 10.0)
        with pytest.raises(ValueError):
            encode_run_and_tumble(RunTumbleSpec(0.4, 1.0, 0.2))

    def test_duration_distribution_uniform(self):
        # ~1e4 segments, truncated tail excluded
        prog = encode_run_and_tumble(RunTumbleSpec(0.4, 1.0, 7000.0, seed=5))
        durations = np.array([s.duration for s in prog.segments[:-1]])
        assert durations.size > 9500
        result = stats.kstest(durations, "uniform", args=(0.4, 0.6))
        assert result.pvalue > 0.01

    def test_direction_counts_balanced(self):
        prog = encode_run_and_tumble(RunTumbleSpec(0.4, 1.0, 7000.0, seed=5))
        n = len(prog)
        n_ccw = sum(1 for s in prog.segments if s.direction is Direction.CCW)
        sigma = 0.5 * math.sqrt(n)
        assert abs(n_ccw - n / 2) < 3 * sigma


class TestPredictMeanSpeed:
    def test_collinear_boundary_gives_zero(self):
        assert predict_mean_speed(3.0, 1.0, 1.0, 0.0) == pytest.approx(0.0)

    def test_against_two_chord_oracle(self):
        # frozen from the oracle: 6 * sin(0.5) = 2.8765842...
        oracle = two_chord_oracle(3.0, 1.0, 1.0, math.pi)
        assert oracle == pytest.approx(2.876553231, abs=1e-8)
        assert predict_mean_speed(3.0, 1.0, 1.0, math.pi) == pytest.approx(oracle)

    @given(
        st.floats(0.5, 5.0), st.floats(0.2, 2.0),
        st.floats(0.2, 2.0), st.floats(0.05, math.pi),
    )
    def test_oracle_equivalence_everywhere(self, radius, omega, duration, alpha):
        if omega * duration >= 2 * math.pi:
            return
        got = predict_mean_speed(radius, omega, duration, alpha)
        assert got == pytest.approx(two_chord_oracle(radius, omega, duration, alpha))

    def test_full_circles_no_progress(self):
        omega = 2.0
        assert predict_mean_speed(3.0, omega, 2 * math.pi / omega, math.pi) == \
            pytest.approx(0.0, abs=1e-12)

    def test_monotone_in_alpha_and_linear_in_radius(self):
        alphas = np.linspace(0.0, math.pi, 30)
        speeds = [predict_mean_speed(3.0, 1.0, 1.0, a) for a in alphas]
        assert all(a < b for a, b in zip(speeds, speeds[1:]))
        v1 = predict_mean_speed(1.0, 1.0, 1.0, 2.0)
        for radius in (2.0, 3.5, 7.0):
            assert predict_mean_speed(radius, 1.0, 1.0, 2.0) == pytest.approx(radius * v1)

    def test_small_angle_limit(self):
        # chord -> arc: speed -> radius * omega * sin(alpha/2)
        radius, omega, alpha = 2.0, 1.0, 2.0
        limit = radius * omega * math.sin(alpha / 2)
        got = predict_mean_speed(radius, omega, 1e-4, alpha)
        assert got == pytest.approx(limit, rel=1e-6)

    def test_invalid_arguments(self):
        for bad in ((0.0, 1, 1), (3, 0.0, 1), (3, 1, 0.0)):
            with pytest.raises(ValueError):
                predict_mean_speed(bad[0], bad[1], bad[2], 1.0)


class TestRealizedSpeed:
    def test_matches_prediction_without_lag(self):
        mode = mode_from_controls(2.25, 15.0)
        radius = 1.45 / mode.eta_target
        alpha = expected_chord_angle(mode)
        for period in np.linspace(0.4, 1.9, 10):
            stats_ = realized_mean_speed(float(period), tau_m=0.0, n_pairs=6)
            predicted = predict_mean_speed(radius, abs(mode.omega_max), float(period), alpha)
            assert stats_.mean_speed == pytest.approx(predicted, rel=1e-6)
            assert stats_.chord_angle == pytest.approx(alpha, abs=1e-9)

    def test_upper_limit_with_lag(self):
        mode = mode_from_controls(2.25, 15.0)
        radius = 1.45 / mode.eta_target
        alpha = expected_chord_angle(mode)
        for tau_m in (0.0, 0.1, 0.2, 0.4):
            for period in np.linspace(0.4, 1.9, 6):
                realized = realized_mean_speed(float(period), tau_m=tau_m, n_pairs=8)
                predicted = predict_mean_speed(
                    radius, abs(mode.omega_max), float(period), alpha
                )
                assert realized.mean_speed <= predicted * 1.01


class TestScan:
    def test_matches_prediction_on_grid_without_lag(self):
        res = scan_optimal_T(0.4, 1.9, 6, tau_m=0.0)
        mode = mode_from_controls(2.25, 15.0)
        radius = 1.45 / mode.eta_target
        alpha = expected_chord_angle(mode)
        for period, speed in zip(res.t_values, res.v_values):
            predicted = predict_mean_speed(radius, abs(mode.omega_max), float(period), alpha)
            assert speed == pytest.approx(predicted, rel=0.01)

    def test_interior_maximum_with_lag(self):
        res = scan_optimal_T(0.2, 4.0, 20, tau_m=0.2)
        assert res.t_values[0] < res.t_opt < res.t_values[-1]

    def test_monotone_envelope_without_lag(self):
        # at fixed omega and chord angle the sin(x)/x envelope decays
        res = scan_optimal_T(0.4, 1.9, 8, tau_m=0.0)
        assert all(a > b for a, b in zip(res.v_values, res.v_values[1:]))

    def test_calibrated_optimum(self):
        res = scan_optimal_T(1.0, 2.0, 21, tau_m=0.2)
        assert res.t_opt == pytest.approx(1.5, abs=0.15)
        assert res.v_opt == pytest.approx(3.5, rel=0.1)

    def test_step_validation(self):
        with pytest.raises(ValueError):
            scan_optimal_T(0.2, 4.0, 2)
        with pytest.raises(ValueError):
            scan_optimal_T(2.0, 1.0, 5)
