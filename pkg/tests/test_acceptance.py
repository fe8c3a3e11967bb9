"""Acceptance gate: one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report. Tolerances are pinned here and nowhere else.
"""
import math

import numpy as np
import pytest

import brainbot as bb
from brainbot import analysis
from brainbot.cli import main
from conftest import no_walls, spin_run


def report(number, text):
    print(f"[acceptance] criterion {number}: PASS - {text}")


def run_tumble_ensemble(v_eff=1.875, n_runs=12, total=60.0, base_seed=100):
    trajs = []
    for i in range(n_runs):
        spec = bb.RunTumbleSpec(0.4, 1.0, total, v_eff=v_eff, seed=base_seed + i)
        prog = bb.encode_run_and_tumble(spec)
        trajs.append(
            bb.simulate(prog, arena=no_walls(), initial=bb.Pose(0.0, 0.0, 0.0),
                        tau_m=0.2)
        )
    return trajs


def test_c01_pure_spin_eta():
    traj = spin_run(
        omega=5.0, duration=20.0, tau_m=0.2,
        noise=bb.NoiseConfig(sigma_xy=0.03, sigma_phi=0.0, seed=5),
    )
    vel = analysis.differentiate(traj, window=9, degree=3)
    etas = analysis.eta_series(vel)
    median = float(np.median(etas.valid_values))
    assert median == pytest.approx(1.00, abs=0.05)
    assert analysis.classify(etas) is bb.MotionClass.PURE_SPIN
    report(1, f"median eta {median:.4f} in 1.00 +/- 0.05, classified PURE_SPIN")


def test_c02_icr_recovery():
    geometry = bb.BotGeometry()
    traj = spin_run(omega=5.0, duration=20.0, tau_m=0.2)
    vel = analysis.differentiate(traj, window=9, degree=3)
    centres = analysis.icr_series(traj, vel)
    ok = ~np.isnan(centres[:, 0])
    mean_centre = centres[ok].mean(axis=0)
    true_leg = bb.body_rotation_centre(1.0, geometry, side=1)  # run starts at origin
    err = float(np.hypot(*(mean_centre - true_leg)))
    assert err < 0.05
    x = traj.x[vel.offset:vel.offset + len(vel)][ok]
    y = traj.y[vel.offset:vel.offset + len(vel)][ok]
    radii = np.hypot(x - centres[ok, 0], y - centres[ok, 1])
    assert np.all(np.abs(radii - 1.45) < 0.01)
    report(2, f"mean ICR error {err:.2e} cm, |r - r_c| = 1.45 +/- 0.01")


def test_c03_mean_speed_oracle_equivalence():
    mode = bb.mode_from_controls(2.25, 15.0)
    radius = 1.45 / mode.eta_target
    alpha = bb.expected_chord_angle(mode)
    grid = np.linspace(0.4, 1.9, 10)
    worst = 0.0
    for period in grid:
        realized = bb.realized_mean_speed(float(period), tau_m=0.0, n_pairs=8)
        predicted = bb.predict_mean_speed(radius, abs(mode.omega_max), float(period), alpha)
        rel = abs(realized.mean_speed - predicted) / predicted
        worst = max(worst, rel)
        assert rel < 0.01
    for period in grid:
        realized = bb.realized_mean_speed(float(period), tau_m=0.2, n_pairs=8)
        predicted = bb.predict_mean_speed(radius, abs(mode.omega_max), float(period), alpha)
        assert realized.mean_speed <= predicted * 1.01
    report(3, f"lag-free worst relative error {worst:.2e}; lagged speed bounded above")


def test_c04_calibration_target(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text("")  # all defaults, including the shipped mode map
    out_csv = tmp_path / "scan.csv"
    code = main(["scan", str(config), "--tmin", "0.2", "--tmax", "4.0",
                 "--steps", "20", "-o", str(out_csv)])
    assert code == 0
    out = capsys.readouterr().out
    t_opt = float(out.split("T_opt=")[1].split()[0])
    v_opt = float(out.split("v_opt=")[1].split()[0])
    assert t_opt == pytest.approx(1.5, abs=0.3)
    assert v_opt == pytest.approx(3.5, abs=0.35)
    report(4, f"scan reports T_opt {t_opt:.2f} s, v_opt {v_opt:.2f} cm/s")


def test_c05_ballistic_rmsd_slope():
    prog = bb.encode_ballistic(bb.BallisticSpec(1.5, 40))  # 60 s
    traj = bb.simulate(prog, arena=no_walls(), initial=bb.Pose(0.0, 0.0, 0.0), tau_m=0.2)
    taus = analysis.log_tau_grid(3.0, 30.0, traj.dt)  # one decade
    fit = analysis.fit_regimes(analysis.rmsd(traj, taus))
    assert fit.slope_short == pytest.approx(1.00, abs=0.05)
    assert fit.slope_long == pytest.approx(1.00, abs=0.05)
    report(5, f"ballistic slopes ({fit.slope_short:.3f}, {fit.slope_long:.3f})")


def test_c06_run_and_tumble_rmsd():
    trajs = run_tumble_ensemble()
    taus = analysis.log_tau_grid(0.04, 6.0, trajs[0].dt)
    fit = analysis.fit_regimes(analysis.rmsd(trajs, taus))
    assert fit.slope_short == pytest.approx(1.0, abs=0.1)
    assert fit.slope_long == pytest.approx(0.5, abs=0.1)
    assert 0.4 <= fit.tau_star <= 1.5
    report(
        6,
        f"slopes ({fit.slope_short:.3f}, {fit.slope_long:.3f}), "
        f"tau* {fit.tau_star:.2f} s",
    )


def test_c07_savitzky_golay_exactness():
    kernel = analysis.savgol_kernel(5, 2, 0)
    assert np.allclose(kernel, np.array([-3, 12, 17, 12, -3]) / 35.0, atol=1e-12)
    x = np.arange(80, dtype=float) * 0.05
    for coeffs in ((1.0, 0.0, 0.0, 0.0), (2.0, -1.0, 0.5, -0.25)):
        y = sum(c * x**k for k, c in enumerate(coeffs))
        dy = sum(k * c * x ** (k - 1) for k, c in enumerate(coeffs) if k > 0)
        smoothed = analysis.smooth(y, 9, 3)
        assert np.max(np.abs(smoothed - y) / np.maximum(np.abs(y), 1.0)) < 1e-9
        deriv = bb.SavitzkyGolay(window=9, degree=3, deriv=1, delta=0.05).transform(y)
        scale = np.maximum(np.abs(dy), 1.0)
        assert np.max(np.abs(deriv - dy) / scale) < 1e-9
    report(7, "degree <= 3 polynomials reproduced and differentiated to 1e-9")


def test_c08_rmsd_identities():
    dt = 0.02
    n = 3000
    t = np.arange(n) * dt
    still = bb.Trajectory(t, np.full(n, 1.0), np.full(n, 2.0), np.zeros(n), dt)
    curve = analysis.rmsd(still, [0.1, 1.0, 5.0])
    assert np.allclose(curve.rmsd, 0.0)

    speed = 2.5
    line = bb.Trajectory(t, speed * 0.8 * t, speed * 0.6 * t, np.zeros(n), dt)
    curve = analysis.rmsd(line, [0.1, 0.5, 2.0, 10.0])
    assert np.max(np.abs(curve.rmsd - speed * curve.tau)) < 1e-9

    radius, omega = 2.0, 1.7
    circle = bb.Trajectory(
        t, radius * np.cos(omega * t), radius * np.sin(omega * t), np.zeros(n), dt
    )
    curve = analysis.rmsd(circle, [0.1, 0.5, 1.0, 3.0])
    expected = 2 * radius * np.abs(np.sin(omega * curve.tau / 2))
    assert np.max(np.abs(curve.rmsd - expected)) < 1e-6

    rng = np.random.default_rng(12)
    t100 = np.arange(100) * dt
    walk = bb.Trajectory(
        t100,
        np.cumsum(rng.standard_normal(100)) * 0.2,
        np.cumsum(rng.standard_normal(100)) * 0.2,
        np.zeros(100),
        dt,
    )
    for k in (1, 5, 33):
        total = 0.0
        for i in range(100 - k):
            total += (walk.x[i + k] - walk.x[i]) ** 2 + (walk.y[i + k] - walk.y[i]) ** 2
        oracle = math.sqrt(total / (100 - k))
        got = analysis.rmsd(walk, [k * dt]).rmsd[0]
        assert got == pytest.approx(oracle, abs=1e-10)
    report(8, "stationary/linear/circular identities and brute-force oracle hold")


def test_c09_regime_fit_oracle():
    tau = np.geomspace(0.05, 20.0, 45)
    tau = np.unique(np.append(tau, 0.9))
    level = 3.0
    value = np.where(tau <= 0.9, level * (tau / 0.9), level * (tau / 0.9) ** 0.5)
    curve = analysis.RmsdCurve(tau=tau, rmsd=value, n_pairs=np.full(tau.size, 100))
    fit = analysis.fit_regimes(curve)
    assert fit.slope_short == pytest.approx(1.0, abs=0.01)
    assert fit.slope_long == pytest.approx(0.5, abs=0.01)
    idx = int(np.argmin(np.abs(tau - 0.9)))
    lo = tau[idx - 1] if idx > 0 else tau[0]
    hi = tau[idx + 1] if idx + 1 < tau.size else tau[-1]
    assert lo <= fit.tau_star <= hi
    report(9, f"recovered slopes ({fit.slope_short:.3f}, {fit.slope_long:.3f}), "
              f"tau* {fit.tau_star:.3f}")


def test_c10_determinism_and_mirror_symmetry(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("noise.sigma_xy = 0.03\nseed = 42\n")
    prog_path = tmp_path / "prog.txt"
    assert main(["encode", "runtumble", "--total", "20", "--seed", "3",
                 "-o", str(prog_path)]) == 0
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", str(config), str(prog_path), "-o", str(out1)]) == 0
    assert main(["simulate", str(config), str(prog_path), "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()

    flip = {bb.Direction.CW: bb.Direction.CCW, bb.Direction.CCW: bb.Direction.CW}
    prog = bb.encode_run_and_tumble(bb.RunTumbleSpec(0.4, 1.0, 30.0, seed=21))
    mirrored = bb.MotionProgram(
        tuple(bb.MotorCommand(flip[s.direction], s.v_eff, s.duration)
              for s in prog.segments)
    )
    kwargs = dict(arena=no_walls(), tau_m=0.2, initial=bb.Pose(0.0, 0.0, 0.0))
    a = bb.simulate(prog, **kwargs)
    b = bb.simulate(mirrored, **kwargs)
    assert np.max(np.abs(a.x - b.x)) < 1e-9
    assert np.max(np.abs(a.y + b.y)) < 1e-9
    report(10, "byte-identical reruns; direction flip mirrors the trajectory")
