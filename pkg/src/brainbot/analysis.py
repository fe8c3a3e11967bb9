"""Trajectory measurement pipeline.

Smoothing and numerical differentiation use Savitzky-Golay convolution
kernels (local least-squares polynomial fits). From the derivatives the
pipeline estimates the instantaneous centre of rotation, the spin ratio
eta = |omega| * l_leg / |v|, a motion classification, root-mean-square
displacement curves, and a continuous two-segment power-law fit that
separates ballistic from diffusive behavior.

All operations are pure functions of their inputs. The RMSD ensemble
accumulation uses compensated summation so results are independent of
trajectory order. :class:`SavitzkyGolay` and :class:`SegmentedPowerLawFit`
expose the two reusable algorithms through the scikit-learn estimator API.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin

from .core import Pose, Trajectory

DEFAULT_WINDOW = 9
DEFAULT_DEGREE = 3
DEFAULT_EPS_V = 0.05
DEFAULT_EPS_OMEGA = 0.05
DEFAULT_ETA_BANDS = (0.15, 0.85, 1.15)
DEFAULT_MIN_PAIRS = 10
DEFAULT_PER_DECADE = 20


# ---------------------------------------------------------------------------
# Savitzky-Golay smoothing and differentiation


def _check_window(window: int, degree: int, deriv_order: int):
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    if not (0 <= degree < window):
        raise ValueError(f"degree must satisfy 0 <= degree < window, got {degree}")
    if deriv_order not in (0, 1):
        raise ValueError(f"deriv_order must be 0 or 1, got {deriv_order}")
    if deriv_order > degree:
        raise ValueError("deriv_order must not exceed degree")


def savgol_kernel(window: int, degree: int, deriv_order: int = 0) -> np.ndarray:
    """Convolution weights of the Savitzky-Golay filter on a centred stencil.

    The weights realize the least-squares polynomial fit of the given degree
    over ``window`` points: applied as a dot product with the samples they
    return the fitted value (``deriv_order=0``, weights sum to 1) or the
    fitted slope per unit spacing (``deriv_order=1``, weights sum to 0 with
    unit first moment).
    """
    _check_window(window, degree, deriv_order)
    half = window // 2
    offsets = np.arange(-half, half + 1, dtype=float)
    design = np.vander(offsets, degree + 1, increasing=True)
    return np.linalg.pinv(design)[deriv_order]


def _apply_kernel(values: np.ndarray, window: int, degree: int,
                  deriv_order: int, delta: float) -> np.ndarray:
    """Full-length filter: kernel on the interior, boundary polynomial at edges."""
    y = np.asarray(values, dtype=float)
    n = y.size
    if n < window:
        raise ValueError(f"series of length {n} shorter than window {window}")
    half = window // 2
    kernel = savgol_kernel(window, degree, deriv_order)
    out = np.empty(n)
    out[half:n - half] = np.correlate(y, kernel, mode="valid")
    # no reflection padding: fit one polynomial per boundary window
    edge = np.arange(window, dtype=float)
    for sl, pos in (
        (slice(0, window), np.arange(half, dtype=float)),
        (slice(n - window, n), np.arange(window - half, window, dtype=float)),
    ):
        coeffs = np.polynomial.polynomial.polyfit(edge, y[sl], degree)
        if deriv_order:
            coeffs = np.polynomial.polynomial.polyder(coeffs)
        vals = np.polynomial.polynomial.polyval(pos, coeffs)
        if sl.start == 0:
            out[:half] = vals
        else:
            out[n - half:] = vals
    if deriv_order:
        out /= delta
    return out


def smooth(values, window: int = DEFAULT_WINDOW, degree: int = DEFAULT_DEGREE) -> np.ndarray:
    """Savitzky-Golay smoothing of a uniformly sampled series.

    Interior points are convolved with the smoothing kernel; the first and
    last half-windows are evaluated from a polynomial fitted to the boundary
    window (no reflection padding). Polynomials up to ``degree`` pass
    through unchanged.
    """
    _check_window(window, degree, 0)
    return _apply_kernel(values, window, degree, 0, 1.0)


class SavitzkyGolay(TransformerMixin, BaseEstimator):
    """Savitzky-Golay filter as a stateless scikit-learn transformer.

    Parameters
    ----------
    window : odd int
        Stencil length.
    degree : int
        Polynomial degree of the local fit, < window.
    deriv : 0 or 1
        Return the smoothed values or the smoothed first derivative.
    delta : float
        Sample spacing used to scale derivatives.

    ``transform`` filters each column of a 1-D or 2-D array independently
    and preserves the input length.
    """

    def __init__(self, window: int = DEFAULT_WINDOW, degree: int = DEFAULT_DEGREE,
                 deriv: int = 0, delta: float = 1.0):
        self.window = window
        self.degree = degree
        self.deriv = deriv
        self.delta = delta

    def _check(self):
        _check_window(self.window, self.degree, self.deriv)
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"delta must be positive, got {self.delta!r}")

    def fit(self, X, y=None):
        self._check()
        return self

    def transform(self, X):
        self._check()
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return _apply_kernel(X, self.window, self.degree, self.deriv, self.delta)
        if X.ndim != 2:
            raise ValueError("expected a 1-D or 2-D array")
        cols = [
            _apply_kernel(X[:, j], self.window, self.degree, self.deriv, self.delta)
            for j in range(X.shape[1])
        ]
        return np.column_stack(cols)


# ---------------------------------------------------------------------------
# Velocities, rotation centres, spin ratio


@dataclass(frozen=True)
class VelocitySeries:
    """Smoothed derivatives aligned with trajectory samples.

    The first and last half-windows are trimmed; ``offset`` is the index of
    the first covered sample in the source trajectory.
    """

    t: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    omega: np.ndarray
    offset: int

    @property
    def speed(self) -> np.ndarray:
        return np.hypot(self.vx, self.vy)

    def __len__(self) -> int:
        return self.t.size


def differentiate(traj: Trajectory, window: int = DEFAULT_WINDOW,
                  degree: int = DEFAULT_DEGREE) -> VelocitySeries:
    """Smoothed velocities and rotation rate from a trajectory.

    Applies the derivative kernel scaled by ``1/dt`` to x, y and phi
    independently, trimming the half-window edges.
    """
    _check_window(window, degree, 1)
    n = len(traj)
    if n < window:
        raise ValueError(f"trajectory of {n} samples shorter than window {window}")
    half = window // 2
    kernel = savgol_kernel(window, degree, 1)
    vx = np.correlate(traj.x, kernel, mode="valid") / traj.dt
    vy = np.correlate(traj.y, kernel, mode="valid") / traj.dt
    omega = np.correlate(traj.phi, kernel, mode="valid") / traj.dt
    return VelocitySeries(
        t=traj.t[half:n - half].copy(), vx=vx, vy=vy, omega=omega, offset=half
    )


def estimate_icr(pose: Pose, v, omega: float,
                 eps_omega: float = DEFAULT_EPS_OMEGA) -> np.ndarray:
    """World position of the instantaneous centre of rotation.

    Inverts the rigid-body velocity relation:
    ``r_c = (x - v_y / omega, y + v_x / omega)``. Rejects rotation rates
    below ``eps_omega`` (the centre recedes to infinity).
    """
    if abs(omega) < eps_omega:
        raise ValueError(
            f"|omega|={abs(omega):.3g} below {eps_omega}: rotation centre undefined"
        )
    vx, vy = float(v[0]), float(v[1])
    return np.array([pose.x - vy / omega, pose.y + vx / omega])


def icr_series(traj: Trajectory, vel: VelocitySeries,
               eps_omega: float = DEFAULT_EPS_OMEGA) -> np.ndarray:
    """Per-sample rotation centres, NaN where the rotation is too slow."""
    x = traj.x[vel.offset:vel.offset + len(vel)]
    y = traj.y[vel.offset:vel.offset + len(vel)]
    with np.errstate(divide="ignore", invalid="ignore"):
        cx = x - vel.vy / vel.omega
        cy = y + vel.vx / vel.omega
    slow = np.abs(vel.omega) < eps_omega
    cx[slow] = np.nan
    cy[slow] = np.nan
    return np.column_stack([cx, cy])


def compute_eta(v, omega: float, l_leg: float = 1.45,
                eps_v: float = DEFAULT_EPS_V) -> float | None:
    """Spin ratio ``|omega| * l_leg / |v|`` of one sample.

    Returns ``None`` when the speed falls below ``eps_v``: stationary dwell
    samples are expected in real data and are marked invalid rather than
    raising.
    """
    if not (math.isfinite(l_leg) and l_leg > 0):
        raise ValueError(f"l_leg must be positive, got {l_leg!r}")
    speed = math.hypot(float(v[0]), float(v[1]))
    if speed < eps_v:
        return None
    return abs(omega) * l_leg / speed


@dataclass(frozen=True)
class EtaSeries:
    """Per-sample spin ratio with a validity mask (False below the speed floor)."""

    t: np.ndarray
    eta: np.ndarray
    valid: np.ndarray

    def __len__(self) -> int:
        return self.t.size

    @property
    def valid_values(self) -> np.ndarray:
        return self.eta[self.valid]


def eta_series(vel: VelocitySeries, l_leg: float = 1.45,
               eps_v: float = DEFAULT_EPS_V) -> EtaSeries:
    """Spin-ratio series from smoothed velocities."""
    if not (math.isfinite(l_leg) and l_leg > 0):
        raise ValueError(f"l_leg must be positive, got {l_leg!r}")
    speed = vel.speed
    valid = speed >= eps_v
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = np.abs(vel.omega) * l_leg / speed
    eta[~valid] = np.nan
    return EtaSeries(t=vel.t, eta=eta, valid=valid)


class MotionClass(enum.Enum):
    PURE_SPIN = "PURE_SPIN"
    MIXED = "MIXED"
    TRANSLATION = "TRANSLATION"
    BACKWARD = "BACKWARD"


def classify(etas: EtaSeries,
             bands: tuple[float, float, float] = DEFAULT_ETA_BANDS) -> MotionClass:
    """Map the median valid spin ratio to a motion class.

    Bands (translation_max, spin_low, spin_high) default to
    (0.15, 0.85, 1.15): at or below the first value the motion counts as
    translation, inside [spin_low, spin_high] as pure spin, above spin_high
    as backward, otherwise mixed. The median is robust to the lag
    transients at rotation reversals.
    """
    lo, spin_lo, spin_hi = bands
    if not (0 < lo < spin_lo < spin_hi):
        raise ValueError(f"bands must be increasing and positive, got {bands}")
    values = etas.valid_values
    if values.size == 0:
        raise ValueError("no valid samples to classify")
    m = float(np.median(values))
    if m <= lo:
        return MotionClass.TRANSLATION
    if m < spin_lo:
        return MotionClass.MIXED
    if m <= spin_hi:
        return MotionClass.PURE_SPIN
    return MotionClass.BACKWARD


@dataclass(frozen=True)
class EtaHistogram:
    """Spin-ratio frequency distribution; invalid samples counted separately."""

    edges: np.ndarray
    counts: np.ndarray
    n_invalid: int


def eta_histogram(etas, bin_width: float) -> EtaHistogram:
    """Histogram of valid spin ratios over [0, max], fixed bin width.

    ``etas`` may be one :class:`EtaSeries` or a sequence of them (pooled).
    """
    if not (math.isfinite(bin_width) and bin_width > 0):
        raise ValueError(f"bin_width must be positive, got {bin_width!r}")
    series = [etas] if isinstance(etas, EtaSeries) else list(etas)
    values = np.concatenate([s.valid_values for s in series]) if series else np.array([])
    n_invalid = int(sum(np.count_nonzero(~s.valid) for s in series))
    if values.size == 0:
        raise ValueError("no valid samples to histogram")
    n_bins = int(math.floor(values.max() / bin_width)) + 1
    edges = np.arange(n_bins + 1) * bin_width
    counts, _ = np.histogram(values, bins=edges)
    return EtaHistogram(edges=edges, counts=counts, n_invalid=n_invalid)


# ---------------------------------------------------------------------------
# Root-mean-square displacement and the two-regime fit


@dataclass(frozen=True)
class RmsdCurve:
    """RMS displacement versus lag, with the pair count behind each value."""

    tau: np.ndarray
    rmsd: np.ndarray
    n_pairs: np.ndarray

    def __len__(self) -> int:
        return self.tau.size


def log_tau_grid(tau_min: float, tau_max: float, dt: float,
                 per_decade: int = DEFAULT_PER_DECADE) -> np.ndarray:
    """Log-spaced lags snapped to multiples of the sampling interval."""
    if not (0 < tau_min < tau_max):
        raise ValueError(f"invalid lag range [{tau_min}, {tau_max}]")
    if per_decade < 1:
        raise ValueError("per_decade must be >= 1")
    n = max(2, int(math.ceil(math.log10(tau_max / tau_min) * per_decade)) + 1)
    raw = np.geomspace(tau_min, tau_max, n)
    ks = np.unique(np.maximum(1, np.round(raw / dt).astype(int)))
    return ks * dt


def rmsd(trajectories, taus) -> RmsdCurve:
    """Root-mean-square displacement over an ensemble of trajectories.

    For each lag the squared displacements over all valid start times in
    all trajectories are averaged (time-and-ensemble average with
    overlapping origins), then rooted. Lags are snapped to sample
    multiples; every trajectory must share the same ``dt``.
    """
    trajs = [trajectories] if isinstance(trajectories, Trajectory) else list(trajectories)
    if not trajs:
        raise ValueError("need at least one trajectory")
    dt = trajs[0].dt
    for tr in trajs:
        if abs(tr.dt - dt) > 1e-9:
            raise ValueError("ensemble trajectories must share a common dt")
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if taus.size == 0:
        raise ValueError("need at least one lag")
    lags = np.unique(np.round(taus / dt).astype(int))
    if lags[0] < 1:
        raise ValueError(f"lag {taus.min()} below the sampling interval {dt}")
    out_tau = lags * dt
    out_rmsd = np.empty(lags.size)
    out_pairs = np.empty(lags.size, dtype=int)
    for i, k in enumerate(lags):
        sums = []
        pairs = 0
        for tr in trajs:
            if len(tr) <= k:
                continue
            dx = tr.x[k:] - tr.x[:-k]
            dy = tr.y[k:] - tr.y[:-k]
            sums.append(float(np.dot(dx, dx) + np.dot(dy, dy)))
            pairs += len(tr) - k
        if pairs == 0:
            raise ValueError(
                f"lag {k * dt:.6g} s exceeds every trajectory duration"
            )
        out_rmsd[i] = math.sqrt(math.fsum(sums) / pairs)
        out_pairs[i] = pairs
    return RmsdCurve(tau=out_tau, rmsd=out_rmsd, n_pairs=out_pairs)


@dataclass(frozen=True)
class RegimeFit:
    """Continuous two-segment power-law fit of an RMSD curve.

    Slopes are the log-log exponents below and above the crossover
    ``tau_star``; ``intercepts`` are the log10 offsets of the two segments;
    ``residual`` is the RMS misfit in log space. ``degenerate`` flags fits
    whose slopes differ by less than the configured tolerance (a single
    power law).
    """

    slope_short: float
    slope_long: float
    tau_star: float
    intercepts: tuple[float, float]
    residual: float
    degenerate: bool


class SegmentedPowerLawFit(RegressorMixin, BaseEstimator):
    """Two-regime power law ``y ~ tau^slope`` with a continuous breakpoint.

    Fits two straight lines meeting at a common breakpoint in
    (log10 tau, log10 y) space. The breakpoint is scanned over the interior
    grid points and the candidate with the smallest residual wins, which is
    globally optimal on the grid and immune to local minima.

    Attributes set by :meth:`fit`: ``slope_short_``, ``slope_long_``,
    ``tau_star_``, ``intercepts_``, ``residual_``, ``degenerate_``.
    """

    def __init__(self, degenerate_tol: float = 0.1):
        self.degenerate_tol = degenerate_tol

    def fit(self, tau, y):
        tau = np.ravel(np.asarray(tau, dtype=float))
        y = np.ravel(np.asarray(y, dtype=float))
        if tau.size != y.size:
            raise ValueError("tau and y must have equal length")
        if tau.size < 6:
            raise ValueError(f"need at least 6 points, got {tau.size}")
        if np.any(tau <= 0) or np.any(np.diff(tau) <= 0):
            raise ValueError("tau must be positive and strictly increasing")
        if np.any(y <= 0):
            raise ValueError("values must be positive to fit in log space")
        if tau[-1] / tau[0] < 10.0 * (1.0 - 1e-9):
            raise ValueError("lags must span at least one decade")
        u = np.log10(tau)
        z = np.log10(y)
        ones = np.ones_like(u)
        best = None
        for i in range(2, u.size - 2):
            hinge = np.maximum(u - u[i], 0.0)
            design = np.column_stack([ones, u, hinge])
            coef, _, _, _ = np.linalg.lstsq(design, z, rcond=None)
            rss = float(np.sum((design @ coef - z) ** 2))
            if best is None or rss < best[0]:
                best = (rss, i, coef)
        rss, i, coef = best
        a, b1, b2 = (float(c) for c in coef)
        self.slope_short_ = b1
        self.slope_long_ = b1 + b2
        self.tau_star_ = float(tau[i])
        self.intercepts_ = (a, a - b2 * float(u[i]))
        self.residual_ = math.sqrt(rss / u.size)
        self.degenerate_ = abs(b2) < self.degenerate_tol
        self._u_star = float(u[i])
        return self

    def predict(self, tau):
        tau = np.ravel(np.asarray(tau, dtype=float))
        u = np.log10(tau)
        a, b1 = self.intercepts_[0], self.slope_short_
        b2 = self.slope_long_ - self.slope_short_
        z = a + b1 * u + b2 * np.maximum(u - self._u_star, 0.0)
        return 10.0 ** z


def fit_regimes(curve: RmsdCurve, min_pairs: int = DEFAULT_MIN_PAIRS,
                degenerate_tol: float = 0.1) -> RegimeFit:
    """Two-regime log-log fit of an RMSD curve.

    Lags backed by fewer than ``min_pairs`` displacement pairs are dropped
    first (they carry finite-arena saturation and poor statistics).
    """
    keep = curve.n_pairs >= min_pairs
    tau = curve.tau[keep]
    values = curve.rmsd[keep]
    est = SegmentedPowerLawFit(degenerate_tol=degenerate_tol)
    est.fit(tau, values)
    return RegimeFit(
        slope_short=est.slope_short_,
        slope_long=est.slope_long_,
        tau_star=est.tau_star_,
        intercepts=est.intercepts_,
        residual=est.residual_,
        degenerate=est.degenerate_,
    )
