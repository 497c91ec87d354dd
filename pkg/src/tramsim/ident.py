"""Grey-box identification from telemetry logs.

Resistance coefficients come from coast-down phases (idle notch, the
tram decelerating under resistance alone): a linear regression on the
filtered speed derivative seeds a Gauss-Newton pass that matches the
simulated speed decay to the measured one.  Traction gains come from
quasi-steady acceleration plateaus of full-notch runs, matched by
bisection against the simulated plateau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import (
    GRAVITY,
    AdhesionParams,
    DRY,
    NotchSchedule,
    ResistanceCoeffs,
    TramParams,
    initial_state,
    peak_adhesion,
    propulsion_resistance,
    simulate,
)
from .errors import IdentifiabilityError, ParameterError, PlateauError
from .estimator import lowpass_accel

# Fits only trust this speed window; the test track did not allow long
# decays from higher speeds, so the law is unsupported outside it.
FIT_SPEED_MIN = 0.5   # m/s
FIT_SPEED_MAX = 12.0  # m/s

COASTDOWN_ACCEL_LIMIT = 0.3   # m/s^2, |a| gate for idle-notch detection
COASTDOWN_MIN_DURATION = 5.0  # s
MIN_FIT_SAMPLES = 50


@dataclass(frozen=True)
class CoastdownSegment:
    """One idle-notch glide: speed samples plus the constant conditions."""

    t: np.ndarray      # s, strictly increasing
    v: np.ndarray      # m/s, strictly positive
    mass: float        # kg
    theta: float = 0.0  # rad, assumed constant over the segment

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)
        if len(t) != len(v) or len(t) < 3:
            raise ParameterError("segment needs >= 3 aligned (t, v) samples")
        if np.any(np.diff(t) <= 0.0):
            raise ParameterError("segment times must be strictly increasing")
        if np.any(v <= 0.0):
            raise ParameterError("segment speeds must be strictly positive")

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])


@dataclass(frozen=True)
class FitResult:
    """Identified resistance coefficients with fit quality figures."""

    A0: float              # N per kg
    B: float               # N*s/m
    C: float               # N*s^2/m^2 (zero unless the quadratic term was fitted)
    residual_rms: float    # m/s, RMS speed-trace mismatch after re-simulation
    covariance: np.ndarray  # parameter covariance from the regression
    n_samples: int

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def coeffs(self) -> ResistanceCoeffs:
        if self.C != 0.0:
            raise ParameterError(
                "fit includes a quadratic term; the identified form requires C = 0"
            )
        return ResistanceCoeffs(A0=self.A0, B=self.B, C=0.0)


def _boxcar(values: np.ndarray, width: int) -> np.ndarray:
    """Centered moving average with edge padding (no zero-pad bias)."""
    if width <= 1 or len(values) < width:
        return values
    padded = np.pad(values, width // 2, mode="edge")
    return np.convolve(padded, np.ones(width) / width, mode="valid")


def _series(telemetry, kind: str) -> tuple[np.ndarray, np.ndarray]:
    pairs = [
        (m.timestamp, float(m.value))
        for m in telemetry
        if m.kind == kind and m.is_finite()
    ]
    if not pairs:
        return np.array([]), np.array([])
    t, v = zip(*pairs)
    return np.asarray(t, dtype=float), np.asarray(v, dtype=float)


def _idle_intervals(notch_log: NotchSchedule, t_last: float):
    out = []
    entries = notch_log.entries
    for i, (t0, p) in enumerate(entries):
        if p == 0:
            t1 = entries[i + 1][0] if i + 1 < len(entries) else t_last
            if t1 > t0:
                out.append((t0, t1))
    return out


def extract_coastdowns(
    telemetry,
    mass: float,
    theta: float = 0.0,
    notch_log: NotchSchedule | None = None,
    min_duration: float = COASTDOWN_MIN_DURATION,
    accel_limit: float = COASTDOWN_ACCEL_LIMIT,
    max_gap: float = 2.0,
) -> tuple[list[CoastdownSegment], list[str]]:
    """Find idle-notch glides in a telemetry stream.

    With a notch log, idle intervals are taken directly from it; otherwise
    samples qualify where the (low-passed) acceleration magnitude stays
    below ``accel_limit`` and the speed is decreasing.  A recording gap
    longer than ``max_gap`` seconds splits a glide (distinct glides can
    otherwise chain into one falsely fast decay).  Segments shorter than
    ``min_duration`` or touching zero speed are rejected.  Returns the
    accepted segments and a diagnostic line per rejected candidate.
    """
    t_v, v = _series(telemetry, "speed")
    diagnostics: list[str] = []
    if len(t_v) < 3:
        return [], ["telemetry has fewer than 3 speed samples"]

    if notch_log is not None:
        intervals = _idle_intervals(notch_log, float(t_v[-1]))
        qualifies = np.zeros(len(t_v), dtype=bool)
        for t0, t1 in intervals:
            qualifies |= (t_v >= t0) & (t_v <= t1)
    else:
        t_a, a = _series(telemetry, "accel")
        if len(t_a) >= 3:
            try:
                a = lowpass_accel(t_a, a, cutoff=2.0, mode="batch")
            except Exception:
                pass  # sample rate too low for the 2 Hz filter; use raw
            a_at_v = np.interp(t_v, t_a, a)
        else:
            # fall back to differentiating the speed itself
            a_at_v = np.gradient(v, t_v)
        # Noise flips raw sample-to-sample gradients, so the decreasing
        # test compares a smoothed trend one horizon ahead vs behind.
        dt_med = float(np.median(np.diff(t_v)))
        v_trend = _boxcar(v, max(1, int(round(0.5 / dt_med))) * 2 + 1)
        horizon = max(1, int(round(1.0 / dt_med)))
        n_v = len(v)
        ahead = np.minimum(np.arange(n_v) + horizon, n_v - 1)
        behind = np.maximum(np.arange(n_v) - horizon, 0)
        decreasing = v_trend[ahead] < v_trend[behind]
        qualifies = (np.abs(a_at_v) < accel_limit) & decreasing

    segments: list[CoastdownSegment] = []
    idx = 0
    n = len(t_v)
    while idx < n:
        if not qualifies[idx]:
            idx += 1
            continue
        j = idx
        while j + 1 < n and qualifies[j + 1] and t_v[j + 1] - t_v[j] <= max_gap:
            j += 1
        t_seg, v_seg = t_v[idx : j + 1], v[idx : j + 1]
        span = float(t_seg[-1] - t_seg[0]) if len(t_seg) > 1 else 0.0
        if span < min_duration:
            diagnostics.append(
                f"candidate at t={t_v[idx]:.1f}s rejected: {span:.1f} s "
                f"shorter than {min_duration:g} s"
            )
        elif np.any(v_seg <= 0.0):
            diagnostics.append(
                f"candidate at t={t_v[idx]:.1f}s rejected: speed reaches zero"
            )
        else:
            segments.append(CoastdownSegment(t_seg, v_seg, mass=mass, theta=theta))
        idx = j + 1

    if not segments:
        diagnostics.append("no qualifying coast-down segment found")
    return segments, diagnostics


def _segment_regression_points(seg: CoastdownSegment, lowpass_cutoff: float):
    """Central-difference acceleration on (optionally filtered) speed."""
    v = seg.v
    if len(seg.t) >= 13:
        fs = 1.0 / float(np.median(np.diff(seg.t)))
        if fs > 2.0 * lowpass_cutoff:
            v = lowpass_accel(seg.t, seg.v, cutoff=lowpass_cutoff, mode="batch")
    dvdt = (v[2:] - v[:-2]) / (seg.t[2:] - seg.t[:-2])
    return seg.t[1:-1], v[1:-1], dvdt


def _coastdown_speed_grid(t, v0: float, mass: float, theta: float, f_r):
    """Integrate the coast-down ODE M dv/dt = -F_r(v) - M g sin(theta)
    from v0 over the time grid (RK4 with <= 50 ms substeps)."""
    g_sin = GRAVITY * math.sin(theta)

    def rhs(v):
        v = max(v, 0.0)
        return -f_r(v, mass) / mass - g_sin

    out = np.empty(len(t))
    cur = float(v0)
    out[0] = cur
    for i in range(1, len(t)):
        span = float(t[i] - t[i - 1])
        n_sub = max(1, int(math.ceil(span / 0.05)))
        h = span / n_sub
        for _ in range(n_sub):
            k1 = rhs(cur)
            k2 = rhs(cur + 0.5 * h * k1)
            k3 = rhs(cur + 0.5 * h * k2)
            k4 = rhs(cur + h * k3)
            cur += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if cur < 0.0:
                cur = 0.0
        out[i] = cur
    return out


def _coastdown_speed(seg: CoastdownSegment, f_r):
    return _coastdown_speed_grid(seg.t, float(seg.v[0]), seg.mass, seg.theta, f_r)


def _speed_residuals(segments, f_r, v0s=None) -> np.ndarray:
    if v0s is None:
        v0s = [float(seg.v[0]) for seg in segments]
    res = [
        _coastdown_speed_grid(seg.t, v0, seg.mass, seg.theta, f_r) - seg.v
        for seg, v0 in zip(segments, v0s)
    ]
    return np.concatenate(res)


def resistance_residual_rms(segments, coeffs: ResistanceCoeffs) -> float:
    """RMS speed-trace mismatch (m/s) of a resistance law against the
    measured coast-downs, via re-simulation of each glide."""
    if not segments:
        raise ParameterError("need at least one segment")

    def f_r(v, mass):
        return propulsion_resistance(v, mass, coeffs)

    r = _speed_residuals(segments, f_r)
    return float(np.sqrt(np.mean(r * r)))


def fit_resistance(
    segments,
    fix_C_zero: bool = True,
    lowpass_cutoff: float = 2.0,
    polish: bool = True,
) -> FitResult:
    """Least-squares fit of the resistance coefficients from coast-downs.

    Regresses -M dv/dt - M g sin(theta) on [M, v] (plus v^2 when the
    quadratic term is kept), with dv/dt from central differences of the
    conditioned speed; only samples with v in [0.5, 12] m/s enter.  With
    ``polish`` a Gauss-Newton pass matching the simulated speed decay
    refines the estimate (necessary for noisy logs, where differentiation
    amplifies the noise).  The reported residual RMS is the speed-trace
    mismatch of the final coefficients.
    """
    segments = list(segments)
    if not segments:
        raise IdentifiabilityError("need at least one coast-down segment")

    rows_X, rows_y = [], []
    for seg in segments:
        _t, v_mid, dvdt = _segment_regression_points(seg, lowpass_cutoff)
        keep = (v_mid >= FIT_SPEED_MIN) & (v_mid <= FIT_SPEED_MAX)
        v_mid, dvdt = v_mid[keep], dvdt[keep]
        y = -seg.mass * dvdt - seg.mass * GRAVITY * math.sin(seg.theta)
        cols = [np.full_like(v_mid, seg.mass), v_mid]
        if not fix_C_zero:
            cols.append(v_mid * v_mid)
        rows_X.append(np.column_stack(cols))
        rows_y.append(y)

    X = np.vstack(rows_X)
    y = np.concatenate(rows_y)
    n, k = X.shape
    if n < MIN_FIT_SAMPLES:
        raise IdentifiabilityError(
            f"{n} usable samples in [{FIT_SPEED_MIN}, {FIT_SPEED_MAX}] m/s; "
            f"need at least {MIN_FIT_SAMPLES}"
        )
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0.0) or np.linalg.matrix_rank(X / norms) < k:
        raise IdentifiabilityError(
            "regressors are collinear (e.g. all segments at a single speed); "
            "the coefficients are not identifiable"
        )

    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    dof = max(n - k, 1)
    sigma2 = float(resid @ resid) / dof
    covariance = sigma2 * np.linalg.inv(X.T @ X)

    if polish:
        beta = _gauss_newton_polish(segments, beta, fix_C_zero)

    A0, B = float(beta[0]), float(beta[1])
    C = 0.0 if fix_C_zero else float(beta[2])

    def f_r(v, mass):
        return A0 * mass + B * v + C * v * v

    r = _speed_residuals(segments, f_r)
    return FitResult(
        A0=A0,
        B=B,
        C=C,
        residual_rms=float(np.sqrt(np.mean(r * r))),
        covariance=covariance,
        n_samples=n,
    )


def _gauss_newton_polish(
    segments, beta, fix_C_zero: bool, max_iter: int = 20
) -> np.ndarray:
    """Trajectory-matching refinement: damped Gauss-Newton on the simulated
    speed decay, with each glide's initial speed as a nuisance parameter.

    Fitting the speed trace directly (instead of its derivative) is what
    makes the estimate robust to measurement noise; freeing the initial
    speeds keeps the first noisy sample from biasing the coefficients.
    """
    n_coeff = len(beta)

    def residuals(theta):
        A0, B = theta[0], theta[1]
        C = 0.0 if fix_C_zero else theta[2]
        return _speed_residuals(
            segments,
            lambda v, mass: A0 * mass + B * v + C * v * v,
            v0s=theta[n_coeff:],
        )

    theta = np.concatenate([beta, [float(seg.v[0]) for seg in segments]])
    for _ in range(max_iter):
        r0 = residuals(theta)
        ss0 = float(r0 @ r0)
        J = np.empty((len(r0), len(theta)))
        for j in range(len(theta)):
            h = max(abs(theta[j]) * 1e-6, 1e-9)
            perturbed = theta.copy()
            perturbed[j] += h
            J[:, j] = (residuals(perturbed) - r0) / h
        try:
            delta = np.linalg.solve(J.T @ J, -J.T @ r0)
        except np.linalg.LinAlgError:
            break
        stepped = False
        for damping in (1.0, 0.5, 0.25, 0.1):
            candidate = theta + damping * delta
            if float(residuals(candidate) @ residuals(candidate)) < ss0:
                theta = candidate
                stepped = True
                break
        if not stepped:
            break
        rel = np.abs(delta[:n_coeff]) / np.maximum(np.abs(theta[:n_coeff]), 1e-12)
        if np.max(rel) < 1e-8:
            break
    return theta[:n_coeff]


# --- traction-gain identification -------------------------------------------


def plateau_accel(
    t,
    a,
    settle_time: float,
    smooth_window: float = 0.2,
    steady_tol: float = 0.02,
    min_steady: float = 0.3,
    require_steady: bool = True,
) -> float:
    """Quasi-steady plateau acceleration (signed) of a constant-notch run.

    Smooths the series, takes the |a| extremum after the torque lag has
    settled, and requires the smoothed value to stay within ``steady_tol``
    of it for at least ``min_steady`` seconds around the extremum
    (``require_steady=False`` skips that validation, for probing simulated
    candidates during gain matching).
    """
    t = np.asarray(t, dtype=float)
    a = np.asarray(a, dtype=float)
    if len(t) < 10 or len(t) != len(a):
        raise PlateauError("run too short to contain a plateau")
    duration = float(t[-1] - t[0])
    if duration < settle_time + min_steady:
        raise PlateauError(
            f"run spans {duration:.2f} s; needs more than "
            f"{settle_time + min_steady:.2f} s for the lag to settle"
        )
    dt = float(np.median(np.diff(t)))
    win = max(1, int(round(smooth_window / dt)))
    kernel = np.ones(win) / win
    smooth = np.convolve(a, kernel, mode="same")

    mask = t - t[0] >= settle_time
    idx_rel = int(np.argmax(np.abs(smooth[mask])))
    idx = int(np.flatnonzero(mask)[idx_rel])
    peak = smooth[idx]
    if abs(peak) < 1e-9:
        raise PlateauError("run shows no acceleration response")

    if require_steady:
        near = np.abs(np.abs(smooth) - abs(peak)) <= steady_tol * abs(peak)
        lo = idx
        while lo > 0 and near[lo - 1]:
            lo -= 1
        hi = idx
        while hi + 1 < len(t) and near[hi + 1]:
            hi += 1
        if t[hi] - t[lo] < min_steady:
            raise PlateauError(
                f"acceleration holds its extremum for only {t[hi] - t[lo]:.2f} s; "
                f"no quasi-steady plateau"
            )
    return float(peak)


def _simulated_plateau(
    gain: float,
    notch: int,
    v0: float,
    duration: float,
    params: TramParams,
    adh: AdhesionParams,
    settle_time: float,
    dt: float,
) -> float:
    if notch > 0:
        params = replace(params, traction_gain_accel=gain)
    else:
        params = replace(params, traction_gain_brake=gain)
    traj = simulate(
        initial_state(v0, params),
        NotchSchedule.constant(notch),
        0.0,
        params,
        adh,
        dt=dt,
        t_end=duration,
    )
    return plateau_accel(traj.t, traj.accel, settle_time, require_steady=False)


def _match_gain(
    run: tuple,
    notch: int,
    v0: float,
    params: TramParams,
    adh: AdhesionParams,
    accel_tol: float,
    dt: float,
) -> float:
    t, a = np.asarray(run[0], dtype=float), np.asarray(run[1], dtype=float)
    if t.size == 0:
        raise PlateauError("empty traction run")
    settle = 5.0 / params.torque_lag_rate
    target = plateau_accel(t, a, settle)
    duration = float(t[-1] - t[0])
    mass = params.total_mass

    # Driving force saturates at the adhesion peak; past it the wheel spins
    # away and the plateau collapses, so the search must stay below the
    # gain that demands peak adhesion.  Braking creep has no such cap.
    gain_cap = math.inf
    if notch > 0:
        _, mu_peak = peak_adhesion(adh)
        gain_cap = 0.98 * mu_peak * mass * params.gravity * params.wheel_radius / notch

    # quasi-static seed: gain ~ (M |a| + F_r) r / |p|
    v_guess = v0 + target * max(duration * 0.4, settle)
    v_guess = min(max(v_guess, 0.0), FIT_SPEED_MAX)
    f_need = mass * abs(target) + propulsion_resistance(
        v_guess, mass, params.resistance
    )
    seed = f_need * params.wheel_radius / abs(notch)
    hi = min(1.8 * seed, gain_cap)
    lo = min(0.5 * seed, hi)

    def sim(g):
        return abs(
            _simulated_plateau(g, notch, v0, duration, params, adh, settle, dt)
        )

    target_mag = abs(target)
    # widen the bracket if the seed missed
    for _ in range(8):
        if sim(lo) <= target_mag:
            break
        lo *= 0.5
    for _ in range(8):
        if sim(hi) >= target_mag or hi >= gain_cap:
            break
        hi = min(1.5 * hi, gain_cap)
    if sim(hi) < target_mag:
        raise PlateauError(
            f"measured plateau {target_mag:.3f} m/s^2 exceeds what the "
            "adhesion law can transmit; gain not identifiable from this run"
        )

    gain = 0.5 * (lo + hi)
    for _ in range(60):
        gain = 0.5 * (lo + hi)
        value = sim(gain)
        if abs(value - target_mag) < accel_tol:
            break
        if value < target_mag:
            lo = gain
        else:
            hi = gain
        if hi - lo < 1e-3:
            break
    return gain


def fit_traction_gains(
    max_run: tuple,
    min_run: tuple,
    params: TramParams,
    adh: AdhesionParams = DRY,
    brake_v0: float = 15.0,
    accel_tol: float = 1e-3,
    dt: float = 1e-3,
) -> tuple[float, float]:
    """Identify the per-notch torque gains from full-notch runs.

    ``max_run`` and ``min_run`` are (t, a) series recorded at the highest
    acceleration notch (from rest) and the lowest braking notch (from
    ``brake_v0``).  Each gain is bisected until the simulated plateau
    acceleration matches the measured one within ``accel_tol``.
    """
    gain_accel = _match_gain(max_run, 7, 0.0, params, adh, accel_tol, dt)
    gain_brake = _match_gain(min_run, -7, brake_v0, params, adh, accel_tol, dt)
    return gain_accel, gain_brake
