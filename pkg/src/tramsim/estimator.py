"""Position/speed estimation by a discrete Kalman filter.

The filter runs a constant-acceleration model over the state
(distance, speed, acceleration) and fuses three measurement kinds:
IMU longitudinal acceleration, GNSS speed over ground, and GNSS
position map-matched to track chainage.  Fusion is event driven:
the state is predicted to each measurement's timestamp and updated
with a scalar Joseph-form correction, so the wildly different sensor
rates (kHz IMU vs 1 Hz GNSS) need no common clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import ConfigError, OffTrackError, ParameterError
from .track import TrackMap, project_to_track, slope_at

MEASUREMENT_KINDS = ("accel", "speed", "gps")

# rows of the identity output map, per measurement kind
_H_ROWS = {
    "gps": np.array([1.0, 0.0, 0.0]),
    "speed": np.array([0.0, 1.0, 0.0]),
    "accel": np.array([0.0, 0.0, 1.0]),
}


@dataclass(frozen=True)
class NoiseConfig:
    """Process/measurement noise levels.  Defaults are sized from the
    sensor classes used on the instrumented tram."""

    q_jerk: float = 0.5    # (m/s^3)^2, white-jerk spectral density
    r_accel: float = 0.01  # (m/s^2)^2
    r_speed: float = 0.05  # (m/s)^2
    r_pos: float = 4.0     # m^2

    def __post_init__(self):
        for name in ("q_jerk", "r_accel", "r_speed", "r_pos"):
            if not getattr(self, name) > 0.0:
                raise ParameterError(f"{name} must be strictly positive")

    def variance_for(self, kind: str) -> float:
        return {"accel": self.r_accel, "speed": self.r_speed, "gps": self.r_pos}[kind]


@dataclass(frozen=True)
class Measurement:
    """One sensor sample.  ``value`` is a float for accel/speed and a
    (lat, lon) pair for gps; variance defaults from NoiseConfig when unset."""

    timestamp: float
    kind: str
    value: float | tuple[float, float]
    variance: float | None = None

    def __post_init__(self):
        if self.kind not in MEASUREMENT_KINDS:
            raise ParameterError(
                f"unknown measurement kind {self.kind!r}; expected {MEASUREMENT_KINDS}"
            )
        if self.variance is not None and not self.variance > 0.0:
            raise ParameterError("measurement variance must be strictly positive")

    def is_finite(self) -> bool:
        if self.kind == "gps":
            return all(math.isfinite(v) for v in self.value)
        return math.isfinite(self.value)


@dataclass(frozen=True)
class EstimatorState:
    """Filter mean (x, v, a), covariance P, and its epoch t."""

    x: float
    v: float
    a: float
    P: np.ndarray  # 3x3
    t: float

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.x, self.v, self.a])

    @property
    def sigmas(self) -> np.ndarray:
        """Marginal standard deviations (sigma_x, sigma_v, sigma_a)."""
        return np.sqrt(np.clip(np.diag(self.P), 0.0, None))


def default_initial_state(t: float = 0.0) -> EstimatorState:
    """Uninformative start at the track origin, at rest."""
    return EstimatorState(
        x=0.0, v=0.0, a=0.0, P=np.diag([100.0, 25.0, 1.0]), t=t
    )


def transition_matrix(dt: float) -> np.ndarray:
    return np.array(
        [[1.0, dt, 0.5 * dt * dt], [0.0, 1.0, dt], [0.0, 0.0, 1.0]]
    )


def process_noise(dt: float, q_jerk: float) -> np.ndarray:
    """Discretized covariance of white jerk driving the acceleration state."""
    d2, d3, d4, d5 = dt * dt, dt**3, dt**4, dt**5
    return q_jerk * np.array(
        [
            [d5 / 20.0, d4 / 8.0, d3 / 6.0],
            [d4 / 8.0, d3 / 3.0, d2 / 2.0],
            [d3 / 6.0, d2 / 2.0, dt],
        ]
    )


def kf_predict(s: EstimatorState, dt: float, noise: NoiseConfig) -> EstimatorState:
    """Propagate mean and covariance by the constant-acceleration model."""
    if dt <= 0.0:
        raise ParameterError("dt must be positive")
    F = transition_matrix(dt)
    mean = F @ s.mean
    P = F @ s.P @ F.T + process_noise(dt, noise.q_jerk)
    return EstimatorState(
        x=float(mean[0]), v=float(mean[1]), a=float(mean[2]), P=P, t=s.t + dt
    )


def kf_update(
    s: EstimatorState, m: Measurement, track: TrackMap | None = None
) -> EstimatorState:
    """Scalar Kalman update of the state with one measurement.

    GNSS positions are first map-matched to chainage and then treated as a
    direct observation of the distance state; the projection may raise
    OffTrackError, which callers are expected to count and skip.
    Covariance uses the Joseph form so it stays symmetric PSD.
    """
    if abs(m.timestamp - s.t) > 1e-9:
        raise ParameterError(
            f"measurement at t={m.timestamp} does not match filter epoch t={s.t}; "
            "kf_predict must align them first"
        )
    if not m.is_finite():
        raise ParameterError("non-finite measurement value")
    if m.variance is None:
        raise ParameterError("measurement variance is unset")

    if m.kind == "gps":
        if track is None:
            raise ParameterError("gps measurements need a track map")
        z = project_to_track(m.value, track).chainage
    else:
        z = float(m.value)

    h = _H_ROWS[m.kind]
    mean = s.mean
    innovation = z - float(h @ mean)
    S = float(h @ s.P @ h) + m.variance
    K = (s.P @ h) / S
    new_mean = mean + K * innovation

    IKH = np.eye(3) - np.outer(K, h)
    P = IKH @ s.P @ IKH.T + m.variance * np.outer(K, K)
    P = 0.5 * (P + P.T)
    return EstimatorState(
        x=float(new_mean[0]),
        v=float(new_mean[1]),
        a=float(new_mean[2]),
        P=P,
        t=s.t,
    )


def lowpass_accel(
    t: np.ndarray,
    a: np.ndarray,
    cutoff: float = 2.0,
    mode: str = "batch",
) -> np.ndarray:
    """Condition raw accelerometer samples with a 2nd-order Butterworth
    low-pass (unity DC gain).

    ``batch`` filters forward-backward (zero phase, offline use only);
    ``streaming`` filters causally, as an onboard implementation would.
    The sample rate is taken from the median spacing of ``t``.
    """
    t = np.asarray(t, dtype=float)
    a = np.asarray(a, dtype=float)
    if len(t) != len(a):
        raise ParameterError("t and a must have the same length")
    if len(t) < 2:
        return a.copy()
    fs = 1.0 / float(np.median(np.diff(t)))
    if fs <= 2.0 * cutoff:
        raise ConfigError(
            f"sample rate {fs:.3g} Hz cannot support a {cutoff:g} Hz cut-off "
            "(needs fs > 2*cutoff)"
        )
    sos = signal.butter(2, cutoff, btype="low", fs=fs, output="sos")
    if mode == "batch":
        return signal.sosfiltfilt(sos, a)
    if mode == "streaming":
        zi = signal.sosfilt_zi(sos) * a[0]
        out, _ = signal.sosfilt(sos, a, zi=zi)
        return out
    raise ConfigError(f"unknown filter mode {mode!r}; use 'batch' or 'streaming'")


@dataclass
class EstimatorRun:
    """Output of run_estimator: one state (and slope) per applied update,
    plus counters for measurements that were skipped."""

    states: list[EstimatorState] = field(default_factory=list)
    thetas: list[float] = field(default_factory=list)
    skipped: dict[str, int] = field(
        default_factory=lambda: {"off_track": 0, "non_finite": 0}
    )
    accel_bias: float = 0.0

    @property
    def n_skipped(self) -> int:
        return sum(self.skipped.values())


def _estimate_accel_bias(measurements, window: float) -> float:
    """Mean accelerometer reading over the initial standstill window."""
    if not measurements:
        return 0.0
    t0 = measurements[0].timestamp
    vals = [
        m.value
        for m in measurements
        if m.kind == "accel" and m.timestamp <= t0 + window and m.is_finite()
    ]
    return float(np.mean(vals)) if vals else 0.0


def run_estimator(
    measurements,
    track: TrackMap,
    noise: NoiseConfig | None = None,
    initial: EstimatorState | None = None,
    bias_window: float = 0.0,
) -> EstimatorRun:
    """Event-driven fusion loop over a time-sorted measurement stream.

    Predicts to each measurement's timestamp, applies the update, and emits
    the posterior state together with the map slope at the estimated
    chainage (clamped to the mapped extent).  Off-track and non-finite
    measurements are skipped and counted.  With ``bias_window > 0`` the
    first ``bias_window`` seconds are treated as a standstill and the mean
    accelerometer reading over them is subtracted from all accel samples.
    """
    noise = noise or NoiseConfig()
    measurements = list(measurements)
    times = [m.timestamp for m in measurements]
    if any(t1 < t0 for t0, t1 in zip(times, times[1:])):
        raise ParameterError("measurement stream must be time-sorted")

    run = EstimatorRun()
    if bias_window > 0.0:
        run.accel_bias = _estimate_accel_bias(measurements, bias_window)

    if initial is None:
        initial = default_initial_state(t=times[0] if times else 0.0)
    state = initial

    for m in measurements:
        if not m.is_finite():
            run.skipped["non_finite"] += 1
            continue
        if m.kind == "accel" and run.accel_bias != 0.0:
            m = Measurement(m.timestamp, m.kind, m.value - run.accel_bias, m.variance)
        if m.variance is None:
            m = Measurement(m.timestamp, m.kind, m.value, noise.variance_for(m.kind))

        dt = m.timestamp - state.t
        if dt > 0.0:
            state = kf_predict(state, dt, noise)
        try:
            state = kf_update(state, m, track)
        except OffTrackError:
            run.skipped["off_track"] += 1
            continue

        x_clamped = min(max(state.x, 0.0), track.total_length)
        run.states.append(state)
        run.thetas.append(slope_at(x_clamped, track))

    return run
