"""Shared synthetic-data builders for the test suite.

Everything here is an *independent* oracle: coast-downs come from the
closed-form solution of the resistance ODE, Kalman-filter truth from
exact discrete propagation, and sensor streams from sampling a known
trajectory, so the code under test is never used to produce its own
expected values.
"""

from __future__ import annotations

import math

import numpy as np

from tramsim.estimator import Measurement, NoiseConfig, process_noise, transition_matrix
from tramsim.ident import CoastdownSegment
from tramsim.track import EARTH_RADIUS, TrackMap, point_at

IDENT_A0 = 0.0147
IDENT_B = 125.83


def coastdown_closed_form(t, v0, A0=IDENT_A0, B=IDENT_B, mass=17000.0):
    """Exact solution of M dv/dt = -(A0*M + B*v) on a flat track."""
    k = B / mass
    c = A0 * mass / B
    return (v0 + c) * np.exp(-k * np.asarray(t, dtype=float)) - c


DEFAULT_GLIDES = ((11.0, 40.0), (8.0, 35.0), (5.5, 30.0), (3.0, 80.0))


def make_coastdown_segments(
    rng=None,
    noise=0.0,
    glides=DEFAULT_GLIDES,
    mass=17000.0,
    rate=10.0,
    A0=IDENT_A0,
    B=IDENT_B,
):
    """Synthetic glides (initial speed, duration) sampled at ``rate`` Hz,
    optionally with multiplicative speed noise."""
    segments = []
    for v0, duration in glides:
        t = np.arange(0.0, duration, 1.0 / rate)
        v = coastdown_closed_form(t, v0, A0=A0, B=B, mass=mass)
        if rng is not None and noise > 0.0:
            v = v * (1.0 + noise * rng.standard_normal(len(v)))
        segments.append(CoastdownSegment(t, v, mass=mass))
    return segments


def straight_track(length_m=2000.0, lat0=49.83, lon0=18.28, slope=0.0, n=2):
    """North-running track of the given length; chainage equals northing."""
    dlat = math.degrees(length_m / EARTH_RADIUS)
    lats = np.linspace(lat0, lat0 + dlat, n)
    return TrackMap([(lat, lon0, slope) for lat in lats])


def gps_of_chainage(track: TrackMap, x: float, east_err=0.0, north_err=0.0):
    """Geographic fix at chainage x, offset by planar errors in metres."""
    lat, lon = point_at(min(max(x, 0.0), track.total_length), track)
    lat += math.degrees(north_err / EARTH_RADIUS)
    lon += math.degrees(east_err / (EARTH_RADIUS * math.cos(math.radians(lat))))
    return lat, lon


def synth_telemetry(
    traj,
    track: TrackMap,
    rng,
    accel_rate=100.0,
    gnss_rate=1.0,
    accel_sigma=0.1,
    speed_sigma=math.sqrt(0.05),
    pos_sigma=2.0,
    x_offset=0.0,
    accel_bias=0.0,
):
    """Sample IMU/GNSS sensor streams from a simulated trajectory.

    Truth is interpolated from the trajectory; gps fixes are placed on the
    track at chainage x_offset + x(t) with planar Gaussian errors.
    Returns a time-sorted list of Measurements.
    """
    t_end = float(traj.t[-1])
    out: list[Measurement] = []

    for t in np.arange(0.0, t_end, 1.0 / accel_rate):
        a = float(np.interp(t, traj.t, traj.accel))
        a += accel_bias + accel_sigma * rng.standard_normal()
        out.append(Measurement(float(t), "accel", a))

    for t in np.arange(0.0, t_end, 1.0 / gnss_rate):
        v = float(np.interp(t, traj.t, traj.v))
        out.append(
            Measurement(
                float(t), "speed", v + speed_sigma * rng.standard_normal()
            )
        )
        x = x_offset + float(np.interp(t, traj.t, traj.x))
        fix = gps_of_chainage(
            track,
            x,
            east_err=pos_sigma * rng.standard_normal(),
            north_err=pos_sigma * rng.standard_normal(),
        )
        out.append(Measurement(float(t), "gps", fix))

    out.sort(key=lambda m: m.timestamp)
    return out


def matched_kf_truth(n_steps, dt, noise: NoiseConfig, rng, x0=None):
    """Truth sequence drawn from the filter's own process model (exact
    discrete propagation plus sampled process noise)."""
    F = transition_matrix(dt)
    Q = process_noise(dt, noise.q_jerk)
    L = np.linalg.cholesky(Q + 1e-15 * np.eye(3))
    state = np.zeros(3) if x0 is None else np.asarray(x0, dtype=float)
    states = np.empty((n_steps, 3))
    for k in range(n_steps):
        state = F @ state + L @ rng.standard_normal(3)
        states[k] = state
    return states
