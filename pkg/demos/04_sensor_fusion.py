"""GNSS/IMU/map fusion over a simulated run.

A 60 s drive (accelerate, coast, brake gently) generates ground truth;
synthetic sensors sample it at realistic rates (IMU 100 Hz, GNSS 1 Hz)
with realistic noise.  The Kalman filter fuses accelerometer readings,
GNSS speed, and map-matched GNSS chainage, and is scored against the
truth it never saw.
"""

import math
import os

import numpy as np

from tramsim.dynamics import DRY, NotchSchedule, TramParams, initial_state, simulate
from tramsim.estimator import Measurement, run_estimator
from tramsim.io import write_estimates
from tramsim.track import EARTH_RADIUS, TrackMap, point_at

OUT_DIR = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT_DIR, exist_ok=True)

# straight 2 km test line running north
lat0, lon0 = 49.83, 18.28
dlat = math.degrees(2000.0 / EARTH_RADIUS)
track = TrackMap([(lat0, lon0, 0.0), (lat0 + dlat, lon0, 0.0)])

params = TramParams()
schedule = NotchSchedule([(0.0, 4), (15.0, 0), (40.0, -1), (55.0, 0)])
traj = simulate(
    initial_state(0.0, params), schedule, 0.0, params, DRY, dt=1e-3, t_end=60.0
)
print(f"truth: {traj.distance:.0f} m traveled, top speed {traj.v.max():.2f} m/s")

rng = np.random.default_rng(11)
telemetry = []
for t in np.arange(0.0, 60.0, 0.01):  # IMU 100 Hz
    a = float(np.interp(t, traj.t, traj.accel)) + 0.1 * rng.standard_normal()
    telemetry.append(Measurement(float(t), "accel", a))
for t in np.arange(0.0, 60.0, 1.0):  # GNSS 1 Hz
    v = float(np.interp(t, traj.t, traj.v))
    telemetry.append(
        Measurement(float(t), "speed", v + math.sqrt(0.05) * rng.standard_normal())
    )
    x = float(np.interp(t, traj.t, traj.x))
    lat, lon = point_at(x, track)
    lat += math.degrees(2.0 * rng.standard_normal() / EARTH_RADIUS)
    lon += math.degrees(
        2.0 * rng.standard_normal() / (EARTH_RADIUS * math.cos(math.radians(lat)))
    )
    telemetry.append(Measurement(float(t), "gps", (lat, lon)))
telemetry.sort(key=lambda m: m.timestamp)

run = run_estimator(telemetry, track)
print(f"filter applied {len(run.states)} updates, skipped {run.n_skipped}")

pos_err = [
    s.x - float(np.interp(s.t, traj.t, traj.x)) for s in run.states if s.t >= 5.0
]
vel_err = [
    s.v - float(np.interp(s.t, traj.t, traj.v)) for s in run.states if s.t >= 5.0
]
print(f"position RMS error: {np.sqrt(np.mean(np.square(pos_err))):.3f} m")
print(f"speed RMS error:    {np.sqrt(np.mean(np.square(vel_err))):.3f} m/s")
final = run.states[-1]
print(f"final state: x={final.x:.1f} m  v={final.v:.2f} m/s "
      f"(1-sigma: {final.sigmas[0]:.2f} m, {final.sigmas[1]:.3f} m/s)")

csv_path = os.path.join(OUT_DIR, "estimates.csv")
write_estimates(run, csv_path)
print(f"estimates written to {csv_path}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ts = np.array([s.t for s in run.states])
    xs = np.array([s.x for s in run.states])
    vs = np.array([s.v for s in run.states])
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
    axes[0].plot(traj.t, traj.x, "k-", lw=1, label="truth")
    axes[0].plot(ts, xs, "C0.", ms=2, label="estimate")
    axes[0].set_ylabel("distance [m]")
    axes[1].plot(traj.t, traj.v, "k-", lw=1, label="truth")
    axes[1].plot(ts, vs, "C0.", ms=2, label="estimate")
    axes[1].set_ylabel("speed [m/s]")
    axes[1].set_xlabel("time [s]")
    for ax in axes:
        ax.grid(alpha=0.3)
        ax.legend()
    fig.tight_layout()
    png = os.path.join(OUT_DIR, "fusion.png")
    fig.savefig(png, dpi=120)
    print(f"plot written to {png}")
except ImportError:
    print("matplotlib not available; skipping the plot")
