"""Quarter-model simulation of a full-throttle / full-brake run.

The driver holds the highest acceleration notch for 10 s and then the
lowest braking notch until the tram stops.  Watch the motor torque: it
ramps up through the first-order lag, then starts falling once the
commanded power hits the 176 kW cap, and goes negative during braking.
"""

import os

import numpy as np

from tramsim.dynamics import (
    DRY,
    NotchSchedule,
    TramParams,
    commanded_torque,
    initial_state,
    simulate,
)

OUT_DIR = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT_DIR, exist_ok=True)

params = TramParams()  # 17 t, identified resistance, stock traction gains
schedule = NotchSchedule([(0.0, 7), (10.0, -7)])

traj = simulate(
    initial_state(0.0, params), schedule, theta_profile=0.0,
    params=params, adh=DRY, dt=1e-3, t_end=40.0,
)

# where does the power cap engage?
commanded = np.array([commanded_torque(7, w, params) for w in traj.omega])
power = commanded * traj.omega
onset = int(np.argmax(power >= params.power_limit * (1 - 1e-9)))

print(f"top speed:            {traj.v.max():6.2f} m/s ({traj.v.max() * 3.6:.1f} km/h)")
print(f"power cap engaged at: {traj.t[onset]:6.2f} s ({traj.v[onset]:.2f} m/s)")
print(f"peak motor torque:    {traj.T_mot.max():6.0f} N*m")
print(f"stop time:            {traj.t[-1]:6.2f} s")
print(f"total distance:       {traj.distance:6.1f} m")

csv_path = os.path.join(OUT_DIR, "max_accel_max_brake.csv")
traj.write_csv(csv_path)
print(f"trajectory written to {csv_path}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8, 8))
    axes[0].plot(traj.t, traj.v)
    axes[0].set_ylabel("speed [m/s]")
    axes[1].plot(traj.t, traj.T_mot)
    axes[1].set_ylabel("motor torque [N*m]")
    axes[2].plot(traj.t, traj.accel)
    axes[2].set_ylabel("accel [m/s$^2$]")
    axes[2].set_xlabel("time [s]")
    for ax in axes:
        ax.grid(alpha=0.3)
    fig.tight_layout()
    png = os.path.join(OUT_DIR, "max_accel_max_brake.png")
    fig.savefig(png, dpi=120)
    print(f"plot written to {png}")
except ImportError:
    print("matplotlib not available; skipping the plot")
