"""Grey-box identification of the propulsion-resistance coefficients.

Coast-down glides (idle notch, resistance alone decelerating the tram)
are synthesized with 1% speed noise, extracted from the telemetry by
the idle gating rules, and fitted.  The fitted law is then compared
with three literature resistance formulas for heavier rail stock, which
visibly fail to match the decay of a light tram.
"""

import numpy as np

from tramsim.dynamics import ResistanceCoeffs
from tramsim.estimator import Measurement
from tramsim.ident import extract_coastdowns, fit_resistance, resistance_residual_rms

TRUE_A0, TRUE_B, MASS = 0.0147, 125.83, 17000.0


def glide_speed(t, v0):
    # closed-form coast-down: M dv/dt = -(A0*M + B*v)
    k = TRUE_B / MASS
    c = TRUE_A0 * MASS / TRUE_B
    return (v0 + c) * np.exp(-k * t) - c


rng = np.random.default_rng(5)
telemetry = []
t0 = 0.0
for v0, duration in ((11.0, 40.0), (8.0, 35.0), (5.5, 30.0), (3.0, 80.0)):
    ts = np.arange(0.0, duration, 0.1)
    v_true = glide_speed(ts, v0)
    v_meas = v_true * (1.0 + 0.01 * rng.standard_normal(len(ts)))
    a_true = -(TRUE_A0 * MASS + TRUE_B * v_true) / MASS
    for t, vi, ai in zip(ts, v_meas, a_true):
        telemetry.append(Measurement(round(t0 + t, 6), "speed", float(vi)))
        telemetry.append(Measurement(round(t0 + t, 6), "accel", float(ai)))
    t0 += duration + 20.0
telemetry.sort(key=lambda m: m.timestamp)

segments, diagnostics = extract_coastdowns(telemetry, mass=MASS)
print(f"extracted {len(segments)} coast-down glides "
      f"({sum(s.duration for s in segments):.0f} s total)")
for note in diagnostics:
    print(f"  note: {note}")

fit = fit_resistance(segments)
print(f"\nfitted coefficients (truth {TRUE_A0} / {TRUE_B}):")
print(f"  A0 = {fit.A0:.5f} N/kg   ({(fit.A0 / TRUE_A0 - 1) * 100:+.2f}%)")
print(f"  B  = {fit.B:.3f} N*s/m  ({(fit.B / TRUE_B - 1) * 100:+.2f}%)")
print(f"  speed-trace residual RMS = {fit.residual_rms:.4f} m/s")

print("\nliterature forms re-simulated against the same glides:")
for form, origin in (
    ("eq8a", "bogie passenger train"),
    ("eq8b", "electric locomotive"),
    ("eq8c", "suburban electric unit"),
):
    rms = resistance_residual_rms(segments, ResistanceCoeffs(form_id=form))
    print(f"  {form} ({origin:24s}): residual RMS {rms:.3f} m/s")
print("\nnone of them matches the light-tram decay; the identified linear")
print("law fits it one-to-two orders of magnitude closer.")
