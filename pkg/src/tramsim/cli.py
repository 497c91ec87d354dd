"""Command-line front end.

Subcommands: simulate | predict | estimate | identify | compare.
All interfaces use SI units (km/h only via an explicit --kmh flag).
Exit codes: 0 success, 2 configuration/input error, 3 numerical error,
4 non-stopping braking scenario.  Errors go to standard error.
"""

from __future__ import annotations

import argparse
import sys

from . import dynamics, io
from .dynamics import ADHESION_SETS, NotchSchedule, TramParams, initial_state
from .errors import (
    ConfigError,
    IdentifiabilityError,
    NonStoppingError,
    NumericalDivergenceError,
    OffTrackError,
    ParameterError,
    PlateauError,
    TelemetryParseError,
    TrackParseError,
    TrackRangeError,
    TramSimError,
)
from .estimator import NoiseConfig, run_estimator
from .ident import extract_coastdowns, fit_resistance, resistance_residual_rms
from .predictor import BrakeQuery, compare_methods, predict_kinematic, predict_model
from .track import load_track, slope_at

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NON_STOPPING = 4


def _load_params(args) -> TramParams:
    if getattr(args, "params", None):
        return io.load_params(args.params)
    return TramParams()


def _adhesion(args):
    sets = dict(ADHESION_SETS)
    if getattr(args, "params", None):
        sets = io.load_adhesion_sets(args.params)
    label = args.adhesion
    if label not in sets:
        raise ConfigError(
            f"unknown adhesion label {label!r}; available: {sorted(sets)}"
        )
    return sets[label]


def _theta_source(args):
    """Constant slope or a track-based profile, per the flags given."""
    if getattr(args, "track", None):
        track = load_track(args.track)
        x0 = getattr(args, "chainage", 0.0) or 0.0

        def theta_of(x_rel: float) -> float:
            x = min(max(x0 + x_rel, 0.0), track.total_length)
            return slope_at(x, track)

        return theta_of, track
    return args.theta, None


def cmd_simulate(args) -> int:
    params = _load_params(args)
    adh = _adhesion(args)
    schedule = io.load_schedule(args.schedule)
    theta, _track = _theta_source(args)
    traj = dynamics.simulate(
        initial_state(args.v0, params),
        schedule,
        theta,
        params,
        adh,
        dt=args.dt,
        t_end=args.t_end,
    )
    traj.write_csv(args.out)
    stopped = " (stopped)" if traj.stopped else ""
    print(
        f"total traveled distance: {traj.distance:.1f} m "
        f"over {traj.duration:.1f} s{stopped}"
    )
    print(f"trajectory written to {args.out}")
    return EXIT_OK


def _predict_initial_conditions(args):
    """v0 and chainage either from flags or from an estimator pass."""
    if args.v0 is not None:
        v0 = args.v0 / 3.6 if args.kmh else args.v0
        return v0, args.chainage
    if not args.telemetry or not args.track:
        raise ConfigError("predict needs --v0, or --telemetry plus --track")
    track = load_track(args.track)
    run = run_estimator(io.load_telemetry(args.telemetry), track)
    if not run.states:
        raise ConfigError("telemetry produced no estimator updates")
    final = run.states[-1]
    print(
        f"estimator initial conditions: v0={final.v:.3f} m/s "
        f"at chainage {final.x:.1f} m"
    )
    return max(final.v, 0.0), final.x


def cmd_predict(args) -> int:
    params = _load_params(args)
    adh = _adhesion(args)
    v0, chainage = _predict_initial_conditions(args)
    track = load_track(args.track) if args.track else None
    query = BrakeQuery(
        v0=v0,
        notch=args.notch,
        mass=args.mass,
        adhesion=adh,
        theta=args.theta,
        track=track,
        chainage=chainage or 0.0,
        dt=args.dt,
        t_end=args.t_end,
        params=params,
    )
    result = predict_model(query, keep_trajectory=args.out is not None)
    kinematic = predict_kinematic(v0, args.a_dec)
    print(f"model braking distance:  {result.braking_distance:8.2f} m "
          f"(stop in {result.stop_time:.2f} s)")
    print(f"kinematic (a={args.a_dec:g} m/s^2): {kinematic:8.2f} m")
    print(f"difference:              {result.braking_distance - kinematic:+8.2f} m")
    if args.out and result.trajectory is not None:
        result.trajectory.write_csv(args.out)
        print(f"trajectory written to {args.out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    track = load_track(args.track)
    telemetry = io.load_telemetry(args.telemetry)
    noise = NoiseConfig(
        q_jerk=args.q_jerk,
        r_accel=args.r_accel,
        r_speed=args.r_speed,
        r_pos=args.r_pos,
    )
    run = run_estimator(
        telemetry, track, noise=noise, bias_window=args.bias_window
    )
    io.write_estimates(run, args.out)
    parts = ", ".join(f"{k}={v}" for k, v in sorted(run.skipped.items()))
    print(f"applied {len(run.states)} updates; skipped {run.n_skipped} ({parts})")
    if run.accel_bias:
        print(f"accelerometer bias removed: {run.accel_bias:.4f} m/s^2")
    print(f"estimates written to {args.out}")
    return EXIT_OK


def cmd_identify(args) -> int:
    telemetry = io.load_telemetry(args.telemetry)
    notch_log = io.load_schedule(args.schedule) if args.schedule else None
    segments, diagnostics = extract_coastdowns(
        telemetry,
        mass=args.mass,
        theta=args.theta,
        notch_log=notch_log,
        min_duration=args.min_duration,
    )
    for line in diagnostics:
        print(f"note: {line}", file=sys.stderr)
    if not segments:
        raise IdentifiabilityError("no coast-down segments in the telemetry")
    print(f"coast-down segments: {len(segments)} "
          f"({sum(s.duration for s in segments):.1f} s total)")

    fit = fit_resistance(segments, fix_C_zero=not args.quadratic)
    err = fit.stderr
    print(f"A0 = {fit.A0:.6g} N/kg (stderr {err[0]:.2g})")
    print(f"B  = {fit.B:.6g} N*s/m (stderr {err[1]:.2g})")
    if args.quadratic:
        print(f"C  = {fit.C:.6g} N*s^2/m^2 (stderr {err[2]:.2g})")
    print(f"speed-trace residual RMS = {fit.residual_rms:.4g} m/s "
          f"({fit.n_samples} samples)")

    if args.compare_forms:
        print("residual RMS by literature form:")
        for form in ("eq8a", "eq8b", "eq8c"):
            rms = resistance_residual_rms(
                segments, dynamics.ResistanceCoeffs(form_id=form)
            )
            print(f"  {form}: {rms:.4g} m/s")
    return EXIT_OK


def cmd_compare(args) -> int:
    params = _load_params(args)
    speeds = [float(s) for s in args.speeds.split(",") if s.strip()]
    if not speeds:
        raise ConfigError("--speeds must list at least one speed")
    adhesion_sets = (
        io.load_adhesion_sets(args.params) if args.params else dict(ADHESION_SETS)
    )
    scenarios = io.load_scenarios(args.scenarios, params, adhesion_sets)
    table = compare_methods(speeds, scenarios, a_dec=args.a_dec)
    table.write_csv(args.out)
    print("  ".join(f"{h:>12s}" for h in table.header()))
    for row in table.rows():
        print("  ".join(f"{value:12.2f}" for value in row))
    print(f"comparison written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tramsim",
        description="Tram longitudinal dynamics: simulate runs, predict "
        "braking distance, fuse GNSS/IMU/map telemetry, identify "
        "resistance and traction coefficients.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--params", help="parameter config file (INI)")
        p.add_argument("--adhesion", default="dry",
                       help="adhesion set label (default dry)")
        p.add_argument("--dt", type=float, default=1e-3,
                       help="integration step, s (default 1e-3)")

    p = sub.add_parser("simulate", help="integrate a notch schedule")
    add_common(p)
    p.add_argument("--schedule", required=True, help="schedule CSV (t,notch)")
    p.add_argument("--v0", type=float, default=0.0, help="initial speed, m/s")
    p.add_argument("--theta", type=float, default=0.0, help="constant slope, rad")
    p.add_argument("--track", help="track CSV for slope lookup along chainage")
    p.add_argument("--chainage", type=float, default=0.0,
                   help="starting chainage on the track, m")
    p.add_argument("--t-end", type=float, default=60.0, help="duration, s")
    p.add_argument("--out", required=True, help="trajectory CSV output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("predict", help="braking distance from current state")
    add_common(p)
    p.add_argument("--v0", type=float, help="current speed, m/s")
    p.add_argument("--kmh", action="store_true", help="interpret --v0 in km/h")
    p.add_argument("--notch", type=int, default=-7, help="braking notch in [-7,0]")
    p.add_argument("--mass", type=float, default=17000.0, help="total mass, kg")
    p.add_argument("--theta", type=float, default=0.0, help="constant slope, rad")
    p.add_argument("--track", help="track CSV for slope along the prediction")
    p.add_argument("--chainage", type=float, default=0.0,
                   help="current chainage on the track, m")
    p.add_argument("--a-dec", type=float, default=1.55,
                   help="kinematic baseline deceleration, m/s^2")
    p.add_argument("--t-end", type=float, default=300.0,
                   help="give up if not stopped by this time, s")
    p.add_argument("--telemetry",
                   help="estimate v0/chainage from this telemetry log instead")
    p.add_argument("--out", help="optional trajectory CSV dump")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("estimate", help="run the Kalman filter over telemetry")
    p.add_argument("--telemetry", required=True, help="telemetry CSV")
    p.add_argument("--track", required=True, help="track CSV")
    p.add_argument("--out", required=True, help="estimate CSV output")
    p.add_argument("--q-jerk", type=float, default=0.5,
                   help="jerk process noise density, (m/s^3)^2")
    p.add_argument("--r-accel", type=float, default=0.01,
                   help="accelerometer variance, (m/s^2)^2")
    p.add_argument("--r-speed", type=float, default=0.05,
                   help="GNSS speed variance, (m/s)^2")
    p.add_argument("--r-pos", type=float, default=4.0,
                   help="GNSS position variance, m^2")
    p.add_argument("--bias-window", type=float, default=0.0,
                   help="initial standstill window for accel bias removal, s")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("identify", help="fit resistance coefficients")
    p.add_argument("--telemetry", required=True, help="telemetry CSV")
    p.add_argument("--mass", type=float, default=17000.0,
                   help="total mass during the runs, kg")
    p.add_argument("--theta", type=float, default=0.0,
                   help="slope during the runs, rad")
    p.add_argument("--schedule", help="notch log CSV; idle intervals used directly")
    p.add_argument("--min-duration", type=float, default=5.0,
                   help="minimum glide length, s")
    p.add_argument("--quadratic", action="store_true",
                   help="also fit the quadratic speed term")
    p.add_argument("--compare-forms", action="store_true",
                   help="report residuals of the literature resistance forms")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("compare", help="model vs kinematic over a speed grid")
    add_common(p)
    p.add_argument("--speeds", required=True,
                   help="comma-separated speeds, m/s (ascending)")
    p.add_argument("--scenarios", required=True,
                   help="scenario config file (INI, [scenario.*] sections)")
    p.add_argument("--a-dec", type=float, default=1.55,
                   help="kinematic baseline deceleration, m/s^2")
    p.add_argument("--out", required=True, help="comparison CSV output")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NonStoppingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NON_STOPPING
    except NumericalDivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (
        ConfigError,
        TelemetryParseError,
        TrackParseError,
        TrackRangeError,
        ParameterError,
        IdentifiabilityError,
        PlateauError,
        OffTrackError,
        FileNotFoundError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TramSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
