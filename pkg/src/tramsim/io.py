"""File formats: parameter configs, telemetry logs, notch schedules,
and estimator output.

Parameter configs are INI-style key/value text with units spelled out in
the key names; every key is optional and falls back to the built-in
defaults.  Telemetry is CSV ``t,kind,value1,value2`` with kind one of
accel/speed/gps (gps rows carry lat/lon in value1/value2).  Schedules
are CSV ``t,notch``.  All units are SI.
"""

from __future__ import annotations

import configparser
import csv
import math

from .dynamics import (
    ADHESION_SETS,
    AdhesionParams,
    NotchSchedule,
    ResistanceCoeffs,
    TramParams,
)
from .errors import ConfigError, TelemetryParseError
from .estimator import Measurement, MEASUREMENT_KINDS, EstimatorRun

_TRAM_KEYS = {
    "curb_mass_kg": "curb_mass",
    "payload_mass_kg": "payload_mass",
    "wheel_radius_m": "wheel_radius",
    "wheel_mass_kg": "wheel_mass",
    "wheel_inertia_kgm2": "wheel_inertia",
    "power_limit_w": "power_limit",
    "traction_gain_accel_nm_per_notch": "traction_gain_accel",
    "traction_gain_brake_nm_per_notch": "traction_gain_brake",
    "torque_lag_rate_per_s": "torque_lag_rate",
    "gravity_m_s2": "gravity",
}

_RESISTANCE_KEYS = {
    "a0_n_per_kg": "A0",
    "b_ns_per_m": "B",
    "c_ns2_per_m2": "C",
}


def _read_ini(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r") as f:
            parser.read_file(f)
    except (configparser.Error, OSError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parser


def _floats(parser, section, mapping) -> dict:
    out = {}
    if not parser.has_section(section):
        return out
    for key, target in mapping.items():
        if parser.has_option(section, key):
            try:
                out[target] = parser.getfloat(section, key)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: not a number") from exc
    for key in parser.options(section):
        if key not in mapping and key != "form":
            raise ConfigError(f"[{section}] unknown key {key!r}")
    return out


def load_params(path) -> TramParams:
    """Build TramParams (including the resistance law) from a config file."""
    parser = _read_ini(path)
    fields = _floats(parser, "tram", _TRAM_KEYS)
    res_fields = _floats(parser, "resistance", _RESISTANCE_KEYS)
    if parser.has_option("resistance", "form"):
        res_fields["form_id"] = parser.get("resistance", "form").strip()
    resistance = ResistanceCoeffs(**res_fields)
    return TramParams(resistance=resistance, **fields)


def load_adhesion_sets(path) -> dict[str, AdhesionParams]:
    """Adhesion parameter sets by label; built-ins (dry, wet) are always
    present and can be overridden by ``[adhesion.<label>]`` sections."""
    parser = _read_ini(path)
    sets = dict(ADHESION_SETS)
    for section in parser.sections():
        if not section.startswith("adhesion."):
            continue
        label = section.split(".", 1)[1]
        try:
            sets[label] = AdhesionParams(
                a_a=parser.getfloat(section, "a_s_per_m"),
                b_a=parser.getfloat(section, "b_s_per_m"),
                c_a=parser.getfloat(section, "c"),
                d_a=parser.getfloat(section, "d"),
                label=label,
            )
        except (configparser.NoOptionError, ValueError) as exc:
            raise ConfigError(f"[{section}]: {exc}") from exc
    return sets


DEFAULT_PARAMS_TEXT = """\
# Tram parameter config.  All keys optional; units are in the key names.
[tram]
curb_mass_kg = 16500
payload_mass_kg = 500
wheel_radius_m = 0.325
wheel_mass_kg = 195
power_limit_w = 176000
traction_gain_accel_nm_per_notch = 1449
traction_gain_brake_nm_per_notch = 1176
torque_lag_rate_per_s = 3.0
gravity_m_s2 = 9.81

[resistance]
form = identified
a0_n_per_kg = 0.0147
b_ns_per_m = 125.83
c_ns2_per_m2 = 0.0

[adhesion.dry]
a_s_per_m = 0.54
b_s_per_m = 1.2
c = 1.0
d = 1.0

[adhesion.wet]
a_s_per_m = 0.05
b_s_per_m = 0.5
c = 0.08
d = 0.08
"""


def write_default_params(path) -> None:
    with open(path, "w") as f:
        f.write(DEFAULT_PARAMS_TEXT)


def load_schedule(path) -> NotchSchedule:
    """Read a notch schedule CSV of ``t,notch`` rows."""
    entries = []
    with open(path, "r", newline="") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if parts[0].lower() == "t":
                continue
            if len(parts) != 2:
                raise ConfigError(f"{path} line {lineno}: expected 't,notch'")
            try:
                t = float(parts[0])
                p = int(parts[1])
            except ValueError as exc:
                raise ConfigError(f"{path} line {lineno}: {exc}") from exc
            entries.append((t, p))
    if not entries:
        raise ConfigError(f"{path}: schedule is empty")
    return NotchSchedule(entries)


def write_schedule(schedule: NotchSchedule, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "notch"])
        for t, p in schedule.entries:
            writer.writerow([f"{t:.10g}", p])


def load_telemetry(path) -> list[Measurement]:
    """Read a telemetry CSV of ``t,kind,value1,value2`` rows (monotone t)."""
    out: list[Measurement] = []
    last_t = -math.inf
    with open(path, "r", newline="") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if parts[0].lower() == "t":
                continue
            if len(parts) not in (3, 4):
                raise TelemetryParseError(
                    f"expected 't,kind,value1[,value2]', got {len(parts)} fields",
                    lineno,
                )
            try:
                t = float(parts[0])
            except ValueError:
                raise TelemetryParseError(f"bad timestamp {parts[0]!r}", lineno)
            kind = parts[1].lower()
            if kind not in MEASUREMENT_KINDS:
                raise TelemetryParseError(
                    f"unknown kind {parts[1]!r}; expected one of "
                    f"{MEASUREMENT_KINDS}",
                    lineno,
                )
            if t < last_t:
                raise TelemetryParseError(
                    f"timestamp {t} goes backwards (previous {last_t})", lineno
                )
            last_t = t
            try:
                if kind == "gps":
                    if len(parts) < 4 or parts[3] == "":
                        raise TelemetryParseError(
                            "gps rows need lat,lon in value1,value2", lineno
                        )
                    value = (float(parts[2]), float(parts[3]))
                else:
                    value = float(parts[2])
            except ValueError:
                raise TelemetryParseError(f"bad value in {parts!r}", lineno)
            out.append(Measurement(timestamp=t, kind=kind, value=value))
    return out


def write_telemetry(measurements, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "kind", "value1", "value2"])
        for m in measurements:
            if m.kind == "gps":
                v1, v2 = f"{m.value[0]:.10g}", f"{m.value[1]:.10g}"
            else:
                v1, v2 = f"{m.value:.10g}", ""
            writer.writerow([f"{m.timestamp:.10g}", m.kind, v1, v2])


def load_scenarios(path, params: TramParams, adhesion_sets=None):
    """Braking scenarios from ``[scenario.<name>]`` sections.

    Keys per section: notch, mass_kg, theta_rad, adhesion (a label known
    to ``adhesion_sets``).  v0/dt come from the caller's speed grid.
    """
    from .predictor import BrakeQuery

    adhesion_sets = adhesion_sets or dict(ADHESION_SETS)
    parser = _read_ini(path)
    scenarios = []
    for section in parser.sections():
        if not section.startswith("scenario."):
            continue
        label = section.split(".", 1)[1]
        try:
            adh_label = parser.get(section, "adhesion", fallback="dry").strip()
            if adh_label not in adhesion_sets:
                raise ConfigError(
                    f"[{section}] unknown adhesion label {adh_label!r}"
                )
            scenarios.append(
                BrakeQuery(
                    v0=0.0,
                    notch=parser.getint(section, "notch", fallback=-7),
                    mass=parser.getfloat(section, "mass_kg", fallback=17000.0),
                    theta=parser.getfloat(section, "theta_rad", fallback=0.0),
                    adhesion=adhesion_sets[adh_label],
                    params=params,
                    label=label,
                )
            )
        except ValueError as exc:
            raise ConfigError(f"[{section}]: {exc}") from exc
    if not scenarios:
        raise ConfigError(f"{path}: no [scenario.*] sections found")
    return scenarios


ESTIMATE_HEADER = ("t", "x", "v", "a", "sigma_x", "sigma_v", "sigma_a", "theta")


def write_estimates(run: EstimatorRun, path) -> None:
    """Estimator output CSV: one row per applied update."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(ESTIMATE_HEADER)
        for state, theta in zip(run.states, run.thetas):
            sx, sv, sa = state.sigmas
            writer.writerow(
                [
                    f"{value:.10g}"
                    for value in (state.t, state.x, state.v, state.a, sx, sv, sa, theta)
                ]
            )
