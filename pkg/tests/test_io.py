import math

import pytest

from tramsim.dynamics import DRY, NotchSchedule, TramParams, WET
from tramsim.errors import ConfigError, ParameterError, TelemetryParseError
from tramsim.estimator import EstimatorRun, EstimatorState, Measurement
from tramsim.io import (
    load_adhesion_sets,
    load_params,
    load_scenarios,
    load_schedule,
    load_telemetry,
    write_default_params,
    write_estimates,
    write_schedule,
    write_telemetry,
)

import numpy as np


class TestParamsConfig:
    def test_default_config_round_trips(self, tmp_path):
        path = tmp_path / "params.ini"
        write_default_params(path)
        params = load_params(path)
        assert params == TramParams()

    def test_adhesion_sets(self, tmp_path):
        path = tmp_path / "params.ini"
        write_default_params(path)
        sets = load_adhesion_sets(path)
        assert sets["dry"].a_a == DRY.a_a
        assert sets["wet"].d_a == WET.d_a

    def test_custom_adhesion_label(self, tmp_path):
        path = tmp_path / "params.ini"
        path.write_text(
            "[adhesion.frosty]\na_s_per_m = 0.1\nb_s_per_m = 0.6\nc = 0.2\nd = 0.2\n"
        )
        sets = load_adhesion_sets(path)
        assert sets["frosty"].b_a == 0.6
        assert "dry" in sets  # built-ins survive

    def test_partial_overrides(self, tmp_path):
        path = tmp_path / "params.ini"
        path.write_text("[tram]\npayload_mass_kg = 8500\n")
        params = load_params(path)
        assert params.total_mass == 25000.0
        assert params.wheel_radius == 0.325

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "params.ini"
        path.write_text("[tram]\nwheel_diameter_m = 0.65\n")
        with pytest.raises(ConfigError):
            load_params(path)

    def test_non_numeric_value_rejected(self, tmp_path):
        path = tmp_path / "params.ini"
        path.write_text("[tram]\ncurb_mass_kg = heavy\n")
        with pytest.raises(ConfigError):
            load_params(path)

    def test_resistance_form_selector(self, tmp_path):
        path = tmp_path / "params.ini"
        path.write_text("[resistance]\nform = eq8b\n")
        assert load_params(path).resistance.form_id == "eq8b"

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_params("/nonexistent/params.ini")


class TestSchedule:
    def test_round_trip(self, tmp_path):
        sched = NotchSchedule([(0.0, 7), (10.0, 0), (12.5, -7)])
        path = tmp_path / "sched.csv"
        write_schedule(sched, path)
        assert load_schedule(path).entries == sched.entries

    def test_header_and_comments(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("t,notch\n# full power\n0,7\n5,-7\n")
        sched = load_schedule(path)
        assert sched.notch_at(6.0) == -7

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("t,notch\n")
        with pytest.raises(ConfigError):
            load_schedule(path)

    def test_bad_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0,7\n5\n")
        with pytest.raises(ConfigError) as err:
            load_schedule(path)
        assert "line 2" in str(err.value)

    def test_out_of_range_notch(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0,9\n")
        with pytest.raises(ParameterError):
            load_schedule(path)


class TestTelemetry:
    def test_round_trip(self, tmp_path):
        measurements = [
            Measurement(0.0, "accel", 0.125),
            Measurement(0.5, "speed", 3.25),
            Measurement(1.0, "gps", (49.83, 18.28)),
        ]
        path = tmp_path / "tel.csv"
        write_telemetry(measurements, path)
        loaded = load_telemetry(path)
        assert [(m.timestamp, m.kind, m.value) for m in loaded] == [
            (m.timestamp, m.kind, m.value) for m in measurements
        ]

    def test_unknown_kind_reports_line(self, tmp_path):
        path = tmp_path / "tel.csv"
        path.write_text("t,kind,value1,value2\n0.0,accel,0.1,\n0.5,sonar,1.0,\n")
        with pytest.raises(TelemetryParseError) as err:
            load_telemetry(path)
        assert err.value.line == 3

    def test_backwards_time_reports_line(self, tmp_path):
        path = tmp_path / "tel.csv"
        path.write_text("1.0,accel,0.1,\n0.5,accel,0.1,\n")
        with pytest.raises(TelemetryParseError) as err:
            load_telemetry(path)
        assert err.value.line == 2

    def test_gps_needs_both_values(self, tmp_path):
        path = tmp_path / "tel.csv"
        path.write_text("0.0,gps,49.83,\n")
        with pytest.raises(TelemetryParseError):
            load_telemetry(path)

    def test_bad_float_reports_line(self, tmp_path):
        path = tmp_path / "tel.csv"
        path.write_text("0.0,speed,fast,\n")
        with pytest.raises(TelemetryParseError) as err:
            load_telemetry(path)
        assert err.value.line == 1


class TestEstimatesCsv:
    def test_header_and_rows(self, tmp_path):
        run = EstimatorRun()
        run.states.append(
            EstimatorState(x=1.0, v=2.0, a=0.1, P=np.eye(3), t=0.5)
        )
        run.thetas.append(0.01)
        path = tmp_path / "est.csv"
        write_estimates(run, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,x,v,a,sigma_x,sigma_v,sigma_a,theta"
        assert len(lines) == 2
        assert lines[1].startswith("0.5,1,2,0.1,1,1,1,")


class TestScenarios:
    def test_load(self, tmp_path):
        path = tmp_path / "scen.ini"
        path.write_text(
            "[scenario.base]\nnotch = -7\nmass_kg = 17000\ntheta_rad = 0\nadhesion = dry\n"
            "[scenario.wet]\nnotch = -7\nmass_kg = 17000\nadhesion = wet\n"
        )
        scenarios = load_scenarios(path, TramParams())
        assert [s.label for s in scenarios] == ["base", "wet"]
        assert scenarios[1].adhesion.label == "wet"

    def test_unknown_adhesion(self, tmp_path):
        path = tmp_path / "scen.ini"
        path.write_text("[scenario.x]\nadhesion = icy\n")
        with pytest.raises(ConfigError):
            load_scenarios(path, TramParams())

    def test_no_sections(self, tmp_path):
        path = tmp_path / "scen.ini"
        path.write_text("[other]\nkey = 1\n")
        with pytest.raises(ConfigError):
            load_scenarios(path, TramParams())
