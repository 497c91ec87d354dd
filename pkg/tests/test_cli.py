import numpy as np
import pytest

from helpers import (
    coastdown_closed_form,
    gps_of_chainage,
    straight_track,
    synth_telemetry,
)
from tramsim.cli import main
from tramsim.dynamics import DRY, NotchSchedule, TramParams, initial_state, simulate
from tramsim.estimator import Measurement
from tramsim.io import write_telemetry
from tramsim.track import save_track


@pytest.fixture
def schedule_csv(tmp_path):
    path = tmp_path / "schedule.csv"
    path.write_text("t,notch\n0,7\n10,-7\n")
    return str(path)


@pytest.fixture
def track_csv(tmp_path):
    path = tmp_path / "track.csv"
    save_track(straight_track(length_m=2000.0), path)
    return str(path)


class TestSimulateCommand:
    def test_writes_trajectory_and_summary(self, tmp_path, schedule_csv, capsys):
        out = tmp_path / "traj.csv"
        code = main(
            ["simulate", "--schedule", schedule_csv, "--out", str(out),
             "--t-end", "30"]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert "total traveled distance" in printed
        lines = out.read_text().splitlines()
        assert lines[0] == "t,x,v,omega,T_mot,accel"
        assert len(lines) > 1000

    def test_deterministic_output_bytes(self, tmp_path, schedule_csv):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--schedule", schedule_csv, "--out", str(out1),
                     "--t-end", "12"]) == 0
        assert main(["simulate", "--schedule", schedule_csv, "--out", str(out2),
                     "--t-end", "12"]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_missing_schedule_file(self, tmp_path, capsys):
        code = main(
            ["simulate", "--schedule", str(tmp_path / "none.csv"),
             "--out", str(tmp_path / "o.csv")]
        )
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_empty_schedule(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text("t,notch\n")
        code = main(["simulate", "--schedule", str(empty),
                     "--out", str(tmp_path / "o.csv")])
        assert code == 2


class TestPredictCommand:
    def test_reference_prediction(self, capsys):
        code = main(["predict", "--v0", "15", "--notch", "-7",
                     "--mass", "17000", "--adhesion", "dry"])
        assert code == 0
        printed = capsys.readouterr().out
        assert "model braking distance" in printed
        assert "72.58" in printed  # kinematic baseline at 1.55 m/s^2
        distance = float(printed.split("model braking distance:")[1].split("m")[0])
        assert 74.0 < distance < 79.0

    def test_zero_speed(self, capsys):
        assert main(["predict", "--v0", "0"]) == 0
        assert "0.00 m" in capsys.readouterr().out

    def test_kmh_flag(self, capsys):
        assert main(["predict", "--v0", "54", "--kmh"]) == 0
        kmh_out = capsys.readouterr().out
        assert main(["predict", "--v0", "15"]) == 0
        assert capsys.readouterr().out == kmh_out

    def test_non_stopping_exit_code(self, capsys):
        code = main(["predict", "--v0", "3", "--notch", "0",
                     "--theta", "-0.05", "--t-end", "20"])
        assert code == 4
        assert "cannot stop" in capsys.readouterr().err

    def test_trajectory_dump(self, tmp_path):
        out = tmp_path / "braking.csv"
        assert main(["predict", "--v0", "10", "--out", str(out)]) == 0
        assert out.read_text().startswith("t,x,v,omega,T_mot,accel")

    def test_unknown_adhesion_label(self, capsys):
        assert main(["predict", "--v0", "10", "--adhesion", "slushy"]) == 2

    def test_initial_state_from_telemetry(self, tmp_path, track_csv, capsys):
        track = straight_track(length_m=2000.0)
        params = TramParams()
        traj = simulate(
            initial_state(0.0, params), NotchSchedule.constant(4), 0.0,
            params, DRY, dt=1e-3, t_end=10.0,
        )
        telemetry = synth_telemetry(
            traj, track, np.random.default_rng(7), accel_rate=50.0
        )
        tel_path = tmp_path / "tel.csv"
        write_telemetry(telemetry, tel_path)
        code = main(["predict", "--telemetry", str(tel_path),
                     "--track", track_csv])
        assert code == 0
        printed = capsys.readouterr().out
        assert "estimator initial conditions" in printed
        v0 = float(printed.split("v0=")[1].split(" ")[0])
        assert v0 == pytest.approx(float(traj.v[-1]), abs=0.5)


class TestEstimateCommand:
    def test_runs_and_reports_skips(self, tmp_path, track_csv, capsys):
        track = straight_track(length_m=2000.0)
        measurements = [Measurement(0.5, "accel", 0.0)]
        for k in range(1, 11):
            measurements.append(
                Measurement(float(k), "gps", gps_of_chainage(track, 50.0 * k))
            )
        # an off-track burst
        measurements.append(
            Measurement(11.0, "gps", gps_of_chainage(track, 600.0, east_err=80.0))
        )
        tel = tmp_path / "tel.csv"
        write_telemetry(measurements, tel)
        out = tmp_path / "est.csv"
        code = main(["estimate", "--telemetry", str(tel),
                     "--track", track_csv, "--out", str(out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "skipped 1" in printed
        lines = out.read_text().splitlines()
        assert lines[0] == "t,x,v,a,sigma_x,sigma_v,sigma_a,theta"
        assert len(lines) == 12  # 11 applied updates + header

    def test_unparseable_row_exit_code(self, tmp_path, track_csv, capsys):
        tel = tmp_path / "tel.csv"
        tel.write_text("0.0,accel,0.1,\n0.5,weird,1.0,\n")
        code = main(["estimate", "--telemetry", str(tel),
                     "--track", track_csv, "--out", str(tmp_path / "o.csv")])
        assert code == 2
        assert "line 2" in capsys.readouterr().err

    def test_empty_log_yields_header_only_csv(self, tmp_path, track_csv):
        tel = tmp_path / "tel.csv"
        tel.write_text("t,kind,value1,value2\n")
        out = tmp_path / "est.csv"
        code = main(["estimate", "--telemetry", str(tel),
                     "--track", track_csv, "--out", str(out)])
        assert code == 0
        assert out.read_text().strip() == "t,x,v,a,sigma_x,sigma_v,sigma_a,theta"


class TestIdentifyCommand:
    def test_recovers_coefficients(self, tmp_path, capsys):
        measurements = []
        t0 = 0.0
        for v0, dur in ((10.0, 40.0), (6.0, 35.0), (3.0, 60.0)):
            ts = np.arange(0.0, dur, 0.1)
            v = coastdown_closed_form(ts, v0)
            a = -(0.0147 * 17000.0 + 125.83 * v) / 17000.0
            for t, vi, ai in zip(ts, v, a):
                measurements.append(Measurement(round(t0 + t, 6), "speed", float(vi)))
                measurements.append(Measurement(round(t0 + t, 6), "accel", float(ai)))
            t0 += dur + 10.0
        measurements.sort(key=lambda m: m.timestamp)
        tel = tmp_path / "tel.csv"
        write_telemetry(measurements, tel)
        code = main(["identify", "--telemetry", str(tel), "--mass", "17000",
                     "--compare-forms"])
        assert code == 0
        printed = capsys.readouterr().out
        a0 = float(printed.split("A0 = ")[1].split(" ")[0])
        b = float(printed.split("B  = ")[1].split(" ")[0])
        assert a0 == pytest.approx(0.0147, rel=0.02)
        assert b == pytest.approx(125.83, rel=0.02)
        assert "eq8a" in printed and "eq8b" in printed and "eq8c" in printed

    def test_no_coastdowns_diagnostic_exit(self, tmp_path, capsys):
        measurements = []
        for k in range(200):
            t = round(0.1 * k, 6)
            measurements.append(Measurement(t, "speed", 1.0 + 1.5 * t))
            measurements.append(Measurement(t, "accel", 1.5))
        tel = tmp_path / "tel.csv"
        write_telemetry(measurements, tel)
        code = main(["identify", "--telemetry", str(tel)])
        assert code == 2
        assert "no coast-down" in capsys.readouterr().err


class TestCompareCommand:
    def test_table_written(self, tmp_path, capsys):
        scen = tmp_path / "scen.ini"
        scen.write_text(
            "[scenario.base]\nnotch = -7\nmass_kg = 17000\nadhesion = dry\n"
            "[scenario.heavy]\nnotch = -7\nmass_kg = 25000\nadhesion = dry\n"
        )
        out = tmp_path / "cmp.csv"
        code = main(["compare", "--speeds", "5,10", "--scenarios", str(scen),
                     "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "v0,kinematic,base,heavy"
        assert len(lines) == 3
        row5 = [float(x) for x in lines[1].split(",")]
        assert row5[3] > row5[2]  # heavier stops longer

    def test_deterministic(self, tmp_path):
        scen = tmp_path / "scen.ini"
        scen.write_text("[scenario.base]\nnotch = -7\n")
        out1, out2 = tmp_path / "c1.csv", tmp_path / "c2.csv"
        assert main(["compare", "--speeds", "5", "--scenarios", str(scen),
                     "--out", str(out1)]) == 0
        assert main(["compare", "--speeds", "5", "--scenarios", str(scen),
                     "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_bad_speed_grid(self, tmp_path, capsys):
        scen = tmp_path / "scen.ini"
        scen.write_text("[scenario.base]\nnotch = -7\n")
        code = main(["compare", "--speeds", "10,5", "--scenarios", str(scen),
                     "--out", str(tmp_path / "o.csv")])
        assert code == 2
