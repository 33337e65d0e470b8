import csv
import math
import warnings

import pytest

from etclab.cli import main


def run_cli(args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return main(args)


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


SIM_ARGS = ["simulate", "--n", "3", "--scenario", "b", "--trigger", "level",
            "--delta", "1.0", "--horizon", "100", "--trials", "2", "--seed", "7"]


def test_simulate_writes_csv_and_manifest(tmp_path):
    out = tmp_path / "sim.csv"
    assert run_cli(SIM_ARGS + ["--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header[0] == "n" and "j_time_avg" in header
    assert len(rows) == 1
    manifest = (tmp_path / "sim.csv.manifest.txt").read_text()
    assert "command=simulate" in manifest
    assert "arg.seed=7" in manifest
    assert "numpy_version=" in manifest


def test_simulate_repeats_byte_identically(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(SIM_ARGS + ["--out", str(out1)])
    run_cli(SIM_ARGS + ["--out", str(out2)])
    assert out1.read_bytes() == out2.read_bytes()


def test_usage_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        run_cli(["simulate", "--trigger", "level"])  # missing --delta
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        run_cli(["simulate", "--trigger", "warp"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        run_cli(["simulate", "--trigger", "level", "--delta", "1", "--scenario", "bl",
                 "--rule", "nope"])
    assert info.value.code == 2


def test_incompatible_scheme_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        run_cli(["simulate", "--scenario", "bl", "--trigger", "periodic-async",
                 "--period", "0.5", "--out", str(tmp_path / "x.csv")])
    assert info.value.code == 2


def test_calibrate_reference_point(tmp_path):
    out = tmp_path / "cal.csv"
    code = run_cli(["calibrate", "--n", "3", "--target-t", "0.5", "--seed", "3",
                    "--samples", "20000", "--out", str(out)])
    assert code == 0
    header, rows = read_csv(out)
    delta = float(rows[0][header.index("delta")])
    assert delta == pytest.approx(1.04, rel=0.10)
    achieved = float(rows[0][header.index("achieved_T")])
    assert achieved == pytest.approx(0.5, rel=0.05)


def test_calibrate_failure_exits_3(tmp_path, capsys):
    code = run_cli(["calibrate", "--n", "1", "--target-t", "0.5", "--seed", "3",
                    "--samples", "400", "--tolerance", "0.0005",
                    "--out", str(tmp_path / "cal.csv")])
    assert code == 3
    assert "calibration failed" in capsys.readouterr().err


def test_table1_structure(tmp_path):
    out = tmp_path / "t1.csv"
    code = run_cli(["table1", "--horizon", "40", "--trials", "2", "--seed", "5",
                    "--samples", "4000", "--out", str(out)])
    assert code == 0
    header, rows = read_csv(out)
    assert len(rows) == 16
    i_n = header.index("n")
    i_scheme, i_scen = header.index("scheme"), header.index("scenario")
    i_analytic = header.index("j_analytic")
    i_target = header.index("target_global_T")
    seen = {(r[i_n], r[i_target], r[i_scheme], r[i_scen]) for r in rows}
    assert len(seen) == 16
    for row in rows:
        n, target = int(row[i_n]), float(row[i_target])
        kind = (row[i_scheme], row[i_scen])
        if kind == ("TT", "b"):
            assert float(row[i_analytic]) == n * (n - 1) * n * target / 2
        elif kind == ("ET", "b"):
            assert float(row[i_analytic]) == pytest.approx(
                n * (n - 1) * n * target / 6, rel=1e-12
            )
        elif kind == ("TT", "bl"):
            assert float(row[i_analytic]) == n * (n - 1) * target / 2
        else:
            assert row[i_analytic] == ""  # no closed form for ET bl


def test_sweep_n_row_per_agent_count(tmp_path):
    out = tmp_path / "sweep.csv"
    code = run_cli(["sweep-n", "--n-list", "2,3,4", "--target-t", "0.5",
                    "--horizon", "60", "--trials", "2", "--seed", "5",
                    "--samples", "4000", "--out", str(out)])
    assert code == 0
    header, rows = read_csv(out)
    assert [int(r[header.index("n")]) for r in rows] == [2, 3, 4]
    assert {r[header.index("consistent")] for r in rows} <= {"yes", "no"}


def test_ratio_curve_analytic_column(tmp_path):
    out = tmp_path / "ratio.csv"
    code = run_cli(["ratio-curve", "--n-list", "3", "--target-t", "0.5",
                    "--horizon", "60", "--trials", "2", "--seed", "5",
                    "--samples", "4000", "--out", str(out)])
    assert code == 0
    header, rows = read_csv(out)
    assert float(rows[0][header.index("ratio_b_analytic")]) == 1.0


def test_trajectory_global_resets_visible(tmp_path):
    out = tmp_path / "traj.csv"
    code = run_cli(["trajectory", "--n", "3", "--scenario", "bl", "--trigger", "level",
                    "--delta", "1.04", "--duration", "2.5", "--seed", "11",
                    "--out", str(out)])
    assert code == 0
    header, rows = read_csv(out)
    xi = [header.index(f"x{i+1}") for i in range(3)]
    events = [r for r in rows if r[header.index("event")] == "1"]
    # ~5 events expected in 2.5 s at a 0.5 s global rate
    assert 2 <= len(events) <= 9
    for row in events:
        values = {row[i] for i in xi}
        assert len(values) == 1


def test_trajectory_errors_stay_inside_band(tmp_path):
    out = tmp_path / "trajb.csv"
    delta = math.sqrt(1.5)
    code = run_cli(["trajectory", "--n", "2", "--scenario", "b", "--trigger", "level",
                    "--delta", repr(delta), "--duration", "4.0", "--seed", "11",
                    "--out", str(out)])
    assert code == 0
    header, rows = read_csv(out)
    for row in rows:
        if row[header.index("event")] == "1":
            continue  # pre-jump states may sit on/over the threshold
        for i in range(2):
            x = float(row[header.index(f"x{i+1}")])
            xh = float(row[header.index(f"xhat{i+1}")])
            assert abs(x - xh) < delta


def test_trajectory_threshold_columns(tmp_path):
    out = tmp_path / "trajc.csv"
    run_cli(["trajectory", "--n", "2", "--scenario", "b", "--trigger", "level",
             "--delta", "1.0", "--duration", "1.0", "--seed", "2",
             "--out", str(out)])
    header, rows = read_csv(out)
    lo = header.index("thr_lo")
    hi = header.index("thr_hi")
    for row in rows:
        assert float(row[hi]) - float(row[lo]) == pytest.approx(2.0)


def test_selftest_passes(capsys):
    assert run_cli(["selftest", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
