import json
from pathlib import Path

import pytest

from rachsim.cli import main


def read_all_outputs(out: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())
            if p.is_file() and p.name != "manifest.json"}


def test_print_defaults(capsys):
    assert main(["--print-defaults"]) == 0
    text = capsys.readouterr().out
    assert "num_contention_preambles = 54" in text
    assert "contention_resolution_timer_ms = 32" in text
    assert "schema_version" in text


def test_invalid_population_exits_2(capsys):
    assert main(["--num-mtds", "0"]) == 2
    assert "num_mtds" in capsys.readouterr().err


def test_bad_config_file_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("rach: {num_contention_preambles: 65}\n")
    assert main(["--config", str(cfg)]) == 2
    assert "num_contention_preambles" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "nope.yaml")]) == 2


def test_small_end_to_end_run(tmp_path, capsys):
    out = tmp_path / "res"
    code = main(["--num-mtds", "10", "--runs", "2", "--seed", "5",
                 "--out-dir", str(out), "--mode", "realistic"])
    assert code == 0
    assert (out / "N10" / "access_records.csv").exists()
    assert (out / "ecdf_N10.csv").exists()
    assert (out / "timeseries_N10.csv").exists()
    assert (out / "summary.json").exists()
    assert (out / "manifest.json").exists()

    header = (out / "N10" / "access_records.csv").read_text().splitlines()[0]
    assert header == "run_id,ue_id,start_ms,end_ms,delay_ms,preamble_attempts,msg3_attempts"
    ecdf_header = (out / "ecdf_N10.csv").read_text().splitlines()[0]
    assert ecdf_header == "delay_s,F_mean,F_run_0,F_run_1"
    ts_header = (out / "timeseries_N10.csv").read_text().splitlines()[0]
    assert ts_header == "bin_start_s,successes_mean,successes_run_0,successes_run_1"

    summary = json.loads((out / "summary.json").read_text())
    assert summary["schema_version"] == 1
    assert "10" in summary["per_n"]
    entry = summary["per_n"]["10"]
    assert entry["records_total"] == 20
    assert 0.0 <= entry["success_fraction"] <= 1.0
    assert summary["experiment"]["config"]["rach"]["num_contention_preambles"] == 54
    assert "N=10" in capsys.readouterr().out


def test_identical_invocations_byte_identical(tmp_path):
    args = ["--num-mtds", "15", "--runs", "2", "--seed", "9"]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    a = read_all_outputs(tmp_path / "a")
    b = read_all_outputs(tmp_path / "b")
    assert a.keys() == b.keys() and len(a) >= 3
    for name in a:
        assert a[name] == b[name], f"{name} differs between identical invocations"


def test_sweep_flag(tmp_path):
    out = tmp_path / "sweep"
    sc = tmp_path / "short.yaml"
    sc.write_text("scenario: {sim_duration_s: 2.0}\n")
    code = main(["--config", str(sc), "--sweep", "5,10", "--runs", "1",
                 "--seed", "1", "--out-dir", str(out)])
    assert code == 0
    assert (out / "ecdf_N5.csv").exists() and (out / "ecdf_N10.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert sorted(summary["per_n"]) == ["10", "5"]


def test_config_file_population_respected_and_flags_win(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("scenario: {num_mtds: 6, sim_duration_s: 2.0}\n"
                   "run: {num_runs: 1, seed: 3}\n")
    out1 = tmp_path / "o1"
    assert main(["--config", str(cfg), "--out-dir", str(out1)]) == 0
    assert (out1 / "ecdf_N6.csv").exists()
    out2 = tmp_path / "o2"
    assert main(["--config", str(cfg), "--num-mtds", "4",
                 "--out-dir", str(out2)]) == 0
    assert (out2 / "ecdf_N4.csv").exists()
    assert not (out2 / "ecdf_N6.csv").exists()


def test_dump_deployment_and_trace(tmp_path):
    out = tmp_path / "dump"
    sc = tmp_path / "short.yaml"
    sc.write_text("scenario: {sim_duration_s: 1.0}\n")
    code = main(["--config", str(sc), "--num-mtds", "5", "--runs", "1",
                 "--seed", "2", "--out-dir", str(out),
                 "--dump-deployment", "--trace"])
    assert code == 0
    dump = (out / "deployment_N5.csv").read_text().splitlines()
    assert dump[0] == "id,x,y,z,building_id,floor,serving_sector"
    assert len(dump) == 6
    for line in dump[1:]:  # every cell must be plain numeric text
        assert all(float(v) is not None for v in line.split(","))
    trace = (out / "trace_N5_run0.csv").read_text().splitlines()
    assert trace[0] == "subframe,ue,event,phase_from,phase_to"
    assert len(trace) > 5


def test_ideal_mode_flag(tmp_path):
    out = tmp_path / "ideal"
    code = main(["--num-mtds", "20", "--runs", "1", "--seed", "4",
                 "--mode", "ideal", "--out-dir", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    entry = summary["per_n"]["20"]
    assert entry["success_fraction"] == 1.0
    assert entry["mean_delay_s"] < 1.0
