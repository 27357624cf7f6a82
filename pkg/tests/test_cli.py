import csv
import json

import pytest
import yaml

from gvcsim.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from gvcsim.config import DEFAULTS, load_config

SMALL = {"num_chunks": 30, "repetitions": 3, "trace": {"duration": 40.0}}


def write_config(path, data):
    path.write_text(yaml.safe_dump(data))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def cfg_path(tmp_path):
    return write_config(tmp_path / "exp.yaml", SMALL)


def test_run_single_controller(tmp_path):
    cfg = write_config(tmp_path / "c.yaml", SMALL | {"controllers": [{"type": "Proposed"}]})
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    sessions = list(out.glob("session_*.json"))
    assert len(sessions) == 1
    data = json.loads(sessions[0].read_text())
    assert len(data["records"]) == 30 and data["status"] == "complete"
    assert data["metrics"]["band"] == "Medium"
    rows = read_csv(out / "summary.csv")
    assert len(rows) == 1 and rows[0]["controller"] == "Proposed"
    assert len((out / "chunks_00_proposed.csv").read_text().strip().splitlines()) == 31


def test_run_is_byte_identical(cfg_path, tmp_path):
    for name in ("a", "b"):
        assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / name)]) == EXIT_OK
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_stamp_adds_timestamp_only(cfg_path, tmp_path):
    main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "p")])
    main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "s"), "--stamp"])
    plain = json.loads((tmp_path / "p" / "session_00_proposed.json").read_text())
    stamped = json.loads((tmp_path / "s" / "session_00_proposed.json").read_text())
    assert stamped.pop("generated_at")
    assert stamped == plain


def test_bb_overflow_is_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.yaml", {"controllers": [{"type": "BB", "reservoir": 3.0, "cushion": 2.0}]})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "reservoir+cushion" in err and "exceeds b_max" in err
    assert not (tmp_path / "o").exists()


def test_missing_config(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.yaml")]) == EXIT_CONFIG
    assert "not found" in capsys.readouterr().err


@pytest.mark.parametrize(
    "data, field",
    [
        ({"bogus": 1}, "bogus"),
        ({"session": {"b_max": -1}}, "session.b_max"),
        ({"trace": {"band": "Ultra"}}, "trace.band"),
        ({"controllers": [{"type": "MPC"}]}, "controllers[0].type"),
        ({"controllers": [{"type": "FBR", "level": 9}]}, "controllers[0]"),
        ({"num_chunks": 400}, "num_chunks"),
    ],
)
def test_invalid_config_names_field(tmp_path, capsys, data, field):
    cfg = write_config(tmp_path / "c.yaml", data)
    assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG
    assert field in capsys.readouterr().err


def test_usage_error():
    assert main(["frobnicate"]) == EXIT_CONFIG
    assert main(["run"]) == EXIT_CONFIG


def test_compare_needs_two_controllers(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.yaml", SMALL | {"controllers": [{"type": "Proposed"}]})
    assert main(["compare", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "at least two" in capsys.readouterr().err


def test_compare_outputs(cfg_path, tmp_path):
    out = tmp_path / "o"
    assert main(["compare", "--config", str(cfg_path), "--out", str(out)]) == EXIT_OK
    summary = read_csv(out / "summary.csv")
    assert [r["controller"] for r in summary] == ["Proposed", "BB", "FBR"]
    reps = read_csv(out / "repetitions.csv")
    assert len(reps) == 9
    assert {r["seed"] for r in reps} == {"0", "1", "2"}


def test_single_repetition_matches_first_of_many(tmp_path):
    one = write_config(tmp_path / "one.yaml", SMALL | {"repetitions": 1, "seed": 7})
    many = write_config(tmp_path / "many.yaml", SMALL | {"repetitions": 20, "seed": 7})
    main(["compare", "--config", str(one), "--out", str(tmp_path / "a")])
    main(["compare", "--config", str(many), "--out", str(tmp_path / "b")])
    first = [r for r in read_csv(tmp_path / "b" / "repetitions.csv") if r["rep"] == "0"]
    assert read_csv(tmp_path / "a" / "repetitions.csv") == first


def test_seed_flag_overrides_config(cfg_path, tmp_path):
    main(["compare", "--config", str(cfg_path), "--out", str(tmp_path / "a"), "--seed", "100"])
    seeds = {r["seed"] for r in read_csv(tmp_path / "a" / "repetitions.csv")}
    assert seeds == {"100", "101", "102"}


def test_jobs_do_not_change_results(cfg_path, tmp_path):
    main(["compare", "--config", str(cfg_path), "--out", str(tmp_path / "a")])
    main(["compare", "--config", str(cfg_path), "--out", str(tmp_path / "b"), "--jobs", "2"])
    assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()


def test_sweep_single_band(tmp_path):
    cfg = write_config(tmp_path / "c.yaml", SMALL | {"trace": {"duration": 40.0, "bands": ["High"]}})
    out = tmp_path / "o"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    rows = read_csv(out / "summary.csv")
    assert len(rows) == 1 and rows[0]["band"] == "High"
    plot = read_csv(out / "sweep_plot.csv")
    assert plot[0]["band_mid_mbps"] == "4.000"


def test_sweep_needs_synth(tmp_path):
    trace = tmp_path / "t.csv"
    trace.write_text("time_s,bandwidth_mbps\n0,2.0\n100,2.0\n")
    cfg = write_config(tmp_path / "c.yaml", SMALL | {"trace": {"source": "file", "path": "t.csv"}})
    assert main(["sweep", "--config", str(cfg)]) == EXIT_CONFIG


def test_print_config_round_trips(cfg_path, capsys, tmp_path):
    assert main(["run", "--config", str(cfg_path), "--print-config"]) == EXIT_OK
    dumped = write_config(tmp_path / "again.yaml", yaml.safe_load(capsys.readouterr().out))
    assert load_config(dumped).to_mapping() == load_config(cfg_path).to_mapping()
    assert load_config(dumped).to_mapping()["levels"] == DEFAULTS["levels"]


def test_env_overrides(cfg_path, tmp_path, monkeypatch):
    monkeypatch.setenv("GVCSIM_OUT_DIR", str(tmp_path / "env"))
    monkeypatch.setenv("GVCSIM_LOG_LEVEL", "ERROR")
    assert main(["run", "--config", str(cfg_path)]) == EXIT_OK
    assert (tmp_path / "env" / "summary.csv").exists()
    # --out wins over the environment
    assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "flag")]) == EXIT_OK
    assert (tmp_path / "flag" / "summary.csv").exists()


def test_exhausted_file_trace_is_runtime_error(tmp_path, capsys):
    # 10 s of trace at 0.2 Mbps cannot carry ten chunks of at least 0.3 Mbit plus their stalls
    trace = tmp_path / "slow.csv"
    trace.write_text("time_s,bandwidth_mbps\n0,0.2\n10,0.2\n")
    cfg = write_config(
        tmp_path / "c.yaml",
        {"num_chunks": 10, "trace": {"source": "file", "path": "slow.csv"}, "controllers": [{"type": "FBR", "level": 1}]},
    )
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == EXIT_RUNTIME
    assert "exhausted" in capsys.readouterr().err
    data = json.loads(next(out.glob("session_*.json")).read_text())
    assert data["status"] == "trace_exhausted" and 0 < len(data["records"]) < 10


def test_file_trace_parse_error(tmp_path, capsys):
    trace = tmp_path / "bad.csv"
    trace.write_text("time_s,bandwidth_mbps\n0,1\n5,-2\n")
    cfg = write_config(tmp_path / "c.yaml", {"trace": {"source": "file", "path": "bad.csv"}})
    assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG
    assert "line 3" in capsys.readouterr().err
