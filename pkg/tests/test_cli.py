"""CLI tests: config handling, outputs, reproducibility, report rendering."""

import json
import math

import pytest

from flashlab.cli import main

PI_THIRD = math.pi / 3


def run_cli(*argv):
    return main(list(argv))


def test_run_writes_table_and_json(tmp_path, capsys):
    code = run_cli(
        "run", "--model", "rgrwf", "--a", "0", "--b", str(PI_THIRD),
        "--n", "4000", "--seed", "42", "--out", str(tmp_path),
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "outcome" in out and "born" in out
    assert "0.125" in out  # the oracle column
    payload = json.loads((tmp_path / "run_rgrwf.json").read_text())
    assert payload["command"] == "run"
    assert payload["n"] == 4000
    assert set(payload["counts"]) == {"++", "+-", "-+", "--"}
    total = sum(payload["counts"].values()) + payload["inconclusive"]
    assert total == 4000
    assert payload["oracle"]["++"] == pytest.approx(0.125, abs=1e-12)


def test_run_reruns_byte_identical(tmp_path):
    args = (
        "run", "--model", "rgrwf", "--a", "0", "--b", "0.5",
        "--n", "2000", "--seed", "7", "--out", str(tmp_path),
    )
    assert run_cli(*args) == 0
    first = (tmp_path / "run_rgrwf.json").read_bytes()
    assert run_cli(*args) == 0
    assert (tmp_path / "run_rgrwf.json").read_bytes() == first


def test_run_csv_dump(tmp_path):
    code = run_cli(
        "run", "--model", "rgrwf", "--a", "0", "--b", "0",
        "--n", "50", "--seed", "3", "--out", str(tmp_path), "--csv",
    )
    assert code == 0
    lines = (tmp_path / "flashes_rgrwf.csv").read_text().strip().splitlines()
    assert lines[0] == "run_id,region,t_lab,x_lab,t_frame,channel,index"
    assert len(lines) > 50  # several flashes per run
    # the CSV path must count outcomes exactly like the plain path
    payload = json.loads((tmp_path / "run_rgrwf.json").read_text())
    run_cli(
        "run", "--model", "rgrwf", "--a", "0", "--b", "0",
        "--n", "50", "--seed", "3", "--out", str(tmp_path),
    )
    plain = json.loads((tmp_path / "run_rgrwf.json").read_text())
    assert plain["counts"] == payload["counts"]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(
        "[experiment]\n"
        "model = rgrwf\n"
        "a = 0.0\n"
        f"b = {PI_THIRD}\n"
        "n = 1000\n"
        "master_seed = 11\n"
        "\n"
        "[output]\n"
        f"out_dir = {tmp_path / 'results'}\n"
    )
    assert run_cli("run", "--config", str(cfg), "--n", "500") == 0
    payload = json.loads((tmp_path / "results" / "run_rgrwf.json").read_text())
    assert payload["n"] == 500  # flag overrides file
    assert payload["master_seed"] == 11


def test_unknown_config_key_is_line_anchored(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[experiment]\nmodel = rgrwf\nbogus_key = 3\n")
    assert run_cli("run", "--config", str(cfg)) == 1
    err = capsys.readouterr().err
    assert f"{cfg}:3" in err
    assert "bogus_key" in err


def test_invalid_model_rejected(tmp_path, capsys):
    assert run_cli("run", "--model", "telepathy", "--out", str(tmp_path)) == 1
    assert "telepathy" in capsys.readouterr().err


def test_seed_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("FLASHLAB_SEED", "12345")
    assert run_cli(
        "run", "--model", "rgrwf", "--a", "0", "--b", "0",
        "--n", "200", "--out", str(tmp_path),
    ) == 0
    payload = json.loads((tmp_path / "run_rgrwf.json").read_text())
    assert payload["master_seed"] == 12345


def test_classify_row_and_json(tmp_path, capsys):
    cfg = tmp_path / "cls.ini"
    cfg.write_text(
        "[experiment]\nmodel = local_hv\nmaster_seed = 19\n"
        "[classify]\nn_qf = 600\nn_nosig = 800\nn_locality = 800\nn_eff = 400\n"
        f"[output]\nout_dir = {tmp_path}\n"
    )
    assert run_cli("classify", "--config", str(cfg)) == 0
    out = capsys.readouterr().out
    assert "local_hv:" in out
    assert "qf ✗" in out and "local ✓" in out
    payload = json.loads((tmp_path / "classify_local_hv.json").read_text())
    assert {t["name"] for t in payload["tests"]} == {
        "qf_agreement", "no_signalling", "locality",
        "effective_locality", "effective_causality",
    }


def test_certify_and_reports(tmp_path, capsys):
    cfg = tmp_path / "cert.ini"
    cfg.write_text(
        "[experiment]\nmaster_seed = 23\n"
        "[certify]\nk_max = 1\nwitness_samples = 300\n"
        f"[output]\nout_dir = {tmp_path}\n"
    )
    assert run_cli("certify", "--config", str(cfg)) == 0
    out = capsys.readouterr().out
    assert "local max 2" in out
    assert "quantum 2.82843" in out
    payload = json.loads((tmp_path / "certificate.json").read_text())
    assert [e["k"] for e in payload["enumeration"]] == [0, 1]

    # report re-renders all three JSON shapes
    assert run_cli("report", str(tmp_path / "certificate.json")) == 0
    assert "EPR survivors: 8" in capsys.readouterr().out

    assert run_cli(
        "run", "--model", "rgrwf", "--a", "0", "--b", "0",
        "--n", "300", "--seed", "2", "--out", str(tmp_path),
    ) == 0
    capsys.readouterr()
    assert run_cli("report", str(tmp_path / "run_rgrwf.json")) == 0
    assert "born" in capsys.readouterr().out


def test_report_rejects_garbage(tmp_path, capsys):
    path = tmp_path / "junk.json"
    path.write_text("{\"neither\": true}")
    assert run_cli("report", str(path)) == 1
    assert "unrecognized" in capsys.readouterr().err
