import json

import numpy as np
import pytest

from sympslice.cli import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG,
    SCHEMA,
    build_report,
    build_run_config,
    main,
    make_parser,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# describe ------------------------------------------------------------------

def test_describe_golden_so3_r3(capsys):
    code, out, _ = run_cli(capsys, "describe", "--system", "so3_r3",
                           "--point", "0", "0", "1", "--covector", "0", "-1", "0")
    assert code == 0
    report = json.loads(out)
    assert report["schema"] == SCHEMA
    assert report["dims"]["V"] == 2
    assert report["blocks"] == [0, 1, 1]
    assert report["case_flags"] == sorted(set(report["case_flags"]))
    assert "VerticalCovector" in report["case_flags"]
    assert all(r["pass"] for r in report["residuals"])


def test_describe_deterministic_bytes(capsys):
    args = ("describe", "--system", "so3_two_body",
            "--point", "0", "0", "1", "0", "0", "0",
            "--eta", "1", "0", "0", "--s", "0", "0", "0.3", "0.2", "0.5", "0.1")
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2


def test_describe_eta_s_equivalent_to_covector(capsys):
    code, out, _ = run_cli(capsys, "describe", "--system", "so3_r3",
                           "--point", "0", "0", "1",
                           "--eta", "1", "0", "0", "--s", "0", "0", "0")
    assert code == 0
    report = json.loads(out)
    assert np.allclose(report["covector"], [0.0, -1.0, 0.0], atol=1e-9)


def test_describe_malformed_vector_exits_2(capsys):
    code, _, err = run_cli(capsys, "describe", "--system", "so3_r3",
                           "--point", "0", "0", "--covector", "0", "-1", "0")
    assert code == EXIT_CONFIG
    assert "point" in err


def test_describe_both_covector_and_eta_exits_2(capsys):
    code, _, err = run_cli(capsys, "describe", "--system", "so3_r3",
                           "--point", "0", "0", "1",
                           "--covector", "0", "-1", "0", "--eta", "1", "0", "0",
                           "--s", "0", "0", "0")
    assert code == EXIT_CONFIG
    assert "exactly one" in err


def test_describe_unknown_system_exits_2(capsys):
    code, _, _ = run_cli(capsys, "describe", "--system", "nope",
                         "--point", "0", "0", "1", "--covector", "0", "0", "0")
    assert code == EXIT_CONFIG


def test_describe_to_file(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    code, out, _ = run_cli(capsys, "describe", "--system", "so3_r3",
                           "--point", "0", "0", "1", "--covector", "0", "0", "0",
                           "--out", str(out_path))
    assert code == 0 and out == ""
    report = json.loads(out_path.read_text())
    assert report["dims"]["V"] == 2
    assert "TotallyIsotropic" in report["case_flags"]


# config files ----------------------------------------------------------------

def test_toml_config_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        'system = "so3_r3"\n'
        "point = [0.0, 0.0, 1.0]\n"
        "covector = [0.0, -1.0, 0.0]\n"
        "rank_tol = 1e-9\n"
    )
    code, out, _ = run_cli(capsys, "describe", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["dims"]["V"] == 2
    # flags override the file: an inconsistent point length must fail
    code, _, _ = run_cli(capsys, "describe", "--config", str(cfg), "--point", "0", "0")
    assert code == EXIT_CONFIG


def test_json_config(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "system": "torus2_r4",
        "point": [1.0, 0.0, 1.0, 0.0],
        "covector": [0.3, 1.1, -0.4, 0.8],
    }))
    code, out, _ = run_cli(capsys, "describe", "--config", str(cfg))
    assert code == 0
    report = json.loads(out)
    assert report["dims"]["V"] == 4
    assert "LocallyFree" in report["case_flags"]


def test_config_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"system": "so3_r3", "bogus": 1}))
    code, _, err = run_cli(capsys, "describe", "--config", str(cfg))
    assert code == EXIT_CONFIG and "bogus" in err


# verify ------------------------------------------------------------------------

def test_verify_single_point(capsys):
    code, out, _ = run_cli(capsys, "verify", "--system", "so3_r3",
                           "--point", "0", "0", "1", "--covector", "0", "-1", "0")
    assert code == 0
    names = {line.split("/")[-1].split(" ")[0] for line in out.splitlines()
             if line.startswith("[")}
    assert len(names) >= 12
    assert "all checks passed" in out


def test_verify_zero_tolerance_fails(capsys):
    code, out, _ = run_cli(capsys, "verify", "--system", "so3_r3",
                           "--point", "0", "0", "1", "--covector", "0", "-1", "0",
                           "--check-tol", "0")
    assert code == EXIT_CHECK_FAILED
    assert "FAIL" in out


def test_verify_all_bundled(capsys, monkeypatch):
    monkeypatch.setenv("SLICE_NUM_THREADS", "2")
    code, out, _ = run_cli(capsys, "verify", "--all-bundled", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert all(item["pass"] for item in payload)
    tasks = {item["task"] for item in payload}
    assert len(tasks) == 6  # every bundled golden point
    keys = [(item["task"], item["name"]) for item in payload]
    assert keys == sorted(keys)


# list ----------------------------------------------------------------------------

def test_list_contains_systems(capsys):
    code, out, _ = run_cli(capsys, "list")
    assert code == 0
    assert "so3_r3" in out and "so3_on_so3" in out


def test_list_stable_ordering(capsys):
    _, out1, _ = run_cli(capsys, "list")
    _, out2, _ = run_cli(capsys, "list")
    assert out1 == out2
    keys = [line.split(":")[0] for line in out1.splitlines() if not line.startswith(" ")]
    assert keys == sorted(keys)


def test_list_json_mode(capsys):
    code, out, _ = run_cli(capsys, "list", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    keys = [d["key"] for d in payload]
    assert "so3_r3" in keys
    for d in payload:
        assert {"key", "description", "params", "golden_points"} <= set(d)


def test_describe_out_of_chart_exits_3(capsys):
    # the exponential chart of so3_on_so3 stops short of angle pi
    from sympslice.cli import EXIT_NUMERICAL

    code, _, err = run_cli(capsys, "describe", "--system", "so3_on_so3",
                           "--point", "3.1", "0", "0", "--covector", "1", "0", "0")
    assert code == EXIT_NUMERICAL
    assert "numerical failure" in err


def test_nan_is_a_hard_failure():
    from sympslice.cli import NumericalFailure, _assert_finite

    with pytest.raises(NumericalFailure):
        _assert_finite({"a": [1.0, {"b": float("nan")}]})
    _assert_finite({"a": [1.0, 2.0]})


# report hygiene --------------------------------------------------------------------

def test_report_all_finite():
    cfg = build_run_config(make_parser().parse_args(
        ["describe", "--system", "so3_two_body",
         "--point", "0", "0", "1", "0", "0", "0",
         "--eta", "1", "0", "0", "--s", "0", "0", "0.3", "0.2", "0.5", "0.1"]))
    report = build_report(cfg)
    def walk(node):
        if isinstance(node, float):
            assert np.isfinite(node)
        elif isinstance(node, dict):
            for v in node.values():
                walk(v)
        elif isinstance(node, list):
            for v in node:
                walk(v)
    walk(report)
    assert report["dims"]["V"] == 8
    assert report["case_flags"] == ["Generic"]
    assert np.abs(np.array(report["j_matrix"])).max() > 1e-3
