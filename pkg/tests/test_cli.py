"""Command-line interface: exit codes, artifacts, determinism, precedence."""
from __future__ import annotations

import json

import pytest

from schwarzfd.cli import main


def _run(args, out):
    return main(args + ["--out", str(out)])


def _summary(out):
    with open(out / "summary.json") as fh:
        return json.load(fh)


def test_exact_passes_and_writes_artifacts(tmp_path):
    assert _run(["exact"], tmp_path) == 0
    s = _summary(tmp_path)
    assert s["verdict"] == "pass"
    assert s["command"] == "exact"
    assert (tmp_path / "trajectory.csv").exists()
    assert s["checks"]["scheme_max"] <= 1e-10


def test_exact_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    assert _run(["exact"], a) == 0
    assert _run(["exact"], b) == 0
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()


def test_solve_passes(tmp_path):
    assert _run(["solve", "--n", "1..10"], tmp_path) == 0
    s = _summary(tmp_path)
    assert s["checks"]["scheme_max"] <= 1e-8


def test_verify_integrals_needs_trajectory(tmp_path):
    assert _run(["verify-integrals"], tmp_path) == 2


def test_verify_integrals_after_exact(tmp_path):
    assert _run(["exact"], tmp_path) == 0
    assert _run(["verify-integrals"], tmp_path) == 0
    with open(tmp_path / "integrals.json") as fh:
        reports = json.load(fh)
    assert [r["name"] for r in reports] == ["j1", "j2", "j3", "j4", "c",
                                            "ctilde"]
    j3 = reports[2]
    assert j3["mean"] == pytest.approx(0.01, abs=1e-12)


def test_singular_passes(tmp_path):
    assert _run(["singular", "--eps", "0.25"], tmp_path) == 0
    s = _summary(tmp_path)
    assert s["verdict"] == "pass"


def test_backlund_check_passes(tmp_path):
    assert _run(["backlund-check"], tmp_path) == 0
    with open(tmp_path / "backlund.json") as fh:
        rep = json.load(fh)
    assert rep["forward"]["verdict"] == "compatible"
    assert rep["backward"]["verdict"] == "compatible"


def test_numerical_failure_reports_error(tmp_path):
    # a window across the ordinate pole cannot form a monotone trajectory
    code = _run(["exact", "--rho", "1", "--n", "1..20"], tmp_path)
    assert code == 1
    s = _summary(tmp_path)
    assert s["verdict"] == "error"
    assert s["error"]["type"]
    assert "checks" not in s


def test_malformed_range_is_config_error(tmp_path):
    assert _run(["exact", "--n", "20..1"], tmp_path) == 2


def test_nonpositive_eps_is_config_error(tmp_path):
    assert _run(["exact", "--eps", "-0.5"], tmp_path) == 2


def test_config_file_applies(tmp_path):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({"eps": 0.001, "rho": 33.0}))
    assert _run(["exact", "--config", str(cfgfile)], tmp_path) == 0
    s = _summary(tmp_path)
    assert s["config"]["eps"] == pytest.approx(0.001)
    assert s["config"]["rho"] == pytest.approx(33.0)


def test_flag_overrides_config_file(tmp_path):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({"eps": 0.001, "rho": 33.0}))
    assert _run(["exact", "--config", str(cfgfile), "--eps", "0.01"],
                tmp_path) == 0
    s = _summary(tmp_path)
    assert s["config"]["eps"] == pytest.approx(0.01)
    assert s["config"]["rho"] == pytest.approx(33.0)


def test_unknown_config_key_rejected(tmp_path):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({"epsilon": 0.001}))
    assert _run(["exact", "--config", str(cfgfile)], tmp_path) == 2


def test_lowercase_family_flags_alias(tmp_path):
    assert _run(["exact", "--a", "1.5", "--b", "2.5"], tmp_path) == 0
    s = _summary(tmp_path)
    assert s["config"]["A"] == pytest.approx(1.5)
    assert s["config"]["B"] == pytest.approx(2.5)


def test_symmetry_table_passes(tmp_path):
    assert _run(["symmetry-table"], tmp_path) == 0
    with open(tmp_path / "symmetry.json") as fh:
        rows = json.load(fh)
    assert len(rows) == 27
    s = _summary(tmp_path)
    assert s["checks"]["single_flows_all_fail"] is True
    assert s["checks"]["strongest_witness"] > 1e-3


def test_convergence_passes_and_records_order(tmp_path):
    assert _run(["convergence"], tmp_path) == 0
    s = _summary(tmp_path)
    errs = s["checks"]["errors"]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert s["checks"]["observed_order"] >= 1.0
