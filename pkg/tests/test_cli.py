import copy
import json

import pytest

from disclab import cli, suites
from disclab.errors import ComparisonError, ParameterError

SMALL = {"bessel.nu_list": [8, 16], "bessel.samples": 64, "bessel.prodj_nu": [32, 64, 128],
         "bessel.oracle_points": 20}


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = out / "cfg.json"
    cfg.write_text(json.dumps(SMALL))
    code = cli.main(["run", "bessel-check", "--config", str(cfg), "--seed", "3", "--out", str(out), "--no-figures"])
    return code, out, json.loads((out / "bessel-check_report.json").read_text())


def test_run_exit_and_schema(small_run):
    code, out, rep = small_run
    assert code == 0
    assert set(rep) == {"suite", "config", "checks", "runtime_seconds"}
    assert rep["suite"] == "bessel-check"
    ids = [c["id"] for c in rep["checks"]]
    assert ids == sorted(ids)
    assert {"c01.bessel_accuracy", "c05.vdc_uniformity", "c06.prodj", "c13.output_digest"} <= set(ids)
    for c in rep["checks"]:
        assert set(c) == {"id", "observed", "expected", "tolerance", "status"}
        assert c["status"] in ("pass", "fail", "info")
    assert (out / "bessel-check_timing.json").exists()


def test_defaults_written_back(small_run):
    _, _, rep = small_run
    cfg = rep["config"]
    assert cfg["seed"] == 3
    assert cfg["bessel.samples"] == 64
    assert set(cfg) == set(suites.default_config("bessel-check")) | {"seed"}


def test_rerun_is_byte_identical(small_run, tmp_path):
    _, out, _ = small_run
    suites.run_suite("bessel-check", SMALL, 3, tmp_path, figures=False)
    for name in ("bessel-check_report.json", "bessel_vdc.csv", "bessel_prodj.csv"):
        assert (tmp_path / name).read_bytes() == (out / name).read_bytes()


def test_nu_option(tmp_path):
    assert cli._parse_nu("8..64") == [8, 16, 32, 64]
    assert cli._parse_nu("1.5,3") == [1.5, 3.0]


def test_unknown_suite(tmp_path, capsys):
    assert cli.main(["run", "foo", "--out", str(tmp_path)]) != 0
    assert "usage" in capsys.readouterr().err


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["run", "bessel-check", "--out", str(blocker / "sub")]) != 0


def test_unknown_config_key(tmp_path):
    with pytest.raises(ParameterError):
        suites.run_suite("bessel-check", {"bessel.bogus": 1}, 0, tmp_path)


def test_compare_identical(small_run):
    rep = small_run[2]
    summary = cli.compare_reports(rep, copy.deepcopy(rep))
    assert not summary["flagged"]
    assert all(row["drift"] == 0 for row in summary["checks"])


def test_compare_perturbed(small_run):
    rep = small_run[2]
    cur = copy.deepcopy(rep)
    chk = next(c for c in cur["checks"] if c["id"] == "c01.bessel_accuracy")
    key = next(k for k, v in chk["observed"].items() if isinstance(v, float) and v != 0)
    chk["observed"][key] *= 1.5
    summary = cli.compare_reports(rep, cur)
    row = next(r for r in summary["checks"] if r["id"] == "c01.bessel_accuracy")
    assert row["flagged"] and summary["flagged"]


def test_compare_missing_check(small_run):
    rep = small_run[2]
    cur = copy.deepcopy(rep)
    cur["checks"] = [c for c in cur["checks"] if c["id"] != "c06.prodj"]
    row = next(r for r in cli.compare_reports(rep, cur)["checks"] if r["id"] == "c06.prodj")
    assert row["structural"] == "missing in current" and row["flagged"]


def test_compare_mismatched_config(small_run):
    rep = small_run[2]
    cur = copy.deepcopy(rep)
    cur["config"]["bessel.samples"] = 128
    with pytest.raises(ComparisonError):
        cli.compare_reports(rep, cur)


def test_compare_command(small_run, tmp_path, capsys):
    _, out, rep = small_run
    path = out / "bessel-check_report.json"
    assert cli.main(["compare", str(path), str(path)]) == 0
    cur = copy.deepcopy(rep)
    cur["config"]["seed"] = 4
    other = tmp_path / "other.json"
    other.write_text(json.dumps(cur))
    assert cli.main(["compare", str(path), str(other)]) == 2
    assert "different configurations" in capsys.readouterr().err
