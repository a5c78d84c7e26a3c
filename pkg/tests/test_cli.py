import json
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from cli import load_config, load_family, main
from verification_report import (CHECKS, CheckRecord, ConfigError, ReportError, RunConfig, SkipCheck,
                                 VerificationReport, checks_for, emit_report, jsonable, run_check)


@pytest.fixture
def no_config(tmp_path):
    return str(tmp_path / "none.json")


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in ("PRIME", "T", "EXT_DEGREES", "JOBS", "CACHE", "REPORT"):
        monkeypatch.delenv(f"OCTIC_{key}", raising=False)


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()
        assert config.prime == 7
        assert config.t == "7"
        assert config.t_value == Fraction(7)
        assert config.ext_degrees == [1, 2]

    def test_normalisation(self):
        config = RunConfig(prime=11, t=" 22/4 ", ext_degrees=[3, 1, 3])
        assert config.t == "11/2"
        assert config.ext_degrees == [1, 3]

    @pytest.mark.parametrize("settings", [
        {"prime": 5},
        {"prime": 9},
        {"t": "1/0"},
        {"t": "abc"},
        {"jobs": 0},
        {"ext_degrees": []},
        {"ext_degrees": [0, 1]},
        {"ext_degrees": [4]},
        {"subcommand": "everything"},
        {"oracle_limit": 0},
    ])
    def test_rejected_settings(self, settings):
        with pytest.raises(ValidationError):
            RunConfig(**settings)

    def test_large_degrees_need_permission(self):
        assert RunConfig(ext_degrees=[4], allow_large=True).ext_degrees == [4]

    def test_echo_leaves_out_output_locations(self):
        echo = RunConfig(report="out.json", cache="counts.tsv").echo()
        assert "report" not in echo and "cache" not in echo and "timing" not in echo
        assert echo["prime"] == 7


class TestLoadConfig:
    def test_environment(self, monkeypatch, no_config):
        monkeypatch.setenv("OCTIC_PRIME", "11")
        monkeypatch.setenv("OCTIC_EXT_DEGREES", "2,1")
        config = load_config(no_config)
        assert config.prime == 11
        assert config.ext_degrees == [1, 2]
        assert config.t == "11"

    def test_file_beats_environment_and_overrides_beat_file(self, monkeypatch, tmp_path):
        monkeypatch.setenv("OCTIC_PRIME", "11")
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"prime": 13, "jobs": 3}))
        config = load_config(str(path))
        assert (config.prime, config.jobs) == (13, 3)
        config = load_config(str(path), {"prime": 17, "jobs": None})
        assert (config.prime, config.jobs) == (17, 3)

    def test_bad_sources(self, monkeypatch, tmp_path, no_config):
        broken = tmp_path / "broken.json"
        broken.write_text("{prime: 7")
        with pytest.raises(ConfigError):
            load_config(str(broken))
        listed = tmp_path / "list.json"
        listed.write_text("[7]")
        with pytest.raises(ConfigError):
            load_config(str(listed))
        monkeypatch.setenv("OCTIC_JOBS", "many")
        with pytest.raises(ConfigError):
            load_config(no_config)


def test_load_family(tmp_path):
    assert len(load_family("paper-octic")) == 8
    assert load_family("builtin-octic") == load_family("paper-octic")
    with pytest.raises(ConfigError):
        load_family(str(tmp_path / "missing.txt"))
    bad = tmp_path / "bad.txt"
    bad.write_text("1 0 0\n")
    with pytest.raises(ConfigError):
        load_family(str(bad))


def test_jsonable():
    frame = pd.DataFrame({"a": [np.int64(1)], "b": [Fraction(1, 2)]})
    value = {
        1: Fraction(1, 2),
        "set": {3, 1},
        "int": np.int64(4),
        "float": np.float64(0.5),
        "flag": np.bool_(True),
        "complex": complex(1, -2),
        "tuple": (1, (2, 3)),
        "frame": frame,
    }
    assert jsonable(value) == {
        "1": "1/2",
        "set": [1, 3],
        "int": 4,
        "float": 0.5,
        "flag": True,
        "complex": [1.0, -2.0],
        "tuple": [1, [2, 3]],
        "frame": {"columns": ["a", "b"], "index": [0], "rows": [[1, "1/2"]]},
    }
    json.dumps(jsonable(value))


class TestRunCheck:
    @staticmethod
    def check(handler):
        return {"id": "demo.check", "anchor": "demo", "subcommand": "specseq", "handler": handler}

    def test_pass(self):
        record = run_check(self.check(lambda c, ctx: {"ok": True, "value": Fraction(1, 3)}), RunConfig(), None)
        assert record.status == "pass"
        assert record.data == {"value": "1/3"}

    def test_missing_ok_is_a_failure(self):
        assert run_check(self.check(lambda c, ctx: {"value": 1}), RunConfig(), None).status == "fail"

    def test_skip(self):
        def handler(config, ctx):
            raise SkipCheck("not applicable")

        record = run_check(self.check(handler), RunConfig(), None)
        assert record.status == "skipped"
        assert record.data == {"reason": "not applicable"}

    def test_exception_becomes_a_failure(self):
        def handler(config, ctx):
            raise ValueError("boom")

        record = run_check(self.check(handler), RunConfig(), None)
        assert record.status == "fail"
        assert record.data["error"] == "ValueError: boom"


def test_check_registry():
    assert [c["id"] for c in checks_for("specseq")] == ["specseq.ledger"]
    assert len(checks_for("verify-all")) == len(CHECKS) == 16
    assert {c["subcommand"] for c in CHECKS.values()} == {
        "signature", "degeneracies", "jinv", "resolve", "count", "zeta", "specseq"}
    with pytest.raises(ConfigError):
        checks_for("everything")


def test_report_payload():
    report = VerificationReport(checks=[
        CheckRecord(id="a", anchor="x", status="pass", elapsed=0.12345),
        CheckRecord(id="b", anchor="y", status="skipped"),
    ])
    assert report.overall == "pass"
    assert report.to_payload()["checks"][0]["elapsed"] == 0.123
    assert "elapsed" not in report.to_payload(timing=False)["checks"][0]
    report.checks.append(CheckRecord(id="c", anchor="z", status="fail"))
    assert report.overall == "fail"
    assert [c.id for c in report.failures] == ["c"]


def test_emit_report(tmp_path):
    report = VerificationReport()
    path = tmp_path / "nested" / "report.json"
    text = emit_report(report, str(path))
    assert path.read_text() == text
    assert json.loads(text)["overall"] == "pass"
    with pytest.raises(ReportError):
        emit_report(report, str(tmp_path))


def test_specseq_subcommand(tmp_path, no_config):
    path = tmp_path / "report.json"
    assert main(["specseq", "--no-timing", "--config", no_config, "--report", str(path)]) == 0
    payload = json.loads(path.read_text())
    assert payload["overall"] == "pass"
    [record] = payload["checks"]
    assert record["id"] == "specseq.ledger"
    assert record["data"]["row_q3"] == [0, 4, 0]
    assert record["data"]["h3_equals_5"] == "constraints unsatisfiable"
    assert "elapsed" not in record
    assert payload["config"]["prime"] == 7


def test_reports_are_reproducible(tmp_path, no_config):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for path in (first, second):
        assert main(["specseq", "--no-timing", "--config", no_config, "--report", str(path)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_report_to_stdout(capsys, no_config):
    assert main(["degeneracies", "--no-timing", "--config", no_config]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert {c["id"]: c["status"] for c in payload["checks"]} == {
        "degeneracies.set": "pass", "degeneracies.fivefold": "pass"}
    assert payload["checks"][0]["data"]["values"] == ["0", "1", "2"]


def test_builtin_arrangement_by_name(capsys, no_config):
    assert main(["signature", "--arrangement", "paper-octic", "--prime", "7", "--no-timing",
                 "--config", no_config]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["config"]["arrangement"] == "paper-octic"
    assert {c["status"] for c in payload["checks"]} == {"pass"}
    assert RunConfig().arrangement == "paper-octic"


def test_generic_parameter_resolves_without_the_line(capsys, no_config):
    assert main(["resolve", "--t", "5", "--no-timing", "--config", no_config]) == 0
    payload = json.loads(capsys.readouterr().out)
    statuses = {c["id"]: c["status"] for c in payload["checks"]}
    assert statuses == {"resolve.pipeline": "pass", "resolve.bruteforce": "skipped", "resolve.overlap": "pass"}
    pipeline = payload["checks"][0]["data"]
    assert pipeline["line_present"] is False


def test_custom_strata(tmp_path, no_config):
    strata = tmp_path / "strata.json"
    strata.write_text(json.dumps({"components": {"X": [1, 0, 1]}}))
    path = tmp_path / "report.json"
    assert main(["specseq", "--strata", str(strata), "--config", no_config, "--report", str(path)]) == 0
    record = json.loads(path.read_text())["checks"][0]
    assert record["data"]["search"] == "unique"


@pytest.mark.parametrize("argv", [
    ["specseq", "--prime", "5"],
    ["specseq", "--prime", "15"],
    ["specseq", "--t", "x"],
    ["specseq", "--arrangement", "missing-arrangement.txt"],
])
def test_configuration_errors_exit_with_2(argv, no_config):
    assert main(argv + ["--config", no_config]) == 2


def test_unwritable_report_exits_with_2(tmp_path, no_config):
    assert main(["specseq", "--config", no_config, "--report", str(tmp_path)]) == 2


@pytest.mark.slow
def test_verify_all(tmp_path, no_config):
    path = tmp_path / "report.json"
    assert main(["verify-all", "--no-timing", "--config", no_config, "--report", str(path),
                 "--cache", str(tmp_path / "counts.tsv")]) == 0
    payload = json.loads(path.read_text())
    assert len(payload["checks"]) == 16
    assert all(c["status"] in ("pass", "skipped") for c in payload["checks"])
