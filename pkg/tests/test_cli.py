import json
import subprocess
import sys

import pytest

from bergman_calculus import cli
from bergman_calculus.cli import (
    EXIT_GOLDEN, EXIT_OK, EXIT_REGIME, EXIT_USAGE, GOLDEN_TABLES, RunConfig, golden_mismatches,
    load_golden, main, parse_config, semantic_argv,
)


def _json(capsys, argv):
    code = main(argv + ["--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_hsnorm_json(capsys):
    code, out = _json(capsys, ["hsnorm", "--a", "2"])
    assert code == EXIT_OK and out["coefficient"] == "1/64"


def test_output_is_deterministic(capsys):
    main(["compose", "--charge", "-2", "--format", "json"])
    a = capsys.readouterr().out
    main(["compose", "--charge", "-2", "--format", "json"])
    assert capsys.readouterr().out == a


def test_text_and_latex_render(capsys):
    for fmt in ("text", "latex"):
        assert main(["hsnorm", "--a", "1", "--format", fmt]) == EXIT_OK
        assert capsys.readouterr().out.strip()


def test_usage_errors_exit_1(capsys):
    assert main(["bogus"]) == EXIT_USAGE
    assert main(["hsnorm", "--nonsense"]) == EXIT_USAGE
    assert main(["compose", "--charge", "1"]) == EXIT_USAGE
    assert main(["hsnorm", "--a", "1", "--golden", "naya-missing"]) == EXIT_USAGE


def test_unprojected_expand_is_a_regime_violation(capsys):
    assert main(["expand", "--level", "2", "--cutoff", "-5"]) == EXIT_REGIME
    assert "regime" in capsys.readouterr().err


def test_golden_match_and_mismatch(capsys, monkeypatch):
    assert main(["hsnorm", "--a", "1", "--golden", "naya"]) == EXIT_OK
    table = load_golden("naya")
    table["cases"][0]["expect"]["coefficient"] = "1/5"
    monkeypatch.setattr(cli, "load_golden", lambda name: table)
    assert main(["hsnorm", "--a", "1", "--golden", "naya"]) == EXIT_GOLDEN
    assert "1/5" in capsys.readouterr().err


def test_golden_without_matching_case(capsys):
    assert main(["hsnorm", "--a", "7", "--golden", "naya"]) == EXIT_USAGE


def test_golden_mismatch_paths():
    assert golden_mismatches({"a": {"b": 1}}, {"a": {"b": 1, "c": 2}}) == []
    assert golden_mismatches({"a": {"b": 1}}, {"a": {"b": 2}}) == ["/a/b: expected 1, got 2"]
    assert golden_mismatches({"x": 1}, {}) == ["/x: missing"]


def test_semantic_argv_drops_presentation_flags():
    argv = ["hsnorm", "--a", "1", "--format", "json", "--trace", "--golden", "naya"]
    assert semantic_argv(argv) == ["hsnorm", "--a", "1"]


def test_run_config_round_trip():
    cfg = parse_config(["expand", "--level", "2", "--cutoff", "-5", "--project", "2,0"])
    assert cfg.project == (2, 0)
    again = RunConfig.from_json(json.loads(json.dumps(cfg.to_json())))
    assert again == cfg


def test_every_golden_table_loads():
    for name in GOLDEN_TABLES:
        t = load_golden(name)
        assert t["cases"] and 1 <= t["criterion"] <= 12


@pytest.mark.slow
def test_golden_runner_passes(capsys):
    code, out = _json(capsys, ["golden"])
    assert code == EXIT_OK, [c for c in out["cases"] if not c["pass"]]


def test_console_script_module():
    r = subprocess.run([sys.executable, "-m", "bergman_calculus.cli", "hsnorm", "--a", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "1/4" in r.stdout
