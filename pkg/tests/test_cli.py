import json
import subprocess
import sys

import pytest

from conftest import FIXTURES
from shexi import Typing, cli

FIG1 = str(FIXTURES / "fig1.shexi")
FIG2 = str(FIXTURES / "fig2.nt")


def run(capsys, *args):
    code = cli.run(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_ok(capsys):
    code, out, _ = run(capsys, "check", FIG1)
    assert code == 0 and "verdict: ok" in out


def test_check_negative_cycle_prints_witness(capsys):
    code, out, _ = run(capsys, "check", str(FIXTURES / "s2.shexi"))
    assert code == 2
    assert "negative_cycle" in out and "y4" in out and "y5" in out


def test_check_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.shexi"
    bad.write_text("a -> {")
    code, _, err = run(capsys, "check", str(bad))
    assert code == 1 and "line 1" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "check", str(tmp_path / "nope.shexi"))
    assert code == 1 and "error" in err


def test_stratify(capsys):
    code, out, _ = run(capsys, "stratify", FIG1)
    assert code == 0
    assert "strata: 1" in out
    assert "ColouredCircle -> Circle" in out
    assert "digraph hierarchy" in out and "digraph dependencies" in out


def test_stratify_ill_defined(capsys):
    code, _, _ = run(capsys, "stratify", str(FIXTURES / "s3.shexi"))
    assert code == 2


def test_validate_inline_map(capsys):
    code, out, _ = run(capsys, "validate", "--schema", FIG1, "--data", FIG2, "--map", "f1 @ ColouredCircle")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdicts"] == [{"node": "<f1>", "label": "ColouredCircle", "conformant": True}]
    assert doc["mode"] == "descendant-closure"


def test_validate_map_file_and_modes(capsys):
    smap = str(FIXTURES / "fig.smap")
    code, _, _ = run(capsys, "validate", "--schema", FIG1, "--data", FIG2, "--map", smap)
    assert code == 0
    code, out, _ = run(capsys, "validate", "--schema", FIG1, "--data", FIG2, "--map", "f1 @ Circle", "--mode", "literal-def4")
    assert code == 3 and json.loads(out)["mode"] == "literal-def4"


def test_validate_empty_map(capsys):
    code, out, _ = run(capsys, "validate", "--schema", FIG1, "--data", FIG2, "--map", "")
    assert code == 0 and json.loads(out)["verdicts"] == []


def test_validate_non_conformant(capsys):
    code, _, _ = run(capsys, "validate", "--schema", FIG1, "--data", FIG2, "--map", "a2 @ Radius")
    assert code == 3


def test_validate_bad_label_and_bad_data(capsys, tmp_path):
    code, _, _ = run(capsys, "validate", "--schema", FIG1, "--data", FIG2, "--map", "f1 @ Nope")
    assert code == 1
    bad = tmp_path / "bad.nt"
    bad.write_text("<a> <p>\n")
    code, _, _ = run(capsys, "validate", "--schema", FIG1, "--data", str(bad), "--map", "")
    assert code == 1


def test_validate_ill_defined_schema(capsys):
    code, _, _ = run(capsys, "validate", "--schema", str(FIXTURES / "s2.shexi"), "--data", FIG2, "--map", "")
    assert code == 2


def test_dump_typing_and_output_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "validate", "--schema", FIG1, "--data", FIG2, "--map", "f2 @ Circle", "--dump-typing", "--output", str(target))
    assert code == 0 and out == ""
    doc = json.loads(target.read_text())
    assert ["<f2>", "Figure"] in doc["typing"]


def small_case(tmp_path):
    schema = tmp_path / "s.shexi"
    schema.write_text("y1 -> { p @T_str }\nT_str -> LITERAL string\n")
    data = tmp_path / "g.nt"
    data.write_text('<n> <urn:p:p> "v" .\n')
    return str(schema), str(data)


def test_oracle_check_agrees(capsys, tmp_path):
    schema, data = small_case(tmp_path)
    code, out, _ = run(capsys, "validate", "--schema", schema, "--data", data, "--map", "n @ y1", "--oracle-check")
    assert code == 0 and json.loads(out)["oracle"] == {"status": "agree"}


def test_oracle_check_skipped_when_too_big(capsys):
    code, out, _ = run(capsys, "validate", "--schema", FIG1, "--data", FIG2, "--map", "f1 @ Figure", "--oracle-check")
    assert code == 0 and json.loads(out)["oracle"]["status"] == "skipped"


def test_oracle_disagreement_exit_code(capsys, tmp_path, monkeypatch):
    schema, data = small_case(tmp_path)
    monkeypatch.setattr(cli, "brute_force_maximal_typing", lambda *a, **k: Typing())
    code, out, err = run(capsys, "validate", "--schema", schema, "--data", data, "--map", "n @ y1", "--oracle-check")
    assert code == 4 and "disagrees" in err


def test_runs_are_deterministic(capsys):
    args = ["validate", "--schema", FIG1, "--data", FIG2, "--map", "f1 @ ALL", "--dump-typing"]
    first = run(capsys, *args)[:2]
    second = run(capsys, *args)[:2]
    assert first == second


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "shexi", "check", FIG1], capture_output=True, text=True)
    assert proc.returncode == 0 and "verdict: ok" in proc.stdout
