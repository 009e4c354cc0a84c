import csv
import json

import numpy as np
import pytest

import tribell.cli as cli
from tribell.cli import main
from tribell.qcore import Observable, PureState
from tribell.seesaw import Solution


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_list_prints_all_entries(capsys):
    code, out, _ = run(capsys, "list")
    lines = out.strip().splitlines()
    assert code == 0
    assert len(lines) == 46
    assert lines[0].split() == ["1", "1", "A", "+", "B", "-", "AB", "+", "C",
                                "-", "AC", "-", "BC", "+", "ABC"]
    assert lines[45].startswith("46  10  3 A")


def test_show_known_row(capsys):
    code, out, _ = run(capsys, "show", "2")
    assert code == 0
    assert "ABC + abC + aBc - Abc" in out
    assert "local maximum  2" in out


@pytest.mark.parametrize("argv", [
    ("show", "47"),
    ("show", "zero"),
    ("local", "A@"),
    ("qmax", "0"),
    (),
    ("frobnicate",),
])
def test_usage_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert err


def test_help_exits_zero():
    with pytest.raises(SystemExit) as excinfo:
        main(["--help"])
    assert excinfo.value.code == 0


def test_local_catalog_and_expression(capsys):
    code, out, _ = run(capsys, "local", "46")
    assert code == 0
    assert "local bound  10" in out
    code, out, _ = run(capsys, "local", "A")
    assert "local bound  1" in out
    code, out, _ = run(capsys, "local", "ABC+abC+aBc-Abc")
    assert "local bound  2" in out
    assert "strategy" in out


def test_qmax_text_output(capsys):
    code, out, _ = run(capsys, "qmax", "26", "--restarts", "40")
    assert code == 0
    assert "quantum maximum  7.9282032302" in out
    assert "class pair        (5, 11)" in out
    assert out.count("bloch (") == 6


def test_qmax_is_reproducible(capsys):
    args = ("qmax", "2", "--seed", "7", "--restarts", "30", "--json")
    code_a, out_a, _ = run(capsys, *args)
    code_b, out_b, _ = run(capsys, *args)
    assert code_a == code_b == 0
    assert out_a == out_b
    doc = json.loads(out_a)
    assert doc["schema"] == cli.SOLUTION_SCHEMA
    assert doc["id"] == 2
    assert doc["parameters"]["seed"] == 7
    assert len(doc["state"]["re"]) == 8
    assert len(doc["measurements"]) == 6
    assert doc["classes"]["entanglement_tol"] > 0


def test_classify_fixture_rows(capsys):
    code, out, _ = run(capsys, "classify", "26")
    assert code == 0
    assert "class pair        (5, 11)" in out
    _, out, _ = run(capsys, "classify", "1")
    assert "class pair        (0, 0)" in out
    _, out, _ = run(capsys, "classify", "43", "--json")
    doc = json.loads(out)
    assert doc["schema"] == cli.CLASSES_SCHEMA
    assert [doc["entanglement_class"], doc["incompatibility_class"]] == [2, 4]


def test_classify_from_solution_document(capsys, tmp_path):
    code, out, _ = run(capsys, "qmax", "43", "--restarts", "40", "--json")
    assert code == 0
    path = tmp_path / "solution.json"
    path.write_text(out)
    code, out, _ = run(capsys, "classify", "43", "--solution", str(path))
    assert code == 0
    assert "class pair        (2, 4)" in out


def test_classify_rejects_bad_solution_documents(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"schema": "something-else/9"}')
    code, _, err = run(capsys, "classify", "3", "--solution", str(path))
    assert code == 1 and "schema" in err
    code, _, err = run(capsys, "classify", "3", "--solution", str(tmp_path / "gone"))
    assert code == 1


def test_npa_text_and_json(capsys):
    code, out, _ = run(capsys, "npa", "2", "--level", "1ab")
    assert code == 0
    assert "level        1+AB" in out
    assert "upper bound  4.0000" in out
    code, out, _ = run(capsys, "npa", "AB + Ab + aB - ab", "--level", "q1", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == cli.NPA_SCHEMA
    assert doc["id"] is None
    assert doc["bound"] == pytest.approx(2 * np.sqrt(2), abs=1e-5)


def test_npa_unreachable_level_is_usage_error(capsys):
    code, _, err = run(capsys, "npa", "2", "--level", "q1")
    assert code == 1
    assert "unreachable" in err


def test_npa_iteration_cap_exits_3(capsys):
    code, _, err = run(capsys, "npa", "2", "--level", "1ab", "--max-iterations", "50")
    assert code == 3
    assert "no convergence" in err


def test_tables_full_run(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "2")
    out_path = tmp_path / "report.json"
    csv_path = tmp_path / "report.csv"
    code, out, _ = run(capsys, "tables", "--restarts", "40",
                       "--out", str(out_path), "--csv", str(csv_path))
    assert code == 0
    assert "0 mismatches" in out

    report = json.loads(out_path.read_text())
    assert report["schema"] == cli.REPORT_SCHEMA
    assert report["metadata"]["workers"] == 2
    assert [row["id"] for row in report["rows"]] == list(range(1, 47))
    for row in report["rows"]:
        for cell in (row["local_bound"], row["seesaw_value"], row["fixture_value"]):
            matches = abs(cell["value"] - cell["expected"]) <= cell["tolerance"]
            assert cell["status"] == ("match" if matches else "mismatch")
        assert row["npa_bounds"] == {"status": "skipped"}
    assert report["summary"]["mismatches"] == 0

    with open(csv_path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert len(rows) == 47
    assert rows[0][0] == "id"


def test_tables_detects_mismatches(capsys, monkeypatch):
    state = PureState.from_vector(np.eye(8)[0])
    fake = Solution(state=state,
                    measurements=tuple(Observable.identity(1) for _ in range(6)),
                    value=0.0, sweeps_used=0, restart_index=0)
    monkeypatch.setattr(cli, "quantum_maximum", lambda expr, params: fake)
    monkeypatch.setenv(cli.WORKERS_ENV, "2")
    code, out, _ = run(capsys, "tables", "--restarts", "2")
    assert code == 2
    assert "mismatch" in out


def test_tables_rejects_bad_worker_count(capsys, monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "many")
    code, _, err = run(capsys, "tables", "--restarts", "2")
    assert code == 1
    assert cli.WORKERS_ENV in err
