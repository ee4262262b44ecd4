import io
import json

import pytest

from sumsolve.cli import build_parser, main
from sumsolve.core import parse_instance
from sumsolve.database import list_solves, session_scope
from sumsolve.p4 import parse_graph_dump
from tests.conftest import oracle_yes


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_gen_then_solve(capsys, tmp_path):
    path = tmp_path / "instance.txt"
    code, _, _ = run(capsys, "gen", "--seed", "3", "--n", "10", "--kind", "uniform",
                     "--bit-width", "8", "--out", str(path))
    assert code == 0
    instance = parse_instance(path.read_text())
    assert instance.n == 10

    code, out, _ = run(capsys, "solve", "--instance", str(path), "--algo", "mitm", "--format", "json")
    assert code == 0
    record = json.loads(out)
    assert record["answer"] == oracle_yes(instance)
    assert record["n"] == 10


def test_solve_from_stdin(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("4 12\n3 5 7 11\n"))
    code, out, _ = run(capsys, "solve", "--instance", "-", "--algo", "ss")
    assert code == 0
    assert "answer: YES" in out
    assert "witness: 1 2" in out


def test_gen_is_deterministic(capsys):
    _, first, _ = run(capsys, "gen", "--seed", "9", "--n", "12")
    _, second, _ = run(capsys, "gen", "--seed", "9", "--n", "12")
    _, other, _ = run(capsys, "gen", "--seed", "10", "--n", "12")
    assert first == second
    assert first != other


def test_solve_is_deterministic(capsys):
    argv = ["solve", "--seed", "5", "--n", "12", "--algo", "rep", "--format", "json", "--set", "repetitions=2"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_malformed_instance_exit_code(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 5\n1 x 3\n")
    code, out, err = run(capsys, "solve", "--instance", str(path))
    assert code == 3
    assert out == ""
    assert "error: line 2, column 3" in err


def test_usage_errors_exit_code(capsys, tmp_path):
    assert run(capsys, "solve", "--n", "8", "--set", "bogus=1")[0] == 2
    assert run(capsys, "solve", "--n", "8", "--set", "mu")[0] == 2
    assert run(capsys, "solve", "--n", "8", "--set", "mu=0.9")[0] == 2
    assert run(capsys, "solve", "--instance", str(tmp_path / "missing.txt"))[0] == 2


def test_bad_choice_is_rejected_by_the_parser():
    with pytest.raises(SystemExit) as e:
        build_parser().parse_args(["solve", "--algo", "quantum"])
    assert e.value.code == 2


def test_experiment_csv(capsys):
    code, out, _ = run(capsys, "experiment", "entropy", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("kind,")
    assert lines[-1].startswith("summary,")


def test_verify_ineq_single_point(capsys):
    code, out, _ = run(capsys, "verify-ineq", "--lam", "0.5", "--sigma", "0.5", "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["suite"] == "ov-inequality"
    assert report["rows"][0]["tight"]
    assert report["summary"]["passed"]


def test_cover(capsys):
    code, out, _ = run(capsys, "cover", "--d", "8", "--p", "2", "--q", "2", "--format", "json")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["valid"] is True
    assert row["d"] == 8


def test_cover_rejects_bad_dimensions(capsys):
    assert run(capsys, "cover", "--d", "8", "--p", "5", "--q", "5")[0] == 3


def test_p4_dump(capsys, tmp_path):
    path = tmp_path / "graph.txt"
    code, _, _ = run(capsys, "p4-dump", "--seed", "2", "--n", "16", "--out", str(path))
    assert code == 0
    vertices, edges = parse_graph_dump(path.read_text())
    assert vertices
    assert all(u < v for u, v in edges)


def test_metrics_file(capsys, tmp_path):
    path = tmp_path / "metrics.prom"
    code, _, _ = run(capsys, "solve", "--n", "8", "--algo", "mitm", "--metrics-file", str(path))
    assert code == 0
    text = path.read_text()
    assert "sumsolve_solves_total" in text
    assert "sumsolve_peak_payload_entries" in text


def test_db_ledger(capsys, sqlite_url):
    code, _, _ = run(capsys, "solve", "--n", "8", "--algo", "bruteforce", "--db", sqlite_url)
    assert code == 0
    with session_scope(sqlite_url) as db:
        assert [r.algorithm for r in list_solves(db)] == ["bruteforce"]
