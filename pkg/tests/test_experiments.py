import csv
import io
import json

import pytest

from sumsolve.core import SubsetSumInstance
from sumsolve.database import list_solves, session_scope
from sumsolve.errors import UsageError
from sumsolve.experiments import (
    SUITES,
    ExperimentHarness,
    format_record,
    format_report,
    run_experiment,
    run_solve,
)
from sumsolve.models import ExperimentRow
from sumsolve.schemas import ExperimentConfig


def harness(**fields):
    return ExperimentHarness(ExperimentConfig(**{"seed": 7, "trials": 2, "n": 16, **fields}))


# Solves

@pytest.mark.parametrize("algorithm", ["bruteforce", "mitm", "ss", "budget"])
def test_run_solve_exact_algorithms(algorithm, small_instance):
    record = harness().run_solve(small_instance, algorithm)
    assert record.answer
    assert record.witness == [1, 2]
    assert record.achieved_sum == 12
    assert record.algorithm == algorithm
    assert record.wall_time_s is None


def test_run_solve_record_fields():
    instance = SubsetSumInstance((5,) * 12, 30)
    record = run_solve(ExperimentConfig(seed=2, timing=True), instance, "rep")
    assert record.answer
    assert record.branch == "win-win"
    assert len(record.mixers) == 3
    assert record.wall_time_s is not None
    assert list(record.counters) == sorted(record.counters)
    assert record.peak_payload > 0


def test_run_solve_no_answer(small_instance):
    record = harness().run_solve(small_instance.with_target(1), "ss")
    assert not record.answer
    assert record.witness is None
    assert "answer: NO" in record.to_text()


def test_unknown_algorithm(small_instance):
    with pytest.raises(UsageError):
        harness().run_solve(small_instance, "quantum")


def test_unknown_override():
    with pytest.raises(UsageError):
        harness(overrides={"bogus": 1})


def test_overrides_reach_the_preset():
    assert harness(overrides={"mu": 0.25}).preset.mu == 0.25


# Suites

def test_unknown_suite():
    with pytest.raises(UsageError):
        harness().run_experiment("nope")


def test_every_suite_is_registered():
    assert set(harness().suites) == set(SUITES)


@pytest.mark.parametrize("suite", ["ov-inequality", "entropy", "space-exponents", "concentration"])
def test_analytic_suites_pass(suite):
    report = harness().run_experiment(suite)
    assert report.summary["passed"]
    assert all(row["seed"] == 7 and row["preset"] == "desk" for row in report.rows)


def test_ov_inequality_grid():
    summary = harness().run_experiment("ov-inequality").summary
    assert summary["points"] == 11 * 21
    assert summary["violations"] == 0
    assert summary["tight_at_half"]


@pytest.mark.parametrize("algorithm", ["mitm", "ss", "bruteforce"])
def test_success_rate_of_exact_solvers(algorithm):
    report = harness(algorithm=algorithm, trials=4, kind="uniform", bit_width=8).run_experiment("success-rate")
    assert report.summary["false_yes"] == 0
    assert report.summary["recovery"] == 1.0
    assert report.summary["passed"]


def test_success_rate_rep_is_sound():
    report = harness(algorithm="rep", trials=3, n=12, bit_width=8,
                     overrides={"repetitions": 2}).run_experiment("success-rate")
    assert report.summary["false_yes"] == 0


def test_mixer_coverage_rows():
    report = harness(trials=3).run_experiment("mixer-coverage")
    assert len(report.rows) == 3
    assert all(row["q"] == 12 and 0 < row["coverage"] <= row["p"] for row in report.rows)
    assert 0 <= report.summary["pass_rate"] <= 1


def test_mixer_coverage_passes_on_powers():
    report = harness(trials=4, kind="powers").run_experiment("mixer-coverage")
    assert all(row["passed"] for row in report.rows)
    assert report.summary["pass_rate"] == 1.0
    assert report.summary["passed"]


def test_split_balance_rows():
    report = harness(trials=5).run_experiment("split-balance")
    assert len(report.rows) == 5
    assert all(row["m"] == 3 for row in report.rows)
    assert report.summary["threshold"] == pytest.approx(1 / (10 * 16 ** 1.5))


def test_list_sizes_track_expectation():
    report = harness(trials=4, n=20, kind="powers").run_experiment("list-sizes")
    assert report.summary["passed"]
    assert all(row["m"] == 4 and row["k"] == 2 for row in report.rows)


def test_peak_memory_rows():
    report = harness(trials=2, n=12).run_experiment("peak-memory")
    assert len(report.rows) == 2
    assert all(row["ss_peak"] > 0 and row["main_lemma_peak"] > 0 for row in report.rows)


@pytest.mark.slow
def test_cover_sparsity_suite():
    report = harness(trials=1).run_experiment("cover-sparsity")
    assert len(report.rows) == 3
    assert report.summary["validity_rate_d8"] == 1.0
    assert report.summary["validity_rate_d12"] == 1.0
    assert report.summary["passed"]


def test_suites_are_deterministic():
    first = harness().run_experiment("concentration")
    second = harness().run_experiment("concentration")
    assert first.rows == second.rows
    assert harness(seed=8).run_experiment("concentration").rows != first.rows


# Output

def test_format_report_text_and_csv():
    report = harness().run_experiment("entropy")
    text = format_report(report, "text").splitlines()
    assert text[:3] == ["suite: entropy", "seed: 7", "preset: desk"]
    assert text[3].startswith("row 0: ")
    assert text[-1].startswith("summary: ")

    rows = list(csv.DictReader(io.StringIO(format_report(report, "csv"))))
    assert [row["kind"] for row in rows] == ["row"] * len(report.rows) + ["summary"]
    assert rows[-1]["passed"] == "True"

    assert json.loads(format_report(report, "json"))["suite"] == "entropy"


def test_format_record(small_instance):
    record = harness().run_solve(small_instance, "mitm")
    assert json.loads(format_record(record, "json"))["witness"] == [1, 2]
    header, row = format_record(record, "csv").splitlines()
    assert header.startswith("algorithm,seed,preset,n,target,answer,witness")
    assert row.startswith("mitm,7,desk,4,12,1,1 2")
    assert "witness: 1 2\nsum: 12\n" in format_record(record, "text")


# Ledger

def test_solves_are_recorded(sqlite_url, small_instance):
    config = ExperimentConfig(seed=3)
    run_solve(config, small_instance, "mitm", database_url=sqlite_url)
    run_solve(config, small_instance.with_target(1), "ss", database_url=sqlite_url)
    with session_scope(sqlite_url) as db:
        runs = list_solves(db)
        assert [(r.algorithm, r.answer, r.target) for r in runs] == [("mitm", True, "12"), ("ss", False, "1")]
        assert json.loads(runs[0].record_json)["witness"] == [1, 2]
        assert [r.algorithm for r in list_solves(db, "ss")] == ["ss"]


def test_experiment_rows_are_recorded(sqlite_url):
    report = run_experiment(ExperimentConfig(seed=3), "entropy", database_url=sqlite_url)
    with session_scope(sqlite_url) as db:
        stored = db.query(ExperimentRow).order_by(ExperimentRow.row_index).all()
        assert len(stored) == len(report.rows)
        assert all(row.suite == "entropy" and row.passed for row in stored)


def test_ledger_failures_do_not_abort_solves(tmp_path, small_instance):
    url = f"sqlite:///{tmp_path / 'missing' / 'runs.db'}"
    record = run_solve(ExperimentConfig(), small_instance, "mitm", database_url=url)
    assert record.answer
