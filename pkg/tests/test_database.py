import json

import pytest

from sumsolve.database import init_db, list_solves, record_experiment, record_solve, session_scope
from sumsolve.models import ExperimentRow
from sumsolve.schemas import ResultRecord


def make_record(algorithm="mitm", target=12, answer=True):
    return ResultRecord(algorithm=algorithm, seed=1, preset="desk", n=4, target=target, answer=answer,
                        witness=[1, 2] if answer else None, achieved_sum=target if answer else None)


def test_no_ledger_without_url(monkeypatch):
    monkeypatch.setattr("sumsolve.database.settings.DATABASE_URL", None)
    assert init_db() is None
    with session_scope() as db:
        assert db is None


def test_engine_is_cached(sqlite_url):
    assert init_db(sqlite_url) is init_db(sqlite_url)


def test_record_and_list_solves(sqlite_url):
    with session_scope(sqlite_url) as db:
        run = record_solve(db, make_record())
        assert run.id is not None
        record_solve(db, make_record("ss", 2 ** 62, False))
    with session_scope(sqlite_url) as db:
        runs = list_solves(db)
        assert [r.algorithm for r in runs] == ["mitm", "ss"]
        assert runs[1].target == str(2 ** 62)
        assert runs[0].created_at is not None
        assert ResultRecord.model_validate_json(runs[0].record_json) == make_record()


def test_rollback_on_error(sqlite_url):
    with pytest.raises(RuntimeError):
        with session_scope(sqlite_url) as db:
            record_solve(db, make_record())
            raise RuntimeError("abort")
    with session_scope(sqlite_url) as db:
        assert list_solves(db) == []


def test_record_experiment(sqlite_url):
    rows = [{"trial": 0, "passed": True}, {"trial": 1, "passed": False}, {"value": 0.5}]
    with session_scope(sqlite_url) as db:
        assert record_experiment(db, "entropy", 3, "desk", rows) == 3
    with session_scope(sqlite_url) as db:
        stored = db.query(ExperimentRow).order_by(ExperimentRow.row_index).all()
        assert [row.passed for row in stored] == [True, False, True]
        assert json.loads(stored[1].row_json) == {"passed": False, "trial": 1}
