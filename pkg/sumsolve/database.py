import json
import logging
from contextlib import contextmanager
from typing import Dict, List, Optional

from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker

from sumsolve.config import settings
from sumsolve.models import Base, ExperimentRow, SolveRun
from sumsolve.schemas import ResultRecord

logger = logging.getLogger(__name__)

_engines: Dict[str, object] = {}

def init_db(url: Optional[str] = None):
    """Engine for `url` (default: settings.DATABASE_URL), created once with its tables"""
    url = url or settings.DATABASE_URL
    if not url:
        return None
    if url not in _engines:
        engine = create_engine(url, pool_pre_ping=True)  # Verify connections before using
        Base.metadata.create_all(bind=engine)
        _engines[url] = engine
        logger.info("Run ledger tables ready")
    return _engines[url]

@contextmanager
def session_scope(url: Optional[str] = None):
    """Session committed on success, rolled back on error; None when no ledger is configured"""
    engine = init_db(url)
    if engine is None:
        yield None
        return
    db = sessionmaker(autocommit=False, autoflush=False, bind=engine)()
    try:
        yield db
        db.commit()
    except Exception:
        db.rollback()
        raise
    finally:
        db.close()

def record_solve(db: Session, record: ResultRecord) -> SolveRun:
    run = SolveRun(
        algorithm=record.algorithm,
        seed=record.seed,
        preset=record.preset,
        n=record.n,
        target=str(record.target),
        answer=record.answer,
        branch=record.branch,
        peak_payload=record.peak_payload,
        record_json=record.model_dump_json(),
    )
    db.add(run)
    db.flush()
    return run

def record_experiment(db: Session, suite: str, seed: int, preset: str, rows: List[dict]) -> int:
    for index, row in enumerate(rows):
        db.add(ExperimentRow(
            suite=suite,
            seed=seed,
            preset=preset,
            row_index=index,
            passed=bool(row.get("passed", True)),
            row_json=json.dumps(row, sort_keys=True, default=str),
        ))
    db.flush()
    return len(rows)

def list_solves(db: Session, algorithm: Optional[str] = None) -> List[SolveRun]:
    query = db.query(SolveRun)
    if algorithm:
        query = query.filter(SolveRun.algorithm == algorithm)
    return query.order_by(SolveRun.id).all()
