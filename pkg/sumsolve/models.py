from sqlalchemy import Boolean, Column, DateTime, Integer, String, Text
from sqlalchemy.orm import declarative_base
from sqlalchemy.sql import func

Base = declarative_base()

class SolveRun(Base):
    """One solver invocation"""
    __tablename__ = 'solve_runs'

    id = Column(Integer, primary_key=True, index=True)
    created_at = Column(DateTime, server_default=func.now())
    algorithm = Column(String(20), index=True)  # 'bruteforce', 'mitm', 'ss', 'rep', 'rep-p4', 'rep-single', 'budget'
    seed = Column(Integer, index=True)
    preset = Column(String(20))                 # 'paper', 'desk'
    n = Column(Integer)
    target = Column(String(32))                 # decimal; may exceed a 64-bit column
    answer = Column(Boolean)
    branch = Column(String(20), index=True)     # 'empty', 'trivial', 'small-lambda', 'win-win', 'main-lemma', ...
    peak_payload = Column(Integer)
    record_json = Column(Text)

class ExperimentRow(Base):
    """One row of an experiment suite"""
    __tablename__ = 'experiment_rows'

    id = Column(Integer, primary_key=True, index=True)
    created_at = Column(DateTime, server_default=func.now())
    suite = Column(String(40), index=True)
    seed = Column(Integer, index=True)
    preset = Column(String(20))
    row_index = Column(Integer)
    passed = Column(Boolean)
    row_json = Column(Text)
