"""
Prometheus metrics and the in-process payload meter
"""

from collections import Counter as TallyCounter
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from prometheus_client import REGISTRY, Counter, Gauge, Histogram, Info, write_to_textfile

from sumsolve import __version__

# ========================================
# SOLVER METRICS
# ========================================

solves_total = Counter(
    'sumsolve_solves_total',
    'Total solver invocations',
    ['algorithm', 'branch', 'answer']
)

solve_duration_seconds = Histogram(
    'sumsolve_solve_duration_seconds',
    'Solver wall time in seconds',
    ['algorithm'],
    buckets=[0.001, 0.01, 0.1, 0.5, 1.0, 5.0, 30.0, 120.0]
)

peak_payload_entries = Gauge(
    'sumsolve_peak_payload_entries',
    'Peak number of simultaneously stored list entries in the last solve',
    ['algorithm']
)

# ========================================
# BRANCH METRICS
# ========================================

branch_fired_total = Counter(
    'sumsolve_branch_fired_total',
    'Dispatch branches taken by the representation solver',
    ['branch']
)

ov_calls_total = Counter(
    'sumsolve_ov_calls_total',
    'Orthogonal-vectors engine invocations',
    ['engine']
)

# ========================================
# SYSTEM METRICS
# ========================================

solver_info = Info(
    'sumsolve',
    'sumsolve build information'
)

# ========================================
# PAYLOAD METER
# ========================================


class PayloadMeter:
    """Counts stored list entries (sums, masks, heap items) and keeps the peak"""

    def __init__(self):
        self.live = 0
        self.peak = 0

    def alloc(self, count: int = 1):
        self.live += count
        if self.live > self.peak:
            self.peak = self.live

    def free(self, count: int = 1):
        self.live -= count

    @contextmanager
    def hold(self, count: int):
        self.alloc(count)
        try:
            yield
        finally:
            self.free(count)


@dataclass
class SolveStats:
    """Per-solve trace filled by the solvers"""

    payload: PayloadMeter = field(default_factory=PayloadMeter)
    branch: Optional[str] = None
    mixers: List[Any] = field(default_factory=list)
    primes: Dict[str, int] = field(default_factory=dict)
    residues: Dict[str, int] = field(default_factory=dict)
    list_sizes: Dict[str, int] = field(default_factory=dict)
    counters: TallyCounter = field(default_factory=TallyCounter)

    def fire(self, branch: str):
        self.branch = branch
        self.counters[f"branch.{branch}"] += 1
        branch_fired_total.labels(branch=branch).inc()


# ========================================
# METRIC UPDATERS
# ========================================

def observe_solve(algorithm: str, stats: SolveStats, answer: bool, seconds: float):
    """Record one finished solve"""
    solves_total.labels(algorithm=algorithm, branch=stats.branch or 'none',
                        answer='yes' if answer else 'no').inc()
    solve_duration_seconds.labels(algorithm=algorithm).observe(seconds)
    peak_payload_entries.labels(algorithm=algorithm).set(stats.payload.peak)


def count_ov_call(engine: str):
    ov_calls_total.labels(engine=engine).inc()


def write_metrics(path: str):
    """Dump the registry in the Prometheus textfile format"""
    write_to_textfile(path, REGISTRY)

# ========================================
# INITIALIZATION
# ========================================


def init_metrics():
    """Initialize metrics with build info"""
    solver_info.info({
        'version': __version__,
        'service': 'sumsolve'
    })


init_metrics()
