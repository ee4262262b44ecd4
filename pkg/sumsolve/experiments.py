"""
Experiment harness - solver dispatch and the measurement suites
"""

import csv
import io
import logging
import time
from dataclasses import asdict
from math import comb
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from sqlalchemy.exc import SQLAlchemyError

from sumsolve.config import get_preset
from sumsolve.core import IndexSet, Rng, Solution, SubsetSumInstance, check_solution, random_subset, sample_disjoint
from sumsolve.database import record_experiment, record_solve, session_scope
from sumsolve.errors import PreconditionError, UsageError
from sumsolve.generators import generate_instance, planted_instance
from sumsolve.metrics import SolveStats, observe_solve
from sumsolve.mixer import compute_mixer
from sumsolve.numerics import (
    binomial_bounds_check,
    concentration_estimate,
    distinct_subset_sums,
    entropy_inequality_suite,
    hypergeometric_point,
    optimal_p4_mu,
    ov_time_exponent,
    p4_list_exponent,
    prime_of_order,
    residue_coverage,
    smallest_s0,
    space_exponents,
    verify_ov_inequality,
)
from sumsolve.ov import build_cover, measure_sparsity
from sumsolve.repsolver import (
    MAX_LEVEL_TWO_M,
    build_level_two_lists,
    main_lemma_solve,
    single_level_solve,
    solve,
    solve_with_space_budget,
)
from sumsolve.schemas import ExperimentConfig, ExperimentReport, ResultRecord
from sumsolve.sumset import brute_force_solve, mitm_solve, schroeppel_shamir_solve
from sumsolve.tracing import span

logger = logging.getLogger(__name__)

ALGORITHMS = ("bruteforce", "mitm", "ss", "rep", "rep-p4", "rep-single", "budget")
SUITES = (
    "mixer-coverage", "split-balance", "list-sizes", "cover-sparsity", "success-rate",
    "ov-inequality", "entropy", "space-exponents", "peak-memory", "concentration",
)

TAG_TRIAL = 41

COVER_GRID = ((8, 2, 2), (12, 3, 3), (16, 4, 4))
CONCENTRATION_GRID = ((4, 2, 2), (8, 4, 4), (12, 6, 6), (16, 8, 4))
CONCENTRATION_SAMPLES = 1000
MAX_RESIDUE_Q = 12
BINOMIAL_D_MAX = 40

Rows = List[Dict[str, Any]]


class ExperimentHarness:
    """Runs solver invocations and experiment suites for one configuration"""

    def __init__(self, config: ExperimentConfig, database_url: Optional[str] = None):
        self.config = config
        self.preset = get_preset(config.preset, **config.overrides)
        self.database_url = database_url
        self.suites: Dict[str, Callable[[], Tuple[Rows, Dict[str, Any]]]] = {
            "mixer-coverage": self.mixer_coverage,
            "split-balance": self.split_balance,
            "list-sizes": self.list_sizes,
            "cover-sparsity": self.cover_sparsity,
            "success-rate": self.success_rate,
            "ov-inequality": self.ov_inequality,
            "entropy": self.entropy,
            "space-exponents": self.space_exponents,
            "peak-memory": self.peak_memory,
            "concentration": self.concentration,
        }
        logger.info(f"Harness ready: preset={self.preset.name} seed={config.seed} trials={config.trials}")

    # ========================================
    # HELPERS
    # ========================================

    def _trial_rng(self, trial: int) -> Rng:
        return Rng(self.config.seed).derive(TAG_TRIAL, trial)

    def _instance(self, rng: Rng, kind: Optional[str] = None) -> SubsetSumInstance:
        return generate_instance(rng, kind or self.config.kind, self.config.n, self.config.bit_width)

    def _row(self, **fields) -> Dict[str, Any]:
        return {"seed": self.config.seed, "preset": self.preset.name, **fields}

    def _mixer_size(self, n: int) -> int:
        m = min(max(1, round(self.preset.mu * n)), n // 3, MAX_LEVEL_TWO_M)
        if m == 0:
            raise PreconditionError(f"n={n} is too small for three mixers")
        return m

    def _dispatch(self, algorithm: str, rng: Rng, instance: SubsetSumInstance,
                  stats: SolveStats) -> Optional[Solution]:
        if algorithm == "bruteforce":
            return brute_force_solve(instance, stats)
        if algorithm == "mitm":
            return mitm_solve(instance, stats)
        if algorithm == "ss":
            return schroeppel_shamir_solve(instance, stats)
        if algorithm == "rep":
            return solve(rng, instance, self.preset, stats)
        if algorithm == "rep-p4":
            return solve(rng, instance, self.preset, stats, detector="p4")
        if algorithm == "rep-single":
            return single_level_solve(rng, instance, config=self.preset, stats=stats)
        if algorithm == "budget":
            budget = self.config.budget if self.config.budget is not None else instance.n / 8
            return solve_with_space_budget(rng, instance, budget, self.preset, stats)
        raise UsageError(f"Unknown algorithm '{algorithm}' (choose from {', '.join(ALGORITHMS)})")

    # ========================================
    # SOLVE
    # ========================================

    def run_solve(self, instance: SubsetSumInstance, algorithm: Optional[str] = None) -> ResultRecord:
        """Dispatch one solve and build its result record"""
        algorithm = algorithm or self.config.algorithm
        stats = SolveStats()
        started = time.perf_counter()
        with span("solve", algorithm=algorithm, n=instance.n):
            solution = self._dispatch(algorithm, Rng(self.config.seed), instance, stats)
        seconds = time.perf_counter() - started

        answer = solution is not None
        if answer:
            assert check_solution(instance, solution)
        observe_solve(algorithm, stats, answer, seconds)
        logger.info(f"{algorithm} n={instance.n}: {'YES' if answer else 'NO'} "
                    f"via {stats.branch} (peak payload {stats.payload.peak})")

        record = ResultRecord(
            algorithm=algorithm,
            seed=self.config.seed,
            preset=self.preset.name,
            n=instance.n,
            target=instance.target,
            answer=answer,
            witness=solution.subset.indices() if answer else None,
            achieved_sum=solution.achieved_sum if answer else None,
            branch=stats.branch,
            mixers=stats.mixers,
            primes=stats.primes,
            residues=stats.residues,
            list_sizes=stats.list_sizes,
            peak_payload=stats.payload.peak,
            counters=dict(sorted(stats.counters.items())),
            wall_time_s=seconds if self.config.timing else None,
        )
        self._store(lambda db: record_solve(db, record))
        return record

    # ========================================
    # EXPERIMENTS
    # ========================================

    def run_experiment(self, suite: str) -> ExperimentReport:
        if suite not in self.suites:
            raise UsageError(f"Unknown suite '{suite}' (choose from {', '.join(SUITES)})")
        started = time.perf_counter()
        with span("experiment", suite=suite, trials=self.config.trials):
            rows, summary = self.suites[suite]()
        logger.info(f"Suite {suite}: {len(rows)} rows, passed={summary.get('passed')} "
                    f"in {time.perf_counter() - started:.2f}s")
        report = ExperimentReport(suite=suite, seed=self.config.seed, preset=self.preset.name,
                                  rows=rows, summary=summary)
        self._store(lambda db: record_experiment(db, suite, self.config.seed, self.preset.name, rows))
        return report

    def mixer_coverage(self):
        """Residues mod a random prime of order 2^{q/2} hit by the sums of sizes [s0, q/2]"""
        q = min(self.config.n, MAX_RESIDUE_Q)
        rows = []
        for trial in range(self.config.trials):
            rng = self._trial_rng(trial)
            instance = self._instance(rng.derive(1))
            subset = random_subset(rng.derive(2), IndexSet.full(instance.n), q)
            distinct = distinct_subset_sums(instance.weights, subset.mask)
            s0 = smallest_s0(q, distinct)
            p = prime_of_order(rng.derive(3), q / 2).p
            covered = residue_coverage(instance.weights, subset.mask, p, (s0, q // 2))
            threshold = p / (100 * q)
            rows.append(self._row(trial=trial, q=q, distinct_sums=distinct, s0=s0, p=p,
                                  coverage=covered, threshold=threshold, passed=covered >= threshold))
        rate = float(np.mean([r["passed"] for r in rows]))
        return rows, {
            "pass_rate": rate,
            "median_coverage_fraction": float(np.median([r["coverage"] / r["p"] for r in rows])),
            "passed": rate >= 0.8,
        }

    def split_balance(self):
        """Frequency of |S ∩ M| = λ|M| on all three sampled mixers"""
        n = self.config.n
        m = self._mixer_size(n)
        rows = []
        for trial in range(self.config.trials):
            rng = self._trial_rng(trial)
            weights = self._instance(rng.derive(1)).weights
            _, solution = planted_instance(rng.derive(2), weights)
            mixers = sample_disjoint(rng.derive(3), IndexSet.full(n), [m, m, m])
            want = round(len(solution) / n * m)
            counts = [len(mixer & solution) for mixer in mixers]
            rows.append(self._row(trial=trial, m=m, want=want, counts=" ".join(map(str, counts)),
                                  passed=all(c == want for c in counts)))
        frequency = float(np.mean([r["passed"] for r in rows]))
        threshold = 1 / (10 * n ** 1.5)
        return rows, {"frequency": frequency, "threshold": threshold, "passed": frequency >= threshold}

    def list_sizes(self):
        """Measured level-two list sizes against candidates / prime at λ = 1/2"""
        n = self.config.n
        m = self._mixer_size(n)
        k = round(m / 2)
        s = k // 2
        rows = []
        for trial in range(self.config.trials):
            rng = self._trial_rng(trial)
            instance = self._instance(rng.derive(1))
            mixers = sample_disjoint(rng.derive(2), IndexSet.full(n), [m, m, m])
            reports = [compute_mixer(instance, mixer) for mixer in mixers]
            order = sorted(range(3), key=lambda i: reports[i].epsilon)
            M, M_L, M_R = (mixers[i] for i in order)
            lists = build_level_two_lists(rng.derive(3), instance, M_L, M, M_R, k, (s, s, s),
                                          reports[order[1]].epsilon, reports[order[2]].epsilon)
            expected = {
                "L1": 2 ** len(lists.L) * comb(m, s) / lists.p_L,
                "L2": comb(m, k - s) * comb(m, s) / lists.p_L,
                "R2": comb(m, k - s) ** 2 / lists.p_R,
                "R1": comb(m, s) * 2 ** len(lists.R) / lists.p_R,
            }
            measured = lists.list_sizes()
            row = self._row(trial=trial, m=m, k=k, p_L=lists.p_L, p_R=lists.p_R)
            for name in ("L1", "L2", "R1", "R2"):
                row[name] = measured[name]
                row[f"expected_{name}"] = expected[name]
            rows.append(row)
        mean_l1 = float(np.mean([r["L1"] for r in rows]))
        mean_expected = float(np.mean([r["expected_L1"] for r in rows]))
        ratio = mean_l1 / mean_expected if mean_expected else float("inf")
        return rows, {"mean_L1": mean_l1, "mean_expected_L1": mean_expected, "ratio": ratio,
                      "passed": 1 / 8 <= ratio <= 8}

    def cover_sparsity(self):
        """Cover validity and sparsity against the analytic bound and the floor"""
        rows = []
        summary: Dict[str, Any] = {}
        passed = True
        for d, p, q in COVER_GRID:
            valid = []
            for trial in range(self.config.trials):
                cover = build_cover(self._trial_rng(trial).derive(d), d, p, q)
                report = measure_sparsity(cover, with_validity=True)
                ratio_bound = report.measured / report.analytic_bound
                ratio_floor = report.measured / report.floor
                ok = bool(report.valid) and ratio_bound <= 64 and ratio_floor >= 1
                rows.append(self._row(trial=trial, **report.model_dump(),
                                      ratio_bound=ratio_bound, ratio_floor=ratio_floor, passed=ok))
                valid.append(bool(report.valid))
                if report.valid and not (ratio_bound <= 64 and ratio_floor >= 1):
                    passed = False
            rate = float(np.mean(valid))
            summary[f"validity_rate_d{d}"] = rate
            passed = passed and rate >= 0.75
        summary["max_ratio_bound"] = max(r["ratio_bound"] for r in rows)
        summary["min_ratio_floor"] = min(r["ratio_floor"] for r in rows)
        summary["passed"] = passed
        return rows, summary

    def success_rate(self):
        """Selected algorithm against the exhaustive oracle on generated instances"""
        algorithm = self.config.algorithm
        rows = []
        for trial in range(self.config.trials):
            rng = self._trial_rng(trial)
            instance = self._instance(rng.derive(1))
            oracle = mitm_solve(instance) is not None
            stats = SolveStats()
            solution = self._dispatch(algorithm, rng.derive(4), instance, stats)
            answer = solution is not None
            if answer:
                assert check_solution(instance, solution)
            rows.append(self._row(trial=trial, algorithm=algorithm, n=instance.n, answer=answer, oracle=oracle,
                                  passed=answer == oracle, branch=stats.branch or "",
                                  peak_payload=stats.payload.peak))
        yes = [r for r in rows if r["oracle"]]
        recovery = float(np.mean([r["answer"] for r in yes])) if yes else 1.0
        false_yes = sum(1 for r in rows if r["answer"] and not r["oracle"])
        return rows, {"recovery": recovery, "oracle_yes": len(yes), "false_yes": false_yes,
                      "passed": false_yes == 0 and recovery >= 0.9}

    def ov_inequality(self):
        """Grid verification of the OV running-time inequality"""
        rows = []
        for lam in np.arange(40, 51) / 100:
            for sigma in np.arange(40, 61) / 100:
                report = verify_ov_inequality(round(float(lam), 2), round(float(sigma), 2))
                rows.append(self._row(**asdict(report), passed=report.holds))
        at_half = next(r for r in rows if r["lam"] == 0.5 and r["sigma"] == 0.5)
        violations = sum(1 for r in rows if not r["holds"])
        return rows, {
            "points": len(rows),
            "violations": violations,
            "worst_margin": min(r["margin"] for r in rows),
            "tight_at_half": at_half["tight"],
            "passed": violations == 0 and at_half["tight"],
        }

    def entropy(self):
        checks = entropy_inequality_suite() + [binomial_bounds_check(BINOMIAL_D_MAX)]
        rows = [self._row(**asdict(check), passed=check.violations == 0) for check in checks]
        violations = sum(check.violations for check in checks)
        return rows, {"checks": len(checks), "violations": violations, "passed": violations == 0}

    def space_exponents(self):
        """List-size exponents of the level-two and P4 paths across μ"""
        rows = []
        for mu in np.arange(1, 31) / 100:
            mu = round(float(mu), 2)
            exponents = space_exponents(mu, 0.5, self.preset.slack)
            rows.append(self._row(mu=mu, **exponents, p4=p4_list_exponent(mu), passed=True))
        best = min(rows, key=lambda r: r["max"])
        p4_mu, p4_value = optimal_p4_mu()
        return rows, {
            "best_mu": best["mu"],
            "best_max": best["max"],
            "p4_mu": p4_mu,
            "p4_exponent": p4_value,
            "ov_time_half": ov_time_exponent(0.5),
            "passed": p4_value < 0.25,
        }

    def peak_memory(self):
        """Peak payload of Schroeppel-Shamir against one main-lemma pass on powers instances"""
        n = self.config.n
        m = self._mixer_size(n)
        rows = []
        for trial in range(self.config.trials):
            rng = self._trial_rng(trial)
            instance = self._instance(rng.derive(1), kind="powers")
            ss_stats = SolveStats()
            schroeppel_shamir_solve(instance, ss_stats)
            M_L, M, M_R = sample_disjoint(rng.derive(2), IndexSet.full(n), [m, m, m])
            ml_stats = SolveStats()
            found = main_lemma_solve(rng.derive(3), instance, M_L, M, M_R, round(m / 2),
                                     config=self.preset, repetitions=1, stats=ml_stats)
            rows.append(self._row(trial=trial, n=n, m=m, ss_peak=ss_stats.payload.peak,
                                  main_lemma_peak=ml_stats.payload.peak, main_lemma_answer=found is not None,
                                  passed=ss_stats.payload.peak >= ml_stats.payload.peak))
        ss_median = float(np.median([r["ss_peak"] for r in rows]))
        ml_median = float(np.median([r["main_lemma_peak"] for r in rows]))
        return rows, {"median_ss_peak": ss_median, "median_main_lemma_peak": ml_median,
                      "passed": ss_median >= ml_median}

    def concentration(self):
        """Empirical Pr[|A ∩ B| = ab/d] against the hypergeometric value"""
        samples = CONCENTRATION_SAMPLES * self.config.trials
        rows = []
        for d, a, b in CONCENTRATION_GRID:
            k = a * b // d
            estimate = concentration_estimate(Rng(self.config.seed).derive(TAG_TRIAL, d), d, a, b, samples)
            exact = hypergeometric_point(d, a, b, k)
            error = abs(estimate - exact)
            rows.append(self._row(d=d, a=a, b=b, k=k, samples=samples, estimate=estimate,
                                  exact=exact, error=error, passed=error <= 0.05))
        return rows, {"max_error": max(r["error"] for r in rows), "passed": all(r["passed"] for r in rows)}

    # ========================================
    # LEDGER
    # ========================================

    def _store(self, write: Callable):
        try:
            with session_scope(self.database_url) as db:
                if db is not None:
                    write(db)
        except SQLAlchemyError as e:
            logger.error(f"Failed to write run ledger: {e}")


def run_solve(config: ExperimentConfig, instance: SubsetSumInstance, algorithm: Optional[str] = None,
              database_url: Optional[str] = None) -> ResultRecord:
    return ExperimentHarness(config, database_url).run_solve(instance, algorithm)


def run_experiment(config: ExperimentConfig, suite: str, database_url: Optional[str] = None) -> ExperimentReport:
    return ExperimentHarness(config, database_url).run_experiment(suite)


# ========================================
# OUTPUT
# ========================================

def _text_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _csv(rows: List[Dict[str, Any]]) -> str:
    fieldnames: List[str] = []
    for row in rows:
        fieldnames.extend(key for key in row if key not in fieldnames)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, restval="", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def format_record(record: ResultRecord, output_format: str = "text") -> str:
    if output_format == "json":
        return record.model_dump_json(indent=2) + "\n"
    if output_format == "csv":
        return _csv([record.flat()])
    return record.to_text()


def format_report(report: ExperimentReport, output_format: str = "text") -> str:
    if output_format == "json":
        return report.model_dump_json(indent=2) + "\n"
    if output_format == "csv":
        rows = [{"kind": "row", **row} for row in report.rows]
        rows.append({"kind": "summary", "seed": report.seed, "preset": report.preset, **report.summary})
        return _csv(rows)
    lines = [f"suite: {report.suite}", f"seed: {report.seed}", f"preset: {report.preset}"]
    for index, row in enumerate(report.rows):
        lines.append(f"row {index}: " + " ".join(f"{k}={_text_value(v)}" for k, v in row.items()))
    lines.append("summary: " + " ".join(f"{k}={_text_value(v)}" for k, v in report.summary.items()))
    return "\n".join(lines) + "\n"
