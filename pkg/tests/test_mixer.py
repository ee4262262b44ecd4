import math

import pytest

from sumsolve.core import IndexSet, Rng, SubsetSumInstance, check_solution, random_subset
from sumsolve.errors import PreconditionError
from sumsolve.generators import generate_instance, planted_instance
from sumsolve.metrics import SolveStats
from sumsolve.mixer import (
    compute_mixer,
    mixer_restriction_epsilon,
    partition_sizes,
    small_lambda_solve,
    win_win_solve,
)
from tests.conftest import oracle_yes


def test_compute_mixer():
    instance = SubsetSumInstance((1, 2, 4, 1, 1), 0)
    report = compute_mixer(instance, IndexSet.from_indices([0, 1, 2]))
    assert report.distinct_sums == 8
    assert report.epsilon == 0.0
    report = compute_mixer(instance, IndexSet.from_indices([0, 3, 4]))
    assert report.distinct_sums == 4
    assert report.epsilon == pytest.approx(1 - 2 / 3)
    assert report.set_mask == hex(0b11001)


def test_compute_mixer_rejects_empty_set():
    with pytest.raises(PreconditionError):
        compute_mixer(SubsetSumInstance((1, 2), 0), IndexSet())


def test_distinct_sums_are_submultiplicative():
    for seed in range(20):
        rng = Rng(seed)
        instance = generate_instance(rng.derive(1), "uniform", 16, bit_width=6)
        universe = IndexSet.full(16)
        m1 = random_subset(rng.derive(2), universe, rng.randint(1, 8))
        m2 = random_subset(rng.derive(3), universe, rng.randint(1, 8))
        union = compute_mixer(instance, m1 | m2).distinct_sums
        assert union <= compute_mixer(instance, m1).distinct_sums * compute_mixer(instance, m2).distinct_sums


def test_restriction_epsilon():
    instance = SubsetSumInstance((1, 1, 1, 1), 0)
    mixer = IndexSet.from_indices([0, 1])
    assert mixer_restriction_epsilon(instance, mixer, IndexSet.from_indices([2, 3])) == 0.0
    assert mixer_restriction_epsilon(instance, mixer, IndexSet.full(4)) == pytest.approx(1 - math.log2(3) / 2)


def test_partition_sizes():
    assert partition_sizes(9, [0.3375, 2.8875, 2.8875, 2.8875]) == [0, 3, 3, 3]
    assert partition_sizes(10, [2.5] * 4) == [3, 3, 2, 2]
    assert sum(partition_sizes(17, [1.2, 4.9, 0.0, 7.7])) == 17
    with pytest.raises(PreconditionError):
        partition_sizes(4, [-3.0, 1.0])


# Win-win

def test_win_win_on_repeated_weights():
    instance = SubsetSumInstance((1,) * 12, 5)
    mixer = IndexSet.from_indices([0, 1, 2])
    stats = SolveStats()
    solution = win_win_solve(instance, mixer, 0.15, 0.25, stats)
    assert check_solution(instance, solution)
    assert check_solution(instance.with_target(6), win_win_solve(instance.with_target(6), mixer, 0.15, 0.25))
    assert win_win_solve(instance.with_target(13), mixer, 0.15, 0.25) is None
    assert stats.payload.live == 0
    assert set(stats.list_sizes) == {"L2", "R1", "R2", "L1+M"}


def test_win_win_agrees_with_oracle():
    for seed in range(20):
        instance = generate_instance(Rng(seed), "low-mixing", 16, bit_width=6)
        solution = win_win_solve(instance, IndexSet.from_indices(range(4)), 0.15, 0.25)
        assert (solution is not None) == oracle_yes(instance)
        if solution is not None:
            assert check_solution(instance, solution)


def test_win_win_rejects_large_mu():
    with pytest.raises(PreconditionError):
        win_win_solve(SubsetSumInstance((1,) * 8, 2), IndexSet.from_indices([0]), 0.15, 0.3)


# Small solutions

def test_small_lambda_finds_planted_solution():
    instance, _ = planted_instance(Rng(3), list(range(1, 13)), size=3)
    stats = SolveStats()
    solution = small_lambda_solve(Rng(4), instance, 3, trials=200, stats=stats)
    assert check_solution(instance, solution)
    assert len(solution.subset) == 3
    assert stats.counters["small_lambda.trials"] >= 1


def test_small_lambda_respects_cardinality():
    # only {0, 1} reaches 3; no 3-subset does
    instance = SubsetSumInstance((1, 2, 10, 20, 40, 80), 3)
    assert small_lambda_solve(Rng(5), instance, 3, trials=50) is None
    assert check_solution(instance, small_lambda_solve(Rng(5), instance, 2, trials=200))


def test_small_lambda_empty_solution():
    instance = SubsetSumInstance((1, 2), 0)
    assert small_lambda_solve(Rng(1), instance, 0).subset == IndexSet()
    assert small_lambda_solve(Rng(1), instance.with_target(1), 0) is None
    with pytest.raises(PreconditionError):
        small_lambda_solve(Rng(1), instance, 3)
