import itertools

import pytest

from sumsolve.core import IndexSet, Rng, SubsetSumInstance


def oracle_sums(weights):
    """Every subset sum of `weights`"""
    sums = {0}
    for w in weights:
        sums |= {s + w for s in sums}
    return sums


def oracle_yes(instance: SubsetSumInstance) -> bool:
    return instance.target in oracle_sums(instance.weights)


def powers_instance(n: int, solution) -> SubsetSumInstance:
    subset = IndexSet.from_indices(solution)
    return SubsetSumInstance(tuple(1 << i for i in range(n)), subset.mask)


def simple_paths(adjacency, weights):
    """All ordered simple 4-vertex paths of total weight zero"""
    n = len(weights)
    for a, b, c, d in itertools.permutations(range(n), 4):
        if adjacency[a] >> b & 1 and adjacency[b] >> c & 1 and adjacency[c] >> d & 1:
            if weights[a] + weights[b] + weights[c] + weights[d] == 0:
                yield a, b, c, d


@pytest.fixture
def rng():
    return Rng(1234)


@pytest.fixture
def small_instance():
    return SubsetSumInstance((3, 5, 7, 11), 12)


@pytest.fixture
def sqlite_url(tmp_path):
    return f"sqlite:///{tmp_path / 'runs.db'}"
