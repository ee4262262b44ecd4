import pytest

from sumsolve.core import (
    IndexSet,
    Rng,
    Solution,
    SubsetSumInstance,
    check_solution,
    k_subset_table,
    parse_instance,
    parse_solution,
    random_subset,
    sample_disjoint,
    serialize_instance,
    serialize_solution,
    subset_sum_table,
    weight_of,
)
from sumsolve.errors import CountMismatchError, InstanceFormatError, PreconditionError, WeightOverflowError


# Index sets

def test_index_set_algebra():
    s = IndexSet.from_indices([0, 2, 5])
    assert s.mask == 0b100101
    assert len(s) == 3
    assert 2 in s and 1 not in s
    assert str(s) == "{0,2,5}"
    assert (IndexSet.full(4) - IndexSet.from_indices([1])).indices() == [0, 2, 3]
    assert (s & IndexSet.full(3)).indices() == [0, 2]
    assert (s | IndexSet.from_indices([1])).indices() == [0, 1, 2, 5]
    assert s.isdisjoint(IndexSet.from_indices([1, 3]))
    assert IndexSet.from_indices([0, 5]).issubset(s)
    assert s.fits(6) and not s.fits(5)


def test_index_set_rejects_negative_index():
    with pytest.raises(PreconditionError):
        IndexSet.from_indices([-1])


# Instances

def test_weight_of():
    instance = SubsetSumInstance((3, 5, 7, 11), 0)
    assert weight_of(instance, IndexSet.from_indices([1, 2])) == 12
    assert weight_of(instance, IndexSet()) == 0


def test_weight_of_goes_past_64_bits():
    instance = SubsetSumInstance((2 ** 62, 2 ** 62), 0)
    assert weight_of(instance, IndexSet.full(2)) == 2 ** 63


def test_weight_of_union_plus_intersection(rng):
    instance = SubsetSumInstance(tuple(rng.randbelow(2 ** 62) for _ in range(20)), 0)
    universe = IndexSet.full(20)
    for _ in range(100):
        s1 = random_subset(rng, universe, rng.randint(0, 20))
        s2 = random_subset(rng, universe, rng.randint(0, 20))
        assert (weight_of(instance, s1 | s2) + weight_of(instance, s1 & s2)
                == weight_of(instance, s1) + weight_of(instance, s2))


def test_weight_of_rejects_out_of_range_set():
    with pytest.raises(PreconditionError):
        weight_of(SubsetSumInstance((1, 2), 0), IndexSet.from_indices([2]))


def test_instance_validation():
    with pytest.raises(PreconditionError):
        SubsetSumInstance((1, -2), 0)
    with pytest.raises(WeightOverflowError):
        SubsetSumInstance((2 ** 63,), 0)
    with pytest.raises(PreconditionError):
        SubsetSumInstance((), 0)
    assert SubsetSumInstance((0, 0), 0).total == 0


def test_check_solution(small_instance):
    assert check_solution(small_instance, Solution(IndexSet.from_indices([1, 2]), 12))
    assert not check_solution(small_instance, Solution(IndexSet.from_indices([0, 1]), 12))
    assert not check_solution(small_instance, None)


# Text formats

def test_parse_instance():
    instance = parse_instance("4 12\n3 5 7 11\n")
    assert instance.n == 4
    assert instance.target == 12
    assert instance.weights == (3, 5, 7, 11)


def test_parse_degenerate_instance():
    instance = parse_instance(b"1 0\n0\n")
    assert instance.weights == (0,)
    assert instance.target == 0


def test_parse_count_mismatch():
    with pytest.raises(CountMismatchError) as e:
        parse_instance("2 5\n1\n")
    assert e.value.line == 2


def test_parse_reports_line_and_column():
    with pytest.raises(InstanceFormatError) as e:
        parse_instance("3 5\n1 x 3\n")
    assert (e.value.line, e.value.column) == (2, 3)
    assert e.value.exit_code == 3


def test_parse_weight_overflow():
    with pytest.raises(WeightOverflowError):
        parse_instance("1 0\n9223372036854775808\n")


def test_parse_rejects_bad_header_and_encoding():
    with pytest.raises(InstanceFormatError):
        parse_instance("4\n3 5 7 11\n")
    with pytest.raises(InstanceFormatError):
        parse_instance(b"\xff\xfe")


def test_serialize_instance():
    instance = SubsetSumInstance((3, 5, 7, 11), 12)
    assert serialize_instance(instance) == "4 12\n3 5 7 11\n"
    assert parse_instance(serialize_instance(instance)) == instance


def test_solution_text():
    solution = Solution(IndexSet.from_indices([2, 1]), 12)
    text = serialize_solution(solution)
    assert text == "answer: YES\nindices: 1 2\nsum: 12\n"
    assert parse_solution(text) == solution
    assert serialize_solution(None) == "answer: NO\n"
    assert parse_solution("answer: NO\n") is None


# Randomness

def test_rng_is_deterministic():
    assert Rng(7).derive(1, 2).randbelow(10 ** 6) == Rng(7).derive(1, 2).randbelow(10 ** 6)


def test_derived_stream_ignores_parent_draws():
    parent = Rng(7)
    first = parent.derive(3).random()
    parent.random()
    parent.randbelow(100)
    assert parent.derive(3).random() == first


def test_randbelow_large_bound():
    rng = Rng(1)
    values = [rng.randbelow(2 ** 100) for _ in range(50)]
    assert all(0 <= v < 2 ** 100 for v in values)
    assert max(values) > 2 ** 64


def test_randint_is_inclusive():
    rng = Rng(2)
    assert {rng.randint(3, 5) for _ in range(200)} == {3, 4, 5}


def test_random_subset_edges(rng):
    universe = IndexSet.from_indices([0, 1, 2])
    assert random_subset(rng, universe, 3) == universe
    assert random_subset(rng, universe, 0) == IndexSet()
    with pytest.raises(PreconditionError):
        random_subset(rng, universe, 4)


def test_random_subset_is_uniform(rng):
    universe = IndexSet.full(8)
    counts = [0] * 8
    draws = 10 ** 4
    for _ in range(draws):
        for i in random_subset(rng, universe, 4):
            counts[i] += 1
    assert all(abs(c / draws - 0.5) < 0.05 for c in counts)


def test_sample_disjoint(rng):
    parts = sample_disjoint(rng, IndexSet.full(12), [3, 3, 4])
    assert [len(p) for p in parts] == [3, 3, 4]
    assert parts[0].isdisjoint(parts[1]) and parts[1].isdisjoint(parts[2]) and parts[0].isdisjoint(parts[2])
    with pytest.raises(PreconditionError):
        sample_disjoint(rng, IndexSet.full(4), [3, 2])


# Enumeration

def test_subset_sum_table():
    weights = [1, 2, 4]
    sums, masks = subset_sum_table(weights, 0b111)
    assert sorted(sums) == list(range(8))
    instance = SubsetSumInstance(tuple(weights), 0)
    assert all(weight_of(instance, m) == s for s, m in zip(sums, masks))


def test_k_subset_table():
    sums, masks = k_subset_table([1, 2, 4, 8], 0b1111, 2)
    assert sorted(sums) == [3, 5, 6, 9, 10, 12]
    assert all(m.bit_count() == 2 for m in masks)
    assert k_subset_table([1, 2], 0b11, 3) == ([], [])
