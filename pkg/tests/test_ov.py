import random

import numpy as np
import pytest

from sumsolve.core import Rng
from sumsolve.errors import OvTableBudgetError, PreconditionError
from sumsolve.ov import (
    OneCover,
    _k_masks,
    build_cover,
    cover_brute_force_sparsity,
    cover_validity,
    measure_sparsity,
    measured_sparsity,
    ov_amplified,
    ov_by_sparsity,
    ov_detect,
    ov_naive,
    pad_families,
    sparsity_floor,
)


def single_certificate_cover(copies=1):
    return OneCover(4, 1, 1, 2, np.array([0b0011] * copies, dtype=np.uint64))


def full_cover(d, p, q, x):
    return OneCover(d, p, q, x, _k_masks(d, x))


# Covers

def test_k_masks():
    masks = _k_masks(4, 2)
    assert masks.tolist() == [0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100]
    assert all(int(m).bit_count() == 2 for m in masks)


def test_single_certificate_sparsity():
    cover = single_certificate_cover()
    assert measured_sparsity(cover) == pytest.approx(1.0)
    assert cover_brute_force_sparsity(cover) == pytest.approx(1.0)
    assert not cover_validity(cover)


def test_sparsity_scales_with_copies():
    cover = single_certificate_cover(copies=5)
    assert measured_sparsity(cover) == pytest.approx(5.0)
    assert cover_brute_force_sparsity(cover) == pytest.approx(5.0)


def test_empty_cover_is_invalid():
    assert not cover_validity(OneCover(4, 1, 1, 2, np.array([], dtype=np.uint64)))


@pytest.mark.parametrize("d,p,q,x", [(8, 2, 2, 4), (12, 3, 3, 5)])
def test_sampled_covers_are_valid(d, p, q, x):
    cover = build_cover(Rng(8), d, p, q, x)
    report = measure_sparsity(cover, with_validity=True)
    assert report.valid
    assert report.x == x
    assert report.measured == pytest.approx(cover_brute_force_sparsity(cover))


def test_build_cover_picks_x():
    cover = build_cover(Rng(9), 12, 3, 3)
    assert cover.x == 4
    assert measured_sparsity(cover) == pytest.approx(135.0)
    assert cover_validity(cover)


@pytest.mark.slow
def test_build_cover_dimension_sixteen():
    cover = build_cover(Rng(10), 16, 4, 4)
    assert 4 < cover.x < 12
    assert measured_sparsity(cover) >= sparsity_floor(16)
    assert cover_validity(cover)


def test_build_cover_rejects_bad_dimensions():
    with pytest.raises(PreconditionError):
        build_cover(Rng(1), 8, 5, 4)
    with pytest.raises(PreconditionError):
        build_cover(Rng(1), 8, 2, 2, x=2)
    with pytest.raises(PreconditionError):
        build_cover(Rng(1), 40, 2, 2)


def test_sparsity_floor():
    assert sparsity_floor(8) == pytest.approx(256 / 28)
    with pytest.raises(PreconditionError):
        sparsity_floor(6)


# Detection

def test_pad_families():
    assert pad_families([1], [2], 3, 1, 1, 2) == ([0b1001], [0b10010], 6, 2, 2)


def test_ov_naive():
    assert ov_naive([0b11, 0b101], [0b110, 0b010]) == (0b101, 0b010)
    assert ov_naive([0b11], [0b01]) is None


def test_ov_by_sparsity_finds_pair():
    cover = full_cover(4, 1, 1, 2)
    assert ov_by_sparsity(Rng(2), cover, [0b0001], [0b0010], 4) == (0b0001, 0b0010)
    assert ov_by_sparsity(Rng(2), cover, [0b0001], [0b0001], 4) is None


def test_ov_by_sparsity_table_budget():
    cover = full_cover(4, 1, 1, 2)
    with pytest.raises(OvTableBudgetError):
        ov_by_sparsity(Rng(2), cover, [0b1], [0b10], 8, c=2, table_budget=10)


def test_ov_by_sparsity_dimension_check():
    with pytest.raises(PreconditionError):
        ov_by_sparsity(Rng(2), full_cover(4, 1, 1, 2), [1], [2], 6)


def test_ov_detect_agrees_with_naive():
    rand = random.Random(21)

    def three_set():
        return sum(1 << i for i in rand.sample(range(12), 3))

    cache = {}
    for seed in range(30):
        a = [three_set() for _ in range(6)]
        b = [three_set() for _ in range(6)]
        found = ov_detect(Rng(seed), a, b, 12, 3, 3, cover_cache=cache)
        assert (found is not None) == (ov_naive(a, b) is not None)
        if found is not None:
            assert found[0] in a and found[1] in b
            assert found[0] & found[1] == 0
    assert list(cache) == [(12, 3, 3)]


def test_ov_detect_edge_cases():
    assert ov_detect(Rng(1), [], [1], 4, 1, 1) is None
    assert ov_detect(Rng(1), [0], [5, 6], 4, 0, 2) == (0, 5)
    # too tight to cover; falls back to pairwise search
    assert ov_detect(Rng(1), [0b0011], [0b1100], 4, 2, 2) == (0b0011, 0b1100)


def test_ov_amplified():
    cover = full_cover(4, 1, 1, 2)
    assert ov_amplified(Rng(3), cover, [0b0100], [0b1000], 4, trials=3) == (0b0100, 0b1000)
    assert ov_amplified(Rng(3), cover, [0b0100], [0b0100], 4, trials=3) is None
