"""
Mixers and the two branches that bypass the representation solver:
the win-win 4-SUM solver for poorly mixing sets and the fixed-cardinality
4-SUM solver for small solutions.
"""

import logging
import math
from typing import List, Optional, Sequence

from sumsolve.core import IndexSet, Rng, Solution, SubsetSumInstance, k_subset_table, subset_sum_table
from sumsolve.errors import PreconditionError
from sumsolve.metrics import SolveStats
from sumsolve.numerics import distinct_subset_sums
from sumsolve.schemas import MixerReport
from sumsolve.sumset import four_sum

logger = logging.getLogger(__name__)

MAX_MIXER = 24
TAG_SMALL_LAMBDA = 11


def compute_mixer(instance: SubsetSumInstance, subset: IndexSet) -> MixerReport:
    """Distinct subset sums of `subset` and its mixing defect ε = 1 - log2|w(2^M)| / |M|"""
    size = len(subset)
    if size == 0:
        raise PreconditionError("A mixer must be non-empty")
    if size > MAX_MIXER:
        raise PreconditionError(f"Mixer of size {size} exceeds the enumeration limit {MAX_MIXER}")
    if not subset.fits(instance.n):
        raise PreconditionError(f"Mixer {subset.hex()} exceeds n={instance.n}")
    distinct = distinct_subset_sums(instance.weights, subset.mask)
    return MixerReport(
        set_mask=subset.hex(),
        size=size,
        distinct_sums=distinct,
        epsilon=1 - math.log2(distinct) / size,
    )


def mixer_restriction_epsilon(instance: SubsetSumInstance, subset: IndexSet, solution: IndexSet) -> float:
    """ε of M ∩ S; 0 when the intersection is empty"""
    part = subset & solution
    return compute_mixer(instance, part).epsilon if len(part) else 0.0


def partition_sizes(total: int, targets: Sequence[float]) -> List[int]:
    """Round real part sizes to integers summing to `total`"""
    if any(t < -0.5 for t in targets):
        raise PreconditionError(f"Infeasible partition sizes {list(targets)}")
    raw = [max(t, 0.0) for t in targets]
    scale = total / sum(raw) if sum(raw) > 0 else 0.0
    raw = [r * scale for r in raw]
    sizes = [int(round(r)) for r in raw]
    while sum(sizes) < total:
        i = max(range(len(raw)), key=lambda j: (raw[j] - sizes[j], -j))
        sizes[i] += 1
    while sum(sizes) > total:
        i = max((j for j in range(len(raw)) if sizes[j] > 0), key=lambda j: (sizes[j] - raw[j], -j))
        sizes[i] -= 1
    return sizes


def _split(members: Sequence[int], sizes: Sequence[int]) -> List[int]:
    masks, start = [], 0
    for size in sizes:
        mask = 0
        for i in members[start:start + size]:
            mask |= 1 << i
        masks.append(mask)
        start += size
    return masks


def win_win_solve(instance: SubsetSumInstance, subset: IndexSet, epsilon0: float, mu: float,
                  stats: Optional[SolveStats] = None) -> Optional[Solution]:
    """Exact 4-SUM solve exploiting a mixer with few distinct subset sums"""
    if not 0 < mu <= 0.25:
        raise PreconditionError(f"win_win_solve needs 0 < mu <= 1/4, got {mu}")
    stats = stats or SolveStats()
    n = instance.n
    report = compute_mixer(instance, subset)
    if report.epsilon < epsilon0:
        logger.warning(f"win_win_solve on a mixer with epsilon {report.epsilon:.4f} < {epsilon0}")

    rest = [i for i in range(n) if i not in subset]
    quarter = (1 - epsilon0 * mu) * n / 4
    sizes = partition_sizes(len(rest), [n / 4 - mu * n * (1 - 0.75 * epsilon0), quarter, quarter, quarter])
    l1, l2, r1, r2 = _split(rest, sizes)

    a_sums, a_masks = subset_sum_table(instance.weights, l2)
    b_sums, b_masks = subset_sum_table(instance.weights, r1)
    c_sums, c_masks = subset_sum_table(instance.weights, r2)
    outer_sums, outer_masks = subset_sum_table(instance.weights, l1 | subset.mask)
    dedup = {}
    for s, mask in zip(outer_sums, outer_masks):
        dedup.setdefault(s, mask)
    d_sums, d_masks = list(dedup), list(dedup.values())

    stats.list_sizes.update({"L2": len(a_sums), "R1": len(b_sums), "R2": len(c_sums), "L1+M": len(d_sums)})
    with stats.payload.hold(2 * (len(a_sums) + len(b_sums) + len(c_sums)) + len(outer_sums) + 2 * len(d_sums)):
        witness = four_sum(a_sums, b_sums, c_sums, d_sums, instance.target, meter=stats.payload)
    if witness is None:
        return None
    ia, ib, ic, id_ = witness.indices
    mask = a_masks[ia] | b_masks[ib] | c_masks[ic] | d_masks[id_]
    assert sum(witness.values) == instance.target
    return Solution(IndexSet(mask), instance.target)


def _part_counts(rng: Rng, k: int, part_sizes: Sequence[int]) -> List[int]:
    counts = [k // 4] * 4
    for i in rng.sample(range(4), k % 4):
        counts[i] += 1
    overflow = 0
    for i in range(4):
        if counts[i] > part_sizes[i]:
            overflow += counts[i] - part_sizes[i]
            counts[i] = part_sizes[i]
    for i in range(4):
        room = min(overflow, part_sizes[i] - counts[i])
        counts[i] += room
        overflow -= room
    return counts


def small_lambda_solve(rng: Rng, instance: SubsetSumInstance, solution_size: int,
                       trials: Optional[int] = None, stats: Optional[SolveStats] = None) -> Optional[Solution]:
    """Random 4-partitions with fixed per-part cardinalities, each tried by 4-SUM"""
    n, k = instance.n, solution_size
    if not 0 <= k <= n:
        raise PreconditionError(f"Solution size {k} outside [0, {n}]")
    if k == 0:
        return Solution(IndexSet(), 0) if instance.target == 0 else None
    stats = stats or SolveStats()
    trials = trials or 10 * n * n
    sizes = partition_sizes(n, [n / 4] * 4)

    for trial in range(trials):
        trial_rng = rng.derive(TAG_SMALL_LAMBDA, trial)
        parts = _split(trial_rng.permutation(list(range(n))), sizes)
        counts = _part_counts(trial_rng, k, sizes)
        tables = [k_subset_table(instance.weights, part, c) for part, c in zip(parts, counts)]
        if any(not sums for sums, _ in tables):
            continue
        stored = sum(2 * len(sums) for sums, _ in tables)
        with stats.payload.hold(stored):
            witness = four_sum(*(sums for sums, _ in tables), instance.target, meter=stats.payload)
        stats.counters["small_lambda.trials"] += 1
        if witness is not None:
            mask = 0
            for (_, masks), index in zip(tables, witness.indices):
                mask |= masks[index]
            assert mask.bit_count() == k
            return Solution(IndexSet(mask), instance.target)
    return None
