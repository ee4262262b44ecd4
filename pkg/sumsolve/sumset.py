"""
Sorted sumset enumeration and the classical exact solvers built on it:
exhaustive search, meet-in-the-middle and the four-list Schroeppel-Shamir
search.
"""

import heapq
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple

from sumsolve.config import settings
from sumsolve.core import IndexSet, Solution, SubsetSumInstance, subset_sum_table
from sumsolve.errors import PreconditionError
from sumsolve.metrics import PayloadMeter, SolveStats

logger = logging.getLogger(__name__)


class Direction(str, Enum):
    INCREASING = "inc"
    DECREASING = "dec"


@dataclass(frozen=True)
class SumGroup:
    """All index pairs (i, j) with A[i] + B[j] == value, sorted lexicographically"""

    value: int
    pairs: Tuple[Tuple[int, int], ...]


class FourSumWitness(NamedTuple):
    indices: Tuple[int, int, int, int]
    values: Tuple[int, int, int, int]


class SumsetEnumerator:
    """Streams the distinct values of A + B in sorted order, grouped by value.

    The heap holds one cursor per element of the shorter list; each cursor
    walks the longer list in sorted order.
    """

    def __init__(self, a: Sequence[int], b: Sequence[int],
                 direction: Direction = Direction.INCREASING,
                 meter: Optional[PayloadMeter] = None):
        self.a = list(a)
        self.b = list(b)
        if not self.a or not self.b:
            raise PreconditionError(f"Sumset of an empty list (sizes {len(self.a)} and {len(self.b)})")
        self.direction = Direction(direction)
        self.meter = meter
        sign = 1 if self.direction is Direction.INCREASING else -1
        self._sign = sign

        self._swapped = len(self.b) < len(self.a)
        fixed, walk = (self.b, self.a) if self._swapped else (self.a, self.b)
        self._fixed = fixed
        self._walk = walk
        self._order = sorted(range(len(walk)), key=lambda j: (sign * walk[j], j))

        self._heap: List[Tuple[int, int, int]] = []
        if walk:
            first = self._order[0]
            self._heap = [(sign * (fixed[i] + walk[first]), i, 0) for i in range(len(fixed))]
            heapq.heapify(self._heap)
        self.peak_heap = len(self._heap)
        self.peak_group = 0
        if meter is not None:
            meter.alloc(len(self._order) + len(self._heap))

    @property
    def peak_payload(self) -> int:
        return len(self._order) + self.peak_heap

    def _pair(self, fixed_index: int, walk_position: int) -> Tuple[int, int]:
        walk_index = self._order[walk_position]
        return (walk_index, fixed_index) if self._swapped else (fixed_index, walk_index)

    def next_group(self) -> Optional[SumGroup]:
        """Next group, or None once A + B is exhausted"""
        heap = self._heap
        if not heap:
            return None
        key = heap[0][0]
        pairs = []
        while heap and heap[0][0] == key:
            _, i, pos = heapq.heappop(heap)
            pairs.append(self._pair(i, pos))
            if pos + 1 < len(self._order):
                nxt = self._order[pos + 1]
                heapq.heappush(heap, (self._sign * (self._fixed[i] + self._walk[nxt]), i, pos + 1))
            elif self.meter is not None:
                self.meter.free(1)
        pairs.sort()
        self.peak_group = max(self.peak_group, len(pairs))
        return SumGroup(self._sign * key, tuple(pairs))

    def __iter__(self) -> Iterator[SumGroup]:
        while True:
            group = self.next_group()
            if group is None:
                return
            yield group

    def close(self):
        if self.meter is not None:
            self.meter.free(len(self._order) + len(self._heap))
        self._heap = []


def four_sum(a: Sequence[int], b: Sequence[int], c: Sequence[int], d: Sequence[int],
             target: int, meter: Optional[PayloadMeter] = None) -> Optional[FourSumWitness]:
    """First (a, b, c, d) with a + b + c + d == target in the inc/dec linear search"""
    if min(len(a), len(b), len(c), len(d)) == 0:
        raise PreconditionError("four_sum needs four non-empty lists")
    inc = SumsetEnumerator(a, b, Direction.INCREASING, meter)
    dec = SumsetEnumerator(c, d, Direction.DECREASING, meter)
    try:
        right = dec.next_group()
        for left in inc:
            while right is not None and left.value + right.value > target:
                right = dec.next_group()
            if right is None:
                return None
            if left.value + right.value == target:
                ia, ib = left.pairs[0]
                ic, id_ = right.pairs[0]
                return FourSumWitness((ia, ib, ic, id_), (a[ia], b[ib], c[ic], d[id_]))
        return None
    finally:
        inc.close()
        dec.close()


# ========================================
# CLASSICAL SOLVERS
# ========================================

def _check_size(instance: SubsetSumInstance, limit: int, name: str):
    if instance.n > limit:
        raise PreconditionError(f"{name} supports n <= {limit}, got n={instance.n}")


def brute_force_solve(instance: SubsetSumInstance, stats: Optional[SolveStats] = None) -> Optional[Solution]:
    """Exhaustive search over all 2^n subsets"""
    _check_size(instance, settings.MAX_BRUTEFORCE_N, "bruteforce")
    stats = stats or SolveStats()
    stats.fire("bruteforce")
    sums, masks = subset_sum_table(instance.weights, (1 << instance.n) - 1)
    with stats.payload.hold(2 * len(sums)):
        for s, mask in zip(sums, masks):
            if s == instance.target:
                return Solution(IndexSet(mask), s)
    return None


def mitm_solve(instance: SubsetSumInstance, stats: Optional[SolveStats] = None) -> Optional[Solution]:
    """Meet in the middle over the two halves of [n]"""
    _check_size(instance, settings.MAX_MITM_N, "mitm")
    stats = stats or SolveStats()
    stats.fire("mitm")
    half = instance.n // 2
    low_sums, low_masks = subset_sum_table(instance.weights, (1 << half) - 1)
    seen = {}
    for s, mask in zip(low_sums, low_masks):
        seen.setdefault(s, mask)
    high_sums, high_masks = subset_sum_table(instance.weights, ((1 << instance.n) - 1) ^ ((1 << half) - 1))
    with stats.payload.hold(len(seen) + len(high_sums)):
        for s, mask in zip(high_sums, high_masks):
            other = seen.get(instance.target - s)
            if other is not None:
                return Solution(IndexSet(mask | other), instance.target)
    return None


def quarter_blocks(n: int) -> List[int]:
    """Masks of four contiguous blocks covering [n]"""
    bounds = [round(n * i / 4) for i in range(5)]
    return [((1 << bounds[i + 1]) - 1) ^ ((1 << bounds[i]) - 1) for i in range(4)]


def schroeppel_shamir_solve(instance: SubsetSumInstance, stats: Optional[SolveStats] = None) -> Optional[Solution]:
    """Four quarter lists combined by an increasing and a decreasing sumset stream"""
    _check_size(instance, settings.MAX_SS_N, "schroeppel_shamir")
    stats = stats or SolveStats()
    stats.fire("ss")
    tables = [subset_sum_table(instance.weights, block) for block in quarter_blocks(instance.n)]
    stored = sum(2 * len(sums) for sums, _ in tables)
    with stats.payload.hold(stored):
        stats.list_sizes.update({f"Q{i + 1}": len(sums) for i, (sums, _) in enumerate(tables)})
        witness = four_sum(*(sums for sums, _ in tables), instance.target, meter=stats.payload)
    if witness is None:
        return None
    mask = 0
    for (_, masks), index in zip(tables, witness.indices):
        mask |= masks[index]
    logger.debug(f"schroeppel_shamir witness {witness.values}")
    return Solution(IndexSet(mask), instance.target)
