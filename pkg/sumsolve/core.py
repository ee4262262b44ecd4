"""
Core value types: instances, index sets, solutions, the seeded RNG and the
subset enumeration primitives every solver builds on.
"""

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from sumsolve.errors import (
    CountMismatchError,
    InstanceFormatError,
    PreconditionError,
    WeightOverflowError,
)

MAX_N = 60
WEIGHT_LIMIT = 2 ** 63
SUM_LIMIT = 2 ** 127

_TOKEN = re.compile(r"\S+")
_DIGITS = re.compile(r"[0-9]+")


def bits(mask: int) -> Iterator[int]:
    """Positions of the set bits of `mask`, ascending"""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ========================================
# INDEX SETS
# ========================================

@dataclass(frozen=True)
class IndexSet:
    """Subset of [n] stored as a bitmask"""

    mask: int = 0

    def __post_init__(self):
        if self.mask < 0:
            raise PreconditionError("IndexSet mask must be non-negative")

    @classmethod
    def from_indices(cls, indices: Iterable[int]) -> "IndexSet":
        mask = 0
        for i in indices:
            if i < 0:
                raise PreconditionError(f"Negative index {i}")
            mask |= 1 << i
        return cls(mask)

    @classmethod
    def full(cls, n: int) -> "IndexSet":
        return cls((1 << n) - 1)

    def indices(self) -> List[int]:
        return list(bits(self.mask))

    def __iter__(self) -> Iterator[int]:
        return bits(self.mask)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __contains__(self, index: int) -> bool:
        return index >= 0 and bool(self.mask >> index & 1)

    def __or__(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self.mask | other.mask)

    def __and__(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self.mask & other.mask)

    def __sub__(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self.mask & ~other.mask)

    def isdisjoint(self, other: "IndexSet") -> bool:
        return self.mask & other.mask == 0

    def issubset(self, other: "IndexSet") -> bool:
        return self.mask & ~other.mask == 0

    def fits(self, n: int) -> bool:
        return self.mask >> n == 0

    def hex(self) -> str:
        return hex(self.mask)

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self) + "}"


# ========================================
# INSTANCES AND SOLUTIONS
# ========================================

@dataclass(frozen=True)
class SubsetSumInstance:
    """Weights w_0..w_{n-1} and target t; all values below 2^63"""

    weights: Tuple[int, ...]
    target: int

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        if not 1 <= len(self.weights) <= MAX_N:
            raise PreconditionError(f"n must be in [1, {MAX_N}], got {len(self.weights)}")
        for i, w in enumerate(self.weights):
            if w < 0:
                raise PreconditionError(f"Weight {i} is negative")
            if w >= WEIGHT_LIMIT:
                raise WeightOverflowError(f"Weight {i} is not below 2^63")
        if self.target < 0:
            raise PreconditionError("Target must be non-negative")
        if self.target >= WEIGHT_LIMIT:
            raise WeightOverflowError("Target is not below 2^63")

    @property
    def n(self) -> int:
        return len(self.weights)

    @cached_property
    def total(self) -> int:
        return sum(self.weights)

    def with_target(self, target: int) -> "SubsetSumInstance":
        return SubsetSumInstance(self.weights, target)


@dataclass(frozen=True)
class Solution:
    subset: IndexSet
    achieved_sum: int


def weight_of(instance: SubsetSumInstance, subset: Union[IndexSet, int]) -> int:
    """Sum of the weights indexed by `subset`"""
    mask = subset.mask if isinstance(subset, IndexSet) else subset
    if mask >> instance.n:
        raise PreconditionError(f"Index set {hex(mask)} exceeds n={instance.n}")
    total = sum(instance.weights[i] for i in bits(mask))
    assert total < SUM_LIMIT
    return total


def check_solution(instance: SubsetSumInstance, solution: Optional[Solution]) -> bool:
    if solution is None:
        return False
    return solution.achieved_sum == instance.target and weight_of(instance, solution.subset) == instance.target


# ========================================
# TEXT FORMATS
# ========================================

def _parse_int(token: str, line: int, column: int, what: str) -> int:
    if not _DIGITS.fullmatch(token):
        raise InstanceFormatError(f"{what} '{token}' is not a non-negative integer", line, column)
    value = int(token)
    if value >= WEIGHT_LIMIT:
        raise WeightOverflowError(f"{what} {token} is not below 2^63", line, column)
    return value


def parse_instance(text: Union[str, bytes]) -> SubsetSumInstance:
    """Parse the instance format: line 1 "n t", line 2 the n weights"""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise InstanceFormatError(f"Instance is not UTF-8: {e}")

    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if len(lines) != 2:
        raise InstanceFormatError(f"Expected 2 lines, found {len(lines)}", min(len(lines) + 1, 3))

    header = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(lines[0])]
    if len(header) != 2:
        column = header[2][1] if len(header) > 2 else len(lines[0]) + 1
        raise InstanceFormatError("First line must hold 'n t'", 1, column)
    n = _parse_int(header[0][0], 1, header[0][1], "n")
    if not 1 <= n <= MAX_N:
        raise InstanceFormatError(f"n must be in [1, {MAX_N}], got {n}", 1, header[0][1])
    target = _parse_int(header[1][0], 1, header[1][1], "Target")

    tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(lines[1])]
    if len(tokens) != n:
        column = tokens[n][1] if len(tokens) > n else len(lines[1]) + 1
        raise CountMismatchError(f"Expected {n} weights, found {len(tokens)}", 2, column)
    weights = tuple(_parse_int(tok, 2, col, "Weight") for tok, col in tokens)
    return SubsetSumInstance(weights, target)


def serialize_instance(instance: SubsetSumInstance) -> str:
    return f"{instance.n} {instance.target}\n{' '.join(str(w) for w in instance.weights)}\n"


def serialize_solution(solution: Optional[Solution]) -> str:
    if solution is None:
        return "answer: NO\n"
    return (f"answer: YES\n"
            f"indices: {' '.join(str(i) for i in solution.subset)}\n"
            f"sum: {solution.achieved_sum}\n")


def parse_solution(text: str) -> Optional[Solution]:
    fields = {}
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise InstanceFormatError("Expected 'key: value'", number, 1)
        fields[key.strip()] = value.strip()
    if fields.get("answer") == "NO":
        return None
    if "sum" not in fields:
        raise InstanceFormatError("Missing 'sum' field")
    subset = IndexSet.from_indices(int(tok) for tok in fields.get("indices", "").split())
    return Solution(subset, int(fields["sum"]))


# ========================================
# RANDOMNESS
# ========================================

class Rng:
    """Seeded generator over numpy's counter-based Philox bit generator.

    Children come from SeedSequence spawn keys, so a child's stream depends
    only on (seed, key) and never on how many draws the parent made.
    """

    def __init__(self, seed: int = 0, key: Tuple[int, ...] = ()):
        if seed < 0:
            raise PreconditionError("Seed must be non-negative")
        self.seed = seed
        self.key = tuple(key)
        self._generator = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(seed, spawn_key=self.key))
        )
        self.draws = 0

    @property
    def generator(self) -> np.random.Generator:
        self.draws += 1
        return self._generator

    def derive(self, *key: int) -> "Rng":
        """Child generator addressed by `key`; callers use a leading tag >= 1"""
        return Rng(self.seed, self.key + tuple(key))

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound)"""
        if bound <= 0:
            raise PreconditionError("randbelow needs a positive bound")
        self.draws += 1
        if bound <= 2 ** 62:
            return int(self._generator.integers(0, bound))
        nbits = bound.bit_length()
        nbytes = (nbits + 7) // 8
        while True:
            value = int.from_bytes(self._generator.bytes(nbytes), "little") >> (8 * nbytes - nbits)
            if value < bound:
                return value

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high]"""
        return low + self.randbelow(high - low + 1)

    def random(self) -> float:
        self.draws += 1
        return float(self._generator.random())

    def permutation(self, items: Sequence) -> list:
        self.draws += 1
        return [items[i] for i in self._generator.permutation(len(items))]

    def sample(self, items: Sequence, k: int) -> list:
        """k distinct elements of `items` in random order"""
        if not 0 <= k <= len(items):
            raise PreconditionError(f"Cannot sample {k} of {len(items)} items")
        self.draws += 1
        return [items[i] for i in self._generator.choice(len(items), size=k, replace=False)]

    def binomial(self, trials: int, p: float) -> int:
        self.draws += 1
        return int(self._generator.binomial(trials, p))


def random_subset(rng: Rng, universe: IndexSet, k: int) -> IndexSet:
    """Uniform k-subset of `universe`"""
    members = universe.indices()
    if not 0 <= k <= len(members):
        raise PreconditionError(f"k={k} exceeds |universe|={len(members)}")
    return IndexSet.from_indices(rng.sample(members, k))


def sample_disjoint(rng: Rng, universe: IndexSet, sizes: Sequence[int]) -> List[IndexSet]:
    """Pairwise-disjoint uniform subsets of `universe` with the given sizes"""
    if sum(sizes) > len(universe):
        raise PreconditionError(f"Sizes {list(sizes)} do not fit in a universe of {len(universe)}")
    picked = rng.sample(universe.indices(), sum(sizes))
    out, start = [], 0
    for size in sizes:
        out.append(IndexSet.from_indices(picked[start:start + size]))
        start += size
    return out


# ========================================
# SUBSET ENUMERATION
# ========================================

def subset_sum_table(weights: Sequence[int], universe: int) -> Tuple[List[int], List[int]]:
    """All 2^|universe| subset sums with their masks, built by doubling"""
    sums, masks = [0], [0]
    for i in bits(universe):
        w, bit = weights[i], 1 << i
        sums += [s + w for s in sums]
        masks += [m | bit for m in masks]
    return sums, masks


def k_subset_table(weights: Sequence[int], universe: int, k: int) -> Tuple[List[int], List[int]]:
    """Sums and masks of the k-subsets of `universe`"""
    members = list(bits(universe))
    sums, masks = [], []
    if k < 0 or k > len(members):
        return sums, masks
    for combo in itertools.combinations(members, k):
        mask = 0
        for i in combo:
            mask |= 1 << i
        sums.append(sum(weights[i] for i in combo))
        masks.append(mask)
    return sums, masks
