"""
Instance generators for experiments and tests
"""

from typing import Optional, Sequence, Tuple

from sumsolve.core import MAX_N, WEIGHT_LIMIT, IndexSet, Rng, SubsetSumInstance, random_subset, weight_of
from sumsolve.errors import PreconditionError

KINDS = ("uniform", "planted", "powers", "low-mixing")


def planted_instance(rng: Rng, weights: Sequence[int], size: Optional[int] = None) -> Tuple[SubsetSumInstance, IndexSet]:
    """Target set to the weight of a random subset of the given size (default n/2)"""
    n = len(weights)
    subset = random_subset(rng, IndexSet.full(n), n // 2 if size is None else size)
    instance = SubsetSumInstance(tuple(weights), 0)
    return instance.with_target(weight_of(instance, subset)), subset


def generate_instance(rng: Rng, kind: str, n: int, bit_width: int = 20) -> SubsetSumInstance:
    """uniform: iid weights in [1, 2^bit_width] and a uniform target in [0, w([n])];
    planted: uniform weights, target = weight of a random n/2-subset;
    powers: w_i = 2^i with a uniform target below 2^n;
    low-mixing: weights drawn from {a, 2a}, planted target."""
    if kind not in KINDS:
        raise PreconditionError(f"Unknown instance kind '{kind}' (choose from {', '.join(KINDS)})")
    if not 1 <= n <= MAX_N:
        raise PreconditionError(f"n must be in [1, {MAX_N}], got {n}")
    if not 1 <= bit_width <= 62:
        raise PreconditionError(f"bit_width must be in [1, 62], got {bit_width}")

    if kind == "powers":
        return SubsetSumInstance(tuple(1 << i for i in range(n)), rng.randbelow(1 << n))

    if kind in ("planted", "low-mixing") and n << bit_width >= WEIGHT_LIMIT:
        raise PreconditionError(f"n * 2^{bit_width} does not fit below 2^63")

    if kind == "low-mixing":
        base = rng.randint(1, max(1, 1 << (bit_width - 1)))
        weights = [base * (1 + rng.randbelow(2)) for _ in range(n)]
        return planted_instance(rng, weights)[0]

    weights = [rng.randint(1, 1 << bit_width) for _ in range(n)]
    if kind == "planted":
        return planted_instance(rng, weights)[0]
    total = sum(weights)
    return SubsetSumInstance(tuple(weights), rng.randint(0, min(total, WEIGHT_LIMIT - 1)))
