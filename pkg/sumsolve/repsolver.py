"""
Representation-based solver.

Candidate half-solutions are filtered by random residues modulo random
primes, so each list keeps only a 1/p fraction of its candidates while some
representation of the solution survives with good probability. Pairs of lists
are then combined by sorted sumset streams, and partial solutions with equal
weight are matched by orthogonal-vectors detection on their supports inside
the mixer.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

from sumsolve.config import Preset, get_preset
from sumsolve.core import (
    IndexSet,
    Rng,
    Solution,
    SubsetSumInstance,
    bits,
    k_subset_table,
    sample_disjoint,
    subset_sum_table,
    weight_of,
)
from sumsolve.errors import PreconditionError, WeightOverflowError
from sumsolve.metrics import SolveStats
from sumsolve.mixer import compute_mixer, small_lambda_solve, win_win_solve
from sumsolve.numerics import balance_parameter, entropy, prime_of_order
from sumsolve.ov import ov_detect, ov_naive
from sumsolve.sumset import Direction, SumsetEnumerator, brute_force_solve
from sumsolve.tracing import span

logger = logging.getLogger(__name__)

MAX_SINGLE_LEVEL_M = 24
MAX_LEVEL_TWO_M = 20
TINY_N = 4

TAG_PARTITION = 31
TAG_ITERATION = 32
TAG_ROUND = 33
TAG_SIZE = 34
TAG_BUDGET = 35
TAG_SINGLE = 36


class ListMember(NamedTuple):
    witness: int  # bitmask over [n]
    weight: int


def residue_join(left: Tuple[List[int], List[int]], right: Tuple[List[int], List[int]],
                 modulus: int, residue: int) -> List[ListMember]:
    """All unions X | Y of a left and a right entry with w(X) + w(Y) ≡ residue"""
    right_sums, right_masks = right
    by_residue: Dict[int, List[int]] = {}
    for j, s in enumerate(right_sums):
        by_residue.setdefault(s % modulus, []).append(j)
    out = []
    for s, mask in zip(*left):
        for j in by_residue.get((residue - s) % modulus, ()):
            out.append(ListMember(mask | right_masks[j], s + right_sums[j]))
    return out


def _compressor(support: int) -> Callable[[int], int]:
    """Map a bitmask inside `support` to a bitmask over [|support|]"""
    position = {i: j for j, i in enumerate(bits(support))}

    def compress(mask: int) -> int:
        out = 0
        for i in bits(mask & support):
            out |= 1 << position[i]
        return out

    return compress


def _match_supports(rng: Rng, left: Sequence[int], right: Sequence[int], support: int,
                    p: int, q: int, config: Preset,
                    cover_cache: Dict) -> Optional[Tuple[int, int]]:
    """Disjoint (left, right) support pair, naive below the crossover"""
    if len(left) * len(right) < config.crossover:
        return ov_naive(left, right)
    compress = _compressor(support)
    back_left = {compress(a): a for a in left}
    back_right = {compress(b): b for b in right}
    found = ov_detect(rng, list(back_left), list(back_right), support.bit_count(), p, q,
                      c=config.ov_blocks, trials=config.ov_trials,
                      afford_multiplier=config.afford_multiplier,
                      table_budget=config.table_budget, cover_cache=cover_cache)
    if found is None:
        return None
    return back_left[found[0]], back_right[found[1]]


# ========================================
# SINGLE LEVEL
# ========================================

@dataclass
class WovInstance:
    """Weighted OV: pick l in left, r in right with w(l) + w(r) = target and disjoint supports"""

    left: List[ListMember]
    right: List[ListMember]
    target: int
    support: IndexSet
    prime: int
    residue: int
    L: IndexSet
    R: IndexSet


def rep_reduce_single_level(rng: Rng, instance: SubsetSumInstance, mixer: IndexSet,
                            stats: Optional[SolveStats] = None) -> WovInstance:
    """One-level reduction of Subset Sum to weighted OV over the mixer"""
    m = len(mixer)
    if m % 4:
        raise PreconditionError(f"Single-level mixer size must be divisible by 4, got {m}")
    if m > MAX_SINGLE_LEVEL_M:
        raise PreconditionError(f"Mixer of size {m} exceeds {MAX_SINGLE_LEVEL_M}")
    stats = stats or SolveStats()
    n, t, weights = instance.n, instance.target, instance.weights

    rest = rng.permutation([i for i in range(n) if i not in mixer])
    L = IndexSet.from_indices(rest[:len(rest) // 2])
    R = IndexSet.from_indices(rest[len(rest) // 2:])
    prime = prime_of_order(rng, m / 2).p
    x = rng.randbelow(prime)

    quarter = k_subset_table(weights, mixer.mask, m // 4)
    left = residue_join(subset_sum_table(weights, L.mask), quarter, prime, x)
    right = residue_join(subset_sum_table(weights, R.mask), quarter, prime, (t - x) % prime)
    stats.primes["p"] = prime
    stats.residues["x"] = x
    stats.list_sizes.update({"left": len(left), "right": len(right)})
    stats.payload.alloc(2 * (len(left) + len(right)))
    return WovInstance(left, right, t, mixer, prime, x, L, R)


def wov_naive(wov: WovInstance) -> Optional[Tuple[ListMember, ListMember]]:
    """Exact weighted-OV oracle"""
    by_weight: Dict[int, List[ListMember]] = {}
    for member in wov.right:
        by_weight.setdefault(member.weight, []).append(member)
    for member in wov.left:
        for other in by_weight.get(wov.target - member.weight, ()):
            if member.witness & other.witness == 0:
                return member, other
    return None


def solve_wov(rng: Rng, wov: WovInstance, config: Optional[Preset] = None,
              stats: Optional[SolveStats] = None) -> Optional[Tuple[ListMember, ListMember]]:
    """Weighted OV by grouping on weight, then unweighted OV on the supports"""
    config = config or get_preset()
    support = wov.support.mask
    left: Dict[int, Dict[int, ListMember]] = {}
    right: Dict[int, Dict[int, ListMember]] = {}
    for member in wov.left:
        left.setdefault(member.weight, {}).setdefault(member.witness & support, member)
    for member in wov.right:
        right.setdefault(member.weight, {}).setdefault(member.witness & support, member)

    quarter = len(wov.support) // 4
    cover_cache: Dict = {}
    for index, (weight, group) in enumerate(sorted(left.items())):
        other = right.get(wov.target - weight)
        if not other:
            continue
        found = _match_supports(rng.derive(index), list(group), list(other), support,
                                quarter, quarter, config, cover_cache)
        if found is not None:
            return group[found[0]], other[found[1]]
    return None


def single_level_solve(rng: Rng, instance: SubsetSumInstance, mixer: Optional[IndexSet] = None,
                       config: Optional[Preset] = None, repetitions: Optional[int] = None,
                       stats: Optional[SolveStats] = None) -> Optional[Solution]:
    """Repeated one-level reductions, each solved by weighted OV"""
    config = config or get_preset()
    stats = stats or SolveStats()
    stats.fire("single-level")
    if instance.target == 0:
        return Solution(IndexSet(), 0)
    n = instance.n
    if mixer is None:
        m = min(4 * max(1, round(config.mu * n / 4)), 4 * (n // 4), MAX_SINGLE_LEVEL_M)
        if m == 0:
            return brute_force_solve(instance, stats)
        mixer = sample_disjoint(rng.derive(TAG_PARTITION), IndexSet.full(n), [m])[0]
    for rep in range(repetitions or config.repetitions):
        round_rng = rng.derive(TAG_SINGLE, rep)
        wov = rep_reduce_single_level(round_rng.derive(1), instance, mixer, stats)
        try:
            pair = solve_wov(round_rng.derive(2), wov, config, stats)
        finally:
            stats.payload.free(2 * (len(wov.left) + len(wov.right)))
        if pair is not None:
            mask = pair[0].witness | pair[1].witness
            assert weight_of(instance, mask) == instance.target
            return Solution(IndexSet(mask), instance.target)
    return None


# ========================================
# LEVEL TWO
# ========================================

@dataclass
class LevelTwoLists:
    L1: List[ListMember]
    L2: List[ListMember]
    R1: List[ListMember]
    R2: List[ListMember]
    L: IndexSet
    M_L: IndexSet
    M: IndexSet
    M_R: IndexSet
    R: IndexSet
    p_L: int
    p_R: int
    p_prime: int
    x: int
    x_L: int
    x_R: int
    sizes: Tuple[int, int, int]
    lambda_count: int
    beta: float
    target: int
    total_weight: int
    prime_fallback: bool = False
    payload: int = 0
    peak_payload: int = 0

    def list_sizes(self) -> Dict[str, int]:
        return {"L1": len(self.L1), "L2": len(self.L2), "R1": len(self.R1), "R2": len(self.R2)}


class Quadruple(NamedTuple):
    a1: ListMember  # from L1
    a2: ListMember  # from L2
    a3: ListMember  # from R2
    a4: ListMember  # from R1

    @property
    def mask(self) -> int:
        return self.a1.witness | self.a2.witness | self.a3.witness | self.a4.witness

    @property
    def weight(self) -> int:
        return self.a1.weight + self.a2.weight + self.a3.weight + self.a4.weight


def admissible_sizes(k: int, lam: float, eps: float, n: int) -> List[int]:
    """Sizes s in [0, k] with h(s/k) >= 1 - eps/lam - log2(n)/n, always including k/2 rounded both ways"""
    if k == 0:
        return [0]
    threshold = 1 - eps / lam - math.log2(n) / n
    band = {s for s in range(k + 1) if entropy(s / k) >= threshold}
    band.update({k // 2, (k + 1) // 2})
    return sorted(band)


def build_level_two_lists(rng: Rng, instance: SubsetSumInstance, M_L: IndexSet, M: IndexSet, M_R: IndexSet,
                          lambda_count: int, sigma_sizes: Tuple[int, int, int],
                          eps_L: float = 0.0, eps_R: float = 0.0,
                          rest_order: Optional[Sequence[int]] = None,
                          stats: Optional[SolveStats] = None) -> LevelTwoLists:
    """Sample primes and residues and build the four residue-filtered lists"""
    n, t, weights = instance.n, instance.target, instance.weights
    m, k = len(M), lambda_count
    s, s_L, s_R = sigma_sizes
    if not (len(M_L) == m == len(M_R)):
        raise PreconditionError(f"Mixers must have equal sizes, got {len(M_L)}, {m}, {len(M_R)}")
    if not (M_L.isdisjoint(M) and M.isdisjoint(M_R) and M_L.isdisjoint(M_R)):
        raise PreconditionError("Mixers must be pairwise disjoint")
    if m == 0 or m > MAX_LEVEL_TWO_M:
        raise PreconditionError(f"Mixer size must be in [1, {MAX_LEVEL_TWO_M}], got {m}")
    if not 0 <= k <= m:
        raise PreconditionError(f"lambda_count {k} outside [0, {m}]")
    if not all(0 <= v <= k for v in sigma_sizes):
        raise PreconditionError(f"Sizes {sigma_sizes} outside [0, {k}]")
    if eps_L > eps_R:
        raise PreconditionError(f"Need eps_L <= eps_R, got {eps_L} > {eps_R}")
    stats = stats or SolveStats()

    used = M_L | M | M_R
    rest = [i for i in range(n) if i not in used]
    order = list(rest_order) if rest_order is not None else rest
    if sorted(order) != rest:
        raise PreconditionError("rest_order must be a permutation of the indices outside the mixers")

    lam = k / m
    sigma = s / k if k else 0.5
    beta = balance_parameter(lam, sigma)
    size_L = min(max(round((n - 3 * m - beta * m) / 2), 0), len(rest))
    L = IndexSet.from_indices(order[:size_L])
    R = IndexSet.from_indices(order[size_L:])

    right_prime = prime_of_order(rng, k - eps_R * m)
    bridge_prime = prime_of_order(rng, (eps_R - eps_L) * m)
    p_R = right_prime.p
    p_L = bridge_prime.p * p_R
    fallback = right_prime.fallback or bridge_prime.fallback
    if fallback:
        logger.warning(f"Prime interval below 2 after rounding; using p=2 (k={k}, m={m})")
    x = rng.randbelow(p_L)
    x_L = rng.randbelow(p_L)
    x_R = rng.randbelow(p_R)

    tables = {
        "L": subset_sum_table(weights, L.mask),
        "R": subset_sum_table(weights, R.mask),
        "S2": k_subset_table(weights, M_L.mask, s_L),
        "S3": k_subset_table(weights, M_L.mask, k - s_L),
        "S4": k_subset_table(weights, M.mask, s),
        "S5": k_subset_table(weights, M.mask, k - s),
        "S6": k_subset_table(weights, M_R.mask, k - s_R),
        "S7": k_subset_table(weights, M_R.mask, s_R),
    }
    table_payload = sum(2 * len(sums) for sums, _ in tables.values())
    with stats.payload.hold(table_payload):
        L1 = residue_join(tables["L"], tables["S2"], p_L, x_L)
        L2 = residue_join(tables["S3"], tables["S4"], p_L, (x - x_L) % p_L)
        R2 = residue_join(tables["S5"], tables["S6"], p_R, x_R)
        R1 = residue_join(tables["S7"], tables["R"], p_R, (t - x - x_R) % p_R)
        payload = 2 * (len(L1) + len(L2) + len(R1) + len(R2))
        stats.payload.alloc(payload)

    lists = LevelTwoLists(
        L1=L1, L2=L2, R1=R1, R2=R2,
        L=L, M_L=M_L, M=M, M_R=M_R, R=R,
        p_L=p_L, p_R=p_R, p_prime=bridge_prime.p,
        x=x, x_L=x_L, x_R=x_R,
        sizes=(s, s_L, s_R), lambda_count=k, beta=beta,
        target=t, total_weight=instance.total,
        prime_fallback=fallback, payload=payload,
        peak_payload=table_payload + payload,
    )
    assert lists.p_L % lists.p_R == 0
    stats.primes.update({"p_L": p_L, "p_R": p_R, "p_prime": bridge_prime.p})
    stats.residues.update({"x": x, "x_L": x_L, "x_R": x_R})
    stats.list_sizes.update(lists.list_sizes())
    return lists


def weighted_ov(lists: LevelTwoLists, rng: Rng, config: Optional[Preset] = None,
                stats: Optional[SolveStats] = None,
                cover_cache: Optional[Dict] = None) -> Optional[Quadruple]:
    """Match weight groups of L1 + L2 against R1 + R2 and solve OV on the mixer supports"""
    config = config or get_preset()
    stats = stats or SolveStats()
    cover_cache = cover_cache if cover_cache is not None else {}
    if not (lists.L1 and lists.L2 and lists.R1 and lists.R2):
        return None
    t, support = lists.target, lists.M.mask
    s = lists.sizes[0]
    meter = stats.payload

    inc = SumsetEnumerator([e.weight for e in lists.L1], [e.weight for e in lists.L2], Direction.INCREASING, meter)
    dec = SumsetEnumerator([e.weight for e in lists.R1], [e.weight for e in lists.R2], Direction.DECREASING, meter)
    try:
        right = dec.next_group()
        for cell, left in enumerate(inc):
            while right is not None and left.value + right.value > t:
                right = dec.next_group()
            if right is None:
                return None
            if left.value + right.value != t:
                continue
            assert left.value % lists.p_L == lists.x % lists.p_L
            assert right.value % lists.p_R == (t - lists.x) % lists.p_R
            if len(left.pairs) > config.cross_product_cap or len(right.pairs) > config.cross_product_cap:
                logger.warning(f"Weight group of size {max(len(left.pairs), len(right.pairs))} over the cap; skipped")
                stats.counters["weighted_ov.cap_hits"] += 1
                continue

            left_by_support: Dict[int, Tuple[ListMember, ListMember]] = {}
            for i1, i2 in left.pairs:
                a1, a2 = lists.L1[i1], lists.L2[i2]
                if a1.witness & a2.witness == 0:
                    left_by_support.setdefault(a2.witness & support, (a1, a2))
            right_by_support: Dict[int, Tuple[ListMember, ListMember]] = {}
            for i1, i2 in right.pairs:
                a4, a3 = lists.R1[i1], lists.R2[i2]
                if a3.witness & a4.witness == 0:
                    right_by_support.setdefault(a3.witness & support, (a3, a4))

            with meter.hold(len(left_by_support) + len(right_by_support)):
                found = _match_supports(rng.derive(cell), list(left_by_support), list(right_by_support),
                                        support, s, lists.lambda_count - s, config, cover_cache)
            stats.counters["weighted_ov.cells"] += 1
            if found is None:
                continue
            a1, a2 = left_by_support[found[0]]
            a3, a4 = right_by_support[found[1]]
            quad = Quadruple(a1, a2, a3, a4)
            assert quad.weight == t
            return quad
        return None
    finally:
        inc.close()
        dec.close()


Detector = Callable[[LevelTwoLists, Rng, Preset, SolveStats, Dict], Optional[Quadruple]]


def main_lemma_loop(rng: Rng, instance: SubsetSumInstance, M_L: IndexSet, M: IndexSet, M_R: IndexSet,
                    lambda_count: int, eps_L: float, eps_R: float, config: Preset,
                    repetitions: int, stats: SolveStats, detect: Detector) -> Optional[Solution]:
    """Iterate the size band and the repetitions, building lists and running `detect`"""
    n, m, k = instance.n, len(M), lambda_count
    if m == 0 or m > MAX_LEVEL_TWO_M:
        raise PreconditionError(f"Mixer size must be in [1, {MAX_LEVEL_TWO_M}], got {m}")
    band = admissible_sizes(k, k / m, eps_R, n)
    used = M_L | M | M_R
    rest_order = rng.derive(TAG_PARTITION).permutation([i for i in range(n) if i not in used])
    triples = list(itertools.product(band, band, band))
    cover_cache: Dict = {}

    for rep in range(repetitions):
        for index, sizes in enumerate(triples):
            iteration = rng.derive(TAG_ITERATION, rep, index)
            with span("main_lemma.iteration", rep=rep, s=sizes[0], s_L=sizes[1], s_R=sizes[2]):
                lists = build_level_two_lists(iteration.derive(1), instance, M_L, M, M_R, k, sizes,
                                              eps_L, eps_R, rest_order, stats)
                try:
                    quad = detect(lists, iteration.derive(2), config, stats, cover_cache)
                finally:
                    stats.payload.free(lists.payload)
            stats.counters["main_lemma.iterations"] += 1
            if quad is None:
                continue
            mask = quad.mask
            parts = (quad.a1.witness, quad.a2.witness, quad.a3.witness, quad.a4.witness)
            assert all(a & b == 0 for a, b in itertools.combinations(parts, 2))
            assert weight_of(instance, mask) == instance.target
            for mixer in (M_L, M, M_R):
                assert (mask & mixer.mask).bit_count() == k
            logger.debug(f"main lemma hit at rep={rep} sizes={sizes}")
            return Solution(IndexSet(mask), instance.target)
    return None


def main_lemma_solve(rng: Rng, instance: SubsetSumInstance, M_L: IndexSet, M: IndexSet, M_R: IndexSet,
                     lambda_count: int, eps_L: float = 0.0, eps_R: float = 0.0,
                     config: Optional[Preset] = None, repetitions: int = 1,
                     stats: Optional[SolveStats] = None) -> Optional[Solution]:
    """Level-two representation solve with weighted OV detection"""
    return main_lemma_loop(rng, instance, M_L, M, M_R, lambda_count, eps_L, eps_R,
                           config or get_preset(), repetitions, stats or SolveStats(), weighted_ov)


# ========================================
# DRIVER
# ========================================

def _detector(name: str) -> Detector:
    if name == "wov":
        return weighted_ov
    if name == "p4":
        from sumsolve.p4 import p4_detect
        return p4_detect
    raise PreconditionError(f"Unknown detector '{name}'")


@dataclass
class _SizeOutcome:
    solution: Optional[Solution]
    exact: bool = False


def _solve_for_size(rng: Rng, instance: SubsetSumInstance, size: int, config: Preset,
                    stats: SolveStats, detect: Detector, small_lambda_trials: int = 1) -> _SizeOutcome:
    n = instance.n
    work, count, flipped = instance, size, False
    if 2 * size > n:
        try:
            work = instance.with_target(instance.total - instance.target)
            count, flipped = n - size, True
        except WeightOverflowError:
            pass

    lam = count / n
    exact = False
    if lam < config.lambda0:
        stats.fire("small-lambda")
        found = small_lambda_solve(rng, work, count, trials=small_lambda_trials, stats=stats)
    else:
        m = min(max(1, round(config.mu * n)), n // 3, MAX_LEVEL_TWO_M)
        mixers = sample_disjoint(rng.derive(TAG_PARTITION), IndexSet.full(n), [m, m, m])
        reports = [compute_mixer(work, mixer) for mixer in mixers]
        stats.mixers = reports
        worst = max(range(3), key=lambda i: reports[i].epsilon)
        if reports[worst].epsilon >= config.eps0:
            stats.fire("win-win")
            found = win_win_solve(work, mixers[worst], config.eps0, min(m / n, 0.25), stats)
            exact = True
        else:
            order = sorted(range(3), key=lambda i: reports[i].epsilon)
            M, M_L, M_R = (mixers[i] for i in order)
            eps_L, eps_R = reports[order[1]].epsilon, reports[order[2]].epsilon
            stats.fire("main-lemma")
            found = main_lemma_loop(rng, work, M_L, M, M_R, round(lam * m), eps_L, eps_R,
                                    config, 1, stats, detect)

    if found is not None and flipped:
        found = Solution(IndexSet.full(n) - found.subset, instance.target)
    return _SizeOutcome(found, exact)


def solve(rng: Rng, instance: SubsetSumInstance, config: Optional[Preset] = None,
          stats: Optional[SolveStats] = None, detector: str = "wov",
          repetitions: Optional[int] = None) -> Optional[Solution]:
    """Guess the solution size, dispatch to a branch, and amplify over repetitions"""
    config = config or get_preset()
    stats = stats or SolveStats()
    detect = _detector(detector)
    n, t = instance.n, instance.target

    if t == 0:
        stats.fire("empty")
        return Solution(IndexSet(), 0)
    if t > instance.total:
        stats.fire("trivial")
        return None
    if n <= TINY_N:
        return brute_force_solve(instance, stats)

    rounds = repetitions or config.repetitions
    # small-lambda trials are spread over the rounds
    trials = max(1, math.ceil(config.trials_for(n) / rounds))
    for rep in range(rounds):
        round_rng = rng.derive(TAG_ROUND, rep)
        for size in range(1, n + 1):
            outcome = _solve_for_size(round_rng.derive(TAG_SIZE, size), instance, size, config, stats, detect,
                                      trials)
            if outcome.solution is not None:
                assert weight_of(instance, outcome.solution.subset) == t
                return outcome.solution
            if outcome.exact:
                return None
    return None


def solve_with_space_budget(rng: Rng, instance: SubsetSumInstance, budget_exponent: float,
                            config: Optional[Preset] = None, stats: Optional[SolveStats] = None,
                            detector: str = "wov") -> Optional[Solution]:
    """Enumerate the top b elements and solve the residual instance within the budget"""
    config = config or get_preset()
    stats = stats or SolveStats()
    n = instance.n
    b = min(max(math.ceil(n - budget_exponent / config.space_gamma), 0), n)
    if b == 0:
        return solve(rng, instance, config, stats, detector)

    stats.counters["budget.b"] = b
    stats.counters["budget.payload_cap"] = math.ceil(2 ** (budget_exponent * n))
    low = n - b
    for outer in range(1 << b):
        rest = instance.target - sum(instance.weights[low + i] for i in bits(outer))
        if rest < 0:
            continue
        if low == 0:
            if rest == 0:
                stats.fire("budget")
                return Solution(IndexSet(outer), instance.target)
            continue
        residual = SubsetSumInstance(instance.weights[:low], rest)
        found = solve(rng.derive(TAG_BUDGET, outer), residual, config, stats, detector)
        if found is not None:
            return Solution(IndexSet(found.subset.mask | outer << low), instance.target)
    return None
