"""
Numeric helpers: binary entropy and its inverse, primality and random
primes, residue coverage, and the inequality checks the solver analysis
relies on.
"""

import math
from dataclasses import dataclass
from math import comb
from typing import Dict, List, Sequence, Tuple

import numpy as np

from sumsolve.core import Rng, bits, k_subset_table
from sumsolve.errors import PreconditionError

MR_BASES = (2, 325, 9375, 28178, 450775, 9780504, 1795265022)
LOG2_3 = math.log2(3)
TIGHT_TOLERANCE = 1e-6
HOLDS_SLACK = 1e-9
BISECTION_STEPS = 100


# ========================================
# ENTROPY
# ========================================

def entropy(x: float) -> float:
    """Binary entropy h(x) = -x log2 x - (1-x) log2(1-x), with h(0) = h(1) = 0"""
    if x < 0 or x > 1:
        raise PreconditionError(f"Entropy argument {x} outside [0, 1]")
    if x == 0 or x == 1:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def entropy_array(x: np.ndarray) -> np.ndarray:
    """Vectorized entropy; values outside [0, 1] map to nan"""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -x * np.log2(x) - (1 - x) * np.log2(1 - x)
    out = np.where((x == 0) | (x == 1), 0.0, out)
    return np.where((x < 0) | (x > 1), np.nan, out)


def entropy_inverse(y: float, tol: float = 1e-12) -> float:
    """The unique x in [0, 1/2] with h(x) = y, by bisection"""
    if y < 0 or y > 1:
        raise PreconditionError(f"Entropy value {y} outside [0, 1]")
    lo, hi = 0.0, 0.5
    for _ in range(BISECTION_STEPS):
        if hi - lo <= tol:
            break
        mid = (lo + hi) / 2
        if entropy(mid) <= y:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def binomial_exponent(a: float, b: float) -> float:
    """Per-n exponent of C(an, bn), i.e. a*h(b/a); -inf outside 0 <= b <= a"""
    if a < 0 or b < -1e-12 or b > a + 1e-12:
        return -math.inf
    if a == 0:
        return 0.0
    return a * entropy(min(max(b / a, 0.0), 1.0))


# ========================================
# PRIMES
# ========================================

def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 2^64"""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in MR_BASES:
        a %= n
        if a == 0:
            continue
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_between(low: int, high: int) -> List[int]:
    """All primes in [low, high]"""
    return [p for p in range(max(2, low), high + 1) if is_prime(p)]


@dataclass(frozen=True)
class PrimeSample:
    p: int
    low: int
    high: int
    fallback: bool = False


def random_prime(rng: Rng, r: int) -> PrimeSample:
    """Uniform prime in [r, 2r] by rejection; Bertrand guarantees one exists"""
    if r < 2:
        raise PreconditionError(f"random_prime needs r >= 2, got {r}")
    if 2 * r >= 2 ** 63:
        raise PreconditionError("random_prime range exceeds 2^63")
    while True:
        candidate = rng.randint(r, 2 * r)
        if is_prime(candidate):
            return PrimeSample(candidate, r, 2 * r)


def prime_of_order(rng: Rng, exponent: float) -> PrimeSample:
    """Random prime of magnitude 2^exponent (constant 1, floor 2)"""
    magnitude = 2.0 ** exponent if exponent < 62 else float(2 ** 62)
    if magnitude < 2:
        return PrimeSample(2, 2, 2, fallback=exponent > 0)
    return random_prime(rng, int(magnitude))


def prime_divisibility_rate(rng: Rng, x: int, r: int, trials: int) -> float:
    """Fraction of random primes p in [r, 2r] dividing x"""
    if x == 0:
        return 1.0
    hits = sum(1 for _ in range(trials) if x % random_prime(rng, r).p == 0)
    return hits / trials


# ========================================
# RESIDUE COVERAGE
# ========================================

def smallest_s0(q: int, distinct_sums: int) -> int:
    """Smallest s with C(q, s) >= distinct_sums / q"""
    for s in range(q + 1):
        if comb(q, s) * q >= distinct_sums:
            return s
    return q


def residue_coverage(weights: Sequence[int], subset: int, p: int, size_range: Tuple[int, int]) -> int:
    """Number of residues mod p hit by w(X) for X within `subset`, |X| in size_range"""
    q = subset.bit_count()
    if q > 24:
        raise PreconditionError(f"residue_coverage enumerates at most 24 elements, got {q}")
    low, high = size_range
    residues = set()
    for size in range(max(low, 0), min(high, q) + 1):
        sums, _ = k_subset_table(weights, subset, size)
        residues.update(s % p for s in sums)
    return len(residues)


def concentration_estimate(rng: Rng, d: int, a: int, b: int, trials: int) -> float:
    """Empirical Pr[|A ∩ B| = ab/d] for a fixed a-set A and a uniform b-set B"""
    if not (0 <= a <= d and 0 <= b <= d) or (a * b) % d:
        raise PreconditionError(f"ab/d must be an integer (d={d}, a={a}, b={b})")
    keys = rng.generator.random((trials, d))
    chosen = np.argsort(keys, axis=1)[:, :b]
    overlap = (chosen < a).sum(axis=1)
    return float(np.mean(overlap == a * b // d))


def hypergeometric_point(d: int, a: int, b: int, k: int) -> float:
    """Exact Pr[|A ∩ B| = k] for the setting of concentration_estimate"""
    return comb(a, k) * comb(d - a, b - k) / comb(d, b)


# ========================================
# INEQUALITY CHECKS
# ========================================

def ov_exponent(x: np.ndarray, lam: float, sigma: float) -> np.ndarray:
    """E(x): per-d exponent of max(C(1-λσ, x-λσ), C(1-(1-σ)λ, x)) / C(1-λ, x-λσ)"""
    x = np.asarray(x, dtype=float)
    ls, lr = lam * sigma, lam * (1 - sigma)

    def exp_binom(a, b):
        if a <= 0:
            return np.where(np.abs(b) < 1e-12, 0.0, -np.inf)
        ratio = b / a
        valid = (ratio >= -1e-12) & (ratio <= 1 + 1e-12)
        return np.where(valid, a * entropy_array(np.clip(ratio, 0, 1)), -np.inf)

    numerator = np.maximum(exp_binom(1 - ls, x - ls), exp_binom(1 - lr, x))
    denominator = exp_binom(1 - lam, x - ls)
    with np.errstate(invalid="ignore"):
        return np.where(np.isfinite(denominator), numerator - denominator, np.inf)


def ov_minimizer(lam: float, sigma: float) -> float:
    """Closed-form near-optimal x for the cover construction"""
    return 0.5 + (sigma - 0.5) * (LOG2_3 / 2) + (0.5 - sigma) * (0.5 - lam)


def ov_time_exponent(lam: float) -> float:
    """1/2 + λ - h(λ/2)"""
    return 0.5 + lam - entropy(lam / 2)


@dataclass
class OvInequalityReport:
    lam: float
    sigma: float
    grid_min: float
    grid_argmin: float
    closed_form_x: float
    closed_form_value: float
    rhs: float
    margin: float
    tight: bool
    holds: bool


def verify_ov_inequality(lam: float, sigma: float, grid_step: float = 1e-3) -> OvInequalityReport:
    """Minimize E(x) over a grid (plus the closed-form point) and compare with 1/2 + λ - h(λ/2)"""
    if not (0 < lam <= 0.5 and 0 <= sigma <= 1):
        raise PreconditionError(f"Need λ in (0, 1/2] and σ in [0, 1], got λ={lam}, σ={sigma}")
    steps = int(round(1 / grid_step))
    grid = np.arange(steps + 1) * grid_step
    x_star = ov_minimizer(lam, sigma)
    grid = np.append(grid, x_star)
    values = ov_exponent(grid, lam, sigma)
    best = int(np.argmin(values))
    grid_min = float(values[best])
    rhs = ov_time_exponent(lam)
    margin = rhs - grid_min
    return OvInequalityReport(
        lam=lam, sigma=sigma,
        grid_min=grid_min, grid_argmin=float(grid[best]),
        closed_form_x=x_star, closed_form_value=float(values[-1]),
        rhs=rhs, margin=margin,
        tight=abs(margin) < TIGHT_TOLERANCE,
        holds=margin >= -HOLDS_SLACK,
    )


@dataclass
class InequalityCheck:
    name: str
    points: int
    violations: int
    worst_margin: float


def entropy_inequality_suite(step: float = 1e-3, grid2: float = 1e-2) -> List[InequalityCheck]:
    """Grid checks of the entropy bounds used in the analysis"""
    alpha = np.arange(int(round(0.5 / step)) + 1) * step
    checks = []

    def record(name, margin):
        margin = np.asarray(margin, dtype=float).ravel()
        checks.append(InequalityCheck(name, margin.size, int(np.sum(margin < -1e-12)), float(margin.min())))

    h_half = entropy_array(0.5 - alpha)
    record("1-4a^2 <= h(1/2-a)", h_half - (1 - 4 * alpha ** 2))
    record("h(1/2-a) <= 1-2a^2/ln2", (1 - 2 * alpha ** 2 / math.log(2)) - h_half)
    record("h(1/4+a) <= h(1/4)+a*log2(3)", entropy(0.25) + alpha * LOG2_3 - entropy_array(0.25 + alpha))

    axis = np.arange(int(round(1 / grid2)) + 1) * grid2
    sigma, lam = np.meshgrid(axis, axis)
    record("h(sl)+h((1-s)l) <= 2h(l/2)",
           2 * entropy_array(lam / 2) - entropy_array(sigma * lam) - entropy_array((1 - sigma) * lam))
    return checks


def binomial_bounds_check(d_max: int) -> InequalityCheck:
    """2^{d h(k/d)} / sqrt(2d) <= C(d, k) <= 2^{d h(k/d)} for 1 <= k < d <= d_max"""
    worst, points, violations = math.inf, 0, 0
    for d in range(2, d_max + 1):
        for k in range(1, d):
            upper = d * entropy(k / d)
            exact = math.log2(comb(d, k))
            margin = min(upper - exact, exact - (upper - 0.5 * math.log2(2 * d)))
            points += 1
            violations += margin < -1e-9
            worst = min(worst, margin)
    return InequalityCheck("binomial estimate", points, violations, worst)


# ========================================
# SPACE EXPONENTS
# ========================================

def space_exponents(mu: float, lam: float = 0.5, slack: float = 0.02) -> Dict[str, float]:
    """Per-n exponents of the level-two list sizes and the mixer enumeration"""
    h4 = entropy(0.25)
    outer = 0.5 - mu * (1.5 + lam - h4) + slack * mu
    inner = mu * (2 * h4 - lam) + slack * mu
    return {"outer": outer, "inner": inner, "mixer": mu, "max": max(outer, inner, mu)}


def p4_list_exponent(mu: float) -> float:
    h4 = entropy(0.25)
    return max(0.5 - mu * (2 - h4), mu * (2 * h4 - 0.5))


def optimal_p4_mu() -> Tuple[float, float]:
    """μ balancing the two P4 list terms, and the resulting exponent"""
    mu = 1 / (3 + 2 * entropy(0.25))
    return mu, p4_list_exponent(mu)


def distinct_subset_sums(weights: Sequence[int], subset: int) -> int:
    """|w(2^Q)| for Q = subset"""
    sums = {0}
    for i in bits(subset):
        w = weights[i]
        sums |= {s + w for s in sums}
    return len(sums)


def balance_parameter(lam: float, sigma: float) -> float:
    """β = h(σλ) - h((1-σ)λ)"""
    return entropy(sigma * lam) - entropy((1 - sigma) * lam)
