"""
Orthogonal vectors over a small dimension d.

A 1-cover of Disj_{p,q,d} is a family of certificate sets S_j such that every
disjoint pair (A, B) with |A| = p, |B| = q has some S_j ⊇ A with S_j ∩ B = ∅.
Detection marks the certificates containing each left vector and probes the
certificates avoiding each right vector.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from sumsolve.core import Rng
from sumsolve.errors import OvTableBudgetError, PreconditionError
from sumsolve.metrics import count_ov_call
from sumsolve.numerics import entropy, ov_minimizer
from sumsolve.schemas import SparsityReport

logger = logging.getLogger(__name__)

MAX_COVER_D = 32
MAX_VALIDITY_D = 16
MAX_CERTIFICATES = 2 ** 22
TAG_COVER = 21
TAG_OV = 22

SupportVector = int  # bitmask over [d]


@dataclass(frozen=True, eq=False)
class OneCover:
    d: int
    p: int
    q: int
    x: int
    certificates: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.certificates.size)


@lru_cache(maxsize=64)
def _k_masks(d: int, k: int) -> np.ndarray:
    """All k-subsets of [d] as uint64 masks, in lexicographic order"""
    masks = [sum(1 << i for i in combo) for combo in itertools.combinations(range(d), k)]
    out = np.array(masks, dtype=np.uint64)
    out.setflags(write=False)
    return out


def inclusion_probability(d: int, p: int, q: int, x: int) -> float:
    return min(1.0, 2 * d / comb(d - p - q, x - p))


def expected_sparsity_bound(d: int, p: int, q: int, x: int) -> float:
    """4d (C(d-p, x-p) + C(d-q, x)) / C(d-p-q, x-p)"""
    return 4 * d * (comb(d - p, x - p) + comb(d - q, x)) / comb(d - p - q, x - p)


def analytic_sparsity(d: int, p: int, q: int) -> float:
    """2^{d/2 + p + q - d h((p+q)/(2d))}"""
    return 2.0 ** (d / 2 + p + q - d * entropy((p + q) / (2 * d)))


def sparsity_floor(d: int) -> float:
    """2^d / C(d, d/4), the sparsity lower bound for covers at p = q = d/4"""
    if d <= 0 or d % 4:
        raise PreconditionError(f"sparsity_floor needs d divisible by 4, got {d}")
    return 2.0 ** d / comb(d, d // 4)


def _check_dimensions(d: int, p: int, q: int):
    if d > MAX_COVER_D:
        raise PreconditionError(f"Cover dimension {d} exceeds {MAX_COVER_D}")
    if p < 0 or q < 0 or p + q > d:
        raise PreconditionError(f"Need p, q >= 0 and p + q <= d (d={d}, p={p}, q={q})")
    if p + q > d / 2:
        logger.warning(f"Cover requested with p + q = {p + q} > d/2 = {d / 2}")


def _sample_cover(rng: Rng, d: int, p: int, q: int, x: int) -> OneCover:
    prob = inclusion_probability(d, p, q, x)
    total = comb(d, x)
    if total <= 2 ** 20:
        candidates = _k_masks(d, x)
        certificates = candidates[rng.generator.random(total) < prob]
    else:
        wanted = rng.binomial(total, prob)
        if wanted > MAX_CERTIFICATES:
            raise PreconditionError(f"Cover would hold {wanted} certificates")
        chosen = set()
        while len(chosen) < wanted:
            chosen.add(sum(1 << int(i) for i in rng.generator.choice(d, x, replace=False)))
        certificates = np.array(sorted(chosen), dtype=np.uint64)
    return OneCover(d, p, q, x, certificates)


def build_cover(rng: Rng, d: int, p: int, q: int, x: Optional[int] = None) -> OneCover:
    """Random 1-cover; x = None picks x near d * ov_minimizer by measured sparsity"""
    _check_dimensions(d, p, q)
    if x is not None:
        if not p < x < d - q:
            raise PreconditionError(f"x={x} must lie strictly between p={p} and d-q={d - q}")
        return _sample_cover(rng, d, p, q, x)

    lam = (p + q) / d
    sigma = p / (p + q) if p + q else 0.5
    centre = round(d * ov_minimizer(lam, sigma))
    candidates = [c for c in range(centre - 2, centre + 3) if p < c < d - q]
    if not candidates:
        candidates = list(range(p + 1, d - q))
    if not candidates:
        raise PreconditionError(f"No feasible x for d={d}, p={p}, q={q}")
    best, best_sparsity = None, math.inf
    for candidate in candidates:
        cover = _sample_cover(rng.derive(TAG_COVER, candidate), d, p, q, candidate)
        measured = measured_sparsity(cover)
        if measured < best_sparsity:
            best, best_sparsity = cover, measured
    logger.debug(f"build_cover d={d} p={p} q={q} picked x={best.x} sparsity={best_sparsity:.1f}")
    return best


def measured_sparsity(cover: OneCover) -> float:
    """Average number of certificates containing a p-set plus avoiding a q-set"""
    d, p, q, x = cover.d, cover.p, cover.q, cover.x
    return cover.size * (comb(x, p) / comb(d, p) + comb(d - x, q) / comb(d, q))


def measure_sparsity(cover: OneCover, with_validity: bool = False) -> SparsityReport:
    d, p, q, x = cover.d, cover.p, cover.q, cover.x
    return SparsityReport(
        d=d, p=p, q=q, x=x,
        certificates=cover.size,
        measured=measured_sparsity(cover),
        analytic_bound=analytic_sparsity(d, p, q),
        floor=sparsity_floor(d) if d % 4 == 0 else None,
        valid=cover_validity(cover) if with_validity else None,
    )


def cover_brute_force_sparsity(cover: OneCover) -> float:
    """Sparsity recounted certificate by certificate over every p-set and q-set"""
    if cover.d > MAX_VALIDITY_D:
        raise PreconditionError(f"Explicit recount supports d <= {MAX_VALIDITY_D}")
    certs = cover.certificates
    left = sum(int(np.count_nonzero((certs & a) == a)) for a in _k_masks(cover.d, cover.p))
    right = sum(int(np.count_nonzero((certs & b) == 0)) for b in _k_masks(cover.d, cover.q))
    return left / comb(cover.d, cover.p) + right / comb(cover.d, cover.q)


def cover_validity(cover: OneCover, chunk: int = 256) -> bool:
    """Exhaustive check that every disjoint (A, B) has a separating certificate"""
    if cover.d > MAX_VALIDITY_D:
        raise PreconditionError(f"cover_validity supports d <= {MAX_VALIDITY_D}, got {cover.d}")
    lefts, rights = _k_masks(cover.d, cover.p), _k_masks(cover.d, cover.q)
    certs = cover.certificates
    if certs.size == 0:
        return not np.any((lefts[:, None] & rights[None, :]) == 0)
    avoids = ((certs[:, None] & rights[None, :]) == 0).astype(np.float32)
    for start in range(0, lefts.size, chunk):
        block = lefts[start:start + chunk]
        contains = ((certs[None, :] & block[:, None]) == block[:, None]).astype(np.float32)
        covered = contains @ avoids
        disjoint = (block[:, None] & rights[None, :]) == 0
        if np.any(disjoint & (covered == 0)):
            return False
    return True


# ========================================
# DETECTION
# ========================================

def ov_naive(a_family: Sequence[SupportVector], b_family: Sequence[SupportVector]) -> Optional[Tuple[int, int]]:
    """First disjoint pair in (a, b) order"""
    count_ov_call("naive")
    for a in a_family:
        for b in b_family:
            if a & b == 0:
                return a, b
    return None


def pad_families(a_family: Sequence[int], b_family: Sequence[int], dim: int, p: int, q: int, c: int):
    """Add fresh coordinates so that c divides the dimension and both set sizes"""
    p2, q2 = -(-p // c) * c, -(-q // c) * c
    extra_a, extra_b = p2 - p, q2 - q
    dim2 = -(-(dim + extra_a + extra_b) // c) * c
    pad_a = sum(1 << (dim + i) for i in range(extra_a))
    pad_b = sum(1 << (dim + extra_a + i) for i in range(extra_b))
    return [a | pad_a for a in a_family], [b | pad_b for b in b_family], dim2, p2, q2


class _BlockMap:
    """Random partition of [dim] into c blocks, each identified with [d]"""

    def __init__(self, rng: Rng, dim: int, c: int):
        self.c = c
        self.d = dim // c
        self.position = [int(v) for v in rng.generator.permutation(dim)]

    def split(self, mask: int) -> Tuple[int, ...]:
        local = [0] * self.c
        while mask:
            low = mask & -mask
            e = self.position[low.bit_length() - 1]
            local[e // self.d] |= 1 << (e % self.d)
            mask ^= low
        return tuple(local)


def ov_by_sparsity(rng: Rng, cover: OneCover, a_family: Sequence[SupportVector], b_family: Sequence[SupportVector],
                   dim: int, c: int = 1, afford_multiplier: float = 4.0,
                   table_budget: int = 2 ** 24) -> Optional[Tuple[int, int]]:
    """One-sided OV detection with a c-block product of `cover`"""
    if dim != c * cover.d:
        raise PreconditionError(f"Family dimension {dim} != c * d = {c * cover.d}")
    count_ov_call("sparsity")
    z = cover.size
    if z ** c > table_budget:
        raise OvTableBudgetError(z ** c, table_budget)
    if not a_family or not b_family or z == 0:
        return None

    blocks = _BlockMap(rng, dim, c)
    certs = cover.certificates
    limit = (afford_multiplier * c * measured_sparsity(cover)) ** c
    containing: Dict[int, np.ndarray] = {}
    avoiding: Dict[int, np.ndarray] = {}

    def lists_for(local, size, cache, test):
        out = []
        for part in local:
            if part.bit_count() != size:
                return None
            if part not in cache:
                cache[part] = np.flatnonzero(test(np.uint64(part)))
            out.append(cache[part])
        return out

    def contains(part):
        return (certs & part) == part

    def avoids(part):
        return (certs & part) == 0

    owner: Dict[Tuple[int, ...], int] = {}
    for index, a in enumerate(a_family):
        lists = lists_for(blocks.split(a), cover.p, containing, contains)
        if lists is None or math.prod(len(x) for x in lists) > limit:
            continue
        for cell in itertools.product(*(x.tolist() for x in lists)):
            owner.setdefault(cell, index)

    for b in b_family:
        lists = lists_for(blocks.split(b), cover.q, avoiding, avoids)
        if lists is None or math.prod(len(x) for x in lists) > limit:
            continue
        for cell in itertools.product(*(x.tolist() for x in lists)):
            index = owner.get(cell)
            if index is not None:
                a = a_family[index]
                assert a & b == 0
                return a, b
    return None


def ov_detect(rng: Rng, a_family: Sequence[SupportVector], b_family: Sequence[SupportVector],
              dim: int, p: int, q: int, c: int = 1, trials: int = 1,
              afford_multiplier: float = 4.0, table_budget: int = 2 ** 24,
              cover_cache: Optional[Dict[Tuple[int, int, int], OneCover]] = None) -> Optional[Tuple[int, int]]:
    """Pad, fetch or build the cover, and run up to `trials` sparsity detections"""
    if not a_family or not b_family:
        return None
    if p == 0 or q == 0:
        return a_family[0], b_family[0]
    a2, b2, dim2, p2, q2 = pad_families(a_family, b_family, dim, p, q, c)
    d, pc, qc = dim2 // c, p2 // c, q2 // c
    if d - pc - qc < 2 or d > MAX_COVER_D:
        return ov_naive(a_family, b_family)
    cache = cover_cache if cover_cache is not None else {}
    key = (d, pc, qc)
    if key not in cache:
        cache[key] = build_cover(rng.derive(TAG_COVER), d, pc, qc)
    strip = (1 << dim) - 1
    for trial in range(trials):
        found = ov_by_sparsity(rng.derive(TAG_OV, trial), cache[key], a2, b2, dim2, c,
                               afford_multiplier, table_budget)
        if found is not None:
            return found[0] & strip, found[1] & strip
    return None


def ov_amplified(rng: Rng, cover: OneCover, a_family: Sequence[SupportVector], b_family: Sequence[SupportVector],
                 dim: int, c: int = 1, trials: int = 1) -> Optional[Tuple[int, int]]:
    """Repeat ov_by_sparsity with fresh partitions until a pair is found"""
    for trial in range(trials):
        found = ov_by_sparsity(rng.derive(TAG_OV, trial), cover, a_family, b_family, dim, c)
        if found is not None:
            return found
    return None
