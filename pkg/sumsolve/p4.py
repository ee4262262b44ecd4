"""
Zero-weight simple 4-paths in a node-weighted layered graph.

The four level-two lists become four layers. Layer offsets 1, 2, 4 and -7
times a big constant force any zero-weight 4-path to take one vertex per
layer, and edges join consecutive layers only when the sets are disjoint.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

from sumsolve.config import Preset, get_preset
from sumsolve.core import IndexSet, Rng, Solution, SubsetSumInstance, bits, sample_disjoint
from sumsolve.errors import InstanceFormatError, PreconditionError
from sumsolve.metrics import SolveStats
from sumsolve.mixer import compute_mixer
from sumsolve.repsolver import (
    MAX_LEVEL_TWO_M,
    TAG_PARTITION,
    LevelTwoLists,
    Quadruple,
    build_level_two_lists,
    main_lemma_loop,
)

logger = logging.getLogger(__name__)

MAX_VERTICES = 4000
LAYER_NAMES = ("L1", "L2", "R2", "R1")
LAYER_COEFFICIENTS = (1, 2, 4, -7)
BIG_FACTOR = 100


@dataclass(frozen=True)
class Vertex:
    id: int
    layer: int  # 0..3, in LAYER_NAMES order
    weight: int
    member: int  # index into the layer's list


@dataclass
class NodeWeightedGraph:
    vertices: List[Vertex]
    adjacency: List[int]  # neighbour bitsets over vertex ids
    big: int
    target: int
    total_weight: int

    def edges(self) -> Iterator[Tuple[int, int]]:
        for u, neighbours in enumerate(self.adjacency):
            for v in bits(neighbours >> (u + 1)):
                yield u, u + 1 + v

    @property
    def edge_count(self) -> int:
        return sum(n.bit_count() for n in self.adjacency) // 2

    def layer_ranges(self) -> List[Optional[Tuple[int, int]]]:
        ranges: List[Optional[Tuple[int, int]]] = [None] * 4
        for v in self.vertices:
            current = ranges[v.layer]
            ranges[v.layer] = (v.weight, v.weight) if current is None else (
                min(current[0], v.weight), max(current[1], v.weight))
        return ranges


def build_p4_graph(lists: LevelTwoLists, max_vertices: int = MAX_VERTICES) -> NodeWeightedGraph:
    """Layers L1, L2, R2, R1 with weights M + w, 2M + w, 4M + w, -7M - t + w"""
    layers = (lists.L1, lists.L2, lists.R2, lists.R1)
    count = sum(len(layer) for layer in layers)
    if count > max_vertices:
        raise PreconditionError(f"P4 graph would have {count} vertices (limit {max_vertices})")
    # zero total weight makes the offsets collapse; fall back to a unit scale
    big = BIG_FACTOR * max(lists.total_weight, 1)
    t = lists.target

    vertices: List[Vertex] = []
    for layer, members in enumerate(layers):
        offset = LAYER_COEFFICIENTS[layer] * big - (t if layer == 3 else 0)
        for index, member in enumerate(members):
            vertices.append(Vertex(len(vertices), layer, offset + member.weight, index))

    adjacency = [0] * len(vertices)
    starts = list(itertools.accumulate([0] + [len(layer) for layer in layers]))
    for layer in range(3):
        left, right = layers[layer], layers[layer + 1]
        for i, a in enumerate(left):
            u = starts[layer] + i
            for j, b in enumerate(right):
                if a.witness & b.witness == 0:
                    v = starts[layer + 1] + j
                    adjacency[u] |= 1 << v
                    adjacency[v] |= 1 << u
    return NodeWeightedGraph(vertices, adjacency, big, t, lists.total_weight)


def naive_p4_solve(graph: NodeWeightedGraph) -> Optional[Tuple[int, int, int, int]]:
    """A simple path v1-v2-v3-v4 of total weight zero, by scanning middle edges"""
    weight = [v.weight for v in graph.vertices]
    adjacency = graph.adjacency
    for v2 in range(len(weight)):
        for v3 in bits(adjacency[v2]):
            ends: Dict[int, List[int]] = {}
            for v4 in bits(adjacency[v3] & ~(1 << v2)):
                ends.setdefault(weight[v4], []).append(v4)
            need = -(weight[v2] + weight[v3])
            for v1 in bits(adjacency[v2] & ~(1 << v3)):
                for v4 in ends.get(need - weight[v1], ()):
                    if v4 != v1:
                        return v1, v2, v3, v4
    return None


def decode_path(graph: NodeWeightedGraph, lists: LevelTwoLists,
                path: Tuple[int, int, int, int]) -> Quadruple:
    ordered = sorted((graph.vertices[v] for v in path), key=lambda v: v.layer)
    assert [v.layer for v in ordered] == [0, 1, 2, 3]
    layers = (lists.L1, lists.L2, lists.R2, lists.R1)
    a1, a2, a3, a4 = (layers[v.layer][v.member] for v in ordered)
    return Quadruple(a1, a2, a3, a4)


def layer_separation_margin(graph: NodeWeightedGraph) -> Optional[int]:
    """Smallest possible |total weight| of four vertices not taken one per layer"""
    ranges = graph.layer_ranges()
    best = None
    for combo in itertools.combinations_with_replacement(range(4), 4):
        if combo == (0, 1, 2, 3) or any(ranges[layer] is None for layer in combo):
            continue
        low = sum(ranges[layer][0] for layer in combo)
        high = sum(ranges[layer][1] for layer in combo)
        distance = 0 if low <= 0 <= high else min(abs(low), abs(high))
        best = distance if best is None else min(best, distance)
    return best


def p4_detect(lists: LevelTwoLists, rng: Rng, config: Preset, stats: SolveStats,
              cover_cache: Dict) -> Optional[Quadruple]:
    """Detector for main_lemma_loop: exact zero-weight 4-path search"""
    graph = build_p4_graph(lists)
    with stats.payload.hold(len(graph.vertices) + graph.edge_count):
        path = naive_p4_solve(graph)
    stats.counters["p4.graphs"] += 1
    if path is None:
        return None
    quad = decode_path(graph, lists, path)
    assert quad.weight == lists.target
    return quad


def solve_via_p4(rng: Rng, instance: SubsetSumInstance, M_L: IndexSet, M: IndexSet, M_R: IndexSet,
                 lambda_count: int, eps_L: float = 0.0, eps_R: float = 0.0,
                 config: Optional[Preset] = None, repetitions: int = 1,
                 stats: Optional[SolveStats] = None) -> Optional[Solution]:
    """main_lemma_solve with the weighted-OV step replaced by 4-path detection"""
    return main_lemma_loop(rng, instance, M_L, M, M_R, lambda_count, eps_L, eps_R,
                           config or get_preset(), repetitions, stats or SolveStats(), p4_detect)


def sample_graph(rng: Rng, instance: SubsetSumInstance, config: Optional[Preset] = None,
                 lambda_count: Optional[int] = None) -> NodeWeightedGraph:
    """One level-two list set at the central sizes, as a graph"""
    config = config or get_preset()
    n = instance.n
    m = min(max(1, round(config.mu * n)), n // 3, MAX_LEVEL_TWO_M)
    if m == 0:
        raise PreconditionError(f"n={n} is too small for three mixers")
    mixers = sample_disjoint(rng.derive(TAG_PARTITION), IndexSet.full(n), [m, m, m])
    reports = [compute_mixer(instance, mixer) for mixer in mixers]
    order = sorted(range(3), key=lambda i: reports[i].epsilon)
    M, M_L, M_R = (mixers[i] for i in order)
    k = m // 2 if lambda_count is None else lambda_count
    sizes = (k // 2, k // 2, k // 2)
    lists = build_level_two_lists(rng.derive(1), instance, M_L, M, M_R, k, sizes,
                                  reports[order[1]].epsilon, reports[order[2]].epsilon)
    return build_p4_graph(lists)


# ========================================
# TEXT DUMP
# ========================================

def dump_graph(graph: NodeWeightedGraph) -> str:
    """Vertex lines 'id layer weight' (layer 1..4), then edge lines 'u v'"""
    lines = [f"{v.id} {v.layer + 1} {v.weight}" for v in graph.vertices]
    lines.extend(f"{u} {v}" for u, v in graph.edges())
    return "\n".join(lines) + "\n"


def parse_graph_dump(text: str) -> Tuple[List[Tuple[int, int, int]], List[Tuple[int, int]]]:
    vertices, edges = [], []
    for number, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        try:
            values = [int(f) for f in fields]
        except ValueError:
            raise InstanceFormatError("Non-integer field in graph dump", number)
        if len(values) == 3:
            if edges:
                raise InstanceFormatError("Vertex line after edge lines", number)
            vertices.append(tuple(values))
        elif len(values) == 2:
            edges.append(tuple(values))
        elif values:
            raise InstanceFormatError(f"Expected 2 or 3 fields, got {len(values)}", number)
    return vertices, edges
