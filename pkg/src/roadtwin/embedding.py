"""Road feature embeddings.

Each sensor (or target) position is described by a 7-dimensional vector
computed from its ego-graph and the surrounding road graph:

1. shortest-path betweenness centrality of the central node,
2. maximum centrality over the other ego-graph nodes,
3. median centrality over the other ego-graph nodes,
4. travel time from the center to the closest motorway edge,
5. travel time from the center to the closest primary edge,
6. road type of the hosting edge encoded on [0, 1],
7. lane count of the hosting edge.

Betweenness uses travel-time-weighted shortest paths, counts every
exactly-equal-time path, excludes endpoints and is left unnormalized.
"""
from __future__ import annotations

import heapq
import logging
import math
import statistics
from dataclasses import dataclass, replace

from .errors import ArgumentError
from .road_graph import CentralNode, EgoGraph, HighwayClass, RoadGraph, dijkstra_from

log = logging.getLogger(__name__)

#: distinguished value for "no such road reachable"
UNREACHABLE = math.inf

EMBEDDING_DIMS = 7

ROAD_TYPE_CODE = {
    HighwayClass.RESIDENTIAL: 0.0,
    HighwayClass.TERTIARY: 0.25,
    HighwayClass.SECONDARY: 0.5,
    HighwayClass.PRIMARY: 0.75,
    HighwayClass.MOTORWAY: 1.0,
}

DEFAULT_LANES = {
    HighwayClass.RESIDENTIAL: 1,
    HighwayClass.TERTIARY: 1,
    HighwayClass.SECONDARY: 2,
    HighwayClass.PRIMARY: 2,
    HighwayClass.MOTORWAY: 3,
}


@dataclass(frozen=True)
class RoadEmbedding:
    """Raw (and optionally normalized) feature vector for one position."""

    sensor_id: str
    spbc_central: float
    spbc_neighbors_max: float
    spbc_neighbors_median: float
    travel_time_motorway_s: float
    travel_time_primary_s: float
    road_type_code: float
    lanes: float
    normalized: tuple[float, ...] | None = None
    notes: tuple[str, ...] = ()

    def raw_vector(self) -> tuple[float, ...]:
        return (
            self.spbc_central,
            self.spbc_neighbors_max,
            self.spbc_neighbors_median,
            self.travel_time_motorway_s,
            self.travel_time_primary_s,
            self.road_type_code,
            self.lanes,
        )


def betweenness(graph: RoadGraph | EgoGraph) -> dict[str, float]:
    """Shortest-path betweenness centrality of every node.

    Travel-time-weighted directed shortest paths; all paths of exactly
    equal time are counted; endpoints are excluded; no normalization.
    Heap entries carry node ids so tie handling is deterministic.
    """
    if isinstance(graph, EgoGraph):
        graph = graph.graph
    centrality = {v: 0.0 for v in graph.nodes}
    order = sorted(graph.nodes)
    for s in order:
        dist = {v: math.inf for v in order}
        sigma = {v: 0 for v in order}
        preds: dict[str, list[str]] = {v: [] for v in order}
        dist[s] = 0.0
        sigma[s] = 1
        finished: list[str] = []
        done: set[str] = set()
        heap: list[tuple[float, str]] = [(0.0, s)]
        while heap:
            d, v = heapq.heappop(heap)
            if v in done:
                continue
            done.add(v)
            finished.append(v)
            for i in graph._out[v]:
                e = graph.edges[i]
                nd = d + e.travel_time_s
                if nd < dist[e.dst]:
                    dist[e.dst] = nd
                    sigma[e.dst] = sigma[v]
                    preds[e.dst] = [v]
                    heapq.heappush(heap, (nd, e.dst))
                elif nd == dist[e.dst]:
                    sigma[e.dst] += sigma[v]
                    preds[e.dst].append(v)
        # dependency accumulation, farthest node first
        delta = {v: 0.0 for v in finished}
        for w in reversed(finished):
            if sigma[w] == 0:
                continue
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                centrality[w] += delta[w]
    return centrality


def summarize_centrality(
    spbc: dict[str, float], center_id: str
) -> tuple[float, float, float]:
    """(center, max over others, median over others) of a centrality map.

    An even count of others takes the mean of the two central values.
    A map holding only the center yields zeros for the other two.
    """
    if center_id not in spbc:
        raise ArgumentError(f"center {center_id!r} missing from centrality map")
    others = [v for k, v in sorted(spbc.items()) if k != center_id]
    if not others:
        log.warning("degenerate ego-graph around %s: center only", center_id)
        return spbc[center_id], 0.0, 0.0
    return spbc[center_id], max(others), float(statistics.median(others))


def centrality_features(ego: EgoGraph) -> tuple[float, float, float]:
    """Centrality triple of an ego-graph: center, neighborhood max, median."""
    return summarize_centrality(betweenness(ego.graph), ego.center.node_id)


def road_type_code(highway_class: HighwayClass) -> float:
    """Road class encoded on [0, 1]; link classes count as their base."""
    return ROAD_TYPE_CODE[highway_class.base]


def travel_time_to_class(
    graph: RoadGraph, center: CentralNode, highway_class: HighwayClass
) -> float:
    """Minimum travel time from the center to a road of the given class.

    Measured on the full graph, to the nearer endpoint of any edge of
    that class (link roads count as the base class).  Zero when the
    center itself sits on such a road; :data:`UNREACHABLE` when none is
    reachable.
    """
    target = highway_class.base
    if target not in (HighwayClass.MOTORWAY, HighwayClass.PRIMARY):
        raise ArgumentError(
            f"travel-time feature is defined for motorway/primary, got {highway_class.value}"
        )
    if center.host_edge_class.base == target:
        return 0.0
    dist = dijkstra_from(graph, center.node_id)
    best = UNREACHABLE
    for e in graph.edges:
        if e.highway_class.base == target:
            cand = min(dist[e.src], dist[e.dst])
            if cand < best:
                best = cand
    return best


def build_embedding(
    graph: RoadGraph,
    ego: EgoGraph,
    center: CentralNode,
    sensor_id: str | None = None,
    road_type_override: HighwayClass | None = None,
    lanes_override: int | None = None,
) -> RoadEmbedding:
    """Assemble the 7-feature embedding for one central node.

    Overrides take precedence over map tags; a missing lane tag falls
    back to a per-class default.
    """
    f1, f2, f3 = centrality_features(ego)
    f4 = travel_time_to_class(graph, center, HighwayClass.MOTORWAY)
    f5 = travel_time_to_class(graph, center, HighwayClass.PRIMARY)
    cls = road_type_override if road_type_override is not None else center.host_edge_class
    f6 = road_type_code(cls)
    if lanes_override is not None:
        lanes = lanes_override
    elif center.host_edge_lanes is not None:
        lanes = center.host_edge_lanes
    else:
        lanes = DEFAULT_LANES[cls.base]
    notes = () if len(ego.graph) > 1 else ("single_node_ego",)
    return RoadEmbedding(
        sensor_id=sensor_id if sensor_id is not None else center.sensor_id,
        spbc_central=f1,
        spbc_neighbors_max=f2,
        spbc_neighbors_median=f3,
        travel_time_motorway_s=f4,
        travel_time_primary_s=f5,
        road_type_code=f6,
        lanes=float(lanes),
        notes=notes,
    )


def normalize_pool(embeddings: list[RoadEmbedding]) -> list[RoadEmbedding]:
    """Min-max scale each feature to [0, 1] jointly across the pool.

    Unreachable travel times normalize to 1.0 and do not take part in
    the min/max; a feature constant across the pool maps to 0.0 for
    everyone.  Requires a pool of at least two embeddings.
    """
    if len(embeddings) < 2:
        raise ArgumentError(f"normalization pool needs >= 2 embeddings, got {len(embeddings)}")
    vectors = [e.raw_vector() for e in embeddings]
    columns = list(zip(*vectors))
    scaled: list[list[float]] = [[0.0] * EMBEDDING_DIMS for _ in embeddings]
    for j, col in enumerate(columns):
        finite = [v for v in col if not math.isinf(v)]
        lo = min(finite) if finite else 0.0
        hi = max(finite) if finite else 0.0
        span = hi - lo
        for i, v in enumerate(col):
            if math.isinf(v):
                scaled[i][j] = 1.0
            elif span == 0.0:
                scaled[i][j] = 0.0
            else:
                scaled[i][j] = (v - lo) / span
    return [
        replace(e, normalized=tuple(row)) for e, row in zip(embeddings, scaled)
    ]
