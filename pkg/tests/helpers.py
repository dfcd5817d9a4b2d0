"""Shared construction helpers for the test suite."""
from __future__ import annotations

import math
from datetime import date, timedelta

import numpy as np

from roadtwin.geo import EARTH_RADIUS_M
from roadtwin.road_graph import Edge, RoadGraph
from roadtwin.osm_ingest import HighwayClass
from roadtwin.embedding import RoadEmbedding
from roadtwin.traffic_data import (
    QUALITY_OBSERVED,
    TrafficSeries,
)

LAT0, LON0 = 40.0, -3.0


def make_graph(triples, cls=HighwayClass.RESIDENTIAL, coords=None) -> RoadGraph:
    """Graph from (src, dst, travel_time_s) triples.

    Length equals travel time (speed fixed at 1 m/s) unless real
    coordinates are supplied via ``coords``.
    """
    names = sorted({u for t in triples for u in t[:2]})
    nodes = {n: (coords[n] if coords else (0.0, 0.0)) for n in names}
    edges = [Edge(u, v, float(w), 3.6, float(w), cls) for u, v, w in triples]
    return RoadGraph(nodes, edges)


def north_of(lat: float, meters: float) -> float:
    """Latitude ``meters`` due north of ``lat``."""
    return lat + math.degrees(meters / EARTH_RADIUS_M)


def east_of(lat: float, lon: float, meters: float) -> float:
    """Longitude ``meters`` due east at latitude ``lat``."""
    return lon + math.degrees(meters / (EARTH_RADIUS_M * math.cos(math.radians(lat))))


def geo_edge(src, dst, nodes, cls=HighwayClass.RESIDENTIAL, speed_kph=30.0, lanes=None) -> Edge:
    """Edge whose length is the haversine distance between its endpoints."""
    from roadtwin.geo import haversine_m

    length = haversine_m(*nodes[src], *nodes[dst])
    tt = length / (speed_kph / 3.6)
    return Edge(src, dst, length, speed_kph, tt, cls, lanes)


def geo_graph(nodes, links, cls=HighwayClass.RESIDENTIAL, speed_kph=30.0, two_way=True) -> RoadGraph:
    """Graph over real coordinates; links are (src, dst) pairs."""
    edges = []
    for src, dst in links:
        edges.append(geo_edge(src, dst, nodes, cls, speed_kph))
        if two_way:
            edges.append(geo_edge(dst, src, nodes, cls, speed_kph))
    return RoadGraph(nodes, edges)


def emb(sensor_id: str, normalized, raw=None) -> RoadEmbedding:
    """Embedding stub with a given normalized vector (for selection tests)."""
    raw = raw if raw is not None else list(normalized)
    return RoadEmbedding(
        sensor_id=sensor_id,
        spbc_central=raw[0],
        spbc_neighbors_max=raw[1],
        spbc_neighbors_median=raw[2],
        travel_time_motorway_s=raw[3],
        travel_time_primary_s=raw[4],
        road_type_code=raw[5],
        lanes=raw[6],
        normalized=tuple(float(v) for v in normalized),
    )


def make_series(days, sensor_id="t", interval_min=15) -> TrafficSeries:
    """Series from {date: values}; values may be a scalar, a full-day
    array, or contain NaN to mark missing slots.  Dates absent from the
    mapping (inside the span) stay entirely missing."""
    dates = sorted(days)
    start, end = dates[0], dates[-1]
    n_days = (end - start).days + 1
    slots = 1440 // interval_min
    flows = np.zeros((n_days, slots))
    quality = np.zeros((n_days, slots), dtype=np.int8)
    for d, vals in days.items():
        i = (d - start).days
        arr = np.asarray(vals, dtype=float)
        if arr.ndim == 0:
            arr = np.full(slots, float(arr))
        if arr.shape != (slots,):
            raise AssertionError(f"day {d}: expected {slots} slots, got {arr.shape}")
        mask = ~np.isnan(arr)
        flows[i][mask] = arr[mask]
        quality[i][mask] = QUALITY_OBSERVED
    return TrafficSeries(sensor_id, interval_min, start, flows, quality)


def week_of(start: date, n: int):
    return [start + timedelta(days=i) for i in range(n)]


MONDAY = date(2019, 1, 7)  # a plain Monday, no 2019 holiday nearby
