"""OpenStreetMap XML ingestion into a directed road graph.

Parses the XML subset used here (node / way / nd / tag), keeps drivable
road classes only, and assembles edges with per-class free-flow speeds,
haversine lengths and travel times.  Also provides the CSV on-disk
format for graphs.
"""
from __future__ import annotations

import csv
import io
import os
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import (
    ArgumentError,
    DomainError,
    FormatError,
    InputError,
    ParseError,
    StructuralError,
)
from .geo import haversine_m
from .road_graph import Edge, HighwayClass, RoadGraph

ACCEPTED_HIGHWAYS = {c.value for c in HighwayClass}

# free-flow speed defaults in km/h, by base class
DEFAULT_SPEED_KPH = {
    HighwayClass.MOTORWAY: 90.0,
    HighwayClass.PRIMARY: 50.0,
    HighwayClass.SECONDARY: 50.0,
    HighwayClass.TERTIARY: 50.0,
    HighwayClass.RESIDENTIAL: 30.0,
}

MPH_TO_KPH = 1.609344

# way tags worth keeping once the class filter has passed
_KEEP_TAGS = ("highway", "maxspeed", "lanes", "oneway", "name")

_NUM_RE = re.compile(r"[-+]?\d+(?:\.\d+)?")


@dataclass
class Way:
    way_id: str
    node_ids: list[str]
    tags: dict[str, str] = field(default_factory=dict)

    @property
    def highway_class(self) -> HighwayClass:
        return HighwayClass(self.tags["highway"])


@dataclass
class RawRoadData:
    """Parsed extract: every node, plus the drivable ways only."""

    nodes: dict[str, tuple[float, float]]
    ways: list[Way]


def _as_bytes(source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source, "rb") as fh:
                return fh.read()
        except OSError as exc:
            raise InputError(f"cannot read OSM extract: {exc}") from exc
    raise ArgumentError(f"unsupported OSM source type: {type(source).__name__}")


def _byte_offset(data: bytes, line: int, column: int) -> int:
    lines = data.split(b"\n")
    return sum(len(l) + 1 for l in lines[: line - 1]) + column


def parse_osm_extract(source) -> RawRoadData:
    """Parse OSM XML bytes (or a file path) into :class:`RawRoadData`.

    Keeps all nodes and only the ways whose ``highway`` tag is a drivable
    class; non-drivable ways (footways, cycleways, ...) are discarded.
    Raises ``ParseError`` with the byte offset on malformed XML and
    ``StructuralError`` when a retained way references a missing node.
    """
    data = _as_bytes(source)
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(
            f"malformed XML at byte {_byte_offset(data, line, col)}: {exc.msg}"
        ) from exc

    nodes: dict[str, tuple[float, float]] = {}
    ways: list[Way] = []
    for elem in root:
        if elem.tag == "node":
            try:
                nid = elem.attrib["id"]
                lat = float(elem.attrib["lat"])
                lon = float(elem.attrib["lon"])
            except (KeyError, ValueError) as exc:
                raise FormatError(f"node element missing id/lat/lon: {exc}") from exc
            nodes[nid] = (lat, lon)
        elif elem.tag == "way":
            tags = {}
            refs = []
            for child in elem:
                if child.tag == "nd":
                    refs.append(child.attrib.get("ref", ""))
                elif child.tag == "tag":
                    k = child.attrib.get("k", "")
                    if k in _KEEP_TAGS:
                        tags[k] = child.attrib.get("v", "")
            if tags.get("highway") in ACCEPTED_HIGHWAYS:
                ways.append(Way(way_id=elem.attrib.get("id", ""), node_ids=refs, tags=tags))

    for way in ways:
        for ref in way.node_ids:
            if ref not in nodes:
                raise StructuralError(
                    f"way {way.way_id} references missing node {ref}"
                )
    return RawRoadData(nodes=nodes, ways=ways)


def parse_maxspeed_kph(value: str | None) -> float | None:
    """First numeric token of a maxspeed tag, converted to km/h.

    Handles plain numbers, "NN mph" and multi-valued tags like "30;50"
    (first value wins).  Returns None when nothing usable is present.
    """
    if not value:
        return None
    m = _NUM_RE.search(value)
    if not m:
        return None
    speed = float(m.group(0))
    if "mph" in value.lower():
        speed *= MPH_TO_KPH
    return speed if speed > 0 else None


def parse_lanes(value: str | None) -> int | None:
    """First integer token of a lanes tag, or None when unusable."""
    if not value:
        return None
    m = _NUM_RE.search(value)
    if not m:
        return None
    try:
        lanes = int(float(m.group(0)))
    except ValueError:
        return None
    return lanes if lanes >= 1 else None


def default_speed(
    highway_class: HighwayClass, overrides: dict[str, float] | None = None
) -> float:
    """Free-flow speed in km/h for a class, honouring config overrides.

    Overrides are keyed by class name; a link class falls back to its
    base class entry.
    """
    if overrides:
        if highway_class.value in overrides:
            return float(overrides[highway_class.value])
        if highway_class.base.value in overrides:
            return float(overrides[highway_class.base.value])
    return DEFAULT_SPEED_KPH[highway_class.base]


def _is_oneway(tags: dict[str, str]) -> bool:
    v = tags.get("oneway", "").strip().lower()
    return v in ("yes", "true", "1")


def build_graph(
    raw: RawRoadData,
    center: tuple[float, float],
    radius_m: float = 2000.0,
    speed_overrides: dict[str, float] | None = None,
) -> RoadGraph:
    """Assemble the directed travel-time graph around ``center``.

    Nodes beyond ``radius_m`` (haversine) are dropped together with the
    way fragments through them.  Ways are split into edges at every node
    shared by two or more retained ways; intermediate nodes contribute
    geometry only (their haversine lengths are summed into the edge).
    Two-way roads produce one edge per direction.
    """
    if radius_m <= 0:
        raise ArgumentError(f"radius must be positive, got {radius_m}")
    in_radius = {
        nid
        for nid, (lat, lon) in raw.nodes.items()
        if haversine_m(center[0], center[1], lat, lon) <= radius_m
    }

    # a node used by >= 2 drivable ways is an intersection
    way_count: dict[str, int] = {}
    for way in raw.ways:
        for nid in set(way.node_ids):
            way_count[nid] = way_count.get(nid, 0) + 1

    nodes: dict[str, tuple[float, float]] = {}
    edges: list[Edge] = []
    for way in raw.ways:
        cls = way.highway_class
        speed = parse_maxspeed_kph(way.tags.get("maxspeed"))
        if speed is None:
            speed = default_speed(cls, speed_overrides)
        lanes = parse_lanes(way.tags.get("lanes"))
        oneway = _is_oneway(way.tags)

        # maximal runs of in-radius nodes; anything touching a dropped
        # node is dropped with it
        run: list[str] = []
        runs: list[list[str]] = []
        for nid in way.node_ids:
            if nid in in_radius:
                run.append(nid)
            else:
                if len(run) >= 2:
                    runs.append(run)
                run = []
        if len(run) >= 2:
            runs.append(run)

        for run in runs:
            seg_start = 0
            seg_len = 0.0
            for i in range(1, len(run)):
                a, b = run[i - 1], run[i]
                seg_len += haversine_m(*raw.nodes[a], *raw.nodes[b])
                is_cut = i == len(run) - 1 or way_count.get(run[i], 0) >= 2
                if not is_cut:
                    continue
                src, dst = run[seg_start], run[i]
                if src != dst and seg_len > 0.0:
                    travel_time = seg_len / (speed / 3.6)
                    nodes[src] = raw.nodes[src]
                    nodes[dst] = raw.nodes[dst]
                    edges.append(
                        Edge(src, dst, seg_len, speed, travel_time, cls, lanes)
                    )
                    if not oneway:
                        edges.append(
                            Edge(dst, src, seg_len, speed, travel_time, cls, lanes)
                        )
                seg_start = i
                seg_len = 0.0

    if not edges:
        raise DomainError(
            f"no drivable roads within {radius_m:.0f} m of "
            f"({center[0]:.5f}, {center[1]:.5f})"
        )
    return RoadGraph(nodes, edges, center=(float(center[0]), float(center[1])), radius_m=float(radius_m))


# ---------------------------------------------------------------------------
# CSV on-disk format
# ---------------------------------------------------------------------------
# Floats are written with repr (shortest round-trip form) so that a
# saved graph reloads with bit-identical attributes.

NODES_HEADER = ["node_id", "lat", "lon"]
EDGES_HEADER = ["src", "dst", "length_m", "speed_kph", "travel_time_s", "highway_class", "lanes"]


def graph_to_csv(graph: RoadGraph, config_hash: str | None = None) -> tuple[str, str]:
    """Serialize a graph to (nodes_csv, edges_csv) text."""
    prefix = f"# config_hash={config_hash}\n" if config_hash else ""
    nbuf = io.StringIO()
    nbuf.write(prefix)
    w = csv.writer(nbuf, lineterminator="\n")
    w.writerow(NODES_HEADER)
    for nid in sorted(graph.nodes):
        lat, lon = graph.nodes[nid]
        w.writerow([nid, repr(lat), repr(lon)])

    ebuf = io.StringIO()
    ebuf.write(prefix)
    w = csv.writer(ebuf, lineterminator="\n")
    w.writerow(EDGES_HEADER)
    for e in graph.edges:
        w.writerow(
            [
                e.src,
                e.dst,
                repr(e.length_m),
                repr(e.speed_kph),
                repr(e.travel_time_s),
                e.highway_class.value,
                "" if e.lanes is None else e.lanes,
            ]
        )
    return nbuf.getvalue(), ebuf.getvalue()


def _strip_comments(text: str) -> str:
    return "\n".join(l for l in text.splitlines() if not l.startswith("#"))


def graph_from_csv(
    nodes_csv: str,
    edges_csv: str,
    center: tuple[float, float] | None = None,
    radius_m: float | None = None,
) -> RoadGraph:
    """Inverse of :func:`graph_to_csv`; leading '#' comment lines are skipped."""
    nodes_csv = _strip_comments(nodes_csv)
    edges_csv = _strip_comments(edges_csv)
    nrows = list(csv.reader(io.StringIO(nodes_csv)))
    if not nrows or nrows[0] != NODES_HEADER:
        raise FormatError(f"bad nodes CSV header: {nrows[0] if nrows else 'empty file'}")
    nodes: dict[str, tuple[float, float]] = {}
    for lineno, row in enumerate(nrows[1:], start=2):
        if len(row) != 3:
            raise FormatError(f"nodes CSV row {lineno}: expected 3 fields, got {len(row)}")
        try:
            nodes[row[0]] = (float(row[1]), float(row[2]))
        except ValueError as exc:
            raise FormatError(f"nodes CSV row {lineno}: {exc}") from exc

    erows = list(csv.reader(io.StringIO(edges_csv)))
    if not erows or erows[0] != EDGES_HEADER:
        raise FormatError(f"bad edges CSV header: {erows[0] if erows else 'empty file'}")
    edges: list[Edge] = []
    for lineno, row in enumerate(erows[1:], start=2):
        if len(row) != 7:
            raise FormatError(f"edges CSV row {lineno}: expected 7 fields, got {len(row)}")
        try:
            edges.append(
                Edge(
                    src=row[0],
                    dst=row[1],
                    length_m=float(row[2]),
                    speed_kph=float(row[3]),
                    travel_time_s=float(row[4]),
                    highway_class=HighwayClass(row[5]),
                    lanes=None if row[6] == "" else int(row[6]),
                )
            )
        except ValueError as exc:
            raise FormatError(f"edges CSV row {lineno}: {exc}") from exc
    return RoadGraph(nodes, edges, center=center, radius_m=radius_m)
