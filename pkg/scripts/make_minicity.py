#!/usr/bin/env python3
"""Regenerate the bundled minicity fixture.

Emits a small synthetic city (12 drivable ways over 5 road classes plus
two non-drivable ways), 8 sensors sitting just off their host edges, a
holiday calendar and 60 days of 15-minute synthetic counts per sensor,
with a few injected spikes and gaps so the cleaning stage has work to
do.  Everything is deterministic; running this script twice produces
byte-identical files.

Usage: python3 scripts/make_minicity.py [fixture_dir]
"""
from __future__ import annotations

import math
import os
import sys
from datetime import date, datetime, timedelta

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))
from roadtwin.geo import LocalProjection  # noqa: E402

CENTER = (40.4500, -3.6900)
DLAT = 0.0020  # ~222 m
DLON = 0.0026  # ~220 m at this latitude

START = date(2019, 1, 7)  # a Monday
N_DAYS = 60
HOLIDAYS = [date(2019, 1, 21), date(2019, 2, 14)]
SLOTS = 96  # 15-minute grid


def grid_nodes() -> dict[str, tuple[float, float]]:
    nodes = {}
    for row in range(5):
        for col in range(5):
            nodes[f"n{row}{col}"] = (
                CENTER[0] + (row - 2) * DLAT,
                CENTER[1] + (col - 2) * DLON,
            )
    # bend of the residential connector R2 and dead end of R3
    nodes["q1"] = (40.4513, -3.6913)
    nodes["q2"] = (40.4484, -3.6860)
    # footway target, never part of the road graph
    nodes["q3"] = (40.4495, -3.6887)
    return nodes


WAYS = [
    # (way name, node chain, tags)
    ("M", ["n04", "n14", "n24", "n34", "n44"], {"highway": "motorway", "oneway": "yes", "lanes": "3", "name": "East Motorway"}),
    ("P1", ["n00", "n10", "n20", "n30", "n40"], {"highway": "primary", "maxspeed": "50", "lanes": "2", "name": "West Avenue"}),
    ("P2", ["n40", "n41", "n42", "n43", "n44"], {"highway": "primary", "maxspeed": "40 mph", "lanes": "2", "name": "North Avenue"}),
    ("S1", ["n20", "n21", "n22", "n23", "n24"], {"highway": "secondary", "maxspeed": "50", "lanes": "2", "name": "Center Street"}),
    ("S2", ["n02", "n12", "n22", "n32", "n42"], {"highway": "secondary", "maxspeed": "30;50", "lanes": "2", "name": "Market Street"}),
    ("S3", ["n00", "n01", "n02", "n03", "n04"], {"highway": "secondary", "lanes": "1;2", "name": "South Street"}),
    ("T1", ["n30", "n31", "n32", "n33", "n34"], {"highway": "tertiary", "name": "Third Row"}),
    ("T2", ["n10", "n11", "n12", "n13", "n14"], {"highway": "tertiary", "maxspeed": "signals", "name": "First Row"}),
    ("T3", ["n03", "n13", "n23", "n33", "n43"], {"highway": "tertiary", "name": "Third Column"}),
    ("R1", ["n01", "n11", "n21", "n31", "n41"], {"highway": "residential", "name": "First Column"}),
    ("R2", ["n31", "q1", "n22"], {"highway": "residential", "name": "Bend Lane"}),
    ("R3", ["n13", "q2", "n14"], {"highway": "residential", "oneway": "yes", "name": "Dead Oak Lane"}),
    # non-drivable, must be filtered out by ingestion
    ("F1", ["n22", "q3"], {"highway": "footway", "name": "Plaza Path"}),
    ("C1", ["n01", "n02"], {"highway": "cycleway", "name": "South Cycle Track"}),
]

# sensor -> (edge endpoints, parameter along the edge, perpendicular offset m,
#            road_type_override, lanes_override)
SENSORS = [
    ("s1", ("n21", "n22"), 0.45, 12.0, "", ""),
    ("s2", ("n22", "n32"), 0.55, -9.0, "", ""),
    ("s3", ("n31", "n32"), 0.30, 15.0, "", ""),
    ("s4", ("n12", "n13"), 0.62, -11.0, "secondary", ""),
    ("s5", ("n11", "n21"), 0.50, 8.0, "", ""),
    ("s6", ("n31", "q1"), 0.40, -6.0, "", ""),
    ("s7", ("n01", "n02"), 0.35, 10.0, "", "2"),
    ("s8", ("n23", "n33"), 0.52, -13.0, "", ""),
]

# peak amplitude in vehicles per 15 min, roughly by road importance
AMPLITUDE = {
    "s1": 420.0,  # secondary
    "s2": 390.0,  # secondary
    "s3": 240.0,  # tertiary
    "s4": 260.0,  # tertiary (relabelled secondary by override)
    "s5": 120.0,  # residential
    "s6": 90.0,   # residential
    "s7": 350.0,  # secondary
    "s8": 230.0,  # tertiary
}


def write_osm(path: str, nodes: dict[str, tuple[float, float]]):
    node_ids = {name: 1000 + i for i, name in enumerate(sorted(nodes))}
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    lines.append('<osm version="0.6" generator="make_minicity">')
    for name in sorted(nodes):
        lat, lon = nodes[name]
        lines.append(
            f'  <node id="{node_ids[name]}" lat="{lat:.7f}" lon="{lon:.7f}"/>'
        )
    for i, (_name, chain, tags) in enumerate(WAYS, start=1):
        lines.append(f'  <way id="{i}">')
        for n in chain:
            lines.append(f'    <nd ref="{node_ids[n]}"/>')
        for k in sorted(tags):
            lines.append(f'    <tag k="{k}" v="{tags[k]}"/>')
        lines.append("  </way>")
    lines.append("</osm>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return node_ids


def sensor_positions(nodes) -> list[tuple[str, float, float, str, str]]:
    proj = LocalProjection(*CENTER)
    out = []
    for sid, (a, b), t, offset, rt_override, lanes_override in SENSORS:
        ax, ay = proj.to_xy(*nodes[a])
        bx, by = proj.to_xy(*nodes[b])
        dx, dy = bx - ax, by - ay
        norm = math.hypot(dx, dy)
        ux, uy = dx / norm, dy / norm
        px, py = -uy, ux
        x = ax + t * dx + offset * px
        y = ay + t * dy + offset * py
        lat, lon = proj.to_latlon(x, y)
        out.append((sid, lat, lon, rt_override, lanes_override))
    return out


def _gauss(t: np.ndarray, mu: float, sigma: float) -> np.ndarray:
    return np.exp(-0.5 * ((t - mu) / sigma) ** 2)


def day_values(sid: str, idx: int, d: date, rng: np.random.Generator) -> np.ndarray:
    """One day of synthetic counts for a sensor."""
    amp = AMPLITUDE[sid]
    phase = (idx - 3.5) * 0.12  # per-sensor rush-hour shift
    t = np.arange(SLOTS) * 0.25
    shape = (
        0.07
        + 0.90 * _gauss(t, 8.0 + phase, 1.4)
        + 0.75 * _gauss(t, 18.4 + phase, 1.9)
        + 0.18 * _gauss(t, 13.0, 3.5)
    )
    holiday = d in HOLIDAYS
    weekend = d.weekday() >= 5
    if holiday:
        scale = 0.50
    elif weekend:
        scale = 0.60
    else:
        scale = 1.0
    values = amp * scale * shape + rng.normal(0.0, 0.04 * amp, SLOTS)
    return np.maximum(values, 0.0).round()


def make_traffic(out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    spike_at = {"s3": (date(2019, 1, 16), 44, 8.0), "s5": (date(2019, 2, 5), 57, 7.0)}
    gap_at = {
        # sensor -> (date, first slot, slot count): short gap interpolates
        "s4": (date(2019, 1, 25), 12, 3),
        # long gap leaves the day incomplete
        "s6": (date(2019, 2, 10), 48, 7),
    }
    # s2 loses the tail of one day entirely (absent rows, not zeros)
    truncate_at = {"s2": (date(2019, 2, 20), 40)}

    for idx, (sid, *_rest) in enumerate(SENSORS):
        rng = np.random.default_rng([20190107, idx])
        rows = []
        for day_i in range(N_DAYS):
            d = START + timedelta(days=day_i)
            values = day_values(sid, idx, d, rng)
            if sid in spike_at and spike_at[sid][0] == d:
                slot = spike_at[sid][1]
                values[slot] = np.round(values[slot] * spike_at[sid][2])
            drop = set()
            if sid in gap_at and gap_at[sid][0] == d:
                first, count = gap_at[sid][1], gap_at[sid][2]
                drop = set(range(first, first + count))
            if sid in truncate_at and truncate_at[sid][0] == d:
                drop |= set(range(truncate_at[sid][1], SLOTS))
            for slot in range(SLOTS):
                if slot in drop:
                    continue
                ts = datetime(d.year, d.month, d.day) + timedelta(minutes=15 * slot)
                rows.append(f"{sid},{ts.isoformat()},{int(values[slot])}")
        with open(os.path.join(out_dir, f"{sid}.csv"), "w", encoding="utf-8") as fh:
            fh.write("sensor_id,timestamp,flow\n")
            fh.write("\n".join(rows) + "\n")


def main():
    fixture_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "fixtures", "minicity"
    )
    fixture_dir = os.path.abspath(fixture_dir)
    os.makedirs(fixture_dir, exist_ok=True)
    nodes = grid_nodes()
    write_osm(os.path.join(fixture_dir, "minicity.osm"), nodes)

    with open(os.path.join(fixture_dir, "sensors.csv"), "w", encoding="utf-8") as fh:
        fh.write("sensor_id,lat,lon,road_type_override,lanes_override\n")
        for sid, lat, lon, rt, lanes in sensor_positions(nodes):
            fh.write(f"{sid},{lat:.7f},{lon:.7f},{rt},{lanes}\n")

    with open(os.path.join(fixture_dir, "holidays.csv"), "w", encoding="utf-8") as fh:
        fh.write("# minicity public holidays\n")
        for d in HOLIDAYS:
            fh.write(d.isoformat() + "\n")

    make_traffic(os.path.join(fixture_dir, "traffic"))

    with open(os.path.join(fixture_dir, "config.json"), "w", encoding="utf-8") as fh:
        fh.write(
            "{\n"
            '  "osm_path": "minicity.osm",\n'
            '  "sensors_path": "sensors.csv",\n'
            '  "traffic_dir": "traffic",\n'
            '  "holidays_path": "holidays.csv"\n'
            "}\n"
        )
    print(f"minicity fixture written to {fixture_dir}")


if __name__ == "__main__":
    main()
