"""End-to-end orchestration shared by the CLI subcommands.

Per-sensor graph construction and embedding, traffic loading/cleaning,
and the full leave-one-out benchmark.  Per-sensor work fans out over a
thread pool sized by the ``ROADTWIN_THREADS`` environment variable
(0 = one per CPU); results are merged in input order so the output is
independent of the thread count.
"""
from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import evaluation, generation
from .config import DECISIONS, PipelineConfig
from .embedding import RoadEmbedding, build_embedding, normalize_pool
from .errors import ArgumentError, FormatError, InputError
from .generation import METHOD_CLUSTER, METHOD_COPY
from .osm_ingest import RawRoadData, build_graph, parse_lanes
from .road_graph import CentralNode, HighwayClass, ego_graph, insert_central_node
from .output import round6
from .traffic_data import (
    CleaningStats,
    HolidayCalendar,
    TrafficSeries,
    clean_series,
    daily_profile,
    load_traffic_csv,
    mean_weekday_flow,
)

ENV_THREADS = "ROADTWIN_THREADS"


def thread_count() -> int:
    raw = os.environ.get(ENV_THREADS, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise InputError(f"{ENV_THREADS} must be an integer, got {raw!r}") from exc
    if n < 0:
        raise InputError(f"{ENV_THREADS} must be >= 0, got {n}")
    if n == 0:
        return os.cpu_count() or 1
    return n


def parallel_map(fn, items):
    """Map preserving input order, threaded when ROADTWIN_THREADS allows."""
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# sensors
# ---------------------------------------------------------------------------

SENSORS_HEADER = ["sensor_id", "lat", "lon", "road_type_override", "lanes_override"]


@dataclass(frozen=True)
class SensorSpec:
    sensor_id: str
    lat: float
    lon: float
    road_type_override: HighwayClass | None = None
    lanes_override: int | None = None


def load_sensors(path) -> list[SensorSpec]:
    """Sensor positions CSV; the two override columns are optional."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read sensors CSV {path}: {exc}") from exc
    rows = [r for r in rows if r and not r[0].startswith("#")]
    if not rows:
        raise FormatError(f"sensors CSV {path} is empty")
    header = [c.strip() for c in rows[0]]
    if header not in (SENSORS_HEADER, SENSORS_HEADER[:3]):
        raise FormatError(
            f"bad sensors CSV header: expected {','.join(SENSORS_HEADER)} "
            f"(override columns optional)"
        )
    sensors: list[SensorSpec] = []
    seen: set[str] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise FormatError(
                f"sensors CSV row {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        sid = row[0].strip()
        if not sid:
            raise FormatError(f"sensors CSV row {lineno}: empty sensor id")
        if sid in seen:
            raise FormatError(f"sensors CSV row {lineno}: duplicate sensor id {sid!r}")
        seen.add(sid)
        try:
            lat, lon = float(row[1]), float(row[2])
        except ValueError as exc:
            raise FormatError(f"sensors CSV row {lineno}: {exc}") from exc
        rt_override = None
        lanes_override = None
        if len(header) == 5:
            if row[3].strip():
                try:
                    rt_override = HighwayClass(row[3].strip())
                except ValueError as exc:
                    raise FormatError(
                        f"sensors CSV row {lineno}: unknown road class {row[3]!r}"
                    ) from exc
            if row[4].strip():
                lanes_override = parse_lanes(row[4])
                if lanes_override is None:
                    raise FormatError(
                        f"sensors CSV row {lineno}: bad lanes override {row[4]!r}"
                    )
        sensors.append(SensorSpec(sid, lat, lon, rt_override, lanes_override))
    return sensors


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddedPosition:
    sensor_id: str
    lat: float
    lon: float
    embedding: RoadEmbedding
    central: CentralNode


def embed_position(
    raw: RawRoadData,
    cfg: PipelineConfig,
    sensor_id: str,
    lat: float,
    lon: float,
    road_type_override: HighwayClass | None = None,
    lanes_override: int | None = None,
) -> EmbeddedPosition:
    """Graph, central node, ego-graph and embedding for one position.

    The graph is built fresh around the position so every embedding sees
    the same radius of context regardless of other sensors.
    """
    graph = build_graph(raw, (lat, lon), cfg.radius_m, cfg.default_speeds or None)
    graph, central = insert_central_node(
        graph, sensor_id, lat, lon, snap_threshold_m=cfg.snap_threshold_m
    )
    ego = ego_graph(graph, central, cfg.ego_hops)
    emb = build_embedding(
        graph,
        ego,
        central,
        sensor_id=sensor_id,
        road_type_override=road_type_override,
        lanes_override=lanes_override,
    )
    return EmbeddedPosition(sensor_id, lat, lon, emb, central)


def embed_sensors(raw: RawRoadData, sensors: list[SensorSpec], cfg: PipelineConfig) -> list[EmbeddedPosition]:
    return parallel_map(
        lambda s: embed_position(
            raw, cfg, s.sensor_id, s.lat, s.lon, s.road_type_override, s.lanes_override
        ),
        sensors,
    )


def normalize_positions(positions: list[EmbeddedPosition]) -> list[EmbeddedPosition]:
    normalized = normalize_pool([p.embedding for p in positions])
    return [
        EmbeddedPosition(p.sensor_id, p.lat, p.lon, e, p.central)
        for p, e in zip(positions, normalized)
    ]


# ---------------------------------------------------------------------------
# traffic
# ---------------------------------------------------------------------------


def load_traffic_dir(
    cfg: PipelineConfig,
) -> tuple[dict[str, TrafficSeries], dict[str, CleaningStats]]:
    """Load and clean every series found under the traffic directory."""
    if not cfg.traffic_dir:
        raise ArgumentError("traffic_dir is not configured")
    try:
        names = sorted(n for n in os.listdir(cfg.traffic_dir) if n.endswith(".csv"))
    except OSError as exc:
        raise InputError(f"cannot list traffic dir {cfg.traffic_dir}: {exc}") from exc
    if not names:
        raise InputError(f"no .csv files under {cfg.traffic_dir}")
    series: dict[str, TrafficSeries] = {}
    for name in names:
        part = load_traffic_csv(os.path.join(cfg.traffic_dir, name), cfg.interval_min)
        for sid, s in part.items():
            if sid in series:
                raise FormatError(f"sensor {sid!r} appears in more than one traffic file")
            series[sid] = s
    cleaned: dict[str, TrafficSeries] = {}
    stats: dict[str, CleaningStats] = {}
    for sid in sorted(series):
        cleaned[sid], stats[sid] = clean_series(series[sid], cfg.spike_factor, cfg.max_gap)
    return cleaned, stats


def load_holidays(cfg: PipelineConfig) -> HolidayCalendar:
    if not cfg.holidays_path:
        return HolidayCalendar()
    return HolidayCalendar.from_csv(cfg.holidays_path)


# ---------------------------------------------------------------------------
# benchmark
# ---------------------------------------------------------------------------


def build_segment_records(
    positions: list[EmbeddedPosition],
    series: dict[str, TrafficSeries],
    holidays: HolidayCalendar,
) -> list[evaluation.SegmentRecord]:
    records = []
    for p in sorted(positions, key=lambda p: p.sensor_id):
        if p.sensor_id not in series:
            raise InputError(f"sensor {p.sensor_id!r} has no traffic series")
        s = series[p.sensor_id]
        records.append(
            evaluation.SegmentRecord(
                sensor_id=p.sensor_id,
                coords=(p.lat, p.lon),
                embedding=p.embedding,
                profile=daily_profile(s, "weekdays", holidays),
                mean_weekday_flow=mean_weekday_flow(s, holidays),
                road_type=p.central.host_edge_class.base.value,
            )
        )
    return records


def run_benchmark(cfg: PipelineConfig) -> dict:
    """Full leave-one-out study; returns a JSON-ready report dict.

    For every sensed segment in turn: hide its traffic, select a source
    by embeddings and by geography, score the selection against the
    per-candidate optimum, then score per-day generation (day-class
    medians and same-date copy) from the embedding-selected source.
    """
    for key in ("osm_path", "sensors_path", "traffic_dir"):
        if not getattr(cfg, key):
            raise ArgumentError(f"benchmark requires config key {key!r}")
    from .osm_ingest import parse_osm_extract

    raw = parse_osm_extract(cfg.osm_path)
    sensors = load_sensors(cfg.sensors_path)
    holidays = load_holidays(cfg)
    positions = normalize_positions(embed_sensors(raw, sensors, cfg))
    series, cleaning = load_traffic_dir(cfg)
    segments = build_segment_records(positions, series, holidays)

    outcomes = evaluation.selection_benchmark(segments, metric=cfg.distance)
    tally = evaluation.tally_selection(outcomes)

    def _gen_rows(outcome: evaluation.SelectionOutcome) -> dict:
        target_id = outcome.target_id
        source_id = outcome.embedding_result.selected_id
        target_series = series[target_id]
        source_series = series[source_id]
        model = generation.fit_cluster_model(source_series, holidays)
        generators = {
            METHOD_CLUSTER: lambda d: generation.generate_cluster(model, d, holidays),
            METHOD_COPY: lambda d: generation.generate_copy(source_series, d),
        }
        mean_flow = mean_weekday_flow(target_series, holidays)
        table = evaluation.generation_benchmark(target_series, mean_flow, generators)
        complete = table.complete_matrix()
        k = len(table.methods)
        stats_block: dict = {
            "days_evaluated": len(table.dates),
            "days_in_rank_test": int(table.complete_mask().sum()),
        }
        if complete.shape[0] >= 2:
            q = cfg.nemenyi_q_for(k)
            nem = evaluation.nemenyi_posthoc(complete, alpha=cfg.alpha, q_crit=q)
            stats_block["friedman"] = {
                "statistic": round6(nem.friedman_statistic),
                "p_value": round6(nem.friedman_p),
                "significant": nem.significant,
            }
            stats_block["nemenyi"] = {
                "critical_difference": round6(nem.critical_difference),
                "mean_ranks": {
                    m: round6(r) for m, r in zip(table.methods, nem.mean_ranks)
                },
                "verdicts": {
                    f"{table.methods[i]}|{table.methods[j]}": v
                    for (i, j), v in sorted(nem.verdicts.items())
                },
            }
            stats_block["best_methods"] = evaluation.best_methods(nem, table.methods)
        else:
            stats_block["friedman"] = None
            stats_block["nemenyi"] = None
            stats_block["best_methods"] = list(table.methods)
        return {"table": table, "stats": stats_block, "source_id": source_id}

    gen_results = {o.target_id: _gen_rows(o) for o in outcomes}
    by_id = {s.sensor_id: s for s in segments}

    report_targets = []
    for o in outcomes:
        g = gen_results[o.target_id]
        seg = by_id[o.target_id]
        mean_std = g["table"].method_mean_std()
        report_targets.append(
            {
                "target_id": o.target_id,
                "road_type": seg.road_type,
                "mean_weekday_flow": round6(o.mean_weekday_flow),
                "selection": {
                    "embedding": {
                        "selected": o.embedding_result.selected_id,
                        "distance": round6(o.embedding_result.distance),
                        "similarity_pct": round6(o.embedding_result.similarity_pct)
                        if o.embedding_result.similarity_pct is not None
                        else None,
                        "profile_rmse": round6(o.embedding_rmse),
                    },
                    "geographic": {
                        "selected": o.geographic_result.selected_id,
                        "distance_m": round6(o.geographic_result.distance),
                        "profile_rmse": round6(o.geographic_rmse),
                    },
                    "best_candidate": {
                        "selected": o.best_id,
                        "profile_rmse": round6(o.best_rmse),
                    },
                    "verdict": o.verdict,
                },
                "generation": {
                    "source": g["source_id"],
                    "methods": {
                        m: {"mean_nrmse": round6(mu), "std_nrmse": round6(sd)}
                        for m, (mu, sd) in mean_std.items()
                    },
                    **g["stats"],
                },
            }
        )

    report = {
        "config": cfg.snapshot(),
        "decisions": dict(DECISIONS),
        "selection_tally": tally,
        "targets": report_targets,
        "cleaning": {
            sid: {
                "spikes_removed": st.spikes_removed,
                "slots_interpolated": st.slots_interpolated,
                "slots_missing": st.slots_missing,
                "incomplete_days": st.incomplete_days,
                "total_days": st.total_days,
            }
            for sid, st in sorted(cleaning.items())
        },
    }
    return {
        "report": report,
        "outcomes": outcomes,
        "tables": {t: gen_results[t]["table"] for t in sorted(gen_results)},
        "segments": segments,
    }
