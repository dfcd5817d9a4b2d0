"""Command-line interface.

Subcommands cover the pipeline end to end: ``ingest`` (map extract to
graph CSVs), ``embed`` (feature vectors per sensor), ``select`` (source
segment for a target position), ``profile`` (daily profiles as CSV +
SVG), ``synthesize`` (generated days), ``evaluate`` (generated vs real),
``benchmark`` (leave-one-out study) and ``estimate`` (coordinate + date
to a generated day, end to end).

Configuration comes from an optional JSON file plus ``--key=value``
flags (flags win).  Outputs are deterministic byte-for-byte for a fixed
config, carry the config hash, and are written all-or-nothing.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from datetime import date, timedelta

from . import evaluation, generation, pipeline
from .config import PipelineConfig, load_config
from .embedding import EMBEDDING_DIMS
from .errors import ArgumentError, InputError, RoadTwinError
from .osm_ingest import graph_to_csv, build_graph, parse_osm_extract
from .output import OutputStage, check_config_hash, read_csv, round6, write_csv, write_json
from .selection import select_by_embedding, select_by_geography, similarity_percent
from .svgplot import profile_svg
from .traffic_data import daily_profile, mean_weekday_flow, slice_day

EMBEDDINGS_HEADER = (
    ["sensor_id"]
    + [f"f{i}" for i in range(1, EMBEDDING_DIMS + 1)]
    + [f"n{i}" for i in range(1, EMBEDDING_DIMS + 1)]
)
SELECTION_HEADER = ["target_id", "rank", "sensor_id", "distance", "similarity_pct", "method"]
PROFILE_HEADER = ["slot_index", "time_of_day", "median_flow", "stdev"]
GENERATED_HEADER = ["target_id", "date", "method", "slot_index", "flow", "fallback_used"]
ERRORS_HEADER = ["target_id", "date", "method", "rmse", "nrmse"]
SUMMARY_HEADER = ["target_id", "method", "mean_nrmse", "std_nrmse", "road_type", "best_methods"]
DAILY_ERRORS_HEADER = ["target_id", "date", "method", "nrmse"]


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON config file")
    for f in fields(PipelineConfig):
        parser.add_argument(f"--{f.name}", dest=f"cfg_{f.name}", metavar="VALUE")


def _parse_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError as exc:
        raise ArgumentError(f"bad date {text!r}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roadtwin",
        description="Estimate daily traffic profiles for unsensed road segments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a map extract into graph CSVs")
    _add_config_flags(p)
    p.add_argument("--center-lat", type=float, help="graph center (default: sensor centroid)")
    p.add_argument("--center-lon", type=float)

    p = sub.add_parser("embed", help="compute feature embeddings for every sensor")
    _add_config_flags(p)

    p = sub.add_parser("select", help="pick the source segment for a target position")
    _add_config_flags(p)
    p.add_argument("--lat", type=float, required=True)
    p.add_argument("--lon", type=float, required=True)

    p = sub.add_parser("profile", help="daily profiles as CSV and SVG")
    _add_config_flags(p)
    p.add_argument("--sensor", help="restrict to one sensor id")
    p.add_argument(
        "--day-filter", default="weekdays", choices=("weekdays", "weekends", "all")
    )

    p = sub.add_parser("synthesize", help="generate daily traffic for a date range")
    _add_config_flags(p)
    p.add_argument("--source", required=True, help="source sensor id")
    p.add_argument("--start", required=True, help="first date (ISO)")
    p.add_argument("--end", required=True, help="last date (ISO, inclusive)")
    p.add_argument("--method", default="cluster", choices=("cluster", "copy"))
    p.add_argument("--target-id", help="id written on output rows (default: source id)")

    p = sub.add_parser("evaluate", help="score generated days against recorded ones")
    _add_config_flags(p)
    p.add_argument("--generated", required=True, help="CSV written by synthesize/estimate")
    p.add_argument("--target", required=True, help="sensor id holding the real data")

    p = sub.add_parser("benchmark", help="leave-one-out study over all sensors")
    _add_config_flags(p)

    p = sub.add_parser("estimate", help="end-to-end: coordinates + date to a generated day")
    _add_config_flags(p)
    p.add_argument("--lat", type=float, required=True)
    p.add_argument("--lon", type=float, required=True)
    p.add_argument("--date", required=True, help="date to generate (ISO)")
    p.add_argument("--method", default="cluster", choices=("cluster", "copy"))
    return parser


def _config_from_args(args) -> PipelineConfig:
    overrides = {
        f.name: getattr(args, f"cfg_{f.name}")
        for f in fields(PipelineConfig)
        if getattr(args, f"cfg_{f.name}", None) is not None
    }
    return load_config(args.config, overrides)


def _require(cfg: PipelineConfig, *keys: str):
    for key in keys:
        if not getattr(cfg, key):
            raise ArgumentError(f"config key {key!r} is required for this command")


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def cmd_ingest(args, cfg: PipelineConfig):
    _require(cfg, "osm_path")
    raw = parse_osm_extract(cfg.osm_path)
    if args.center_lat is not None and args.center_lon is not None:
        center = (args.center_lat, args.center_lon)
    else:
        _require(cfg, "sensors_path")
        sensors = pipeline.load_sensors(cfg.sensors_path)
        center = (
            sum(s.lat for s in sensors) / len(sensors),
            sum(s.lon for s in sensors) / len(sensors),
        )
    graph = build_graph(raw, center, cfg.radius_m, cfg.default_speeds or None)
    chash = cfg.config_hash()
    nodes_csv, edges_csv = graph_to_csv(graph, config_hash=chash)
    class_counts: dict[str, int] = {}
    for e in graph.edges:
        class_counts[e.highway_class.value] = class_counts.get(e.highway_class.value, 0) + 1
    with OutputStage(cfg.output_dir) as stage:
        with open(stage.path("nodes.csv"), "w", encoding="utf-8") as fh:
            fh.write(nodes_csv)
        with open(stage.path("edges.csv"), "w", encoding="utf-8") as fh:
            fh.write(edges_csv)
        write_json(
            stage.path("manifest.json"),
            {
                "center": {"lat": round6(center[0]), "lon": round6(center[1])},
                "radius_m": cfg.radius_m,
                "n_nodes": len(graph.nodes),
                "n_edges": len(graph.edges),
                "edges_by_class": dict(sorted(class_counts.items())),
                "config": cfg.snapshot(),
            },
            config_hash=chash,
        )
    print(f"ingest: {len(graph.nodes)} nodes, {len(graph.edges)} edges -> {cfg.output_dir}")


def _embedding_rows(positions):
    for p in sorted(positions, key=lambda p: p.sensor_id):
        yield [p.sensor_id, *p.embedding.raw_vector(), *p.embedding.normalized]


def cmd_embed(args, cfg: PipelineConfig):
    _require(cfg, "osm_path", "sensors_path")
    raw = parse_osm_extract(cfg.osm_path)
    sensors = pipeline.load_sensors(cfg.sensors_path)
    positions = pipeline.normalize_positions(pipeline.embed_sensors(raw, sensors, cfg))
    with OutputStage(cfg.output_dir) as stage:
        write_csv(
            stage.path("embeddings.csv"),
            EMBEDDINGS_HEADER,
            _embedding_rows(positions),
            config_hash=cfg.config_hash(),
        )
    print(f"embed: {len(positions)} embeddings -> {cfg.output_dir}/embeddings.csv")


def _selection_rows(result):
    sim_known = result.method == "embedding"
    for rank, (sid, dist) in enumerate(result.ranking, start=1):
        sim = similarity_percent(dist) if sim_known else None
        yield [result.target_id, rank, sid, dist, sim, result.method]


def cmd_select(args, cfg: PipelineConfig):
    _require(cfg, "osm_path", "sensors_path")
    raw = parse_osm_extract(cfg.osm_path)
    sensors = pipeline.load_sensors(cfg.sensors_path)
    target_id = "target"
    if any(s.sensor_id == target_id for s in sensors):
        raise ArgumentError(f"sensor id {target_id!r} clashes with the target placeholder")
    target_pos = pipeline.embed_position(raw, cfg, target_id, args.lat, args.lon)
    positions = pipeline.embed_sensors(raw, sensors, cfg)
    pool = pipeline.normalize_positions(positions + [target_pos])
    target_norm = pool[-1]
    sensor_norm = pool[:-1]
    emb_res = select_by_embedding(
        target_norm.embedding, [p.embedding for p in sensor_norm], metric=cfg.distance
    )
    geo_res = select_by_geography(
        target_id, (args.lat, args.lon), [(s.sensor_id, (s.lat, s.lon)) for s in sensors]
    )
    with OutputStage(cfg.output_dir) as stage:
        write_csv(
            stage.path("selection.csv"),
            SELECTION_HEADER,
            list(_selection_rows(emb_res)) + list(_selection_rows(geo_res)),
            config_hash=cfg.config_hash(),
        )
    print(
        f"select: embedding -> {emb_res.selected_id}, geographic -> {geo_res.selected_id} "
        f"({cfg.output_dir}/selection.csv)"
    )


def _time_of_day(slot: int, interval_min: int) -> str:
    minutes = slot * interval_min
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def cmd_profile(args, cfg: PipelineConfig):
    _require(cfg, "traffic_dir")
    series, _stats = pipeline.load_traffic_dir(cfg)
    holidays = pipeline.load_holidays(cfg)
    ids = sorted(series)
    if args.sensor:
        if args.sensor not in series:
            raise ArgumentError(f"no traffic series for sensor {args.sensor!r}")
        ids = [args.sensor]
    chash = cfg.config_hash()
    with OutputStage(cfg.output_dir) as stage:
        for sid in ids:
            prof = daily_profile(series[sid], args.day_filter, holidays)
            rows = [
                [i, _time_of_day(i, prof.interval_min), float(v), float(s)]
                for i, (v, s) in enumerate(zip(prof.values, prof.stdev))
            ]
            write_csv(stage.path(f"profile_{sid}.csv"), PROFILE_HEADER, rows, config_hash=chash)
            svg = profile_svg(
                prof.values,
                prof.stdev,
                prof.interval_min,
                f"daily profile: {sid} ({args.day_filter}, {prof.n_days} days)",
            )
            with open(stage.path(f"profile_{sid}.svg"), "w", encoding="utf-8") as fh:
                fh.write(svg)
    print(f"profile: {len(ids)} sensor(s) -> {cfg.output_dir}")


def _generated_rows(target_id: str, gen_days):
    for g in gen_days:
        for slot, flow in enumerate(g.values):
            yield [target_id, g.target_date.isoformat(), g.method, slot, float(flow), g.fallback]


def cmd_synthesize(args, cfg: PipelineConfig):
    _require(cfg, "traffic_dir")
    series, _stats = pipeline.load_traffic_dir(cfg)
    holidays = pipeline.load_holidays(cfg)
    if args.source not in series:
        raise ArgumentError(f"no traffic series for source sensor {args.source!r}")
    start = _parse_date(args.start)
    end = _parse_date(args.end)
    if end < start:
        raise ArgumentError(f"end date {args.end} before start date {args.start}")
    dates = [start + timedelta(days=i) for i in range((end - start).days + 1)]
    source = series[args.source]
    out_days = []
    if args.method == "cluster":
        model = generation.fit_cluster_model(source, holidays)
        for d in dates:
            out_days.append(generation.generate_cluster(model, d, holidays))
    else:
        for d in dates:
            out_days.append(generation.generate_copy(source, d))
    target_id = args.target_id or args.source
    with OutputStage(cfg.output_dir) as stage:
        write_csv(
            stage.path("generated_days.csv"),
            GENERATED_HEADER,
            _generated_rows(target_id, out_days),
            config_hash=cfg.config_hash(),
        )
    print(
        f"synthesize: {len(out_days)} day(s) via {args.method} -> "
        f"{cfg.output_dir}/generated_days.csv"
    )


def cmd_evaluate(args, cfg: PipelineConfig):
    _require(cfg, "traffic_dir")
    chash = cfg.config_hash()
    found_hash, header, rows = read_csv(args.generated)
    check_config_hash(found_hash, chash, args.generated)
    if header != GENERATED_HEADER:
        raise InputError(f"{args.generated} is not a generated-days CSV")
    series, _stats = pipeline.load_traffic_dir(cfg)
    if args.target not in series:
        raise ArgumentError(f"no traffic series for target sensor {args.target!r}")
    target = series[args.target]
    holidays = pipeline.load_holidays(cfg)
    mean_flow = mean_weekday_flow(target, holidays)

    grouped: dict[tuple[str, str], dict[int, float]] = {}
    for lineno, row in enumerate(rows, start=3):  # hash + header precede
        if len(row) != len(GENERATED_HEADER):
            raise InputError(f"{args.generated} row {lineno}: bad field count")
        _tid, d_text, method, slot_text, flow_text, _fb = row
        try:
            grouped.setdefault((d_text, method), {})[int(slot_text)] = float(flow_text)
        except ValueError as exc:
            raise InputError(f"{args.generated} row {lineno}: {exc}") from exc

    out_rows = []
    for (d_text, method), slots in sorted(grouped.items()):
        d = _parse_date(d_text)
        if sorted(slots) != list(range(target.slots_per_day)):
            raise InputError(
                f"{args.generated}: day {d_text} ({method}) does not cover every slot"
            )
        generated = [slots[i] for i in range(target.slots_per_day)]
        real = slice_day(target, d)
        r = evaluation.rmse(real, generated)
        out_rows.append([args.target, d_text, method, r, r / mean_flow])
    with OutputStage(cfg.output_dir) as stage:
        write_csv(stage.path("errors.csv"), ERRORS_HEADER, out_rows, config_hash=chash)
    print(f"evaluate: {len(out_rows)} day(s) scored -> {cfg.output_dir}/errors.csv")


def cmd_benchmark(args, cfg: PipelineConfig):
    result = pipeline.run_benchmark(cfg)
    chash = cfg.config_hash()
    report = result["report"]

    summary_rows = []
    for tgt in report["targets"]:
        for method, ms in sorted(tgt["generation"]["methods"].items()):
            summary_rows.append(
                [
                    tgt["target_id"],
                    method,
                    ms["mean_nrmse"],
                    ms["std_nrmse"],
                    tgt["road_type"],
                    "+".join(tgt["generation"]["best_methods"]),
                ]
            )

    daily_rows = []
    for tid in sorted(result["tables"]):
        table = result["tables"][tid]
        for i, d in enumerate(table.dates):
            for j, m in enumerate(table.methods):
                v = table.nrmse[i, j]
                daily_rows.append([tid, d.isoformat(), m, float(v)])

    selection_rows = []
    for o in result["outcomes"]:
        selection_rows.extend(_selection_rows(o.embedding_result))
        selection_rows.extend(_selection_rows(o.geographic_result))

    with OutputStage(cfg.output_dir) as stage:
        write_json(stage.path("report.json"), report, config_hash=chash)
        write_csv(stage.path("summary.csv"), SUMMARY_HEADER, summary_rows, config_hash=chash)
        write_csv(
            stage.path("generation_errors.csv"),
            DAILY_ERRORS_HEADER,
            daily_rows,
            config_hash=chash,
        )
        write_csv(stage.path("selection.csv"), SELECTION_HEADER, selection_rows, config_hash=chash)
    t = report["selection_tally"]
    print(
        f"benchmark: {len(report['targets'])} targets; selection "
        f"embedding {t['embedding']} / geographic {t['geographic']} / ties {t['tie']} "
        f"-> {cfg.output_dir}"
    )


def cmd_estimate(args, cfg: PipelineConfig):
    _require(cfg, "osm_path", "sensors_path", "traffic_dir")
    d = _parse_date(args.date)
    raw = parse_osm_extract(cfg.osm_path)
    sensors = pipeline.load_sensors(cfg.sensors_path)
    target_id = "target"
    if any(s.sensor_id == target_id for s in sensors):
        raise ArgumentError(f"sensor id {target_id!r} clashes with the target placeholder")
    target_pos = pipeline.embed_position(raw, cfg, target_id, args.lat, args.lon)
    positions = pipeline.embed_sensors(raw, sensors, cfg)
    pool = pipeline.normalize_positions(positions + [target_pos])
    emb_res = select_by_embedding(
        pool[-1].embedding, [p.embedding for p in pool[:-1]], metric=cfg.distance
    )
    series, _stats = pipeline.load_traffic_dir(cfg)
    if emb_res.selected_id not in series:
        raise InputError(f"selected sensor {emb_res.selected_id!r} has no traffic series")
    source = series[emb_res.selected_id]
    holidays = pipeline.load_holidays(cfg)
    if args.method == "cluster":
        model = generation.fit_cluster_model(source, holidays)
        gen = generation.generate_cluster(model, d, holidays)
    else:
        gen = generation.generate_copy(source, d)
    chash = cfg.config_hash()
    with OutputStage(cfg.output_dir) as stage:
        write_csv(
            stage.path("generated_day.csv"),
            GENERATED_HEADER,
            _generated_rows(target_id, [gen]),
            config_hash=chash,
        )
        write_json(
            stage.path("estimate.json"),
            {
                "target": {"lat": args.lat, "lon": args.lon, "date": args.date},
                "selected_source": emb_res.selected_id,
                "selection_distance": round6(emb_res.distance),
                "similarity_pct": round6(emb_res.similarity_pct)
                if emb_res.similarity_pct is not None
                else None,
                "method": args.method,
                "fallback_used": gen.fallback,
                "config": cfg.snapshot(),
            },
            config_hash=chash,
        )
    print(
        f"estimate: source {emb_res.selected_id}, method {args.method} -> "
        f"{cfg.output_dir}/generated_day.csv"
    )


HANDLERS = {
    "ingest": cmd_ingest,
    "embed": cmd_embed,
    "select": cmd_select,
    "profile": cmd_profile,
    "synthesize": cmd_synthesize,
    "evaluate": cmd_evaluate,
    "benchmark": cmd_benchmark,
    "estimate": cmd_estimate,
}


def _emit_error(exc: BaseException, exit_code: int):
    doc = {
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_code": exit_code,
    }
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        HANDLERS[args.command](args, cfg)
        return 0
    except RoadTwinError as exc:
        _emit_error(exc, exc.exit_code)
        return exc.exit_code
    except Exception as exc:  # internal invariant violation
        _emit_error(exc, 4)
        return 4


if __name__ == "__main__":
    sys.exit(main())
