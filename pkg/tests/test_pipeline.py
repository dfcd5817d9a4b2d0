import os
import time

import numpy as np
import pytest

from roadtwin.config import PipelineConfig
from roadtwin.errors import FormatError, InputError
from roadtwin.osm_ingest import HighwayClass
from roadtwin.pipeline import (
    embed_sensors,
    load_sensors,
    load_traffic_dir,
    normalize_positions,
    parallel_map,
    run_benchmark,
    thread_count,
)


def fixture_cfg(minicity_dir, **kw):
    return PipelineConfig(
        osm_path=os.path.join(minicity_dir, "minicity.osm"),
        sensors_path=os.path.join(minicity_dir, "sensors.csv"),
        traffic_dir=os.path.join(minicity_dir, "traffic"),
        holidays_path=os.path.join(minicity_dir, "holidays.csv"),
        **kw,
    ).validate()


# ---------------------------------------------------------------------------
# sensors file
# ---------------------------------------------------------------------------

def test_load_fixture_sensors(minicity_dir):
    sensors = load_sensors(os.path.join(minicity_dir, "sensors.csv"))
    assert [s.sensor_id for s in sensors] == [f"s{i}" for i in range(1, 9)]
    by_id = {s.sensor_id: s for s in sensors}
    assert by_id["s4"].road_type_override is HighwayClass.SECONDARY
    assert by_id["s7"].lanes_override == 2
    assert by_id["s1"].road_type_override is None


def test_load_sensors_three_column_variant(tmp_path):
    p = tmp_path / "sensors.csv"
    p.write_text("sensor_id,lat,lon\n# a comment\nx1,40.0,-3.0\n")
    sensors = load_sensors(str(p))
    assert len(sensors) == 1
    assert sensors[0].lanes_override is None


def test_load_sensors_rejects_duplicates(tmp_path):
    p = tmp_path / "sensors.csv"
    p.write_text("sensor_id,lat,lon\nx1,40.0,-3.0\nx1,40.1,-3.0\n")
    with pytest.raises(FormatError, match="duplicate"):
        load_sensors(str(p))


def test_load_sensors_rejects_bad_override(tmp_path):
    p = tmp_path / "sensors.csv"
    p.write_text(
        "sensor_id,lat,lon,road_type_override,lanes_override\nx1,40.0,-3.0,boulevard,\n"
    )
    with pytest.raises(FormatError, match="road class"):
        load_sensors(str(p))


def test_load_sensors_rejects_bad_header(tmp_path):
    p = tmp_path / "sensors.csv"
    p.write_text("id,lat,lon\nx1,40.0,-3.0\n")
    with pytest.raises(FormatError, match="header"):
        load_sensors(str(p))


def test_load_sensors_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_sensors(str(tmp_path / "nope.csv"))


# ---------------------------------------------------------------------------
# threading
# ---------------------------------------------------------------------------

def test_thread_count_default(monkeypatch):
    monkeypatch.delenv("ROADTWIN_THREADS", raising=False)
    assert thread_count() == 1


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("ROADTWIN_THREADS", "4")
    assert thread_count() == 4


def test_thread_count_zero_means_all_cpus(monkeypatch):
    monkeypatch.setenv("ROADTWIN_THREADS", "0")
    assert thread_count() == (os.cpu_count() or 1)


@pytest.mark.parametrize("bad", ["-1", "abc", "1.5"])
def test_thread_count_rejects_garbage(monkeypatch, bad):
    monkeypatch.setenv("ROADTWIN_THREADS", bad)
    with pytest.raises(InputError):
        thread_count()


def test_parallel_map_preserves_order(monkeypatch):
    monkeypatch.setenv("ROADTWIN_THREADS", "4")

    def slow_square(x):
        time.sleep(0.002 * (7 - x % 8))  # later items finish earlier
        return x * x

    items = list(range(24))
    assert parallel_map(slow_square, items) == [x * x for x in items]


def test_parallel_map_propagates_exceptions(monkeypatch):
    monkeypatch.setenv("ROADTWIN_THREADS", "3")

    def boom(x):
        if x == 5:
            raise ValueError("five")
        return x

    with pytest.raises(ValueError, match="five"):
        parallel_map(boom, range(10))


# ---------------------------------------------------------------------------
# embedding the fixture sensors
# ---------------------------------------------------------------------------

def test_embeddings_identical_across_thread_counts(minicity_raw, minicity_dir, monkeypatch):
    cfg = fixture_cfg(minicity_dir)
    sensors = load_sensors(cfg.sensors_path)
    monkeypatch.setenv("ROADTWIN_THREADS", "1")
    single = embed_sensors(minicity_raw, sensors, cfg)
    monkeypatch.setenv("ROADTWIN_THREADS", "4")
    multi = embed_sensors(minicity_raw, sensors, cfg)
    assert [p.sensor_id for p in single] == [p.sensor_id for p in multi]
    for a, b in zip(single, multi):
        assert a.embedding.raw_vector() == b.embedding.raw_vector()


def test_normalize_positions_round_trip(minicity_raw, minicity_dir):
    cfg = fixture_cfg(minicity_dir)
    sensors = load_sensors(cfg.sensors_path)
    positions = normalize_positions(embed_sensors(minicity_raw, sensors, cfg))
    for p in positions:
        assert p.embedding.normalized is not None
        assert all(0.0 <= v <= 1.0 for v in p.embedding.normalized)


def test_load_traffic_dir_cleans_everything(minicity_dir):
    cfg = fixture_cfg(minicity_dir)
    series, stats = load_traffic_dir(cfg)
    assert sorted(series) == [f"s{i}" for i in range(1, 9)]
    assert stats["s3"].spikes_removed == 1
    assert stats["s6"].incomplete_days == 1
    assert stats["s2"].slots_missing == 56


def test_load_traffic_dir_rejects_cross_file_duplicates(tmp_path, minicity_dir):
    import shutil
    tdir = tmp_path / "traffic"
    tdir.mkdir()
    src = os.path.join(minicity_dir, "traffic", "s1.csv")
    shutil.copy(src, tdir / "s1.csv")
    shutil.copy(src, tdir / "s1_copy.csv")
    cfg = PipelineConfig(traffic_dir=str(tdir))
    with pytest.raises(FormatError, match="s1"):
        load_traffic_dir(cfg)


def test_load_traffic_dir_requires_csv_files(tmp_path):
    empty = tmp_path / "traffic"
    empty.mkdir()
    cfg = PipelineConfig(traffic_dir=str(empty))
    with pytest.raises(InputError):
        load_traffic_dir(cfg)


# ---------------------------------------------------------------------------
# full benchmark protocol
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def benchmark_result(minicity_dir):
    cfg = PipelineConfig(
        osm_path=os.path.join(minicity_dir, "minicity.osm"),
        sensors_path=os.path.join(minicity_dir, "sensors.csv"),
        traffic_dir=os.path.join(minicity_dir, "traffic"),
        holidays_path=os.path.join(minicity_dir, "holidays.csv"),
    ).validate()
    return run_benchmark(cfg)


def test_benchmark_report_structure(benchmark_result):
    report = benchmark_result["report"]
    assert set(report) == {"config", "decisions", "selection_tally", "targets", "cleaning"}
    assert len(report["targets"]) == 8
    tally = report["selection_tally"]
    assert tally["embedding"] + tally["geographic"] + tally["tie"] == 8
    for target in report["targets"]:
        assert set(target) >= {"target_id", "road_type", "mean_weekday_flow", "selection", "generation"}
        gen = target["generation"]
        assert set(gen["methods"]) == {"cluster", "copy"}
        assert gen["friedman"] is None or 0.0 <= gen["friedman"]["p_value"] <= 1.0
        assert set(gen["best_methods"]) <= {"cluster", "copy"}


def test_benchmark_outcomes_consistent(benchmark_result):
    outcomes = benchmark_result["outcomes"]
    for o in outcomes:
        assert o.best_rmse <= o.embedding_rmse + 1e-12
        assert o.best_rmse <= o.geographic_rmse + 1e-12
        if o.verdict == "embedding":
            assert o.embedding_rmse < o.geographic_rmse
        elif o.verdict == "geographic":
            assert o.geographic_rmse < o.embedding_rmse


def test_benchmark_generation_tables(benchmark_result):
    tables = benchmark_result["tables"]
    assert sorted(tables) == [f"s{i}" for i in range(1, 9)]
    for sid, table in tables.items():
        assert table.methods == ["cluster", "copy"]
        assert table.nrmse.shape == (len(table.dates), 2)
        finite = table.nrmse[~np.isnan(table.nrmse)]
        assert (finite >= 0).all()


def test_benchmark_requires_inputs():
    from roadtwin.errors import ArgumentError

    with pytest.raises(ArgumentError, match="osm_path"):
        run_benchmark(PipelineConfig())
