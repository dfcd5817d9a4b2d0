"""Pipeline configuration: one dataclass, JSON file loading, flag overrides.

Every key can be set in a JSON config file and overridden by a
``--key=value`` CLI flag.  The canonical snapshot (and its SHA-256 hash)
is embedded in every output so mixed-config artifacts can be rejected.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field, fields

from .errors import ArgumentError, FormatError, InputError

# Tie-break and convention choices that shape the numbers, recorded in
# every report so results stay interpretable.
DECISIONS = {
    "ego_hop_reachability": "undirected",
    "spbc_convention": "unnormalized_endpoint_excluded_all_equal_paths",
    "centrality_neighbor_scope": "all_ego_nodes_except_center",
    "unreachable_travel_time": "normalizes_to_1",
    "feature_scaling": "min_max_over_joint_pool",
    "median_even_count": "mean_of_central_pair",
    "profile_days": "complete_days_only",
    "day_class_encoding": "weekday_index_plus_7_on_holidays",
    "friedman_tie_correction": "omitted",
    "generation_rank_days": "listwise_complete_rows",
}

_PATH_FIELDS = ("osm_path", "sensors_path", "traffic_dir", "holidays_path", "output_dir")


@dataclass
class PipelineConfig:
    # input / output locations
    osm_path: str | None = None
    sensors_path: str | None = None
    traffic_dir: str | None = None
    holidays_path: str | None = None
    output_dir: str = "out"
    # graph construction
    radius_m: float = 2000.0
    ego_hops: int = 5
    snap_threshold_m: float = 100.0
    default_speeds: dict = field(default_factory=dict)
    # traffic series
    interval_min: int = 15
    spike_factor: float = 5.0
    max_gap: int = 4
    # selection and statistics
    distance: str = "l2"
    alpha: float = 0.05
    nemenyi_q: dict = field(default_factory=lambda: {"2": 1.959964, "3": 2.343})
    # reserved for sampled diagnostics
    seed: int = 0

    def validate(self) -> "PipelineConfig":
        if self.radius_m <= 0:
            raise ArgumentError(f"radius_m must be positive, got {self.radius_m}")
        if self.ego_hops < 1:
            raise ArgumentError(f"ego_hops must be >= 1, got {self.ego_hops}")
        if self.snap_threshold_m <= 0:
            raise ArgumentError(f"snap_threshold_m must be positive, got {self.snap_threshold_m}")
        if self.interval_min < 1 or 1440 % self.interval_min != 0:
            raise ArgumentError(
                f"interval_min must divide 1440 minutes, got {self.interval_min}"
            )
        if self.spike_factor <= 0:
            raise ArgumentError(f"spike_factor must be positive, got {self.spike_factor}")
        if self.max_gap < 0:
            raise ArgumentError(f"max_gap must be >= 0, got {self.max_gap}")
        if self.distance not in ("l2", "l1"):
            raise ArgumentError(f"distance must be 'l2' or 'l1', got {self.distance!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ArgumentError(f"alpha must be in (0, 1), got {self.alpha}")
        for k, v in self.default_speeds.items():
            if float(v) <= 0:
                raise ArgumentError(f"default speed for {k!r} must be positive, got {v}")
        for k, v in self.nemenyi_q.items():
            if float(v) <= 0:
                raise ArgumentError(f"nemenyi_q[{k!r}] must be positive, got {v}")
        return self

    def nemenyi_q_for(self, k: int) -> float | None:
        v = self.nemenyi_q.get(str(k))
        return None if v is None else float(v)

    def snapshot(self) -> dict:
        """Canonical JSON-ready view of the configuration.

        ``output_dir`` is excluded: it decides where results are written,
        not what they contain, so it must not perturb the config hash.
        """
        snap = dataclasses.asdict(self)
        del snap["output_dir"]
        return snap

    def config_hash(self) -> str:
        canon = json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _coerce(name: str, kind, raw):
    if raw is None:
        return None
    try:
        if kind is float:
            return float(raw)
        if kind is int:
            # reject silent truncation of e.g. ego_hops=2.5
            f = float(raw)
            i = int(f)
            if i != f:
                raise ValueError(f"{raw!r} is not an integer")
            return i
        if kind is dict:
            return dict(json.loads(raw)) if isinstance(raw, str) else dict(raw)
        return str(raw)
    except (TypeError, ValueError) as exc:
        raise ArgumentError(f"bad value for config key {name!r}: {exc}") from exc


def _field_types() -> dict[str, type]:
    kinds: dict[str, type] = {}
    for f in fields(PipelineConfig):
        if f.name in ("osm_path", "sensors_path", "traffic_dir", "holidays_path", "output_dir", "distance"):
            kinds[f.name] = str
        elif f.name in ("default_speeds", "nemenyi_q"):
            kinds[f.name] = dict
        elif f.name in ("radius_m", "snap_threshold_m", "spike_factor", "alpha"):
            kinds[f.name] = float
        else:
            kinds[f.name] = int
    return kinds


FIELD_TYPES = _field_types()


def load_config(path: str | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Config from a JSON file plus flag overrides (flags win).

    Relative paths inside the file resolve against the file's directory;
    unknown keys are rejected.
    """
    values: dict = {}
    base_dir = None
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise FormatError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise FormatError(f"config {path} must hold a JSON object")
        base_dir = os.path.dirname(os.path.abspath(path))
        values.update(data)

    unknown = set(values) - set(FIELD_TYPES)
    if unknown:
        raise ArgumentError(f"unknown config keys: {', '.join(sorted(unknown))}")
    coerced = {k: _coerce(k, FIELD_TYPES[k], v) for k, v in values.items()}
    if base_dir:
        for k in _PATH_FIELDS:
            if coerced.get(k) and not os.path.isabs(coerced[k]):
                coerced[k] = os.path.normpath(os.path.join(base_dir, coerced[k]))

    for k, v in (overrides or {}).items():
        if k not in FIELD_TYPES:
            raise ArgumentError(f"unknown config key {k!r}")
        if v is not None:
            coerced[k] = _coerce(k, FIELD_TYPES[k], v)

    return PipelineConfig(**coerced).validate()
