"""roadtwin: daily traffic profiles for road segments without sensors.

Given a map extract, the positions of permanent traffic sensors and
their count series, the package picks the sensed segment most similar
to an unsensed target (by road-network feature embeddings) and
synthesizes the target's daily flow from it.
"""

from .config import PipelineConfig, load_config
from .embedding import (
    EMBEDDING_DIMS,
    RoadEmbedding,
    betweenness,
    build_embedding,
    centrality_features,
    normalize_pool,
    road_type_code,
    travel_time_to_class,
)
from .errors import (
    ArgumentError,
    AvailabilityError,
    DomainError,
    FormatError,
    InputError,
    ParseError,
    RoadTwinError,
    SnapError,
    StructuralError,
)
from .evaluation import (
    friedman_test,
    generation_benchmark,
    nemenyi_posthoc,
    nrmse,
    rmse,
    selection_benchmark,
)
from .generation import (
    ClusterModel,
    GeneratedDay,
    day_class,
    fit_cluster_model,
    generate_cluster,
    generate_copy,
)
from .osm_ingest import (
    HighwayClass,
    RawRoadData,
    build_graph,
    default_speed,
    graph_from_csv,
    graph_to_csv,
    parse_osm_extract,
)
from .road_graph import (
    CentralNode,
    Edge,
    EgoGraph,
    RoadGraph,
    ego_graph,
    insert_central_node,
    shortest_travel_time,
)
from .selection import (
    SelectionResult,
    embedding_distance,
    select_by_embedding,
    select_by_geography,
    similarity_percent,
)
from .traffic_data import (
    HolidayCalendar,
    TrafficProfile,
    TrafficSeries,
    clean_series,
    daily_profile,
    load_series,
    load_traffic_csv,
    mean_weekday_flow,
    slice_day,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # config
    "PipelineConfig",
    "load_config",
    # embedding
    "EMBEDDING_DIMS",
    "RoadEmbedding",
    "betweenness",
    "build_embedding",
    "centrality_features",
    "normalize_pool",
    "road_type_code",
    "travel_time_to_class",
    # errors
    "ArgumentError",
    "AvailabilityError",
    "DomainError",
    "FormatError",
    "InputError",
    "ParseError",
    "RoadTwinError",
    "SnapError",
    "StructuralError",
    # evaluation
    "friedman_test",
    "generation_benchmark",
    "nemenyi_posthoc",
    "nrmse",
    "rmse",
    "selection_benchmark",
    # generation
    "ClusterModel",
    "GeneratedDay",
    "day_class",
    "fit_cluster_model",
    "generate_cluster",
    "generate_copy",
    # map ingestion
    "HighwayClass",
    "RawRoadData",
    "build_graph",
    "default_speed",
    "graph_from_csv",
    "graph_to_csv",
    "parse_osm_extract",
    # road graph
    "CentralNode",
    "Edge",
    "EgoGraph",
    "RoadGraph",
    "ego_graph",
    "insert_central_node",
    "shortest_travel_time",
    # selection
    "SelectionResult",
    "embedding_distance",
    "select_by_embedding",
    "select_by_geography",
    "similarity_percent",
    # traffic data
    "HolidayCalendar",
    "TrafficProfile",
    "TrafficSeries",
    "clean_series",
    "daily_profile",
    "load_series",
    "load_traffic_csv",
    "mean_weekday_flow",
    "slice_day",
]
