"""GPS-assisted next-AP prediction over hexagonal 802.11 cell layouts.

The package simulates a mobile node crossing a hexagonal grid of access
points, predicts where it will be when a handoff completes, and narrows the
handoff channel scan to the access points covering that prediction. Latency
accounting compares the narrowed scan against a full sweep of all channels.
"""

from .config import (
    ConfigError,
    ScenarioConfig,
    expand_scenarios,
    parse_config,
    render_config,
)
from .geo import (
    EARTH_RADIUS_M,
    MOVEMENT_THRESHOLD_M,
    GeoCoord,
    GpsNoiseModel,
    PlanarCoord,
    geo_to_planar,
    gps_error_track,
    gps_fix,
    haversine_distance,
    movement_detected,
    planar_to_geo,
)
from .mobility import (
    ArcTrajectory,
    PiecewiseTrajectory,
    RandomWaypointTrajectory,
    StraightTrajectory,
    Trajectory,
)
from .predictor import (
    PredictedRange,
    PredictorConfig,
    PredictorState,
    average_speed,
    candidate_aps,
    coordinate_rates,
    ingest_sample,
    predicted_range,
    should_trigger,
    trigger_distance,
    update_error_bounds,
)
from .simulator import (
    HandoffEvent,
    LatencyModel,
    Metrics,
    ScenarioError,
    ScenarioResult,
    ScenarioSpec,
    SweepResult,
    TraceRow,
    compute_metrics,
    format_summary,
    handoff_latency,
    run_scenario,
    run_sweep,
    scan_latency_bounds,
    write_events_csv,
    write_summary,
    write_trace_csv,
)
from .topology import (
    AccessPoint,
    ApMap,
    HexCell,
    MonitorSample,
    build_map_from_monitor_trace,
    hex_ring_map,
    load_map,
    save_map,
)

__version__ = "0.1.0"

__all__ = [
    "EARTH_RADIUS_M",
    "MOVEMENT_THRESHOLD_M",
    "AccessPoint",
    "ApMap",
    "ArcTrajectory",
    "ConfigError",
    "GeoCoord",
    "GpsNoiseModel",
    "HandoffEvent",
    "HexCell",
    "LatencyModel",
    "Metrics",
    "MonitorSample",
    "PiecewiseTrajectory",
    "PlanarCoord",
    "PredictedRange",
    "PredictorConfig",
    "PredictorState",
    "RandomWaypointTrajectory",
    "ScenarioConfig",
    "ScenarioError",
    "ScenarioResult",
    "ScenarioSpec",
    "StraightTrajectory",
    "SweepResult",
    "TraceRow",
    "Trajectory",
    "average_speed",
    "build_map_from_monitor_trace",
    "candidate_aps",
    "compute_metrics",
    "coordinate_rates",
    "expand_scenarios",
    "format_summary",
    "geo_to_planar",
    "gps_error_track",
    "gps_fix",
    "handoff_latency",
    "haversine_distance",
    "hex_ring_map",
    "ingest_sample",
    "load_map",
    "movement_detected",
    "parse_config",
    "planar_to_geo",
    "predicted_range",
    "render_config",
    "run_scenario",
    "run_sweep",
    "save_map",
    "scan_latency_bounds",
    "should_trigger",
    "trigger_distance",
    "update_error_bounds",
    "write_events_csv",
    "write_summary",
    "write_trace_csv",
]
