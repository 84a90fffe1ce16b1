"""Scenario configuration: flat key=value files and sweep expansion.

The format is deliberately plain: one `key=value` per line, `#` comments,
repeatable `waypoint=` lines for piecewise routes, and repeatable
`sweep.<param>=` lines declaring parameter grids. Headings are degrees in
files and converted to radians when trajectories are built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Callable

import numpy as np

from .geo import GpsNoiseModel, PlanarCoord
from .mobility import (
    ArcTrajectory,
    PiecewiseTrajectory,
    RandomWaypointTrajectory,
    StraightTrajectory,
    Trajectory,
)
from .predictor import PredictorConfig
from .simulator import LatencyModel, ScenarioSpec
from .topology import ApMap, HexCell, hex_ring_map, load_map


class ConfigError(Exception):
    """Invalid configuration text or an inconsistent combination of keys."""


_TRAJECTORY_KINDS = ("straight", "piecewise", "arc", "random_waypoint")

# Auto-durations pad the boundary-exit time so the crossing resolves and the
# predictor re-initializes before the run ends.
_DURATION_MARGIN_MS = 2000.0


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of a run, mirroring the config file keys 1:1."""

    # map source: either a saved map file or a generated ring grid
    map_file: str = ""
    rings: int = 2
    edge_m: float = 231.0
    orientation: str = "flat"
    neighbor_threshold_m: float = 0.0  # 0 selects the topology default
    channels: tuple[int, ...] = (1, 6, 11)

    # trajectory
    trajectory: str = "straight"
    start_x_m: float = 0.0
    start_y_m: float = 0.0
    heading_deg: float = 0.0
    speed_mps: float = 19.0222
    duration_ms: float | None = None  # None = auto (exit time + margin)
    turn_radius_m: float = 0.0
    waypoints: tuple[tuple[float, float, float], ...] = ()  # (x, y, speed)
    rw_x_min_m: float = 0.0
    rw_x_max_m: float = 0.0
    rw_y_min_m: float = 0.0
    rw_y_max_m: float = 0.0
    rw_v_min_mps: float = 0.0
    rw_v_max_mps: float = 0.0
    rw_pause_ms: float = 0.0

    # predictor
    init_ms: float = 60.0
    period_ms: float = 5.0
    t_delay_ms: float = 50.0
    speed_window: str = "growing"
    scale_error_bounds: bool = False

    # latency model
    n_channels: int = 11
    t_min_ms: float = 5.0
    t_max_ms: float = 30.0
    per_channel_ms: float = 30.0
    auth_ms: float = 2.0
    reassoc_ms: float = 2.0

    # measurement noise
    sigma_m: float = 0.3
    bias_tau_ms: float = 180_000.0
    jitter_frac: float = 0.01
    excursion_prob: float = 0.0015
    excursion_frac: float = 0.35

    # run control
    seed: int = 0
    out_dir: str = "out"
    label: str = ""

    # sweep grids (empty = not swept)
    sweep_edge_m: tuple[float, ...] = ()
    sweep_heading_deg: tuple[float, ...] = ()
    sweep_speed_mps: tuple[float, ...] = ()
    sweep_seeds: int = 0  # number of seed repetitions; 0 = single

    def has_grids(self) -> bool:
        return bool(self.sweep_edge_m or self.sweep_heading_deg or self.sweep_speed_mps or self.sweep_seeds > 1)


def _parse_bool(s: str) -> bool:
    if s == "true":
        return True
    if s == "false":
        return False
    raise ValueError(f"expected true or false, got {s!r}")


def _parse_duration(s: str) -> float | None:
    return None if s == "auto" else float(s)


def _parse_channels(s: str) -> tuple[int, ...]:
    return tuple(int(part) for part in s.split(","))


_SCALAR_KEYS: dict[str, tuple[str, Callable[[str], object]]] = {
    "map_file": ("map_file", str),
    "rings": ("rings", int),
    "edge_m": ("edge_m", float),
    "orientation": ("orientation", str),
    "neighbor_threshold_m": ("neighbor_threshold_m", float),
    "channels": ("channels", _parse_channels),
    "trajectory": ("trajectory", str),
    "start_x_m": ("start_x_m", float),
    "start_y_m": ("start_y_m", float),
    "heading_deg": ("heading_deg", float),
    "speed_mps": ("speed_mps", float),
    "duration_ms": ("duration_ms", _parse_duration),
    "turn_radius_m": ("turn_radius_m", float),
    "rw_x_min_m": ("rw_x_min_m", float),
    "rw_x_max_m": ("rw_x_max_m", float),
    "rw_y_min_m": ("rw_y_min_m", float),
    "rw_y_max_m": ("rw_y_max_m", float),
    "rw_v_min_mps": ("rw_v_min_mps", float),
    "rw_v_max_mps": ("rw_v_max_mps", float),
    "rw_pause_ms": ("rw_pause_ms", float),
    "init_ms": ("init_ms", float),
    "period_ms": ("period_ms", float),
    "t_delay_ms": ("t_delay_ms", float),
    "speed_window": ("speed_window", str),
    "scale_error_bounds": ("scale_error_bounds", _parse_bool),
    "n_channels": ("n_channels", int),
    "t_min_ms": ("t_min_ms", float),
    "t_max_ms": ("t_max_ms", float),
    "per_channel_ms": ("per_channel_ms", float),
    "auth_ms": ("auth_ms", float),
    "reassoc_ms": ("reassoc_ms", float),
    "sigma_m": ("sigma_m", float),
    "bias_tau_ms": ("bias_tau_ms", float),
    "jitter_frac": ("jitter_frac", float),
    "excursion_prob": ("excursion_prob", float),
    "excursion_frac": ("excursion_frac", float),
    "seed": ("seed", int),
    "out_dir": ("out_dir", str),
    "label": ("label", str),
    "sweep.seeds": ("sweep_seeds", int),
}

_LIST_KEYS: dict[str, str] = {
    "sweep.edge_m": "sweep_edge_m",
    "sweep.heading_deg": "sweep_heading_deg",
    "sweep.speed_mps": "sweep_speed_mps",
}


def parse_config(text: str) -> ScenarioConfig:
    """Parse config text; unknown keys and malformed values raise ConfigError."""
    values: dict[str, object] = {}
    waypoints: list[tuple[float, float, float]] = []
    grids: dict[str, list[float]] = {name: [] for name in _LIST_KEYS.values()}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key == "waypoint":
                parts = value.split(",")
                if len(parts) != 3:
                    raise ValueError("expected x,y,speed")
                waypoints.append((float(parts[0]), float(parts[1]), float(parts[2])))
            elif key in _LIST_KEYS:
                grids[_LIST_KEYS[key]].extend(float(p) for p in value.split(","))
            elif key in _SCALAR_KEYS:
                attr, conv = _SCALAR_KEYS[key]
                values[attr] = conv(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc

    if waypoints:
        values["waypoints"] = tuple(waypoints)
    for attr, items in grids.items():
        if items:
            values[attr] = tuple(items)

    cfg = ScenarioConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: ScenarioConfig) -> None:
    def fail(msg: str) -> None:
        raise ConfigError(msg)

    if cfg.rings < 0:
        fail("rings must be >= 0")
    if cfg.edge_m <= 0 or any(e <= 0 for e in cfg.sweep_edge_m):
        fail("edge_m must be > 0")
    if cfg.orientation not in ("flat", "pointy"):
        fail(f"orientation must be flat or pointy, got {cfg.orientation!r}")
    if not cfg.channels or any(not 1 <= c <= 14 for c in cfg.channels):
        fail("channels must be a non-empty list of values in 1..14")
    if cfg.trajectory not in _TRAJECTORY_KINDS:
        fail(f"trajectory must be one of {', '.join(_TRAJECTORY_KINDS)}")
    if cfg.map_file and cfg.sweep_edge_m:
        fail("sweep.edge_m cannot be combined with map_file")
    if not 0 <= cfg.seed < 2**64:
        fail("seed must fit in 64 unsigned bits")
    if cfg.sweep_seeds < 0:
        fail("sweep.seeds must be >= 0")
    if cfg.duration_ms is not None and cfg.duration_ms <= 0:
        fail("duration_ms must be > 0 (or auto)")

    kind = cfg.trajectory
    if kind in ("straight", "arc") and cfg.speed_mps <= 0:
        fail("speed_mps must be > 0")
    if kind == "arc":
        if cfg.turn_radius_m == 0.0:
            fail("arc trajectory requires a nonzero turn_radius_m")
        if cfg.duration_ms is None:
            fail("arc trajectory requires an explicit duration_ms")
    if kind == "piecewise":
        if len(cfg.waypoints) < 2:
            fail("piecewise trajectory requires at least two waypoint= lines")
    elif cfg.waypoints:
        fail("waypoint= lines are only valid with trajectory=piecewise")
    if kind == "random_waypoint":
        if cfg.duration_ms is None:
            fail("random_waypoint trajectory requires an explicit duration_ms")
        if not (cfg.rw_x_min_m < cfg.rw_x_max_m and cfg.rw_y_min_m < cfg.rw_y_max_m):
            fail("random_waypoint requires rw_x/y bounds with min < max")
        if not 0 < cfg.rw_v_min_mps <= cfg.rw_v_max_mps:
            fail("random_waypoint requires 0 < rw_v_min_mps <= rw_v_max_mps")
    if cfg.sweep_heading_deg and kind not in ("straight", "arc"):
        fail("sweep.heading_deg only applies to straight or arc trajectories")
    if cfg.sweep_speed_mps and kind not in ("straight", "arc"):
        fail("sweep.speed_mps only applies to straight or arc trajectories")

    # Component invariants (period divisibility, latency bracket, noise ranges)
    # are owned by the model types; surface their complaints as config errors.
    try:
        _predictor_of(cfg)
        _latency_of(cfg)
        _noise_of(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def render_config(cfg: ScenarioConfig) -> str:
    """Emit config text that parses back to an equal ScenarioConfig."""
    lines: list[str] = []

    def emit(key: str, value: object) -> None:
        if isinstance(value, bool):
            lines.append(f"{key}={'true' if value else 'false'}")
        elif isinstance(value, float):
            lines.append(f"{key}={value!r}")
        else:
            lines.append(f"{key}={value}")

    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "waypoints":
            for x, y, v in value:
                lines.append(f"waypoint={x!r},{y!r},{v!r}")
        elif f.name == "channels":
            emit("channels", ",".join(str(c) for c in value))
        elif f.name in ("sweep_edge_m", "sweep_heading_deg", "sweep_speed_mps"):
            if value:
                key = "sweep." + f.name.removeprefix("sweep_")
                emit(key, ",".join(repr(v) for v in value))
        elif f.name == "sweep_seeds":
            emit("sweep.seeds", value)
        elif f.name == "duration_ms":
            emit("duration_ms", "auto" if value is None else value)
        else:
            emit(f.name, value)
    return "\n".join(lines) + "\n"


def _predictor_of(cfg: ScenarioConfig) -> PredictorConfig:
    return PredictorConfig(
        init_duration_ms=cfg.init_ms,
        sample_period_ms=cfg.period_ms,
        t_delay_ms=cfg.t_delay_ms,
        speed_window=cfg.speed_window,
        scale_error_bounds=cfg.scale_error_bounds,
    )


def _latency_of(cfg: ScenarioConfig) -> LatencyModel:
    return LatencyModel(
        n_channels=cfg.n_channels,
        t_min_ms=cfg.t_min_ms,
        t_max_ms=cfg.t_max_ms,
        per_channel_ms=cfg.per_channel_ms,
        auth_ms=cfg.auth_ms,
        reassoc_ms=cfg.reassoc_ms,
    )


def _noise_of(cfg: ScenarioConfig) -> GpsNoiseModel:
    return GpsNoiseModel(
        sigma=cfg.sigma_m,
        sample_period_ms=cfg.period_ms,
        jitter_frac=cfg.jitter_frac,
        excursion_prob=cfg.excursion_prob,
        excursion_frac=cfg.excursion_frac,
        bias_tau_ms=cfg.bias_tau_ms,
    )


def _map_for_edge(cfg: ScenarioConfig, edge: float, cache: dict[float, ApMap]) -> ApMap:
    if edge not in cache:
        cache[edge] = hex_ring_map(
            cfg.rings,
            edge,
            orientation=cfg.orientation,
            neighbor_threshold=cfg.neighbor_threshold_m,
            channels=cfg.channels,
        )
    return cache[edge]


def _ray_exit_distance(start: PlanarCoord, heading_rad: float, cell: HexCell) -> float:
    """Distance along the ray from start until it leaves the cell boundary."""
    dx, dy = math.cos(heading_rad), math.sin(heading_rad)
    verts = cell.vertices()
    best = math.inf
    for i in range(6):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % 6]
        ex, ey = bx - ax, by - ay
        den = dx * ey - dy * ex
        if abs(den) < 1e-15:
            continue
        qx, qy = ax - start.x, ay - start.y
        s = (qx * ey - qy * ex) / den
        u = (qx * dy - qy * dx) / den
        if s > 1e-9 and -1e-9 <= u <= 1 + 1e-9:
            best = min(best, s)
    if not math.isfinite(best):
        raise ConfigError("trajectory start does not exit its cell along this heading")
    return best


def _auto_duration_ms(cfg: ScenarioConfig, start: PlanarCoord, heading_rad: float,
                      speed: float, ap_map: ApMap) -> float:
    serving = ap_map.cell_of(start)
    if serving is None:
        raise ConfigError(f"trajectory start ({start.x}, {start.y}) is outside the map")
    exit_m = _ray_exit_distance(start, heading_rad, ap_map.cell(serving))
    return exit_m / speed * 1000.0 + _DURATION_MARGIN_MS


def _trajectory_of(cfg: ScenarioConfig, heading_deg: float, speed: float,
                   ap_map: ApMap, scenario_index: int) -> Trajectory:
    start = PlanarCoord(cfg.start_x_m, cfg.start_y_m)
    heading = math.radians(heading_deg)
    kind = cfg.trajectory
    if kind == "straight":
        duration = cfg.duration_ms
        if duration is None:
            duration = _auto_duration_ms(cfg, start, heading, speed, ap_map)
        return StraightTrajectory(start, heading, speed, duration)
    if kind == "arc":
        assert cfg.duration_ms is not None  # enforced by _validate
        return ArcTrajectory(start, heading, speed, cfg.turn_radius_m, cfg.duration_ms)
    if kind == "piecewise":
        points = tuple((PlanarCoord(x, y), v) for x, y, v in cfg.waypoints)
        duration = cfg.duration_ms
        if duration is None:
            total = 0.0
            for (a, _), (b, v) in zip(points, points[1:]):
                total += math.hypot(b.x - a.x, b.y - a.y) / v * 1000.0
            duration = total + _DURATION_MARGIN_MS
        return PiecewiseTrajectory(points, duration)
    # random_waypoint: its own route RNG, decoupled from the measurement noise
    route_seed = int(np.random.SeedSequence((cfg.seed, scenario_index, 0x726F757465)).generate_state(1)[0])
    return RandomWaypointTrajectory(
        bounds=(cfg.rw_x_min_m, cfg.rw_x_max_m, cfg.rw_y_min_m, cfg.rw_y_max_m),
        speed_range_mps=(cfg.rw_v_min_mps, cfg.rw_v_max_mps),
        seed=route_seed,
        duration_ms=cfg.duration_ms,
        pause_ms=cfg.rw_pause_ms,
        start=PlanarCoord(cfg.start_x_m, cfg.start_y_m),
    )


def expand_scenarios(cfg: ScenarioConfig) -> list[ScenarioSpec]:
    """Expand declared grids into concrete scenario specs.

    Expansion order is edge, then heading, then speed, then seed repetition;
    per-scenario noise seeds derive from (master seed, scenario index) so the
    result set is stable under any execution order.
    """
    predictor = _predictor_of(cfg)
    latency = _latency_of(cfg)
    noise = _noise_of(cfg)

    cache: dict[float, ApMap] = {}
    if cfg.map_file:
        fixed_map = load_map(cfg.map_file)
    else:
        fixed_map = None

    edges = cfg.sweep_edge_m or (cfg.edge_m,)
    headings = cfg.sweep_heading_deg or (cfg.heading_deg,)
    speeds = cfg.sweep_speed_mps or (cfg.speed_mps,)
    reps = range(max(1, cfg.sweep_seeds))

    specs: list[ScenarioSpec] = []
    index = 0
    for edge in edges:
        ap_map = fixed_map if fixed_map is not None else _map_for_edge(cfg, edge, cache)
        for heading in headings:
            for speed in speeds:
                for rep in reps:
                    traj = _trajectory_of(cfg, heading, speed, ap_map, index)
                    label = cfg.label or f"edge{edge:g}_h{heading:g}_v{speed:g}_r{rep}"
                    specs.append(
                        ScenarioSpec(
                            trajectory=traj,
                            ap_map=ap_map,
                            predictor=predictor,
                            latency=latency,
                            noise=noise,
                            seed=(cfg.seed, index),
                            label=label,
                        )
                    )
                    index += 1
    return specs


def with_overrides(cfg: ScenarioConfig, seed: int | None = None, out_dir: str | None = None) -> ScenarioConfig:
    """CLI-flag overrides applied on top of a parsed config."""
    changes: dict[str, object] = {}
    if seed is not None:
        changes["seed"] = seed
    if out_dir is not None:
        changes["out_dir"] = out_dir
    if not changes:
        return cfg
    out = replace(cfg, **changes)
    _validate(out)
    return out
