"""Deterministic trajectory models.

Each trajectory maps a time in milliseconds to a planar position; speeds are
given in meters per second because that is how people write them down.
Evaluation is pure: random-waypoint paths are generated up front from their
seed, so position_at(t) always returns the same value for the same t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geo import PlanarCoord


def _check_time(t_ms: float, duration_ms: float) -> None:
    if t_ms < 0.0 or t_ms > duration_ms:
        raise ValueError(f"t={t_ms} outside [0, {duration_ms}]")


@dataclass(frozen=True)
class StraightTrajectory:
    """Constant speed along a fixed heading (radians, 0 = east)."""

    start: PlanarCoord
    heading_rad: float
    speed_mps: float
    duration_ms: float

    def __post_init__(self) -> None:
        if self.speed_mps < 0.0:
            raise ValueError("speed must be >= 0")
        if self.duration_ms <= 0.0:
            raise ValueError("duration must be > 0")

    def position_at(self, t_ms: float) -> PlanarCoord:
        _check_time(t_ms, self.duration_ms)
        s = self.speed_mps * t_ms / 1000.0
        return PlanarCoord(
            self.start.x + s * math.cos(self.heading_rad),
            self.start.y + s * math.sin(self.heading_rad),
        )

    def heading_at(self, t_ms: float) -> float:
        _check_time(t_ms, self.duration_ms)
        return self.heading_rad

    def positions(self, ts_ms: np.ndarray) -> np.ndarray:
        s = self.speed_mps * np.asarray(ts_ms, dtype=float) / 1000.0
        return np.stack(
            (self.start.x + s * math.cos(self.heading_rad),
             self.start.y + s * math.sin(self.heading_rad)),
            axis=1,
        )


@dataclass(frozen=True)
class PiecewiseTrajectory:
    """Straight legs through waypoints, each leg at its target's speed.

    ``waypoints`` is a sequence of (position, speed_mps); the first entry is
    the start and its speed is ignored. A single waypoint means standing
    still. After the last waypoint the position holds.
    """

    waypoints: tuple[tuple[PlanarCoord, float], ...]
    duration_ms: float
    _legs: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise ValueError("at least one waypoint is required")
        if self.duration_ms <= 0.0:
            raise ValueError("duration must be > 0")
        legs = []
        t = 0.0
        for (p0, _), (p1, v) in zip(self.waypoints, self.waypoints[1:]):
            if v <= 0.0:
                raise ValueError("leg speeds must be > 0")
            length = math.dist(p0, p1)
            dt = length / v * 1000.0
            legs.append((t, t + dt, p0, p1, v))
            t += dt
        object.__setattr__(self, "_legs", tuple(legs))

    def position_at(self, t_ms: float) -> PlanarCoord:
        _check_time(t_ms, self.duration_ms)
        for t0, t1, p0, p1, _ in self._legs:
            if t_ms < t1:
                f = (t_ms - t0) / (t1 - t0)
                return PlanarCoord(p0.x + f * (p1.x - p0.x), p0.y + f * (p1.y - p0.y))
        return self.waypoints[-1][0]

    def heading_at(self, t_ms: float) -> float:
        """Heading of the active leg; at rest, the heading of the last leg (0 if none)."""
        _check_time(t_ms, self.duration_ms)
        for t0, t1, p0, p1, _ in self._legs:
            if t_ms < t1:
                return math.atan2(p1.y - p0.y, p1.x - p0.x)
        if self._legs:
            _, _, p0, p1, _ = self._legs[-1]
            return math.atan2(p1.y - p0.y, p1.x - p0.x)
        return 0.0

    def positions(self, ts_ms: np.ndarray) -> np.ndarray:
        return np.array([self.position_at(float(t)) for t in np.asarray(ts_ms)], dtype=float)


@dataclass(frozen=True)
class ArcTrajectory:
    """Constant speed along a circular arc.

    ``turn_radius_m`` is signed: positive curves left, negative curves right.
    """

    start: PlanarCoord
    heading_rad: float
    speed_mps: float
    turn_radius_m: float
    duration_ms: float

    def __post_init__(self) -> None:
        if self.speed_mps < 0.0:
            raise ValueError("speed must be >= 0")
        if self.turn_radius_m == 0.0:
            raise ValueError("turn radius must be nonzero")
        if self.duration_ms <= 0.0:
            raise ValueError("duration must be > 0")

    def _sweep(self, t_ms: float) -> float:
        # Signed angular progress around the circle center.
        return self.speed_mps * (t_ms / 1000.0) / self.turn_radius_m

    def position_at(self, t_ms: float) -> PlanarCoord:
        _check_time(t_ms, self.duration_ms)
        r = self.turn_radius_m
        cx = self.start.x - r * math.sin(self.heading_rad)
        cy = self.start.y + r * math.cos(self.heading_rad)
        a = self.heading_rad + self._sweep(t_ms)
        return PlanarCoord(cx + r * math.sin(a), cy - r * math.cos(a))

    def heading_at(self, t_ms: float) -> float:
        _check_time(t_ms, self.duration_ms)
        return self.heading_rad + self._sweep(t_ms)

    def positions(self, ts_ms: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts_ms, dtype=float)
        r = self.turn_radius_m
        cx = self.start.x - r * math.sin(self.heading_rad)
        cy = self.start.y + r * math.cos(self.heading_rad)
        a = self.heading_rad + self.speed_mps * (ts / 1000.0) / r
        return np.stack((cx + r * np.sin(a), cy - r * np.cos(a)), axis=1)


@dataclass(frozen=True)
class RandomWaypointTrajectory:
    """Classic random waypoint motion inside a rectangle.

    Waypoints, speeds, and pauses are drawn once from ``seed`` when the
    trajectory is built; evaluation afterwards is deterministic.
    """

    bounds: tuple[float, float, float, float]  # xmin, xmax, ymin, ymax
    speed_range_mps: tuple[float, float]
    seed: int
    duration_ms: float
    pause_ms: float = 0.0
    start: PlanarCoord | None = None
    _legs: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        xmin, xmax, ymin, ymax = self.bounds
        vlo, vhi = self.speed_range_mps
        if xmin >= xmax or ymin >= ymax:
            raise ValueError("bounds must satisfy xmin < xmax and ymin < ymax")
        if vlo <= 0.0 or vhi < vlo:
            raise ValueError("speed range must satisfy 0 < vmin <= vmax")
        if self.duration_ms <= 0.0:
            raise ValueError("duration must be > 0")
        if self.pause_ms < 0.0:
            raise ValueError("pause must be >= 0")
        rng = np.random.default_rng(self.seed)
        pos = self.start or PlanarCoord((xmin + xmax) / 2.0, (ymin + ymax) / 2.0)
        legs = []
        t = 0.0
        while t < self.duration_ms:
            target = PlanarCoord(float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax)))
            v = float(rng.uniform(vlo, vhi))
            dt = math.dist(pos, target) / v * 1000.0
            legs.append((t, t + dt, pos, target))
            t += dt
            if self.pause_ms > 0.0:
                legs.append((t, t + self.pause_ms, target, target))
                t += self.pause_ms
            pos = target
        object.__setattr__(self, "_legs", tuple(legs))

    def position_at(self, t_ms: float) -> PlanarCoord:
        _check_time(t_ms, self.duration_ms)
        for t0, t1, p0, p1 in self._legs:
            if t_ms < t1:
                if p0 == p1:
                    return p0
                f = (t_ms - t0) / (t1 - t0)
                return PlanarCoord(p0.x + f * (p1.x - p0.x), p0.y + f * (p1.y - p0.y))
        return self._legs[-1][3]

    def heading_at(self, t_ms: float) -> float:
        """Heading of the active leg; while paused, the previous leg's heading."""
        _check_time(t_ms, self.duration_ms)
        last = 0.0
        for t0, t1, p0, p1 in self._legs:
            if p0 != p1:
                heading = math.atan2(p1.y - p0.y, p1.x - p0.x)
            else:
                heading = last
            if t_ms < t1:
                return heading
            last = heading
        return last

    def positions(self, ts_ms: np.ndarray) -> np.ndarray:
        return np.array([self.position_at(float(t)) for t in np.asarray(ts_ms)], dtype=float)


Trajectory = StraightTrajectory | PiecewiseTrajectory | ArcTrajectory | RandomWaypointTrajectory
