"""Dead-reckoning next-cell predictor with running one-step error bounds.

The predictor ingests periodic position fixes. From them it maintains the
average speed along the path, per-axis coordinate rates, and the extreme
positive/negative one-step prediction errors seen so far. Those pieces give
a handoff trigger distance and a bounded rectangle for where the terminal
will be one handoff duration ahead.

State is a value: every operation returns a new state and never mutates its
input, so states can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .geo import PlanarCoord
from .topology import AccessPoint, ApMap, HexCell


@dataclass(frozen=True)
class PredictorConfig:
    """Timing and behavior knobs.

    Attributes:
        init_duration_ms: Warm-up before triggering is allowed; must be a
            positive multiple of the sample period.
        sample_period_ms: Milliseconds between ingested fixes.
        t_delay_ms: Time the handoff itself takes, the prediction horizon.
        speed_window: "growing" averages over the whole track; "sliding"
            averages over the most recent init_duration worth of samples.
        scale_error_bounds: Stretch the error bounds by t_delay / period when
            projecting to the horizon instead of applying them as-is.
    """

    init_duration_ms: float = 60.0
    sample_period_ms: float = 5.0
    t_delay_ms: float = 50.0
    speed_window: str = "growing"
    scale_error_bounds: bool = False

    def __post_init__(self) -> None:
        if self.sample_period_ms <= 0.0:
            raise ValueError("sample_period_ms must be > 0")
        if self.t_delay_ms <= 0.0:
            raise ValueError("t_delay_ms must be > 0")
        steps = self.init_duration_ms / self.sample_period_ms
        if self.init_duration_ms <= 0.0 or abs(steps - round(steps)) > 1e-9:
            raise ValueError("init_duration_ms must be a positive multiple of sample_period_ms")
        if self.speed_window not in ("growing", "sliding"):
            raise ValueError("speed_window must be 'growing' or 'sliding'")

    @property
    def init_steps(self) -> int:
        return round(self.init_duration_ms / self.sample_period_ms)


class PredictorState(NamedTuple):
    """Accumulated motion statistics after ``i`` ingested intervals.

    pe_* / ne_* are the largest positive and most negative one-step
    prediction errors recorded after initialization (both start at 0).
    ``recent`` holds the last step lengths when a sliding speed window is in
    use, else None.
    """

    i: int
    last_pos: PlanarCoord
    cum_distance: float
    cum_dx: float
    cum_dy: float
    pe_x: float
    ne_x: float
    pe_y: float
    ne_y: float
    elapsed_ms: float
    recent: tuple[float, ...] | None = None

    @classmethod
    def start(cls, pos: PlanarCoord, sliding: bool = False) -> "PredictorState":
        """Fresh state anchored at the first fix."""
        return cls(0, pos, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, () if sliding else None)


class PredictedRange(NamedTuple):
    """Axis-aligned rectangle bounding the position at the horizon."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    @property
    def center(self) -> PlanarCoord:
        return PlanarCoord((self.x_lo + self.x_hi) / 2.0, (self.y_lo + self.y_hi) / 2.0)

    @property
    def width_x(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def width_y(self) -> float:
        return self.y_hi - self.y_lo


def ingest_sample(state: PredictorState, pos: PlanarCoord, cfg: PredictorConfig) -> PredictorState:
    """Fold one fix into the state.

    Adds the step to the cumulative path length and per-axis displacements.
    Once past initialization, the fix is also compared against the one-step
    extrapolation from the previous state and the error extremes are updated
    (the same fold as update_error_bounds).
    """
    period = cfg.sample_period_ms
    dx = pos.x - state.last_pos.x
    dy = pos.y - state.last_pos.y
    step = math.hypot(dx, dy)
    i = state.i + 1
    elapsed = i * period
    pe_x, ne_x, pe_y, ne_y = state.pe_x, state.ne_x, state.pe_y, state.ne_y
    if elapsed > cfg.init_duration_ms and state.i > 0:
        # Extrapolation from the pre-update state: rate * period telescopes
        # to cum/i, no need to form the rate explicitly.
        err_x = pos.x - (state.last_pos.x + state.cum_dx / state.i)
        err_y = pos.y - (state.last_pos.y + state.cum_dy / state.i)
        if err_x > pe_x:
            pe_x = err_x
        if err_x < ne_x:
            ne_x = err_x
        if err_y > pe_y:
            pe_y = err_y
        if err_y < ne_y:
            ne_y = err_y
    recent = state.recent
    if recent is not None:
        recent = (recent + (step,))[-cfg.init_steps:]
    return PredictorState(
        i,
        pos,
        state.cum_distance + step,
        state.cum_dx + dx,
        state.cum_dy + dy,
        pe_x,
        ne_x,
        pe_y,
        ne_y,
        elapsed,
        recent,
    )


def update_error_bounds(
    state: PredictorState, predicted_next: PlanarCoord, actual_next: PlanarCoord
) -> PredictorState:
    """Fold one observed prediction error into the running extremes."""
    err_x = actual_next.x - predicted_next.x
    err_y = actual_next.y - predicted_next.y
    return state._replace(
        pe_x=max(state.pe_x, err_x),
        ne_x=min(state.ne_x, err_x),
        pe_y=max(state.pe_y, err_y),
        ne_y=min(state.ne_y, err_y),
    )


def average_speed(state: PredictorState, cfg: PredictorConfig) -> float:
    """Mean speed along the measured path, meters per millisecond."""
    if state.i < 1:
        raise ValueError("average speed needs at least one interval")
    if state.recent is not None and cfg.speed_window == "sliding":
        return sum(state.recent) / (len(state.recent) * cfg.sample_period_ms)
    return state.cum_distance / state.elapsed_ms


def trigger_distance(state: PredictorState, cfg: PredictorConfig) -> float:
    """Boundary distance below which the handoff must start to finish in time."""
    return cfg.t_delay_ms * average_speed(state, cfg)


def coordinate_rates(state: PredictorState, cfg: PredictorConfig) -> tuple[float, float]:
    """Per-axis signed rates in meters per millisecond."""
    if state.i < 1:
        raise ValueError("coordinate rates need at least one interval")
    denom = cfg.sample_period_ms * state.i
    return state.cum_dx / denom, state.cum_dy / denom


def predicted_range(state: PredictorState, cfg: PredictorConfig) -> PredictedRange:
    """Bounded rectangle for the position t_delay ahead of the last fix.

    The rectangle is the straight extrapolation shifted by the recorded
    error extremes, so it always contains the extrapolated point itself.
    """
    rate_x, rate_y = coordinate_rates(state, cfg)
    cx = state.last_pos.x + rate_x * cfg.t_delay_ms
    cy = state.last_pos.y + rate_y * cfg.t_delay_ms
    scale = cfg.t_delay_ms / cfg.sample_period_ms if cfg.scale_error_bounds else 1.0
    return PredictedRange(
        cx + state.ne_x * scale,
        cx + state.pe_x * scale,
        cy + state.ne_y * scale,
        cy + state.pe_y * scale,
    )


def candidate_aps(
    rng: PredictedRange, ap_map: ApMap, current: AccessPoint | None = None
) -> list[AccessPoint]:
    """APs whose cells intersect the predicted rectangle.

    Membership is probed at the four corners and the center. The serving AP
    is excluded; the rest come back sorted by center distance from the
    rectangle center (bssid breaks ties). An empty result means no cell
    covers any probe point, and the caller falls back to a full scan.
    """
    probes = (
        PlanarCoord(rng.x_lo, rng.y_lo),
        PlanarCoord(rng.x_lo, rng.y_hi),
        PlanarCoord(rng.x_hi, rng.y_lo),
        PlanarCoord(rng.x_hi, rng.y_hi),
        rng.center,
    )
    found: dict[str, AccessPoint] = {}
    for p in probes:
        ap = ap_map.cell_of(p)
        if ap is not None and (current is None or ap.bssid != current.bssid):
            found.setdefault(ap.bssid, ap)
    cx, cy = rng.center
    return sorted(found.values(), key=lambda ap: (math.hypot(ap.center.x - cx, ap.center.y - cy), ap.bssid))


def should_trigger(state: PredictorState, cell: HexCell, cfg: PredictorConfig) -> bool:
    """True when the last fix is within the trigger distance of the cell boundary.

    A fix that has already drifted outside the cell counts as triggered.
    """
    if not cell.contains(state.last_pos):
        return True
    return cell.distance_to_boundary(state.last_pos) <= trigger_distance(state, cfg)
