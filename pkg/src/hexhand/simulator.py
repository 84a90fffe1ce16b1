"""Discrete-time scenario runner and handoff latency accounting.

A scenario walks a trajectory at the predictor's sample period, measures it
through the GPS noise model, feeds the predictor, and emits a handoff event
when the trigger condition holds and the predicted rectangle has left the
serving cell. Events are graded against the ground-truth next cell taken
from the noiseless trajectory.
"""

from __future__ import annotations

import math
import os
import statistics
import tempfile
from dataclasses import dataclass
from multiprocessing import get_context
from typing import NamedTuple, Sequence

import numpy as np

from .geo import GpsNoiseModel, PlanarCoord, gps_error_track
from .mobility import Trajectory
from .predictor import (
    PredictedRange,
    PredictorConfig,
    PredictorState,
    candidate_aps,
    predicted_range,
)
from .topology import _AXES, ApMap


class ScenarioError(Exception):
    """A scenario violated a precondition (reported, not silently dropped)."""


@dataclass(frozen=True)
class LatencyModel:
    """Handoff latency accounting, all times in milliseconds.

    Attributes:
        n_channels: Channels a full scan must visit.
        t_min_ms: Minimum dwell on a channel with no traffic.
        t_max_ms: Maximum dwell on a busy channel.
        per_channel_ms: Effective scan cost per channel actually scanned.
        auth_ms: Authentication exchange cost.
        reassoc_ms: Reassociation exchange cost.
    """

    n_channels: int = 11
    t_min_ms: float = 5.0
    t_max_ms: float = 30.0
    per_channel_ms: float = 30.0
    auth_ms: float = 2.0
    reassoc_ms: float = 2.0

    def __post_init__(self) -> None:
        if self.n_channels < 1:
            raise ValueError("n_channels must be >= 1")
        if min(self.t_min_ms, self.t_max_ms, self.per_channel_ms, self.auth_ms, self.reassoc_ms) <= 0.0:
            raise ValueError("latency components must be > 0")
        if not self.t_min_ms <= self.per_channel_ms <= self.t_max_ms:
            raise ValueError("expected t_min_ms <= per_channel_ms <= t_max_ms")


def scan_latency_bounds(model: LatencyModel, n_scanned: int) -> tuple[float, float]:
    """(best, worst) scan phase duration for scanning ``n_scanned`` channels."""
    if not 1 <= n_scanned <= model.n_channels:
        raise ValueError(f"n_scanned {n_scanned} outside 1..{model.n_channels}")
    return n_scanned * model.t_min_ms, n_scanned * model.t_max_ms

def handoff_latency(model: LatencyModel, n_scanned: int) -> float:
    """Total handoff latency: scan phase plus authentication and reassociation."""
    if n_scanned < 1:
        raise ValueError("n_scanned must be >= 1")
    return n_scanned * model.per_channel_ms + model.auth_ms + model.reassoc_ms


@dataclass(frozen=True)
class HandoffEvent:
    """One predicted handoff and how it was graded."""

    t_ms: float
    position: PlanarCoord  # measured position at emission
    predicted: PredictedRange
    candidates: tuple[str, ...]  # bssids, nearest first
    actual_next: str | None  # ground-truth next cell, None if never resolved
    correct: bool
    fallback: bool  # no candidates, full scan performed
    n_scanned: int
    latency_selective_ms: float
    latency_full_ms: float


class TraceRow(NamedTuple):
    """One sample of the per-run trace (None renders as an empty CSV field)."""

    t_ms: float
    true_x: float
    true_y: float
    meas_x: float
    meas_y: float
    s_avg: float
    d: float
    lambda_x: float
    lambda_y: float
    pe_x: float
    ne_x: float
    pe_y: float
    ne_y: float
    err_x: float | None
    err_y: float | None


@dataclass(frozen=True)
class Metrics:
    """Aggregate grading over a set of handoff events."""

    n_handoffs: int
    accuracy: float
    two_ap_fraction: float
    multi_ap_fraction: float  # three or more candidates
    fallback_fraction: float
    mean_latency_selective_ms: float
    median_latency_selective_ms: float
    mean_latency_full_ms: float
    median_latency_full_ms: float
    reduction_ratio: float
    n_scenarios: int = 1
    n_failed: int = 0


def compute_metrics(events: Sequence[HandoffEvent], n_scenarios: int = 1, n_failed: int = 0) -> Metrics:
    n = len(events)
    if n == 0:
        nan = float("nan")
        return Metrics(0, nan, nan, nan, nan, nan, nan, nan, nan, nan, n_scenarios, n_failed)
    sel = [e.latency_selective_ms for e in events]
    full = [e.latency_full_ms for e in events]
    mean_sel = sum(sel) / n
    mean_full = sum(full) / n
    return Metrics(
        n_handoffs=n,
        accuracy=sum(e.correct for e in events) / n,
        two_ap_fraction=sum(len(e.candidates) == 2 for e in events) / n,
        multi_ap_fraction=sum(len(e.candidates) >= 3 for e in events) / n,
        fallback_fraction=sum(e.fallback for e in events) / n,
        mean_latency_selective_ms=mean_sel,
        median_latency_selective_ms=statistics.median(sel),
        mean_latency_full_ms=mean_full,
        median_latency_full_ms=statistics.median(full),
        reduction_ratio=mean_full / mean_sel,
        n_scenarios=n_scenarios,
        n_failed=n_failed,
    )


@dataclass(frozen=True)
class ScenarioResult:
    events: tuple[HandoffEvent, ...]
    metrics: Metrics
    trace: tuple[TraceRow, ...]


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything needed to run one scenario; picklable for worker pools."""

    trajectory: Trajectory
    ap_map: ApMap
    predictor: PredictorConfig = PredictorConfig()
    latency: LatencyModel = LatencyModel()
    noise: GpsNoiseModel = GpsNoiseModel()
    seed: int | tuple[int, ...] = 0
    label: str = ""


@dataclass(frozen=True)
class SweepResult:
    metrics: Metrics
    events: tuple[HandoffEvent, ...]  # all events, scenario order
    failures: tuple[tuple[int, str], ...]  # (scenario index, reason)


def _ground_truth_next(
    ap_map: ApMap, true_xy: list[list[float]], start_k: int, serving_bssid: str
) -> tuple[str | None, int]:
    """First cell other than the serving one on the noiseless path from step start_k.

    Returns (bssid or None, step index of the crossing; len(true_xy) if none).
    """
    for k in range(start_k, len(true_xy)):
        ap = ap_map.cell_of(PlanarCoord(*true_xy[k]))
        if ap is not None and ap.bssid != serving_bssid:
            return ap.bssid, k
    return None, len(true_xy)


def run_scenario(spec: ScenarioSpec, collect_trace: bool = True) -> ScenarioResult:
    """Run one scenario end to end.

    Raises ScenarioError if the trajectory does not start inside a cell or
    touches the serving cell boundary before the first initialization
    completes.
    """
    cfg = spec.predictor
    period = cfg.sample_period_ms
    traj = spec.trajectory
    n_steps = int(math.floor(traj.duration_ms / period + 1e-9)) + 1
    ts = [k * period for k in range(n_steps)]
    true_arr = traj.positions(np.asarray(ts))
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    meas_arr = true_arr + gps_error_track(spec.noise, n_steps, rng)
    true_xy: list[list[float]] = true_arr.tolist()
    meas_xy: list[list[float]] = meas_arr.tolist()

    serving = spec.ap_map.cell_of(PlanarCoord(*true_xy[0]))
    if serving is None:
        raise ScenarioError("trajectory starts outside the mapped area")
    serving_cell = spec.ap_map.cell(serving)
    # The per-step containment test is the throughput bottleneck, so the
    # three-axis hexagon projection is inlined here instead of going through
    # HexCell methods. Tolerance matches HexCell.contains.
    (ax0x, ax0y), (ax1x, ax1y), (ax2x, ax2y) = _AXES[spec.ap_map.orientation]
    scx, scy = serving_cell.center
    apothem = serving_cell.apothem
    apothem_tol = apothem * (1.0 + 1e-12)

    sliding = cfg.speed_window == "sliding"
    init_ms = cfg.init_duration_ms
    t_delay = cfg.t_delay_ms
    init_steps = cfg.init_steps
    hypot = math.hypot

    # Predictor state lives in plain scalars here. The fold below mirrors
    # predictor.ingest_sample operation for operation; rebuilding an
    # eleven-field state tuple per 5 ms sample dominated the sweep profile.
    # test_simulator pins the two implementations to identical floats.
    i = 0
    last_x, last_y = meas_xy[0]
    cum_dist = cum_dx = cum_dy = 0.0
    pe_x = ne_x = pe_y = ne_y = 0.0
    recent: list[float] = []

    first_init = True
    # Emitted event waiting for the true crossing; predictor halts meanwhile.
    gap_until: int | None = None
    frozen: tuple[float, float, float, float, float, float, float, float] | None = None
    events: list[HandoffEvent] = []
    trace: list[TraceRow] = []
    if collect_trace:
        t0x, t0y = true_xy[0]
        trace.append(TraceRow(0.0, t0x, t0y, last_x, last_y, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, None, None))

    k = 1
    while k < n_steps:
        t = ts[k]
        tx, ty = true_xy[k]
        mx, my = meas_xy[k]

        if gap_until is not None:
            # Handoff in progress: coast until the true path enters the next cell.
            if k >= gap_until:
                ap = spec.ap_map.cell_of(PlanarCoord(tx, ty))
                if ap is None:
                    break  # left the mapped area
                serving = ap
                serving_cell = spec.ap_map.cell(serving)
                scx, scy = serving_cell.center
                i = 0
                last_x, last_y = mx, my
                cum_dist = cum_dx = cum_dy = 0.0
                pe_x = ne_x = pe_y = ne_y = 0.0
                recent = []
                first_init = False
                gap_until = None
                frozen = None
                if collect_trace:
                    trace.append(TraceRow(t, tx, ty, mx, my, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, None, None))
            else:
                if collect_trace:
                    fs, fd, flx, fly, fpx, fnx, fpy, fny = frozen  # type: ignore[misc]
                    trace.append(TraceRow(t, tx, ty, mx, my, fs, fd, flx, fly, fpx, fnx, fpy, fny, None, None))
            k += 1
            continue

        dx = mx - last_x
        dy = my - last_y
        step = hypot(dx, dy)
        prev_i = i
        i += 1
        elapsed = i * period
        e_x = e_y = None
        if elapsed > init_ms and prev_i > 0:
            e_x = mx - (last_x + cum_dx / prev_i)
            e_y = my - (last_y + cum_dy / prev_i)
            if e_x > pe_x:
                pe_x = e_x
            if e_x < ne_x:
                ne_x = e_x
            if e_y > pe_y:
                pe_y = e_y
            if e_y < ne_y:
                ne_y = e_y
        cum_dist = cum_dist + step
        cum_dx = cum_dx + dx
        cum_dy = cum_dy + dy
        last_x = mx
        last_y = my
        if sliding:
            recent.append(step)
            del recent[:-init_steps]
            s_avg = sum(recent) / (len(recent) * period)
        else:
            s_avg = cum_dist / elapsed
        d = t_delay * s_avg

        if collect_trace:
            denom = period * i
            trace.append(
                TraceRow(t, tx, ty, mx, my, s_avg, d, cum_dx / denom, cum_dy / denom,
                         pe_x, ne_x, pe_y, ne_y, e_x, e_y)
            )

        if elapsed < init_ms:
            ddx = tx - scx
            ddy = ty - scy
            proj = max(abs(ax0x * ddx + ax0y * ddy), abs(ax1x * ddx + ax1y * ddy), abs(ax2x * ddx + ax2y * ddy))
            if proj > apothem_tol:
                if first_init:
                    raise ScenarioError(
                        f"boundary contact at t={t} ms before initialization completed"
                    )
                break  # re-initialization interrupted by the next boundary; stop cleanly
            k += 1
            continue

        ddx = mx - scx
        ddy = my - scy
        proj = max(abs(ax0x * ddx + ax0y * ddy), abs(ax1x * ddx + ax1y * ddy), abs(ax2x * ddx + ax2y * ddy))
        if apothem - proj <= d:
            p_meas = PlanarCoord(mx, my)
            state = PredictorState(i, p_meas, cum_dist, cum_dx, cum_dy,
                                   pe_x, ne_x, pe_y, ne_y, elapsed,
                                   tuple(recent) if sliding else None)
            rng_box = predicted_range(state, cfg)
            # Hold the handoff while the prediction still lands in the serving
            # cell: starting it would scan for a cell change that is not due
            # within the handoff duration.
            if not serving_cell.contains(rng_box.center):
                cands = candidate_aps(rng_box, spec.ap_map, serving)
                actual, cross_k = _ground_truth_next(spec.ap_map, true_xy, k, serving.bssid)
                fallback = not cands
                n_scanned = spec.latency.n_channels if fallback else len(cands)
                correct = True if fallback else (actual is not None and actual in {a.bssid for a in cands})
                events.append(
                    HandoffEvent(
                        t_ms=t,
                        position=p_meas,
                        predicted=rng_box,
                        candidates=tuple(a.bssid for a in cands),
                        actual_next=actual,
                        correct=correct,
                        fallback=fallback,
                        n_scanned=n_scanned,
                        latency_selective_ms=handoff_latency(spec.latency, n_scanned),
                        latency_full_ms=handoff_latency(spec.latency, spec.latency.n_channels),
                    )
                )
                gap_until = max(cross_k, k + 1)
                denom = period * i
                frozen = (s_avg, d, cum_dx / denom, cum_dy / denom, pe_x, ne_x, pe_y, ne_y)
        k += 1

    metrics = compute_metrics(events)
    return ScenarioResult(tuple(events), metrics, tuple(trace))


def _run_spec_worker(args: tuple[int, ScenarioSpec]) -> tuple[int, tuple[HandoffEvent, ...] | str]:
    idx, spec = args
    try:
        return idx, run_scenario(spec, collect_trace=False).events
    except ScenarioError as exc:
        return idx, str(exc)


def run_sweep(specs: Sequence[ScenarioSpec], jobs: int = 1) -> SweepResult:
    """Run many scenarios and aggregate their events.

    Results are assembled in scenario order whatever the worker scheduling,
    so the aggregate is independent of ``jobs``. Scenario failures are
    collected per index, not raised.
    """
    results: list[tuple[HandoffEvent, ...] | str] = [()] * len(specs)
    if jobs > 1 and len(specs) > 1:
        ctx = get_context("spawn")
        chunk = max(1, len(specs) // (jobs * 4))
        with ctx.Pool(jobs) as pool:
            for idx, out in pool.imap_unordered(_run_spec_worker, list(enumerate(specs)), chunk):
                results[idx] = out
    else:
        for idx, spec in enumerate(specs):
            results[idx] = _run_spec_worker((idx, spec))[1]
    events: list[HandoffEvent] = []
    failures: list[tuple[int, str]] = []
    for idx, out in enumerate(results):
        if isinstance(out, str):
            failures.append((idx, out))
        else:
            events.extend(out)
    metrics = compute_metrics(events, n_scenarios=len(specs), n_failed=len(failures))
    return SweepResult(metrics, tuple(events), tuple(failures))


# --- output formats -------------------------------------------------------

TRACE_HEADER = "t_ms,true_x,true_y,meas_x,meas_y,s_avg,d,lambda_x,lambda_y,pe_x,ne_x,pe_y,ne_y,err_x,err_y"
EVENTS_HEADER = "t_ms,x,y,cand_count,candidates,actual,correct,lat_sel_ms,lat_full_ms"


def _fmt(v: float | None) -> str:
    # repr round-trips floats exactly, which keeps re-parsed arithmetic
    # identities (like d == t_delay * s_avg) intact.
    return "" if v is None else repr(v)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".outtmp-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trace_csv(trace: Sequence[TraceRow], path: str) -> None:
    lines = [TRACE_HEADER]
    for r in trace:
        lines.append(",".join(_fmt(v) for v in r))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_events_csv(events: Sequence[HandoffEvent], path: str) -> None:
    lines = [EVENTS_HEADER]
    for e in events:
        lines.append(
            ",".join(
                (
                    _fmt(e.t_ms),
                    _fmt(e.position.x),
                    _fmt(e.position.y),
                    str(len(e.candidates)),
                    ";".join(e.candidates),
                    e.actual_next or "",
                    "true" if e.correct else "false",
                    _fmt(e.latency_selective_ms),
                    _fmt(e.latency_full_ms),
                )
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def format_summary(metrics: Metrics) -> str:
    pairs = (
        ("n_scenarios", metrics.n_scenarios),
        ("n_failed", metrics.n_failed),
        ("n_handoffs", metrics.n_handoffs),
        ("accuracy", metrics.accuracy),
        ("two_ap_fraction", metrics.two_ap_fraction),
        ("multi_ap_fraction", metrics.multi_ap_fraction),
        ("fallback_fraction", metrics.fallback_fraction),
        ("mean_latency_selective_ms", metrics.mean_latency_selective_ms),
        ("median_latency_selective_ms", metrics.median_latency_selective_ms),
        ("mean_latency_full_ms", metrics.mean_latency_full_ms),
        ("median_latency_full_ms", metrics.median_latency_full_ms),
        ("reduction_ratio", metrics.reduction_ratio),
    )
    return "\n".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in pairs) + "\n"


def write_summary(metrics: Metrics, path: str) -> None:
    _atomic_write(path, format_summary(metrics))
