"""Scenario engine tests.

The load-bearing one is the replay check: run_scenario folds predictor
updates through plain scalars for speed, and this suite replays the recorded
measurement track through the public predictor functions demanding float
identity, not closeness. If the two paths ever drift apart, determinism
between the trace files and the library API is gone.
"""

import math

import pytest

from hexhand import (
    GpsNoiseModel,
    HandoffEvent,
    LatencyModel,
    Metrics,
    PlanarCoord,
    PredictedRange,
    PredictorConfig,
    PredictorState,
    ScenarioError,
    ScenarioSpec,
    StraightTrajectory,
    compute_metrics,
    format_summary,
    handoff_latency,
    hex_ring_map,
    run_scenario,
    run_sweep,
    scan_latency_bounds,
    write_events_csv,
    write_summary,
    write_trace_csv,
)
from hexhand.predictor import (
    average_speed,
    coordinate_rates,
    ingest_sample,
    predicted_range,
    trigger_distance,
)
from hexhand.simulator import EVENTS_HEADER, TRACE_HEADER, _ground_truth_next

MAP = hex_ring_map(2, 231.0)
SPACING = 231.0 * math.sqrt(3.0)


def _east_spec(duration_ms, sigma=0.0, seed=0, window="growing"):
    return ScenarioSpec(
        trajectory=StraightTrajectory(PlanarCoord(0.0, 0.0), 0.0, 19.0222, duration_ms),
        ap_map=MAP,
        predictor=PredictorConfig(speed_window=window),
        noise=GpsNoiseModel(sigma=sigma),
        seed=seed,
    )


# --- latency model ---------------------------------------------------------


def test_handoff_latency_frozen_values():
    m = LatencyModel()
    assert handoff_latency(m, 1) == 34.0
    assert handoff_latency(m, 2) == 64.0
    assert handoff_latency(m, 11) == 334.0


def test_scan_latency_bounds():
    m = LatencyModel()
    assert scan_latency_bounds(m, 11) == (55.0, 330.0)
    assert scan_latency_bounds(m, 1) == (5.0, 30.0)
    with pytest.raises(ValueError):
        scan_latency_bounds(m, 0)
    with pytest.raises(ValueError):
        scan_latency_bounds(m, 12)


def test_latency_model_validation():
    with pytest.raises(ValueError, match="expected t_min_ms <= per_channel_ms <= t_max_ms"):
        LatencyModel(t_min_ms=40.0)
    with pytest.raises(ValueError):
        LatencyModel(n_channels=0)
    with pytest.raises(ValueError):
        LatencyModel(auth_ms=0.0)


# --- metrics ----------------------------------------------------------------


def _event(cands, correct=True, fallback=False, sel=34.0):
    return HandoffEvent(
        t_ms=0.0,
        position=PlanarCoord(0.0, 0.0),
        predicted=PredictedRange(0.0, 1.0, 0.0, 1.0),
        candidates=cands,
        actual_next=cands[0] if cands else None,
        correct=correct,
        fallback=fallback,
        n_scanned=len(cands) if cands else 11,
        latency_selective_ms=sel,
        latency_full_ms=334.0,
    )


def test_compute_metrics_fractions_and_latencies():
    events = [
        _event(("a",)),
        _event(("a", "b"), sel=64.0),
        _event(("a", "b", "c"), correct=False, sel=94.0),
        _event((), fallback=True, sel=334.0),
    ]
    m = compute_metrics(events, n_scenarios=2, n_failed=1)
    assert m.n_handoffs == 4
    assert m.accuracy == 0.75
    assert m.two_ap_fraction == 0.25
    assert m.multi_ap_fraction == 0.25
    assert m.fallback_fraction == 0.25
    assert m.mean_latency_selective_ms == pytest.approx((34 + 64 + 94 + 334) / 4)
    assert m.median_latency_selective_ms == pytest.approx(79.0)
    assert m.mean_latency_full_ms == 334.0
    assert m.reduction_ratio == pytest.approx(334.0 / 131.5)
    assert (m.n_scenarios, m.n_failed) == (2, 1)


def test_compute_metrics_empty_is_all_nan():
    m = compute_metrics([], n_scenarios=3, n_failed=3)
    assert m.n_handoffs == 0
    assert math.isnan(m.accuracy)
    assert math.isnan(m.reduction_ratio)
    assert (m.n_scenarios, m.n_failed) == (3, 3)


# --- ground truth grading ---------------------------------------------------


def test_ground_truth_next_finds_first_foreign_cell():
    path = [[0.0, 0.0], [100.0, 0.0], [250.0, 0.0], [450.0, 0.0]]
    assert _ground_truth_next(MAP, path, 0, "AP00") == ("AP01", 2)
    assert _ground_truth_next(MAP, path, 3, "AP00") == ("AP01", 3)
    stays = [[0.0, 0.0], [10.0, 0.0]]
    assert _ground_truth_next(MAP, stays, 0, "AP00") == (None, 2)


# --- noiseless end-to-end ----------------------------------------------------


def test_noiseless_eastbound_crosses_two_boundaries_then_falls_back():
    # Straight east out of the central cell: AP01 next, then the ring-2 cell
    # due east, then off the map where only a full scan is left.
    res = run_scenario(_east_spec(54_000.0))
    assert [e.candidates for e in res.events] == [("AP01",), ("AP07",), ()]
    assert [e.actual_next for e in res.events] == ["AP01", "AP07", None]
    assert all(e.correct for e in res.events)
    assert [e.fallback for e in res.events] == [False, False, True]
    assert [e.n_scanned for e in res.events] == [1, 1, 11]
    assert [e.latency_selective_ms for e in res.events] == [34.0, 34.0, 334.0]
    assert all(e.latency_full_ms == 334.0 for e in res.events)
    assert res.metrics.accuracy == 1.0
    assert res.metrics.fallback_fraction == pytest.approx(1.0 / 3.0)

    # Emission happens right at the look-ahead distance from the boundary.
    apothem = 231.0 * math.sqrt(3.0) / 2.0
    first = res.events[0]
    assert first.position.x == pytest.approx(apothem - 0.95111, abs=0.11)
    assert first.position.y == 0.0
    # Noiseless straight motion leaves the error window numerically empty.
    assert first.predicted.width_x <= 1e-9
    assert first.predicted.width_y <= 1e-9


def test_noiseless_trace_row_semantics():
    res = run_scenario(_east_spec(12_000.0))
    trace = res.trace
    assert trace[0] == (0.0,) * 13 + (None, None)
    # Warm-up rows carry speed but no one-step error yet.
    assert trace[1].t_ms == 5.0
    assert trace[1].err_x is None
    assert trace[12].err_x is None  # elapsed == init duration, still none
    assert trace[13].err_x is not None  # first post-init row
    assert trace[5].s_avg == pytest.approx(0.0190222, rel=1e-9)

    assert len(res.events) == 1
    e = res.events[0]
    k_event = round(e.t_ms / 5.0)
    assert trace[k_event].t_ms == e.t_ms
    # The rows after emission coast with the values frozen at emission.
    frozen = trace[k_event + 1]
    assert frozen.s_avg == trace[k_event].s_avg
    assert frozen.d == trace[k_event].d
    assert frozen.err_x is None
    # At the true crossing the predictor restarts from scratch.
    anchors = [r for r in trace[k_event + 1 :] if r.s_avg == 0.0]
    assert anchors, "expected a re-anchor row after the crossing"
    k_anchor = trace.index(anchors[0])
    assert trace[k_anchor].true_x > SPACING / 2.0
    assert trace[k_anchor + 1].s_avg > 0.0
    assert trace[k_anchor + 1].err_x is None  # second warm-up underway


# --- scalar fold vs public predictor ----------------------------------------


def _replay_rows(trace, cfg, sliding):
    """Feed the recorded fixes through the public fold, demanding identity."""
    state = PredictorState.start(PlanarCoord(trace[0].meas_x, trace[0].meas_y), sliding=sliding)
    for row in trace[1:]:
        prev = state
        state = ingest_sample(state, PlanarCoord(row.meas_x, row.meas_y), cfg)
        assert average_speed(state, cfg) == row.s_avg
        assert trigger_distance(state, cfg) == row.d
        lx, ly = coordinate_rates(state, cfg)
        assert (lx, ly) == (row.lambda_x, row.lambda_y)
        assert (state.pe_x, state.ne_x, state.pe_y, state.ne_y) == (
            row.pe_x,
            row.ne_x,
            row.pe_y,
            row.ne_y,
        )
        if row.err_x is not None:
            expected_x = row.meas_x - (prev.last_pos.x + prev.cum_dx / prev.i)
            expected_y = row.meas_y - (prev.last_pos.y + prev.cum_dy / prev.i)
            assert (row.err_x, row.err_y) == (expected_x, expected_y)
    return state


@pytest.mark.parametrize("window", ["growing", "sliding"])
def test_trace_matches_public_predictor_exactly(window):
    # Short enough that no handoff interrupts the fold.
    spec = _east_spec(9_000.0, sigma=0.3, seed=101, window=window)
    res = run_scenario(spec)
    assert not res.events
    _replay_rows(res.trace, spec.predictor, sliding=(window == "sliding"))


def test_emitted_event_matches_public_predictor_exactly():
    spec = _east_spec(12_000.0, sigma=0.3, seed=202)
    res = run_scenario(spec)
    assert res.events
    e = res.events[0]
    k_event = round(e.t_ms / 5.0)
    state = _replay_rows(res.trace[: k_event + 1], spec.predictor, sliding=False)
    assert e.position == state.last_pos
    assert e.predicted == predicted_range(state, spec.predictor)


# --- failure modes and determinism -------------------------------------------


def test_start_outside_map_raises():
    spec = ScenarioSpec(
        trajectory=StraightTrajectory(PlanarCoord(5000.0, 0.0), 0.0, 10.0, 1000.0),
        ap_map=MAP,
    )
    with pytest.raises(ScenarioError, match="outside the mapped area"):
        run_scenario(spec)


def test_boundary_contact_during_first_warm_up_raises():
    apothem = 231.0 * math.sqrt(3.0) / 2.0
    spec = ScenarioSpec(
        trajectory=StraightTrajectory(PlanarCoord(apothem - 0.1, 0.0), 0.0, 30.0, 1000.0),
        ap_map=MAP,
    )
    with pytest.raises(ScenarioError, match="before initialization"):
        run_scenario(spec)


def test_run_scenario_is_deterministic_and_seed_sensitive():
    a = run_scenario(_east_spec(10_000.0, sigma=0.3, seed=(9, 4)))
    b = run_scenario(_east_spec(10_000.0, sigma=0.3, seed=(9, 4)))
    c = run_scenario(_east_spec(10_000.0, sigma=0.3, seed=(9, 5)))
    assert a.trace == b.trace
    assert a.events == b.events
    assert a.trace != c.trace


def test_collect_trace_off_keeps_events():
    spec = _east_spec(12_000.0, sigma=0.3, seed=202)
    full = run_scenario(spec)
    slim = run_scenario(spec, collect_trace=False)
    assert slim.trace == ()
    assert slim.events == full.events


def test_run_sweep_aggregates_in_spec_order_and_captures_failures():
    good1 = _east_spec(12_000.0, sigma=0.3, seed=1)
    bad = ScenarioSpec(
        trajectory=StraightTrajectory(PlanarCoord(5000.0, 0.0), 0.0, 10.0, 1000.0),
        ap_map=MAP,
        label="off-map",
    )
    good2 = _east_spec(12_000.0, sigma=0.3, seed=2)
    sweep = run_sweep([good1, bad, good2])
    assert len(sweep.failures) == 1
    assert sweep.failures[0][0] == 1
    assert "outside the mapped area" in sweep.failures[0][1]
    expected = run_scenario(good1).events + run_scenario(good2).events
    assert sweep.events == expected
    assert sweep.metrics.n_scenarios == 3
    assert sweep.metrics.n_failed == 1


def test_run_sweep_parallel_matches_serial():
    specs = [_east_spec(12_000.0, sigma=0.3, seed=s) for s in range(6)]
    serial = run_sweep(specs, jobs=1)
    parallel = run_sweep(specs, jobs=3)
    assert serial.events == parallel.events
    assert serial.metrics == parallel.metrics


# --- delimited outputs --------------------------------------------------------


def test_trace_csv_round_trips_exactly(tmp_path):
    res = run_scenario(_east_spec(9_000.0, sigma=0.3, seed=55))
    path = tmp_path / "trace.csv"
    write_trace_csv(res.trace, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == TRACE_HEADER
    assert len(lines) == 1 + len(res.trace)
    for line, row in zip(lines[1:], res.trace):
        fields = line.split(",")
        assert len(fields) == 15
        for got, want in zip(fields, row):
            if want is None:
                assert got == ""
            else:
                assert float(got) == want  # repr round-trip is exact


def test_events_csv_fields(tmp_path):
    res = run_scenario(_east_spec(54_000.0))
    path = tmp_path / "events.csv"
    write_events_csv(res.events, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == EVENTS_HEADER
    first = lines[1].split(",")
    assert float(first[0]) == res.events[0].t_ms
    assert first[3] == "1"
    assert first[4] == "AP01"
    assert first[5] == "AP01"
    assert first[6] == "true"
    assert float(first[7]) == 34.0
    last = lines[3].split(",")
    assert last[3] == "0"
    assert (last[4], last[5]) == ("", "")  # fallback: no candidates, no crossing
    assert float(last[8]) == 334.0


def test_summary_format(tmp_path):
    res = run_scenario(_east_spec(54_000.0))
    text = format_summary(res.metrics)
    lines = dict(line.split("=", 1) for line in text.strip().splitlines())
    assert lines["n_handoffs"] == "3"
    assert float(lines["accuracy"]) == 1.0
    assert float(lines["reduction_ratio"]) == res.metrics.reduction_ratio
    path = tmp_path / "summary.txt"
    write_summary(res.metrics, str(path))
    assert path.read_text() == text


def test_metrics_dataclass_shape():
    m = Metrics(0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert m.n_scenarios == 1 and m.n_failed == 0
