"""Trajectory model tests: closed forms, vectorized evaluation, determinism."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hexhand import (
    ArcTrajectory,
    PiecewiseTrajectory,
    PlanarCoord,
    RandomWaypointTrajectory,
    StraightTrajectory,
)


def test_straight_closed_form():
    traj = StraightTrajectory(PlanarCoord(10.0, -5.0), math.radians(30.0), 20.0, 10_000.0)
    assert traj.position_at(0.0) == PlanarCoord(10.0, -5.0)
    p = traj.position_at(1000.0)  # one second: 20 m along 30 degrees
    assert p.x == pytest.approx(10.0 + 20.0 * math.cos(math.radians(30.0)), rel=1e-12)
    assert p.y == pytest.approx(-5.0 + 10.0, rel=1e-12)
    assert traj.heading_at(123.0) == math.radians(30.0)


def test_straight_time_bounds_and_validation():
    traj = StraightTrajectory(PlanarCoord(0.0, 0.0), 0.0, 10.0, 500.0)
    traj.position_at(500.0)  # inclusive end
    with pytest.raises(ValueError):
        traj.position_at(500.1)
    with pytest.raises(ValueError):
        traj.position_at(-1.0)
    with pytest.raises(ValueError):
        StraightTrajectory(PlanarCoord(0.0, 0.0), 0.0, -1.0, 500.0)
    with pytest.raises(ValueError):
        StraightTrajectory(PlanarCoord(0.0, 0.0), 0.0, 1.0, 0.0)


def test_piecewise_visits_waypoints_at_leg_speeds():
    a, b, c = PlanarCoord(0.0, 0.0), PlanarCoord(30.0, 0.0), PlanarCoord(30.0, 40.0)
    traj = PiecewiseTrajectory(((a, 0.0), (b, 10.0), (c, 20.0)), duration_ms=10_000.0)
    # Leg 1: 30 m at 10 m/s = 3 s; leg 2: 40 m at 20 m/s = 2 s.
    assert traj.position_at(0.0) == a
    assert traj.position_at(3000.0) == pytest.approx(b)
    assert traj.position_at(5000.0) == pytest.approx(c)
    assert traj.position_at(1500.0) == pytest.approx((15.0, 0.0))
    assert traj.position_at(4000.0) == pytest.approx((30.0, 20.0))
    # Position holds after the last waypoint.
    assert traj.position_at(9000.0) == pytest.approx(c)
    assert traj.heading_at(1000.0) == pytest.approx(0.0)
    assert traj.heading_at(4000.0) == pytest.approx(math.pi / 2.0)
    assert traj.heading_at(9000.0) == pytest.approx(math.pi / 2.0)


def test_piecewise_single_waypoint_stands_still():
    p = PlanarCoord(7.0, 7.0)
    traj = PiecewiseTrajectory(((p, 0.0),), duration_ms=1000.0)
    assert traj.position_at(0.0) == p
    assert traj.position_at(999.0) == p
    assert traj.heading_at(500.0) == 0.0


def test_piecewise_validation():
    with pytest.raises(ValueError):
        PiecewiseTrajectory((), duration_ms=1000.0)
    a, b = PlanarCoord(0.0, 0.0), PlanarCoord(1.0, 0.0)
    with pytest.raises(ValueError, match="leg speeds"):
        PiecewiseTrajectory(((a, 0.0), (b, 0.0)), duration_ms=1000.0)


def test_arc_quarter_turn():
    # 10 m/s on a 100 m left-hand circle: quarter turn after pi/2 * 10 s.
    traj = ArcTrajectory(PlanarCoord(0.0, 0.0), 0.0, 10.0, 100.0, 60_000.0)
    t_quarter = math.pi / 2.0 * 10.0 * 1000.0
    p = traj.position_at(t_quarter)
    assert p == pytest.approx((100.0, 100.0), abs=1e-9)
    assert traj.heading_at(t_quarter) == pytest.approx(math.pi / 2.0, rel=1e-12)
    # Right-hand turn mirrors across the start heading.
    right = ArcTrajectory(PlanarCoord(0.0, 0.0), 0.0, 10.0, -100.0, 60_000.0)
    q = right.position_at(t_quarter)
    assert q == pytest.approx((100.0, -100.0), abs=1e-9)


def test_arc_speed_is_constant():
    traj = ArcTrajectory(PlanarCoord(5.0, 5.0), 1.0, 15.0, -40.0, 20_000.0)
    ts = np.linspace(0.0, 20_000.0, 2001)
    pts = traj.positions(ts)
    steps = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    # Chord length of a 10 ms arc step, constant along the whole path.
    assert steps.max() - steps.min() < 1e-9
    assert steps.mean() == pytest.approx(15.0 * 0.010, rel=1e-4)


def test_arc_validation():
    with pytest.raises(ValueError, match="radius"):
        ArcTrajectory(PlanarCoord(0.0, 0.0), 0.0, 10.0, 0.0, 1000.0)


@given(
    st.sampled_from(["straight", "arc"]),
    st.floats(min_value=0.0, max_value=2.0 * math.pi),
    st.floats(min_value=0.1, max_value=40.0),
)
@settings(max_examples=100)
def test_vectorized_positions_match_scalar(kind, heading, speed):
    if kind == "straight":
        traj = StraightTrajectory(PlanarCoord(3.0, -2.0), heading, speed, 5000.0)
    else:
        traj = ArcTrajectory(PlanarCoord(3.0, -2.0), heading, speed, 75.0, 5000.0)
    ts = np.linspace(0.0, 5000.0, 101)
    vec = traj.positions(ts)
    for t, row in zip(ts, vec):
        p = traj.position_at(float(t))
        assert row[0] == pytest.approx(p.x, rel=1e-12, abs=1e-12)
        assert row[1] == pytest.approx(p.y, rel=1e-12, abs=1e-12)


def test_random_waypoint_is_deterministic_per_seed():
    kwargs = dict(
        bounds=(-500.0, 500.0, -500.0, 500.0),
        speed_range_mps=(5.0, 30.0),
        duration_ms=60_000.0,
    )
    a = RandomWaypointTrajectory(seed=11, **kwargs)
    b = RandomWaypointTrajectory(seed=11, **kwargs)
    c = RandomWaypointTrajectory(seed=12, **kwargs)
    ts = np.linspace(0.0, 60_000.0, 601)
    assert np.array_equal(a.positions(ts), b.positions(ts))
    assert not np.array_equal(a.positions(ts), c.positions(ts))


def test_random_waypoint_stays_in_bounds_and_respects_start():
    traj = RandomWaypointTrajectory(
        bounds=(0.0, 200.0, -100.0, 100.0),
        speed_range_mps=(1.0, 10.0),
        seed=3,
        duration_ms=120_000.0,
        start=PlanarCoord(10.0, 10.0),
    )
    assert traj.position_at(0.0) == PlanarCoord(10.0, 10.0)
    pts = traj.positions(np.linspace(0.0, 120_000.0, 1201))
    assert pts[:, 0].min() >= 0.0 and pts[:, 0].max() <= 200.0
    assert pts[:, 1].min() >= -100.0 and pts[:, 1].max() <= 100.0


def test_random_waypoint_pause_freezes_position():
    traj = RandomWaypointTrajectory(
        bounds=(0.0, 100.0, 0.0, 100.0),
        speed_range_mps=(20.0, 20.0),
        seed=1,
        duration_ms=30_000.0,
        pause_ms=500.0,
    )
    # First leg ends when the first pause begins.
    t0, t1, _, target = traj._legs[0]
    assert traj.position_at(t1) == pytest.approx(target)
    assert traj.position_at(min(t1 + 499.0, traj.duration_ms)) == pytest.approx(target)
    # Heading during the pause carries over from the finished leg.
    if t1 + 250.0 <= traj.duration_ms:
        assert traj.heading_at(t1 + 250.0) == traj.heading_at(t1 - 1.0)


def test_random_waypoint_validation():
    with pytest.raises(ValueError):
        RandomWaypointTrajectory((10.0, 0.0, 0.0, 1.0), (1.0, 2.0), 0, 1000.0)
    with pytest.raises(ValueError):
        RandomWaypointTrajectory((0.0, 1.0, 0.0, 1.0), (0.0, 2.0), 0, 1000.0)
    with pytest.raises(ValueError):
        RandomWaypointTrajectory((0.0, 1.0, 0.0, 1.0), (3.0, 2.0), 0, 1000.0)
    with pytest.raises(ValueError):
        RandomWaypointTrajectory((0.0, 1.0, 0.0, 1.0), (1.0, 2.0), 0, 1000.0, pause_ms=-1.0)
