"""Geodesy primitives, a local planar projection, and the GPS measurement model.

Angles are radians and distances are meters unless a name says otherwise.
Time is carried in milliseconds throughout the package, so speeds that cross
module boundaries are meters per millisecond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import lfilter

EARTH_RADIUS_M = 6_371_000.0

# Displacements below this are indistinguishable from receiver noise and do
# not count as movement.
MOVEMENT_THRESHOLD_M = 1.0

# The tangent-plane projection degrades quadratically with range; beyond this
# it is no longer a faithful map of the sphere.
MAX_PROJECTION_RANGE_M = 50_000.0


class PlanarCoord(NamedTuple):
    """Point in the local tangent plane: meters east (x) and north (y) of the origin."""

    x: float
    y: float


@dataclass(frozen=True)
class GeoCoord:
    """Geodetic position in radians.

    Attributes:
        lat: Latitude in [-pi/2, pi/2].
        lon: Longitude in [-pi, pi).
    """

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.lat) or not math.isfinite(self.lon):
            raise ValueError("coordinates must be finite")
        if not -math.pi / 2 <= self.lat <= math.pi / 2:
            raise ValueError(f"latitude {self.lat!r} outside [-pi/2, pi/2]")
        if not -math.pi <= self.lon < math.pi:
            raise ValueError(f"longitude {self.lon!r} outside [-pi, pi)")


@dataclass(frozen=True)
class GpsNoiseModel:
    """Error budget of the positioning receiver.

    The headline accuracy figure ``sigma`` behaves as a slowly wandering
    offset: atmospheric and ephemeris contributions decorrelate over minutes,
    not milliseconds, so consecutive fixes a few milliseconds apart share
    almost all of their error. On top of that sits fast receiver noise
    (``jitter_frac`` of sigma per fix) and occasional multipath excursions
    (``excursion_prob`` per fix, magnitude ``excursion_frac`` of sigma).

    Attributes:
        sigma: Per-axis position error standard deviation in meters.
        sample_period_ms: Milliseconds between fixes.
        jitter_frac: Fast per-fix noise, as a fraction of sigma.
        excursion_prob: Probability per fix of a multipath excursion.
        excursion_frac: Excursion magnitude (std), as a fraction of sigma.
        bias_tau_ms: Correlation time of the slow error component.
    """

    sigma: float = 0.3
    sample_period_ms: float = 5.0
    jitter_frac: float = 0.01
    excursion_prob: float = 0.0015
    excursion_frac: float = 0.35
    bias_tau_ms: float = 180_000.0

    def __post_init__(self) -> None:
        if self.sigma < 0.0:
            raise ValueError("sigma must be >= 0")
        if self.sample_period_ms <= 0.0:
            raise ValueError("sample_period_ms must be > 0")
        if self.jitter_frac < 0.0 or self.excursion_frac < 0.0:
            raise ValueError("noise fractions must be >= 0")
        if not 0.0 <= self.excursion_prob < 1.0:
            raise ValueError("excursion_prob must be in [0, 1)")
        if self.bias_tau_ms <= 0.0:
            raise ValueError("bias_tau_ms must be > 0")


def haversin(delta: float) -> float:
    """Half versed sine: sin^2(delta / 2)."""
    s = math.sin(delta / 2.0)
    return s * s


def haversine_distance(a: GeoCoord, b: GeoCoord, radius: float = EARTH_RADIUS_M) -> float:
    """Great-circle distance between two geodetic points.

    Args:
        a: First point.
        b: Second point.
        radius: Sphere radius in meters.

    Returns:
        Distance in meters along the great circle.
    """
    h = haversin(b.lat - a.lat) + math.cos(a.lat) * math.cos(b.lat) * haversin(b.lon - a.lon)
    # Rounding can push h a hair outside [0, 1] for antipodal or coincident
    # points; asin would then raise.
    h = min(1.0, max(0.0, h))
    return 2.0 * radius * math.asin(math.sqrt(h))


def movement_detected(prev: PlanarCoord, cur: PlanarCoord) -> bool:
    """True when the displacement since the previous fix exceeds the movement threshold."""
    return math.hypot(cur.x - prev.x, cur.y - prev.y) > MOVEMENT_THRESHOLD_M


def geo_to_planar(p: GeoCoord, origin: GeoCoord) -> PlanarCoord:
    """Project a geodetic point onto the local tangent plane at ``origin``.

    East is +x and north is +y. Valid for separations well under
    ``MAX_PROJECTION_RANGE_M``; larger separations are rejected.
    """
    # Wrap the longitude difference so points just across the antimeridian
    # project to the near image rather than the far one.
    dlon = math.remainder(p.lon - origin.lon, 2.0 * math.pi)
    x = EARTH_RADIUS_M * dlon * math.cos(origin.lat)
    y = EARTH_RADIUS_M * (p.lat - origin.lat)
    if math.hypot(x, y) > MAX_PROJECTION_RANGE_M:
        raise ValueError("separation exceeds the valid projection range")
    return PlanarCoord(x, y)


def planar_to_geo(p: PlanarCoord, origin: GeoCoord) -> GeoCoord:
    """Inverse of :func:`geo_to_planar` for the same origin."""
    if math.hypot(p.x, p.y) > MAX_PROJECTION_RANGE_M:
        raise ValueError("separation exceeds the valid projection range")
    lat = origin.lat + p.y / EARTH_RADIUS_M
    lon = origin.lon + p.x / (EARTH_RADIUS_M * math.cos(origin.lat))
    # Keep lon in [-pi, pi) so the result constructs cleanly.
    if lon >= math.pi:
        lon -= 2.0 * math.pi
    elif lon < -math.pi:
        lon += 2.0 * math.pi
    return GeoCoord(lat, lon)


def gps_fix(true_pos: PlanarCoord, model: GpsNoiseModel, rng: np.random.Generator) -> PlanarCoord:
    """One position fix: the true position plus independent per-axis Gaussian noise.

    Deterministic for a given generator state. With ``sigma == 0`` the fix is
    exact.
    """
    if model.sigma == 0.0:
        return true_pos
    nx, ny = rng.standard_normal(2)
    return PlanarCoord(true_pos.x + model.sigma * nx, true_pos.y + model.sigma * ny)


def gps_error_track(model: GpsNoiseModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Per-axis measurement error for ``n`` consecutive fixes, shape (n, 2).

    This is the time-resolved counterpart of :func:`gps_fix`: the marginal
    per-axis deviation stays ``sigma`` (within the small jitter contribution),
    but the error is split into the three components described on
    :class:`GpsNoiseModel`. Deterministic for a given generator state.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if model.sigma == 0.0 or n == 0:
        return np.zeros((n, 2))
    rho = math.exp(-model.sample_period_ms / model.bias_tau_ms)
    # Stationary first-order Gauss-Markov: rho^k decay of an N(0, sigma) start
    # plus the filtered innovation sequence.
    w = rng.standard_normal((n, 2))
    slow = lfilter([model.sigma * math.sqrt(1.0 - rho * rho)], [1.0, -rho], w, axis=0)
    start = rng.standard_normal(2) * model.sigma
    decay = np.power(rho, np.arange(n))[:, None]
    slow = slow + decay * start
    jitter = rng.standard_normal((n, 2)) * (model.jitter_frac * model.sigma)
    track = slow + jitter
    if model.excursion_prob > 0.0:
        hits = rng.random(n) < model.excursion_prob
        bumps = rng.standard_normal((n, 2)) * (model.excursion_frac * model.sigma)
        track = track + hits[:, None] * bumps
    return track
