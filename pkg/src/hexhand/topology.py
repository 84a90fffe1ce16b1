"""Hexagonal cell layout: access points, point-in-cell queries, and map I/O.

A regular hexagonal tiling with one access point per cell center. The
default "flat" orientation puts a flat cell edge due east, so the first ring
of neighbors sits at bearings 0, 60, ..., 300 degrees and the cell spacing is
edge * sqrt(3). The "pointy" orientation is the same tiling rotated 30
degrees (a vertex faces east).
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .geo import PlanarCoord

SQRT3 = math.sqrt(3.0)

_ORIENTATIONS = ("flat", "pointy")

# Unit outward normals of the three edge axes; the other three edges are the
# mirrors. "flat" has edge normals at 0/60/120 degrees, "pointy" at 30/90/150.
_AXES = {
    "flat": ((1.0, 0.0), (0.5, SQRT3 / 2.0), (-0.5, SQRT3 / 2.0)),
    "pointy": ((SQRT3 / 2.0, 0.5), (0.0, 1.0), (-SQRT3 / 2.0, 0.5)),
}

# Vertex bearings, degrees. "flat" vertices are offset 30 degrees from the
# edge normals, which puts vertices due north and south.
_VERTEX_DEG = {"flat": 30.0, "pointy": 0.0}


def _check_orientation(orientation: str) -> None:
    if orientation not in _ORIENTATIONS:
        raise ValueError(f"orientation must be one of {_ORIENTATIONS}, got {orientation!r}")


@dataclass(frozen=True)
class HexCell:
    """One hexagonal coverage cell.

    Attributes:
        center: Cell center in planar meters.
        edge: Edge length (also the circumradius) in meters.
        orientation: "flat" (edge faces east) or "pointy" (vertex faces east).
    """

    center: PlanarCoord
    edge: float
    orientation: str = "flat"

    def __post_init__(self) -> None:
        if self.edge <= 0.0:
            raise ValueError("edge must be > 0")
        _check_orientation(self.orientation)

    @property
    def apothem(self) -> float:
        return self.edge * SQRT3 / 2.0

    def vertices(self) -> tuple[PlanarCoord, ...]:
        """The six corners, counterclockwise."""
        base = math.radians(_VERTEX_DEG[self.orientation])
        return tuple(
            PlanarCoord(
                self.center.x + self.edge * math.cos(base + k * math.pi / 3.0),
                self.center.y + self.edge * math.sin(base + k * math.pi / 3.0),
            )
            for k in range(6)
        )

    def _max_axis_projection(self, p: PlanarCoord) -> float:
        dx = p.x - self.center.x
        dy = p.y - self.center.y
        (ax, ay), (bx, by), (cx, cy) = _AXES[self.orientation]
        return max(abs(dx * ax + dy * ay), abs(dx * bx + dy * by), abs(dx * cx + dy * cy))

    def contains(self, p: PlanarCoord) -> bool:
        """Boundary-inclusive membership test.

        A regular hexagon is the intersection of three slabs, so membership
        is a projection bound on the three edge axes.
        """
        # The relative slack keeps shared edges inside both adjacent cells
        # despite rounding, which is what the ownership tie-break expects.
        return self._max_axis_projection(p) <= self.apothem * (1.0 + 1e-12)

    def distance_to_boundary(self, p: PlanarCoord) -> float:
        """Distance from an interior point to the nearest of the six edges.

        Zero on the boundary, maximal (one apothem) at the center. Raises for
        points outside the cell, where the quantity is not defined.
        """
        m = self._max_axis_projection(p)
        if m > self.apothem * (1.0 + 1e-12):
            raise ValueError("point lies outside the cell")
        return max(0.0, self.apothem - m)


@dataclass(frozen=True)
class AccessPoint:
    """An access point and the cell it serves.

    Attributes:
        bssid: Unique identifier; lexicographic order breaks ownership ties.
        channel: 802.11 channel number, 1..14.
        center: Cell center in planar meters.
        ssid: Network name (informational).
        prefix: Routing prefix advertised behind this AP (informational).
    """

    bssid: str
    channel: int
    center: PlanarCoord
    ssid: str = ""
    prefix: str = ""

    def __post_init__(self) -> None:
        if not self.bssid:
            raise ValueError("bssid must be non-empty")
        if not 1 <= self.channel <= 14:
            raise ValueError(f"channel {self.channel} outside 1..14")


@dataclass(frozen=True)
class MonitorSample:
    """One row of a survey: where the monitor stood and what it heard."""

    position: PlanarCoord
    bssid: str
    channel: int
    rssi: float


@dataclass(frozen=True)
class ApMap:
    """A set of access points tiling an area with same-size hexagonal cells.

    Attributes:
        aps: The access points; bssids are unique.
        edge: Cell edge length in meters, shared by all cells.
        orientation: Hexagon orientation, shared by all cells.
        neighbor_threshold: Center-distance cutoff for neighbor queries.
            Defaults to 2 * edge * sqrt(3), two rings of neighbors.
    """

    aps: tuple[AccessPoint, ...]
    edge: float
    orientation: str = "flat"
    neighbor_threshold: float = field(default=0.0)

    def __post_init__(self) -> None:
        if self.edge <= 0.0:
            raise ValueError("edge must be > 0")
        _check_orientation(self.orientation)
        if not self.aps:
            raise ValueError("map must contain at least one access point")
        if self.neighbor_threshold == 0.0:
            object.__setattr__(self, "neighbor_threshold", 2.0 * self.edge * SQRT3)
        if self.neighbor_threshold <= 0.0:
            raise ValueError("neighbor_threshold must be > 0")
        seen: set[str] = set()
        for ap in self.aps:
            if ap.bssid in seen:
                raise ValueError(f"duplicate bssid {ap.bssid!r}")
            seen.add(ap.bssid)
        # Tiling sanity: centers of distinct cells cannot sit closer than one
        # cell spacing. Survey-built maps carry center estimation error, so
        # allow a few percent of slack before declaring cells overlapping.
        spacing = self.edge * SQRT3
        slack = max(1e-6, 0.05 * self.edge)
        pts = [ap.center for ap in self.aps]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if math.dist(pts[i], pts[j]) < spacing - slack:
                    raise ValueError(
                        f"APs {self.aps[i].bssid!r} and {self.aps[j].bssid!r} are closer "
                        "than one cell spacing; not a hexagonal tiling"
                    )

    def cell(self, ap: AccessPoint) -> HexCell:
        return HexCell(ap.center, self.edge, self.orientation)

    def cell_of(self, p: PlanarCoord) -> AccessPoint | None:
        """The AP whose cell contains ``p``; lowest bssid on shared boundaries.

        Returns None outside the tiled region.
        """
        best: AccessPoint | None = None
        reach = self.edge * (1.0 + 1e-9)
        for ap in self.aps:
            # Cheap bounding-box reject before the exact test.
            if abs(p.x - ap.center.x) > reach or abs(p.y - ap.center.y) > reach:
                continue
            if self.cell(ap).contains(p):
                if best is None or ap.bssid < best.bssid:
                    best = ap
        return best

    def neighbors(self, p: PlanarCoord) -> list[AccessPoint]:
        """APs within ``neighbor_threshold`` of ``p``, nearest first.

        The AP serving ``p`` (if any) is excluded; ties on distance fall back
        to bssid order so the result is deterministic.
        """
        own = self.cell_of(p)
        out = []
        for ap in self.aps:
            if own is not None and ap.bssid == own.bssid:
                continue
            dist = math.dist(p, ap.center)
            if dist < self.neighbor_threshold:
                out.append((dist, ap.bssid, ap))
        out.sort(key=lambda t: (t[0], t[1]))
        return [ap for _, _, ap in out]


def hex_ring_map(
    rings: int,
    edge: float,
    orientation: str = "flat",
    neighbor_threshold: float | None = None,
    channels: Sequence[int] = (1, 6, 11),
    ssid: str = "hexnet",
) -> ApMap:
    """Generate a map of ``rings`` concentric rings around a central cell.

    Channels follow the three-coloring of the tiling, so adjacent cells never
    share a channel when three distinct channels are supplied.
    """
    if rings < 0:
        raise ValueError("rings must be >= 0")
    if len(channels) != 3:
        raise ValueError("exactly three channels are required for the coloring")
    _check_orientation(orientation)
    spacing = edge * SQRT3
    if orientation == "flat":
        # Axial basis with neighbors due east and at 60 degrees.
        eq = (spacing, 0.0)
        er = (spacing / 2.0, spacing * SQRT3 / 2.0)
    else:
        eq = (spacing * SQRT3 / 2.0, spacing / 2.0)
        er = (0.0, spacing)
    cells = []
    for q in range(-rings, rings + 1):
        for r in range(-rings, rings + 1):
            ring = (abs(q) + abs(r) + abs(q + r)) // 2
            if ring > rings:
                continue
            # Rings are numbered outward; within a ring cells run
            # counterclockwise starting due east, so index 1 is the eastern
            # neighbor of the central cell.
            cx = q * eq[0] + r * er[0]
            cy = q * eq[1] + r * er[1]
            angle = math.atan2(cy, cx) % (2.0 * math.pi) if ring else 0.0
            cells.append((ring, angle, q, r))
    cells.sort()
    width = max(2, len(str(len(cells) - 1)))
    aps = []
    for idx, (_, _, q, r) in enumerate(cells):
        center = PlanarCoord(q * eq[0] + r * er[0], q * eq[1] + r * er[1])
        channel = channels[(q - r) % 3]
        aps.append(
            AccessPoint(
                bssid=f"AP{idx:0{width}d}",
                channel=channel,
                center=center,
                ssid=ssid,
                prefix=f"2001:db8:{idx:x}::/64",
            )
        )
    threshold = neighbor_threshold if neighbor_threshold is not None else 0.0
    return ApMap(tuple(aps), edge, orientation, threshold)


def build_map_from_monitor_trace(
    samples: Iterable[MonitorSample],
    edge: float,
    orientation: str = "flat",
    neighbor_threshold: float | None = None,
) -> ApMap:
    """Estimate an ApMap from a war-walking survey.

    Each AP's center is taken as the monitor position with the strongest
    received signal for that bssid, which lands within the survey's step
    length of the true center for a monotone path-loss law. A bssid reported
    on more than one channel is a contradiction and raises ValueError.
    """
    best: dict[str, MonitorSample] = {}
    channels: dict[str, int] = {}
    for s in samples:
        prev_ch = channels.get(s.bssid)
        if prev_ch is not None and prev_ch != s.channel:
            raise ValueError(f"bssid {s.bssid!r} reported on channels {prev_ch} and {s.channel}")
        channels[s.bssid] = s.channel
        cur = best.get(s.bssid)
        if cur is None or s.rssi > cur.rssi:
            best[s.bssid] = s
    if not best:
        raise ValueError("no samples")
    aps = tuple(
        AccessPoint(bssid=b, channel=best[b].channel, center=best[b].position)
        for b in sorted(best)
    )
    threshold = neighbor_threshold if neighbor_threshold is not None else 0.0
    return ApMap(aps, edge, orientation, threshold)


def save_map(ap_map: ApMap, path: str) -> None:
    """Write a map file (atomic: temp file then rename)."""
    lines = [
        "# hexhand access point map",
        f"edge_m={ap_map.edge!r} orientation={ap_map.orientation} "
        f"neighbor_threshold_m={ap_map.neighbor_threshold!r}",
    ]
    for ap in ap_map.aps:
        lines.append(
            f"{ap.bssid},{ap.channel},{ap.center.x!r},{ap.center.y!r},{ap.ssid},{ap.prefix}"
        )
    text = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".maptmp-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_map(path: str) -> ApMap:
    """Read a map file written by :func:`save_map`."""
    with open(path) as f:
        raw = f.readlines()
    header: dict[str, str] | None = None
    aps = []
    for lineno, line in enumerate(raw, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            header = {}
            for item in line.split():
                if "=" not in item:
                    raise ValueError(f"{path}:{lineno}: bad header item {item!r}")
                key, value = item.split("=", 1)
                header[key] = value
            missing = {"edge_m", "orientation", "neighbor_threshold_m"} - set(header)
            if missing:
                raise ValueError(f"{path}:{lineno}: header missing {sorted(missing)}")
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ValueError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
        bssid, channel, x, y, ssid, prefix = (p.strip() for p in parts)
        try:
            aps.append(
                AccessPoint(bssid, int(channel), PlanarCoord(float(x), float(y)), ssid, prefix)
            )
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
    if header is None:
        raise ValueError(f"{path}: empty map file")
    try:
        return ApMap(
            tuple(aps),
            edge=float(header["edge_m"]),
            orientation=header["orientation"],
            neighbor_threshold=float(header["neighbor_threshold_m"]),
        )
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
