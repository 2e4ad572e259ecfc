"""Planar geometry for rooftop flight corridors and no-fly zones.

All coordinates and lengths are meters. Regions are treated as closed
sets, so touching counts as intersecting. Every boundary comparison uses
the absolute tolerance ``EPS``. All values are immutable and every
operation is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

EPS = 1e-9


@dataclass(frozen=True)
class Point2:
    """Ground-plane position."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"coordinates must be finite, got ({self.x!r}, {self.y!r})")


@dataclass(frozen=True)
class Polygon2:
    """Simple polygon with counter-clockwise vertex order."""

    vertices: tuple[Point2, ...]

    def __post_init__(self) -> None:
        verts = tuple(self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        n = len(verts)
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            if math.hypot(b.x - a.x, b.y - a.y) <= EPS:
                raise ValueError(f"degenerate edge at vertex {i}")
        if _signed_area(verts) <= EPS:
            raise ValueError("vertices must be in counter-clockwise order with positive area")
        if not _is_simple(verts):
            raise ValueError("polygon must not self-intersect")

    def edges(self) -> Iterator[tuple[Point2, Point2]]:
        verts = self.vertices
        for i in range(len(verts)):
            yield verts[i], verts[(i + 1) % len(verts)]


@dataclass(frozen=True)
class Building:
    """Rooftop node candidate: circular footprint plus rooftop height."""

    id: str
    center: Point2
    radius: float
    height: float
    recharge_pads: int

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("building id must be non-empty")
        if not (self.radius > 0):
            raise ValueError(f"building {self.id}: radius must be positive")
        if not (self.height > 0):
            raise ValueError(f"building {self.id}: height must be positive")
        if self.recharge_pads < 0 or int(self.recharge_pads) != self.recharge_pads:
            raise ValueError(f"building {self.id}: recharge_pads must be a non-negative integer")


@dataclass(frozen=True)
class NoFlyZone:
    """Ground polygon closed to flight at every altitude."""

    id: str
    shape: Polygon2


def _signed_area(verts: Sequence[Point2]) -> float:
    total = 0.0
    n = len(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        total += a.x * b.y - b.x * a.y
    return 0.5 * total


def _is_simple(verts: Sequence[Point2]) -> bool:
    # Non-adjacent edges may not touch; adjacent edges may meet only at
    # their shared vertex (no spikes folding back along the previous edge).
    n = len(verts)
    edges = [(verts[i], verts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            if adjacent:
                continue
            if segment_distance(edges[i][0], edges[i][1], edges[j][0], edges[j][1]) <= EPS:
                return False
    for i in range(n):
        prev_a, _ = edges[i - 1]
        _, next_b = edges[i]
        # Shared vertex is verts[i]; the far endpoints must stay off the
        # opposite edge or the boundary folds onto itself.
        if point_segment_distance(next_b, edges[i - 1][0], edges[i - 1][1]) <= EPS:
            return False
        if point_segment_distance(prev_a, edges[i][0], edges[i][1]) <= EPS:
            return False
    return True


def point_segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    """Distance from ``p`` to the closed segment ``a``-``b``."""
    abx, aby = b.x - a.x, b.y - a.y
    apx, apy = p.x - a.x, p.y - a.y
    denom = abx * abx + aby * aby
    if denom <= 0.0:
        return math.hypot(apx, apy)
    t = (apx * abx + apy * aby) / denom
    t = min(1.0, max(0.0, t))
    return math.hypot(apx - t * abx, apy - t * aby)


def _orient(a: Point2, b: Point2, c: Point2) -> float:
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)


def _segments_cross(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool:
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    return ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    )


def segment_distance(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> float:
    """Minimum distance between two closed segments (0 when they cross)."""
    if _segments_cross(p1, p2, q1, q2):
        return 0.0
    return min(
        point_segment_distance(p1, q1, q2),
        point_segment_distance(p2, q1, q2),
        point_segment_distance(q1, p1, p2),
        point_segment_distance(q2, p1, p2),
    )


def point_in_polygon(p: Point2, poly: Polygon2) -> bool:
    """Closed-region membership test; boundary points count as inside."""
    for a, b in poly.edges():
        if point_segment_distance(p, a, b) <= EPS:
            return True
    inside = False
    for a, b in poly.edges():
        if (a.y > p.y) != (b.y > p.y):
            x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
            if x_cross > p.x:
                inside = not inside
    return inside


def corridor_polygon(a: Point2, b: Point2, width: float) -> Polygon2:
    """Rectangle centered on the segment ``a``-``b`` spanning the swarm width.

    Raises ValueError for degenerate input (coincident endpoints or a
    non-positive width).
    """
    dx, dy = b.x - a.x, b.y - a.y
    length = math.hypot(dx, dy)
    if length <= 0.0:
        raise ValueError("corridor endpoints must be distinct")
    if not (width > 0):
        raise ValueError(f"corridor width must be positive, got {width!r}")
    ux, uy = dx / length, dy / length
    nx, ny = -uy, ux
    h = width / 2.0
    return Polygon2(
        (
            Point2(a.x - nx * h, a.y - ny * h),
            Point2(b.x - nx * h, b.y - ny * h),
            Point2(b.x + nx * h, b.y + ny * h),
            Point2(a.x + nx * h, a.y + ny * h),
        )
    )


def circle_intersects_polygon(center: Point2, radius: float, poly: Polygon2) -> bool:
    """True iff the closed disk and the closed polygon share any point."""
    if point_in_polygon(center, poly):
        return True
    return min(point_segment_distance(center, a, b) for a, b in poly.edges()) <= radius + EPS


def polygons_intersect(p: Polygon2, q: Polygon2) -> bool:
    """True iff the closed regions overlap; a shared boundary point counts."""
    for pa, pb in p.edges():
        for qa, qb in q.edges():
            if segment_distance(pa, pb, qa, qb) <= EPS:
                return True
    # No boundary contact: either disjoint or one region contains the other.
    if point_in_polygon(p.vertices[0], q):
        return True
    if point_in_polygon(q.vertices[0], p):
        return True
    return False


def blocks_vertical(candidate: Building, a: Building, b: Building) -> bool:
    """Whether ``candidate`` rises above the rooftop-to-rooftop flight line.

    The flight line interpolates linearly between the two rooftop heights.
    The candidate is tested at the along-track parameter nearest to its
    center; a candidate at or below the line does not block.
    """
    ax, ay = a.center.x, a.center.y
    dx, dy = b.center.x - ax, b.center.y - ay
    denom = dx * dx + dy * dy
    if denom <= 0.0:
        t = 0.0
    else:
        t = ((candidate.center.x - ax) * dx + (candidate.center.y - ay) * dy) / denom
        t = min(1.0, max(0.0, t))
    line_height = a.height + t * (b.height - a.height)
    return candidate.height > line_height + EPS


def line_of_sight(
    a: Building,
    b: Building,
    scene_buildings: Iterable[Building],
    nfzs: Iterable[NoFlyZone],
    width: float,
) -> bool:
    """Whether a swarm corridor of the given width can run from ``a`` to ``b``.

    The corridor rectangle is built first, then candidate obstacles are
    filtered by footprint overlap in the ground plane, and the survivors
    are checked against the interpolated flight line. Any no-fly zone
    touching the corridor blocks the segment outright.
    """
    corridor = corridor_polygon(a.center, b.center, width)
    for zone in nfzs:
        if polygons_intersect(corridor, zone.shape):
            return False
    for candidate in scene_buildings:
        if candidate.id in (a.id, b.id):
            continue
        if not circle_intersects_polygon(candidate.center, candidate.radius, corridor):
            continue
        if blocks_vertical(candidate, a, b):
            return False
    return True
