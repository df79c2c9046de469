"""2D geometry primitives: vectors, the line-segment obstacle, distance and
swept-collision queries.

Everything here is a pure function over immutable values; safe from any
thread.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .errors import DegenerateGradient, NonFiniteInput


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return Vec2(self.x - other.x, self.y - other.y)

    def scaled(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


ZERO = Vec2(0.0, 0.0)


def require_finite(v: Vec2, what: str = "vector") -> Vec2:
    if not (math.isfinite(v[0]) and math.isfinite(v[1])):
        raise NonFiniteInput(f"{what} is not finite: {v}")
    return v


class Obstacle(NamedTuple):
    """A thin line-segment obstacle in the task plane."""

    endpoint_a: Vec2
    endpoint_b: Vec2

    def midpoint(self) -> Vec2:
        return Vec2(
            0.5 * (self.endpoint_a.x + self.endpoint_b.x),
            0.5 * (self.endpoint_a.y + self.endpoint_b.y),
        )


def make_obstacle(ax: float, ay: float, bx: float, by: float) -> Obstacle:
    if ax == bx and ay == by:
        raise ValueError("obstacle endpoints must be distinct")
    return Obstacle(Vec2(ax, ay), Vec2(bx, by))


def segment_distance(x: Vec2, obstacle: Obstacle) -> tuple[float, Vec2]:
    """Distance from point ``x`` to the obstacle segment and the nearest point.

    Returns ``(p, closest)`` with ``p >= 0``; ``p == 0`` iff ``x`` lies on the
    segment.
    """
    ax, ay = obstacle.endpoint_a
    bx, by = obstacle.endpoint_b
    dx, dy = bx - ax, by - ay
    seg_len_sq = dx * dx + dy * dy
    # Parameter of the projection onto the segment, clamped to [0, 1].
    t = ((x.x - ax) * dx + (x.y - ay) * dy) / seg_len_sq
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    closest = Vec2(ax + t * dx, ay + t * dy)
    p = math.hypot(x.x - closest.x, x.y - closest.y)
    return p, closest


def distance_gradient(x: Vec2, obstacle: Obstacle) -> Vec2:
    """Unit gradient of the segment distance at ``x``: points away from the
    obstacle.

    Raises DegenerateGradient when ``x`` is on the segment (the caller must
    treat that as a collision).
    """
    p, closest = segment_distance(x, obstacle)
    if p == 0.0:
        raise DegenerateGradient(f"point {x} lies on the obstacle")
    return Vec2((x.x - closest.x) / p, (x.y - closest.y) / p)


def _orient(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> float:
    """Signed area of the triangle abc (positive = counterclockwise)."""
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax: float, ay: float, bx: float, by: float, px: float, py: float) -> bool:
    """Whether p lies on segment ab, assuming a, b, p are collinear."""
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def swept_collision(start: Vec2, end: Vec2, obstacle: Obstacle) -> bool:
    """Whether the motion segment start→end intersects or touches the obstacle.

    Standard 2D segment intersection including touching endpoints and
    collinear overlap, so a fast step cannot tunnel through the thin line.
    """
    ax, ay = start
    bx, by = end
    cx, cy = obstacle.endpoint_a
    dx, dy = obstacle.endpoint_b

    d1 = _orient(cx, cy, dx, dy, ax, ay)
    d2 = _orient(cx, cy, dx, dy, bx, by)
    d3 = _orient(ax, ay, bx, by, cx, cy)
    d4 = _orient(ax, ay, bx, by, dx, dy)

    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if d2 == 0 and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    if d3 == 0 and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if d4 == 0 and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    return False


def clamp_magnitude(x: float, y: float, cap: float) -> tuple[float, float]:
    """Scale the vector down to ``cap`` if its magnitude exceeds it."""
    mag = math.hypot(x, y)
    if mag > cap:
        s = cap / mag
        return x * s, y * s
    return x, y
