"""Planar primitives: poses, unit squares, convex-quad tests, regions.

Everything is double precision. Predicates take an explicit tolerance so
flush contact (shared edges) can be treated as disjoint. Floor/ceil of
derived real quantities go through guarded versions so representation
noise cannot flip an integer part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

FLOOR_EPS = 1e-12


def floor_guard(v: float) -> int:
    """Floor that forgives noise just below an integer."""
    return math.floor(v + FLOOR_EPS)


def ceil_guard(v: float) -> int:
    """Ceil that forgives noise just above an integer."""
    return math.ceil(v - FLOOR_EPS)


def frac_guard(v: float) -> float:
    """Fractional part consistent with floor_guard; clamped to [0, 1)."""
    f = v - floor_guard(v)
    if f < 0.0:
        return 0.0
    if f >= 1.0:
        return 0.0
    return f


@dataclass(frozen=True)
class Pose:
    """Rigid placement: rotate by `angle`, then translate by (tx, ty).

    Square placements keep |angle| <= pi/2; region frames may use any angle.
    """

    tx: float
    ty: float
    angle: float

    def apply(self, x: float, y: float) -> tuple[float, float]:
        c = math.cos(self.angle)
        s = math.sin(self.angle)
        return (self.tx + c * x - s * y, self.ty + s * x + c * y)

    def invert_apply(self, x: float, y: float) -> tuple[float, float]:
        c = math.cos(self.angle)
        s = math.sin(self.angle)
        dx = x - self.tx
        dy = y - self.ty
        return (c * dx + s * dy, -s * dx + c * dy)

    def compose(self, inner: "Pose") -> "Pose":
        """Pose equivalent to applying `inner` first, then self."""
        tx, ty = self.apply(inner.tx, inner.ty)
        return Pose(tx, ty, self.angle + inner.angle)


IDENTITY = Pose(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class UnitSquarePlacement:
    pose: Pose

    def corners(self):
        return square_corners(self.pose)


def square_corners(pose: Pose) -> list[tuple[float, float]]:
    """Counterclockwise corners of the unit square under `pose`."""
    c = math.cos(pose.angle)
    s = math.sin(pose.angle)
    tx, ty = pose.tx, pose.ty
    return [
        (tx, ty),
        (tx + c, ty + s),
        (tx + c - s, ty + s + c),
        (tx - s, ty + c),
    ]


def fold_square_pose(pose: Pose) -> Pose:
    """Equivalent pose for the same square with angle folded into [-pi/2, pi/2].

    A square is invariant under quarter turns; folding relabels which corner
    is the base point.
    """
    tx, ty, a = pose.tx, pose.ty, pose.angle
    while a > math.pi / 2 + 1e-15:
        a -= math.pi / 2
        tx -= math.cos(a)
        ty -= math.sin(a)
    while a < -math.pi / 2 - 1e-15:
        a += math.pi / 2
        tx += math.sin(a)
        ty -= math.cos(a)
    return Pose(tx, ty, a)


def _polygon_area(poly) -> float:
    n = len(poly)
    acc = 0.0
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        acc += x1 * y2 - x2 * y1
    return 0.5 * acc


def _shrink_toward_centroid(poly, tau: float):
    cx = sum(p[0] for p in poly) / len(poly)
    cy = sum(p[1] for p in poly) / len(poly)
    out = []
    for x, y in poly:
        dx = cx - x
        dy = cy - y
        d = math.hypot(dx, dy)
        if d <= tau:
            out.append((cx, cy))
        else:
            out.append((x + tau * dx / d, y + tau * dy / d))
    return out


def quads_disjoint(q1, q2, tau: float) -> bool:
    """True iff the quads' interiors, each shrunk by tau, do not intersect.

    Separating-axis test over the 8 edge normals. Convex counterclockwise
    quads expected; touching edges count as disjoint for any tau > 0.
    """
    a = _shrink_toward_centroid(q1, tau)
    b = _shrink_toward_centroid(q2, tau)
    for poly in (a, b):
        for i in range(4):
            x1, y1 = poly[i]
            x2, y2 = poly[(i + 1) % 4]
            nx, ny = y2 - y1, x1 - x2
            norm = math.hypot(nx, ny)
            if norm == 0.0:
                continue
            nx /= norm
            ny /= norm
            amin = min(nx * p[0] + ny * p[1] for p in a)
            amax = max(nx * p[0] + ny * p[1] for p in a)
            bmin = min(nx * p[0] + ny * p[1] for p in b)
            bmax = max(nx * p[0] + ny * p[1] for p in b)
            if amax <= bmin or bmax <= amin:
                return True
    return False


@dataclass(frozen=True)
class Region:
    """Rectangle, right trapezoid or right triangle with a world frame.

    Local shapes (counterclockwise):
      rect: (0,0) (w,0) (w,h) (0,h)
      trap: (0,0) (a_bot,0) (a_top,h) (0,h)   -- vertical left side, slant right,
            a_bot >= a_top (the top is the narrow parallel edge)
      tri:  (0,0) (u,0) (0,v)                 -- right angle at the origin

    `mirror` reflects the local shape across x = 0 before the frame is
    applied; a mirrored right trapezoid is not a rotation of the canonical
    one, so the flag is required to place both chiralities.
    """

    kind: str
    dims: tuple
    frame: Pose = IDENTITY
    mirror: bool = False

    def local_polygon(self) -> list[tuple[float, float]]:
        if self.kind == "rect":
            w, h = self.dims
            poly = [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)]
        elif self.kind == "trap":
            h, a_top, a_bot = self.dims
            poly = [(0.0, 0.0), (a_bot, 0.0), (a_top, h), (0.0, h)]
        elif self.kind == "tri":
            u, v = self.dims
            poly = [(0.0, 0.0), (u, 0.0), (0.0, v)]
        else:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.mirror:
            poly = [(-x, y) for x, y in reversed(poly)]
        return poly

    def polygon(self) -> list[tuple[float, float]]:
        return [self.frame.apply(x, y) for x, y in self.local_polygon()]


def rect_region(w: float, h: float, frame: Pose = IDENTITY,
                mirror: bool = False) -> Region:
    if w <= 0 or h <= 0:
        raise ValueError(f"rect dims must be positive, got {w} x {h}")
    return Region("rect", (float(w), float(h)), frame, mirror)


def trap_region(h: float, a_top: float, a_bot: float, frame: Pose = IDENTITY,
                mirror: bool = False) -> Region:
    if h <= 0 or a_bot <= 0 or a_top < 0 or a_bot + 1e-12 < a_top:
        raise ValueError(f"bad trapezoid dims h={h} top={a_top} bot={a_bot}")
    return Region("trap", (float(h), float(a_top), float(a_bot)), frame, mirror)


def tri_region(u: float, v: float, frame: Pose = IDENTITY,
               mirror: bool = False) -> Region:
    if u <= 0 or v <= 0:
        raise ValueError(f"triangle legs must be positive, got {u}, {v}")
    return Region("tri", (float(u), float(v)), frame, mirror)


def region_area(region: Region) -> float:
    if region.kind == "rect":
        w, h = region.dims
        return w * h
    if region.kind == "trap":
        h, a_top, a_bot = region.dims
        return h * (a_top + a_bot) / 2.0
    if region.kind == "tri":
        u, v = region.dims
        return u * v / 2.0
    raise ValueError(f"unknown region kind {region.kind!r}")


def point_in_region(region: Region, p: tuple[float, float], tau: float) -> bool:
    """Membership with a signed tolerance: tau > 0 inflates, tau < 0 deflates."""
    x, y = region.frame.invert_apply(p[0], p[1])
    if region.mirror:
        x = -x
    if region.kind == "rect":
        w, h = region.dims
        return -tau <= x <= w + tau and -tau <= y <= h + tau
    if region.kind == "trap":
        h, a_top, a_bot = region.dims
        if x < -tau or y < -tau or y > h + tau:
            return False
        ex, ey = a_top - a_bot, h
        norm = math.hypot(ex, ey)
        # outward normal of the slant edge (a_bot,0) -> (a_top,h)
        return (ey * (x - a_bot) - ex * y) / norm <= tau
    if region.kind == "tri":
        u, v = region.dims
        if x < -tau or y < -tau:
            return False
        norm = math.hypot(u, v)
        return (v * (x - u) + u * y) / norm <= tau
    raise ValueError(f"unknown region kind {region.kind!r}")
