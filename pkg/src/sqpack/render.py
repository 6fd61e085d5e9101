"""Deterministic SVG rendering of plans.

Output is byte-stable for identical input: fixed float formatting, fixed
element order, no timestamps. Squares render as polygons; waste regions
are shaded; `outline_only` draws just the region decomposition.
"""

from __future__ import annotations

from .geometry import square_corners
from .plan import OverLimit, Plan, PlanNode, enumerate_placements

_F = "{:.6f}".format

SQUARE_STYLE = 'fill="#9ecae1" stroke="#3182bd" stroke-width="0.02"'
WASTE_STYLE = 'fill="#fcae91" stroke="#cb4335" stroke-width="0.03"'
REGION_STYLE = 'fill="none" stroke="#636363" stroke-width="0.05"'
COVER_STYLE = 'fill="#a1d99b" fill-opacity="0.55" stroke="#31a354" stroke-width="0.02"'


def _poly(points, style: str) -> str:
    pts = " ".join(f"{_F(x)},{_F(y)}" for x, y in points)
    return f'<polygon points="{pts}" {style}/>'


def _walk_regions(node: PlanNode, out: list[str]) -> None:
    if node.region is not None:
        style = WASTE_STYLE if node.kind == "waste" else REGION_STYLE
        out.append(_poly(node.region.polygon(), style))
    for child in node.children:
        _walk_regions(child, out)


def plan_to_svg(plan: Plan, outline_only: bool = False, limit: int = 200_000) -> str:
    poly = plan.region.polygon()
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    margin = 1.0
    min_x, max_x = min(xs) - margin, max(xs) + margin
    min_y, max_y = min(ys) - margin, max(ys) + margin
    w = max_x - min_x
    h = max_y - min_y

    body: list[str] = []
    body.append(_poly(poly, 'fill="#ffffff" stroke="#000000" stroke-width="0.08"'))
    if not outline_only:
        poses = enumerate_placements(plan, limit)  # raises OverLimit when too big
        style = SQUARE_STYLE if plan.kind == "pack" else COVER_STYLE
        for i in range(len(poses)):
            from .geometry import Pose
            corners = square_corners(Pose(poses[i, 0], poses[i, 1], poses[i, 2]))
            body.append(_poly(corners, style))
    _walk_regions(plan.root, body)

    # flip y so the world's up is the screen's up
    head = (
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_F(w)}" height="{_F(h)}" '
        f'viewBox="{_F(min_x)} {_F(-max_y)} {_F(w)} {_F(h)}">\n'
        f'<g transform="scale(1,-1)">\n'
    )
    return head + "\n".join(body) + "\n</g>\n</svg>\n"
