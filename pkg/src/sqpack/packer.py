"""Packing plans: non-overlapping unit squares inside a target region."""

from __future__ import annotations

from .builders import (
    BuildStats, InvalidSpec, PanelSpec, ShelfSpec, WedgeSpec,
    base_grid, build_panel, build_rect, build_shelf, build_strip, build_wedge,
    grid_fill, partition_panel, shelf_top_len,
)
from .config import PackConfig
from .geometry import Region, rect_region
from .plan import Plan, PlanNode, waste_node

__all__ = [
    "PanelSpec", "WedgeSpec", "ShelfSpec", "InvalidSpec", "BuildStats",
    "pack_square", "pack_rect", "pack_panel", "pack_strip", "pack_wedge",
    "pack_shelf", "pack_base_grid", "partition_panel", "shelf_top_len",
]


def _finish(x: float, region: Region, node: PlanNode, seams, stats: BuildStats,
            kind: str = "pack") -> Plan:
    meta = {"stats": {"max_depth": stats.max_depth,
                      "fallback_bands": stats.fallback_bands,
                      "joint_max": stats.joint_max},
            "band_tilts": [list(t) for t in stats.band_tilts]}
    return Plan(kind=kind, x=x, region=region, root=node, seams=list(seams), meta=meta)


def pack_square(x: float, cfg: PackConfig = PackConfig()) -> Plan:
    """Plan for a square target of side x."""
    if x < 1.0:
        region = rect_region(max(x, 1e-9), max(x, 1e-9))
        return _finish(x, region, waste_node(region, "target below unit size"), [],
                       BuildStats())
    stats = BuildStats()
    region = rect_region(x, x)
    if x <= cfg.base_cutoff:
        node, seams = grid_fill(x, x, "pack", label="square grid"), []
    else:
        node, seams = build_panel(PanelSpec(x, x, cfg.aspect_limit), cfg, 0, stats,
                                  "pack")
    return _finish(x, region, node, seams, stats)


def pack_rect(w: float, h: float, cfg: PackConfig = PackConfig()) -> Plan:
    stats = BuildStats()
    node, seams = build_rect(w, h, cfg, 0, stats, "pack")
    return _finish(max(w, h), rect_region(w, h), node, seams, stats)


def pack_panel(spec: PanelSpec, cfg: PackConfig = PackConfig()) -> Plan:
    stats = BuildStats()
    node, seams = build_panel(spec, cfg, 0, stats, "pack")
    return _finish(spec.length, rect_region(spec.length, spec.width), node, seams, stats)


def pack_strip(m: float, L: float, cfg: PackConfig = PackConfig()) -> Plan:
    stats = BuildStats()
    node, seams = build_strip(m, L, cfg, 0, stats, "pack")
    return _finish(m, rect_region(L, m), node, seams, stats)


def pack_wedge(spec: WedgeSpec, cfg: PackConfig = PackConfig()) -> Plan:
    stats = BuildStats()
    node, seams = build_wedge(spec, cfg, 0, stats, "pack")
    region = node.region
    plan = _finish(spec.height, region, node, seams, stats)
    return plan


def pack_shelf(spec: ShelfSpec, cfg: PackConfig = PackConfig()) -> Plan:
    if spec.mode != "pack":
        raise InvalidSpec("pack_shelf expects mode='pack'")
    stats = BuildStats()
    node, seams = build_shelf(spec, cfg, 0, stats)
    return _finish(spec.scale, node.region, node, seams, stats)


def pack_base_grid(region: Region) -> PlanNode:
    """Largest anchored grid in a rectangle, trapezoid or triangle."""
    return base_grid(region, "pack")
