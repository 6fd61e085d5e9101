"""Plan trees: region decompositions with grid, stack-run and waste leaves.

A plan is immutable once built. Accounting (areas, counts, waste/excess)
is analytic and never requires materialising placements; enumeration
expands the leaves into explicit world-frame poses when the total count
is small enough.

Node kinds:
  split   -- children tile the node's region (checked by area, not geometry)
  grid    -- rows x cols axis-aligned unit squares anchored at `origin`
  stacks  -- tilted stack runs plus leftover sub-plans; `region` may be None
             for chain nodes whose exact footprint spans several rectangles,
             in which case `area` is declared explicitly
  waste   -- region conceded by the construction (packing only)

Stack runs are arithmetic families: `count` squares step apart along the
stack, repeated `repeat` times `pitch` apart. A single run is repeat == 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose, Region, fold_square_pose, region_area

NODE_KINDS = ("split", "grid", "stacks", "waste")
AREA_RTOL = 1e-6


class PlanError(ValueError):
    pass


class OverLimit(RuntimeError):
    pass


@dataclass(frozen=True)
class StackRun:
    base: Pose
    step: tuple[float, float]
    count: int
    repeat: int = 1
    pitch: tuple[float, float] = (0.0, 0.0)
    label: str = ""

    @property
    def total(self) -> int:
        return self.count * self.repeat


@dataclass
class PlanNode:
    kind: str
    region: Region | None = None
    area: float = 0.0                      # region area, or declared area when region is None
    label: str = ""
    children: list["PlanNode"] = field(default_factory=list)
    origin: tuple[float, float] = (0.0, 0.0)
    rows: int = 0
    cols: int = 0
    runs: list[StackRun] = field(default_factory=list)
    reason: str = ""
    overshoot: list[Region] = field(default_factory=list)  # cover plans: conceded outside area
    ledger: dict = field(default_factory=dict)

    def own_count(self) -> int:
        if self.kind == "grid":
            return self.rows * self.cols
        if self.kind == "stacks":
            return sum(r.total for r in self.runs)
        return 0

    def total_count(self) -> int:
        return self.own_count() + sum(c.total_count() for c in self.children)


def split_node(region: Region | None, children: list[PlanNode], label: str = "",
               area: float | None = None) -> PlanNode:
    a = region_area(region) if region is not None else float(area)
    node = PlanNode(kind="split", region=region, area=a, label=label, children=children)
    child_sum = sum(c.area for c in children)
    if abs(child_sum - a) > AREA_RTOL * max(a, 1.0):
        raise PlanError(
            f"split children do not tile {label!r}: {child_sum} vs {a}"
        )
    return node


def grid_node(region: Region, origin: tuple[float, float], rows: int, cols: int,
              label: str = "") -> PlanNode:
    return PlanNode(kind="grid", region=region, area=region_area(region),
                    label=label, origin=origin, rows=int(rows), cols=int(cols))


def stacks_node(region: Region | None, runs: list[StackRun],
                leftovers: list[PlanNode] | None = None, label: str = "",
                area: float | None = None, overshoot: list[Region] | None = None,
                ledger: dict | None = None) -> PlanNode:
    a = region_area(region) if region is not None else float(area)
    return PlanNode(kind="stacks", region=region, area=a, label=label,
                    children=list(leftovers or []), runs=list(runs),
                    overshoot=list(overshoot or []), ledger=dict(ledger or {}))


def waste_node(region: Region, reason: str, label: str = "") -> PlanNode:
    return PlanNode(kind="waste", region=region, area=region_area(region),
                    label=label or reason, reason=reason)


@dataclass
class Plan:
    kind: str                 # "pack" | "cover"
    x: float                  # nominal scale of the target
    region: Region            # the target region
    root: PlanNode
    seams: list[tuple[float, float, float, float]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)


@dataclass
class WasteReport:
    kind: str
    x: float
    area: float
    square_count: int
    waste_or_excess: float
    per_region: list[dict] = field(default_factory=list)
    ledger: dict = field(default_factory=dict)
    bound_constant: float | None = None
    bound_exponent: float | None = None
    bound_value: float | None = None
    passed: bool | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "x": self.x,
            "area": self.area,
            "square_count": self.square_count,
            "waste_or_excess": self.waste_or_excess,
            "per_region": self.per_region,
            "ledger": self.ledger,
            "bound_constant": self.bound_constant,
            "bound_exponent": self.bound_exponent,
            "bound_value": self.bound_value,
            "passed": self.passed,
        }


def _check_node(node: PlanNode, kind: str, path: str) -> None:
    if node.kind not in NODE_KINDS:
        raise PlanError(f"{path}: unknown node kind {node.kind!r}")
    count = node.total_count()
    if kind == "pack":
        slack = node.area - count
        if slack < -AREA_RTOL * max(node.area, 1.0):
            raise PlanError(f"{path}: packing node holds {count} squares in area {node.area}")
    else:
        if node.kind == "waste":
            raise PlanError(f"{path}: covering plans cannot declare waste nodes")
    if node.kind == "split":
        child_sum = sum(c.area for c in node.children)
        if abs(child_sum - node.area) > AREA_RTOL * max(node.area, 1.0):
            raise PlanError(f"{path}: split children areas {child_sum} != {node.area}")
    for i, c in enumerate(node.children):
        _check_node(c, kind, f"{path}.{i}")


def account(plan: Plan) -> WasteReport:
    """Bottom-up analytic accounting. For packing, waste = area - count; for
    covering, excess = count - area. Conservation is asserted at every node."""
    _check_node(plan.root, plan.kind, "root")
    area = region_area(plan.region)
    count = plan.root.total_count()
    if plan.kind == "pack":
        value = area - count
    else:
        value = count - area
    if value < -AREA_RTOL * max(area, 1.0):
        raise PlanError(f"negative {plan.kind} balance: {value}")
    per = []
    for child in (plan.root.children if plan.root.kind == "split" else [plan.root]):
        c = child.total_count()
        entry = {
            "label": child.label or child.kind,
            "area": child.area,
            "count": c,
            "balance": (child.area - c) if plan.kind == "pack" else (c - child.area),
        }
        per.append(entry)
    ledger = dict(plan.root.ledger)
    ledger.update(plan.meta.get("ledger", {}))
    return WasteReport(kind=plan.kind, x=plan.x, area=area, square_count=count,
                       waste_or_excess=value, per_region=per, ledger=ledger)


@dataclass(frozen=True)
class BoundCheck:
    constant: float
    exponent: float
    bound_value: float
    passed: bool


_SQRT2 = math.sqrt(2.0)

BOUND_TABLE = {
    # region class -> (constant(c), exponent); waste <= constant * x**exponent
    "square": (lambda c: 16.0 * _SQRT2 + 38.0, 5.0 / 8.0),
    "panel": (lambda c: (15.0 + c) * _SQRT2 + 38.0, 5.0 / 8.0),
    "wedge": (lambda c: 19.0 / 2.0 + 7.0 * _SQRT2 / 2.0, 5.0 / 6.0),
    "shelf": (lambda c: 19.0 / 4.0 + 7.0 * _SQRT2 / 4.0, 1.0 / 3.0),
}


def check_bound(report: WasteReport, region_type: str, c: float = 7.0) -> BoundCheck:
    """Compare achieved waste/excess against the guaranteed growth bound."""
    if region_type not in BOUND_TABLE:
        raise PlanError(f"unknown region type {region_type!r}")
    if report.waste_or_excess < -1e-6:
        raise PlanError(f"negative waste {report.waste_or_excess} signals an accounting bug")
    const_fn, exponent = BOUND_TABLE[region_type]
    constant = const_fn(c)
    bound_value = constant * report.x ** exponent
    passed = report.waste_or_excess <= bound_value
    report.bound_constant = constant
    report.bound_exponent = exponent
    report.bound_value = bound_value
    report.passed = passed
    return BoundCheck(constant=constant, exponent=exponent,
                      bound_value=bound_value, passed=passed)


def _collect_poses(node: PlanNode, out: list[np.ndarray]) -> None:
    if node.kind == "grid" and node.rows * node.cols > 0:
        ox, oy = node.origin
        jj, ii = np.meshgrid(np.arange(node.cols), np.arange(node.rows))
        poses = np.empty((node.rows * node.cols, 3))
        poses[:, 0] = ox + jj.ravel()
        poses[:, 1] = oy + ii.ravel()
        poses[:, 2] = 0.0
        out.append(poses)
    elif node.kind == "stacks":
        for run in node.runs:
            base = fold_square_pose(run.base)
            idx = np.arange(run.count)
            rep = np.arange(run.repeat)
            ii, jj = np.meshgrid(idx, rep)
            poses = np.empty((run.total, 3))
            poses[:, 0] = base.tx + ii.ravel() * run.step[0] + jj.ravel() * run.pitch[0]
            poses[:, 1] = base.ty + ii.ravel() * run.step[1] + jj.ravel() * run.pitch[1]
            poses[:, 2] = base.angle
            out.append(poses)
    for c in node.children:
        _collect_poses(c, out)


def enumerate_placements(plan: Plan | PlanNode, limit: int = 10_000_000) -> np.ndarray:
    """Flat (N, 3) array of world poses (tx, ty, angle); N equals the
    analytic square count exactly. Raises OverLimit above `limit`."""
    root = plan.root if isinstance(plan, Plan) else plan
    count = root.total_count()
    if count > limit:
        raise OverLimit(f"plan holds {count} placements, limit {limit}")
    chunks: list[np.ndarray] = []
    _collect_poses(root, chunks)
    if not chunks:
        return np.empty((0, 3))
    poses = np.concatenate(chunks, axis=0)
    if len(poses) != count:
        raise PlanError(f"enumerated {len(poses)} != analytic {count}")
    return poses


# ---------------------------------------------------------------------------
# grafting: builders work in their own local coordinates; a finished local
# subtree is mapped into the parent's coordinates by a rigid frame plus an
# optional reflection across local x = 0. Unit squares are achiral, so a
# mirrored square placement is re-expressed as a proper rotation.

def transform_vec(frame: Pose, mirror: bool, v: tuple[float, float]) -> tuple[float, float]:
    dx, dy = (-v[0], v[1]) if mirror else v
    c = math.cos(frame.angle)
    s = math.sin(frame.angle)
    return (c * dx - s * dy, s * dx + c * dy)


def transform_pose(frame: Pose, mirror: bool, pose: Pose) -> Pose:
    if mirror:
        # reflected unit square re-anchored as a proper rotation
        pose = Pose(-pose.tx, pose.ty, math.pi / 2 - pose.angle)
    return frame.compose(pose)


def transform_region(frame: Pose, mirror: bool, region: Region) -> Region:
    rf = region.frame
    if mirror:
        new_frame = frame.compose(Pose(-rf.tx, rf.ty, -rf.angle))
        return Region(region.kind, region.dims, new_frame, not region.mirror)
    return Region(region.kind, region.dims, frame.compose(rf), region.mirror)


def _transform_grid(frame: Pose, mirror: bool, node: PlanNode) -> None:
    ox, oy = node.origin
    if mirror:
        ox = -ox - node.cols
    k = round(frame.angle / (math.pi / 2))
    if abs(frame.angle - k * math.pi / 2) > 1e-9:
        raise PlanError("grids only survive quarter-turn frames")
    p1 = frame.apply(ox, oy)
    p2 = frame.apply(ox + node.cols, oy + node.rows)
    node.origin = (min(p1[0], p2[0]), min(p1[1], p2[1]))
    if k % 2 != 0:
        node.rows, node.cols = node.cols, node.rows


def transform_node(node: PlanNode, frame: Pose, mirror: bool = False) -> PlanNode:
    """Map a local subtree into parent coordinates, in place."""
    if node.region is not None:
        node.region = transform_region(frame, mirror, node.region)
    if node.kind == "grid":
        _transform_grid(frame, mirror, node)
    elif node.kind == "stacks":
        node.runs = [
            StackRun(base=transform_pose(frame, mirror, r.base),
                     step=transform_vec(frame, mirror, r.step),
                     count=r.count, repeat=r.repeat,
                     pitch=transform_vec(frame, mirror, r.pitch),
                     label=r.label)
            for r in node.runs
        ]
        node.overshoot = [transform_region(frame, mirror, r) for r in node.overshoot]
    for c in node.children:
        transform_node(c, frame, mirror)
    return node


def transform_seams(seams, frame: Pose, mirror: bool = False):
    out = []
    for x1, y1, x2, y2 in seams:
        if mirror:
            x1, x2 = -x1, -x2
        p1 = frame.apply(x1, y1)
        p2 = frame.apply(x2, y2)
        out.append((p1[0], p1[1], p2[0], p2[1]))
    return out


# ---------------------------------------------------------------------------
# serialization (deterministic: stable key order, repr-float round trip)

def _pose_to_list(p: Pose) -> list[float]:
    return [p.tx, p.ty, p.angle]


def _region_to_dict(r: Region | None):
    if r is None:
        return None
    return {"kind": r.kind, "dims": list(r.dims), "frame": _pose_to_list(r.frame),
            "mirror": r.mirror}


def _region_from_dict(d) -> Region | None:
    if d is None:
        return None
    return Region(d["kind"], tuple(d["dims"]), Pose(*d["frame"]), bool(d["mirror"]))


def _run_to_list(r: StackRun) -> list:
    return [r.base.tx, r.base.ty, r.base.angle, r.step[0], r.step[1],
            r.count, r.repeat, r.pitch[0], r.pitch[1], r.label]


def _run_from_list(v) -> StackRun:
    return StackRun(base=Pose(v[0], v[1], v[2]), step=(v[3], v[4]), count=int(v[5]),
                    repeat=int(v[6]), pitch=(v[7], v[8]), label=v[9])


def _node_to_dict(n: PlanNode) -> dict:
    d = {"kind": n.kind, "region": _region_to_dict(n.region), "area": n.area,
         "label": n.label}
    if n.kind == "split":
        d["children"] = [_node_to_dict(c) for c in n.children]
    elif n.kind == "grid":
        d["origin"] = list(n.origin)
        d["rows"] = n.rows
        d["cols"] = n.cols
    elif n.kind == "stacks":
        d["runs"] = [_run_to_list(r) for r in n.runs]
        d["leftovers"] = [_node_to_dict(c) for c in n.children]
        d["overshoot"] = [_region_to_dict(r) for r in n.overshoot]
        d["ledger"] = n.ledger
    elif n.kind == "waste":
        d["reason"] = n.reason
    return d


def _node_from_dict(d: dict) -> PlanNode:
    kind = d["kind"]
    region = _region_from_dict(d["region"])
    node = PlanNode(kind=kind, region=region, area=d["area"], label=d["label"])
    if kind == "split":
        node.children = [_node_from_dict(c) for c in d["children"]]
    elif kind == "grid":
        node.origin = tuple(d["origin"])
        node.rows = int(d["rows"])
        node.cols = int(d["cols"])
    elif kind == "stacks":
        node.runs = [_run_from_list(v) for v in d["runs"]]
        node.children = [_node_from_dict(c) for c in d["leftovers"]]
        node.overshoot = [_region_from_dict(r) for r in d["overshoot"]]
        node.ledger = d["ledger"]
    elif kind == "waste":
        node.reason = d["reason"]
    return node


def plan_to_dict(plan: Plan) -> dict:
    return {
        "version": 1,
        "kind": plan.kind,
        "x": plan.x,
        "region": _region_to_dict(plan.region),
        "seams": [list(s) for s in plan.seams],
        "meta": plan.meta,
        "root": _node_to_dict(plan.root),
    }


def plan_from_dict(d: dict) -> Plan:
    if d.get("version") != 1:
        raise PlanError(f"unsupported plan version {d.get('version')!r}")
    return Plan(kind=d["kind"], x=d["x"], region=_region_from_dict(d["region"]),
                root=_node_from_dict(d["root"]),
                seams=[tuple(s) for s in d["seams"]], meta=d["meta"])


def dumps_stable(obj) -> str:
    """Canonical JSON: sorted keys, minimal separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def plan_to_json(plan: Plan) -> str:
    return dumps_stable(plan_to_dict(plan))


def plan_from_json(text: str) -> Plan:
    return plan_from_dict(json.loads(text))
