"""Coverage patterns ABp, CIRC and CIRC*.

Every planner returns a :class:`CoveragePlan`: a closed walk on the transition
graph from the entrance node to the exit node together with the turn arcs it
establishes.  Lane headings use +1 for travelling up (lower to upper end).
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple

import numpy as np

from .errors import InvalidParams, PlanFieldMismatch, TurnInfeasible, UnsupportedCase
from .field import Z0_1, Z0_2
from .graph import HEADLAND, LANE, Position, TransitionGraph, shortest_path

ABP = "abp"
CIRC = "circ"
CIRC_STAR = "circstar"
PATTERNS = (ABP, CIRC, CIRC_STAR)


@dataclass(frozen=True)
class Step:
    edge: int
    direction: int
    cost: float
    working: bool
    kind: str


@dataclass(frozen=True)
class CoveragePlan:
    pattern: str
    entrance_class: str
    steps: Tuple[Step, ...]
    arcs: FrozenSet[Tuple[int, int, int]]
    lane_order: Tuple[int, ...]
    lane_headings: Tuple[int, ...]
    signature: tuple
    start: int = 0
    end: int = 0

    @property
    def length(self) -> float:
        return sum(s.cost for s in self.steps)

    @property
    def working_length(self) -> float:
        return sum(s.cost for s in self.steps if s.working)

    @property
    def nonworking_length(self) -> float:
        return sum(s.cost for s in self.steps if not s.working)

    def nodes(self, g: TransitionGraph) -> Tuple[int, ...]:
        out = [self.start]
        for s in self.steps:
            out.append(g.edges[s.edge].head(s.direction))
        return tuple(out)

    def edge_counts(self) -> Counter:
        """Traversal count per edge id."""
        return Counter(s.edge for s in self.steps)


@dataclass(frozen=True)
class RectParams:
    """Parameters of the rectangular reference field."""

    lane_length: float
    n_lanes: int
    operating_width: float
    turning_radius: float
    entrance_offset: float

    def __post_init__(self):
        if self.n_lanes < 1:
            raise InvalidParams("n_lanes must be >= 1")
        if not self.lane_length > 0 or not self.operating_width > 0:
            raise InvalidParams("lane_length and operating_width must be > 0")
        if self.turning_radius < 0:
            raise InvalidParams("turning_radius must be >= 0")
        if not 0 <= self.entrance_offset <= self.operating_width:
            raise InvalidParams("entrance_offset must lie between lanes 1 and 2")


class _Walk:
    def __init__(self, g: TransitionGraph):
        self.g = g
        self.node = 0
        self.arrived: Optional[int] = None
        self.steps = []
        self.arcs = set()
        self.covered = set()
        self.lanes = []
        self.headings = []

    def _take(self, eid: int, direction: int, cost: Optional[float] = None):
        e = self.g.edges[eid]
        if self.arrived is not None and self.arrived != eid:
            a = self.g.edges[self.arrived]
            if a.kind == LANE and e.kind == HEADLAND:
                self.arcs.add((self.node, a.id, eid))
            elif a.kind == HEADLAND and e.kind == LANE:
                self.arcs.add((self.node, eid, a.id))
        working = eid not in self.covered
        self.covered.add(eid)
        self.steps.append(Step(eid, direction, e.weight if cost is None else cost, working, e.kind))
        self.node = e.head(direction)
        self.arrived = eid

    def headland(self, target: int, orientation: int, full_loop: bool = False):
        """Follow the headland (+1 counter-clockwise) until ``target``."""
        first = True
        while first and full_loop or self.node != target:
            first = False
            eid = self.g.next_edge(self.node) if orientation > 0 else self.g.prev_edge(self.node)
            self._take(eid, orientation)

    def turn(self, orientation: int):
        """Leave the current lane end onto one headland edge."""
        eid = self.g.next_edge(self.node) if orientation > 0 else self.g.prev_edge(self.node)
        self._take(eid, orientation)

    def lane(self, i: int, heading: int):
        eid = self.g.lane_edge(i)
        e = self.g.edges[eid]
        start = e.u if heading > 0 else e.v
        if self.node != start:
            raise UnsupportedCase(f"walk is at node {self.node}, lane {i} starts at {start}")
        self._take(eid, heading)
        self.lanes.append(i)
        self.headings.append(heading)

    def move_to_lane(self, i: int, heading: int):
        """Headland transfer from the current lane end to the start of lane ``i``."""
        n = self.g.n_lanes
        prev = self.lanes[-1]
        at_bottom = self.node <= n
        target = i if heading > 0 else n + i
        if (target <= n) != at_bottom:
            raise UnsupportedCase("consecutive lanes must share a headland side")
        sgn = 1 if i > prev else -1
        self.headland(target, sgn if at_bottom else -sgn)

    def route_to(self, target: int):
        """Append the shortest admissible route to ``target`` given current arcs."""
        if self.node == target and self.arrived is not None and \
                self.g.edges[self.arrived].kind == HEADLAND:
            return
        g = _with_arcs(self.g, self.arcs)
        e = g.edges[self.arrived]
        d = self.steps[-1].direction
        if e.kind == LANE:
            src = Position(e.id, 1.0 if d > 0 else 0.0, d)
        else:
            src = Position(e.id, e.weight if d > 0 else 0.0, d)
        path = shortest_path(g, src, target)
        for rs in path.steps[1:]:
            self._take(rs.edge, rs.direction)

    def plan(self, pattern: str, cls: str) -> CoveragePlan:
        return CoveragePlan(
            pattern=pattern,
            entrance_class=cls,
            steps=tuple(self.steps),
            arcs=frozenset(self.arcs),
            lane_order=tuple(self.lanes),
            lane_headings=tuple(self.headings),
            signature=self.g.signature,
            start=0,
            end=self.node,
        )


def _with_arcs(g: TransitionGraph, arcs) -> TransitionGraph:
    from dataclasses import replace

    return replace(g, arcs=frozenset(arcs))


def _entrance_class(g: TransitionGraph) -> str:
    """Z0_1 if the entrance precedes the first upper lane end on the CCW ring."""
    n = g.n_lanes
    ring = g.ring
    return Z0_1 if ring.index(n + 1) < ring.index(1) else Z0_2


def _lead_in(w: _Walk, lane: int, heading: int):
    """Counter-clockwise along the headland to the start of the first lane."""
    n = w.g.n_lanes
    w.headland(lane if heading > 0 else n + lane, +1)


def plan_abp(g: TransitionGraph, entrance_class: Optional[str] = None) -> CoveragePlan:
    """Headland loop, then lanes 1..N back and forth, then return to the exit."""
    cls = entrance_class or _entrance_class(g)
    n = g.n_lanes
    w = _Walk(g)
    w.headland(0, +1, full_loop=True)
    heading = -1 if cls == Z0_1 else 1
    _lead_in(w, 1, heading)
    w.lane(1, heading)
    for i in range(2, n + 1):
        heading = -heading
        w.move_to_lane(i, heading)
        w.lane(i, heading)
    at_bottom = w.node <= n
    w.turn(-1 if at_bottom else +1)
    w.route_to(g.exit_node)
    return w.plan(ABP, cls)


def circ_lane_order(n: int, cls: str) -> Tuple[int, ...]:
    if cls == Z0_1:
        order = [1]
        k = 3
        while k <= n:
            order += [k, k - 1]
            k += 2
        if n % 2 == 0 and n > 1:
            order.append(n)
    else:
        order = []
        k = 2
        while k <= n:
            order += [k, k - 1]
            k += 2
        if n % 2 == 1:
            order.append(n)
    return tuple(order)


def plan_circ(g: TransitionGraph, entrance_class: Optional[str] = None) -> CoveragePlan:
    """Headland loop, then lanes in pairs travelled as small circles."""
    cls = entrance_class or _entrance_class(g)
    n = g.n_lanes
    w = _Walk(g)
    w.headland(0, +1, full_loop=True)
    order = circ_lane_order(n, cls)
    heading = -1 if cls == Z0_1 else 1
    _lead_in(w, order[0], heading)
    w.lane(order[0], heading)
    for i in order[1:]:
        heading = -heading
        w.move_to_lane(i, heading)
        w.lane(i, heading)
    w.turn(+1)
    w.route_to(g.exit_node)
    return w.plan(CIRC, cls)


def plan_circ_star(g: TransitionGraph, entrance_class: Optional[str] = None) -> CoveragePlan:
    """Lane pairs as circles first; the headland is covered on the way out."""
    cls = entrance_class or _entrance_class(g)
    n = g.n_lanes
    w = _Walk(g)
    _lead_in(w, 2 if n >= 2 else 1, +1)
    k = 2
    while k <= n:
        if w.lanes:
            w.move_to_lane(k, +1)
        w.lane(k, +1)
        w.move_to_lane(k - 1, -1)
        w.lane(k - 1, -1)
        k += 2
    if n % 2 == 1:
        # last lane is reached over the right side and worked downwards
        w.headland(2 * n, +1)
        w.lane(n, -1)
    w.headland(0, +1)
    if g.exit_node != 0:
        w.route_to(g.exit_node)
    return w.plan(CIRC_STAR, cls)


PLANNERS = {ABP: plan_abp, CIRC: plan_circ, CIRC_STAR: plan_circ_star}


def make_plan(g: TransitionGraph, pattern: str) -> CoveragePlan:
    try:
        planner = PLANNERS[pattern]
    except KeyError:
        raise InvalidParams(f"unknown pattern {pattern!r}; choose from {', '.join(PATTERNS)}")
    return planner(g)


@dataclass(frozen=True)
class Segment:
    index: int
    kind: str  # headland, lane or turn-arc
    working: bool
    x0: float
    y0: float
    x1: float
    y1: float
    length: float
    cx: Optional[float] = None
    cy: Optional[float] = None
    radius: Optional[float] = None
    sweep: Optional[float] = None  # signed angle (rad), positive counter-clockwise


SEGMENT_FIELDS = ("index", "kind", "working", "x0", "y0", "x1", "y1",
                  "cx", "cy", "radius", "sweep", "length")

_GEOM_EPS = 1e-9


def _walk_polyline(g: TransitionGraph, plan: CoveragePlan):
    """Corner points of the walk and, per leg, (kind, working, is_junction_end)."""
    pts = [np.asarray(g.nodes[plan.start], dtype=float)]
    legs = []
    for st in plan.steps:
        geom = g.geometry[st.edge]
        if st.direction < 0:
            geom = geom[::-1]
        for p in geom[1:]:
            p = np.asarray(p, dtype=float)
            if np.hypot(*(p - pts[-1])) <= _GEOM_EPS:
                continue
            pts.append(p)
            legs.append((st.kind, st.working))
    return pts, legs


def realize_geometry(plan: CoveragePlan, g: TransitionGraph, chain=None):
    """Render the plan as straight segments and circular turn arcs.

    Every corner of the walk is rounded with the turning radius.  Headland
    corners that are too tight get a smaller radius; a turn between adjacent
    lanes that cannot fit two arcs raises :class:`TurnInfeasible`.  With a
    transform chain the segments are returned in field coordinates.
    """
    if plan.signature != g.signature:
        raise PlanFieldMismatch("plan was generated for a different field")
    r = g.turning_radius
    pts, legs = _walk_polyline(g, plan)
    m = len(legs)
    d = [pts[i + 1] - pts[i] for i in range(m)]
    ln = [float(np.hypot(*v)) for v in d]
    u = [v / l for v, l in zip(d, ln)]
    # tangent length, radius and turn angle at interior vertices 1..m-1
    tan_len = [0.0] * (m + 1)
    rad = [0.0] * (m + 1)
    ang = [0.0] * (m + 1)
    for i in range(1, m):
        cross = u[i - 1][0] * u[i][1] - u[i - 1][1] * u[i][0]
        dot = float(np.dot(u[i - 1], u[i]))
        phi = math.atan2(cross, dot)
        if abs(phi) < 1e-9 or r <= 0:
            continue
        ang[i] = phi
        rad[i] = r
        tan_len[i] = r * math.tan(abs(phi) / 2.0)
    for i in range(m):
        a, b = tan_len[i], tan_len[i + 1]
        lane_turn = 0 < i < m - 1 and legs[i - 1][0] == LANE and legs[i + 1][0] == LANE
        # an adjacent-lane turn needs a straight of positive length between its arcs
        if lane_turn and r > 0 and a + b >= ln[i] - _GEOM_EPS:
            raise TurnInfeasible(
                f"turn between adjacent lanes needs more than {a + b:.3f} m, "
                f"only {ln[i]:.3f} m available"
            )
        if a + b <= ln[i] + _GEOM_EPS:
            continue
        for k in (i, i + 1):
            cap = 0.5 * ln[i]
            if tan_len[k] > cap:
                tan_len[k] = cap
                rad[k] = cap / math.tan(abs(ang[k]) / 2.0)
    for i in range(1, m):
        if legs[i - 1][0] == LANE and legs[i][0] == LANE:
            raise TurnInfeasible("walk passes directly from one lane into another")

    raw = []
    for i in range(m):
        start = pts[i] + tan_len[i] * u[i]
        end = pts[i + 1] - tan_len[i + 1] * u[i]
        seg_len = ln[i] - tan_len[i] - tan_len[i + 1]
        raw.append((legs[i][0], legs[i][1], start, end, max(seg_len, 0.0), None))
        k = i + 1
        if k < m and tan_len[k] > 0:
            phi = ang[k]
            normal = np.array([-u[i][1], u[i][0]]) * (1.0 if phi > 0 else -1.0)
            center = end + rad[k] * normal
            arc_end = pts[k] + tan_len[k] * u[k]
            working = _arc_working(legs[i], legs[k])
            raw.append(("turn-arc", working, end, arc_end, rad[k] * abs(phi),
                        (center, rad[k], phi)))

    orient = 1 if chain is None else chain.orientation
    out = []
    for kind, working, p0, p1, length, arc in raw:
        if arc is None and length <= _GEOM_EPS and r > 0:
            continue
        if chain is not None:
            p0, p1 = chain.inverse([p0, p1])
        extra = {}
        if arc is not None:
            center, radius, phi = arc
            if chain is not None:
                center = chain.inverse([center])[0]
            extra = dict(cx=float(center[0]), cy=float(center[1]), radius=float(radius),
                         sweep=float(phi) * orient)
        out.append(Segment(len(out), kind, bool(working), float(p0[0]), float(p0[1]),
                           float(p1[0]), float(p1[1]), float(length), **extra))
    return out


def _arc_working(before, after) -> bool:
    if after[0] == LANE:
        return after[1]
    return before[1]


def geometry_length(segments) -> float:
    return sum(s.length for s in segments)


def write_segments_csv(segments, fh):
    import csv

    w = csv.writer(fh)
    w.writerow(SEGMENT_FIELDS)
    for s in segments:
        row = []
        for k in SEGMENT_FIELDS:
            v = getattr(s, k)
            if v is None:
                row.append("")
            elif isinstance(v, bool):
                row.append(int(v))
            elif isinstance(v, float):
                row.append(repr(v))
            else:
                row.append(v)
        w.writerow(row)
