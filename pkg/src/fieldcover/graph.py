"""Transition graph over headland and lanes with trace-constrained routing.

Routing respects established tyre traces: the vehicle may pass straight
through any headland node, but it can only switch between a lane and the
headland through a turn arc that the coverage plan created.  Arcs are usable
in both directions and U-turns on an edge are not allowed.

Edge weights are path lengths including turning-radius effects: each
lane/headland junction is a quarter circle of radius ``R`` (so a full lane
costs ``L0 - 4R + 2C`` with ``C = pi R / 2``) and headland corners are
rounded with the same radius.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, Optional, Tuple, Union

import numpy as np

from .errors import PlanFieldMismatch, Unreachable
from .field import NormalizedField, fillet_corrections

HEADLAND = "headland"
LANE = "lane"

_KEY_DIGITS = 9


@dataclass(frozen=True)
class Edge:
    id: int
    u: int
    v: int
    kind: str
    weight: float
    length: float  # geometric node-to-node length without turn corrections
    lane: Optional[int] = None
    arc_length: float = 0.0  # lanes: headland-to-headland path incl. both arcs

    def other(self, node: int) -> int:
        return self.v if node == self.u else self.u

    def direction_from(self, node: int) -> int:
        return 1 if node == self.u else -1

    def head(self, direction: int) -> int:
        return self.v if direction > 0 else self.u


@dataclass(frozen=True)
class Position:
    """A point on the network.

    For headland edges ``t`` is the path length from ``edge.u``; for lanes it
    is the fraction ``p`` of the lane path measured from the lower end.
    ``heading`` is +1 for travel towards ``edge.v``, -1 towards ``edge.u`` and
    ``None`` when either direction is acceptable.
    """

    edge: int
    t: float
    heading: Optional[int] = None


Endpoint = Union[int, Position]


@dataclass(frozen=True)
class RouteStep:
    edge: int
    direction: int
    cost: float


@dataclass(frozen=True)
class RoutePath:
    steps: Tuple[RouteStep, ...]
    nodes: Tuple[int, ...]
    length: float

    @property
    def edges(self) -> Tuple[int, ...]:
        return tuple(s.edge for s in self.steps)

    def uses_edge(self, edge_id: int) -> bool:
        return any(s.edge == edge_id for s in self.steps)


@dataclass(frozen=True)
class TransitionGraph:
    n_lanes: int
    nodes: Dict[int, Tuple[float, float]] = field(repr=False)
    edges: Tuple[Edge, ...] = field(repr=False)
    ring: Tuple[int, ...]
    turning_radius: float
    geometry: Dict[int, np.ndarray] = field(repr=False, compare=False)
    arcs: FrozenSet[Tuple[int, int, int]] = frozenset()
    disabled: FrozenSet[int] = frozenset()
    exit_node: int = 0

    # ---- lookups -------------------------------------------------------
    @property
    def n_headland_edges(self) -> int:
        return len(self.ring)

    @property
    def signature(self) -> tuple:
        return (self.n_lanes, tuple(round(e.weight, 6) for e in self.edges))

    def incident(self, node: int) -> Tuple[int, ...]:
        return _incidence(self)[node]

    def next_edge(self, node: int) -> int:
        """Headland edge leaving ``node`` counter-clockwise."""
        return _ring_maps(self)[0][node]

    def prev_edge(self, node: int) -> int:
        """Headland edge arriving at ``node`` counter-clockwise."""
        return _ring_maps(self)[1][node]

    def lane_edge(self, lane: int) -> int:
        return self.n_headland_edges + lane - 1

    def headland_edge_from(self, node: int) -> int:
        return self.next_edge(node)

    def edge_between(self, a: int, b: int) -> int:
        for eid in self.incident(a):
            if self.edges[eid].other(a) == b:
                return eid
        raise KeyError((a, b))

    def lane_of_node(self, node: int) -> Optional[int]:
        for eid in self.incident(node):
            if self.edges[eid].kind == LANE:
                return eid
        return None

    def has_arc_at(self, node: int, lane_eid: int) -> bool:
        return any(a[0] == node and a[1] == lane_eid for a in self.arcs)

    def portion(self, eid: int) -> str:
        """Headland portion of an edge: upper, left, lower or right."""
        e = self.edges[eid]
        if e.kind == LANE:
            return LANE
        return _portions(self)[eid]

    def without_edges(self, edge_ids: Iterable[int]) -> "TransitionGraph":
        return replace(self, disabled=self.disabled | frozenset(edge_ids))

    def point(self, pos: Position) -> np.ndarray:
        """Planning-frame coordinates of a network position."""
        e = self.edges[pos.edge]
        if e.kind == LANE:
            a, b = np.asarray(self.nodes[e.u]), np.asarray(self.nodes[e.v])
            return a + pos.t * (b - a)
        pts = self.geometry[e.id]
        frac = 0.0 if e.weight == 0 else min(max(pos.t / e.weight, 0.0), 1.0)
        d = np.diff(pts, axis=0)
        cum = np.concatenate([[0.0], np.cumsum(np.hypot(d[:, 0], d[:, 1]))])
        s = frac * cum[-1]
        i = int(min(np.searchsorted(cum, s, side="right") - 1, len(d) - 1))
        if cum[i + 1] == cum[i]:
            return pts[i]
        return pts[i] + (s - cum[i]) / (cum[i + 1] - cum[i]) * d[i]

    def cost_from_position(self, pos: Position, node: int) -> float:
        """Path length from ``pos`` to an end node of its edge (no U-turns)."""
        e = self.edges[pos.edge]
        if e.kind == LANE:
            r = self.turning_radius
            frac = pos.t if node == e.u else 1.0 - pos.t
            return frac * e.arc_length - r
        return pos.t if node == e.u else e.weight - pos.t

    def midpoint(self, eid: int, heading: Optional[int] = None) -> Position:
        e = self.edges[eid]
        return Position(eid, 0.5 if e.kind == LANE else 0.5 * e.weight, heading)


_INCIDENCE_CACHE: dict = {}
_RING_CACHE: dict = {}
_PORTION_CACHE: dict = {}


def _incidence(g: TransitionGraph):
    key = id(g.edges)
    hit = _INCIDENCE_CACHE.get(key)
    if hit is None or hit[0] is not g.edges:
        inc: Dict[int, list] = {k: [] for k in g.nodes}
        for e in g.edges:
            inc[e.u].append(e.id)
            inc[e.v].append(e.id)
        hit = (g.edges, {k: tuple(v) for k, v in inc.items()})
        _INCIDENCE_CACHE[key] = hit
    return hit[1]


def _ring_maps(g: TransitionGraph):
    key = id(g.edges)
    hit = _RING_CACHE.get(key)
    if hit is None or hit[0] is not g.edges:
        nxt, prv = {}, {}
        for e in g.edges[: len(g.ring)]:
            nxt[e.u] = e.id
            prv[e.v] = e.id
        hit = (g.edges, (nxt, prv))
        _RING_CACHE[key] = hit
    return hit[1]


def _portions(g: TransitionGraph):
    key = id(g.edges)
    hit = _PORTION_CACHE.get(key)
    if hit is None or hit[0] is not g.edges:
        n = g.n_lanes
        starts = {}
        # later entries win where portions degenerate (single lane)
        for node, name in ((2 * n, "upper"), (1, "lower"), (n, "right"), (n + 1, "left")):
            starts[node] = name
        m = len(g.ring)
        cur = None
        for i in range(2 * m):
            cur = starts.get(g.ring[i % m], cur)
        out = {}
        for i in range(m):
            cur = starts.get(g.ring[i], cur)
            out[i] = cur
        hit = (g.edges, out)
        _PORTION_CACHE[key] = hit
    return hit[1]


def quarter_arc(radius: float) -> float:
    return radius * math.pi / 2.0


def build_graph(nf: NormalizedField) -> TransitionGraph:
    """Split the headland at all nodes and add one edge per lane; no traces yet."""
    n = nf.n_lanes
    r = nf.turning_radius
    total = nf.perimeter
    s0 = nf.node_s[0]
    # ring order counter-clockwise starting at the entrance
    ring_nodes = [k for k in nf.node_s if k != 0]
    ring_nodes.sort(key=lambda k: ((nf.node_s[k] - s0) % total, k))
    ring = (0, *ring_nodes)
    rel = {k: (nf.node_s[k] - s0) % total for k in ring}
    corners = [((sv - s0) % total, dv) for sv, dv in fillet_corrections(nf.headland, r)]

    nodes = {k: tuple(map(float, nf.node_xy[k])) for k in ring}
    edges = []
    geometry = {}
    m = len(ring)
    for idx in range(m):
        a = ring[idx]
        b = ring[(idx + 1) % m]
        sa = rel[a]
        sb = rel[b] if idx + 1 < m else total
        raw = sb - sa
        corr = sum(dv for sv, dv in corners if sa < sv <= sb or (sv == 0.0 and sb == total))
        weight = raw + corr
        edges.append(Edge(idx, a, b, HEADLAND, weight, raw))
        geometry[idx] = _ring_slice(nf, s0 + sa, s0 + sb)
    c = quarter_arc(r)
    for i in range(1, n + 1):
        lo, hi = nf.lanes[i - 1]
        l0 = float(np.hypot(*(hi - lo)))
        arc_len = l0 - 2.0 * r + 2.0 * c
        eid = len(edges)
        edges.append(Edge(eid, i, n + i, LANE, arc_len - 2.0 * r, l0, lane=i, arc_length=arc_len))
        geometry[eid] = np.array([lo, hi], dtype=float)
    return TransitionGraph(
        n_lanes=n,
        nodes=nodes,
        edges=tuple(edges),
        ring=ring,
        turning_radius=r,
        geometry=geometry,
        exit_node=nf.exit_node(),
    )


def _ring_slice(nf: NormalizedField, sa: float, sb: float) -> np.ndarray:
    total = nf.perimeter
    ring = nf.headland
    d = np.diff(ring, axis=0)
    cum = np.concatenate([[0.0], np.cumsum(np.hypot(d[:, 0], d[:, 1]))])
    pts = [nf.point_at(sa)]
    # walk vertex arc-lengths, unrolled over at most two laps
    for lap in (0.0, total):
        for k in range(1, len(cum) - 1):
            sv = cum[k] + lap
            if sa < sv < sb:
                pts.append(ring[k])
    pts.append(nf.point_at(sb))
    return np.asarray(pts, dtype=float)


def establish_traces(g: TransitionGraph, plan) -> TransitionGraph:
    """Return a copy of ``g`` whose admissible turn arcs are those of ``plan``."""
    if plan.signature != g.signature:
        raise PlanFieldMismatch("plan was generated for a different field")
    return replace(g, arcs=frozenset(plan.arcs))


def admissible(g: TransitionGraph, node: int, e_in: int, e_out: int) -> bool:
    if e_in == e_out:
        return False
    a, b = g.edges[e_in], g.edges[e_out]
    if a.kind == HEADLAND and b.kind == HEADLAND:
        return True
    if a.kind == LANE and b.kind == HEADLAND:
        return (node, e_in, e_out) in g.arcs
    if a.kind == HEADLAND and b.kind == LANE:
        return (node, e_out, e_in) in g.arcs
    return False


def _key(length: float, n_edges: int, nodes: tuple):
    return (round(length, _KEY_DIGITS), n_edges, nodes)


def _endpoint_node_ok(g: TransitionGraph, node: int, eid: int) -> bool:
    """A node endpoint is a headland point: lanes need an arc to reach it."""
    e = g.edges[eid]
    return e.kind == HEADLAND or g.has_arc_at(node, eid)


def shortest_path(g: TransitionGraph, src: Endpoint, dst: Endpoint) -> RoutePath:
    """Minimum-length admissible route between two network endpoints.

    Endpoints are node ids or :class:`Position` objects.  Ties are broken by
    fewer edges, then by the lexicographically smallest node sequence.
    """
    if isinstance(src, int) and isinstance(dst, int) and src == dst:
        return RoutePath((), (src,), 0.0)
    if isinstance(src, Position) and isinstance(dst, Position) and src == dst:
        return RoutePath((), (), 0.0)

    live = [e for e in g.edges if e.id not in g.disabled]
    # state (edge, direction) -> (key, length, steps, nodes)
    best: Dict[Tuple[int, int], tuple] = {}
    heap = []

    def push(state, length, steps, nodes):
        k = _key(length, len(steps), nodes)
        cur = best.get(state)
        if cur is None or k < cur[0]:
            best[state] = (k, length, steps, nodes)
            heapq.heappush(heap, (k, state))

    virtual = set()
    if isinstance(src, int):
        # virtual arrivals from both headland sides of the start node
        for eid in g.incident(src):
            e = g.edges[eid]
            if e.kind == HEADLAND and eid not in g.disabled:
                state = (eid, e.direction_from(e.other(src)))
                virtual.add(state)
                push(state, 0.0, (), (src,))
    else:
        e = g.edges[src.edge]
        for d in _headings(src.heading):
            head = e.head(d)
            cost = g.cost_from_position(src, head)
            push((e.id, d), cost, (RouteStep(e.id, d, cost),), (head,))

    done = set()
    while heap:
        k, state = heapq.heappop(heap)
        if state in done or best[state][0] != k:
            continue
        done.add(state)
        _, length, steps, nodes = best[state]
        eid, d = state
        node = g.edges[eid].head(d)
        for nid in g.incident(node):
            if nid in g.disabled:
                continue
            if state in virtual:
                if not _virtual_ok(g, node, eid, nid):
                    continue
            elif not admissible(g, node, eid, nid):
                continue
            ne = g.edges[nid]
            nd = ne.direction_from(node)
            nxt = (nid, nd)
            if nxt in virtual:
                continue
            push(nxt, length + ne.weight, steps + (RouteStep(nid, nd, ne.weight),),
                 nodes + (ne.head(nd),))

    candidates = []
    if isinstance(src, Position) and isinstance(dst, Position) and src.edge == dst.edge:
        e = g.edges[src.edge]
        for d in _headings(src.heading):
            if dst.heading is not None and dst.heading != d:
                continue
            dt = (dst.t - src.t) * d
            if dt < 0:
                continue
            cost = dt * (e.arc_length if e.kind == LANE else 1.0)
            candidates.append((_key(cost, 1, ()), cost, (RouteStep(e.id, d, cost),), ()))

    for state, (k, length, steps, nodes) in best.items():
        if state in virtual:
            continue
        eid, d = state
        node = g.edges[eid].head(d)
        if isinstance(dst, int):
            if node == dst and _endpoint_node_ok(g, dst, eid):
                candidates.append((k, length, steps, nodes))
            continue
        f = g.edges[dst.edge]
        if node not in (f.u, f.v) or f.id in g.disabled:
            continue
        if not admissible(g, node, eid, f.id):
            continue
        fd = f.direction_from(node)
        if dst.heading is not None and fd != dst.heading:
            continue
        leg = g.cost_from_position(dst, node)
        total = length + leg
        st = steps + (RouteStep(f.id, fd, leg),)
        candidates.append((_key(total, len(st), nodes), total, st, nodes))
    if isinstance(src, int) and isinstance(dst, Position):
        f = g.edges[dst.edge]
        if src in (f.u, f.v) and _endpoint_node_ok(g, src, f.id):
            fd = f.direction_from(src)
            if dst.heading is None or dst.heading == fd:
                leg = g.cost_from_position(dst, src)
                candidates.append((_key(leg, 1, (src,)), leg, (RouteStep(f.id, fd, leg),), (src,)))
    if not candidates:
        raise Unreachable(f"no admissible route from {src!r} to {dst!r}")
    _, length, steps, nodes = min(candidates, key=lambda c: c[0])
    return RoutePath(tuple(steps), tuple(nodes), length)


def _virtual_ok(g: TransitionGraph, node: int, e_in: int, e_out: int) -> bool:
    # leaving a node endpoint: along the headland freely, into a lane via any arc
    if e_in == e_out:
        return False
    return _endpoint_node_ok(g, node, e_out)


def _headings(h):
    return (1, -1) if h is None else (h,)


def dump_graph(g: TransitionGraph) -> str:
    """Plain-text adjacency listing, stable across runs."""
    lines = [f"# transition graph: {g.n_lanes} lanes, {len(g.nodes)} nodes, {len(g.edges)} edges"]
    for k in sorted(g.nodes):
        x, y = g.nodes[k]
        adj = " ".join(
            f"{g.edges[e].other(k)}:{g.edges[e].weight:.6f}" for e in sorted(g.incident(k))
        )
        lines.append(f"node {k} {x:.6f} {y:.6f} | {adj}")
    for e in g.edges:
        lines.append(f"edge {e.id} {e.u} {e.v} {e.kind} {e.weight:.6f}")
    for node, lane, side in sorted(g.arcs):
        lines.append(f"arc {node} lane_edge={lane} headland_edge={side}")
    return "\n".join(lines) + "\n"
