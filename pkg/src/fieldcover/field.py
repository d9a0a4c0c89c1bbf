"""Field description, headland/lane skeleton and the normalised planning frame.

Planning happens in a frame where lanes run along the ``eta`` axis and the
entrance sits on the upper-left part of the headland.  The frame is reached by
one rotation, a translation and at most two reflections; every map is recorded
so planned paths can be brought back to field coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from shapely.geometry import LineString, MultiLineString, Point, Polygon
from shapely.validation import explain_validity

from .errors import (
    DegenerateField,
    EntranceOffHeadland,
    InterruptedLane,
    InvalidField,
)

Point2 = Tuple[float, float]

SNAP_TOL = 0.5
"""Maximum distance (m) between a given entrance/exit and the headland path."""

Z0_1 = "Z0_1"
Z0_2 = "Z0_2"


@dataclass(frozen=True)
class FieldSpec:
    """Raw field description in global coordinates.

    ``theta`` is the rotation angle (rad) that maps global coordinates onto a
    frame whose vertical axis is parallel to the lanes, i.e. lanes run along
    ``(sin theta, cos theta)`` in the global frame.
    """

    contour: Tuple[Point2, ...]
    entrance: Point2
    theta: float
    operating_width: float
    turning_radius: float = 0.0
    headland_offset: Optional[float] = None
    exit: Optional[Point2] = None

    def __post_init__(self):
        contour = tuple((float(x), float(y)) for x, y in self.contour)
        if len(contour) > 1 and contour[0] == contour[-1]:
            contour = contour[:-1]
        object.__setattr__(self, "contour", contour)
        object.__setattr__(self, "entrance", _as_point(self.entrance))
        if self.exit is not None:
            object.__setattr__(self, "exit", _as_point(self.exit))
        if len(contour) < 3:
            raise InvalidField(f"contour needs at least 3 vertices, got {len(contour)}")
        poly = Polygon(contour)
        if not poly.is_valid or poly.area <= 0:
            raise InvalidField(f"contour is not a simple polygon ({explain_validity(poly)})")
        if not self.operating_width > 0:
            raise InvalidField("operating_width must be > 0")
        if not self.turning_radius >= 0:
            raise InvalidField("turning_radius must be >= 0")
        if self.headland_offset is not None and not self.headland_offset > 0:
            raise InvalidField("headland_offset must be > 0")

    @property
    def offset(self) -> float:
        if self.headland_offset is None:
            return self.operating_width / 2.0
        return self.headland_offset

    @property
    def exit_point(self) -> Point2:
        return self.entrance if self.exit is None else self.exit


def _as_point(p) -> Point2:
    x, y = p
    return (float(x), float(y))


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Skeleton:
    """Headland ring and lane segments, both in global coordinates."""

    headland: Tuple[Point2, ...]
    lanes: Tuple[Tuple[Point2, Point2], ...]

    @property
    def n_lanes(self) -> int:
        return len(self.lanes)


def generate_skeleton(spec: FieldSpec) -> Skeleton:
    """Erode the contour into a headland path and slice the interior into lanes.

    Lanes are spaced by the operating width.  The first lane is placed one
    half width inside the strip worked by the headland pass, so the headland
    path and the outermost lanes are one operating width apart.
    """
    rot = rotation_matrix(spec.theta)
    contour = np.asarray(spec.contour) @ rot.T
    poly = Polygon(contour)
    headland_poly = poly.buffer(-spec.offset, join_style="mitre", mitre_limit=50.0)
    if headland_poly.is_empty or headland_poly.geom_type != "Polygon":
        raise DegenerateField(
            f"eroding the contour by {spec.offset} m leaves no single connected interior"
        )
    w0 = spec.operating_width
    interior = headland_poly.buffer(-w0 / 2.0, join_style="mitre", mitre_limit=50.0)
    if interior.is_empty:
        raise DegenerateField("no room for interior lanes inside the headland path")
    xmin, _, xmax, _ = interior.bounds
    ymin, ymax = headland_poly.bounds[1] - 1.0, headland_poly.bounds[3] + 1.0
    lanes = []
    x = xmin + w0 / 2.0
    while x <= xmax - w0 / 2.0 + 1e-9:
        cut = LineString([(x, ymin), (x, ymax)]).intersection(headland_poly)
        pieces = _line_pieces(cut)
        if len(pieces) != 1:
            raise InterruptedLane(
                f"lane at offset {x:.3f} m crosses the field in {len(pieces)} pieces"
            )
        (a, b) = pieces[0]
        lanes.append(tuple(sorted((a, b), key=lambda p: p[1])))
        x += w0
    if not lanes:
        raise DegenerateField("interior narrower than one operating width")
    inv = rot  # points are row vectors: global = rotated @ rot
    ring = np.asarray(headland_poly.exterior.coords)[:-1] @ inv
    lanes_global = tuple(
        (tuple(np.asarray(a) @ inv), tuple(np.asarray(b) @ inv)) for a, b in lanes
    )
    return Skeleton(
        headland=tuple(map(tuple, ring)),
        lanes=tuple((tuple(map(float, a)), tuple(map(float, b))) for a, b in lanes_global),
    )


def _line_pieces(geom):
    if geom.is_empty:
        return []
    if isinstance(geom, LineString):
        parts = [geom]
    elif isinstance(geom, MultiLineString):
        parts = list(geom.geoms)
    else:
        parts = [g for g in getattr(geom, "geoms", []) if isinstance(g, LineString)]
    out = []
    for g in parts:
        if g.length <= 1e-9:
            continue
        c = list(g.coords)
        out.append((c[0], c[-1]))
    return out


@dataclass(frozen=True)
class TransformChain:
    """Global -> normalised map: rotate, translate to a zero minimum, reflect."""

    theta: float
    tx: float = 0.0
    ty: float = 0.0
    reflect_x: bool = False
    x_axis: float = 0.0
    reflect_y: bool = False
    y_axis: float = 0.0

    @property
    def n_reflections(self) -> int:
        return int(self.reflect_x) + int(self.reflect_y)

    @property
    def orientation(self) -> int:
        """+1 if the chain preserves orientation, -1 if it mirrors."""
        return -1 if self.n_reflections % 2 else 1

    def forward(self, pts) -> np.ndarray:
        p = np.atleast_2d(np.asarray(pts, dtype=float)) @ rotation_matrix(self.theta).T
        p = p + (self.tx, self.ty)
        if self.reflect_x:
            p[:, 0] = self.x_axis - (p[:, 0] - self.x_axis)
        if self.reflect_y:
            p[:, 1] = self.y_axis - (p[:, 1] - self.y_axis)
        return p

    def inverse(self, pts) -> np.ndarray:
        p = np.array(np.atleast_2d(np.asarray(pts, dtype=float)))
        if self.reflect_y:
            p[:, 1] = self.y_axis - (p[:, 1] - self.y_axis)
        if self.reflect_x:
            p[:, 0] = self.x_axis - (p[:, 0] - self.x_axis)
        p = p - (self.tx, self.ty)
        return p @ rotation_matrix(self.theta)


@dataclass(frozen=True)
class NormalizedField:
    """Field in the planning frame.

    ``headland`` is a closed counter-clockwise polyline starting (and ending)
    at the auxiliary point ``Z_M``; ``s`` of a headland point is its arc length
    from ``Z_M`` along that orientation.  Node ``i`` positions follow the usual
    labelling: ``1..N`` lower lane ends, ``N+1..2N`` upper lane ends, ``0``
    entrance, ``2N+1``/``2N+2`` the left/right side points, ``2N+3`` the exit.
    """

    headland: np.ndarray = field(repr=False)
    xi: np.ndarray
    lanes: np.ndarray = field(repr=False)  # (N, 2, 2): lower point, upper point
    node_s: dict = field(repr=False)
    node_xy: dict = field(repr=False)
    entrance_class: str
    operating_width: float
    turning_radius: float
    exit_is_entrance: bool = True

    @property
    def n_lanes(self) -> int:
        return len(self.xi)

    @property
    def perimeter(self) -> float:
        d = np.diff(self.headland, axis=0)
        return float(np.hypot(d[:, 0], d[:, 1]).sum())

    @property
    def s_m(self) -> float:
        return 0.0

    def point_at(self, s: float) -> np.ndarray:
        return _ring_point(self.headland, s % self.perimeter)

    def exit_node(self) -> int:
        return 0 if self.exit_is_entrance else 2 * self.n_lanes + 3


def _ring_point(ring: np.ndarray, s: float) -> np.ndarray:
    d = np.diff(ring, axis=0)
    seg = np.hypot(d[:, 0], d[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    i = int(np.searchsorted(cum, s, side="right") - 1)
    i = min(max(i, 0), len(seg) - 1)
    t = 0.0 if seg[i] == 0 else (s - cum[i]) / seg[i]
    return ring[i] + t * d[i]


def _ccw_ring_from(ring: np.ndarray, start: np.ndarray) -> np.ndarray:
    """Closed CCW ring re-anchored so it starts and ends at ``start``."""
    pts = np.asarray(ring, dtype=float)
    if np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    if not Polygon(pts).exterior.is_ccw:
        pts = pts[::-1]
    closed = np.vstack([pts, pts[:1]])
    line = LineString(closed)
    s0 = line.project(Point(start))
    d = np.diff(closed, axis=0)
    cum = np.concatenate([[0.0], np.cumsum(np.hypot(d[:, 0], d[:, 1]))])
    k = int(np.searchsorted(cum, s0, side="right") - 1)
    k = min(k, len(pts) - 1)
    start = np.asarray(start, dtype=float)
    rest = np.vstack([pts[k + 1 :], pts[: k + 1]])
    out = [start]
    for p in rest:
        if np.hypot(*(p - out[-1])) > 1e-12:
            out.append(p)
    if np.hypot(*(out[-1] - start)) > 1e-12:
        out.append(start)
    else:
        out[-1] = start
    return np.asarray(out)


def _classify(s0: float, s_upper1: float, s_lower1: float, tol: float = 1e-9) -> Optional[str]:
    if -tol <= s0 <= s_upper1 + tol:
        return Z0_1
    if s_upper1 - tol <= s0 <= s_lower1 + tol:
        return Z0_2
    return None


def _frame(spec: FieldSpec, skel: Skeleton, reflect_x: bool, reflect_y: bool):
    """Build the chain and normalised geometry for one reflection choice."""
    rot = rotation_matrix(spec.theta)
    ring_r = np.asarray(skel.headland) @ rot.T
    mn = ring_r.min(axis=0)
    mx = ring_r.max(axis=0)
    span = mx - mn
    chain = TransformChain(
        theta=spec.theta,
        tx=float(-mn[0]),
        ty=float(-mn[1]),
        reflect_x=reflect_x,
        x_axis=float(span[0] / 2.0),
        reflect_y=reflect_y,
        y_axis=float(span[1] / 2.0),
    )
    ring = chain.forward(skel.headland)
    lanes = []
    for a, b in skel.lanes:
        pa, pb = chain.forward([a, b])
        lo, hi = (pa, pb) if pa[1] <= pb[1] else (pb, pa)
        lanes.append((lo, hi))
    lanes.sort(key=lambda ab: ab[0][0])
    lanes = np.asarray(lanes)
    xi = lanes[:, 0, 0].copy()
    xi_m = 0.5 * (xi[0] + xi[-1])
    poly = Polygon(ring)
    cut = LineString([(xi_m, -1e9), (xi_m, 1e9)]).intersection(poly.exterior)
    etas = [p.y for p in getattr(cut, "geoms", [cut]) if isinstance(p, Point)]
    if not etas:
        raise DegenerateField("mid-lane line does not meet the headland")
    z_m = np.array([xi_m, max(etas)])
    ring = _ccw_ring_from(ring, z_m)
    return chain, ring, lanes, xi


def normalize(spec: FieldSpec, skeleton: Optional[Skeleton] = None):
    """Map the field into the planning frame.

    Returns ``(NormalizedField, TransformChain)``.  Reflection combinations
    are tried in the order none, x, y, xy and the first one that places the
    entrance in one of the two admissible start sets is kept.
    """
    skel = skeleton if skeleton is not None else generate_skeleton(spec)
    n = skel.n_lanes
    for rx, ry in ((False, False), (True, False), (False, True), (True, True)):
        chain, ring, lanes, xi = _frame(spec, skel, rx, ry)
        line = LineString(ring)
        total = line.length

        def project(p):
            return line.project(Point(p)) % total if total else 0.0

        s = {}
        for i in range(n):
            s[i + 1] = project(lanes[i, 0])
            s[n + i + 1] = project(lanes[i, 1])
        ent = chain.forward([spec.entrance])[0]
        if line.distance(Point(ent)) > SNAP_TOL:
            raise EntranceOffHeadland(
                f"entrance is {line.distance(Point(ent)):.3f} m from the headland path"
            )
        s0 = project(ent)
        if abs(s0 - total) < 1e-9:
            s0 = 0.0
        cls = _classify(s0, s[n + 1], s[1])
        if cls is None:
            continue
        s[0] = s0
        # side points split the left and right headland portions
        s[2 * n + 1] = 0.5 * (s[n + 1] + s[1])
        right_start, right_end = s[n], s[2 * n]
        if right_end < right_start:
            right_end += total
        s[2 * n + 2] = (0.5 * (right_start + right_end)) % total
        exit_is_entrance = True
        if spec.exit is not None:
            ex = chain.forward([spec.exit])[0]
            if line.distance(Point(ex)) > SNAP_TOL:
                raise EntranceOffHeadland(
                    f"exit is {line.distance(Point(ex)):.3f} m from the headland path"
                )
            se = project(ex)
            gap = min(abs(se - s0), total - abs(se - s0))
            if gap > 1e-9:
                exit_is_entrance = False
                s[2 * n + 3] = se
        xy = {k: _ring_point(ring, v) for k, v in s.items()}
        for i in range(n):
            xy[i + 1] = lanes[i, 0]
            xy[n + i + 1] = lanes[i, 1]
        nf = NormalizedField(
            headland=ring,
            xi=xi,
            lanes=lanes,
            node_s=s,
            node_xy=xy,
            entrance_class=cls,
            operating_width=spec.operating_width,
            turning_radius=spec.turning_radius,
            exit_is_entrance=exit_is_entrance,
        )
        return nf, chain
    raise EntranceOffHeadland("entrance cannot be normalised into an admissible start set")


def denormalize(chain: TransformChain, path) -> np.ndarray:
    """Bring planning-frame points back to global coordinates."""
    return chain.inverse(path)


def classify_entrance(nf: NormalizedField, s0: float) -> Optional[str]:
    n = nf.n_lanes
    return _classify(s0, nf.node_s[n + 1], nf.node_s[1])


def fillet_corrections(ring: np.ndarray, radius: float):
    """Length change of rounding every headland corner with ``radius``.

    Returns ``(s_vertex, delta)`` pairs, ``delta <= 0``.  The tangent length
    is capped at half of the shorter adjacent segment; a capped corner gets
    the correspondingly smaller radius.
    """
    if radius <= 0:
        return []
    pts = np.asarray(ring, dtype=float)
    if np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    m = len(pts)
    seg = np.roll(pts, -1, axis=0) - pts
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    out = []
    for k in range(m):
        d_in, d_out = seg[k - 1], seg[k]
        l_in, l_out = seg_len[k - 1], seg_len[k]
        if l_in == 0 or l_out == 0:
            continue
        cosang = float(np.dot(d_in, d_out) / (l_in * l_out))
        phi = math.acos(max(-1.0, min(1.0, cosang)))
        if phi < 1e-9:
            continue
        t = radius * math.tan(phi / 2.0)
        cap = 0.5 * min(l_in, l_out)
        if t > cap:
            t = cap
        r = t / math.tan(phi / 2.0)
        out.append((float(cum[k]), r * phi - 2.0 * t))
    return out
