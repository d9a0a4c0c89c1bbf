"""Closed-form path-length differences for the rectangular reference field.

All differences follow ``dD = D_ABp - D_other``: positive values mean the
other pattern is shorter.  Valid for odd ``N >= 5`` with the entrance on the
upper headland between lanes 1 and 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParams, UnsupportedCase
from .field import FieldSpec
from .planners import CIRC, CIRC_STAR, RectParams

RETURN = "return"
RESUME = "resume"
HEADLAND = "headland"
LANE = "lane"


@dataclass(frozen=True)
class EdgeClass:
    """Edge identified by context, kind and index ``j``.

    For headland edges ``j`` is the counter-clockwise start node of ``e_{j,k}``;
    for lanes it is the lane number.
    """

    context: str
    kind: str
    j: int

    def __post_init__(self):
        if self.context not in (RETURN, RESUME):
            raise InvalidParams(f"unknown context {self.context!r}")
        if self.kind not in (HEADLAND, LANE):
            raise InvalidParams(f"unknown edge kind {self.kind!r}")


def lane_path_length(rp: RectParams) -> float:
    """Headland-to-headland path of one lane including both quarter arcs."""
    r = rp.turning_radius
    return rp.lane_length - 2.0 * r + 2.0 * (math.pi * r / 2.0)


def _check(rp: RectParams):
    if rp.n_lanes % 2 == 0:
        raise UnsupportedCase("closed forms only cover an odd number of lanes")
    if rp.n_lanes < 5:
        raise UnsupportedCase("closed forms need at least 5 lanes")


def delta_return(cls: EdgeClass, rp: RectParams, p: float = 0.5) -> float:
    """Return-trip difference from a position on the edge back to the entrance."""
    _check(rp)
    n, w0, r = rp.n_lanes, rp.operating_width, rp.turning_radius
    h = lane_path_length(rp)
    j = cls.j
    if cls.kind == HEADLAND:
        if j in (0, 1, n + 1, 2 * n + 1):
            return 2 * (n - 3) * w0
        if 1 < j < n:
            return 2 * (n - j - 1) * w0 if j % 2 == 0 else 2 * (n - j - 2) * w0
        return 0.0
    if j == 1:
        return 2 * (n - 3) * w0
    if j % 2 == 0:
        return 2 * (1 - p) * h + 2 * (n - j - 1) * w0 - 2 * r
    return 2 * p * h + 2 * (n - j) * w0 - 2 * r


def delta_resume(cls: EdgeClass, rp: RectParams, p: float = 0.5) -> float:
    """Resume-trip difference from the entrance to a position on the edge."""
    _check(rp)
    n, w0, r, ql = rp.n_lanes, rp.operating_width, rp.turning_radius, rp.entrance_offset
    h = lane_path_length(rp)
    j = cls.j
    if cls.kind == HEADLAND:
        # rows are matched in order
        if 3 <= j <= n or j == 2 * n + 2:
            return -2 * ql
        if j == 2 * n + 1:
            return 0.0
        if j >= n + 2:
            if j % 2 == 0:
                return -2 * ql + (4 * n - 2 * j) * w0 - 2 * r
            return -2 * ql + (4 * n - 2 * j - 2) * w0 - 2 * r
        return 0.0
    if j == 1:
        return 0.0
    if j == 2:
        return -2 * (1 - p) * h - 2 * w0 + 2 * r
    if j % 2 == 0:
        return -2 * (1 - p) * h - 2 * w0 - 2 * ql
    return -2 * p * h - 2 * ql


def delta_single_run(method: str, n: int, w0: float) -> float:
    """Single-run length difference ``D_ABp - D_method``."""
    if n % 2 == 0:
        raise UnsupportedCase("closed forms only cover an odd number of lanes")
    if method == CIRC:
        return -(n - 1) * w0
    if method == CIRC_STAR:
        return (n - 3) * w0
    raise InvalidParams(f"no closed form for method {method!r}")


def make_rect_field(lane_length, n_lanes, operating_width, turning_radius, entrance_offset):
    """Rectangular field with ``n_lanes`` lanes of exactly ``lane_length``.

    The entrance lies on the upper headland, ``entrance_offset`` to the right
    of the first lane.
    """
    rp = RectParams(lane_length, n_lanes, operating_width, turning_radius, entrance_offset)
    if not rp.entrance_offset < rp.operating_width:
        raise InvalidParams("entrance_offset must be smaller than the operating width")
    w0 = rp.operating_width
    width = (rp.n_lanes + 2) * w0
    height = rp.lane_length + w0
    contour = ((0.0, 0.0), (width, 0.0), (width, height), (0.0, height))
    entrance = (1.5 * w0 + rp.entrance_offset, height - w0 / 2.0)
    return FieldSpec(
        contour=contour,
        entrance=entrance,
        theta=0.0,
        operating_width=w0,
        turning_radius=rp.turning_radius,
        headland_offset=w0 / 2.0,
    )
