import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fieldcover.errors import (
    DegenerateField,
    EntranceOffHeadland,
    InterruptedLane,
    InvalidField,
)
from fieldcover.field import (
    Z0_1,
    Z0_2,
    FieldSpec,
    TransformChain,
    denormalize,
    fillet_corrections,
    generate_skeleton,
    normalize,
)
from fieldcover.oracle import make_rect_field

SQUARE = ((0, 0), (100, 0), (100, 100), (0, 100))


def square(**kw):
    args = dict(contour=SQUARE, entrance=(30, 95), theta=math.pi / 2, operating_width=10.0)
    args.update(kw)
    return FieldSpec(**args)


def test_contour_needs_three_vertices():
    with pytest.raises(InvalidField):
        FieldSpec(contour=((0, 0), (1, 0)), entrance=(0, 0), theta=0, operating_width=1)


def test_self_intersecting_contour_rejected():
    bowtie = ((0, 0), (10, 10), (10, 0), (0, 10))
    with pytest.raises(InvalidField):
        FieldSpec(contour=bowtie, entrance=(0, 0), theta=0, operating_width=1)


def test_nonpositive_width_rejected():
    with pytest.raises(InvalidField):
        square(operating_width=0.0)


def test_closing_vertex_dropped():
    spec = square(contour=SQUARE + ((0, 0),))
    assert len(spec.contour) == 4


def test_square_lanes_are_one_width_apart_and_inside():
    skel = generate_skeleton(square())
    assert skel.n_lanes == 8
    xs = sorted(a[1] for a, _ in skel.lanes)
    assert np.allclose(np.diff(xs), 10.0)
    # outer lanes keep one operating width to the headland path
    assert xs[0] == pytest.approx(15.0)
    assert xs[-1] == pytest.approx(85.0)


def test_rect_fixture_lane_length_and_count():
    spec = make_rect_field(500, 9, 36, 7, 10)
    skel = generate_skeleton(spec)
    assert skel.n_lanes == 9
    for a, b in skel.lanes:
        assert math.dist(a, b) == pytest.approx(500.0)


def test_interrupted_lane_detected():
    u_shape = ((0, 0), (300, 0), (300, 300), (200, 300), (200, 100), (100, 100), (100, 300), (0, 300))
    spec = FieldSpec(contour=u_shape, entrance=(5, 150), theta=0.0, operating_width=20.0)
    with pytest.raises(InterruptedLane):
        generate_skeleton(spec)


def test_degenerate_field():
    spec = FieldSpec(contour=((0, 0), (8, 0), (8, 8), (0, 8)), entrance=(4, 6), theta=0.0,
                     operating_width=10.0)
    with pytest.raises(DegenerateField):
        generate_skeleton(spec)


def test_entrance_off_headland():
    with pytest.raises(EntranceOffHeadland):
        normalize(square(entrance=(50, 50)))


def test_square_normalisation():
    nf, chain = normalize(square())
    assert nf.n_lanes == 8
    assert nf.entrance_class == Z0_2
    assert np.allclose(nf.xi, np.arange(10, 90, 10))
    assert chain.n_reflections == 0
    # headland ring is closed and counter-clockwise
    ring = nf.headland
    assert np.allclose(ring[0], ring[-1])
    area = 0.5 * np.sum(ring[:-1, 0] * ring[1:, 1] - ring[1:, 0] * ring[:-1, 1])
    assert area > 0


@pytest.mark.parametrize(
    "entrance, cls, rx, ry",
    [
        ((64, 518), Z0_1, False, False),
        ((18, 300), Z0_2, False, False),
        ((192, 518), Z0_1, True, False),
        ((234, 300), Z0_2, True, False),
        ((150, 18), Z0_1, True, True),
    ],
)
def test_reflections_bring_entrance_into_start_sets(entrance, cls, rx, ry):
    spec = dataclasses.replace(make_rect_field(500, 5, 36, 7, 10), entrance=entrance)
    nf, chain = normalize(spec)
    assert nf.entrance_class == cls
    assert (chain.reflect_x, chain.reflect_y) == (rx, ry)
    back = denormalize(chain, [nf.node_xy[0]])[0]
    assert np.allclose(back, entrance)


def test_exit_node_added_only_when_distinct():
    spec = make_rect_field(500, 5, 36, 7, 10)
    nf, _ = normalize(spec)
    assert nf.exit_node() == 0
    nf2, _ = normalize(dataclasses.replace(spec, exit=(18, 300)))
    assert nf2.exit_node() == 2 * 5 + 3
    assert 13 in nf2.node_s


def test_rect_entrance_class_is_z01():
    nf, _ = normalize(make_rect_field(500, 9, 36, 7, 10))
    assert nf.entrance_class == Z0_1
    assert nf.xi[1] - nf.xi[0] == pytest.approx(36.0)


def test_fillet_corrections_square():
    ring = np.array([(0, 0), (10, 0), (10, 10), (0, 10), (0, 0)], dtype=float)
    corr = fillet_corrections(ring, 2.0)
    assert len(corr) == 4
    for _, delta in corr:
        assert delta == pytest.approx(math.pi - 4.0)
    assert fillet_corrections(ring, 0.0) == []


@settings(max_examples=60, deadline=None)
@given(
    theta=st.floats(-math.pi, math.pi),
    tx=st.floats(-1e4, 1e4),
    ty=st.floats(-1e4, 1e4),
    rx=st.booleans(),
    ry=st.booleans(),
    pts=st.lists(st.tuples(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4)), min_size=1, max_size=8),
)
def test_transform_chain_round_trip(theta, tx, ty, rx, ry, pts):
    chain = TransformChain(theta, tx, ty, rx, 3.0, ry, -7.0)
    back = chain.inverse(chain.forward(pts))
    assert np.allclose(back, np.asarray(pts), atol=1e-6)


def test_entrance_class_boundaries():
    from fieldcover.field import _classify

    assert _classify(0.0, 50.0, 200.0) == Z0_1
    assert _classify(50.0, 50.0, 200.0) == Z0_1
    assert _classify(50.1, 50.0, 200.0) == Z0_2
    assert _classify(200.0, 50.0, 200.0) == Z0_2
    assert _classify(200.1, 50.0, 200.0) is None
