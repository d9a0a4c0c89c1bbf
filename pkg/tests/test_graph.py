import math

import pytest

from conftest import rect_graph
from fieldcover.errors import PlanFieldMismatch, Unreachable
from fieldcover.graph import (
    HEADLAND,
    LANE,
    Position,
    admissible,
    dump_graph,
    establish_traces,
    shortest_path,
)
from fieldcover.planners import plan_abp, plan_circ


def test_node_and_edge_counts():
    g, _, _ = rect_graph(3)
    # nodes 0..2N+2, one headland edge per ring node, one per lane
    assert sorted(g.nodes) == list(range(9))
    heads = [e for e in g.edges if e.kind == HEADLAND]
    lanes = [e for e in g.edges if e.kind == LANE]
    assert len(heads) == 9
    assert len(lanes) == 3


def test_ring_order_counter_clockwise_from_entrance():
    g, _, _ = rect_graph(3)
    assert g.ring == (0, 4, 7, 1, 2, 3, 8, 6, 5)


def test_lane_weight_accounts_for_both_arcs():
    g, _, _ = rect_graph(9, r=7.0)
    lane = g.edges[g.lane_edge(1)]
    c = 7.0 * math.pi / 2
    assert lane.arc_length == pytest.approx(500 - 14 + 2 * c)
    assert lane.weight == pytest.approx(lane.arc_length - 14)


def test_side_edge_includes_corner_fillets():
    g, _, _ = rect_graph(9, r=7.0)
    side = g.edges[g.next_edge(2 * 9 + 1)]  # lower half of the left side
    delta = 7.0 * math.pi / 2 - 14.0
    assert side.weight == pytest.approx(side.length + delta)
    # a full side traversal between lane ends costs as much as a lane plus two widths
    full = g.edges[g.prev_edge(2 * 9 + 1)].weight + side.weight
    assert full == pytest.approx(g.edges[g.lane_edge(1)].weight + 2 * 36)


def test_portions():
    g, _, _ = rect_graph(5)
    assert g.portion(g.next_edge(0)) == "upper"
    assert g.portion(g.next_edge(6)) == "left"
    assert g.portion(g.next_edge(1)) == "lower"
    assert g.portion(g.next_edge(5)) == "right"
    assert g.portion(g.lane_edge(2)) == LANE


def test_no_lane_turns_without_traces():
    g, _, _ = rect_graph(5)
    lane = g.lane_edge(2)
    assert not admissible(g, 2, g.prev_edge(2), lane)
    assert admissible(g, 2, g.prev_edge(2), g.next_edge(2))
    assert not admissible(g, 2, g.next_edge(2), g.next_edge(2))


def test_headland_only_route_without_traces():
    g, _, _ = rect_graph(5)
    path = shortest_path(g, 0, 3)
    assert all(g.edges[s.edge].kind == HEADLAND for s in path.steps)
    assert path.nodes[0] == 0 and path.nodes[-1] == 3


def test_traces_are_bidirectional():
    g, _, _ = rect_graph(5)
    tg = establish_traces(g, plan_abp(g))
    # lane 2 is worked upwards; it can be driven down as well
    down = Position(g.lane_edge(2), 0.5, -1)
    up = Position(g.lane_edge(2), 0.5, +1)
    assert shortest_path(tg, 0, down).length > 0
    assert shortest_path(tg, 0, up).length > 0


def test_same_edge_direct_move():
    g, _, _ = rect_graph(5)
    tg = establish_traces(g, plan_abp(g))
    e = g.lane_edge(3)
    a = Position(e, 0.25, -1)
    b = Position(e, 0.1, -1)
    path = shortest_path(tg, a, b)
    assert path.length == pytest.approx(0.15 * g.edges[e].arc_length)


def test_position_leg_costs():
    g, _, _ = rect_graph(9)
    e = g.edges[g.lane_edge(4)]
    pos = Position(e.id, 0.25)
    assert g.cost_from_position(pos, e.u) == pytest.approx(0.25 * e.arc_length - 7)
    assert g.cost_from_position(pos, e.v) == pytest.approx(0.75 * e.arc_length - 7)


def test_unreachable_after_deleting_edges():
    g, _, _ = rect_graph(5)
    cut = g.without_edges([g.next_edge(0), g.prev_edge(0)])
    with pytest.raises(Unreachable):
        shortest_path(cut, 0, 3)


def test_plan_mismatch_detected():
    g5, _, _ = rect_graph(5)
    g7, _, _ = rect_graph(7)
    with pytest.raises(PlanFieldMismatch):
        establish_traces(g7, plan_abp(g5))


def test_route_symmetry_on_node_pairs():
    g, _, _ = rect_graph(5)
    tg = establish_traces(g, plan_circ(g))
    for a in tg.nodes:
        for b in tg.nodes:
            if a < b:
                assert shortest_path(tg, a, b).length == pytest.approx(
                    shortest_path(tg, b, a).length
                )


def test_routes_are_connected_and_admissible():
    # node distances are not a metric here (no U-turns), so check routes instead
    g, _, _ = rect_graph(5)
    tg = establish_traces(g, plan_circ(g))
    for a in tg.nodes:
        for b in tg.nodes:
            if a == b:
                continue
            path = shortest_path(tg, a, b)
            assert path.length == pytest.approx(sum(s.cost for s in path.steps))
            node = a
            prev = None
            for s in path.steps:
                e = tg.edges[s.edge]
                assert node == (e.u if s.direction > 0 else e.v)
                if prev is not None:
                    assert admissible(tg, node, prev, s.edge)
                node = e.head(s.direction)
                prev = s.edge
            assert node == b


def test_tie_break_is_deterministic():
    g, _, _ = rect_graph(5, r=0.0)
    tg = establish_traces(g, plan_abp(g))
    first = shortest_path(tg, 3, 9)
    for _ in range(3):
        again = shortest_path(tg, 3, 9)
        assert again.nodes == first.nodes


def test_dump_lists_every_node_edge_and_arc():
    g, _, _ = rect_graph(3)
    tg = establish_traces(g, plan_abp(g))
    text = dump_graph(tg)
    assert text.count("\nnode ") == len(g.nodes)
    assert text.count("\nedge ") == len(g.edges)
    assert text.count("\narc ") == len(tg.arcs)
    assert dump_graph(tg) == text
