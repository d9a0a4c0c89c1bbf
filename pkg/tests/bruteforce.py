"""Exhaustive route enumeration used as an independent check of the router.

Enumerates every trail (no directed edge used twice) between two nodes that
obeys the trace rules, and returns the minimum length.
"""
import math


def _incident(g):
    inc = {k: [] for k in g.nodes}
    for e in g.edges:
        inc[e.u].append(e)
        inc[e.v].append(e)
    return inc


def _can_switch(g, node, a, b):
    if a.id == b.id:
        return False
    if a.kind == "headland" and b.kind == "headland":
        return True
    lane, side = (a, b) if a.kind == "lane" else (b, a)
    if side.kind != "headland":
        return False
    return (node, lane.id, side.id) in g.arcs


def _endpoint_ok(g, node, e):
    if e.kind == "headland":
        return True
    return any(arc[0] == node and arc[1] == e.id for arc in g.arcs)


def brute_force_length(g, src, dst):
    """Minimum trail length between two distinct nodes, ``inf`` if none."""
    inc = _incident(g)
    best = math.inf

    def walk(node, last, length, used):
        nonlocal best
        if node == dst and _endpoint_ok(g, node, last):
            best = min(best, length)
        for e in inc[node]:
            if not _can_switch(g, node, last, e):
                continue
            d = 1 if e.u == node else -1
            key = (e.id, d)
            if key in used:
                continue
            used.add(key)
            walk(e.v if d > 0 else e.u, e, length + e.weight, used)
            used.discard(key)

    for e in inc[src]:
        if not _endpoint_ok(g, src, e):
            continue
        d = 1 if e.u == src else -1
        walk(e.v if d > 0 else e.u, e, e.weight, {(e.id, d)})
    return best
