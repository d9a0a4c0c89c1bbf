"""Field files (YAML) and CSV writers."""
from __future__ import annotations

import csv
import math

import yaml

from .errors import FieldFileError, InvalidField
from .field import FieldSpec

REQUIRED = ("contour", "entrance", "operating_width_m")
KNOWN = REQUIRED + ("exit", "theta_deg", "theta_rad", "turning_radius_m", "headland_offset_m", "name")


def _mark(node):
    m = node.start_mark
    return m.line + 1, m.column + 1


def _point(value, node, key):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise FieldFileError(f"{key}: expected a pair [x, y]", *_mark(node))
    try:
        return (float(value[0]), float(value[1]))
    except (TypeError, ValueError):
        raise FieldFileError(f"{key}: coordinates must be numbers", *_mark(node)) from None


def _number(value, node, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FieldFileError(f"{key}: expected a number", *_mark(node))
    return float(value)


def parse_field_text(text: str) -> FieldSpec:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        m = exc.problem_mark
        raise FieldFileError(f"syntax error: {exc.problem}", m.line + 1, m.column + 1) from None
    if root is None or not isinstance(root, yaml.MappingNode):
        raise FieldFileError("field file must be a mapping of keys to values", 1, 1)
    data = yaml.safe_load(text)
    nodes = {k.value: v for k, v in root.value}
    for key, node in nodes.items():
        if key not in KNOWN:
            raise FieldFileError(f"unknown key {key!r}", *_mark(node))
    for key in REQUIRED:
        if key not in data:
            raise FieldFileError(f"missing required key {key!r}")
    if "theta_deg" in data and "theta_rad" in data:
        raise FieldFileError("give theta_deg or theta_rad, not both", *_mark(nodes["theta_rad"]))

    contour_node = nodes["contour"]
    if not isinstance(data["contour"], list):
        raise FieldFileError("contour: expected a list of [x, y] pairs", *_mark(contour_node))
    contour = tuple(
        _point(v, n, "contour") for v, n in zip(data["contour"], contour_node.value)
    )
    kwargs = dict(
        contour=contour,
        entrance=_point(data["entrance"], nodes["entrance"], "entrance"),
        operating_width=_number(data["operating_width_m"], nodes["operating_width_m"], "operating_width_m"),
    )
    if "theta_rad" in data:
        kwargs["theta"] = _number(data["theta_rad"], nodes["theta_rad"], "theta_rad")
    else:
        deg = _number(data.get("theta_deg", 0.0), nodes.get("theta_deg", root), "theta_deg")
        kwargs["theta"] = math.radians(deg)
    if "turning_radius_m" in data:
        kwargs["turning_radius"] = _number(data["turning_radius_m"], nodes["turning_radius_m"], "turning_radius_m")
    if "headland_offset_m" in data:
        kwargs["headland_offset"] = _number(data["headland_offset_m"], nodes["headland_offset_m"], "headland_offset_m")
    if data.get("exit") is not None:
        kwargs["exit"] = _point(data["exit"], nodes["exit"], "exit")
    try:
        return FieldSpec(**kwargs)
    except InvalidField as exc:
        raise FieldFileError(str(exc), *_mark(contour_node)) from None


def parse_field_file(path) -> FieldSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise FieldFileError(f"cannot read {path}: {exc.strerror}") from None
    return parse_field_text(text)


def field_to_text(spec: FieldSpec, name=None) -> str:
    # theta is stored in radians so the round trip is exact
    data = {}
    if name:
        data["name"] = name
    data["operating_width_m"] = spec.operating_width
    data["turning_radius_m"] = spec.turning_radius
    if spec.headland_offset is not None:
        data["headland_offset_m"] = spec.headland_offset
    data["theta_rad"] = spec.theta
    data["entrance"] = list(spec.entrance)
    if spec.exit is not None:
        data["exit"] = list(spec.exit)
    data["contour"] = [list(p) for p in spec.contour]
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)


def write_field_file(spec: FieldSpec, path, name=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(field_to_text(spec, name))


COMPARE_FIELDS = ("pattern", "capacity_m", "rho", "D_total_m", "D_excess_m")


def format_capacity(c: float) -> str:
    return "inf" if math.isinf(c) else repr(float(c))


def write_compare_csv(rows, fh):
    """Rows are dicts with the compare columns; failed runs leave the metrics empty."""
    w = csv.writer(fh)
    w.writerow(COMPARE_FIELDS)
    for r in rows:
        if r.get("error"):
            w.writerow([r["pattern"], format_capacity(r["capacity_m"]), "", "", ""])
            continue
        w.writerow([
            r["pattern"],
            format_capacity(r["capacity_m"]),
            r["rho"],
            repr(float(r["D_total_m"])),
            repr(float(r["D_excess_m"])),
        ])
