import csv
import os

import pytest

from conftest import HERE, fixture_path
from fieldcover.cli import main

GOLDEN = os.path.join(HERE, "golden")


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def assert_csv_close(got, want):
    assert got[0] == want[0]
    assert len(got) == len(want)
    for row_g, row_w in zip(got[1:], want[1:]):
        for a, b in zip(row_g, row_w):
            try:
                fa, fb = float(a), float(b)
            except ValueError:
                assert a == b
                continue
            assert fa == pytest.approx(fb, rel=1e-12, abs=1e-9)


def test_plan_square_circstar(tmp_path, capsys):
    rc = main(["plan", "--field", fixture_path("square_demo.yaml"), "--pattern", "circstar",
               "--emit-segments", "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "lanes: 8" in out and "Z0_2" in out
    got = read_csv(tmp_path / "circstar_segments.csv")
    assert_csv_close(got, read_csv(os.path.join(GOLDEN, "square_circstar_segments.csv")))


def test_plan_all_summary_matches_closed_form(capsys):
    assert main(["plan", "--field", fixture_path("rect_n9.yaml")]) == 0
    rows = {}
    for line in capsys.readouterr().out.splitlines():
        parts = line.split()
        if parts and parts[0] in ("abp", "circ", "circstar"):
            rows[parts[0]] = float(parts[1])
    assert rows["abp"] - rows["circ"] == pytest.approx(-288, abs=1e-3)
    assert rows["abp"] - rows["circstar"] == pytest.approx(216, abs=1e-3)


def test_compare_golden(tmp_path):
    rc = main(["compare", "--field", fixture_path("rect_n9.yaml"), "--out", str(tmp_path)])
    assert rc == 0
    got = read_csv(tmp_path / "compare.csv")
    assert got[0] == ["pattern", "capacity_m", "rho", "D_total_m", "D_excess_m"]
    assert_csv_close(got, read_csv(os.path.join(GOLDEN, "rect_n9_compare.csv")))


def test_compare_inf_only(capsys):
    rc = main(["compare", "--field", fixture_path("square_demo.yaml"), "--capacity", "inf"])
    assert rc == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert len(rows) == 4
    assert all(r[2] == "1" and float(r[4]) == 0.0 for r in rows[1:])


def test_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        args = ["simulate", "--field", fixture_path("rect_n9.yaml"), "--capacity", "2500",
                "--capacity", "inf", "--out", str(d), "--emit-segments", "--emit-graph"]
        assert main(args) == 0
    names = sorted(os.listdir(a))
    assert names == sorted(os.listdir(b))
    assert "graph.txt" in names and "mission_abp_2500.0.csv" in names
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["plan"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--field", "x.yaml", "--capacity", "-5"])
    assert info.value.code == 1


def test_input_error_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("operating_width_m: 1\nentrance: [0, 0]\ncontour:\n- [0, 0]\n- [1, 0]\n")
    assert main(["plan", "--field", str(bad)]) == 2
    assert main(["plan", "--field", str(tmp_path / "missing.yaml")]) == 2


def test_planner_error_exit_code(tmp_path):
    narrow = tmp_path / "narrow.yaml"
    narrow.write_text(
        "operating_width_m: 12\nturning_radius_m: 7\ntheta_deg: 0\n"
        "entrance: [23, 506]\ncontour:\n- [0, 0]\n- [84, 0]\n- [84, 512]\n- [0, 512]\n"
    )
    rc = main(["plan", "--field", str(narrow), "--pattern", "abp", "--emit-segments",
               "--out", str(tmp_path)])
    assert rc == 3
