from __future__ import annotations

import json

import pytest

from sqpack.cli import main, run_series, series_csv
from sqpack.config import PackConfig
from sqpack.render import plan_to_svg
from sqpack.packer import pack_strip
from sqpack.plan import plan_from_json


def run(argv):
    return main([str(a) for a in argv])


def test_pack_command_writes_plan_and_report(tmp_path):
    out = tmp_path / "plan.json"
    rc = run(["pack", "--x", 400.5, "--out", out])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["kind"] == "pack" and data["version"] == 1
    report = json.loads((tmp_path / "plan.json.report.json").read_text())
    assert report["passed"] is True
    assert report["waste_or_excess"] <= 2566


def test_pack_integer_zero_waste(tmp_path):
    out = tmp_path / "plan.json"
    assert run(["pack", "--x", 400, "--out", out]) == 0
    report = json.loads((tmp_path / "plan.json.report.json").read_text())
    assert report["waste_or_excess"] == 0.0


def test_cover_base_case(tmp_path):
    out = tmp_path / "plan.json"
    assert run(["cover", "--x", 50.5, "--out", out]) == 0
    report = json.loads((tmp_path / "plan.json.report.json").read_text())
    assert report["waste_or_excess"] == pytest.approx(50.75)


def test_invalid_x_usage_error(tmp_path):
    assert run(["pack", "--x", 0.2, "--out", tmp_path / "p.json"]) == 2


def test_verify_command_roundtrip(tmp_path):
    plan_path = tmp_path / "plan.json"
    run(["pack", "--x", 120.5, "--out", plan_path])
    assert run(["verify", plan_path]) == 0


def test_verify_command_corrupt_plan(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1, "kind": "pack"')
    assert run(["verify", bad]) == 2


def test_verify_command_detects_fault(tmp_path):
    plan_path = tmp_path / "plan.json"
    run(["pack", "--x", 50, "--out", plan_path])
    data = json.loads(plan_path.read_text())
    # shrink the target region so the outer squares escape
    data["region"]["dims"] = [49.5, 50.0]
    plan_path.write_text(json.dumps(data))
    assert run(["verify", plan_path]) == 1


def test_render_outputs_svg(tmp_path):
    plan_path = tmp_path / "plan.json"
    run(["pack", "--x", 50, "--out", plan_path])
    svg = tmp_path / "plan.svg"
    assert run(["render", plan_path, "--out", svg]) == 0
    text = svg.read_text()
    assert text.startswith("<svg ")
    assert text.count("<polygon") >= 2500


def test_render_over_limit_requires_outline(tmp_path):
    plan_path = tmp_path / "plan.json"
    run(["pack", "--x", 400.5, "--out", plan_path])
    assert run(["render", plan_path, "--out", tmp_path / "a.svg", "--limit",
                1000]) == 2
    assert run(["render", plan_path, "--out", tmp_path / "b.svg", "--limit", 1000,
                "--outline-only"]) == 0


def test_render_deterministic_bytes():
    plan = pack_strip(10.5, 100.0)
    assert plan_to_svg(plan) == plan_to_svg(plan)


def test_series_csv_and_slope(tmp_path):
    out = tmp_path / "series.csv"
    rc = run(["series", "--x", 10000.5, "--x", 100000.5, "--x", 1000000.5,
              "--out", out])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("x,kind,square_count")
    assert len(lines) == 5  # header + 3 rows + slope
    slope = float(lines[-1].split(",")[1])
    assert slope <= 0.75


def test_series_requires_three_sizes(tmp_path):
    assert run(["series", "--x", 100.5, "--x", 200.5,
                "--out", tmp_path / "s.csv"]) == 2


def test_series_integer_inputs_undefined_slope():
    rows, slope = run_series([100.0, 200.0, 300.0], "pack", PackConfig())
    assert slope is None
    assert all(r["waste_or_excess"] == 0.0 for r in rows)
    text = series_csv(rows, slope)
    assert "undefined" in text


def test_series_grid_regime_slope_near_one():
    # below the recursion cutoff the grid wastes ~x, documenting the crossover
    rows, slope = run_series([50.5, 100.5, 200.5], "pack", PackConfig())
    assert slope == pytest.approx(1.0, abs=0.15)


def test_series_deterministic_bytes():
    cfg = PackConfig()
    a = series_csv(*run_series([10000.5, 100000.5, 1000000.5], "pack", cfg))
    b = series_csv(*run_series([10000.5, 100000.5, 1000000.5], "pack", cfg))
    assert a == b


def test_config_file_roundtrip(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"base_cutoff": 60.0, "seed": 3}))
    plan_path = tmp_path / "plan.json"
    assert run(["pack", "--x", 80.5, "--out", plan_path, "--config", cfg_path]) == 0
    plan = plan_from_json(plan_path.read_text())
    # cutoff 60 forces the recursive path at x = 80.5
    assert plan.root.kind == "split"


def test_bad_config_is_usage_error(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"nonsense_knob": 1}))
    assert run(["pack", "--x", 50, "--out", tmp_path / "p.json",
                "--config", cfg_path]) == 2
