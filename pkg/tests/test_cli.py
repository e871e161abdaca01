from __future__ import annotations

from fractions import Fraction

from app.utils.output import read_pixel_csv


def test_eval_prints_value_and_counters(runner):
    result = runner.invoke(args=["eval", "3/2^4", "10"])
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == "0.1875"
    assert lines[1].startswith("dyadic=3*2^-4 queries=")
    assert "bit_ops=" in lines[1]


def test_eval_one_third(runner):
    result = runner.invoke(args=["eval", "1/3", "20"])
    assert result.exit_code == 0, result.output
    assert abs(Fraction(result.output.splitlines()[0]) - Fraction(1, 3)) < Fraction(1, 2**20)


def test_eval_reports_expression_errors(runner):
    result = runner.invoke(args=["eval", "exp(4)", "10"])
    assert result.exit_code == 1
    assert "exp" in result.output


def test_render_writes_three_files(runner, tmp_path):
    prefix = tmp_path / "out" / "disk"
    result = runner.invoke(
        args=["render", "disk", "--n", "2", "--half-width", "2", "--radius", "1", "--out", str(prefix)]
    )
    assert result.exit_code == 0, result.output
    assert "pixels=289" in result.output
    for suffix in (".pgm", ".csv", ".stats"):
        assert (tmp_path / "out" / f"disk{suffix}").exists()
    header, rows = read_pixel_csv(tmp_path / "out" / "disk.csv")
    assert header["n"] == "2"
    assert len(rows) == 289
    stats = (tmp_path / "out" / "disk.stats").read_text()
    assert "one_direction=certified" in stats


def test_render_binary_output(runner, tmp_path):
    prefix = tmp_path / "seg"
    result = runner.invoke(
        args=[
            "render", "segment", "--n", "2", "--half-width", "3/2^1",
            "--from", "-1", "0", "--to", "1", "1/2^1", "--p5", "--out", str(prefix),
        ]
    )
    assert result.exit_code == 0, result.output
    assert (tmp_path / "seg.pgm").read_bytes().startswith(b"P5")


def test_render_rejects_off_grid_windows(runner, tmp_path):
    result = runner.invoke(
        args=["render", "disk", "--n", "2", "--half-width", "2", "--center", "1/2^3", "0", "--out", str(tmp_path / "x")]
    )
    assert result.exit_code == 1
    assert "grid" in result.output
    assert not (tmp_path / "x.pgm").exists()


def test_render_rejects_unknown_sets(runner, tmp_path):
    result = runner.invoke(args=["render", "torus", "--n", "2", "--half-width", "2", "--out", str(tmp_path / "x")])
    assert result.exit_code == 1
    assert "unknown set" in result.output


def test_render_rejects_non_dyadic_literals(runner, tmp_path):
    result = runner.invoke(args=["render", "disk", "--n", "2", "--half-width", "0.1", "--out", str(tmp_path / "x")])
    assert result.exit_code == 2
    assert "2^-32" in result.output


def test_selfcheck_single_suite(runner):
    result = runner.invoke(args=["selfcheck", "--suite", "exp_budget", "--suite", "cube_root_example"])
    assert result.exit_code == 0, result.output
    assert "PASS exp_budget" in result.output
    assert "PASS cube_root_example" in result.output
    assert "all 2 suites passed" in result.output


def test_selfcheck_catches_a_loose_threshold(app, runner):
    app.config["PIXEL_THRESHOLD"] = "3"
    result = runner.invoke(args=["selfcheck", "--suite", "pixel_soundness"])
    assert result.exit_code == 1
    assert "FAIL pixel_soundness" in result.output
    assert "decide=1 never" in result.output


def test_selfcheck_unknown_suite(runner):
    result = runner.invoke(args=["selfcheck", "--suite", "nope"])
    assert result.exit_code == 2


def test_cost_command(runner):
    result = runner.invoke(args=["cost", "disk", "--ns", "2,3", "--window-bits", "2"])
    assert result.exit_code == 0, result.output
    assert "n=2 bit_ops_mean=" in result.output
    assert "degree=1" in result.output


def test_cost_command_validates_levels(runner):
    assert runner.invoke(args=["cost", "disk", "--ns", "4"]).exit_code == 2
    assert runner.invoke(args=["cost", "disk", "--ns", "4,x"]).exit_code == 2
    assert runner.invoke(args=["cost", "mandelbrot"]).exit_code == 2


def test_render_circle_around_a_given_origin(runner, tmp_path):
    prefix = tmp_path / "ring"
    result = runner.invoke(
        args=[
            "render", "circle", "--n", "2", "--half-width", "2", "--center", "1", "0",
            "--origin", "1", "0", "--radius", "1", "--out", str(prefix),
        ]
    )
    assert result.exit_code == 0, result.output
    _, rows = read_pixel_csv(tmp_path / "ring.csv")
    decisions = {(int(row["ix"]), int(row["iy"])): row["decision"] for row in rows}
    assert len(decisions) == 289
    assert decisions[(8, 0)] == "1"
    assert decisions[(4, 0)] == "0"
