"""Sweep grids, CSV contract, method comparison and the CLI."""

import io
import os

import numpy as np
import pytest

from conftest import H2_23
from memcap import (
    AxisSpec,
    CPViolationError,
    ParameterError,
    SolverKnobs,
    SweepSpec,
    binary_entropy,
    compare_methods,
    from_physical,
    preset_figure1,
    preset_figure2,
    preset_figure3,
    reference_curves,
    run_point,
    run_sweep,
)
from memcap.cli import main

AVG_CAPACITY_23 = 0.5408520829727552


def small_spec(**kw):
    defaults = dict(
        s_axis=AxisSpec(0.0, 0.6, 2),
        a_axis=AxisSpec(0.6, 2 / 3, 2),
        d_policy="max_allowed",
        methods=("blackwell", "references"),
        knobs=SolverKnobs(),
    )
    defaults.update(kw)
    return SweepSpec(**defaults)


def test_reference_curves_maximally_separated():
    refs = reference_curves(2 / 3, 1 / 3)
    assert refs.avg_capacity == pytest.approx(AVG_CAPACITY_23, abs=1e-12)
    assert refs.avg_channel == pytest.approx(1 - H2_23, abs=1e-12)
    assert refs.low_noise_sub == pytest.approx(1.0, abs=1e-12)
    assert refs.noisier_sub == pytest.approx(1 - H2_23, abs=1e-12)
    assert refs.min_capacity == refs.noisier_sub


def test_reference_curves_degenerate_cases():
    refs = reference_curves(0.8, 0.0)
    value = 1 - binary_entropy(0.8)
    for fieldname in ("avg_capacity", "avg_channel", "low_noise_sub", "noisier_sub"):
        assert getattr(refs, fieldname) == pytest.approx(value, abs=1e-15)
    noiseless = reference_curves(1.0, 0.0)
    assert noiseless.avg_capacity == 1.0 and noiseless.avg_channel == 1.0
    with pytest.raises(CPViolationError):
        reference_curves(0.6, 0.5)


def test_run_point_memoryless_all_methods():
    knobs = SolverKnobs(oracle_n=12, mc_steps=200_000, seed=5)
    row = run_point(
        from_physical(0, 2 / 3, 1 / 3), knobs,
        methods=("blackwell", "oracle_n", "monte_carlo", "references"),
    )
    target = 1 - H2_23
    assert row.capacity_blackwell == pytest.approx(target, abs=1e-10)
    assert row.capacity_oracle == pytest.approx(target, abs=1e-10)
    assert abs(row.capacity_mc - target) <= 3 * row.mc_stderr
    assert row.ref_avg_channel == pytest.approx(target, abs=1e-12)


def test_sweep_rows_and_order(tmp_path):
    spec = small_spec()
    out = io.StringIO()
    rows = run_sweep(spec, out)
    points = spec.grid()
    assert len(rows) == len(points) == 4
    assert [(r.s, r.a_bar) for r in rows] == [(s, a) for s, a, _ in points]
    assert points == sorted(points)   # lexicographic in the axes

    text = out.getvalue()
    lines = text.splitlines()
    assert lines[0].startswith("#") and lines[1].startswith("#")
    assert lines[2].startswith("s,a_bar,d,q00,")
    assert len(lines) == 3 + 4
    # capacities live in [0, 1]
    for r in rows:
        assert 0.0 <= r.capacity_blackwell <= 1.0


def test_sweep_is_deterministic_and_parallel_safe():
    spec = small_spec(knobs=SolverKnobs(mc_steps=20_000),
                      methods=("blackwell", "monte_carlo"))
    first, second = io.StringIO(), io.StringIO()
    run_sweep(spec, first)
    run_sweep(spec, second)
    assert first.getvalue() == second.getvalue()

    os.environ["MEMCAP_THREADS"] = "2"
    try:
        parallel = io.StringIO()
        run_sweep(spec, parallel)
    finally:
        del os.environ["MEMCAP_THREADS"]
    assert parallel.getvalue() == first.getvalue()


def test_sweep_aborts_on_invalid_grid():
    spec = SweepSpec(
        s_axis=AxisSpec(0.0, 0.0, 1),
        a_axis=AxisSpec(0.3, 0.6, 2),
        d_axis=AxisSpec(0.0, 0.0, 1),
        d_policy="explicit",
        methods=("blackwell",),
    )
    with pytest.raises(ParameterError) as exc:
        run_sweep(spec)
    assert "0.3" in str(exc.value)


def test_single_point_sweep_matches_run_point():
    spec = SweepSpec(
        s_axis=AxisSpec(0.5, 0.5, 1),
        a_axis=AxisSpec(2 / 3, 2 / 3, 1),
        d_axis=AxisSpec(0.2, 0.2, 1),
        d_policy="explicit",
        methods=("blackwell",),
    )
    rows = run_sweep(spec)
    direct = run_point(from_physical(0.5, 2 / 3, 0.2), spec.knobs, spec.methods)
    assert rows[0].capacity_blackwell == direct.capacity_blackwell


def test_bracketing_between_reference_curves():
    for s, a in ((0.0, 2 / 3), (0.3, 2 / 3), (0.9, 2 / 3), (0.6, 0.55)):
        d = min(a - 1 / 3, 1 - a)
        row = run_point(from_physical(s, a, d), methods=("blackwell", "references"))
        assert row.ref_avg_channel - 1e-9 <= row.capacity_blackwell
        assert row.capacity_blackwell <= row.ref_avg_capacity + 1e-6


def test_compare_methods_identical_subchannels():
    knobs = SolverKnobs(oracle_n=10, mc_steps=100_000, seed=3)
    report = compare_methods(from_physical(0.7, 0.9, 0.0), knobs)
    target = binary_entropy(0.9)
    assert report.entropy_blackwell == pytest.approx(target, abs=1e-10)
    assert report.entropy_oracle == pytest.approx(target, abs=1e-10)
    assert report.ok
    assert "PASS" in report.summary()


def test_preset_grid_sizes():
    assert len(preset_figure1().grid()) == 39 * 27
    assert len(preset_figure2().grid()) == 26
    assert len(preset_figure3().grid()) == 100
    # the s axis stops short of the non-forgetful endpoints
    for spec in (preset_figure1(), preset_figure2(), preset_figure3()):
        s_values = spec.s_axis.values()
        assert np.all(np.abs(s_values) <= 0.99)


def test_cli_capacity_physical_and_raw(capsys):
    assert main(["capacity", "--s", "0", "--a", str(2 / 3), "--d", str(1 / 3)]) == 0
    out = capsys.readouterr().out
    assert "capacity = 0.0817041659" in out

    assert main([
        "capacity", "--q00", "0.8", "--q10", "0.2",
        "--x0", "0.9", "--x1", "0.6",
    ]) == 0
    assert "capacity" in capsys.readouterr().out


def test_cli_exit_codes(capsys):
    assert main(["capacity", "--s", "0", "--a", "0.3", "--d", "0"]) == 1
    assert main(["capacity", "--s", "1.0", "--a", "0.6", "--d", "0"]) == 1
    assert main(["capacity"]) == 1
    assert main([
        "capacity", "--s", "0.6", "--a", str(2 / 3), "--d", str(1 / 3),
        "--max-iter", "2",
    ]) == 2
    capsys.readouterr()


def test_cli_sweep_writes_csv(tmp_path):
    out = tmp_path / "grid.csv"
    code = main([
        "sweep", "--s-range", "0:0.5:2", "--a-range", "0.6:0.7:2", "--d-max",
        "--methods", "blackwell,references", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3 + 4
    assert lines[2].split(",")[0] == "s"


def test_cli_compare(capsys):
    code = main([
        "compare", "--s", "0.7", "--a", "0.9", "--d", "0",
        "--oracle-n", "10", "--mc-steps", "50000",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "blackwell" in out
