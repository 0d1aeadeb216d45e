import math

import numpy as np
import pytest

from wsnoise.harness.cli import main
from wsnoise.harness.config import ConfigError, RunConfig, load_config, parse_config
from wsnoise.harness.sweep import (
    CUT_COLUMNS,
    GRID_COLUMNS,
    Axis,
    Cell,
    SweepResult,
    SweepSpec,
    cut_configs,
    cut_minimum,
    emit_csv,
    emit_cut_csv,
    evaluate,
    lz_spec,
    read_csv,
    run_cut,
    run_grid_sweep,
)
from wsnoise.lz import NoMinimumError, lz_survival_estimate
from wsnoise.seeding import derive_seed

F0 = 0.00762
W_B = 2 * math.pi * F0

LZ_GRID = """
engine = lz
realizations = 6
lz_steps_per_period = 2048
axis1_name = omega0
axis1_scale = log
axis1_min = 1
axis1_max = 10
axis1_points = 3
axis2_name = temperature
axis2_scale = log
axis2_min = 0.1
axis2_max = 10
axis2_points = 2
"""


# ---------------------------------------------------------------- config


def test_parse_single_key():
    assert parse_config("f0 = 0.00762").f0 == 0.00762


def test_empty_file_gives_defaults():
    assert parse_config("") == RunConfig()
    assert parse_config("# only a comment\n\n") == RunConfig()


def test_bad_value_cites_line():
    with pytest.raises(ConfigError, match="line 1.*f0"):
        parse_config("f0 = banana")
    with pytest.raises(ConfigError, match="line 3.*realizations"):
        parse_config("v0 = 0.1\n\nrealizations = 2.5")


@pytest.mark.parametrize(
    "text,match",
    [
        ("colour = red", "line 1: unknown key 'colour'"),
        ("v0 = 0.1\nv0 = 0.2", "line 2: duplicate"),
        ("v0 =", "line 1: missing value"),
        ("just words", "line 1: expected"),
        ("engine = gpu", "engine must be one of"),
        ("f0 = -1", "f0 must be positive"),
        ("f0 = inf", "line 1"),
        ("realizations = 0", "realizations"),
        ("beta_min = 3", "beta_min"),
    ],
)
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_required_keys():
    with pytest.raises(ConfigError, match="missing required key.*v0"):
        parse_config("f0 = 0.01", required=("v0",))
    assert parse_config("v0 = 0.2 # deep", required=("v0",)).v0 == 0.2


def test_integer_values_accept_integral_floats():
    assert parse_config("realizations = 1e2").realizations == 100


def test_text_round_trip(tmp_path):
    cfg = RunConfig(v0=0.0625, engine="lz", seed=9)
    f = tmp_path / "run.cfg"
    f.write_text(cfg.to_text())
    assert load_config(f) == cfg


def test_override():
    cfg = RunConfig().override(seed=None, v0=0.2)
    assert cfg.v0 == 0.2 and cfg.seed == 0
    with pytest.raises(ConfigError):
        RunConfig().override(banana=1)
    with pytest.raises(ConfigError):
        RunConfig().override(v0=-0.1)


# ---------------------------------------------------------------- axes and specs


def test_axis_values_and_units():
    a = Axis("omega0", "log", 0.01, 100, 5, "bloch")
    np.testing.assert_allclose(a.values(F0), np.geomspace(0.01, 100, 5) * W_B)
    t = Axis("temperature", "linear", 1, 2, 2, "bloch")
    np.testing.assert_allclose(t.values(F0), [W_B**2, 2 * W_B**2])
    np.testing.assert_allclose(Axis("v0", "linear", 0.1, 0.2, 3, "bloch").values(F0), [0.1, 0.15, 0.2])


@pytest.mark.parametrize(
    "kwargs",
    [dict(name="gamma"), dict(name="v0", scale="cubic"), dict(name="v0", scale="log", min=0.0),
     dict(name="v0", points=0), dict(name="v0", points=1, min=0.1, max=0.2)],
)
def test_axis_validation(kwargs):
    with pytest.raises(ConfigError):
        Axis(**kwargs)


def test_single_point_axis():
    assert Axis("v0", "linear", 0.1, 0.1, 1).values(F0).tolist() == [0.1]


def test_spec_validation():
    cfg = RunConfig()
    with pytest.raises(ConfigError):
        SweepSpec((), cfg, 2, 0, "lz")
    with pytest.raises(ConfigError):
        SweepSpec((Axis("v0"), Axis("v0")), cfg, 2, 0, "lz")
    with pytest.raises(ConfigError, match="beta"):
        SweepSpec((Axis("beta", "linear", -1, 1, 3),), cfg, 2, 0, "lz")
    spec = SweepSpec.from_config(parse_config(LZ_GRID))
    assert [a.name for a in spec.axes] == ["omega0", "temperature"]
    assert spec.engine == "lz" and spec.n_realizations == 6


def test_lz_spec_needs_alpha_one():
    with pytest.raises(ValueError):
        lz_spec(RunConfig(alpha=0.61))


# ---------------------------------------------------------------- grid sweeps


def test_one_by_one_grid_equals_direct_call():
    cfg = parse_config(LZ_GRID + "seed = 4\n").override(axis1_points=1, axis1_max=1.0, axis2_points=1, axis2_max=0.1)
    result = run_grid_sweep(SweepSpec.from_config(cfg))
    assert len(result.cells) == 1
    cell = result.cells[0]
    assert cell.seed == derive_seed(4, 0, 0)
    point = cfg.override(omega0=W_B, temperature=0.1 * W_B**2)
    mean, std = lz_survival_estimate(lz_spec(point), derive_seed(4, 0, 0))
    assert (cell.p_sur_mean, cell.p_sur_std) == (mean, std)
    assert cell.n_realizations == 6 and cell.wall_time > 0


def test_grid_cells_and_seeds():
    result = run_grid_sweep(SweepSpec.from_config(parse_config(LZ_GRID)))
    assert [c.index for c in result.cells] == [(i, j) for i in range(3) for j in range(2)]
    assert len({c.seed for c in result.cells}) == 6
    assert all(0 <= c.p_sur_mean <= 1 for c in result.cells)
    assert not result.failed


def test_grid_sweep_is_deterministic_across_workers(tmp_path):
    spec = SweepSpec.from_config(parse_config(LZ_GRID))
    emit_csv(run_grid_sweep(spec), tmp_path / "a.csv")
    emit_csv(run_grid_sweep(spec), tmp_path / "b.csv")
    emit_csv(run_grid_sweep(spec, threads=2), tmp_path / "c.csv")
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes() == (tmp_path / "c.csv").read_bytes()


def test_failing_cell_is_isolated(tmp_path):
    # omega0 = 0 with T > 0 has no stationary distribution
    text = LZ_GRID.replace("axis1_scale = log", "axis1_scale = linear").replace("axis1_min = 1", "axis1_min = 0")
    cfg = parse_config(text).override(axis1_max=5.0, axis1_points=2, axis2_points=1, axis2_max=0.1)
    result = run_grid_sweep(SweepSpec.from_config(cfg))
    bad, good = result.cells
    assert bad.error is not None and "degenerate" in bad.error and math.isnan(bad.p_sur_mean)
    assert good.error is None
    mean, std, _ = evaluate(good.config, good.seed)
    assert (good.p_sur_mean, good.p_sur_std) == (mean, std)
    emit_csv(result, tmp_path / "g.csv")
    rows = read_csv(tmp_path / "g.csv")
    assert rows[0]["p_sur_mean"] == "nan" and rows[1]["p_sur_mean"] != "nan"


def test_beta_axis_runs_deterministic_cells():
    cfg = RunConfig(engine="full", steps_per_period=512, axis1_name="beta", axis1_scale="linear",
                    axis1_min=-0.5, axis1_max=0.5, axis1_points=2, axis2_name="none")
    result = run_grid_sweep(SweepSpec.from_config(cfg))
    assert [c.beta for c in result.cells] == [-0.5, 0.5]
    assert all(c.n_realizations == 1 and c.error is None for c in result.cells)


# ---------------------------------------------------------------- CSV


def test_empty_result_is_header_only(tmp_path):
    emit_csv(SweepResult(), tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == ",".join(GRID_COLUMNS) + "\n"


def test_two_cells_three_lines_and_round_trip(tmp_path):
    cells = [
        Cell((0,), RunConfig(omega0=1 / 3), 11, p_sur_mean=0.1 + 0.2, p_sur_std=math.pi / 1e5, n_realizations=20),
        Cell((1,), RunConfig(omega0=2 / 3, temperature=1e-300), 12, p_sur_mean=1.0, p_sur_std=0.0, n_realizations=20),
    ]
    emit_csv(SweepResult(cells), tmp_path / "t.csv")
    text = (tmp_path / "t.csv").read_text()
    assert len(text.splitlines()) == 3
    rows = read_csv(tmp_path / "t.csv")
    for c, r in zip(cells, rows):
        assert float(r["omega0"]) == c.config.omega0
        assert float(r["temperature"]) == c.config.temperature
        assert float(r["p_sur_mean"]) == c.p_sur_mean
        assert float(r["p_sur_std"]) == c.p_sur_std
        assert int(r["seed"]) == c.seed and int(r["n_real"]) == 20


# ---------------------------------------------------------------- cuts


def test_constant_variance_cut_slaves_temperature():
    cfg = RunConfig(variance=0.5, axis1_name="omega0", axis1_scale="linear", axis1_min=1, axis1_max=3, axis1_points=3)
    configs = cut_configs("constant_variance", cfg)
    for c, w in zip(configs, np.array([1, 2, 3]) * W_B):
        assert c.omega0 == pytest.approx(w) and c.temperature == pytest.approx(0.5 * w * w)
    with pytest.raises(ConfigError):
        cut_configs("constant_omega0", cfg)
    with pytest.raises(ConfigError):
        cut_configs("diagonal", cfg)


def test_single_point_cut_equals_direct_call():
    cfg = RunConfig(engine="lz", realizations=5, axis1_name="omega0", axis1_scale="linear",
                    axis1_min=4, axis1_max=4, axis1_points=1)
    (row,) = run_cut("constant_variance", cfg)
    point = cut_configs("constant_variance", cfg)[0]
    assert (row.p_sur_mean, row.p_sur_std, 1) == (*evaluate(point, derive_seed(0, 0))[:2], 1)


def test_cut_rate_column(tmp_path):
    cfg = RunConfig(engine="full", realizations=2, steps_per_period=1024, rate_periods=11, omega0=1.0,
                    axis1_name="temperature", axis1_scale="log", axis1_min=1, axis1_max=1, axis1_points=1)
    (row,) = run_cut("constant_omega0", cfg)
    assert row.error is None
    assert 0 < row.rate <= 1
    emit_cut_csv([row], F0, tmp_path / "cut.csv")
    (line,) = read_csv(tmp_path / "cut.csv")
    assert list(line) == list(CUT_COLUMNS)
    assert float(line["temperature_over_omega_b2"]) == pytest.approx(1.0)


# ---------------------------------------------------------------- engine cross-check at constant omega0


FIG7_LEFT = """
omega0 = 1.0
alpha = 1
axis1_name = temperature
axis1_scale = log
axis1_min = 0.1
axis1_max = 10000
axis1_points = 11
axis1_units = bloch
realizations = 20
steps_per_period = 4096
"""


@pytest.fixture(scope="module")
def fig7_cuts():
    return {e: run_cut("constant_omega0", parse_config(FIG7_LEFT + f"engine = {e}\n")) for e in ("full", "lz", "quasistatic")}


def _minimum_index(rows):
    t = np.array([r.temperature for r in rows])
    return int(np.argmin(np.abs(t - cut_minimum(rows, "temperature"))))


@pytest.mark.parametrize("engine", ["full", "quasistatic"])
def test_fig7_left_single_minimum(fig7_cuts, engine):
    rows = fig7_cuts[engine]
    i = _minimum_index(rows)
    y = [r.p_sur_mean for r in rows]
    assert 0 < i < len(rows) - 1
    assert y[i] < y[0] - 0.1 and y[i] < y[-1]


@pytest.mark.xfail(strict=True, raises=NoMinimumError, reason="two-level survival at omega0 = 1 falls monotonically in T")
def test_fig7_left_lz_minimum(fig7_cuts):
    _minimum_index(fig7_cuts["lz"])


@pytest.mark.xfail(strict=True, reason="full and quasistatic minima sit a decade apart; the two-level cut has none")
def test_engine_minima_agree_within_one_cell(fig7_cuts):
    idx = [_minimum_index(fig7_cuts[e]) for e in ("full", "lz", "quasistatic")]
    assert max(idx) - min(idx) <= 1


# ---------------------------------------------------------------- CLI


def test_cli_units(capsys):
    assert main(["units", "1.0", "energy", "--from", "experimental", "--to", "dimensionless"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.125)


def test_cli_usage_errors(capsys, tmp_path):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["lz-scan", "--realizations", "x"]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("v0 = 0.1\ncolour = red\n")
    assert main(["lz-scan", "--config", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err
    assert main(["lz-scan", "--set", "novalue"]) == 1
    assert main(["lz-scan", "--config", str(tmp_path / "missing.cfg")]) == 1


def test_cli_numerical_failure_exit_code(tmp_path):
    # noise_dt * omega0 = 0.5 violates the stability guard
    assert main(["noise-check", "--set", "noise_dt=0.5", "--out", str(tmp_path / "n.csv")]) == 2


def test_cli_noise_check(tmp_path):
    out, path = tmp_path / "n.csv", tmp_path / "p.txt"
    args = ["noise-check", "--set", "temperature=0.5", "--set", "noise_samples=2048", "--out", str(out), "--path-out", str(path)]
    assert main(args) == 0
    rows = {r["quantity"]: r for r in read_csv(out)}
    assert set(rows) == {"var_phi", "var_mu", "mean_phi", "mean_mu", "spectral_peak"}
    assert float(rows["var_phi"]["expected"]) == 0.5
    assert path.read_text().startswith("# t phi mu\n")


def test_cli_lz_scan_header_and_determinism(tmp_path):
    args = ["lz-scan", "--realizations", "4", "--set", "axis1_points=10", "--set", "lz_steps_per_period=1024"]
    assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
    text = (tmp_path / "a.csv").read_text()
    assert text.splitlines()[0] == "omega0,p_sur_mean,p_sur_std"
    assert len(text.splitlines()) == 11
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_cli_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("engine = lz\nrealizations = 3\nseed = 1\n" + LZ_GRID.split("\n", 4)[4])
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["grid-sweep", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["grid-sweep", "--config", str(cfg), "--seed", "2", "--threads", "2", "--out", str(b)]) == 0
    ra, rb = read_csv(a), read_csv(b)
    assert len(ra) == 6 and {r["n_real"] for r in ra} == {"3"}
    assert [r["seed"] for r in ra] != [r["seed"] for r in rb]
    assert ra[0]["seed"] == str(derive_seed(1, 0, 0))


def test_cli_grid_sweep_failed_cell_exit_code(tmp_path):
    out = tmp_path / "g.csv"
    args = ["grid-sweep", "--set", "engine=lz", "--set", "realizations=2", "--set", "alpha=0.5",
            "--set", "axis1_points=2", "--set", "axis2_points=1", "--set", "axis2_max=0.01", "--out", str(out)]
    assert main(args) == 2
    assert all(r["p_sur_mean"] == "nan" for r in read_csv(out))


def test_cli_beta_sweep(tmp_path):
    out, avg = tmp_path / "b.csv", tmp_path / "avg.csv"
    args = ["beta-sweep", "--set", "beta_points=41", "--set", "steps_per_period=512", "--out", str(out),
            "--temperatures", "0,0.01,0.1", "--avg-out", str(avg)]
    assert main(args) == 0
    assert len(read_csv(out)) == 41
    rows = read_csv(avg)
    assert [float(r["temperature"]) for r in rows] == [0.0, 0.01, 0.1]
    assert main(args[:-2] + ["--temperatures", "a,b"]) == 1


def test_cli_cut_and_run(tmp_path, capsys):
    out = tmp_path / "c.csv"
    args = ["cut", "--kind", "constant_variance", "--set", "engine=lz", "--set", "realizations=3",
            "--set", "axis1_scale=linear", "--set", "axis1_min=2", "--set", "axis1_max=3", "--set", "axis1_points=2",
            "--out", str(out)]
    assert main(args) == 0
    assert len(read_csv(out)) == 2
    run = tmp_path / "r.csv"
    assert main(["run", "--set", "steps_per_period=512", "--set", "periods=2", "--out", str(run)]) == 0
    rows = read_csv(run)
    assert [float(r["t"]) for r in rows] == pytest.approx([0, 1 / F0, 2 / F0])
