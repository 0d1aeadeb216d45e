"""Command line entry point: ``wsnoise <subcommand> [--config PATH] ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from .. import lz, noise, propagator, quasistatic
from ..model import QUANTITIES, SYSTEMS, LatticeParams, UnitContext, bloch_scales, convert
from ..seeding import derive_seed
from .config import ConfigError, RunConfig, load_config, parse_config
from .sweep import (
    SweepSpec,
    cut_minimum,
    emit_csv,
    emit_cut_csv,
    lz_spec,
    run_cut,
    run_grid_sweep,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

log = logging.getLogger("wsnoise")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value run file")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--realizations", type=int, help="noise realizations per point")
    p.add_argument("--threads", type=int, help="worker processes")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wsnoise", description="Noise-driven Wannier-Stark survival simulations.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("noise-check", help="ensemble moments and spectral peak of the harmonic noise")
    _common(p)
    p.add_argument("--path-out", help="also write the first path as '# t phi mu' rows")

    p = sub.add_parser("run", help="single noise trajectory through the full system")
    _common(p)

    p = sub.add_parser("lz-scan", help="two-level survival versus omega0 at constant variance")
    _common(p)

    p = sub.add_parser("beta-sweep", help="deterministic survival versus lattice velocity")
    _common(p)
    p.add_argument("--temperatures", help="comma-separated T values for the Gaussian-averaged curve")
    p.add_argument("--avg-out", help="CSV for the averaged curve (temperature,p_sur_avg)")

    p = sub.add_parser("grid-sweep", help="2-D sweep over up to two of omega0, temperature, v0, beta")
    _common(p)

    p = sub.add_parser("cut", help="1-D cut at constant variance or constant omega0")
    _common(p)
    p.add_argument("--kind", choices=("constant_variance", "constant_omega0"))

    p = sub.add_parser("units", help="convert a value between unit systems")
    p.add_argument("value", type=float)
    p.add_argument("quantity", choices=QUANTITIES)
    p.add_argument("--from", dest="from_", required=True, choices=SYSTEMS)
    p.add_argument("--to", required=True, choices=SYSTEMS)
    p.add_argument("--lattice-spacing", type=float, default=426e-9)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    lines, keys = [], []
    for item in getattr(args, "set", []):
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        keys.append(key.strip())
        lines.append(f"{key.strip()} = {raw.strip()}")
    given = parse_config("\n".join(lines))
    changes = {k: getattr(given, k) for k in keys}
    # dedicated flags take precedence over --set
    for k in ("seed", "realizations", "threads"):
        if getattr(args, k, None) is not None:
            changes[k] = getattr(args, k)
    return cfg.override(**changes)


class _Output:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.fh = open(self.path, "w", encoding="utf-8", newline="") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()


def cmd_noise_check(args, cfg: RunConfig) -> int:
    params = noise.NoiseParams(cfg.gamma, cfg.omega0, cfg.temperature)
    t_total = cfg.noise_samples * cfg.noise_dt
    seeds = [derive_seed(cfg.seed, i) for i in range(cfg.noise_paths)]
    paths = noise.generate_paths(params, t_total, cfg.noise_dt, seeds)
    m = noise.path_moments(paths)
    peak, width = noise.spectral_peak(paths[0]) if params.oscillatory else (math.nan, math.nan)
    rows = [
        ("var_phi", m.var_phi, m.se_var_phi, params.var_phi),
        ("var_mu", m.var_mu, m.se_var_mu, params.var_mu),
        ("mean_phi", m.mean_phi, m.se_mean_phi, 0.0),
        ("mean_mu", m.mean_mu, m.se_mean_mu, 0.0),
        ("spectral_peak", peak, width, params.omega1 if params.oscillatory else math.nan),
    ]
    with _Output(args.out) as fh:
        fh.write("quantity,estimate,uncertainty,expected\n")
        for name, est, unc, exp in rows:
            fh.write(f"{name},{est:.17g},{unc:.17g},{exp:.17g}\n")
    if args.path_out:
        paths[0].save(args.path_out)
    return EXIT_OK


def cmd_run(args, cfg: RunConfig) -> int:
    params = LatticeParams(cfg.v0, cfg.f0, cfg.alpha, cfg.phi0)
    t_b = bloch_scales(params).t_b
    grid = propagator.SpatialGrid.for_lattice(params, cfg.grid_points or None, cfg.min_cells, cfg.periods)
    config = propagator.EvolutionConfig(dt=t_b / cfg.steps_per_period, nonlinearity_g=cfg.g, trap_omega=cfg.trap_omega)
    wf = propagator.prepare_ground_state(grid, params, config)
    if cfg.temperature == 0:
        source = 0.0
    else:
        np_ = noise.NoiseParams(cfg.gamma, cfg.omega0, cfg.temperature)
        ndt = noise.choose_noise_dt(config.step(params), np_.omega0)
        source = noise.generate_path(np_, cfg.periods * t_b, ndt, derive_seed(cfg.seed, 0))
    _, series = propagator.evolve(wf, source, cfg.periods * t_b, params, config)
    _write_series(args.out, series)
    return EXIT_OK


def _write_series(path, series) -> None:
    if path:
        series.to_csv(path)
        return
    std = series.ensemble_std if series.ensemble_std is not None else np.zeros_like(series.p_sur)
    sys.stdout.write("t,p_sur,std\n")
    for row in zip(series.times, series.p_sur, std):
        sys.stdout.write(",".join(f"{v:.17g}" for v in row) + "\n")


def cmd_lz_scan(args, cfg: RunConfig) -> int:
    cfg = cfg.override(engine="lz")
    if cfg.axis1_name != "omega0":
        raise ConfigError("lz-scan runs along omega0; set axis1_name = omega0")
    w_b = 2 * math.pi * cfg.f0
    axis = SweepSpec.from_config(cfg.override(axis2_name="none")).axes[0]
    rows = lz.lz_scan(lz_spec(cfg), axis.values(cfg.f0), cfg.variance, cfg.seed)
    with _Output(args.out) as fh:
        fh.write("omega0,p_sur_mean,p_sur_std\n")
        for w, m, s in rows:
            fh.write(f"{w:.17g},{m:.17g},{s:.17g}\n")
    try:
        w_min = lz.minimum_position(rows)
        log.info("first minimum at omega0 = %.6g (%.4g omega_B)", w_min, w_min / w_b)
    except (lz.NoMinimumError, ValueError) as exc:
        log.info("no minimum located: %s", exc)
    return EXIT_OK


def cmd_beta_sweep(args, cfg: RunConfig) -> int:
    params = LatticeParams(cfg.v0, cfg.f0, cfg.alpha, cfg.phi0)
    grid = propagator.SpatialGrid.for_lattice(params, cfg.grid_points or None, cfg.min_cells)
    t_b = bloch_scales(params).t_b
    config = propagator.EvolutionConfig(dt=t_b / cfg.steps_per_period, nonlinearity_g=cfg.g, trap_omega=cfg.trap_omega)
    betas = np.linspace(cfg.beta_min, cfg.beta_max, cfg.beta_points)
    sweep = quasistatic.beta_sweep(params, betas, grid, config)
    if args.out:
        sweep.to_csv(args.out)
    else:
        sys.stdout.write("beta,p_sur\n")
        for b, p in zip(sweep.betas, sweep.p_sur):
            sys.stdout.write(f"{b:.17g},{p:.17g}\n")
    if args.temperatures:
        try:
            temps = [float(t) for t in args.temperatures.split(",")]
        except ValueError:
            raise ConfigError(f"--temperatures must be comma-separated numbers, got {args.temperatures!r}") from None
        values = quasistatic.averaged_curve(sweep, temps)
        if args.avg_out:
            quasistatic.write_averaged_curve(args.avg_out, temps, values)
        else:
            sys.stdout.write("temperature,p_sur_avg\n")
            for t, v in zip(temps, values):
                sys.stdout.write(f"{t:.17g},{v:.17g}\n")
    return EXIT_OK


def cmd_grid_sweep(args, cfg: RunConfig) -> int:
    result = run_grid_sweep(SweepSpec.from_config(cfg), cfg.threads)
    out = args.out or "/dev/stdout"
    emit_csv(result, out)
    for c in result.failed:
        log.error("cell %s failed: %s", c.index, c.error)
    return EXIT_NUMERIC if result.failed else EXIT_OK


def cmd_cut(args, cfg: RunConfig) -> int:
    kind = args.kind or cfg.cut
    rows = run_cut(kind, cfg, cfg.threads)
    emit_cut_csv(rows, cfg.f0, args.out or "/dev/stdout")
    failed = [r for r in rows if r.error]
    for r in failed:
        log.error("cut point omega0=%g T=%g failed: %s", r.omega0, r.temperature, r.error)
    key = "omega0" if kind == "constant_variance" else "temperature"
    try:
        log.info("first minimum at %s = %.6g", key, cut_minimum(rows, key))
    except (lz.NoMinimumError, ValueError) as exc:
        log.info("no minimum located: %s", exc)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_units(args) -> int:
    ctx = UnitContext.from_setup(args.lattice_spacing)
    print(f"{convert(args.value, args.quantity, args.from_, args.to, ctx):.17g}")
    return EXIT_OK


COMMANDS = {
    "noise-check": cmd_noise_check,
    "run": cmd_run,
    "lz-scan": cmd_lz_scan,
    "beta-sweep": cmd_beta_sweep,
    "grid-sweep": cmd_grid_sweep,
    "cut": cmd_cut,
}

NUMERICAL_ERRORS = (
    noise.StabilityError,
    propagator.PropagationError,
    lz.LZError,
    FloatingPointError,
    ArithmeticError,
)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"wsnoise: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "units":
            return cmd_units(args)
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, cfg)
    except NUMERICAL_ERRORS as exc:
        print(f"wsnoise: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, OSError) as exc:
        print(f"wsnoise: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
