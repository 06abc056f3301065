"""Command-line front end: ``gravcat <subcommand>``.

Global flags (``--config``, ``--seed``, ``--out``, ``--format``) may appear
before or after the subcommand.  Without ``--out`` files go to the directory
named in the config, then ``$GRAVCAT_OUT``, then ``./gravcat_out``.

Exit codes: 0 success, 2 configuration error, 3 numerical-stability abort.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from .core import (CONSTANTS, ConfigError, NumericalInstabilityError, ProtocolError, TheoryId,
                   preset_protocol)
from .forces import MatterDensity1D, density_force, net_force_on_probe, point_force, self_energy
from .io import (FORMATS, RunConfig, _prepare, _table, emit_outputs,
                 output_directory, parse_config, write_json)
from .rates import rate_report
from .sn import (SNBudget, detect_critical_mass, free_width, make_radial_gaussian, sn_evolve_radial,
                 sn_stable_dt)
from .two_site import SEMICLASSICAL, ensemble_statistics, run_two_site_ensemble, run_two_site_trajectory
from .verdict import default_dt, run_scenario, verdict_table

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _global_flags(parser, suppress):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=d, help="YAML run configuration")
    parser.add_argument("--seed", type=int, default=d, help="override the configured seed")
    parser.add_argument("--out", default=d, help="output directory")
    parser.add_argument("--format", choices=FORMATS, default=d, help="table format")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gravcat",
                                 description="Gravitational cat-state probe signals under "
                                             "CQT-Newton and collapse theories.")
    _global_flags(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        p.add_argument("--preset", help="RomeroIsart or Pino (replaces the configured protocol)")
        p.add_argument("--theory", action="append", help="theory name; repeatable")
        return p

    cmd("rates", "collapse rates, widths and damping times per theory")
    cmd("forces", "probe force from point, density and grid models")
    p = cmd("trajectory", "one simulated force record")
    p.add_argument("--index", type=int, default=0, help="trajectory index within the seed stream")
    p = cmd("ensemble", "ensemble mean force and correlation")
    p.add_argument("--n-traj", type=int)
    cmd("sn-evolve", "Schrödinger-Newton width evolution of a Gaussian packet")
    cmd("critical-mass", "bracket the Schrödinger-Newton collapse mass")
    cmd("verdict", "predicted signal class per theory and protocol")
    p = cmd("scenario", "verdict, rates and simulated statistics per theory")
    p.add_argument("--n-traj", type=int)
    return ap


def _load(args) -> RunConfig:
    if args.config:
        cfg = parse_config(args.config)
    else:
        cfg = RunConfig(protocol=preset_protocol("Pino"))
    if args.preset:
        cfg = cfg.replace(protocol=preset_protocol(args.preset))
    if args.theory:
        try:
            cfg = cfg.replace(theories=tuple(TheoryId.parse(t) for t in args.theory))
        except ValueError as e:
            raise ConfigError(f"--theory: {e}") from None
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed: must be >= 0")
        cfg = cfg.replace(seed=args.seed)
    if args.format is not None:
        cfg = cfg.replace(output=dataclasses.replace(cfg.output, formats=(args.format,)))
    n_traj = getattr(args, "n_traj", None)
    if n_traj is not None:
        cfg = cfg.replace(n_traj=n_traj)
    return cfg


def _theory_dir(out: Path, cfg: RunConfig, theory: TheoryId) -> Path:
    return out if len(cfg.theories) == 1 else out / theory.value


def _horizon_dt(cfg, theory):
    horizon = cfg.protocol.coherence_time if cfg.horizon is None else cfg.horizon
    dt = cfg.dt
    if dt is None:
        dt = default_dt(rate_report(theory, cfg.protocol, cfg.collapse), horizon)
    return horizon, dt


# ---------------------------------------------------------------- commands

def cmd_rates(cfg, out):
    reports = [rate_report(t, cfg.protocol, cfg.collapse).as_dict() for t in cfg.theories]
    header = list(reports[0])
    _table(out, "rates", header, [[r[k] for k in header] for r in reports], cfg.output.formats)
    for r in reports:
        print(f"{r['theory']:>12}  rate={r['intrinsic_rate']:.3e} 1/s  "
              f"effective={r['effective_cm_rate']:.3e} 1/s")


def cmd_forces(cfg, out):
    p, G = cfg.protocol, CONSTANTS.G
    D, y = p.probe_distance_D, p.probe_offset_y
    rows = [("probe_distance_D", D), ("probe_offset_y", y),
            ("f0_point", point_force(p.sphere_mass, p.probe_mass, p.cat_separation_L, D, G)),
            ("self_energy", self_energy(p.sphere_mass, p.cat_separation_L, G))]
    if p.sphere_density is not None:
        rows.append(("f0_density", density_force(p.sphere_density, p.probe_mass, p.cat_separation_L,
                                                 p.surface_gap_a, p.sphere_radius, G)))
    sigma, L = p.component_width, p.cat_separation_L
    half = 0.5 * L + 10.0 * sigma
    for label, w in (("plus", (1.0, 0.0)), ("minus", (0.0, 1.0)), ("mixture", (0.5, 0.5))):
        rho = MatterDensity1D.gaussian_cat(p.sphere_mass, sigma, L, -half, half, 4097, w)
        rows.append((f"grid_force_{label}", net_force_on_probe(rho, 0.0, y, p.probe_mass, G)))
    _table(out, "forces", ("quantity", "value"), rows, cfg.output.formats)
    print(f"f0 = {rows[2][1]:.4e} N")


def _trajectory(cfg, theory, index):
    horizon, dt = _horizon_dt(cfg, theory)
    if cfg.engine == "grid" and (theory in SEMICLASSICAL or theory is TheoryId.NH):
        from .grid import grid_trajectory
        rec, _ = grid_trajectory(theory, cfg.protocol, horizon, dt, cfg.seed, index=index,
                                 params=cfg.collapse)
        return rec
    return run_two_site_trajectory(theory, cfg.protocol, horizon, dt, cfg.seed, index, cfg.collapse)


def cmd_trajectory(cfg, out, index=0):
    for theory in cfg.theories:
        d = _prepare(_theory_dir(out, cfg, theory))
        rec = _trajectory(cfg, theory, index)
        _table(d, f"traj_{index}", ("t", "force"), zip(rec.times, rec.forces), cfg.output.formats)
        _table(d, f"events_{index}", ("time", "kind"), rec.events, cfg.output.formats)
        print(f"{theory.value:>12}  {len(rec.events)} events")


def cmd_ensemble(cfg, out):
    for theory in cfg.theories:
        if cfg.n_traj < 1:
            raise ConfigError("n_traj: ensemble needs at least one trajectory")
        d = _prepare(_theory_dir(out, cfg, theory))
        horizon, dt = _horizon_dt(cfg, theory)
        if cfg.engine == "grid" and (theory in SEMICLASSICAL or theory is TheoryId.NH):
            from .grid import grid_trajectory
            records = [grid_trajectory(theory, cfg.protocol, horizon, dt, cfg.seed, index=i,
                                       params=cfg.collapse)[0] for i in range(cfg.n_traj)]
        else:
            records = run_two_site_ensemble(theory, cfg.protocol, cfg.n_traj, horizon, dt, cfg.seed,
                                            cfg.collapse, workers=cfg.workers)
        s = ensemble_statistics(records)
        _table(d, "mean", ("t", "mean_force", "stderr"), zip(s.times, s.mean, s.mean_stderr),
               cfg.output.formats)
        _table(d, "corr", ("lag", "corr", "stderr"), zip(s.lags, s.corr, s.corr_stderr),
               cfg.output.formats)
        print(f"{theory.value:>12}  n={s.n_traj}  mean(t_end)={s.mean[-1]:.3e} N")


def cmd_sn_evolve(cfg, out):
    sn = cfg.sn
    G = CONSTANTS.G * sn.g_scale
    state = make_radial_gaussian(sn.sigma0, sn.mass, sn.r_max * sn.sigma0, sn.n_grid)
    dt = sn_stable_dt(state, G, sn.sphere_radius)
    n_steps = max(1, math.ceil(sn.duration / dt))
    dt = sn.duration / n_steps
    record_every = max(1, n_steps // 200)
    _, series = sn_evolve_radial(state, G, dt, n_steps, sn.sphere_radius, record_every)
    free = math.sqrt(3.0) * free_width(sn.sigma0, sn.mass, series.times)
    _table(out, "width", ("t", "width", "free_width", "energy"),
           zip(series.times, series.widths, free, series.energies), cfg.output.formats)
    print(f"width {series.widths[0]:.4e} m -> {series.widths[-1]:.4e} m "
          f"(free {free[-1]:.4e} m)")


def cmd_critical_mass(cfg, out):
    sn = cfg.sn
    bracket = detect_critical_mass(sn.sigma0, sn.mass_lo, sn.mass_hi,
                                   SNBudget(n=sn.n_grid, r_max=sn.r_max), sn.sphere_radius,
                                   CONSTANTS.G * sn.g_scale, sn.max_ratio)
    payload = {"sigma0": sn.sigma0, "sphere_radius": sn.sphere_radius, "g_scale": sn.g_scale,
               "bracket": None}
    if bracket is not None:
        amu = CONSTANTS.amu
        payload["bracket"] = {"lo_kg": bracket.lo, "hi_kg": bracket.hi,
                              "lo_amu": bracket.lo / amu, "hi_amu": bracket.hi / amu,
                              "midpoint_amu": bracket.midpoint / amu,
                              "evaluations": bracket.evaluations}
        print(f"critical mass in [{bracket.lo / amu:.3e}, {bracket.hi / amu:.3e}] amu")
    else:
        print("no collapse up to mass_hi")
    write_json(out / "critical_mass.json", payload)


def cmd_verdict(cfg, out):
    protocols = [cfg.protocol]
    rows = []
    for v in verdict_table(protocols, cfg.theories, cfg.collapse):
        rows.append((v.protocol, v.theory.value, v.signal_class.value, " ".join(v.rationale_codes)))
        print(f"{v.protocol:>12} {v.theory.value:>12}  {v.signal_class.value}")
    _table(out, "verdicts", ("protocol", "theory", "signal_class", "rationale"), rows,
           cfg.output.formats)


def cmd_scenario(cfg, out):
    for theory in cfg.theories:
        horizon, dt = _horizon_dt(cfg, theory)
        result = run_scenario(theory, cfg.protocol, cfg.n_traj, horizon, dt, cfg.seed, cfg.engine,
                              cfg.collapse, workers=cfg.workers)
        emit_outputs(result, cfg, _theory_dir(out, cfg, theory))
        print(f"{theory.value:>12}  {result.verdict.signal_class.value}  "
              f"consistent={result.consistent}")


COMMANDS = {
    "rates": cmd_rates,
    "forces": cmd_forces,
    "trajectory": cmd_trajectory,
    "ensemble": cmd_ensemble,
    "sn-evolve": cmd_sn_evolve,
    "critical-mass": cmd_critical_mass,
    "verdict": cmd_verdict,
    "scenario": cmd_scenario,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        out = _prepare(output_directory(cfg, args.out))
        if args.command == "trajectory":
            cmd_trajectory(cfg, out, args.index)
        else:
            COMMANDS[args.command](cfg, out)
    except (ConfigError, ProtocolError, ValueError) as e:
        print(f"gravcat: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInstabilityError as e:
        print(f"gravcat: numerical instability: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
