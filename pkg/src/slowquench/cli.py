"""Command-line pipeline: single runs, scans, detection, plots, validation.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 ambiguous topology classification.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import config as config_mod
from . import plots, storage
from .config import ExperimentConfig
from .errors import (AmbiguousTopologyError, ConfigError, SlowquenchError)
from .integrators import (ground_state_two_level, hann_average_spin,
                          integrate, transition_probability_numeric)
from .landau_zener import LzParams, averaged_spin, transition_probability
from .models import BandField, BzGrid
from .protocols import QuenchProtocol
from .reference import chern_oracle_2d, winding_oracle_1d
from .texture import scan
from .topology import (InvariantResult, chern_2d, chern_on_bis_sphere,
                       find_zero_sets, sis_locus_predict, winding_1d)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_AMBIGUOUS = 4


def _resolve_threads(args, cfg: ExperimentConfig) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("QT_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"QT_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise ConfigError(f"QT_THREADS must be >= 1, got {n}")
        return n
    return cfg.threads


def _load_config(args) -> ExperimentConfig:
    if args.config is None:
        raise ConfigError("this command needs --config PATH")
    cfg = config_mod.load(args.config)
    return config_mod.with_overrides(cfg, method=args.method,
                                     threads=_resolve_threads(args, cfg),
                                     out=args.out)


def _sudden_initial() -> np.ndarray:
    # ground state of the diverging quench term, not of the static field
    return ground_state_two_level(0.0, 0.0, 1.0)


def _single_field(spec) -> tuple:
    eps, th, ph = spec.epsilon, spec.theta, spec.phi
    return (eps * math.sin(th) * math.cos(ph),
            eps * math.sin(th) * math.sin(ph),
            eps * math.cos(th))


def _single_initial(g: float, field, t_start: float) -> np.ndarray:
    if g == 0.0:
        return _sudden_initial()
    hx, hy, hz = field
    return ground_state_two_level(hx, hy, hz + g / t_start)


def run_single(cfg: ExperimentConfig) -> dict:
    """Sweep the abstract two-level problem over the configured couplings
    and write the probability/averaged-spin summary plus trajectories."""
    cfg.require_single()
    spec = cfg.single
    os.makedirs(cfg.out, exist_ok=True)
    field = _single_field(spec)
    results = []
    for g in spec.g_values:
        params = LzParams(g=g, epsilon=spec.epsilon, theta=spec.theta,
                          phi=spec.phi)
        p_closed = transition_probability(g, spec.theta)
        spin_closed = averaged_spin(params)
        p_num = transition_probability_numeric(g, spec.epsilon, spec.theta,
                                               spec.phi, tol=spec.tol)
        proto = QuenchProtocol.coulomb(g, t_avg_begin=spec.window[0],
                                       t_avg_end=spec.window[1])
        t_start = proto.resolve_t_start(spec.epsilon)
        psi0 = _single_initial(g, field, t_start)
        spin_num = hann_average_spin(proto, field, psi0, spec.window,
                                     tol=spec.tol)
        results.append({
            "g": g,
            "p_closed": float(p_closed),
            "p_numeric": float(p_num),
            "p_residual": float(abs(p_num - p_closed)),
            "spin_closed": [float(x) for x in spin_closed],
            "spin_numeric": [float(x) for x in spin_num],
            "spin_residual": float(np.max(np.abs(spin_num - spin_closed))),
        })
    for g in spec.trajectory_g:
        proto = QuenchProtocol.coulomb(g, t_avg_begin=spec.window[0],
                                       t_avg_end=spec.window[1])
        t_start = proto.resolve_t_start(spec.epsilon)
        psi0 = _single_initial(g, field, t_start)
        traj = integrate(proto, field, psi0, tol=spec.tol)
        storage.write_trajectory_csv(
            traj, os.path.join(cfg.out, f"trajectory_g{g:g}.csv"))
    report = {
        "single": config_mod.to_dict(cfg)["single"],
        "results": results,
        "max_p_residual": max((r["p_residual"] for r in results), default=0.0),
        "max_spin_residual": max((r["spin_residual"] for r in results),
                                 default=0.0),
    }
    storage.write_report(report, os.path.join(cfg.out, "single_report.json"))
    if cfg.plots and results:
        plots.plot_single_sweep(
            [r["g"] for r in results],
            [r["p_closed"] for r in results],
            [r["p_numeric"] for r in results],
            [r["spin_closed"] for r in results],
            [r["spin_numeric"] for r in results],
            os.path.join(cfg.out, "single_sweep.svg"))
    return report


def _detect(cfg: ExperimentConfig, tex) -> dict:
    sets = find_zero_sets(tex, cfg.tol_sis)
    invariants = []
    if tex.grid.dim == 1:
        invariants.append(winding_1d(tex, sets))
    elif tex.grid.dim == 2:
        invariants.append(chern_2d(tex, sets))
    else:
        for z in sets:
            if z.kind == "BIS" and z.faces is not None:
                invariants.append(chern_on_bis_sphere(tex, z, cfg.tol_sis))
        if not any(z.kind == "BIS" for z in sets):
            # no surface at all reads as the trivial phase, not a failure
            invariants.append(InvariantResult(
                value=0, kind="chern_on_bis_sphere",
                diagnostics={"n_bis": 0}))
    return {
        "config": config_mod.to_dict(cfg),
        "method": tex.method,
        "n_failures": len(tex.failures),
        "zero_sets": [storage.zero_set_to_dict(z) for z in sets],
        "invariants": [storage.invariant_to_dict(r) for r in invariants],
    }


def _emit_plots(cfg: ExperimentConfig, tex, sets) -> None:
    if tex.grid.dim == 1:
        plots.plot_texture_1d(tex, os.path.join(cfg.out, "texture.svg"), sets)
    elif tex.grid.dim == 2:
        plots.plot_texture_2d(tex, os.path.join(cfg.out, "texture.svg"), sets)
    else:
        plots.plot_cross_sections_3d(
            tex.model, tex.protocol,
            os.path.join(cfg.out, "cross_sections.svg"), tol=cfg.tol)


def run_scan(cfg: ExperimentConfig) -> dict:
    """Full pipeline: texture scan, zero-set detection, invariants,
    persisted map + report and optional figures."""
    cfg.require_lattice()
    os.makedirs(cfg.out, exist_ok=True)
    tex = scan(cfg.model, cfg.grid, cfg.protocol, method=cfg.method,
               tol=cfg.tol, threads=cfg.threads)
    storage.write_map_csv(tex, os.path.join(cfg.out, "map.csv"))
    report = _detect(cfg, tex)
    storage.write_report(report, os.path.join(cfg.out, "report.json"))
    if cfg.plots:
        sets = [storage.zero_set_from_dict(d) for d in report["zero_sets"]]
        _emit_plots(cfg, tex, sets)
    return report


def run_detect(cfg: ExperimentConfig) -> dict:
    """Re-analyze a previously written map file with the current
    detection settings."""
    cfg.require_lattice()
    path = os.path.join(cfg.out, "map.csv")
    if not os.path.exists(path):
        raise ConfigError(f"no map file at {path}; run scan first")
    tex = storage.read_map_csv(path, cfg.model, cfg.grid, cfg.protocol)
    report = _detect(cfg, tex)
    storage.write_report(report, os.path.join(cfg.out, "report.json"))
    return report


def run_plot(cfg: ExperimentConfig) -> None:
    """Emit figures from an existing map/report pair."""
    cfg.require_lattice()
    path = os.path.join(cfg.out, "map.csv")
    if not os.path.exists(path):
        raise ConfigError(f"no map file at {path}; run scan first")
    tex = storage.read_map_csv(path, cfg.model, cfg.grid, cfg.protocol)
    report_path = os.path.join(cfg.out, "report.json")
    sets = []
    if os.path.exists(report_path):
        report = storage.read_report(report_path)
        sets = [storage.zero_set_from_dict(d)
                for d in report.get("zero_sets", [])]
    _emit_plots(cfg, tex, sets)


def run_validate(threads: int = 1) -> list:
    """Cross-check the pipeline against its independent oracles on small
    reference configurations; returns (name, passed, detail) triples."""
    checks = []

    worst = 0.0
    for g in (0.05, 1.0, 6.0):
        for theta in (0.4, 1.6, 2.8):
            p_ref = transition_probability_numeric(g, 2.0, theta, tol=1e-10)
            worst = max(worst, abs(p_ref - transition_probability(g, theta)))
    checks.append(("transition probability closed form vs integrator",
                   worst < 1e-4, f"max residual {worst:.3g}"))

    model = BandField.chain_1d(m_z=0.0, t_so=0.2)
    tex = scan(model, BzGrid(dim=1, n_points=201),
               QuenchProtocol.coulomb(1.0), method="analytic")
    sets = find_zero_sets(tex)
    nu = winding_1d(tex, sets).value
    nu_ref = winding_oracle_1d(model)
    checks.append(("1D winding detector vs band-geometry oracle",
                   nu == nu_ref, f"detector {nu}, oracle {nu_ref}"))

    cstar = sis_locus_predict(1.0)
    sis_cos = []
    for z in sets:
        if z.kind == "SIS":
            h = model.field(float(z.points[0, 0]))
            sis_cos.append(float(h[1] / np.hypot(h[0], h[1])))
    sis_ok = bool(sis_cos) and all(abs(c - cstar) < 0.02 for c in sis_cos)
    checks.append(("SIS locations vs sis_locus_predict", sis_ok,
                   f"cos(theta) at SIS {[round(c, 5) for c in sis_cos]}, "
                   f"predicted {cstar:.5f}"))

    for m_z in (1.0, -1.0):
        model2 = BandField.qah_2d(m_z=m_z, t_so_x=0.2, t_so_y=0.2)
        tex2 = scan(model2, BzGrid(dim=2, n_points=101),
                    QuenchProtocol.coulomb(5.0), method="analytic",
                    threads=threads)
        c_det = chern_2d(tex2, find_zero_sets(tex2)).value
        c_ref = chern_oracle_2d(model2)
        checks.append((f"2D Chern detector vs plaquette oracle (m_z={m_z:g})",
                       c_det == c_ref, f"detector {c_det}, oracle {c_ref}"))
    return checks


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slowquench",
        description="Slow-quench spin textures and their invariants")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (("single", "abstract two-level quench report"),
                       ("scan", "texture scan + detection + invariants"),
                       ("detect", "re-analyze an existing map file"),
                       ("plot", "figures from existing map/report files"),
                       ("validate", "run the oracle cross-check suite")):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", default=None, metavar="PATH",
                       help="JSON experiment configuration")
        p.add_argument("--out", default=None, metavar="DIR",
                       help="output directory (overrides config)")
        p.add_argument("--threads", type=int, default=None, metavar="N",
                       help="scan worker threads (QT_THREADS also honored)")
        p.add_argument("--method", default=None,
                       choices=["analytic", "numeric", "auto"],
                       help="texture evaluation route (overrides config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            cfg = (config_mod.load(args.config)
                   if args.config is not None else ExperimentConfig())
            threads = _resolve_threads(args, cfg)
            failed = 0
            for name, ok, detail in run_validate(threads):
                print(f"{'ok  ' if ok else 'FAIL'} {name}: {detail}")
                failed += 0 if ok else 1
            if failed:
                print(f"{failed} validation check(s) failed")
                return EXIT_NUMERICAL
            return EXIT_OK
        cfg = _load_config(args)
        if args.command == "single":
            report = run_single(cfg)
            print(f"wrote {os.path.join(cfg.out, 'single_report.json')} "
                  f"(max P residual {report['max_p_residual']:.3g})")
        elif args.command == "scan":
            report = run_scan(cfg)
            values = [r["value"] for r in report["invariants"]]
            print(f"wrote {os.path.join(cfg.out, 'report.json')} "
                  f"(invariants {values})")
        elif args.command == "detect":
            report = run_detect(cfg)
            values = [r["value"] for r in report["invariants"]]
            print(f"wrote {os.path.join(cfg.out, 'report.json')} "
                  f"(invariants {values})")
        elif args.command == "plot":
            run_plot(cfg)
            print(f"wrote figures to {cfg.out}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AmbiguousTopologyError as exc:
        print(f"ambiguous topology: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except SlowquenchError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
