"""Command-line entry point: ``spinlind <command> --config run.toml``.

Commands
--------
solve       steady state and heat currents of one chain
spectrum    eigenvalues and transition channels
sweep       currents against the bulk temperature (or a common field angle)
modulator   currents against the field angle of the swept spins
verify      oracle self-checks, JSON report, nonzero exit on failure
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import FORMATS, RunConfig, SWEEP_PARAMS, parse_config
from .errors import ArgumentError, ConfigError, SpinlindError
from .spectral import build_channels, diagonalize
from .transport import (ModulatorScenario, bulk_temperature_sweep, modulator_spec,
                        run_modulator, solve_chain)
from .verify import run_suites

SWEEP_HEADER = ("theta_or_Tb", "N", "mu", "Q_mu", "residual")


def fmt(x):
    """Float with 17 significant digits; integers unchanged."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def csv_text(header, rows):
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        path = Path(out)
        if path.parent != Path(""):
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def _worker_count(args, cfg):
    if args.workers is not None:
        return args.workers
    env = os.environ.get("SPINLIND_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ArgumentError(f"SPINLIND_WORKERS={env!r} is not an integer") from exc
        if n < 1:
            raise ArgumentError("SPINLIND_WORKERS must be >= 1")
        return n
    return cfg.workers if cfg is not None else 1


def _warn_default_initial(cfg, kappas=()):
    """Warn when the steady state may depend on the (defaulted) initial state."""
    if cfg.initial_given:
        return
    spec = cfg.spec
    may_split = np.any(spec.kappa == 0) or any(k == 0 for k in kappas) or spec.is_transverse
    if may_split:
        warnings.warn("no initial state given; weighting the independent subspaces equally",
                      UserWarning, stacklevel=2)


def cmd_solve(cfg, args):
    _warn_default_initial(cfg)
    sol = solve_chain(cfg.spec, cfg.initial)
    st = sol.steady
    es = sol.eigensystem
    form = args.format or cfg.format or "csv"
    if form == "json":
        payload = {
            "populations": st.populations.tolist(),
            "nullspace_dim": int(st.nullspace_dim),
            "component_fractions": np.asarray(st.component_fractions).tolist(),
            "residual_norm": float(st.residual_norm),
            "component_labels": list(sol.decomposition.labels),
            "eigenvalues": es.eigenvalues.tolist(),
            "currents": sol.currents.tolist(),
            "current_residual": sol.report.residual,
        }
        return _json_text(payload)
    rows = [(i, lam, p) for i, (lam, p) in enumerate(zip(es.eigenvalues, st.populations), 1)]
    text = csv_text(("level", "eigenvalue", "population"), rows)
    text += "\n" + csv_text(("mu", "Q_mu"), list(enumerate(sol.currents, 1)))
    return text


def cmd_spectrum(cfg, args):
    es = diagonalize(cfg.spec)
    ch = build_channels(es, cfg.spec)
    form = args.format or cfg.format or "csv"
    if form == "json":
        return _json_text({
            "eigenvalues": es.eigenvalues.tolist(),
            "channels": [{"mu": int(c.mu), "lower": int(c.lower) + 1, "upper": int(c.upper) + 1,
                          "omega": float(c.omega), "coeff": float(c.coeff)} for c in ch],
        })
    levels = csv_text(("level", "eigenvalue"), list(enumerate(es.eigenvalues, 1)))
    chans = csv_text(("mu", "lower", "upper", "omega", "coeff"),
                     [(int(c.mu), int(c.lower) + 1, int(c.upper) + 1, c.omega, c.coeff) for c in ch])
    return levels + "\n" + chans


def _sweep_outputs(named_tables, form, out):
    """Text for each output; ``named_tables`` maps a file tag to tables."""
    results = []
    multi = len(named_tables) > 1
    for tag, tables in named_tables.items():
        rows = [row for tab in tables for row in tab.rows()]
        if form == "json":
            text = _json_text({"columns": list(SWEEP_HEADER), "rows": [list(r) for r in rows]})
        else:
            text = csv_text(SWEEP_HEADER, rows)
        target = out
        if out is not None and multi:
            p = Path(out)
            target = str(p.with_name(f"{p.stem}_{tag}{p.suffix}"))
        results.append((tag, target, text))
    return results


def cmd_sweep(cfg, args):
    param = args.param or cfg.sweep_param
    if param not in SWEEP_PARAMS:
        raise ArgumentError(f"unknown sweep parameter {param!r}")
    if not cfg.sweep_values:
        raise ConfigError("sweep needs [sweep] values", field="sweep.values")
    workers = _worker_count(args, cfg)
    form = args.format or cfg.format or "csv"
    spec = cfg.spec
    if param == "theta":
        _warn_default_initial(cfg)
        scen = ModulatorScenario(tuple(range(1, spec.n_spins + 1)), cfg.sweep_values)
        table = run_modulator(scen, spec, initial=cfg.initial, workers=workers)
        return _sweep_outputs({"theta": [table]}, form, args.out or cfg.out)
    if spec.n_spins < 3:
        raise ArgumentError("a bulk temperature sweep needs at least three spins")
    kappas = cfg.kappa_b or (spec.dissipation_rate[1],)
    _warn_default_initial(cfg, kappas)
    tables = bulk_temperature_sweep(spec, cfg.sweep_values, kappas,
                                    chain_lengths=cfg.chain_lengths or None,
                                    initial=cfg.initial, workers=workers)
    named = {}
    for kb in kappas:
        named[f"kb{fmt(kb)}"] = [tables[key] for key in tables if key[0] == kb]
    return _sweep_outputs(named, form, args.out or cfg.out)


def cmd_modulator(cfg, args):
    if cfg is None:
        cfg = RunConfig(modulator_spec(), initial_given=True)
    scenario = ModulatorScenario.named(args.scenario, cfg.points) if args.scenario else \
        cfg.modulator_scenario()
    _warn_default_initial(cfg)
    table = run_modulator(scenario, cfg.spec, initial=cfg.initial,
                          workers=_worker_count(args, cfg))
    form = args.format or cfg.format or "csv"
    return _sweep_outputs({"theta": [table]}, form, args.out or (cfg.out if cfg else None))


def cmd_verify(cfg, args):
    results = run_suites(full=args.full)
    payload = {"passed": all(r.passed for r in results),
               "suites": [r.to_dict() for r in results]}
    return _json_text(payload), payload["passed"]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spinlind",
        description="Steady states and heat currents of dissipative Ising chains.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="TOML run configuration")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=FORMATS, help="output format")
        p.add_argument("--workers", type=int, help="worker processes for sweeps "
                       "(fallback: SPINLIND_WORKERS, then the config)")

    common(sub.add_parser("solve", help="steady state and currents"))
    common(sub.add_parser("spectrum", help="eigenvalues and transition channels"))
    p = sub.add_parser("sweep", help="currents against Tb or a common angle")
    common(p)
    p.add_argument("--param", choices=SWEEP_PARAMS, help="override [sweep] param")
    p = sub.add_parser("modulator", help="currents against the swept spins' field angle")
    common(p, config_required=False)
    p.add_argument("--scenario", choices=("s2", "s12"), help="override [modulator] scenario")
    p = sub.add_parser("verify", help="run the oracle self-checks")
    common(p, config_required=False)
    p.add_argument("--full", action="store_true", help="include the superoperator check")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers is not None and args.workers < 1:
        parser.error("--workers must be >= 1")
    warnings.formatwarning = lambda msg, *a, **k: f"spinlind: warning: {msg}\n"
    try:
        cfg = parse_config(args.config) if args.config else None
        if args.command == "verify":
            text, ok = cmd_verify(cfg, args)
            _emit(text, args.out)
            return 0 if ok else 1
        handler = {"solve": cmd_solve, "spectrum": cmd_spectrum,
                   "sweep": cmd_sweep, "modulator": cmd_modulator}[args.command]
        result = handler(cfg, args)
        if isinstance(result, str):
            _emit(result, args.out or (cfg.out if cfg else None))
        else:
            for i, (_, target, text) in enumerate(result):
                if target is None and i:
                    sys.stdout.write("\n")
                _emit(text, target)
    except ConfigError as exc:
        print(f"spinlind: config error: {exc}", file=sys.stderr)
        return 2
    except SpinlindError as exc:
        print(f"spinlind: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
