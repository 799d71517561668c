"""Command-line entry point.

Exit codes: 0 success, 2 bad configuration, 1 failure while running.
"""
from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional

from . import experiments as ex
from .estimators import Sampled, fiim_estimate, riim_estimate, riim_poisson_estimate
from .extrapolation import poly_weights, riim_coefficients
from .insertion import InsertionPlan, apply_plan, fiim_transform
from .simulator import evolve, expectation, ideal_expectation, sample_shots


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--scenario", choices=ex.SCENARIOS)
    p.add_argument("--noise", choices=ex.NOISE_KINDS)
    p.add_argument("--eps", type=float)
    p.add_argument("--t1", type=float)
    p.add_argument("--t2", type=float)
    p.add_argument("--gate-duration", type=float, dest="gate_duration")
    p.add_argument("--shots", type=int, help="measurements per circuit (default: exact)")
    p.add_argument("--seed", type=int)
    p.add_argument("--time", type=float, help="trotter-sho evolution time")
    p.add_argument("--steps", type=int, help="trotter-sho step count")
    p.add_argument("--x-max", type=float, dest="x_max")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="identity-zne", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evaluate one circuit under noise")
    _common(p)
    p.add_argument("--r", type=int, default=1, help="repeat every CNOT r times")
    p.add_argument("--plan", help="per-CNOT repetition counts, e.g. 3,1")
    p.add_argument("--dump-circuit", action="store_true", help="print the executed circuit")

    p = sub.add_parser("fiim", help="fixed identity insertion estimate")
    _common(p)
    p.add_argument("--nmax", type=int, dest="n_max")
    p.add_argument("--nfit", type=int, dest="n_fit")
    p.add_argument("--dump-circuit", action="store_true")

    p = sub.add_parser("riim", help="random identity insertion estimate")
    _common(p)
    p.add_argument("--nmax", type=int, dest="n_max")
    p.add_argument("--nu", type=_float_list, help="Poisson means; switches to the Poisson variant")
    p.add_argument("--plans", type=int)
    p.add_argument("--dump-circuit", action="store_true")

    p = sub.add_parser("weights", help="print extrapolation coefficients")
    p.add_argument("--nmax", type=int, dest="n_max", default=1)
    p.add_argument("--nfit", type=int, dest="n_fit")
    p.add_argument("--riim", action="store_true", help="RIIM operator-set coefficients")
    p.add_argument("--ncnots", type=int, default=4, help="CNOT count for --riim")

    p = sub.add_parser("experiment", help="run a sweep and write CSV")
    p.add_argument("target", help="scenario name, figure3 or figure8")
    _common(p)
    p.add_argument("--method", choices=ex.METHODS)
    p.add_argument("--nmax", type=int, dest="n_max")
    p.add_argument("--nfit", type=int, dest="n_fit")
    p.add_argument("--sweep-param", choices=ex.SWEEP_PARAMS, dest="sweep_param")
    p.add_argument("--sweep", type=_float_list)
    p.add_argument("--nu", type=_float_list)
    p.add_argument("--plans", type=int)
    p.add_argument("--out", help="CSV path (default: stdout)")
    return parser


_CONFIG_KEYS = {f for f in ex.ExperimentConfig.__dataclass_fields__}


def _config(args: argparse.Namespace, base=None, **overrides) -> ex.ExperimentConfig:
    file_values = ex.load_config(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if k in _CONFIG_KEYS}
    if flags.get("sweep") is not None:
        flags["sweep"] = tuple(flags["sweep"])
    if flags.get("nu") is not None:
        flags["nu"] = tuple(flags["nu"])
    return ex.build_config(base or {}, file_values, flags, overrides)


# single estimates have no sweep; r sweeps are reserved for method none
_SINGLE_RUN = {"sweep_param": "eps"}


def _print_pairs(pairs: Dict[str, object]):
    for k, v in pairs.items():
        print(f"{k}: {v:.17g}" if isinstance(v, float) else f"{k}: {v}")


def _setup(cfg: ex.ExperimentConfig):
    setup = ex.SCENARIO_SETUP[cfg.scenario]
    return ex.scenario_circuit(cfg), ex.noise_model(cfg), setup.observable, setup.init


def cmd_simulate(args) -> int:
    cfg = _config(args)
    circuit, noise, obs, init = _setup(cfg)
    try:
        if args.plan:
            run = apply_plan(circuit, InsertionPlan.parse(args.plan))
        else:
            run = fiim_transform(circuit, args.r)
    except ValueError as exc:
        raise ex.ConfigError(str(exc)) from None
    if args.dump_circuit:
        print(run.dumps(), end="")
    rho = evolve(run, init, noise)
    out = {"cnots": run.cnot_count}
    if cfg.shots is None:
        out["value"] = expectation(rho, obs)
    else:
        res = sample_shots(rho, obs, cfg.shots, cfg.seed)
        out.update(value=res.mean, stat_error=res.std_error)
    out["reference"] = ideal_expectation(circuit, obs, init)
    _print_pairs(out)
    return 0


def _mode(cfg: ex.ExperimentConfig) -> Optional[Sampled]:
    return None if cfg.shots is None else Sampled(cfg.seed, cfg.shots)


def _report(est, circuit, obs, init):
    reference = ideal_expectation(circuit, obs, init)
    _print_pairs(
        {
            "value": est.value,
            "reference": reference,
            "error": abs(est.value - reference),
            "stat_error": est.stat_error,
            "gate_budget": est.gate_budget,
        }
    )
    print("weights: " + ",".join(format(w, ".17g") for w in est.weights))


def cmd_fiim(args) -> int:
    cfg = _config(args, _SINGLE_RUN, method="fiim")
    circuit, noise, obs, init = _setup(cfg)
    if args.dump_circuit:
        print(fiim_transform(circuit, 1 + 2 * cfg.n_max).dumps(), end="")
    est = fiim_estimate(circuit, obs, noise, cfg.n_max, cfg.n_fit, _mode(cfg), init)
    _report(est, circuit, obs, init)
    return 0


def cmd_riim(args) -> int:
    poisson = args.nu is not None
    cfg = _config(args, _SINGLE_RUN, method="riim-poisson" if poisson else "riim")
    circuit, noise, obs, init = _setup(cfg)
    if args.dump_circuit:
        print(circuit.dumps(), end="")
    if poisson:
        est = riim_poisson_estimate(circuit, obs, noise, cfg.nu, cfg.plans, cfg.seed, cfg.shots, init)
    else:
        est = riim_estimate(circuit, obs, noise, cfg.n_max, _mode(cfg), init)
    _report(est, circuit, obs, init)
    return 0


def cmd_weights(args) -> int:
    try:
        if args.riim:
            coefs = riim_coefficients(args.n_max, args.ncnots)
            for opset, a in coefs:
                print(f"{opset} {a} x{opset.placement_count(args.ncnots)}")
            print(f"gate_budget {coefs.gate_budget}")
        else:
            n_fit = args.n_max if args.n_fit is None else args.n_fit
            for n, w in enumerate(poly_weights(args.n_max, n_fit)):
                print(f"r={1 + 2 * n} {w}")
    except ValueError as exc:
        raise ex.ConfigError(str(exc)) from None
    return 0


def cmd_experiment(args) -> int:
    if args.target == "figure3":
        rows = ex.figure3_sweep(args.eps if args.eps is not None else 0.01)
    elif args.target == "figure8":
        rows = ex.figure8_sweep(
            args.eps if args.eps is not None else 0.01, args.time if args.time is not None else 0.5
        )
    elif args.target in ex.SCENARIOS:
        rows = ex.run_experiment(_config(args, scenario=args.target))
    else:
        raise ex.ConfigError(
            f"unknown experiment {args.target!r}; choose from {', '.join(ex.SCENARIOS)}, figure3, figure8"
        )
    if args.out:
        ex.emit_csv(rows, args.out)
    else:
        ex.write_csv(rows, sys.stdout)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "fiim": cmd_fiim,
    "riim": cmd_riim,
    "weights": cmd_weights,
    "experiment": cmd_experiment,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ex.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
