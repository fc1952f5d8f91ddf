"""Batch experiment runner.

Every subcommand writes a manifest JSON next to its outputs so a run can be
replayed exactly; results are JSON records, grids and ledgers are CSV.
Exit codes: 0 ok, 1 usage/schema error, 2 impossible outcome, 3 truncation
failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys

import numpy as np

from . import __version__, breeding, catalysis, optimize, targets, wigner
from .fock import (
    DEFAULT_CUTOFF,
    ImpossibleOutcomeError,
    TruncationError,
    fidelity,
    load_state,
    save_state,
    state_to_dict,
    _atomic_write_text,
)
from .ops import coherent_vector, displacement_matrix

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IMPOSSIBLE = 2
EXIT_TRUNCATION = 3


def _write_json(path: str, payload: dict) -> None:
    _atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True))


def _manifest(args, command: str, extra: dict) -> dict:
    return {
        "command": command,
        "parameters": extra,
        "seed": args.seed,
        "cutoff": args.cutoff,
        "tail_tol": args.tail_tol,
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def _emit(args, name: str, manifest: dict, result: dict) -> None:
    os.makedirs(args.out_dir, exist_ok=True)
    _write_json(os.path.join(args.out_dir, f"{name}.manifest.json"), manifest)
    _write_json(os.path.join(args.out_dir, f"{name}.result.json"), result)


def _load_descriptor(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: cannot read manifest ({exc})") from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_displace(args) -> int:
    theta = args.theta if args.theta is not None else float(np.arccos(np.sqrt(args.r2)))
    params = {"alpha": args.alpha, "theta": theta, "n": args.n, "eta": args.eta,
              "paris": args.paris, "beta": args.beta}
    if args.paris:
        mixture = catalysis.paris_displacement_mixture(args.alpha, theta,
                                                       args.cutoff)
        target = targets.TargetSpec("displaced_fock",
                                    beta=float(np.sin(theta) * args.alpha))
        fid = fidelity(mixture, target.build(args.cutoff))
        beta_opt = float(np.sin(theta) * args.alpha)
        prob = 1.0
    else:
        step = catalysis.CatalysisStep(theta=theta, n_detect=args.n, eta=args.eta)
        state, prob = catalysis.catalyze_step(
            coherent_vector(args.alpha, args.cutoff), step)
        if args.eta == 1.0:
            beta_opt = args.beta if args.beta is not None else \
                float(np.sin(theta) * args.alpha)
            fid = catalysis.displaced_photon_fidelity(args.alpha, theta, args.n,
                                                      beta_opt)
        else:
            beta_opt = args.beta if args.beta is not None else \
                float(np.sqrt(max(args.alpha**2 - args.n / args.eta, 0.0)))
            target = targets.TargetSpec("displaced_fock", beta=beta_opt)
            fid = fidelity(state, target.build(args.cutoff))
    result = {"fidelity": fid, "probability": prob, "beta": beta_opt}
    print(f"fidelity={fid:.6f} probability={prob:.6e} beta={beta_opt:.6f}")
    _emit(args, "displace", _manifest(args, "displace", params), result)
    return EXIT_OK


def cmd_catalyze(args) -> int:
    desc = _load_descriptor(args.manifest)
    state, steps, cutoff = catalysis.experiment_from_dict(desc)
    outcome = catalysis.cascade(state, steps)
    state_path = os.path.join(args.out_dir, "catalyze.state.json")
    os.makedirs(args.out_dir, exist_ok=True)
    save_state(state_path, outcome.state)
    result = {
        "probability": outcome.probability,
        "per_step_probs": list(outcome.step_probabilities),
        "state": os.path.basename(state_path),
    }
    print(f"probability={outcome.probability:.6e} state={state_path}")
    _emit(args, "catalyze", _manifest(args, "catalyze", desc), result)
    return EXIT_OK


def _breed_command(args, phase: float, name: str) -> int:
    a = load_state(args.state_a)
    b = load_state(args.state_b if args.state_b else args.state_a)
    if args.homodyne is not None:
        cfg = breeding.BreedConfig(phase=phase, n_detect=None,
                                   homodyne=(args.homodyne, args.value))
    else:
        cfg = breeding.BreedConfig(phase=phase, n_detect=args.n)
    out, prob = breeding.breed(a, b, cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    state_path = os.path.join(args.out_dir, f"{name}.state.json")
    save_state(state_path, out)
    result = {"probability": prob, "state": os.path.basename(state_path)}
    params = {"state_a": args.state_a, "state_b": args.state_b,
              "phase": phase, "n": args.n, "homodyne": args.homodyne,
              "value": args.value}
    print(f"probability={prob:.6e} state={state_path}")
    _emit(args, name, _manifest(args, name, params), result)
    return EXIT_OK


def cmd_breed(args) -> int:
    return _breed_command(args, args.phase, "breed")


def cmd_hex(args) -> int:
    return _breed_command(args, float(np.pi / 3), "hex")


def cmd_sweep(args) -> int:
    betas = np.linspace(args.beta_min, args.beta_max, args.beta_steps)
    xis = np.linspace(args.xi_min, args.xi_max, args.xi_steps)
    fids, probs = breeding.breed_sweep(args.m, betas, xis, args.cutoff)
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "sweep.csv")
    breeding.write_sweep_csv(csv_path, betas, xis, fids, probs)
    params = {"m": args.m, "beta": [args.beta_min, args.beta_max, args.beta_steps],
              "xi": [args.xi_min, args.xi_max, args.xi_steps]}
    print(f"wrote {csv_path}")
    _emit(args, "sweep", _manifest(args, "sweep", params),
          {"csv": os.path.basename(csv_path),
           "max_fidelity": float(fids.max())})
    return EXIT_OK


def cmd_wigner(args) -> int:
    state = load_state(args.state)
    grid = wigner.wigner_grid(state, (args.qmin, args.qmax),
                              (args.pmin, args.pmax), args.points)
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "wigner.csv")
    wigner.write_grid_csv(csv_path, grid)
    sidecar = dict(grid.metadata(), state=os.path.basename(args.state))
    _write_json(os.path.join(args.out_dir, "wigner.meta.json"), sidecar)
    params = {"state": args.state, "q": [args.qmin, args.qmax],
              "p": [args.pmin, args.pmax], "points": args.points}
    print(f"wrote {csv_path}")
    _emit(args, "wigner", _manifest(args, "wigner", params),
          {"csv": os.path.basename(csv_path), "volume": grid.volume(),
           "min": float(grid.values.min())})
    return EXIT_OK


def cmd_optimize(args) -> int:
    tuples = None
    if args.tuples:
        tuples = [tuple(int(n) for n in chunk.split(","))
                  for chunk in args.tuples.split(";")]
    config = optimize.SimplexConfig(seed=args.seed, restarts=args.restarts)
    results = optimize.optimize_cascade(
        args.steps, n_bound=args.n_bound, cutoff=args.cutoff,
        detection_tuples=tuples, config=config)
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "optimize.csv")
    lines = ["detections,fidelity,probability,alpha,thetas,beta,xi,delta"]
    for res in results:
        pars = res.parameters
        lines.append(",".join([
            " ".join(str(n) for n in res.detections),
            repr(res.fidelity), repr(res.probability), repr(pars["alpha"]),
            " ".join(repr(t) for t in pars["thetas"]),
            repr(pars["beta"]), repr(pars["xi"]), repr(pars["delta"]),
        ]))
    _atomic_write_text(csv_path, "\n".join(lines) + "\n")
    params = {"steps": args.steps, "n_bound": args.n_bound,
              "tuples": args.tuples, "restarts": args.restarts}
    best = results[0] if results else None
    print(f"wrote {csv_path}" + (f" best F={best.fidelity:.6f}" if best else ""))
    _emit(args, "optimize", _manifest(args, "optimize", params),
          {"csv": os.path.basename(csv_path),
           "best_fidelity": best.fidelity if best else None,
           "best_detections": list(best.detections) if best else None})
    return EXIT_OK


def cmd_threshold(args) -> int:
    desc = _load_descriptor(args.manifest)
    state, steps, cutoff = catalysis.experiment_from_dict(desc)
    if "coherent" not in desc.get("input", {}):
        raise ValueError("input: threshold aggregation needs a coherent input")
    alpha = desc["input"]["coherent"]
    alpha = float(alpha if not isinstance(alpha, list) else alpha[0])
    config = optimize.SimplexConfig(seed=args.seed, restarts=3,
                                    tolerance=1e-6, max_iterations=600)
    accept = optimize.threshold_success(alpha, steps, args.f_thr,
                                        n_bound=args.n_bound, cutoff=cutoff,
                                        config=config)
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "threshold.csv")
    lines = ["detections,fidelity,probability,beta,xi,delta"]
    for entry in accept.entries():
        lines.append(",".join([
            " ".join(str(n) for n in entry.detections),
            repr(entry.fidelity), repr(entry.probability),
            repr(entry.beta), repr(entry.xi), repr(entry.delta)]))
    _atomic_write_text(csv_path, "\n".join(lines) + "\n")
    result = {"aggregate_probability": accept.aggregate_probability,
              "base_probability": accept.base.probability,
              "ratio": accept.ratio, "accepted": len(accept.entries()),
              "csv": os.path.basename(csv_path)}
    print(f"aggregate={accept.aggregate_probability:.6e} "
          f"ratio={accept.ratio:.2f} accepted={len(accept.entries())}")
    _emit(args, "threshold", _manifest(args, "threshold",
                                       dict(desc, f_thr=args.f_thr)), result)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photocat",
        description="photon-catalysis state engineering toolbox")
    parser.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default=".")
    parser.add_argument("--tail-tol", type=float, default=1e-8)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("displace", help="single-step displaced-photon preparation")
    p.add_argument("--alpha", type=float, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--r2", type=float)
    group.add_argument("--theta", type=float)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--paris", action="store_true",
                   help="partial-trace displacement baseline instead of detection")
    p.set_defaults(func=cmd_displace)

    p = sub.add_parser("catalyze", help="run a cascade from a descriptor file")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_catalyze)

    for name, func in (("breed", cmd_breed), ("hex", cmd_hex)):
        p = sub.add_parser(name, help=f"{name} two states")
        p.add_argument("--state-a", required=True)
        p.add_argument("--state-b", default=None)
        if name == "breed":
            p.add_argument("--phase", type=float, default=0.0)
        p.add_argument("--n", type=int, default=0)
        p.add_argument("--homodyne", choices=["q", "p"], default=None)
        p.add_argument("--value", type=float, default=0.0)
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="breeding fidelity/probability grid")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--beta-min", type=float, required=True)
    p.add_argument("--beta-max", type=float, required=True)
    p.add_argument("--beta-steps", type=int, default=10)
    p.add_argument("--xi-min", type=float, required=True)
    p.add_argument("--xi-max", type=float, required=True)
    p.add_argument("--xi-steps", type=int, default=10)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("wigner", help="phase-space grid of a stored state")
    p.add_argument("--state", required=True)
    p.add_argument("--qmin", type=float, default=-7.0)
    p.add_argument("--qmax", type=float, default=7.0)
    p.add_argument("--pmin", type=float, default=-7.0)
    p.add_argument("--pmax", type=float, default=7.0)
    p.add_argument("--points", type=int, default=281)
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("optimize", help="optimize cascades over detection tuples")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--n-bound", type=int, default=10)
    p.add_argument("--tuples", default=None,
                   help="semicolon-separated comma tuples, e.g. '1,2;2,1'")
    p.add_argument("--restarts", type=int, default=8)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("threshold", help="threshold-fidelity success aggregation")
    p.add_argument("--manifest", required=True)
    p.add_argument("--f-thr", type=float, required=True)
    p.add_argument("--n-bound", type=int, default=10)
    p.set_defaults(func=cmd_threshold)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ImpossibleOutcomeError as exc:
        print(f"impossible outcome: {exc}", file=sys.stderr)
        return EXIT_IMPOSSIBLE
    except TruncationError as exc:
        print(f"truncation failure: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
