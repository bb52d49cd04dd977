"""``transdomain`` command-line interface.

Exit codes: 0 ok, 1 usage or IO error, 2 solver did not converge,
3 selftest failure.
"""

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import experiments
from .numerics import read_vector_csv, write_vector_csv
from .operators import bivariate_haar, dif_2d, dif_Ld, frame_bounds, load_operator, random_tight_frame, save_operator
from .schemes import recover_analysis_baseline, recover_frame_scheme, recover_general_scheme
from .selftest import run_selftest
from .sensing import (compose_frame_ensemble, compose_stacked_ensemble, gaussian_matrix, load_ensemble, measure,
                      plain_ensemble, save_ensemble)
from .signals import NoiseModel, gen_cosparse, gen_piecewise_image, load_signal, save_signal
from .solvers import ALGORITHMS, SynthesisProgramSpec

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED, EXIT_SELFTEST = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _ints(text):
    return [int(t) for t in text.split(",") if t]


def _floats(text):
    return [float(t) for t in text.split(",") if t]


# --- gen-operator ----------------------------------------------------------

def cmd_gen_operator(args):
    kind = args.kind
    if kind == "tight-frame":
        if args.n is None or args.d is None:
            raise UsageError("tight-frame needs --n and --d")
        op = random_tight_frame(args.n, args.d, seed=args.seed)
    elif kind in ("dif2d", "haar"):
        if args.N is None:
            raise UsageError(f"{kind} needs --N")
        op = dif_2d(args.N) if kind == "dif2d" else bivariate_haar(args.N)
    else:
        if not args.dims:
            raise UsageError("difLd needs --dims, e.g. --dims 4,4,4")
        op = dif_Ld(_ints(args.dims))
    save_operator(op, args.out)
    b = frame_bounds(op)
    print(f"wrote {args.out}.csv ({op.n}x{op.d}) and {args.out}.json")
    print(f"frame bounds: lower={b.lower:.6g} upper={b.upper:.6g} is_frame={b.is_frame}")
    return EXIT_OK


# --- gen-signal ------------------------------------------------------------

def cmd_gen_signal(args):
    if args.generator == "cosparse":
        if args.operator is None or args.cosparsity is None:
            raise UsageError("the cosparse generator needs --operator and --cosparsity")
        sig = gen_cosparse(load_operator(args.operator), args.cosparsity, seed=args.seed)
    else:
        if args.N is None:
            raise UsageError("the piecewise generator needs --N")
        sig = gen_piecewise_image(args.N, args.components, seed=args.seed)
    save_signal(sig, args.out)
    print(f"wrote {args.out}.csv (d={sig.d}, k={sig.k}) and {args.out}.json")
    return EXIT_OK


# --- sample ----------------------------------------------------------------

def _noise_from(args, seed):
    if args.sigma:
        return NoiseModel("gaussian", sigma=args.sigma, seed=seed)
    if args.epsilon:
        return NoiseModel("bounded_adversarial", epsilon=args.epsilon, seed=seed)
    return NoiseModel()


def cmd_sample(args):
    sig = load_signal(args.signal)
    omega = load_operator(args.operator) if args.operator else None
    rng = np.random.SeedSequence(args.seed)
    mat_seed, b_seed, noise_seed = (int(s.generate_state(1)[0]) for s in rng.spawn(3))
    if args.scheme == "baseline":
        ens = plain_ensemble(gaussian_matrix(args.m, sig.d, seed=mat_seed), seed=args.seed)
    else:
        if omega is None:
            raise UsageError(f"the {args.scheme} scheme needs --operator")
        if omega.d != sig.d:
            raise ValueError(f"{args.operator} acts on R^{omega.d} but {args.signal} has d={sig.d}")
        if args.scheme == "frame":
            ens = compose_frame_ensemble(gaussian_matrix(args.m, omega.n, seed=mat_seed), omega, seed=args.seed)
        else:
            if not 1 <= args.m2 < args.m:
                raise UsageError("stacked sampling needs 1 <= --m2 < --m")
            A = gaussian_matrix(args.m - args.m2, omega.n, seed=mat_seed)
            B = gaussian_matrix(args.m2, sig.d, seed=b_seed)
            ens = compose_stacked_ensemble(A, omega, B, seed=args.seed)
    meas = measure(ens, sig.x, _noise_from(args, noise_seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_ensemble(ens, out)
    write_vector_csv(out / "y.csv", meas.y)
    info = {
        "scheme": args.scheme,
        "noise_l2": float(np.linalg.norm(meas.e)),
        "noise_l2_y1": float(np.linalg.norm(meas.e1)),
        "noise_l2_y2": float(np.linalg.norm(meas.e2)),
        "signal": str(args.signal),
    }
    with open(out / "measurement.json", "w") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {ens.m} measurements ({ens.kind}) to {out}")
    return EXIT_OK


# --- recover ---------------------------------------------------------------

def cmd_recover(args):
    mdir = Path(args.measurements)
    ens = load_ensemble(mdir)
    y = read_vector_csv(mdir / "y.csv")
    if y.shape[0] != ens.m:
        raise ValueError(f"{mdir / 'y.csv'} has {y.shape[0]} entries but {mdir / 'M.csv'} has {ens.m} rows")
    truth = load_signal(args.signal) if args.signal else None
    k = args.k if args.k is not None else (max(truth.k, 1) if truth is not None else 1)
    program = SynthesisProgramSpec(args.program, k=k)
    eps = args.noise_budget if args.noise_budget is not None else 0.0
    omega = load_operator(args.operator) if args.operator else None

    if args.scheme == "baseline":
        if omega is None:
            raise UsageError("the baseline needs --operator")
        if omega.d != ens.d:
            raise ValueError(f"{args.operator}.csv acts on R^{omega.d} but {mdir / 'M.csv'} has {ens.d} columns")
        res = recover_analysis_baseline(y, ens.M, omega, eps)
    else:
        if omega is None:
            raise UsageError(f"the {args.scheme} scheme needs --operator")
        if ens.A.shape[1] != omega.n:
            raise ValueError(f"{mdir / 'A.csv'} has {ens.A.shape[1]} columns but {args.operator}.csv has "
                             f"{omega.n} rows")
        if args.scheme == "frame":
            res = recover_frame_scheme(y, ens.A, omega, program, noise_budget=eps)
        else:
            if ens.B is None:
                raise ValueError(f"{mdir} holds no B.csv block; sample with --scheme stacked")
            split = ens.split
            res = recover_general_scheme(y[:split], y[split:], ens.A, ens.B, omega, program,
                                         epsilon2=args.epsilon2, p=args.p, noise_budget=eps)
            if args.scheme == "dif":
                res.scheme = "dif_scheme"

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_vector_csv(out / "x_hat.csv", res.x_hat)
    if res.w_hat is not None:
        write_vector_csv(out / "w_hat.csv", res.w_hat)
    report = {
        "scheme": res.scheme,
        "algorithm": None if args.scheme == "baseline" else program.algorithm,
        "k": None if args.scheme == "baseline" else program.k,
        "converged": res.converged,
        "diagnostics": res.diagnostics,
    }
    if truth is not None:
        rel = float(np.linalg.norm(res.x_hat - truth.x) / np.linalg.norm(truth.x))
        report["rel_error"] = rel
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    line = f"scheme={res.scheme}"
    if report["algorithm"]:
        line += f" algorithm={program.algorithm} k={program.k}"
    line += f" converged={res.converged}"
    if truth is not None:
        line += f" rel_error={report['rel_error']:.3e}"
    print(line)
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


# --- experiment / report ---------------------------------------------------

def resolve_config(name):
    """A config path, or the name of a bundled config such as ``fig1_desk``."""
    path = Path(name)
    if path.exists():
        return path
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    bundled = resources.files("transdomain") / "configs" / f"{stem}.json"
    if bundled.is_file():
        return bundled
    raise FileNotFoundError(f"config not found: {name}")


def cmd_experiment(args):
    path = resolve_config(args.config)
    with path.open() as fh:
        data = json.load(fh)
    if args.trials is not None:
        data["trials"] = args.trials
    if args.gammas is not None:
        data["gamma_grid"] = _floats(args.gammas)
    if args.master_seed is not None:
        data["master_seed"] = args.master_seed
    config = experiments.ExperimentConfig.from_dict(data)
    result = experiments.run_sweep(config, workers=args.workers or os.cpu_count() or 1)
    out = args.out or str(Path("results") / Path(str(path)).stem)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    trials_csv, summary_csv = experiments.export_csv(result, out)
    print(experiments.format_table(result))
    print(f"wrote {trials_csv} and {summary_csv}")
    return EXIT_OK


def cmd_report(args):
    prefix = args.path
    if prefix.endswith(".json"):
        with open(prefix) as fh:
            print(json.dumps(json.load(fh), indent=2, sort_keys=True))
        return EXIT_OK
    for suffix in (".trials.csv", ".summary.csv"):
        if prefix.endswith(suffix):
            prefix = prefix[: -len(suffix)]
    print(experiments.format_table(experiments.load_sweep(prefix)))
    return EXIT_OK


def cmd_selftest(args):
    results = run_selftest(inject=args.inject_fault or ())
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  ({r.detail}, {r.seconds:.2f}s)")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("selftest failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_SELFTEST
    print("selftest passed")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="transdomain", description="Transform-domain compressed sensing toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-operator", help="build an analysis operator")
    p.add_argument("--kind", required=True, choices=["tight-frame", "dif2d", "difLd", "haar"])
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--dims")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="omega")
    p.set_defaults(func=cmd_gen_operator)

    p = sub.add_parser("gen-signal", help="draw a cosparse signal or piecewise-constant image")
    p.add_argument("--generator", choices=["cosparse", "piecewise"], default="cosparse")
    p.add_argument("--operator")
    p.add_argument("--cosparsity", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--components", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="signal")
    p.set_defaults(func=cmd_gen_signal)

    p = sub.add_parser("sample", help="draw a sensing ensemble and measure a signal")
    p.add_argument("--signal", required=True)
    p.add_argument("--operator")
    p.add_argument("--scheme", choices=["baseline", "frame", "stacked"], default="frame")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--m2", type=int, default=2)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="measurements")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("recover", help="recover a signal from sampled measurements")
    p.add_argument("--measurements", required=True)
    p.add_argument("--operator")
    p.add_argument("--scheme", choices=["frame", "general", "dif", "baseline"], default="frame")
    p.add_argument("--program", choices=list(ALGORITHMS), default="l1_bpdn")
    p.add_argument("--k", type=int)
    p.add_argument("--noise-budget", type=float)
    p.add_argument("--epsilon2", type=float, default=0.0)
    p.add_argument("--p", type=int, choices=[1, 2], default=1)
    p.add_argument("--signal", help="ground truth for reporting the relative error")
    p.add_argument("--out", default="recovery")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("experiment", help="run a gamma sweep from a JSON config")
    p.add_argument("config")
    p.add_argument("--trials", type=int)
    p.add_argument("--gammas")
    p.add_argument("--workers", type=int)
    p.add_argument("--master-seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="print the table for exported sweep CSVs or a recovery report")
    p.add_argument("path")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("selftest", help="run the built-in oracle and invariant checks")
    p.add_argument("--inject-fault", action="append", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) == "recover" and args.scheme == "dif":
            args.p = 1
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        where = f": {exc.filename}" if getattr(exc, "filename", None) else ""
        print(f"error: {exc.strerror or exc}{where}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
