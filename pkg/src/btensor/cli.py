"""Batch command-line interface.

Subcommands: ``ls-solve`` (closed-form least squares), ``decompose`` (single
or summed three-factor model), ``baseline`` (CP / Tucker), and ``experiment``
(the synthetic rank-sweep benchmark).
"""
from __future__ import annotations

import argparse
import os
import sys

from .btf import read_btf, write_btf
from .decomposition import FitConfig, bd_als, sum_bd_hals
from .baselines import cp_als, tucker_hooi
from .experiment import ExperimentConfig, run_experiment
from .lstsq import ls_solve_general
from .tensor import DenseTensor


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad shape {text!r}, expected d1,d2,...")
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"bad shape {text!r}, dims must be >= 1")
    return dims


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}")


def _write_trace_csv(path: str, trace) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("iter,objective\n")
        for i, obj in enumerate(trace.objective_per_iter, start=1):
            fh.write(f"{i},{format(obj, '.17g')}\n")


def _cmd_ls_solve(args) -> int:
    observed = read_btf(args.observed)
    known = read_btf(args.known)
    solution = ls_solve_general(observed, known, args.unknown_shape)
    write_btf(solution, args.out)
    return 0


def _fit_config(args) -> FitConfig:
    return FitConfig(max_iters=args.max_iters, rel_tol=args.tol, seed=args.seed)


def _cmd_decompose(args) -> int:
    y = read_btf(args.input)
    cfg = _fit_config(args)
    if args.model == "bd":
        factors, trace = bd_als(y, cfg)
        terms = [factors]
    else:
        terms, trace = sum_bd_hals(y, args.R, cfg)
    for t, f in enumerate(terms):
        write_btf(f.a, f"{args.out_prefix}_t{t}_A.btf")
        write_btf(f.b, f"{args.out_prefix}_t{t}_B.btf")
        write_btf(f.c, f"{args.out_prefix}_t{t}_C.btf")
    _write_trace_csv(f"{args.out_prefix}_trace.csv", trace)
    return 0


def _cmd_baseline(args) -> int:
    y = read_btf(args.input)
    cfg = _fit_config(args)
    if args.method == "cp":
        if len(args.rank) != 1:
            raise SystemExit("cp takes a single integer rank")
        model, trace = cp_als(y, args.rank[0], cfg)
        mats = {"U1": model.u1, "U2": model.u2, "U3": model.u3}
    else:
        ranks = args.rank * 3 if len(args.rank) == 1 else args.rank
        if len(ranks) != 3:
            raise SystemExit("tucker takes one rank or r1,r2,r3")
        model, trace = tucker_hooi(y, ranks, cfg)
        mats = {"core": model.core, "U1": model.u1, "U2": model.u2, "U3": model.u3}
    for name, mat in mats.items():
        write_btf(DenseTensor(mat), f"{args.out_prefix}_{name}.btf")
    _write_trace_csv(f"{args.out_prefix}_trace.csv", trace)
    return 0


def _load_toml_config(path: str) -> ExperimentConfig:
    try:
        import tomllib  # py >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    kwargs = {}
    for key in ("dims", "seeds", "bd_R_grid", "cp_R_grid", "tucker_rank_grid"):
        if key in raw:
            kwargs[key] = tuple(raw[key])
    for key in ("sigma", "output_dir"):
        if key in raw:
            kwargs[key] = raw[key]
    if "fit" in raw:
        kwargs["fit"] = FitConfig(**raw["fit"])
    return ExperimentConfig(**kwargs)


def _cmd_experiment(args) -> int:
    if args.config:
        cfg = _load_toml_config(args.config)
    else:
        cfg = ExperimentConfig(
            dims=args.dims,
            sigma=args.sigma,
            seeds=args.seeds,
            bd_R_grid=args.bd_R,
            cp_R_grid=args.cp_R,
            tucker_rank_grid=args.tucker_r,
            fit=FitConfig(max_iters=args.max_iters, rel_tol=args.tol),
            output_dir=args.out,
        )
    report = run_experiment(cfg)
    print(f"wrote {len(report.rows)} rows to {os.path.join(cfg.output_dir, 'report.csv')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="btensor")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ls-solve", help="closed-form aligned-product least squares")
    p.add_argument("--observed", required=True)
    p.add_argument("--known", required=True)
    p.add_argument("--unknown-shape", required=True, type=_parse_dims)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ls_solve)

    p = sub.add_parser("decompose", help="fit a three-factor aligned-product model")
    p.add_argument("--input", required=True)
    p.add_argument("--model", choices=["bd", "sum-bd"], required=True)
    p.add_argument("--R", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("baseline", help="fit a CP or Tucker baseline")
    p.add_argument("--method", choices=["cp", "tucker"], required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--rank", required=True, type=_parse_int_list)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("experiment", help="synthetic rank-sweep benchmark")
    p.add_argument("--config", help="TOML config file (overrides the flags)")
    p.add_argument("--dims", type=_parse_dims, default=(16, 16, 16))
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--seeds", type=_parse_int_list, default=(0, 1, 2, 3, 4))
    p.add_argument("--bd-R", type=_parse_int_list, default=(1, 2))
    p.add_argument("--cp-R", type=_parse_int_list, default=(1, 2, 4, 8, 16, 32, 64))
    p.add_argument("--tucker-r", type=_parse_int_list, default=tuple(range(1, 17)))
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default="experiment_out")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
