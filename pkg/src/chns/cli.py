"""Command-line interface.

Subcommands: run, order-test, stability-test, solver-bench,
spinodal-predict.
"""

import argparse
import sys

import numpy as np

from . import driver
from .errors import ChnsError, SimulationBlowUp


def _int_list(text):
    return [int(v) for v in text.split(",") if v]


def _float_list(text):
    return [float(v) for v in text.split(",") if v]


def cmd_run(args):
    config = driver.load_config(args.config)
    if args.outdir:
        config.outdir = args.outdir
    result = driver.run(config)
    last = result.diagnostics[-1]
    print(f"finished t = {result.t:.6g} after {len(result.diagnostics) - 1} "
          f"steps ({result.rejections} rejected)")
    print(f"err_rho = {last[3]:.3e}  err_q = {last[4]:.3e}  "
          f"c in [{last[5]:.4f}, {last[6]:.4f}]")
    if config.outdir:
        print(f"wrote {len(result.snapshot_paths)} snapshots to {config.outdir}")
    return 0


def cmd_order_test(args):
    errors = driver.order_test(args.scheme, args.M, cfl=args.cfl, T=args.T,
                               solver=args.solver)
    ratios = driver.convergence_ratios(errors)
    print(f"scheme {args.scheme}, CFL={args.cfl}, T={args.T}")
    print(f"{'M':>6} {'e_M':>12} {'e_M/e_2M':>10}")
    for M in sorted(errors):
        r = f"{ratios[M]:.2f}" if M in ratios else "-"
        print(f"{M:>6} {errors[M]:>12.4e} {r:>10}")
    return 0


def cmd_stability_test(args):
    for scheme in args.scheme:
        config = driver.RunConfig(
            test="stability1d", dim=1, M=args.M, T_final=args.T,
            nu=args.nu, lam=args.lam, eps=args.eps, G=-10.0,
            scheme=scheme, cfl=args.cfl, cfl_adapt=False,
            solver="multigrid")
        try:
            result = driver.run(config)
        except SimulationBlowUp as exc:
            print(f"{scheme:>8}: blow-up at t = {exc.t:.4e} ({exc.reason})")
        else:
            print(f"{scheme:>8}: reached t = {result.t:.4g}, "
                  f"max|U| = {result.state.max_abs():.4g}")
    return 0


def cmd_solver_bench(args):
    test = f"test{args.test}"
    print(f"{test}, solver={args.solver}, scheme=dirksa, tol={args.tol:g}, "
          f"T={args.T}")
    header = f"{'M/nu':>6}" + "".join(f"{nu:>10.0e}" for nu in args.nu)
    for eps in args.eps:
        print(f"eps = {eps:g}")
        print(header)
        for M in args.M:
            cells = []
            for nu in args.nu:
                config = driver.RunConfig(
                    test=test, M=M, T_final=args.T, nu=nu, lam=nu / 10.0,
                    eps=eps, solver=args.solver, solver_tol=args.tol)
                result = driver.run(config)
                cells.append(result.mean_conc_iters())
            print(f"{M:>6}" + "".join(f"{c:>10.2f}" for c in cells))
    return 0


def cmd_spinodal_predict(args):
    from .spinodal import predict_spinodal_mode
    pred = predict_spinodal_mode(args.c0, args.eps, dim=args.dim)
    if not pred.has_unstable:
        print("no unstable modes at these parameters")
        return 0
    print(f"c0 = {pred.c0}, eps = {pred.eps:g}, dim = {pred.dim}")
    print(f"dominant mode {pred.dominant}, k^2 sum = "
          f"{pred.dominant_k_squared}, growth rate {pred.dominant_sigma:.4g}")
    print(f"{len(pred.modes)} unstable modes; top 5:")
    for k, s in pred.modes[:5]:
        print(f"  k = {k}, sigma = {s:.5g}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="chns",
        description="Compressible Cahn-Hilliard-Navier-Stokes solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a configuration file")
    p.add_argument("config")
    p.add_argument("--outdir", default="")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("order-test", help="forced-solution convergence study")
    p.add_argument("--scheme", default="dirksa")
    p.add_argument("--M", type=_int_list, default=[8, 16, 32, 64])
    p.add_argument("--cfl", type=float, default=0.4)
    p.add_argument("--T", type=float, default=0.01)
    p.add_argument("--solver", default="multigrid")
    p.set_defaults(func=cmd_order_test)

    p = sub.add_parser("stability-test", help="1D fixed-CFL stability sweep")
    p.add_argument("--scheme", type=lambda s: s.split(","),
                   default=["ee-ie", "dirksa"])
    p.add_argument("--M", type=int, default=2000)
    p.add_argument("--cfl", type=float, default=1.0)
    p.add_argument("--T", type=float, default=0.1)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=1e-4)
    p.set_defaults(func=cmd_stability_test)

    p = sub.add_parser("solver-bench",
                       help="average solver iterations per stage solve")
    p.add_argument("--test", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--solver", default="multigrid",
                   choices=("multigrid", "pcg"))
    p.add_argument("--M", type=_int_list, default=[16, 32, 64])
    p.add_argument("--nu", type=_float_list, default=[1e-1, 1e-2, 1e-3])
    p.add_argument("--eps", type=_float_list, default=[1e-3, 1e-4, 1e-5])
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--T", type=float, default=0.1)
    p.set_defaults(func=cmd_solver_bench)

    p = sub.add_parser("spinodal-predict",
                       help="linearized growth-rate prediction")
    p.add_argument("--c0", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--dim", type=int, choices=(1, 2), default=2)
    p.set_defaults(func=cmd_spinodal_predict)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    np.seterr(over="ignore", invalid="ignore")
    try:
        return args.func(args)
    except ChnsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
