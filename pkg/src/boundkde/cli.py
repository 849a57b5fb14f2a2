"""Command-line interface.

Subcommands: ``kernels``, ``family``, ``fit``, ``eval`` and ``simulate``
(``bias``, ``risk``, ``oracle``). Tables go to ``--out`` or stdout as CSV.
Errors print one ``boundkde: error: <Kind>: <message>`` line on stderr; exit
codes are 2 for usage, 3 for data and 4 for an empty estimator family.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .boundary_kernels import ProductKernelSpec, estimate_grid
from .errors import BoundKDEError, EmptyFamily
from .families import FamilyConfig, bandwidth_of, index_set, m_of_ell
from .io import ModelFile, dump_model, load_model, read_csv, write_table
from .legendre_kernels import kernel_eval, make_w
from .lp_engine import CubeGrid, QuadratureConfig
from .selection import SelectionConfig, select
from .sim_lab import (
    BumpDensity,
    BumpFamilyParams,
    RiskReport,
    UniformDensity,
    bias_demo,
    fixed_estimator,
    gl_estimator,
    mc_risk,
    oracle_experiment,
)

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_EMPTY = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def worker_count():
    """Worker cap from ``BOUNDKDE_THREADS``; 0 or unset means one per CPU."""
    raw = os.environ.get("BOUNDKDE_THREADS", "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"BOUNDKDE_THREADS must be an integer, got {raw!r}")
    if value < 0:
        raise UsageError("BOUNDKDE_THREADS must be >= 0")
    return value or (os.cpu_count() or 1)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)


def _add_selection_args(p):
    p.add_argument("--mode", choices=("iso", "ani"), default="iso")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--orders", type=_int_list, default=None, help="ani kernel orders M1,...,Md")
    p.add_argument("--quad-panels", type=int, default=None)
    p.add_argument("--quad-nodes", type=int, default=None)


def _selection_config(args, d):
    quad = QuadratureConfig.default(d)
    quad = QuadratureConfig(args.quad_panels or quad.panels, args.quad_nodes or quad.nodes)
    return SelectionConfig(
        p=args.p, q=args.q, tau=args.tau, c=args.c, mode=args.mode,
        orders=tuple(args.orders) if args.orders else None, quad=quad,
    )


def _add_density_args(p):
    p.add_argument("--density", choices=("uniform", "bump"), default="uniform")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--bump-h", type=float, default=0.125)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=100)


def _density(args):
    if args.density == "uniform":
        return UniformDensity(args.d)
    return BumpDensity(BumpFamilyParams.alternating(args.d, args.bump_h, args.rho))


def build_parser():
    parser = _Parser(prog="boundkde", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("kernels", help="tabulate the order-M kernel on [0, 1]")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=run_kernels)

    p = sub.add_parser("family", help="list the candidate indices")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--mode", choices=("iso", "ani"), default="iso")
    p.add_argument("--orders", type=_int_list, default=None)
    p.add_argument("--out")
    p.set_defaults(func=run_family)

    p = sub.add_parser("fit", help="select an estimator for a CSV sample")
    p.add_argument("--input", required=True)
    _add_selection_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=run_fit)

    p = sub.add_parser("eval", help="evaluate a fitted model on a regular grid")
    p.add_argument("--model", required=True)
    p.add_argument("--grid-res", type=int, default=101)
    p.add_argument("--clip-negative", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=run_eval)

    sim = sub.add_parser("simulate", help="simulation experiments")
    sim_sub = sim.add_subparsers(dest="experiment", required=True, parser_class=_Parser)

    p = sim_sub.add_parser("bias", help="integrated boundary bias on the uniform density")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--h-list", type=_float_list, default=[0.02, 0.04, 0.08, 0.16])
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=run_simulate_bias)

    p = sim_sub.add_parser("risk", help="Monte Carlo risk over several sample sizes")
    _add_density_args(p)
    _add_selection_args(p)
    p.add_argument("--n-list", type=_int_list, default=[500, 2000, 8000])
    p.add_argument("--fixed-ell", type=int, default=None,
                   help="use the single iso member h=e^-ell with kernel order --fixed-order")
    p.add_argument("--fixed-order", type=int, default=1)
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=run_simulate_risk)

    p = sim_sub.add_parser("oracle", help="selected-vs-best loss ratio per replicate")
    _add_density_args(p)
    _add_selection_args(p)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=run_simulate_oracle)

    parser._simulate_parsers = sim_sub.choices
    return parser


def run_kernels(args):
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    k = make_w(args.order)
    u = np.linspace(0.0, 1.0, args.samples + 1)
    w = kernel_eval(k, u)
    text = write_table(["u", "w"], [(float(a), float(b)) for a, b in zip(u, w)], args.out)
    _emit(text, args.out)


def run_family(args):
    cfg = FamilyConfig(n=args.n, d=args.d, c=args.c, mode=args.mode,
                       orders=tuple(args.orders) if args.orders else None)
    indices = index_set(cfg)
    rows = []
    for idx in indices:
        h = bandwidth_of(cfg, idx)
        if cfg.mode == "iso":
            rows.append((idx[0], m_of_ell(cfg.n, idx[0]), h[0]))
        else:
            rows.append(tuple(idx) + tuple(cfg.orders) + h)
    if cfg.mode == "iso":
        header = ["ell", "m", "h"]
    else:
        r = range(1, cfg.d + 1)
        header = [f"ell_{i}" for i in r] + [f"m_{i}" for i in r] + [f"h_{i}" for i in r]
    text = write_table(header, rows, args.out)
    _emit(text, args.out)


def run_fit(args):
    sample = read_csv(args.input)
    cfg = _selection_config(args, sample.d)
    trace, spec = select(sample, cfg, workers=worker_count())
    config = {
        "p": cfg.p, "q": cfg.q, "tau": cfg.tau, "c": cfg.c, "mode": cfg.mode,
        "orders": list(cfg.family(sample.n, sample.d).orders or []) or None,
        "quad_panels": cfg.quad.panels, "quad_nodes": cfg.quad.nodes,
    }
    dump_model(ModelFile.from_fit(config, trace, spec, sample), args.out)


def eval_model(model, grid_res, clip=False):
    """Tensor grid of ``grid_res`` equispaced points per axis and the estimate there."""
    spec, sample = model.spec(), model.sample()
    axis = np.linspace(0.0, 1.0, grid_res)
    mesh = np.meshgrid(*([axis] * sample.d), indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    values = estimate_grid(spec, sample, points)
    if clip:
        quad = QuadratureConfig.default(sample.d)
        quad = QuadratureConfig(model.config.get("quad_panels") or quad.panels,
                                model.config.get("quad_nodes") or quad.nodes)
        cube = CubeGrid(sample.d, quad)
        mass = float(np.dot(cube.weights, np.maximum(cube.estimate(spec, sample), 0.0)))
        values = np.maximum(values, 0.0)
        if mass > 0:
            values = values / mass
    return points, values


def run_eval(args):
    if args.grid_res < 1:
        raise UsageError("--grid-res must be >= 1")
    model = load_model(args.model)
    points, values = eval_model(model, args.grid_res, args.clip_negative)
    header = [f"t_{i}" for i in range(1, points.shape[1] + 1)] + ["fhat"]
    rows = [tuple(float(v) for v in pt) + (float(f),) for pt, f in zip(points, values)]
    text = write_table(header, rows, args.out)
    _emit(text, args.out)


def run_simulate_bias(args):
    rows = bias_demo(args.p, args.h_list, order=args.order)
    text = write_table(["h", "integrated_bias_naive", "integrated_bias_boundary"], rows, args.out)
    _emit(text, args.out)


def run_simulate_risk(args):
    density = _density(args)
    workers = worker_count()
    entries = []
    for n in args.n_list:
        cfg = _selection_config(args, density.d)
        grid = cfg.grid(density.d)
        if args.fixed_ell is not None:
            h = np.exp(-args.fixed_ell)
            spec = ProductKernelSpec((make_w(args.fixed_order),) * density.d, (h,) * density.d)
            estimator = fixed_estimator(spec)
        else:
            estimator = gl_estimator(cfg)
        entries.append(mc_risk(estimator, density, n, args.p, args.q, args.reps, args.seed, grid, workers))
    report = RiskReport(p=args.p, q=args.q, entries=entries)
    slope = report.slope
    rows = [
        (e.n, e.replicates, e.risk, e.stderr, "" if slope is None else slope) for e in entries
    ]
    text = write_table(["n", "replicates", "risk", "stderr", "slope"], rows, args.out)
    _emit(text, args.out)


def _index_text(idx):
    return "-".join(str(v) for v in idx)


def run_simulate_oracle(args):
    density = _density(args)
    cfg = _selection_config(args, density.d)
    results = oracle_experiment(density, cfg, args.n, args.reps, args.seed, workers=worker_count())
    rows = [
        (r["replicate"], _index_text(r["chosen"]), _index_text(r["best"]),
         r["loss_selected"], r["loss_best"], r["ratio"])
        for r in results
    ]
    header = ["replicate", "chosen", "best", "loss_selected", "loss_best", "ratio"]
    text = write_table(header, rows, args.out)
    _emit(text, args.out)


def _apply_config(parser, argv):
    """Re-parse with defaults taken from a ``--config`` JSON file."""
    args = parser.parse_args(argv)
    path = getattr(args, "config", None)
    if not path:
        return args
    with open(path) as fh:
        overrides = json.load(fh)
    if not isinstance(overrides, dict):
        raise UsageError("--config must hold a JSON object")
    sub = parser._simulate_parsers[args.experiment]
    known = {a.dest for a in sub._actions}
    unknown = sorted(set(k.replace("-", "_") for k in overrides) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in overrides.items()})
    return parser.parse_args(argv)


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        args.func(args)
    except UsageError as exc:
        print(f"boundkde: error: UsageError: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EmptyFamily as exc:
        print(f"boundkde: error: {exc.kind}: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except BoundKDEError as exc:
        print(f"boundkde: error: {exc.kind}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        kind = "FileNotFound" if isinstance(exc, FileNotFoundError) else type(exc).__name__
        message = str(exc).replace("\n", " ")
        print(f"boundkde: error: {kind}: {message}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
