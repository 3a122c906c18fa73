"""Command-line interface binding the library into reproducible experiments.

Subcommands: spectrum, trace, cmtest, weyl, measure, bmv.  Output is CSV by
default (header comments with a config echo, then a header row) or a
line-oriented ``key=value`` text mode; identical configurations produce
byte-identical files.  Exit codes: 0 success/pass, 1 test verdict fail,
2 usage error, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .absmono import SampledFunction, am_test
from .bmv import (
    HermitianMatrix,
    MatrixPencil,
    bmv_cm_test,
    commuting_measure,
    pencil_trace_exp,
    support_slope_check,
)
from .measures import aggregate_measure, laplace_transform, mode_measure
from .potentials import parse_pencil, parse_potential, validate_conditions
from .quadrature import QuadratureError
from .spectrum import ConvergenceError, SpectrumRequest, compute_spectrum
from .traces import TraceEvaluator, harmonic_closed_form
from .weyl import counting_function, make_estimate, weyl_constant

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NONCONVERGED = 3


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _emit(args, config: dict, columns: list[str], rows: list[tuple], extra_notes=()) -> None:
    lines = [f"# oscitrace {__version__}"]
    for key in sorted(config):
        lines.append(f"# {key}={config[key]}")
    for note in extra_notes:
        lines.append(f"# {note}")
    if args.format == "csv":
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
    else:
        for row in rows:
            lines.append(" ".join(f"{c}={_fmt(v)}" for c, v in zip(columns, row)))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _t_grid(args) -> np.ndarray:
    if getattr(args, "t", None) is not None:
        return np.array([args.t], dtype=float)
    if args.points < 1:
        raise ValueError("points must be at least 1")
    if args.points == 1:
        return np.array([args.tmin], dtype=float)
    if args.spacing == "geometric":
        return np.geomspace(args.tmin, args.tmax, args.points)
    return np.linspace(args.tmin, args.tmax, args.points)


def _config_echo(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _cmd_spectrum(args) -> int:
    pencil = parse_pencil(args.v0, args.v1)
    report = validate_conditions(pencil)
    spec = compute_spectrum(
        SpectrumRequest(pencil=pencil, t=args.t, count=args.count, tol=args.tol)
    )
    columns = ["n", "eigenvalue", "error_estimate", "parity"]
    rows = [
        (
            n,
            float(spec.eigenvalues[n]),
            float(spec.error_estimates[n]),
            spec.parities[n] if spec.parities else "n/a",
        )
        for n in range(args.count)
    ]
    notes = [
        f"mesh_half_width={spec.mesh.half_width!r}",
        f"mesh_grid_points={spec.mesh.grid_points}",
        f"mesh_levels={spec.mesh.levels}",
        f"conditions_ok={report.all_ok} growth_exponent={report.growth_exponent!r}",
    ]
    _emit(args, _config_echo(args, ("v0", "v1", "t", "count", "tol", "seed")), columns, rows, notes)
    return EXIT_OK


def _cmd_trace(args) -> int:
    pencil = parse_pencil(args.v0, args.v1)
    grid = _t_grid(args)
    ev = TraceEvaluator(pencil, float(grid[0]), float(grid[-1]), tail_tol=args.tail_tol)
    notes = []
    if args.split_parity:
        columns = ["t", "value", "even", "odd", "tail_bound"]
        rows = []
        for t in grid:
            full = ev.point(float(t), "full")
            pe = ev.point(float(t), "even")
            po = ev.point(float(t), "odd")
            rows.append((float(t), full.value, pe.value, po.value, full.tail_bound))
    elif args.closed_form == "harmonic":
        columns = ["t", "value", "closed_form", "abs_diff", "tail_bound"]
        rows = []
        for t in grid:
            pt = ev.point(float(t), args.kind)
            closed = harmonic_closed_form(float(t))[("full", "even", "odd").index(args.kind)]
            rows.append((float(t), pt.value, closed, abs(pt.value - closed), pt.tail_bound))
        notes.append("closed_form=derived harmonic-family identities")
    else:
        columns = ["t", "kind", "value", "tail_bound"]
        rows = [
            (float(t), args.kind, ev.point(float(t), args.kind).value,
             ev.point(float(t), args.kind).tail_bound)
            for t in grid
        ]
    keys = ("v0", "v1", "t", "tmin", "tmax", "points", "spacing", "tail_tol", "kind")
    _emit(args, _config_echo(args, keys), columns, rows, notes)
    return EXIT_OK


def _family_function(args) -> SampledFunction:
    if args.family == "file":
        if not args.file:
            raise ValueError("--family file requires --file")
        data = np.loadtxt(args.file, delimiter=",", comments="#")
        if data.ndim != 2 or data.shape[1] < 2:
            raise ValueError("table file needs two columns: t,value")
        return SampledFunction.from_table(data[:, 0], data[:, 1])
    pencil = (
        parse_pencil("none", "1:1:2")
        if args.family == "harmonic"
        else parse_pencil("1:1:2", "1:1:4")
    )
    window_hi = args.tmax * (1.0 + args.orders / 4.0 + 0.5)
    ev = TraceEvaluator(pencil, args.tmin, window_hi, tail_tol=args.tail_tol)
    if args.single_mode is not None:
        n = args.single_mode
        return SampledFunction(
            f=lambda t: ev.single_mode(t, n),
            domain=(0.0, math.inf),
        )
    kind = args.kind
    return SampledFunction(
        f=lambda t: ev.value(t, kind),
        domain=(0.0, math.inf),
        err=lambda t: ev.error_bound(t, kind),
    )


def _cmd_cmtest(args) -> int:
    func = _family_function(args)
    grid = _t_grid(args)
    report = am_test(func, args.orders, grid, mode=args.mode)
    columns = ["verdict", "max_normalized_violation", "worst_order", "worst_t", "worst_h", "orders", "mode"]
    worst = report.worst_case or ("", "", "")
    rows = [
        (
            report.verdict,
            report.max_normalized_violation,
            worst[0],
            worst[1],
            worst[2],
            report.orders_tested,
            report.mode,
        )
    ]
    keys = ("family", "file", "mode", "orders", "tmin", "tmax", "points", "spacing", "tail_tol", "kind", "single_mode")
    _emit(args, _config_echo(args, keys), columns, rows, [f"grid={report.grid}"])
    return EXIT_OK if report.verdict == "pass" else EXIT_FAIL


def _cmd_weyl(args) -> int:
    potential = parse_potential(args.v1)
    if len(potential.terms) != 1:
        raise ValueError("the counting law needs a single-term potential")
    pencil = parse_pencil("none", args.v1)
    rs = np.array([float(s) for s in args.r.split(",")], dtype=float)
    rs.sort()
    # the asymptotic law itself predicts how many eigenvalues reach r_max
    term = potential.terms[0]
    s = math.pow(args.t, 2.0 / (2.0 + term.rho))
    predicted = weyl_constant(potential) * math.pow(rs[-1] / s, 0.5 + 1.0 / term.rho)
    count = max(args.count_hint, int(1.15 * predicted) + 3)
    while True:
        spec = compute_spectrum(
            SpectrumRequest(pencil=pencil, t=args.t, count=count, tol=args.tol)
        )
        if spec.eigenvalues[-1] >= rs[-1]:
            break
        count *= 2
        if count > 100000:
            raise ConvergenceError("could not reach the requested energy")
    columns = ["r", "count_exact", "count_asymptotic", "ratio"]
    rows = []
    for r in rs:
        est = make_estimate(spec, potential, float(r))
        rows.append((float(r), est.count_exact, est.count_asymptotic, est.ratio))
    notes = [f"weyl_constant={weyl_constant(potential)!r}"]
    _emit(args, _config_echo(args, ("v1", "t", "r", "tol")), columns, rows, notes)
    return EXIT_OK


def _cmd_measure(args) -> int:
    potential = parse_potential(args.v1)
    if len(potential.terms) != 1:
        raise ValueError("mode measures need a single-term potential")
    rho = potential.terms[0].rho
    pencil = parse_pencil("none", args.v1)
    base = compute_spectrum(
        SpectrumRequest(pencil=pencil, t=1.0, count=args.modes, tol=args.tol)
    )
    modes = [mode_measure(float(mu), rho) for mu in base.eigenvalues]
    if args.parity == "even":
        modes = modes[0::2]
    elif args.parity == "odd":
        modes = modes[1::2]
    grid = np.geomspace(args.lmin, args.lmax, args.points)
    if args.mode is not None:
        modes = [modes[args.mode]]
    mg = aggregate_measure(modes, grid)
    columns = ["type", "lambda", "value"]
    rows = [("density", float(l), float(d)) for l, d in zip(mg.lambdas, mg.density_values)]
    rows += [("atom", float(loc), float(w)) for loc, w in mg.atoms]
    notes = [f"truncation={mg.truncation_note}"]
    if args.laplace_at is not None:
        notes.append(f"laplace_at_t={args.laplace_at!r} value={laplace_transform(mg, args.laplace_at)!r}")
    keys = ("v1", "modes", "mode", "parity", "lmin", "lmax", "points", "tol")
    _emit(args, _config_echo(args, keys), columns, rows, notes)
    return EXIT_OK


def _read_matrix(path: str) -> HermitianMatrix:
    """Text format: first token n, then n*n re values, then optionally n*n im."""
    with open(path) as fh:
        tokens = [tok for line in fh for tok in line.split("#")[0].split()]
    if not tokens:
        raise ValueError(f"empty matrix file {path}")
    n = int(tokens[0])
    vals = [float(t) for t in tokens[1:]]
    if len(vals) == n * n:
        re = np.array(vals).reshape(n, n)
        return HermitianMatrix(re)
    if len(vals) == 2 * n * n:
        re = np.array(vals[: n * n]).reshape(n, n)
        im = np.array(vals[n * n :]).reshape(n, n)
        return HermitianMatrix(re, im)
    raise ValueError(f"matrix file {path} must hold n*n or 2*n*n values after n")


def _cmd_bmv(args) -> int:
    a = _read_matrix(args.a)
    b = _read_matrix(args.b)
    pencil = MatrixPencil(a, b, project_psd=args.project_psd)
    grid = _t_grid(args)
    report = bmv_cm_test(pencil, args.orders, grid)
    slope = support_slope_check(pencil, grid if grid.size >= 3 else np.geomspace(0.1, 10, 9))
    notes = [
        f"b_eigen_bounds=({pencil.b_eigen_bounds[0]!r},{pencil.b_eigen_bounds[1]!r})",
        f"slope_ok={slope.ok}",
        f"grid={report.grid}",
    ]
    ac = a.to_complex()
    bc = b.to_complex()
    comm = float(np.max(np.abs(ac @ bc - bc @ ac)))
    commuting = comm <= args.comm_tol * max(a.frobenius() * b.frobenius(), 1e-300)
    rows = [
        (
            report.verdict,
            report.max_normalized_violation,
            report.orders_tested,
            "yes" if commuting else "no",
        )
    ]
    columns = ["verdict", "max_normalized_violation", "orders", "commuting"]
    if commuting:
        atoms = commuting_measure(pencil, comm_tol=args.comm_tol, seed=args.seed)
        notes.append("atoms=" + ";".join(f"({loc!r},{w!r})" for loc, w in atoms))
        recon = sum(w * math.exp(-loc) for loc, w in atoms)
        notes.append(f"reconstruction_at_t1={recon!r} trace={pencil_trace_exp(pencil, 1.0)!r}")
    keys = ("a", "b", "orders", "tmin", "tmax", "points", "spacing", "comm_tol", "seed")
    _emit(args, _config_echo(args, keys), columns, rows, notes)
    return EXIT_OK if (report.verdict == "pass" and slope.ok) else EXIT_FAIL


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="key=value defaults file")


def _add_range(p: argparse.ArgumentParser, default_points=25) -> None:
    p.add_argument("--t", type=float, default=None, help="single parameter value")
    p.add_argument("--tmin", type=float, default=0.1)
    p.add_argument("--tmax", type=float, default=10.0)
    p.add_argument("--points", type=int, default=default_points)
    p.add_argument("--spacing", choices=("linear", "geometric"), default="geometric")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscitrace",
        description="spectra, heat traces and positivity diagnostics for Schrodinger pencils",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues of -d2/dx2 + V0 + t*V1")
    p.add_argument("--v0", default="none")
    p.add_argument("--v1", required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-6)
    _add_common(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("trace", help="trace curve of exp(-L_t)")
    p.add_argument("--v0", default="none")
    p.add_argument("--v1", required=True)
    _add_range(p)
    p.add_argument("--tail-tol", dest="tail_tol", type=float, default=1e-10)
    p.add_argument("--kind", choices=("full", "even", "odd"), default="full")
    p.add_argument("--split-parity", dest="split_parity", action="store_true")
    p.add_argument("--closed-form", dest="closed_form", choices=("harmonic",), default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("cmtest", help="difference-positivity test of a trace family")
    p.add_argument("--family", choices=("harmonic", "quartic", "file"), default="harmonic")
    p.add_argument("--file", default=None, help="(t,value) CSV table for --family file")
    p.add_argument("--mode", choices=("cm", "am"), default="cm")
    p.add_argument("--orders", type=int, default=8)
    _add_range(p)
    p.add_argument("--tail-tol", dest="tail_tol", type=float, default=1e-8)
    p.add_argument("--kind", choices=("full", "even", "odd"), default="full")
    p.add_argument("--single-mode", dest="single_mode", type=int, default=None,
                   help="test a single summand exp(-lambda_n(t)) instead of the trace")
    _add_common(p)
    p.set_defaults(func=_cmd_cmtest)

    p = sub.add_parser("weyl", help="counting function vs the asymptotic law")
    p.add_argument("--v1", required=True, help="single-term potential")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--r", required=True, help="comma-separated energies")
    p.add_argument("--tol", type=float, default=0.02)
    p.add_argument("--count-hint", dest="count_hint", type=int, default=64)
    _add_common(p)
    p.set_defaults(func=_cmd_weyl)

    p = sub.add_parser("measure", help="representing-measure density grid")
    p.add_argument("--v1", required=True, help="single-term potential")
    p.add_argument("--modes", type=int, default=20)
    p.add_argument("--mode", type=int, default=None, help="emit a single mode density")
    p.add_argument("--parity", choices=("all", "even", "odd"), default="all")
    p.add_argument("--lmin", type=float, default=1e-3)
    p.add_argument("--lmax", type=float, default=60.0)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--laplace-at", dest="laplace_at", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_measure)

    p = sub.add_parser("bmv", help="finite Hermitian pencil diagnostics")
    p.add_argument("--a", required=True, help="matrix file for A")
    p.add_argument("--b", required=True, help="matrix file for B (PSD)")
    p.add_argument("--orders", type=int, default=6)
    _add_range(p, default_points=9)
    p.add_argument("--comm-tol", dest="comm_tol", type=float, default=1e-10)
    p.add_argument("--project-psd", dest="project_psd", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_bmv)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Config file supplies defaults; explicit flags win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        return argv
    defaults = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#")[0].strip()
            if not line or "=" not in line:
                continue
            key, value = line.split("=", 1)
            defaults[key.strip().replace("-", "_")] = value.strip()
    parser.set_defaults(**defaults)
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
    except OSError as exc:
        print(f"oscitrace: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        coerced = _coerce_types(args)
        return coerced.func(coerced)
    except (ValueError, OSError) as exc:
        print(f"oscitrace: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, QuadratureError) as exc:
        print(f"oscitrace: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


def _coerce_types(args: argparse.Namespace) -> argparse.Namespace:
    """Config-file values arrive as strings; coerce the numeric ones."""
    for key, value in vars(args).items():
        if isinstance(value, str):
            if key in ("t", "tmin", "tmax", "tol", "tail_tol", "comm_tol", "lmin",
                       "lmax", "laplace_at"):
                setattr(args, key, float(value))
            elif key in ("count", "points", "orders", "modes", "mode", "seed",
                         "single_mode", "count_hint"):
                setattr(args, key, int(value))
    return args


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
