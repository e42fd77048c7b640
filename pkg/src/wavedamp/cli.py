"""Command-line interface.

Subcommands: ``classify``, ``conditions``, ``belt``, ``admissible``,
``rellich``, ``simulate``, ``spectrum``, ``sweep``. Options may also be
supplied through ``--config <file>`` holding flat ``key=value`` lines;
explicit command-line flags win over the file. Exit codes: 0 success,
1 input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import geometry, rellich, sweep
from .discretization import assemble_operators, build_grid, sine_mode_initial, write_operators
from .dynamics import Linear, PowerLaw, fit_exponential_rate, simulate
from .errors import NumericalError
from .geometry import (
    MultiplierField,
    build_partition,
    check_conditions,
    classify_edge,
    edge_belt,
    load_polygon,
    lower_left_dirichlet_partition,
    unit_square,
)
from .spectral import companion_matrix, eigenvalues, spectral_abscissa


class _CLIError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route usage errors to exit code 1
        raise _CLIError(message)


def _parse_point(text: str) -> np.ndarray:
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise _CLIError(f"expected a point 'x,y', got {text!r}")
    try:
        return np.array([float(parts[0]), float(parts[1])])
    except ValueError:
        raise _CLIError(f"expected a point 'x,y', got {text!r}") from None


def _parse_rect(text: str):
    parts = text.replace(",", " ").split()
    if len(parts) != 4:
        raise _CLIError(f"expected a rectangle 'x0,y0,x1,y1', got {text!r}")
    return tuple(float(p) for p in parts)


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.replace(",", " ").split()]
    except ValueError:
        raise _CLIError(f"expected a comma-separated float list, got {text!r}") from None


def _load_config(path) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise _CLIError(f"{path}:{lineno}: expected key=value")
                key, val = (s.strip() for s in line.split("=", 1))
                values[key.replace("-", "_")] = val
    except OSError as exc:
        raise _CLIError(f"cannot read config file: {exc}") from None
    return values


def _merge_config(args: argparse.Namespace) -> None:
    """Fill options the command line left unset from the config file."""
    if getattr(args, "config", None) is None:
        return
    for key, raw in _load_config(args.config).items():
        if not hasattr(args, key):
            raise _CLIError(f"unknown config key {key!r}")
        if getattr(args, key) is None:
            setattr(args, key, raw)


def _shared_flags(p: _Parser, domain=False) -> None:
    p.add_argument("--theta", type=float, default=None, help="rotation angle (radians)")
    p.add_argument("--x0", default=None, help="pivot point 'x,y'")
    p.add_argument("--config", default=None, help="flat key=value option file")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    if domain:
        p.add_argument(
            "--domain", default=None,
            help="polygon file: one CCW 'x y' vertex per line (default: unit square)",
        )


def build_parser() -> _Parser:
    parser = _Parser(prog="wavedamp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="label every edge by the sign of m . nu")
    _shared_flags(p, domain=True)

    p = sub.add_parser("conditions", help="report the admissibility checks")
    _shared_flags(p, domain=True)
    p.add_argument(
        "--partition", choices=["auto", "lower-left"], default=None,
        help="'auto' rebuilds from the sign of m . nu; 'lower-left' is the "
        "fixed study partition of the unit square",
    )

    p = sub.add_parser("belt", help="mixed-condition pivot belt of every edge")
    _shared_flags(p, domain=True)

    p = sub.add_parser("admissible", help="grid mask of admissible pivot positions")
    _shared_flags(p, domain=True)
    p.add_argument("--rect", default=None, help="grid rectangle 'x0,y0,x1,y1'")
    p.add_argument("--res", type=int, default=None, help="cells per direction")
    p.add_argument("--format", choices=["csv", "svg"], default=None)

    p = sub.add_parser("rellich", help="quadrature check of the multiplier identity")
    _shared_flags(p)
    p.add_argument("--u", default=None, help=f"test function: {', '.join(rellich.CATALOG)}")
    p.add_argument("--q", type=int, default=None, help="quadrature resolution")

    for name in ("simulate", "spectrum"):
        p = sub.add_parser(
            name,
            help="integrate the damped system" if name == "simulate"
            else "spectral abscissa of the companion matrix",
        )
        _shared_flags(p)
        p.add_argument("--n", type=int, default=None, help="interior nodes per side")
        p.add_argument("--alpha", type=float, default=None, help="feedback gain")
        p.add_argument("--p", type=float, default=None,
                       help="power-law exponent (omit for linear feedback)")
        p.add_argument(
            "--partition", choices=["auto", "lower-left"], default=None,
            help="boundary partition used for the grid",
        )
        p.add_argument("--clamp", action="store_true", default=None,
                       help="zero negative feedback weights instead of failing")
        p.add_argument("--operators-out", default=None,
                       help="prefix for coordinate-format dumps of K and B")
        if name == "simulate":
            p.add_argument("--t-final", type=float, default=None)
            p.add_argument("--dt", type=float, default=None)
            p.add_argument("--sample-every", type=int, default=None)
        else:
            p.add_argument("--eigenvalues", action="store_true", default=None,
                           help="also print all eigenvalues as CSV re,im")

    p = sub.add_parser("sweep", help="decay rate over the (theta, lambda) grid")
    _shared_flags(p)
    p.add_argument("--theta-min", type=float, default=None)
    p.add_argument("--theta-max", type=float, default=None)
    p.add_argument("--theta-count", type=int, default=None)
    p.add_argument("--lambdas", default=None, help="comma-separated lambda values")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--mode", choices=list(sweep.MODES), default=None)
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--format", choices=["csv", "svg"], default=None)
    return parser


def _write_out(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _get(args, name, default):
    val = getattr(args, name, None)
    if val is None:
        return default
    return val


def _coerce(val, typ):
    if val is None or isinstance(val, typ):
        return val
    if typ is bool:
        return str(val).strip().lower() in ("1", "true", "yes", "on")
    return typ(val)


def _domain_from(args) -> geometry.PolygonDomain:
    path = getattr(args, "domain", None)
    return unit_square() if path is None else load_polygon(path)


def _field_from(args) -> MultiplierField:
    theta = _coerce(_get(args, "theta", 0.0), float)
    x0 = _get(args, "x0", "0,0")
    if isinstance(x0, str):
        x0 = _parse_point(x0)
    return MultiplierField(theta, x0)


def _partition_from(args, domain, field):
    choice = _get(args, "partition", "lower-left" if domain.is_unit_square() else "auto")
    if choice == "auto":
        return build_partition(domain, field)
    return lower_left_dirichlet_partition(domain)


def _cmd_classify(args) -> int:
    domain = _domain_from(args)
    field = _field_from(args)
    lines = ["edge,label,split_x,split_y"]
    for edge in domain.edges:
        cls = classify_edge(edge, field)
        if cls.split is not None:
            lines.append(
                f"{edge.index},{cls.label.value},"
                f"{float(cls.split[0])!r},{float(cls.split[1])!r}"
            )
        else:
            lines.append(f"{edge.index},{cls.label.value},,")
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_conditions(args) -> int:
    domain = _domain_from(args)
    field = _field_from(args)
    partition = _partition_from(args, domain, field)
    report = check_conditions(domain, partition, field)
    lines = ["x,y,omega,m_dot_tau,m_dot_nu,s2_ok,r_ok"]
    for c in report.interface_checks:
        p = c.point
        lines.append(
            f"{float(p.position[0])!r},{float(p.position[1])!r},{p.omega!r},"
            f"{c.m_dot_tau!r},{c.m_dot_nu!r},{int(c.s2_ok)},{int(c.r_ok)}"
        )
    lines.append(f"s1_neumann_ok={int(report.s1_neumann_ok)}")
    lines.append(f"s1_dirichlet_ok={int(report.s1_dirichlet_ok)}")
    lines.append(f"s2_ok={int(report.s2_ok)}")
    lines.append(f"r_ok={int(report.r_ok)}")
    lines.append(f"overall_ok={int(report.overall_ok)}")
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_belt(args) -> int:
    domain = _domain_from(args)
    theta = _coerce(_get(args, "theta", 0.0), float)
    lines = ["edge,dir_x,dir_y,lower,upper"]
    for edge in domain.edges:
        b = edge_belt(edge, theta)
        lines.append(
            f"{edge.index},{float(b.direction[0])!r},{float(b.direction[1])!r},"
            f"{b.lower!r},{b.upper!r}"
        )
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_admissible(args) -> int:
    domain = _domain_from(args)
    theta = _coerce(_get(args, "theta", 0.0), float)
    rect = _get(args, "rect", "-2,-2,3,3")
    if isinstance(rect, str):
        rect = _parse_rect(rect)
    res = _coerce(_get(args, "res", 50), int)
    result = geometry.admissible_region(domain, theta, rect, res)
    fmt = _get(args, "format", "csv")
    text = geometry.mask_to_csv(result) if fmt == "csv" else geometry.mask_to_svg(result)
    _write_out(text, args.out)
    return 0


def _cmd_rellich(args) -> int:
    name = _get(args, "u", "r2")
    if name not in rellich.CATALOG:
        raise _CLIError(
            f"unknown test function {name!r}; choose from {', '.join(rellich.CATALOG)}"
        )
    field = _field_from(args)
    q = _coerce(_get(args, "q", 2048), int)
    res = rellich.rellich_residual(rellich.CATALOG[name], field, unit_square(), q)
    _write_out(
        f"lhs={res.lhs!r}\nrhs={res.rhs!r}\nresidual={res.residual!r}\n", args.out
    )
    return 0


def _ops_from(args):
    field = _field_from(args)
    domain = unit_square()
    partition = _partition_from(args, domain, field)
    n = _coerce(_get(args, "n", 10), int)
    alpha = _coerce(_get(args, "alpha", 1.0), float)
    grid = build_grid(n, partition, field)
    ops = assemble_operators(grid, alpha, clamp=bool(_get(args, "clamp", False)))
    prefix = getattr(args, "operators_out", None)
    if prefix:
        write_operators(ops, f"{prefix}_K.txt", f"{prefix}_B.txt")
    return grid, ops


def _cmd_simulate(args) -> int:
    grid, ops = _ops_from(args)
    p = _coerce(getattr(args, "p", None), float)
    g = Linear(1.0) if p is None else PowerLaw(p)
    t_final = _coerce(_get(args, "t_final", 20.0), float)
    dt = _coerce(_get(args, "dt", 1e-2), float)
    every = _coerce(_get(args, "sample_every", 1), int)
    U0, V0 = sine_mode_initial(grid)
    trace = simulate(U0, V0, t_final, dt, ops, g, sample_every=every)
    _write_out(trace.to_csv(), args.out)
    return 0


def _cmd_spectrum(args) -> int:
    _, ops = _ops_from(args)
    cm = companion_matrix(ops)
    lines = [f"spectral_abscissa={spectral_abscissa(cm)!r}"]
    if _get(args, "eigenvalues", False):
        lines.append("re,im")
        lines += [f"{float(v.real)!r},{float(v.imag)!r}" for v in eigenvalues(cm)]
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_sweep(args) -> int:
    count = _coerce(_get(args, "theta_count", 8), int)
    if count < 1:
        raise _CLIError("--theta-count must be positive")
    t_lo = _coerce(_get(args, "theta_min", 0.0), float)
    t_hi = _coerce(_get(args, "theta_max", math.atan(2.0)), float)
    thetas = np.linspace(t_lo, t_hi, count)
    lams = _get(args, "lambdas", None)
    lams = sweep.default_lambda_grid() if lams is None else _parse_floats(lams)
    records = sweep.run_sweep(
        thetas,
        lams,
        n=_coerce(_get(args, "n", 10), int),
        alpha=_coerce(_get(args, "alpha", 1.0), float),
        mode=_get(args, "mode", "spectral"),
        t_final=_coerce(_get(args, "t_final", 400.0), float),
        dt=_coerce(_get(args, "dt", 1e-2), float),
    )
    fmt = _get(args, "format", "csv")
    text = sweep.records_to_csv(records) if fmt == "csv" else sweep.records_to_svg(records)
    _write_out(text, args.out)
    return 0


_COMMANDS = {
    "classify": _cmd_classify,
    "conditions": _cmd_conditions,
    "belt": _cmd_belt,
    "admissible": _cmd_admissible,
    "rellich": _cmd_rellich,
    "simulate": _cmd_simulate,
    "spectrum": _cmd_spectrum,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _merge_config(args)
        return _COMMANDS[args.command](args)
    except (_CLIError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
