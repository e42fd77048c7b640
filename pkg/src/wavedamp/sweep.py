"""Parameter study of the decay rate over the pivot half-line.

For the fixed study partition of the unit square (Dirichlet on the bottom
edge and the lower half of the left edge) the pivots for which ``m . nu``
vanishes at the interface point ``(0, 1/2)`` form a straight line through
that point with unit direction ``w = (-sin theta, -cos theta)``. The sign
condition restricts the admissible pivots to a half-line along ``w``; its
origin ``P_min(theta)`` is found by solving the finitely many per-arc linear
sign constraints, and pivots are addressed by the arc length ``lambda``
from that origin.

Each sweep record evaluates validity (geometry checks), the spectral
abscissa of the companion matrix and/or the fitted exponential energy rate
of a time-domain run, in deterministic row-major ``(theta, lambda)`` order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discretization import assemble_operators, build_grid, sine_mode_initial
from .dynamics import Linear, fit_exponential_rate, simulate
from .errors import NoAdmissiblePivot, NumericalError
from .geometry import (
    SIGN_TOL,
    EdgeLabel,
    MultiplierField,
    check_conditions,
    lower_left_dirichlet_partition,
    unit_square,
)
from .spectral import companion_matrix, spectral_abscissa

THETA_MAX = math.atan(2.0)

#: interface point of the study partition at which m . nu must vanish
INTERFACE_POINT = np.array([0.0, 0.5])

CSV_HEADER = "theta,lambda,x0x,x0y,s1_ok,s2_ok,abscissa,fitted_rate,rel_err"


def pivot_line(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Anchor and unit direction of the pivot line ``{m . nu = 0 at (0, 1/2)}``.

    The direction points away from the square; the anchor is the interface
    point itself.
    """
    w = np.array([-math.sin(theta), -math.cos(theta)])
    return INTERFACE_POINT.copy(), w


def admissible_span(theta: float, tol: float = SIGN_TOL) -> tuple[float, float]:
    """Range of the line parameter ``s`` where the sign condition holds.

    Solves the per-arc linear constraints of the study partition for pivots
    ``x0 = anchor + s w``. Raises :class:`NoAdmissiblePivot` when the
    feasible interval is empty or unbounded below.
    """
    anchor, w = pivot_line(theta)
    partition = lower_left_dirichlet_partition()
    domain = partition.domain
    rot_inv = np.array(
        [[math.cos(theta), math.sin(theta)], [-math.sin(theta), math.cos(theta)]]
    )
    lo, hi = -math.inf, math.inf
    for arc in partition.arcs:
        edge = domain.edges[arc.edge_index]
        w_nu = rot_inv @ edge.normal
        sign = 1.0 if arc.label == EdgeLabel.NEUMANN else -1.0
        slope = -float(w @ w_nu)
        for t in (arc.t0, arc.t1):
            const = float((edge.point_at(t) - anchor) @ w_nu)
            # constraint: sign * (const + slope * s) >= -tol
            a, b = sign * slope, sign * const
            if abs(a) <= 1e-15:
                if b < -tol:
                    raise NoAdmissiblePivot(
                        f"theta={theta!r}: constraint violated for every pivot "
                        f"on the line (edge {arc.edge_index})"
                    )
            elif a > 0:
                lo = max(lo, (-tol - b) / a)
            else:
                hi = min(hi, (-tol - b) / a)
    if lo > hi:
        raise NoAdmissiblePivot(
            f"theta={theta!r}: empty admissible interval on the pivot line"
        )
    if not math.isfinite(lo):
        raise NoAdmissiblePivot(
            f"theta={theta!r}: admissible interval unbounded below; "
            f"no half-line origin exists"
        )
    return lo, hi


def d_theta_point(theta: float, lam: float) -> np.ndarray:
    """Pivot at arc length ``lam`` along the admissible half-line.

    ``theta`` must lie in ``[0, arctan 2]`` (beyond that the sign condition
    fails on the right edge) and ``lam >= 0``. The returned pivot keeps
    ``m . nu`` at ``(0, 1/2)`` below ``1e-12`` by construction.
    """
    if not (-SIGN_TOL <= theta <= THETA_MAX + 1e-12):
        raise ValueError(f"theta must lie in [0, arctan 2], got {theta!r}")
    if lam < 0.0:
        raise ValueError(f"lambda must be nonnegative, got {lam!r}")
    anchor, w = pivot_line(theta)
    s_min, _ = admissible_span(theta)
    return anchor + (s_min + lam) * w


@dataclass
class SweepRecord:
    """One row of the parameter study."""

    theta: float
    lam: float
    x0: tuple[float, float] | None = None
    s1_ok: bool | None = None
    s2_ok: bool | None = None
    abscissa: float | None = None
    fitted_rate: float | None = None
    rel_err: float | None = None
    note: str = ""


MODES = ("spectral", "timedomain", "both")


def run_sweep(
    theta_grid,
    lambda_grid,
    n: int = 10,
    alpha: float = 1.0,
    mode: str = "spectral",
    t_final: float = 400.0,
    dt: float = 1e-2,
) -> list[SweepRecord]:
    """Evaluate the decay rate on the ``(theta, lambda)`` grid.

    The partition stays fixed to the study configuration while the pivot
    moves; validity is recomputed and reported per record, and per-record
    failures are captured in the record instead of aborting the sweep.
    Records are emitted in row-major order, ``theta`` outer.

    The time-domain horizon defaults to 400: the least-damped modes of the
    semi-discrete system are weakly excited by the default initial data, so
    the fitted rate only reaches the spectral abscissa asymptotically.
    """
    thetas = [float(t) for t in theta_grid]
    lams = [float(x) for x in lambda_grid]
    if not thetas or not lams:
        raise ValueError("theta and lambda grids must be nonempty")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    # upper bound on the unknown count (all boundary nodes Neumann)
    if mode != "timedomain" and 2 * (n + 2) * (n + 2) > 2000:
        raise ValueError(
            f"n={n} may exceed the dense spectral cap; use mode='timedomain'"
        )

    partition = lower_left_dirichlet_partition()
    domain = unit_square()
    records: list[SweepRecord] = []

    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover - dependency of the package
        import contextlib

        threadpool_limits = lambda limits: contextlib.nullcontext()  # noqa: E731

    with threadpool_limits(limits=1):
        for theta in thetas:
            for lam in lams:
                rec = SweepRecord(theta=theta, lam=lam)
                records.append(rec)
                try:
                    x0 = d_theta_point(theta, lam)
                except (ValueError, NoAdmissiblePivot) as exc:
                    rec.note = str(exc)
                    continue
                rec.x0 = (float(x0[0]), float(x0[1]))
                field = MultiplierField(theta, x0)
                report = check_conditions(domain, partition, field)
                rec.s1_ok = report.s1_ok
                rec.s2_ok = report.s2_ok and report.r_ok
                try:
                    grid = build_grid(n, partition, field)
                    ops = assemble_operators(grid, alpha, clamp=True)
                except (ValueError, NumericalError) as exc:
                    rec.note = str(exc)
                    continue
                if mode in ("spectral", "both"):
                    try:
                        rec.abscissa = spectral_abscissa(companion_matrix(ops))
                    except (ValueError, NumericalError) as exc:
                        rec.note = str(exc)
                if mode in ("timedomain", "both"):
                    try:
                        U0, V0 = sine_mode_initial(grid)
                        trace = simulate(U0, V0, t_final, dt, ops, Linear(1.0))
                        rate, _ = fit_exponential_rate(trace)
                        rec.fitted_rate = rate
                    except (ValueError, NumericalError) as exc:
                        rec.note = str(exc)
                if rec.abscissa is not None and rec.fitted_rate is not None:
                    denom = abs(2.0 * rec.abscissa)
                    if denom > 0.0:
                        rec.rel_err = abs(rec.fitted_rate + 2.0 * rec.abscissa) / denom
    return records


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    return repr(float(value))


def records_to_csv(records: list[SweepRecord]) -> str:
    """Deterministic CSV rendering with the fixed column set."""
    lines = [CSV_HEADER]
    for r in records:
        x0x = r.x0[0] if r.x0 is not None else None
        x0y = r.x0[1] if r.x0 is not None else None
        lines.append(
            ",".join(
                [
                    _fmt(r.theta),
                    _fmt(r.lam),
                    _fmt(x0x),
                    _fmt(x0y),
                    _fmt(r.s1_ok),
                    _fmt(r.s2_ok),
                    _fmt(r.abscissa),
                    _fmt(r.fitted_rate),
                    _fmt(r.rel_err),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def records_to_svg(records: list[SweepRecord], cell: int = 24) -> str:
    """Grayscale heatmap of ``|abscissa|`` over the ``(theta, lambda)`` grid.

    One row per ``theta`` (top to bottom in grid order), one column per
    ``lambda``; missing abscissas render as crossed cells.
    """
    from ._svg import grayscale_grid_svg

    if not records:
        raise ValueError("cannot render an empty sweep")
    thetas = sorted({r.theta for r in records})
    lams = sorted({r.lam for r in records})
    ti = {v: k for k, v in enumerate(thetas)}
    li = {v: k for k, v in enumerate(lams)}
    vals = np.zeros((len(thetas), len(lams)))
    missing = np.ones((len(thetas), len(lams)), dtype=bool)
    for r in records:
        if r.abscissa is not None:
            vals[ti[r.theta], li[r.lam]] = abs(r.abscissa)
            missing[ti[r.theta], li[r.lam]] = False
    vmax = vals.max() if vals.size and vals.max() > 0 else 1.0
    return grayscale_grid_svg(vals / vmax, cell=cell, missing=missing)


def emit(records: list[SweepRecord], fmt: str, path) -> None:
    """Write the sweep to ``path`` as ``csv`` or ``svg_heatmap``."""
    if fmt == "csv":
        text = records_to_csv(records)
    elif fmt in ("svg", "svg_heatmap"):
        text = records_to_svg(records)
    else:
        raise ValueError(f"unknown sweep output format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def default_theta_grid(count: int = 8) -> np.ndarray:
    return np.linspace(0.0, THETA_MAX, count)


def default_lambda_grid() -> list[float]:
    return [0.0, 0.25, 0.5, 1.0]
