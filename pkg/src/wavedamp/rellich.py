"""Quadrature verification of the multiplier integral identity.

For a smooth function ``u`` on the unit square and the rotated multiplier
``m(x) = R_theta(x - x0)`` the identity

    2 int_O Lap(u) (m . grad u) dx
        = d (n - 2) int_O |grad u|^2 dx
          + oint_dO ( 2 d_nu(u) (m . grad u) - (m . nu) |grad u|^2 ) ds

holds exactly (in the plane, ``n = 2``, the volume term carries a zero
coefficient; it is still evaluated). Both sides are integrated independently
with composite midpoint rules, whose O(q^-2) error decay is itself a checked
property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .geometry import MultiplierField, PolygonDomain

_DIM = 2

#: rows per chunk when sweeping the q x q interior grid (bounds memory)
_CHUNK_ROWS = 256


@dataclass(frozen=True)
class SmoothTestFunction:
    """Scalar field with closed-form gradient and Laplacian.

    ``value(X, Y)`` returns the field, ``gradient(X, Y)`` the pair of partial
    derivatives, ``laplacian(X, Y)`` the Laplacian, all vectorized.
    """

    name: str
    value: Callable
    gradient: Callable
    laplacian: Callable

    def translated(self, shift) -> "SmoothTestFunction":
        """The same field displaced by ``shift``: ``u(x - shift)``."""
        sx, sy = float(shift[0]), float(shift[1])
        return SmoothTestFunction(
            name=f"{self.name}@({sx},{sy})",
            value=lambda X, Y: self.value(X - sx, Y - sy),
            gradient=lambda X, Y: self.gradient(X - sx, Y - sy),
            laplacian=lambda X, Y: self.laplacian(X - sx, Y - sy),
        )


def _make_catalog() -> dict[str, SmoothTestFunction]:
    pi = math.pi
    cat = [
        SmoothTestFunction(
            "one",
            lambda X, Y: np.ones_like(X),
            lambda X, Y: (np.zeros_like(X), np.zeros_like(Y)),
            lambda X, Y: np.zeros_like(X),
        ),
        SmoothTestFunction(
            "plane",  # x + 2y
            lambda X, Y: X + 2.0 * Y,
            lambda X, Y: (np.ones_like(X), 2.0 * np.ones_like(Y)),
            lambda X, Y: np.zeros_like(X),
        ),
        SmoothTestFunction(
            "xy",
            lambda X, Y: X * Y,
            lambda X, Y: (Y, X),
            lambda X, Y: np.zeros_like(X),
        ),
        SmoothTestFunction(
            "r2",  # x^2 + y^2
            lambda X, Y: X**2 + Y**2,
            lambda X, Y: (2.0 * X, 2.0 * Y),
            lambda X, Y: np.full_like(X, 4.0),
        ),
        SmoothTestFunction(
            "saddle",  # x^2 - y^2, harmonic
            lambda X, Y: X**2 - Y**2,
            lambda X, Y: (2.0 * X, -2.0 * Y),
            lambda X, Y: np.zeros_like(X),
        ),
        SmoothTestFunction(
            "x3y",
            lambda X, Y: X**3 * Y,
            lambda X, Y: (3.0 * X**2 * Y, X**3),
            lambda X, Y: 6.0 * X * Y,
        ),
        SmoothTestFunction(
            "quartic",  # x^4 + y^4
            lambda X, Y: X**4 + Y**4,
            lambda X, Y: (4.0 * X**3, 4.0 * Y**3),
            lambda X, Y: 12.0 * (X**2 + Y**2),
        ),
        SmoothTestFunction(
            "sinsin",  # sin(pi x) sin(pi y), lowest Dirichlet mode
            lambda X, Y: np.sin(pi * X) * np.sin(pi * Y),
            lambda X, Y: (
                pi * np.cos(pi * X) * np.sin(pi * Y),
                pi * np.sin(pi * X) * np.cos(pi * Y),
            ),
            lambda X, Y: -2.0 * pi**2 * np.sin(pi * X) * np.sin(pi * Y),
        ),
        SmoothTestFunction(
            "coscos",  # cos(pi x) cos(pi y)
            lambda X, Y: np.cos(pi * X) * np.cos(pi * Y),
            lambda X, Y: (
                -pi * np.sin(pi * X) * np.cos(pi * Y),
                -pi * np.cos(pi * X) * np.sin(pi * Y),
            ),
            lambda X, Y: -2.0 * pi**2 * np.cos(pi * X) * np.cos(pi * Y),
        ),
    ]
    return {f.name: f for f in cat}


CATALOG: dict[str, SmoothTestFunction] = _make_catalog()


class RellichResult(NamedTuple):
    lhs: float
    rhs: float
    residual: float


def _field_components(field: MultiplierField, X, Y, symmetric_only: bool):
    dx = X - field.x0[0]
    dy = Y - field.x0[1]
    if symmetric_only:
        d = field.d
        return d * dx, d * dy
    c, s = math.cos(field.theta), math.sin(field.theta)
    return c * dx - s * dy, s * dx + c * dy


def rellich_residual(
    u: SmoothTestFunction,
    field: MultiplierField,
    domain: PolygonDomain,
    q: int,
    symmetric_only: bool = False,
) -> RellichResult:
    """Evaluate both sides of the identity with ``q``-point midpoint rules.

    ``symmetric_only`` replaces ``m`` by its dilation part ``d (x - x0)``;
    the identity closes either way because the rotation contributes nothing
    to the volume term.

    Returns ``(lhs, rhs, |lhs - rhs| / max(1, |lhs|))``.
    """
    if q < 8:
        raise ValueError("quadrature resolution must be at least 8")
    if not domain.is_unit_square():
        raise ValueError("the quadrature rules are set up on the unit square")

    centers = (np.arange(q) + 0.5) / q
    cell_area = 1.0 / (q * q)

    lhs_sum = 0.0
    gradsq_sum = 0.0
    for lo in range(0, q, _CHUNK_ROWS):
        ys = centers[lo : lo + _CHUNK_ROWS]
        X, Y = np.meshgrid(centers, ys)
        gx, gy = u.gradient(X, Y)
        lap = u.laplacian(X, Y)
        mx, my = _field_components(field, X, Y, symmetric_only)
        lhs_sum += float(np.sum(lap * (mx * gx + my * gy)))
        gradsq_sum += float(np.sum(gx * gx + gy * gy))
    lhs = 2.0 * lhs_sum * cell_area
    volume_term = field.d * (_DIM - 2) * gradsq_sum * cell_area

    boundary = 0.0
    for edge in domain.edges:
        ts = (np.arange(q) + 0.5) / q
        pts = edge.start[None, :] + ts[:, None] * (edge.end - edge.start)[None, :]
        X, Y = pts[:, 0], pts[:, 1]
        gx, gy = u.gradient(X, Y)
        mx, my = _field_components(field, X, Y, symmetric_only)
        nx, ny = edge.normal
        dnu = gx * nx + gy * ny
        m_grad = mx * gx + my * gy
        m_nu = mx * nx + my * ny
        integrand = 2.0 * dnu * m_grad - m_nu * (gx * gx + gy * gy)
        boundary += float(np.sum(integrand)) * (edge.length / q)

    rhs = volume_term + boundary
    residual = abs(lhs - rhs) / max(1.0, abs(lhs))
    return RellichResult(lhs, rhs, residual)
