"""Finite-difference operators for the damped wave system on the unit square.

The 5-point Laplacian is assembled on a uniform grid with spacing
``h = 1/(n+1)``. Dirichlet nodes are eliminated; at Neumann nodes the normal
derivative is folded in through ghost-point elimination
``d_nu u ~ (u_ghost - u_in)/(2h)``, which doubles the inward neighbor and
adds the diagonal feedback weight ``(2/h) * (m . nu)``.

A diagonal trapezoidal mass matrix ``M`` (1 interior, 1/2 on edges, 1/4 at
corners) makes the node-value operators self-adjoint in the weighted inner
product; the returned ``K`` and ``B`` are the ``M**(1/2)``-similarity
transforms, so ``K`` is exactly symmetric, ``B`` stays diagonal and the
semi-discrete dynamics read ``U'' + B U' + K U = 0`` for a linear feedback.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NumericalError
from .geometry import (
    SIGN_TOL,
    BoundaryPartition,
    EdgeLabel,
    MultiplierField,
)


class NodeKind(Enum):
    INTERIOR = "interior"
    DIRICHLET = "dirichlet"
    NEUMANN_EDGE = "neumann_edge"
    NEUMANN_CORNER = "neumann_corner"


@dataclass(frozen=True)
class GridNode:
    i: int
    j: int
    x: float
    y: float
    kind: NodeKind
    #: raw ``m . nu`` per adjacent boundary edge (one entry for edge nodes,
    #: two for corner nodes, empty otherwise)
    m_dot_nu: tuple[float, ...] = ()


@dataclass(frozen=True)
class Grid:
    """Classified unit-square grid with ``n`` interior nodes per side."""

    n: int
    h: float
    nodes: tuple[GridNode, ...]
    unknown_index: dict
    partition: BoundaryPartition
    field: MultiplierField

    @property
    def n_unknowns(self) -> int:
        return len(self.unknown_index)

    def node_at(self, i: int, j: int) -> GridNode:
        return self.nodes[j * (self.n + 2) + i]

    def unknown_nodes(self) -> list[GridNode]:
        order = sorted(self.unknown_index, key=self.unknown_index.get)
        return [self.node_at(i, j) for i, j in order]

    def unknown_positions(self) -> np.ndarray:
        return np.array([[nd.x, nd.y] for nd in self.unknown_nodes()])


# square edges in CCW order: 0 bottom, 1 right, 2 top, 3 left
_EDGE_OF_SIDE = {"bottom": 0, "right": 1, "top": 2, "left": 3}


def _boundary_sides(i: int, j: int, n: int) -> list[str]:
    sides = []
    if j == 0:
        sides.append("bottom")
    if i == n + 1:
        sides.append("right")
    if j == n + 1:
        sides.append("top")
    if i == 0:
        sides.append("left")
    return sides


def _edge_param(side: str, x: float, y: float) -> float:
    # parameter along the CCW edge of the unit square
    if side == "bottom":
        return x
    if side == "right":
        return y
    if side == "top":
        return 1.0 - x
    return 1.0 - y  # left


def build_grid(n: int, partition: BoundaryPartition, field: MultiplierField) -> Grid:
    """Classify every grid node against the boundary partition.

    Boundary nodes take the label of their boundary point; a node lying on
    the interface (or on a corner adjacent to a Dirichlet arc) is Dirichlet.
    """
    if n < 2:
        raise ValueError(f"need at least 2 interior nodes per side, got n={n}")
    if not partition.domain.is_unit_square():
        raise ValueError("grids are only generated on the unit square")
    h = 1.0 / (n + 1)
    edges = partition.domain.edges
    nodes = []
    unknown_index: dict[tuple[int, int], int] = {}
    for j in range(n + 2):
        for i in range(n + 2):
            x, y = i * h, j * h
            sides = _boundary_sides(i, j, n)
            if not sides:
                kind = NodeKind.INTERIOR
                mvals: tuple[float, ...] = ()
            else:
                labels = [
                    partition.label_on_edge(_EDGE_OF_SIDE[s], _edge_param(s, x, y))
                    for s in sides
                ]
                if EdgeLabel.DIRICHLET in labels:
                    kind = NodeKind.DIRICHLET
                    mvals = ()
                else:
                    kind = (
                        NodeKind.NEUMANN_CORNER
                        if len(sides) == 2
                        else NodeKind.NEUMANN_EDGE
                    )
                    mvals = tuple(
                        field.m_dot_nu((x, y), edges[_EDGE_OF_SIDE[s]].normal)
                        for s in sides
                    )
            node = GridNode(i, j, x, y, kind, mvals)
            nodes.append(node)
            if kind != NodeKind.DIRICHLET:
                unknown_index[(i, j)] = len(unknown_index)
    return Grid(n, h, tuple(nodes), unknown_index, partition, field)


@dataclass(frozen=True)
class DiscreteOperators:
    """Symmetric stiffness ``K`` and diagonal feedback ``B`` of the system.

    ``b_diag`` holds the diagonal of ``B``; ``mass_diag`` is the trapezoidal
    weight per unknown (needed e.g. to express the all-Neumann nullvector,
    which is ``sqrt(mass_diag)`` rather than the plain constant vector).
    """

    K: np.ndarray
    b_diag: np.ndarray
    dimension: int
    h: float | None = None
    mass_diag: np.ndarray | None = None
    positions: np.ndarray | None = None
    clamped: tuple = ()

    def __post_init__(self):
        K = np.ascontiguousarray(np.asarray(self.K, dtype=float))
        b = np.ascontiguousarray(np.asarray(self.b_diag, dtype=float))
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError("K must be square")
        if not np.array_equal(K, K.T):
            raise ValueError("K must be exactly symmetric")
        if b.shape != (K.shape[0],):
            raise ValueError("b_diag length must match K")
        if np.any(b < 0.0):
            raise ValueError("feedback diagonal must be nonnegative")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "b_diag", b)
        object.__setattr__(self, "dimension", K.shape[0])

    @property
    def B(self) -> np.ndarray:
        return np.diag(self.b_diag)


def assemble_operators(
    grid: Grid, alpha: float = 1.0, *, clamp: bool = False
) -> DiscreteOperators:
    """Assemble ``(K, B)`` from a classified grid.

    ``alpha`` is the feedback gain multiplying every ``B`` entry. Neumann
    nodes with ``m . nu < -1e-12`` violate the sign condition and raise
    ``NumericalError``; with ``clamp=True`` their feedback weight is zeroed
    and the violation recorded on the returned operators.
    """
    if alpha < 0.0:
        raise ValueError("feedback gain must be nonnegative")
    n, h = grid.n, grid.h
    idx = grid.unknown_index
    N = len(idx)
    inv_h2 = float((n + 1) * (n + 1))

    mass = np.empty(N)
    for (i, j), a in idx.items():
        nb = len(_boundary_sides(i, j, n))
        mass[a] = 1.0 if nb == 0 else (0.5 if nb == 1 else 0.25)

    # energy (quadratic-form) matrix A = M * Ktilde, exactly symmetric
    A = np.zeros((N, N))
    for (i, j), a in idx.items():
        A[a, a] = 4.0 * mass[a] * inv_h2
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ii, jj = i + di, j + dj
            if not (0 <= ii <= n + 1 and 0 <= jj <= n + 1):
                continue  # ghost direction, already folded into the stencil
            coeff = 1.0
            if di != 0 and i in (0, n + 1):
                coeff = 2.0  # inward neighbor doubled by ghost elimination
            if dj != 0 and j in (0, n + 1):
                coeff = 2.0
            b = idx.get((ii, jj))
            if b is not None:
                A[a, b] -= mass[a] * coeff * inv_h2

    inv_sqrt_m = 1.0 / np.sqrt(mass)
    scale = np.multiply.outer(inv_sqrt_m, inv_sqrt_m)
    K = A * scale  # elementwise, keeps bitwise symmetry

    b_diag = np.zeros(N)
    violations = []
    for node in grid.unknown_nodes():
        if node.kind in (NodeKind.NEUMANN_EDGE, NodeKind.NEUMANN_CORNER):
            total = 0.0
            for v in node.m_dot_nu:
                if v < -SIGN_TOL:
                    violations.append(((node.i, node.j), v))
                    continue  # clamp to zero if tolerated below
                total += max(v, 0.0)
            b_diag[idx[(node.i, node.j)]] = alpha * (2.0 / h) * total
    if violations and not clamp:
        worst = min(v for _, v in violations)
        raise NumericalError(
            f"{len(violations)} Neumann node(s) carry m . nu < -{SIGN_TOL:g} "
            f"(worst {worst:.3e}); the partition violates the sign condition "
            f"(pass clamp=True to zero them)"
        )

    return DiscreteOperators(
        K=K,
        b_diag=b_diag,
        dimension=N,
        h=h,
        mass_diag=mass,
        positions=grid.unknown_positions(),
        clamped=tuple(violations),
    )


def discrete_energy(ops: DiscreteOperators, U: np.ndarray, V: np.ndarray) -> float:
    """Discrete energy ``(U.K U + |V|^2) / 2``; nonnegative for PSD ``K``."""
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.shape != (ops.dimension,) or V.shape != (ops.dimension,):
        raise ValueError(
            f"state dimension mismatch: expected {ops.dimension}, "
            f"got U{U.shape}, V{V.shape}"
        )
    return 0.5 * (float(U @ (ops.K @ U)) + float(V @ V))


def sine_mode_initial(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Default initial data: the lowest all-Dirichlet Laplacian mode
    ``sin(pi x) sin(pi y)`` sampled at the unknown nodes, zero velocity."""
    pos = grid.unknown_positions()
    U0 = np.sin(np.pi * pos[:, 0]) * np.sin(np.pi * pos[:, 1])
    return U0, np.zeros_like(U0)


def dirichlet_laplacian_eigenvalues(n: int) -> np.ndarray:
    """Analytic 5-point eigenvalues ``(4/h^2)(sin^2(i pi h/2) + sin^2(j pi h/2))``."""
    h = 1.0 / (n + 1)
    k = np.arange(1, n + 1)
    s = np.sin(k * np.pi * h / 2.0) ** 2
    vals = (4.0 / h**2) * (s[:, None] + s[None, :])
    return np.sort(vals.ravel())


def coordinate_text(matrix: np.ndarray, tol: float = 0.0) -> str:
    """Serialize a matrix as ``row col value`` lines (nonzeros only)."""
    matrix = np.asarray(matrix)
    lines = []
    for r, c in zip(*np.nonzero(np.abs(matrix) > tol)):
        lines.append(f"{r} {c} {float(matrix[r, c])!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def write_operators(ops: DiscreteOperators, k_path, b_path) -> None:
    """Write ``K`` and ``B`` in coordinate format for external inspection."""
    with open(k_path, "w", encoding="utf-8") as fh:
        fh.write(coordinate_text(ops.K))
    with open(b_path, "w", encoding="utf-8") as fh:
        fh.write(coordinate_text(np.diag(ops.b_diag)))
