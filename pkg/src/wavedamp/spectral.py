"""Decay rates from the spectrum of the first-order system matrix.

The second-order system ``U'' + B U' + K U = 0`` is linearized as

    d/dt [U, V] = [[0, I], [-K, -B]] [U, V],

whose eigenvalues are the roots of ``det(lambda^2 I + lambda B + K) = 0``.
This companion form is similar (via ``diag(K**-1/2, I)``) to the variant
built from ``K**1/2``, so their spectra coincide while no matrix square root
is needed. The asymptotic decay rate of the solution amplitude is the
spectral abscissa, the largest real part over the spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import DiscreteOperators
from .errors import NumericalError

#: dense-eigensolve size cap (2N); larger systems go to the time-domain fit
MAX_COMPANION_DIM = 2000


@dataclass(frozen=True)
class CompanionMatrix:
    """Dense ``[[0, I], [-K, -B]]`` block companion of ``(K, B)``."""

    matrix: np.ndarray
    n: int


def companion_matrix(ops: DiscreteOperators) -> CompanionMatrix:
    """Build the companion matrix; requires positive-definite ``K``.

    Raises ``ValueError`` beyond the dense-solver size cap and
    ``NumericalError`` when the Cholesky test for definiteness fails.
    """
    N = ops.dimension
    if 2 * N > MAX_COMPANION_DIM:
        raise ValueError(
            f"companion dimension {2 * N} exceeds the dense cap "
            f"{MAX_COMPANION_DIM}; use the time-domain rate instead"
        )
    try:
        np.linalg.cholesky(ops.K)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "stiffness matrix is not positive definite (no Dirichlet part?)"
        ) from exc
    M = np.zeros((2 * N, 2 * N))
    M[:N, N:] = np.eye(N)
    M[N:, :N] = -ops.K
    M[N:, N:] = -np.diag(ops.b_diag)
    return CompanionMatrix(matrix=M, n=N)


def eigenvalues(cm: CompanionMatrix) -> np.ndarray:
    """All ``2N`` eigenvalues, sorted by descending real part then imaginary.

    Computed with the LAPACK dense nonsymmetric solver (balancing,
    Hessenberg reduction, Francis QR).
    """
    try:
        vals = np.linalg.eigvals(cm.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration failed: {exc}") from exc
    order = np.lexsort((vals.imag, -vals.real))
    return vals[order]


def spectral_abscissa(cm: CompanionMatrix) -> float:
    """Largest real part over the spectrum: the asymptotic amplitude rate."""
    return float(eigenvalues(cm)[0].real)
