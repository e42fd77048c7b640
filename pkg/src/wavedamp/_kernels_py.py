"""Pure-NumPy implicit-midpoint kernel (reference backend).

One step advances ``U' = V``, ``V' = -K U - B g(V)`` by solving

    S Vm + (dt/2) B g(Vm) = V - (dt/2) K U,      S = I + (dt^2/4) K,

then ``U += dt Vm``, ``V = 2 Vm - V``. For a linear law the system matrix is
constant and factored once; otherwise a damped Newton iteration with a fresh
Cholesky factorization per iteration drives the residual below
``tol_rel * max(1, |r|)``. The per-step energy identity
``E+ - E = -dt * Vm . B g(Vm)`` then holds up to the solver residual.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NonconvergenceError

BACKEND_NAME = "python"

KIND_LINEAR = 0
KIND_POWER = 1

_MAX_BACKTRACK = 30


def _g_power(s, k, kk, p):
    a = np.abs(s)
    small = a <= 1.0
    return np.where(small, k * a ** (p - 1.0) * s, kk * s)


def _gprime_power(s, k, kk, p):
    a = np.abs(s)
    return np.where(a < 1.0, k * p * a ** (p - 1.0), kk)


def integrate(
    K,
    b_diag,
    kind,
    g_a,
    g_b,
    g_c,
    U0,
    V0,
    dt,
    n_steps,
    tol_rel=1e-14,
    max_iter=100,
):
    """Advance ``n_steps`` implicit-midpoint steps.

    ``(kind, g_a, g_b, g_c)`` encode the feedback law: linear slope
    ``g_a`` for ``KIND_LINEAR``; ``(k, K, p)`` for ``KIND_POWER``.

    Returns ``(U, V, energies, max_inner_iters)`` with one energy value per
    step boundary (``n_steps + 1`` entries).
    """
    K = np.ascontiguousarray(K, dtype=float)
    b = np.ascontiguousarray(b_diag, dtype=float)
    U = np.array(U0, dtype=float)
    V = np.array(V0, dtype=float)
    N = K.shape[0]

    S = np.eye(N) + (dt * dt / 4.0) * K
    half = 0.5 * dt

    energies = np.empty(n_steps + 1)
    energies[0] = 0.5 * (U @ (K @ U) + V @ V)

    lin_fac = None
    if kind == KIND_LINEAR:
        A = S + (half * g_a) * np.diag(b)
        lin_fac = cho_factor(A, lower=True)

    max_inner = 0
    for step in range(1, n_steps + 1):
        r = V - half * (K @ U)
        if kind == KIND_LINEAR:
            Vm = cho_solve(lin_fac, r)
        else:
            Vm, iters = _newton_solve(S, b, r, half, g_a, g_b, g_c, tol_rel, max_iter)
            max_inner = max(max_inner, iters)
        U += dt * Vm
        V = 2.0 * Vm - V
        energies[step] = 0.5 * (U @ (K @ U) + V @ V)
    return U, V, energies, max_inner


def _newton_solve(S, b, r, half, k, kk, p, tol_rel, max_iter):
    tol = tol_rel * max(1.0, float(np.linalg.norm(r)))
    Vm = r.copy()  # S is near the identity for small dt, so r approximates S^-1 r
    G = S @ Vm + half * b * _g_power(Vm, k, kk, p) - r
    gn = float(np.linalg.norm(G))
    for it in range(1, max_iter + 1):
        if gn <= tol:
            return Vm, it - 1
        J = S + np.diag(half * b * _gprime_power(Vm, k, kk, p))
        delta = cho_solve(cho_factor(J, lower=True), -G)
        t = 1.0
        for _ in range(_MAX_BACKTRACK):
            Vt = Vm + t * delta
            Gt = S @ Vt + half * b * _g_power(Vt, k, kk, p) - r
            gt = float(np.linalg.norm(Gt))
            if gt <= tol or gt < gn:
                break
            t *= 0.5
        Vm, G, gn = Vt, Gt, gt
    if gn <= tol:
        return Vm, max_iter
    raise NonconvergenceError(
        f"inner midpoint solve stalled at residual {gn:.3e} (tol {tol:.3e}) "
        f"after {max_iter} iterations"
    )
