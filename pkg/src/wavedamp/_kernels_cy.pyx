# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implicit-midpoint kernel.

Same contract and step-for-step arithmetic as ``_kernels_py``: the midpoint
system is solved with a prefactored Cholesky decomposition for linear
feedback and a damped Newton iteration (fresh factorization per iteration)
for the power law. The whole time loop runs in C with BLAS/LAPACK calls
(dsymv / dpotrf / dpotrs), which removes the per-step Python overhead that
dominates at the small system sizes this workbench uses.
"""

import numpy as np

from libc.math cimport fabs, pow, sqrt
from scipy.linalg.cython_blas cimport daxpy, dcopy, ddot, dsymv
from scipy.linalg.cython_lapack cimport dpotrf, dpotrs

from .errors import NonconvergenceError, NumericalError

BACKEND_NAME = "compiled"

KIND_LINEAR = 0
KIND_POWER = 1

cdef int _MAX_BACKTRACK = 30


cdef inline double _g_power(double s, double k, double kk, double p) nogil:
    cdef double a = fabs(s)
    if a <= 1.0:
        return k * pow(a, p - 1.0) * s
    return kk * s


cdef inline double _gprime_power(double s, double k, double kk, double p) nogil:
    cdef double a = fabs(s)
    if a < 1.0:
        return k * p * pow(a, p - 1.0)
    return kk


cdef inline void _symv(double[:, ::1] A, double[::1] x, double[::1] y) nogil:
    # y = A @ x for symmetric A (C order == its own Fortran-order transpose)
    cdef int n = A.shape[0], inc = 1
    cdef double one = 1.0, zero = 0.0
    dsymv("L", &n, &one, &A[0, 0], &n, &x[0], &inc, &zero, &y[0], &inc)


cdef inline double _nrm(double[::1] x) nogil:
    cdef int n = x.shape[0], inc = 1
    return sqrt(ddot(&n, &x[0], &inc, &x[0], &inc))


cdef inline double _energy(double[:, ::1] K, double[::1] U, double[::1] V,
                           double[::1] work) nogil:
    cdef int n = K.shape[0], inc = 1
    _symv(K, U, work)
    return 0.5 * (ddot(&n, &U[0], &inc, &work[0], &inc)
                  + ddot(&n, &V[0], &inc, &V[0], &inc))


cdef int _factor(double[:, ::1] A) nogil:
    cdef int n = A.shape[0], info = 0
    dpotrf("L", &n, &A[0, 0], &n, &info)
    return info


cdef void _solve(double[:, ::1] chol, double[::1] rhs) nogil:
    cdef int n = chol.shape[0], one = 1, info = 0
    dpotrs("L", &n, &one, &chol[0, 0], &n, &rhs[0], &n, &info)


cdef double _residual(double[:, ::1] S, double[::1] b, double[::1] Vm,
                      double[::1] r, double half, double k, double kk,
                      double p, double[::1] G) nogil:
    # G = S Vm + half * b * g(Vm) - r; returns |G|
    cdef int i, n = S.shape[0]
    _symv(S, Vm, G)
    for i in range(n):
        G[i] += half * b[i] * _g_power(Vm[i], k, kk, p) - r[i]
    return _nrm(G)


def integrate(K, b_diag, int kind, double g_a, double g_b, double g_c,
              U0, V0, double dt, int n_steps,
              double tol_rel=1e-14, int max_iter=100):
    """Advance ``n_steps`` implicit-midpoint steps; see ``_kernels_py.integrate``."""
    cdef double[:, ::1] Kv = np.ascontiguousarray(K, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(b_diag, dtype=np.float64)
    U_arr = np.array(U0, dtype=np.float64)
    V_arr = np.array(V0, dtype=np.float64)
    cdef double[::1] U = U_arr
    cdef double[::1] V = V_arr
    cdef int N = Kv.shape[0]
    cdef double half = 0.5 * dt

    S_arr = np.eye(N) + (dt * dt / 4.0) * np.asarray(Kv)
    cdef double[:, ::1] S = S_arr
    energies_arr = np.empty(n_steps + 1, dtype=np.float64)
    cdef double[::1] energies = energies_arr

    cdef double[::1] work = np.empty(N)
    cdef double[::1] r = np.empty(N)
    cdef double[::1] Vm = np.empty(N)
    cdef double[::1] G = np.empty(N)
    cdef double[::1] Gt = np.empty(N)
    cdef double[::1] delta = np.empty(N)
    cdef double[::1] Vt = np.empty(N)
    cdef double[:, ::1] A
    cdef double[:, ::1] J = np.empty((N, N))

    cdef int i, step, it, bt, inc = 1, nn = N * N, info
    cdef int max_inner = 0, newton_iters
    cdef double gn, gt, tol, tstep, minus_dt2 = 0.0

    energies[0] = _energy(Kv, U, V, work)

    if kind == KIND_LINEAR:
        A = S_arr + (half * g_a) * np.diag(np.asarray(b))
        info = _factor(A)
        if info != 0:
            raise NumericalError(
                f"midpoint system is not positive definite (dpotrf info={info})"
            )

    for step in range(1, n_steps + 1):
        # r = V - half * K @ U
        _symv(Kv, U, work)
        for i in range(N):
            r[i] = V[i] - half * work[i]

        if kind == KIND_LINEAR:
            dcopy(&N, &r[0], &inc, &Vm[0], &inc)
            _solve(A, Vm)
        else:
            newton_iters = _newton(S, J, b, r, half, g_a, g_b, g_c,
                                   tol_rel, max_iter, Vm, G, Gt, delta, Vt)
            if newton_iters < 0:
                raise NonconvergenceError(
                    f"inner midpoint solve did not converge within "
                    f"{max_iter} iterations at step {step}"
                )
            if newton_iters > max_inner:
                max_inner = newton_iters

        # U += dt * Vm ; V = 2 Vm - V
        daxpy(&N, &dt, &Vm[0], &inc, &U[0], &inc)
        for i in range(N):
            V[i] = 2.0 * Vm[i] - V[i]
        energies[step] = _energy(Kv, U, V, work)

    return U_arr, V_arr, energies_arr, max_inner


cdef int _newton(double[:, ::1] S, double[:, ::1] J, double[::1] b,
                 double[::1] r, double half, double k, double kk, double p,
                 double tol_rel, int max_iter,
                 double[::1] Vm, double[::1] G, double[::1] Gt,
                 double[::1] delta, double[::1] Vt) nogil:
    # returns the iteration count, or -1 on nonconvergence / factorization failure
    cdef int i, it, bt, info, inc = 1, N = S.shape[0], nn = N * N
    cdef double gn, gt, t, tol

    tol = _nrm(r)
    tol = tol_rel * (tol if tol > 1.0 else 1.0)
    dcopy(&N, &r[0], &inc, &Vm[0], &inc)  # S is near identity for small dt
    gn = _residual(S, b, Vm, r, half, k, kk, p, G)

    for it in range(1, max_iter + 1):
        if gn <= tol:
            return it - 1
        dcopy(&nn, &S[0, 0], &inc, &J[0, 0], &inc)
        for i in range(N):
            J[i, i] += half * b[i] * _gprime_power(Vm[i], k, kk, p)
        info = _factor(J)
        if info != 0:
            return -1
        for i in range(N):
            delta[i] = -G[i]
        _solve(J, delta)
        t = 1.0
        for bt in range(_MAX_BACKTRACK):
            for i in range(N):
                Vt[i] = Vm[i] + t * delta[i]
            gt = _residual(S, b, Vt, r, half, k, kk, p, Gt)
            if gt <= tol or gt < gn:
                break
            t *= 0.5
        dcopy(&N, &Vt[0], &inc, &Vm[0], &inc)
        dcopy(&N, &Gt[0], &inc, &G[0], &inc)
        gn = gt
    if gn <= tol:
        return max_iter
    return -1
