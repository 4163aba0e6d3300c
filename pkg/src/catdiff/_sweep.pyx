# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled latent-class sweep; see _sweep_py for the shared semantics."""

from libc.math cimport exp, INFINITY
from libc.stdint cimport int64_t


def latent_sweep(double[:, ::1] log_nu, int64_t[::1] x, double[:, :, ::1] log_prof,
                 int64_t[:, ::1] y, double[::1] u, int64_t[::1] z,
                 double[::1] scratch):
    """Resample every unit's latent component into ``z``.

    Returns -1 on success, else the index of the first unit whose weights
    are all zero. ``scratch`` must hold at least H doubles.
    """
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t p = y.shape[1]
    cdef Py_ssize_t H = log_prof.shape[0]
    cdef Py_ssize_t i, j, h, g, zi
    cdef double s, m, w, tot, target, acc

    for i in range(n):
        g = x[i]
        m = -INFINITY
        for h in range(H):
            s = log_nu[g, h]
            for j in range(p):
                s += log_prof[h, j, y[i, j]]
            scratch[h] = s
            if s > m:
                m = s
        if m == -INFINITY:
            return i
        tot = 0.0
        for h in range(H):
            w = exp(scratch[h] - m)
            scratch[h] = w
            tot += w
        target = u[i] * tot
        acc = 0.0
        zi = H - 1
        for h in range(H):
            acc += scratch[h]
            if acc >= target:
                zi = h
                break
        z[i] = zi
    return -1
