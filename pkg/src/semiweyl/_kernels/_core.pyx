# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled core for the extension integrals and tridiagonal accumulation.

Numerically interchangeable with _core_py; fuses the weighting, phase, and
reduction loops so no node-by-frequency temporaries are materialized.
"""

from libc.math cimport cos, sin, exp, fabs

import numpy as np


def aae_integrals(x, y, xi, fhat_scaled, family, N, P):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef double[::1] xiv = np.ascontiguousarray(xi, dtype=np.float64)
    fh = np.ascontiguousarray(fhat_scaled, dtype=np.complex128)
    cdef double[::1] fr = np.ascontiguousarray(fh.real)
    cdef double[::1] fi = np.ascontiguousarray(fh.imag)
    cdef Py_ssize_t q = xv.shape[0], m = xiv.shape[0]
    G = np.empty(q, dtype=np.complex128)
    D = np.empty(q, dtype=np.complex128)
    cdef double[::1] gr = np.zeros(q), gi = np.zeros(q)
    cdef double[::1] dr = np.zeros(q), di = np.zeros(q)
    cdef int fam = family, order = N, j
    cdef double pw = P
    cdef Py_ssize_t a, b
    cdef double u, t, g, gt, core, cored, damp, w, wd, ph, c, s, re, im
    cdef double sgr, sgi, sdr, sdi, wr, wi
    for a in range(q):
        sgr = 0.0; sgi = 0.0; sdr = 0.0; sdi = 0.0
        for b in range(m):
            u = yv[a] * xiv[b]
            if fam == 0:
                w = 1.0
                t = 1.0
                for j in range(1, order + 1):
                    t = t * (-u) / j
                    w = w + t
                wd = t
            else:
                t = (fabs(u) - pw) / pw
                if t <= 0.0:
                    core = 1.0
                    cored = 0.0
                elif t >= 1.0:
                    core = 0.0
                    cored = 0.0
                else:
                    g = exp(-1.0 / t)
                    gt = exp(-1.0 / (1.0 - t))
                    core = gt / (g + gt)
                    cored = (-g * gt
                             * (1.0 / ((1.0 - t) * (1.0 - t)) + 1.0 / (t * t))
                             / ((g + gt) * (g + gt)))
                if u > 0.0:
                    wd = cored / pw
                else:
                    wd = -cored / pw
                u = u if u < 2.0 * pw else 2.0 * pw
                u = u if u > -2.0 * pw else -2.0 * pw
                damp = exp(-u)
                w = damp * core
                wd = damp * wd
            ph = xv[a] * xiv[b]
            c = cos(ph); s = sin(ph)
            re = fr[b]; im = fi[b]
            # phase * W * fhat
            sgr += w * (c * re - s * im)
            sgi += w * (c * im + s * re)
            # phase * WD * (i xi fhat)
            wr = -xiv[b] * im
            wi = xiv[b] * re
            sdr += wd * (c * wr - s * wi)
            sdi += wd * (c * wi + s * wr)
        gr[a] = sgr; gi[a] = sgi
        dr[a] = sdr; di[a] = sdi
    G.real = np.asarray(gr); G.imag = np.asarray(gi)
    D.real = np.asarray(dr); D.imag = np.asarray(di)
    return G, D


def tridiag_accumulate(diag, sub, zs, coefs):
    cdef double[::1] d = np.ascontiguousarray(diag, dtype=np.float64)
    sc = np.ascontiguousarray(sub, dtype=np.complex128)
    zc = np.ascontiguousarray(zs, dtype=np.complex128)
    cc = np.ascontiguousarray(coefs, dtype=np.complex128)
    cdef double complex[::1] lo = -sc
    cdef double complex[::1] up = -np.conj(sc)
    cdef double complex[::1] z = zc
    cdef double complex[::1] co = cc
    cdef Py_ssize_t n = d.shape[0], q = zc.shape[0]
    out = np.zeros((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] S = out
    X_arr = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] X = X_arr
    piv_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] piv = piv_arr
    cdef Py_ssize_t k, i, j
    cdef double complex p, w
    for k in range(q):
        for i in range(n):
            for j in range(n):
                X[i, j] = 0.0
            X[i, i] = 1.0
        p = z[k] - d[0]
        piv[0] = p
        for j in range(n):
            X[0, j] = X[0, j] / p
        for i in range(1, n):
            p = (z[k] - d[i]) - (lo[i - 1] * up[i - 1]) / piv[i - 1]
            piv[i] = p
            for j in range(n):
                X[i, j] = (X[i, j] - lo[i - 1] * X[i - 1, j]) / p
        for i in range(n - 2, -1, -1):
            w = up[i] / piv[i]
            for j in range(n):
                X[i, j] = X[i, j] - w * X[i + 1, j]
        for i in range(n):
            for j in range(n):
                S[i, j] = S[i, j] + co[k] * X[i, j]
    return out
