# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-slot codebook search; same contract as ``_search_py.search``.

Per slot the RIS-independent factors are formed once:
``X[a,u] = w_a^H H_d w_u`` and ``Y[k][a,u] = (w_a^H H_ra)[k] (H_ur w_u)[k]``,
so every profile costs ``X + sum_k phi_k Y[k]`` on split real/imag buffers.
"""
from libc.math cimport log1p, log
from libc.stdlib cimport malloc, free

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double LN2 = log(2.0)


cdef inline double best_power(double bl, double br, double c, double e,
                              double bw, double noise, double pmax) nogil:
    cdef double p
    if bl <= br or e <= 0.0:
        return 0.0
    if c <= 0.0:
        return pmax
    p = bw * (bl - br) / (LN2 * c) - noise / e
    if p < 0.0:
        return 0.0
    if p > pmax:
        return pmax
    return p


def search(const double complex[:, ::1] Hd, const double complex[:, ::1] Hra,
           const double complex[:, ::1] Hur, const double complex[:, ::1] hdp,
           const double complex[:, ::1] hrp, const double[::1] weights,
           const double complex[:, ::1] phasors, const double complex[:, ::1] Wu,
           const double complex[:, ::1] Wa, double bl, double br, double v,
           double dfac, double bw, double noise, double pmax):
    cdef Py_ssize_t n_ant_a = Hd.shape[0], n_ant_u = Hd.shape[1], m = Hur.shape[0]
    cdef Py_ssize_t n_pix = hdp.shape[0]
    cdef Py_ssize_t n_r = phasors.shape[0], n_u = Wu.shape[0], n_a = Wa.shape[0]
    cdef Py_ssize_t r, u, a, i, j, k, p, q, n_au, n_pu
    cdef double complex acc, wa
    cdef double e, c, pw, obj, rate, pg, yr, yi, fr, fi
    cdef double best_obj = 0.0, best_pw = 0.0, best_e = 0.0, best_pg = 0.0
    cdef Py_ssize_t best_key = -1, key
    cdef bint idle = bl <= br

    if idle:
        n_r = 1
        n_u = 1
        n_a = 1
    n_au = n_a * n_u
    n_pu = n_pix * n_u

    # B[k,u] = (H_ur w_u)[k]; A[a,k] = (w_a^H H_ra)[a,k]
    cdef double complex[:, ::1] B = np.empty((m, n_u), dtype=np.complex128)
    cdef double complex[:, ::1] A = np.empty((n_a, m), dtype=np.complex128)
    cdef double complex[:, ::1] HdW = np.empty((n_ant_a, n_u), dtype=np.complex128)
    # scratch: flattened (a,u) and (p,u) planes, one per RIS element k, split re/im
    cdef Py_ssize_t n_work = 2 * m * (n_au + n_pu) + 4 * (n_au + n_pu) + n_u
    cdef double *work = <double *> malloc(n_work * sizeof(double))
    if work == NULL:
        raise MemoryError()
    cdef double *Yr = work
    cdef double *Yi = Yr + m * n_au
    cdef double *Pr = Yi + m * n_au
    cdef double *Pi = Pr + m * n_pu
    cdef double *Xr = Pi + m * n_pu
    cdef double *Xi = Xr + n_au
    cdef double *Zr = Xi + n_au
    cdef double *Zi = Zr + n_au
    cdef double *Dr = Zi + n_au
    cdef double *Di = Dr + n_pu
    cdef double *Qr = Di + n_pu
    cdef double *Qi = Qr + n_pu
    cdef double *pix = Qi + n_pu

    with nogil:
        for k in range(m):
            for u in range(n_u):
                acc = 0.0
                for j in range(n_ant_u):
                    acc = acc + Hur[k, j] * Wu[u, j]
                B[k, u] = acc
        for a in range(n_a):
            for k in range(m):
                acc = 0.0
                for i in range(n_ant_a):
                    wa = Wa[a, i]
                    acc = acc + wa.conjugate() * Hra[i, k]
                A[a, k] = acc
        for i in range(n_ant_a):
            for u in range(n_u):
                acc = 0.0
                for j in range(n_ant_u):
                    acc = acc + Hd[i, j] * Wu[u, j]
                HdW[i, u] = acc
        for a in range(n_a):
            for u in range(n_u):
                acc = 0.0
                for i in range(n_ant_a):
                    wa = Wa[a, i]
                    acc = acc + wa.conjugate() * HdW[i, u]
                q = a * n_u + u
                Xr[q] = acc.real
                Xi[q] = acc.imag
                for k in range(m):
                    acc = A[a, k] * B[k, u]
                    Yr[k * n_au + q] = acc.real
                    Yi[k * n_au + q] = acc.imag
        for p in range(n_pix):
            for u in range(n_u):
                acc = 0.0
                for j in range(n_ant_u):
                    acc = acc + hdp[p, j] * Wu[u, j]
                q = p * n_u + u
                Dr[q] = acc.real
                Di[q] = acc.imag
                for k in range(m):
                    acc = hrp[p, k] * B[k, u]
                    Pr[k * n_pu + q] = acc.real
                    Pi[k * n_pu + q] = acc.imag

        for r in range(n_r):
            for q in range(n_au):
                Zr[q] = Xr[q]
                Zi[q] = Xi[q]
            for q in range(n_pu):
                Qr[q] = Dr[q]
                Qi[q] = Di[q]
            for k in range(m):
                fr = phasors[r, k].real
                fi = phasors[r, k].imag
                for q in range(n_au):
                    yr = Yr[k * n_au + q]
                    yi = Yi[k * n_au + q]
                    Zr[q] += yr * fr - yi * fi
                    Zi[q] += yr * fi + yi * fr
                for q in range(n_pu):
                    yr = Pr[k * n_pu + q]
                    yi = Pi[k * n_pu + q]
                    Qr[q] += yr * fr - yi * fi
                    Qi[q] += yr * fi + yi * fr
            for u in range(n_u):
                pg = 0.0
                for p in range(n_pix):
                    q = p * n_u + u
                    pg = pg + weights[p] * (Qr[q] * Qr[q] + Qi[q] * Qi[q])
                pix[u] = pg
            for a in range(n_a):
                for u in range(n_u):
                    q = a * n_u + u
                    e = Zr[q] * Zr[q] + Zi[q] * Zi[q]
                    c = v * dfac * pix[u]
                    pw = best_power(bl, br, c, e, bw, noise, pmax)
                    if pw > 0.0:
                        rate = bw * log1p(e * pw / noise) / LN2
                        obj = c * pw + (br - bl) * rate
                    else:
                        obj = 0.0
                    key = (u * n_a + a) * n_r + r
                    if best_key < 0 or obj < best_obj or (obj == best_obj and key < best_key):
                        best_obj = obj
                        best_key = key
                        best_pw = pw
                        best_e = e
                        best_pg = pix[u]

    free(work)
    r = best_key % n_r
    a = (best_key // n_r) % n_a
    u = best_key // (n_r * n_a)
    return int(u), int(a), int(r), best_pw, best_obj, best_e, best_pg
