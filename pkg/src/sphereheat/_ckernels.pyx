# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pykernels``; same signatures."""
import numpy as np
from libc.math cimport cos, sin, exp, log, pow, fabs, lgamma, sqrt, M_PI

NAME = "cython"
cdef long MAX_TERMS = 200000


def trig_sum(double[::1] coef, long[::1] pz, long[::1] pc, long[::1] ps,
             long[::1] grp, Py_ssize_t ngroups, double[::1] z):
    cdef Py_ssize_t npts = z.shape[0], nterms = coef.shape[0], i, k
    cdef long ma = 0, mb = 0, mc = 0
    for k in range(nterms):
        ma = max(ma, pz[k])
        mb = max(mb, pc[k])
        mc = max(mc, ps[k])
    val_np = np.zeros((ngroups, npts))
    abs_np = np.zeros((ngroups, npts))
    zp_np = np.empty(ma + 1)
    cp_np = np.empty(mb + 1)
    sp_np = np.empty(mc + 1)
    cdef double[:, ::1] val = val_np
    cdef double[:, ::1] av = abs_np
    cdef double[::1] zp = zp_np
    cdef double[::1] cp = cp_np
    cdef double[::1] sp = sp_np
    cdef double zi, ci, si, term
    for i in range(npts):
        zi = z[i]
        ci = cos(zi)
        si = 1.0 / sin(zi)
        zp[0] = 1.0
        cp[0] = 1.0
        sp[0] = 1.0
        for k in range(1, ma + 1):
            zp[k] = zp[k - 1] * zi
        for k in range(1, mb + 1):
            cp[k] = cp[k - 1] * ci
        for k in range(1, mc + 1):
            sp[k] = sp[k - 1] * si
        for k in range(nterms):
            term = coef[k] * zp[pz[k]] * cp[pc[k]] * sp[ps[k]]
            val[grp[k], i] += term
            av[grp[k], i] += fabs(term)
    return val_np, abs_np


def taylor_sum(double[:, ::1] mat, double[::1] z2):
    cdef Py_ssize_t ngroups = mat.shape[0], ncoef = mat.shape[1], npts = z2.shape[0], g, k, i
    val_np = np.empty((ngroups, npts))
    abs_np = np.empty((ngroups, npts))
    tail_np = np.empty((ngroups, npts))
    cdef double[:, ::1] val = val_np
    cdef double[:, ::1] av = abs_np
    cdef double[:, ::1] tl = tail_np
    cdef double x, p, v, a, c
    for i in range(npts):
        x = z2[i]
        for g in range(ngroups):
            v = 0.0
            a = 0.0
            for k in range(ncoef - 1, -1, -1):
                c = mat[g, k]
                v = v * x + c
                a = a * x + fabs(c)
            val[g, i] = v
            av[g, i] = a
            p = pow(x, <double>(ncoef - 2))
            tl[g, i] = (fabs(mat[g, ncoef - 2]) + fabs(mat[g, ncoef - 1]) * x) * p
    return val_np, abs_np, tail_np


def lcosh_series_log(long j, double[::1] w):
    """Single pass over the positive series with periodic rescaling."""
    cdef Py_ssize_t npts = w.shape[0], p
    out_np = np.empty(npts)
    cdef double[::1] out = out_np
    cdef double log_t0 = j * log(2.0) + lgamma(j + 1.0) - lgamma(2.0 * j + 1.0)
    cdef double w2, term, s, shift
    cdef long i
    for p in range(npts):
        w2 = w[p] * w[p]
        term = 1.0
        s = 1.0
        shift = 0.0
        i = 0
        while i < MAX_TERMS:
            term *= w2 / (2.0 * (i + 1) * (2.0 * i + 2 * j + 1))
            s += term
            i += 1
            if term < 1e-17 * s and 2.0 * i > w[p]:
                break
            if s > 1e280:
                s *= 1e-280
                term *= 1e-280
                shift += 644.7238260383328  # 280 log(10)
        out[p] = log_t0 + shift + log(s)
    return out_np


def theta_correction_log(double t, double[::1] phi0, double eps, long nmin):
    cdef Py_ssize_t npts = phi0.shape[0], p
    out_np = np.empty(npts)
    cdef double[::1] out = out_np
    cdef double acc, up, down, f
    cdef long n
    for p in range(npts):
        f = phi0[p]
        acc = 1.0
        n = 1
        while n < MAX_TERMS:
            up = exp(-M_PI * n * (f + M_PI * n) / t)
            down = exp(-M_PI * n * (M_PI * n - f) / t)
            acc += up + down
            if n >= nmin and down <= eps * acc:
                break
            n += 1
        out[p] = log(acc)
    return out_np


def dual_sum(double t, double[::1] phi, double eps):
    cdef Py_ssize_t npts = phi.shape[0], p
    out_np = np.empty(npts)
    abs_np = np.empty(npts)
    cdef double[::1] out = out_np
    cdef double[::1] outa = abs_np
    cdef double acc, absacc, e, term
    cdef long n, nmax = 1
    for p in range(npts):
        acc = 1.0
        absacc = 1.0
        n = 1
        while n < MAX_TERMS:
            e = exp(-n * n * t)
            term = 2 * e * cos(n * phi[p])
            acc += term
            absacc += fabs(term)
            if 2 * e <= eps * absacc or 2 * e < 1e-300:
                break
            n += 1
        if n > nmax:
            nmax = n
        out[p] = acc / (2 * M_PI)
        outa[p] = absacc / (2 * M_PI)
    return out_np, abs_np, nmax


def spectral_sum(long d, double t, double[::1] x, double eps):
    cdef Py_ssize_t npts = x.shape[0], p
    cdef double lam = 0.5 * (d - 1), lg_d1 = lgamma(<double>d)
    # multiplicity-weighted coefficients, tabulated until they underflow past the peak
    coefs = []
    cdef long n = 0
    cdef double c
    while n < MAX_TERMS:
        c = exp(log(2.0 * n + d - 1) + lgamma(n + d - 1.0) - lgamma(n + 1.0) - lg_d1 - n * (n + d - 1.0) * t)
        coefs.append(c)
        if n > 2 and c < 1e-300 and c <= coefs[n - 1]:
            break
        n += 1
    coefs.append(0.0)
    coefs.append(0.0)
    cdef double[::1] b = np.asarray(coefs, dtype=float)
    cdef long nb = b.shape[0] - 2
    out_np = np.empty(npts)
    abs_np = np.empty(npts)
    cdef double[::1] out = out_np
    cdef double[::1] outa = abs_np
    cdef double xi, r_prev, r_cur, r_next, acc, absacc, term, b1, b2, q
    cdef long nmax = 1
    for p in range(npts):
        xi = x[p]
        r_prev = 1.0
        r_cur = xi
        acc = b[0] + b[1] * xi
        absacc = b[0] + fabs(b[1] * xi)
        n = 1
        while n < nb:
            r_next = (2 * (n + lam) * xi * r_cur - n * r_prev) / (n + 2 * lam)
            n += 1
            term = b[n] * r_next
            acc += term
            absacc += fabs(term)
            r_prev = r_cur
            r_cur = r_next
            b1 = b[n + 1]
            b2 = b[n + 2]
            if b1 == 0.0:
                break
            q = b2 / b1
            if q < 1.0 and (b1 / (1.0 - q) <= eps * absacc or b1 / (1.0 - q) < 1e-300):
                break
        if n > nmax:
            nmax = n
        out[p] = acc
        outa[p] = absacc
    return out_np, abs_np, nmax
