"""Pure numpy implementations of the hot loops (fallback for ``_ckernels``)."""
import math

import numpy as np

NAME = "python"
MAX_TERMS = 200000


def trig_sum(coef, pz, pc, ps, grp, ngroups, z):
    """Per-group sum and absolute sum of coef * z^a cos^b z / sin^c z."""
    z = np.asarray(z, dtype=float)
    cz, sz = np.cos(z), np.sin(z)
    val = np.zeros((ngroups, z.size))
    absval = np.zeros((ngroups, z.size))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for q, a, b, c, g in zip(coef, pz, pc, ps, grp):
            term = q * z**a * cz**b / sz**c
            val[g] += term
            absval[g] += np.abs(term)
    return val, absval


def taylor_sum(mat, z2):
    """Rows of sum_k mat[g, k] z2^k with the absolute sum and the last-two-term tail."""
    ngroups, ncoef = mat.shape
    val = np.zeros((ngroups, z2.size))
    for k in range(ncoef - 1, -1, -1):
        val = val * z2 + mat[:, k : k + 1]
    powers = z2[None, :] ** np.arange(ncoef)[:, None]
    absval = np.abs(mat) @ powers
    tail = np.abs(mat[:, -2:]) @ powers[-2:]
    return val, absval, tail


def lcosh_series_log(j, w):
    """log sum_i 2^j (i+j)! / (i! (2i+2j)!) w^(2i)."""
    w = np.asarray(w, dtype=float)
    wmax = float(np.max(w)) if w.size else 0.0
    nterms = int(wmax / 2 + 8 * math.sqrt(wmax) + 40)
    i = np.arange(nterms, dtype=float)[:, None]
    with np.errstate(divide="ignore"):
        log_ratio = 2 * np.log(w)[None, :] - np.log(2 * (i + 1) * (2 * i + 2 * j + 1))
    log_t0 = j * math.log(2) + math.lgamma(j + 1) - math.lgamma(2 * j + 1)
    logs = np.vstack([np.zeros((1, w.size)), np.cumsum(log_ratio[:-1], axis=0)])
    m = np.max(logs, axis=0)
    return log_t0 + m + np.log(np.sum(np.exp(logs - m), axis=0))


def theta_correction_log(t, phi0, eps, nmin):
    """log(1 + sum_{n != 0} exp(-pi n (phi0 + pi n) / t)) for phi0 in [0, pi]."""
    phi0 = np.asarray(phi0, dtype=float)
    acc = np.ones_like(phi0)
    n = 1
    while n < MAX_TERMS:
        up = np.exp(-math.pi * n * (phi0 + math.pi * n) / t)
        down = np.exp(-math.pi * n * (math.pi * n - phi0) / t)
        acc += up + down
        if n >= nmin and np.all(down <= eps * acc):
            break
        n += 1
    return np.log(acc)


def dual_sum(t, phi, eps):
    """(1/2pi)(1 + 2 sum_n exp(-n^2 t) cos(n phi)), its absolute-term sum, and the term count."""
    phi = np.asarray(phi, dtype=float)
    acc = np.ones_like(phi)
    absacc = np.ones_like(phi)
    n = 1
    while n < MAX_TERMS:
        e = math.exp(-n * n * t)
        term = 2 * e * np.cos(n * phi)
        acc += term
        absacc += np.abs(term)
        if 2 * e <= eps * np.min(absacc) or 2 * e < 1e-300:
            break
        n += 1
    return acc / (2 * math.pi), absacc / (2 * math.pi), n


def spectral_sum(d, t, x, eps):
    """sum_n N(d,n) exp(-n(n+d-1)t) C_n^lam(x)/C_n^lam(1), lam = (d-1)/2, d >= 2.

    Truncated by a geometric tail majorant on the multiplicity-weighted
    coefficients; returns (sum, absolute-term sum, number of terms).
    """
    x = np.asarray(x, dtype=float)
    lam = 0.5 * (d - 1)
    lg_d1 = math.lgamma(d)

    def coef(n):
        log_mult = math.log(2 * n + d - 1) + math.lgamma(n + d - 1) - math.lgamma(n + 1) - lg_d1
        return math.exp(log_mult - n * (n + d - 1) * t)

    r_prev = np.ones_like(x)
    r_cur = x.copy()
    acc = coef(0) * r_prev + coef(1) * r_cur
    absacc = coef(0) + np.abs(coef(1) * r_cur)
    n = 1
    while n < MAX_TERMS:
        r_next = (2 * (n + lam) * x * r_cur - n * r_prev) / (n + 2 * lam)
        n += 1
        term = coef(n) * r_next
        acc += term
        absacc += np.abs(term)
        r_prev, r_cur = r_cur, r_next
        b1, b2 = coef(n + 1), coef(n + 2)
        if b1 == 0.0:
            break
        q = b2 / b1
        if q < 1.0 and b1 / (1.0 - q) <= eps * np.min(absacc):
            break
        if q < 1.0 and b1 / (1.0 - q) < 1e-300:
            break
    return acc, absacc, n
