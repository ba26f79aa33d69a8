"""Arbitrary-precision (mpmath) versions of the cancellation-prone sums.

Both exact representations of the kernel can cancel catastrophically:
the lattice/Leibniz sums for H^N theta_t lose about exp(t N^2) relative
accuracy, and the spectral series loses about K_t(0)/K_t(phi) near the
antipode. The float paths report a condition estimate; points whose estimate
exceeds the configured threshold are recomputed here, with the working
precision raised until the measured cancellation fits.
"""
from __future__ import annotations

import math
from functools import lru_cache

import mpmath as mp

from .trig_algebra import laurent, phi_table

GUARD_DIGITS = 20
MAX_DPS = 3000


@lru_cache(maxsize=4096)
def _laurent_cached(expr, order):
    return laurent(expr, order)


def _phi_mp(expr, x, dps):
    if abs(x) < 0.1:
        # series in x**2; |x|/pi < 1/31
        order = max(20, 20 * math.ceil((dps + 5) / (20 * math.log10(math.pi / max(abs(float(x)), 1e-300)))) + 20)
        order = min(order, 400)
        s = mp.mpf(0)
        for k, inner in _laurent_cached(expr, order).items():
            coeff = sum(inner.values())
            s += mp.mpf(coeff.numerator) / coeff.denominator * x**k
        return s
    with mp.workdps(dps + 40):
        cx, sx = mp.cos(x), mp.sin(x)
        s = mp.mpf(0)
        for (a, b, c, _h, _p), q in expr.items():
            s += mp.mpf(q.numerator) / q.denominator * x**a * cx**b / sx**c
    return +s


def _lcosh_mp(j, w):
    if j == 0:
        return mp.cosh(w)
    if w <= max(8.0, j * j):
        term = mp.mpf(2) ** j * mp.factorial(j) / mp.factorial(2 * j)
        s = term
        i = 0
        eps = mp.mpf(10) ** (-mp.mp.dps - 2)
        while True:
            term *= w * w / (2 * (i + 1) * (2 * i + 2 * j + 1))
            s += term
            i += 1
            if i > w and term < eps * s:
                break
        return s
    with mp.workdps(mp.mp.dps + 10 + 2 * j):
        ch, sh = mp.cosh(w), mp.sinh(w)
        s = mp.mpf(0)
        for m, pc, qs in _l_cosh_exact(j):
            s += w ** (-m) * (pc * ch + qs * sh)
    return +s


@lru_cache(maxsize=None)
def _l_cosh_exact(j):
    from .trig_algebra import l_cosh

    acc = {}
    for (a, _b, _c, h, _p), q in l_cosh(j).items():
        pc, qs = acc.get(-a, (0, 0))
        if h == 1:
            pc += q
        else:
            qs += q
        acc[-a] = (pc, qs)
    return tuple((m, mp.mpf(pc.numerator) / pc.denominator if pc else mp.mpf(0),
                  mp.mpf(qs.numerator) / qs.denominator if qs else mp.mpf(0))
                 for m, (pc, qs) in sorted(acc.items()))


def _hn_theta_once(t, phi, N, regime, dps):
    """Return (value, abs_sum) at working precision ``dps``."""
    with mp.workdps(dps):
        t = mp.mpf(t)
        phi = mp.mpf(phi)
        pi = mp.pi
        x = pi - phi if regime == "antipodal" else phi
        phis = {(k, j): _phi_mp(phi_table(k)[j], x, dps) for k in range(1, N + 1) for j in range(1, k + 1)}
        A = [mp.mpf(1)]
        Aabs = [mp.mpf(1)]
        for m in range(1, N + 1):
            terms = [(-1) ** j * mp.mpf(2) ** (-j) * t ** (-j) * phis[(m, j)] for j in range(1, m + 1)]
            A.append(mp.fsum(terms))
            Aabs.append(mp.fsum(abs(u) for u in terms))

        def leibniz(v):
            w = v * x
            lc = [_lcosh_mp(j, w) for j in range(N + 1)]
            dc = [lc[0]]
            dcabs = [lc[0]]
            for k in range(1, N + 1):
                terms = [v ** (2 * j) * lc[j] * phis[(k, j)] for j in range(1, k + 1)]
                dc.append(mp.fsum(terms))
                dcabs.append(mp.fsum(abs(u) for u in terms))
            val = mp.fsum(mp.binomial(N, k) * A[N - k] * dc[k] for k in range(N + 1))
            ab = mp.fsum(mp.binomial(N, k) * Aabs[N - k] * dcabs[k] for k in range(N + 1))
            return val, ab

        w0 = mp.exp(-x * x / (4 * t)) / mp.sqrt(4 * pi * t)
        if regime == "antipodal":
            total, absum, n = mp.mpf(0), mp.mpf(0), 0
            weight = lambda n: 2 * mp.exp(-pi**2 * (2 * n + 1) ** 2 / (4 * t))
            scale = lambda n: pi * (2 * n + 1) / (2 * t)
        else:
            total, absum, n = A[N], Aabs[N], 1
            weight = lambda n: 2 * mp.exp(-pi**2 * n * n / t)
            scale = lambda n: pi * n / t
        eps = mp.mpf(10) ** (-dps)
        count = 0
        while True:
            val, ab = leibniz(scale(n))
            wn = weight(n)
            total += wn * val
            absum += wn * ab
            count += 1
            n += 1
            if count >= 2 and wn * ab < eps * absum:
                break
        sign = (-1) ** N if regime != "antipodal" else 1
        return sign * w0 * total, w0 * absum


def hn_theta_mp(t, phi, N, regime):
    """(log|H^N theta_t(phi)|, sign) at adaptively chosen precision."""
    dps = 30
    while True:
        val, ab = _hn_theta_once(t, phi, N, regime, dps)
        with mp.workdps(dps):
            lost = float(mp.log10(ab / abs(val))) if val != 0 else float("inf")
        if lost < dps - GUARD_DIGITS:
            return float(mp.log(abs(val))), (1.0 if val > 0 else -1.0)
        if dps >= MAX_DPS:
            raise ArithmeticError(f"high-precision H^N theta did not converge (dps={dps})")
        dps = min(MAX_DPS, int(max(dps * 2, lost + GUARD_DIGITS + 10)))


def _spectral_once(d, t, phi, dps):
    with mp.workdps(dps):
        t = mp.mpf(t)
        x = mp.cos(mp.mpf(phi))
        eps = mp.mpf(10) ** (-dps)
        if d == 1:
            total, absum = mp.mpf(1), mp.mpf(1)
            n = 1
            while True:
                e = 2 * mp.exp(-n * n * t)
                term = e * mp.cos(n * mp.mpf(phi))
                total += term
                absum += abs(term)
                if e < eps * absum:
                    break
                n += 1
            return total / (2 * mp.pi), absum / (2 * mp.pi)
        lam = mp.mpf(d - 1) / 2
        area = 2 * mp.pi ** (mp.mpf(d + 1) / 2) / mp.gamma(mp.mpf(d + 1) / 2)

        def coef(n):
            mult = (2 * n + d - 1) * mp.factorial(n + d - 2) / (mp.factorial(n) * mp.factorial(d - 1))
            return mult * mp.exp(-n * (n + d - 1) * t)

        r_prev, r_cur = mp.mpf(1), x
        total = coef(0) + coef(1) * x
        absum = coef(0) + abs(coef(1) * x)
        n = 1
        while True:
            r_prev, r_cur = r_cur, (2 * (n + lam) * x * r_cur - n * r_prev) / (n + 2 * lam)
            n += 1
            b = coef(n)
            total += b * r_cur
            absum += abs(b * r_cur)
            if n > 2 and b < eps * absum and coef(n + 1) < b:
                break
        return total / area, absum / area


def spectral_mp(d, t, phi):
    """(log|K|, sign) of the spectral series at adaptively chosen precision."""
    dps = 30
    while True:
        val, ab = _spectral_once(d, t, phi, dps)
        with mp.workdps(dps):
            lost = float(mp.log10(ab / abs(val))) if val != 0 else float("inf")
        if lost < dps - GUARD_DIGITS:
            return float(mp.log(abs(val))), (1.0 if val > 0 else -1.0)
        if dps >= MAX_DPS:
            raise ArithmeticError(f"high-precision spectral series did not converge (dps={dps})")
        dps = min(MAX_DPS, int(max(dps * 2, lost + GUARD_DIGITS + 10)))
