"""Exact calculus for D = (1/sin z) d/dz and L = (1/z) d/dz on trig-rational terms.

A term is ``coeff * v**pow_v * z**pow_z * cos(z)**pow_cos / sin(z)**pow_sin_inv * h(v z)``
with ``h`` one of 1, cosh, sinh and ``v`` a symbolic scale. Coefficients are
exact ``Fraction`` values; floats appear only when an expression is evaluated.

Canonical form: terms are merged on the key
``(pow_z, pow_cos, pow_sin_inv, hyp, pow_v)`` and ``cos^2 / sin^c`` with
``c >= 2`` is rewritten as ``1/sin^c - 1/sin^(c-2)``. After that rewrite the
remaining monomials are linearly independent, so two expressions are equal iff
their canonical term maps are equal.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _backend
from .config import DEFAULT_ORDER_CAP
from .errors import CapabilityError, DomainError, PoleError

POLE_TOL = 1e-12
SERIES_ORDER = 80  # Taylor/Laurent coefficients kept up to z**SERIES_ORDER
_EPS = np.finfo(float).eps


class Hyp(IntEnum):
    NONE = 0
    COSH = 1
    SINH = 2


@dataclass(frozen=True)
class TrigTerm:
    coeff: Fraction
    pow_z: int = 0
    pow_cos: int = 0
    pow_sin_inv: int = 0
    hyp: Hyp = Hyp.NONE
    pow_v: int = 0

    def __post_init__(self):
        if self.coeff == 0:
            raise ValueError("TrigTerm coefficient must be nonzero")
        if self.pow_cos < 0 or self.pow_sin_inv < 0 or self.pow_v < 0:
            raise ValueError("cos, 1/sin and v exponents must be nonnegative")
        if self.hyp is Hyp.NONE and self.pow_z < 0:
            raise ValueError("negative powers of z need a hyperbolic factor")

    @property
    def key(self):
        return (self.pow_z, self.pow_cos, self.pow_sin_inv, int(self.hyp), self.pow_v)

    @property
    def parity(self):
        """0 for an even function of z, 1 for odd."""
        return (self.pow_z + self.pow_sin_inv + (self.hyp is Hyp.SINH)) % 2


def _reduce_into(acc, key, coeff):
    """Add ``coeff * monomial(key)`` to ``acc`` applying the cos^2 rewrite."""
    stack = [(key, coeff)]
    while stack:
        (a, b, c, h, p), q = stack.pop()
        if q == 0:
            continue
        if b >= 2 and c >= 2:
            stack.append(((a, b - 2, c, h, p), q))
            stack.append(((a, b - 2, c - 2, h, p), -q))
            continue
        new = acc.get((a, b, c, h, p), 0) + q
        if new == 0:
            acc.pop((a, b, c, h, p), None)
        else:
            acc[(a, b, c, h, p)] = new


class TrigExpr:
    """Immutable canonical sum of :class:`TrigTerm`."""

    __slots__ = ("_terms", "_hash", "_compiled")

    def __init__(self, terms=None):
        acc = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else ((t.key, t.coeff) for t in terms)
            for key, q in items:
                _reduce_into(acc, tuple(key), Fraction(q))
        self._terms = dict(sorted(acc.items()))
        self._hash = None
        self._compiled = None

    # -- constructors ---------------------------------------------------
    @classmethod
    def const(cls, c):
        return cls({(0, 0, 0, 0, 0): Fraction(c)})

    @classmethod
    def monomial(cls, coeff=1, pow_z=0, pow_cos=0, pow_sin_inv=0, hyp=Hyp.NONE, pow_v=0):
        TrigTerm(Fraction(coeff), pow_z, pow_cos, pow_sin_inv, Hyp(hyp), pow_v)
        return cls({(pow_z, pow_cos, pow_sin_inv, int(hyp), pow_v): Fraction(coeff)})

    @classmethod
    def z_over_sin(cls, power=1):
        return cls.monomial(1, pow_z=power, pow_sin_inv=power)

    @classmethod
    def cosh(cls):
        """cosh(v z)"""
        return cls.monomial(1, hyp=Hyp.COSH)

    @classmethod
    def sinh(cls):
        return cls.monomial(1, hyp=Hyp.SINH)

    # -- structure ------------------------------------------------------
    @property
    def terms(self):
        return tuple(TrigTerm(q, a, b, c, Hyp(h), p) for (a, b, c, h, p), q in self._terms.items())

    def items(self):
        return self._terms.items()

    def is_zero(self):
        return not self._terms

    @property
    def has_hyp(self):
        return any(k[3] for k in self._terms)

    def is_even(self):
        return all(t.parity == 0 for t in self.terms)

    def pole_order_at_pi(self):
        return max((k[2] for k in self._terms), default=0)

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TrigExpr.const(other) if other else TrigExpr()
        return isinstance(other, TrigExpr) and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    # -- algebra --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TrigExpr):
            other = TrigExpr.const(other)
        acc = dict(self._terms)
        for k, q in other._terms.items():
            _reduce_into(acc, k, q)
        return TrigExpr(acc)

    __radd__ = __add__

    def __neg__(self):
        return TrigExpr({k: -q for k, q in self._terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, TrigExpr) else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TrigExpr):
            other = Fraction(other)
            return TrigExpr({k: q * other for k, q in self._terms.items()}) if other else TrigExpr()
        acc = {}
        for (a1, b1, c1, h1, p1), q1 in self._terms.items():
            for (a2, b2, c2, h2, p2), q2 in other._terms.items():
                if h1 and h2:
                    raise DomainError("products of two hyperbolic factors are outside the term class")
                _reduce_into(acc, (a1 + a2, b1 + b2, c1 + c2, h1 or h2, p1 + p2), q1 * q2)
        return TrigExpr(acc)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = TrigExpr.const(1)
        for _ in range(n):
            out = out * self
        return out

    def at_unit_scale(self):
        """Substitute v = 1."""
        return TrigExpr({(a, b, c, h, 0): q for (a, b, c, h, p), q in self._terms.items()}) if self._terms else self

    # -- printing -------------------------------------------------------
    def format_lines(self):
        lines = []
        for t in self.terms:
            parts = [str(t.coeff)]
            if t.pow_v:
                parts.append("v" if t.pow_v == 1 else f"v^{t.pow_v}")
            if t.pow_z:
                parts.append("z" if t.pow_z == 1 else f"z^{t.pow_z}")
            if t.pow_cos:
                parts.append("cos(z)" if t.pow_cos == 1 else f"cos(z)^{t.pow_cos}")
            if t.pow_sin_inv:
                parts.append("sin(z)^-1" if t.pow_sin_inv == 1 else f"sin(z)^-{t.pow_sin_inv}")
            if t.hyp is Hyp.COSH:
                parts.append("cosh(v z)")
            elif t.hyp is Hyp.SINH:
                parts.append("sinh(v z)")
            lines.append(" * ".join(parts))
        return lines or ["0"]

    def __str__(self):
        return " + ".join(self.format_lines())

    def __repr__(self):
        return f"TrigExpr({self})"

    # -- evaluation -----------------------------------------------------
    def __call__(self, z, v=None):
        return evaluate(self, z, v)


# ---------------------------------------------------------------------------
# calculus


def differentiate(expr):
    """d/dz, with d/dz cosh(vz) = v sinh(vz) and d/dz sinh(vz) = v cosh(vz)."""
    acc = {}
    for (a, b, c, h, p), q in expr.items():
        if a:
            _reduce_into(acc, (a - 1, b, c, h, p), q * a)
        if b:
            # -b cos^(b-1) sin z / sin^c
            if c:
                _reduce_into(acc, (a, b - 1, c - 1, h, p), -q * b)
            else:  # sin z = (1 - cos^2 z) / sin z
                _reduce_into(acc, (a, b - 1, 1, h, p), -q * b)
                _reduce_into(acc, (a, b + 1, 1, h, p), q * b)
        if c:
            _reduce_into(acc, (a, b + 1, c + 1, h, p), -q * c)
        if h:
            _reduce_into(acc, (a, b, c, 3 - h, p + 1), q)
    return TrigExpr(acc)


def apply_D(expr):
    """(1/sin z) d/dz"""
    return TrigExpr({(a, b, c + 1, h, p): q for (a, b, c, h, p), q in differentiate(expr).items()})


def apply_L(expr):
    """(1/z) d/dz"""
    return TrigExpr({(a - 1, b, c, h, p): q for (a, b, c, h, p), q in differentiate(expr).items()})


# ---------------------------------------------------------------------------
# Phi tables

_cap = DEFAULT_ORDER_CAP
_table_lock = threading.Lock()
_tables: dict[int, tuple[TrigExpr, ...]] = {}


def set_order_cap(cap):
    global _cap
    if cap < 1:
        raise DomainError("order cap must be >= 1")
    _cap = int(cap)


def get_order_cap():
    return _cap


@dataclass(frozen=True)
class PhiTable:
    """Phi_{N,1..N} with D_z^N F(vz) = sum_j v^(2j) (L^j F)(vz) Phi_{N,j}(z)."""

    order: int
    entries: tuple[TrigExpr, ...]

    def __getitem__(self, j):
        if not 1 <= j <= self.order:
            raise IndexError(f"Phi_{{{self.order},{j}}} does not exist")
        return self.entries[j - 1]

    def format(self):
        out = []
        for j, e in enumerate(self.entries, start=1):
            out.append(f"Phi[{self.order},{j}] =")
            out.extend("  " + ln for ln in e.format_lines())
        return "\n".join(out)


def _check_order(n, cap, what):
    if n < 0:
        raise DomainError(f"{what} must be nonnegative")
    if n > cap:
        raise CapabilityError(f"{what} {n} exceeds the configured order cap {cap}")


def phi_table(N, cap=None):
    """Exact Phi_{N,j}, j = 1..N, built by
    Phi_{N+1,j} = (z/sin z) Phi_{N,j-1} + (1/sin z) Phi_{N,j}'."""
    cap = _cap if cap is None else cap
    if N < 1:
        raise DomainError("Phi table order must be >= 1")
    _check_order(N, cap, "Phi table order")
    with _table_lock:
        if N not in _tables:
            start = max((k for k in _tables if k < N), default=0)
            if start == 0:
                _tables[1] = (TrigExpr.z_over_sin(1),)
                start = 1
            zs = TrigExpr.z_over_sin(1)
            prev = _tables[start]
            for n in range(start, N):
                cur = []
                for j in range(1, n + 2):
                    e = TrigExpr()
                    if j >= 2:
                        e = e + zs * prev[j - 2]
                    if j <= n:
                        e = e + apply_D(prev[j - 1])
                    cur.append(e)
                prev = tuple(cur)
                _tables.setdefault(n + 1, prev)
        return PhiTable(N, _tables[N])


@lru_cache(maxsize=None)
def _l_cosh_scaled(j):
    e = TrigExpr.cosh()
    for _ in range(j):
        e = apply_L(e)
    return e


def l_cosh(j, cap=None):
    """Exact L^j(cosh)(z): a combination of z^-m cosh z and z^-m sinh z."""
    cap = _cap if cap is None else cap
    _check_order(j, cap, "L-power")
    return _l_cosh_scaled(j).at_unit_scale()


# ---------------------------------------------------------------------------
# Laurent series at z = 0 (exact)


@lru_cache(maxsize=None)
def _sin_over_z(M):
    return tuple(Fraction((-1) ** (k // 2), math.factorial(k + 1)) if k % 2 == 0 else Fraction(0) for k in range(M + 1))


def _mul_series(a, b, M):
    out = [Fraction(0)] * (M + 1)
    for i, ai in enumerate(a):
        if ai == 0 or i > M:
            continue
        for k, bk in enumerate(b[: M + 1 - i]):
            if bk:
                out[i + k] += ai * bk
    return tuple(out)


@lru_cache(maxsize=None)
def _z_over_sin_pow(c, M):
    if c == 0:
        return (Fraction(1),) + (Fraction(0),) * M
    if c == 1:
        s = _sin_over_z(M)
        inv = [Fraction(0)] * (M + 1)
        inv[0] = Fraction(1)
        for k in range(1, M + 1):
            inv[k] = -sum(s[i] * inv[k - i] for i in range(1, k + 1) if s[i])
        return tuple(inv)
    half = _z_over_sin_pow(c // 2, M)
    out = _mul_series(half, half, M)
    if c % 2:
        out = _mul_series(out, _z_over_sin_pow(1, M), M)
    return out


@lru_cache(maxsize=None)
def _cos_pow(b, M):
    if b == 0:
        return (Fraction(1),) + (Fraction(0),) * M
    if b == 1:
        return tuple(Fraction((-1) ** (k // 2), math.factorial(k)) if k % 2 == 0 else Fraction(0) for k in range(M + 1))
    half = _cos_pow(b // 2, M)
    out = _mul_series(half, half, M)
    if b % 2:
        out = _mul_series(out, _cos_pow(1, M), M)
    return out


def laurent(expr, order=SERIES_ORDER):
    """Exact Laurent expansion at z = 0 up to z**order.

    Returns ``{power_of_z: {power_of_v: Fraction}}`` with zero entries dropped.
    """
    out: dict[int, dict[int, Fraction]] = {}
    for (a, b, c, h, p), q in expr.items():
        low = a - c
        M = order - low
        if M < 0:
            continue
        base = _mul_series(_z_over_sin_pow(c, M), _cos_pow(b, M), M)
        for k, s in enumerate(base):
            if s == 0:
                continue
            if not h:
                slot = out.setdefault(low + k, {})
                slot[p] = slot.get(p, 0) + q * s
                continue
            for m in range(0, M - k + 1):
                if (m % 2) != (h == Hyp.SINH):
                    continue
                slot = out.setdefault(low + k + m, {})
                slot[p + m] = slot.get(p + m, 0) + q * s / math.factorial(m)
    cleaned = {}
    for k in sorted(out):
        inner = {pv: val for pv, val in out[k].items() if val != 0}
        if inner:
            cleaned[k] = inner
    return cleaned


# ---------------------------------------------------------------------------
# numerical evaluation


class _Compiled:
    """Float arrays for the direct-sum kernel plus the Laurent data."""

    def __init__(self, expr):
        terms = list(expr.items())
        self.coef = np.array([float(q) for _, q in terms], dtype=float)
        self.pz = np.array([k[0] for k, _ in terms], dtype=np.int64)
        self.pc = np.array([k[1] for k, _ in terms], dtype=np.int64)
        self.ps = np.array([k[2] for k, _ in terms], dtype=np.int64)
        self.hyp = np.array([k[3] for k, _ in terms], dtype=np.int64)
        self.pv = np.array([k[4] for k, _ in terms], dtype=np.int64)
        self.has_sin = bool(np.any(self.ps > 0))
        self._laurent = None
        self._expr = expr

    @property
    def series(self):
        if self._laurent is None:
            self._laurent = laurent(self._expr)
        return self._laurent


def _compiled(expr):
    if expr._compiled is None:
        expr._compiled = _Compiled(expr)
    return expr._compiled


def _check_poles(z, has_sin):
    if not has_sin:
        return
    k = np.rint(z / math.pi)
    bad = (k != 0) & (np.abs(z - k * math.pi) < POLE_TOL)
    if np.any(bad):
        kk = int(k[bad][0])
        raise PoleError(f"evaluation at the pole z = {kk}*pi", lattice_point=kk * math.pi)


def _series_eval(series, z, v):
    """Return (value, abs_sum, truncation_estimate) of the Laurent series at z."""
    vf = 1.0 if v is None else float(v)
    val = np.zeros_like(z)
    absval = np.zeros_like(z)
    tail = np.zeros_like(z)
    top = max(series) if series else 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k, inner in series.items():
            if k < 0:
                # principal part: decide cancellation exactly, e.g. (1 - v) z^-2 at v = 1
                fv = Fraction(vf)
                ck = float(sum(q * fv**pv for pv, q in inner.items()))
            else:
                ck = sum(float(q) * vf**pv for pv, q in inner.items())
            if ck == 0.0:
                continue
            term = ck * z**k
            val += term
            absval += np.abs(term)
            if k >= top - 1:
                tail += np.abs(term)
    return val, absval, tail


def evaluate(expr, z, v=None, split=False):
    """Evaluate ``expr`` at real ``z`` (scalar or array).

    Points where the direct sum cancels badly (near z = 0, where individual
    1/sin^c terms blow up while the sum stays bounded) are evaluated from the
    exact Laurent series instead. With ``split=True`` the result is a
    :class:`~sphereheat.logvalue.LogValue`, and hyperbolic factors never
    materialise in linear scale.
    """
    from .logvalue import LogValue

    comp = _compiled(expr)
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if comp.hyp.any() and v is None:
        raise DomainError("expression has hyperbolic factors: supply the scale v")
    if not comp.hyp.any() and v is not None and not split:
        v = None
    if comp.coef.size == 0:
        out = np.zeros_like(z)
        if split:
            return LogValue.from_linear(out[0] if scalar else out)
        return float(out[0]) if scalar else out
    _check_poles(z, comp.has_sin)

    vf = 1.0 if v is None else float(v)
    w = np.abs(vf * z)
    # shift = log of the common hyperbolic scale e^{|vz|}/2; cosh(vz) = e^shift (1 + e^{-2|vz|})
    shift = np.where(w > 20.0, w - math.log(2.0), 0.0) if (split and comp.hyp.any()) else np.zeros_like(z)
    cz, sz = np.cos(z), np.sin(z)
    total = np.zeros_like(z)
    abs_total = np.zeros_like(z)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for q, a, b, c, h, p in zip(comp.coef, comp.pz, comp.pc, comp.ps, comp.hyp, comp.pv):
            term = q * vf**p * z**a * cz**b / sz**c
            if h == Hyp.COSH:
                term = term * np.where(shift > 0, 1.0 + np.exp(-2.0 * w), np.cosh(vf * z))
            elif h == Hyp.SINH:
                term = term * np.where(shift > 0, np.sign(vf * z) * (1.0 - np.exp(-2.0 * w)), np.sinh(vf * z))
            elif split:
                term = term * np.exp(-shift)
            total += term
            abs_total += np.abs(term)
    direct_err = 8 * _EPS * abs_total + np.where(np.isfinite(total), 0.0, np.inf)
    use_series = np.abs(z) < 2.8
    if np.any(use_series):
        zs = z[use_series]
        s_val, s_abs, s_tail = _series_eval(comp.series, zs, v)
        s_val = s_val * np.exp(-shift[use_series])
        s_err = (8 * _EPS * s_abs + s_tail) * np.exp(-shift[use_series])
        s_err = np.where(np.isfinite(s_val), s_err, np.inf)
        pick = ~(direct_err[use_series] <= s_err)  # NaN direct sums defer to the series
        if np.any(~np.isfinite(np.where(pick, s_val, total[use_series]))) and np.any(zs == 0):
            raise PoleError("evaluation at the pole z = 0", lattice_point=0.0)
        total[use_series] = np.where(pick, s_val, total[use_series])
    if split:
        with np.errstate(divide="ignore"):
            la = np.log(np.abs(total)) + shift
        out = LogValue._wrap(la, np.sign(total))
        return out[0] if scalar else out
    return float(total[0]) if scalar else total


# ---------------------------------------------------------------------------
# batched evaluation used by the kernel paths


class PhiBank:
    """All Phi_{k,j}, 1 <= j <= k <= N, evaluated together on a point array."""

    def __init__(self, N, cap=None):
        self.N = N
        self.index = {}
        coef, pz, pc, ps, grp = [], [], [], [], []
        series_rows = []
        g = 0
        for k in range(1, N + 1):
            table = phi_table(k, cap)
            for j in range(1, k + 1):
                self.index[(k, j)] = g
                e = table[j]
                for (a, b, c, _h, _p), q in e.items():
                    coef.append(float(q))
                    pz.append(a)
                    pc.append(b)
                    ps.append(c)
                    grp.append(g)
                series_rows.append(e)
                g += 1
        self.ngroups = g
        self.coef = np.asarray(coef, dtype=float)
        self.pz = np.asarray(pz, dtype=np.int64)
        self.pc = np.asarray(pc, dtype=np.int64)
        self.ps = np.asarray(ps, dtype=np.int64)
        self.grp = np.asarray(grp, dtype=np.int64)
        self._exprs = series_rows
        self._taylor = None

    @property
    def taylor(self):
        """(ngroups, K+1) float coefficients in powers of z^2 (Phi is even)."""
        if self._taylor is None:
            K = SERIES_ORDER // 2
            mat = np.zeros((self.ngroups, K + 1))
            for g, e in enumerate(self._exprs):
                for k, inner in laurent(e).items():
                    if k < 0 or k % 2:
                        raise AssertionError("Phi entries must be even and analytic at 0")
                    mat[g, k // 2] = float(sum(inner.values()))
            self._taylor = mat
        return self._taylor

    def evaluate(self, z):
        """Return array (ngroups, len(z))."""
        z = np.ascontiguousarray(np.atleast_1d(np.asarray(z, dtype=float)))
        _check_poles(z, True)
        val, absval = _backend.trig_sum(self.coef, self.pz, self.pc, self.ps, self.grp, self.ngroups, z)
        direct_err = 8 * _EPS * absval
        # the series only helps where the direct sum has lost digits
        with np.errstate(invalid="ignore"):
            lossy = ~np.all(direct_err <= 64 * _EPS * np.abs(val), axis=0)
        near = (np.abs(z) < 2.8) & lossy
        if np.any(near):
            zs = z[near]
            s_val, s_abs, s_tail = _backend.taylor_sum(self.taylor, np.ascontiguousarray(zs * zs))
            s_err = 8 * _EPS * s_abs + s_tail
            pick = ~(direct_err[:, near] <= s_err)
            val[:, near] = np.where(pick, s_val, val[:, near])
        return val

    def row(self, values, k, j):
        return values[self.index[(k, j)]]


_bank_lock = threading.Lock()
_banks: dict[int, PhiBank] = {}


def phi_bank(N, cap=None):
    cap = _cap if cap is None else cap
    _check_order(N, cap, "Phi table order")
    with _bank_lock:
        if N not in _banks:
            _banks[N] = PhiBank(N, cap)
        return _banks[N]


# ---------------------------------------------------------------------------
# L^j(cosh) and D^k cosh(vz) in log scale


@lru_cache(maxsize=None)
def _l_cosh_closed(j):
    """(m, p_m, q_m) with L^j cosh(w) = sum_m w^-m (p_m cosh w + q_m sinh w)."""
    e = l_cosh(j)
    acc = {}
    for (a, _b, _c, h, _p), q in e.items():
        m = -a
        pc, qs = acc.get(m, (0.0, 0.0))
        if h == Hyp.COSH:
            pc += float(q)
        else:
            qs += float(q)
        acc[m] = (pc, qs)
    return tuple((m, pc, qs) for m, (pc, qs) in sorted(acc.items()))


def _l_cosh_switch(j):
    return max(8.0, float(j * j))


def log_l_cosh(j, w):
    """log L^j(cosh)(w) for w >= 0 (the function is positive).

    Power series for small w (all coefficients positive), log-split closed form
    beyond ``max(8, j^2)`` where the alternating asymptotic sum is benign.
    """
    w = np.abs(np.atleast_1d(np.asarray(w, dtype=float)))
    out = np.empty_like(w)
    if j == 0:
        return np.where(w > 20, w - math.log(2) + np.log1p(np.exp(-2 * w)), np.log(np.cosh(np.minimum(w, 20))))
    sw = _l_cosh_switch(j)
    small = w <= sw
    if np.any(small):
        out[small] = _backend.lcosh_series_log(j, np.ascontiguousarray(w[small]))
    big = ~small
    if np.any(big):
        wb = w[big]
        e2 = np.exp(-2 * wb)
        acc = np.zeros_like(wb)
        for m, pc, qs in _l_cosh_closed(j):
            acc += wb ** (-float(m)) * (pc * (1 + e2) + qs * (1 - e2))
        out[big] = wb - math.log(2) + np.log(acc)
    return out


def d_cosh_log(k, z, v, bank_values=None, bank=None):
    """D_z^k cosh(v z) as a LogValue, assembled as sum_j v^(2j) L^j(cosh)(vz) Phi_{k,j}(z)."""
    from .logvalue import LogValue, signed_logsumexp

    z = np.atleast_1d(np.asarray(z, dtype=float))
    if k == 0:
        return LogValue._wrap(log_l_cosh(0, v * z), np.ones_like(z))
    if bank is None:
        bank = phi_bank(k)
        bank_values = bank.evaluate(z)
    logs, signs = [], []
    lv = math.log(v)
    for j in range(1, k + 1):
        ph = bank.row(bank_values, k, j)
        with np.errstate(divide="ignore"):
            logs.append(2 * j * lv + log_l_cosh(j, v * z) + np.log(np.abs(ph)))
        signs.append(np.sign(ph))
    la, s = signed_logsumexp(np.array(logs), np.array(signs), axis=0)
    return LogValue._wrap(la, s)
