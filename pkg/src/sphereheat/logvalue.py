"""Signed log-domain scalars and arrays.

Heat-kernel values near the antipode behave like exp(-pi^2/(4t)) and leave the
double range for t below ~3e-3, so every evaluation path carries
``(log|x|, sign(x))`` pairs and only exponentiates at the very end.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LogValue:
    """``sign * exp(log_abs)``; ``log_abs`` and ``sign`` may be numpy arrays.

    ``sign == 0`` iff ``log_abs == -inf``.
    """

    log_abs: float | np.ndarray
    sign: float | np.ndarray = 1

    @classmethod
    def from_linear(cls, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            la = np.log(np.abs(x))
        return cls._wrap(la, np.sign(x))

    @classmethod
    def zero_like(cls, shape=()):
        return cls._wrap(np.full(shape, -np.inf), np.zeros(shape))

    @staticmethod
    def _wrap(log_abs, sign):
        log_abs = np.asarray(log_abs, dtype=float)
        sign = np.asarray(sign, dtype=float)
        sign = np.where(np.isneginf(log_abs), 0.0, sign)
        log_abs = np.where(sign == 0, -np.inf, log_abs)
        if log_abs.ndim == 0:
            return LogValue(float(log_abs), float(sign))
        return LogValue(log_abs, sign)

    @property
    def value(self):
        """Linear-scale value (may underflow to 0 or overflow to inf)."""
        with np.errstate(over="ignore", under="ignore"):
            out = self.sign * np.exp(self.log_abs)
        return float(out) if np.ndim(out) == 0 else out

    def __mul__(self, other):
        if isinstance(other, LogValue):
            return LogValue._wrap(np.add(self.log_abs, other.log_abs), np.multiply(self.sign, other.sign))
        return self * LogValue.from_linear(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, LogValue):
            other = LogValue.from_linear(other)
        if np.any(np.asarray(other.sign) == 0):
            raise ZeroDivisionError("division by a zero LogValue")
        return LogValue._wrap(np.subtract(self.log_abs, other.log_abs), np.multiply(self.sign, other.sign))

    def __neg__(self):
        return LogValue._wrap(self.log_abs, -np.asarray(self.sign))

    def __add__(self, other):
        if not isinstance(other, LogValue):
            other = LogValue.from_linear(other)
        la, s = signed_logsumexp(
            np.stack(np.broadcast_arrays(self.log_abs, other.log_abs)),
            np.stack(np.broadcast_arrays(self.sign, other.sign)),
            axis=0,
        )
        return LogValue._wrap(la, s)

    def __getitem__(self, idx):
        return LogValue._wrap(np.asarray(self.log_abs)[idx], np.asarray(self.sign)[idx])

    def __len__(self):
        return len(np.atleast_1d(self.log_abs))


def signed_logsumexp(log_abs, signs, axis=0):
    """Return ``(log|S|, sign(S))`` for ``S = sum(signs * exp(log_abs))`` along ``axis``.

    Max-shifted, so no intermediate overflows. Exact cancellation yields
    ``(-inf, 0)``.
    """
    log_abs = np.asarray(log_abs, dtype=float)
    signs = np.asarray(signs, dtype=float)
    zero = signs == 0
    if zero.any():
        log_abs = np.where(zero, -np.inf, log_abs)
    m = np.max(log_abs, axis=axis, keepdims=True)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(under="ignore", invalid="ignore"):
        total = np.sum(signs * np.exp(log_abs - m_safe), axis=axis, keepdims=True)
    total = np.where(np.isnan(total), 0.0, total)
    with np.errstate(divide="ignore"):
        out = np.log(np.abs(total)) + m_safe
    sign = np.sign(total)
    return np.squeeze(out, axis=axis), np.squeeze(sign, axis=axis)


def logsumexp(log_terms, axis=0):
    """Unsigned max-shifted log-sum-exp."""
    log_terms = np.asarray(log_terms, dtype=float)
    m = np.max(log_terms, axis=axis, keepdims=True)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(under="ignore", divide="ignore"):
        out = np.log(np.sum(np.exp(log_terms - m_safe), axis=axis, keepdims=True)) + m_safe
    return np.squeeze(out, axis=axis)
