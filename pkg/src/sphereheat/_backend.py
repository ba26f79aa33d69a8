"""Select the compiled kernels when available, the numpy fallback otherwise.

Set ``SPHEREHEAT_PURE=1`` to force the fallback.
"""
import os

from . import _pykernels as python_kernels

compiled_kernels = None
if os.environ.get("SPHEREHEAT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_kernels
    except ImportError:  # extension not built
        compiled_kernels = None

_active = compiled_kernels or python_kernels


def use(name):
    """Switch backend at runtime ('cython' or 'python'); returns the previous name."""
    global _active
    prev = _active.NAME
    if name == "cython":
        if compiled_kernels is None:
            raise ImportError("compiled extension sphereheat._ckernels is not available")
        _active = compiled_kernels
    elif name == "python":
        _active = python_kernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    return prev


def name():
    return _active.NAME


def trig_sum(*args):
    return _active.trig_sum(*args)


def taylor_sum(mat, z2):
    return _active.taylor_sum(mat, z2)


def lcosh_series_log(j, w):
    return _active.lcosh_series_log(j, w)


def theta_correction_log(t, phi0, eps, nmin):
    return _active.theta_correction_log(t, phi0, eps, nmin)


def dual_sum(t, phi, eps):
    return _active.dual_sum(t, phi, eps)


def spectral_sum(d, t, x, eps):
    return _active.spectral_sum(d, t, x, eps)
