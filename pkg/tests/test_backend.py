import math

import numpy as np
import pytest

from sphereheat import _backend, _pykernels
from sphereheat.bench import available_backends
from sphereheat.series_oracle import oracle_kernel
from sphereheat.sphere_kernel import kernel_log

COMPILED = "cython" in available_backends()


@pytest.fixture
def each_backend():
    prev = _backend.name()
    yield available_backends()
    _backend.use(prev)


def _under(name, fn):
    _backend.use(name)
    return fn()


def test_fallback_always_available():
    assert "python" in available_backends()
    assert _pykernels.NAME == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.use("fortran")


@pytest.mark.skipif(not COMPILED, reason="compiled extension not built")
@pytest.mark.parametrize("d,t", [(1, 0.01), (3, 0.05), (5, 0.5), (2, 0.3), (4, 0.01), (6, 0.2)])
def test_kernel_parity(each_backend, d, t):
    phi = np.linspace(0, math.pi, 57)
    vals = [_under(b, lambda: kernel_log(d, t, phi).log_abs) for b in each_backend]
    np.testing.assert_allclose(vals[0], vals[1], rtol=1e-12, atol=1e-12)


@pytest.mark.skipif(not COMPILED, reason="compiled extension not built")
@pytest.mark.parametrize("d", [1, 2, 3, 7])
def test_series_parity(each_backend, d):
    phi = np.linspace(0, math.pi, 33)
    vals = [_under(b, lambda: oracle_kernel(d, 0.2, phi).log_abs) for b in each_backend]
    np.testing.assert_allclose(vals[0], vals[1], rtol=1e-12, atol=1e-12)


@pytest.mark.skipif(not COMPILED, reason="compiled extension not built")
def test_lcosh_parity(each_backend):
    w = np.ascontiguousarray(np.linspace(0, 60, 31))
    vals = [_under(b, lambda: _backend.lcosh_series_log(5, w)) for b in each_backend]
    np.testing.assert_allclose(vals[0], vals[1], rtol=1e-14)
