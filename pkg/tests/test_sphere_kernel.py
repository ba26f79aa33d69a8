import math

import numpy as np
import pytest

from sphereheat.bounds import envelope_log, phi_scan_grid
from sphereheat.config import EvalConfig
from sphereheat.errors import CapabilityError, DomainError, UnderflowWarning
from sphereheat.series_oracle import oracle_kernel
from sphereheat.sphere_kernel import (
    KernelQuery,
    evaluate,
    kernel,
    kernel_derivative_log,
    kernel_log,
    mass,
    reduction_constant_log,
    reduction_even,
)
from sphereheat.theta_kernel import hn_theta, theta


def rel(a, b):
    return np.abs(np.expm1(np.asarray(a) - np.asarray(b)))


class TestExamples:
    def test_circle_origin(self):
        assert kernel(1, 1.0, 0.0) == pytest.approx(0.2821239734567623, rel=1e-14)

    def test_circle_is_theta_bit_for_bit(self):
        phi = np.linspace(0, math.pi, 101)
        for t in (1e-5, 0.3, 0.99):
            np.testing.assert_array_equal(kernel_log(1, t, phi).log_abs, theta(t, phi).log_abs)

    def test_three_sphere(self):
        assert kernel(3, 1.0, math.pi / 2) == pytest.approx(0.05061, abs=1e-4)
        hand = sum(math.exp(-n * (n + 2)) * (n + 1) * math.sin((n + 1) * math.pi / 2) for n in range(20))
        assert kernel(3, 1.0, math.pi / 2) == pytest.approx(hand / (2 * math.pi**2), rel=1e-12)

    def test_equilibrium(self):
        assert kernel(2, 60.0, 2.0) == pytest.approx(1 / (4 * math.pi), rel=1e-14)

    def test_underflow(self):
        with pytest.warns(UnderflowWarning):
            assert kernel(1, 1e-4, math.pi) == 0.0
        lv = kernel_log(1, 1e-4, math.pi)
        assert lv.sign == 1
        assert abs(lv.log_abs - envelope_log(1, 1e-4, math.pi).log_abs) < 50
        assert lv.log_abs == pytest.approx(-24669.978, abs=1e-2)

    def test_five_sphere(self):
        v = kernel(5, 0.2, 0.3)
        assert 0 < v < math.inf
        assert v == pytest.approx(oracle_kernel(5, 0.2, 0.3).value, rel=1e-8)

    def test_circle_antipode(self):
        assert kernel(1, 1.0, math.pi) == pytest.approx(0.0478460822292587, rel=1e-14)

    def test_query_object(self):
        q = KernelQuery(3, 0.4, 1.0)
        assert kernel_log(q).log_abs == kernel_log(3, 0.4, 1.0).log_abs


class TestReduction:
    def test_two_sphere_against_series(self):
        assert reduction_even(2, 0.5, 1.0).value == pytest.approx(oracle_kernel(2, 0.5, 1.0).value, rel=1e-6)

    def test_small_time_sits_in_envelope_band(self):
        phi = phi_scan_grid(128)
        band = kernel_log(4, 1e-4, phi).log_abs - envelope_log(4, 1e-4, phi).log_abs
        center = 0.5 * (band.min() + band.max())
        lv = kernel_log(4, 1e-3, 3.0).log_abs - envelope_log(4, 1e-3, 3.0).log_abs
        assert abs(lv - center) < 1.0

    @pytest.mark.filterwarnings("ignore::sphereheat.errors.ConvergenceWarning")
    @pytest.mark.parametrize("d", [2, 4, 6])
    def test_small_time_branch_matches_oracle(self, d):
        # t = 0.05 .. 0.06 straddles the quadrature switch; the oracle is still usable there
        phi = np.linspace(0, math.pi, 13)
        for t in (0.049, 0.051):
            np.testing.assert_allclose(kernel_log(d, t, phi).log_abs, oracle_kernel(d, t, phi).log_abs,
                                       rtol=1e-10, atol=1e-10)

    def test_reduction_constant(self):
        # c_2 = 2^-1 pi^(1/2) / Gamma(1/2) = 1/2
        assert reduction_constant_log(2) == pytest.approx(math.log(0.5))

    def test_info(self):
        _, info = evaluate(4, 0.3, 1.0)
        assert info.method == "reduction" and info.nodes >= 32


class TestDispatch:
    def test_continuity_at_crossover(self):
        phi = np.linspace(0, math.pi, 41)
        for d in range(1, 7):
            below = kernel_log(d, 1.0, phi, method="theta" if d % 2 else "reduction").log_abs
            above = kernel_log(d, 1.0, phi, method="series").log_abs
            assert rel(below, above).max() < 1e-9

    def test_auto_methods(self):
        assert evaluate(3, 0.5, 1.0)[1].method == "theta"
        assert evaluate(2, 0.5, 1.0)[1].method == "reduction"
        assert evaluate(2, 1.5, 1.0)[1].method == "series"
        assert evaluate(1, 3.0, 1.0)[1].method == "theta"

    def test_odd_closed_form_is_hn_theta(self):
        t, phi = 0.3, np.array([0.5, 2.0])
        lv = kernel_log(5, t, phi, method="theta")
        expected = -2 * math.log(2 * math.pi) + 4 * t + hn_theta(t, phi, 2).log_abs
        np.testing.assert_allclose(lv.log_abs, expected, rtol=1e-14)


class TestErrors:
    @pytest.mark.parametrize("args", [(0, 1.0, 1.0), (2, 0.0, 1.0), (2, -1.0, 1.0), (2.5, 1.0, 1.0)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            kernel_log(*args)

    def test_wrong_method(self):
        with pytest.raises(DomainError):
            kernel_log(2, 0.3, 1.0, method="theta")
        with pytest.raises(DomainError):
            kernel_log(3, 0.3, 1.0, method="reduction")
        with pytest.raises(DomainError):
            kernel_log(3, 0.3, 1.0, method="magic")

    def test_capability(self):
        with pytest.raises(CapabilityError):
            kernel_log(41, 0.3, 1.0)
        with pytest.raises(CapabilityError):
            kernel_log(40, 0.3, 1.0)

    def test_large_dimension_through_series(self):
        assert kernel_log(40, 1.5, 1.0).sign == 1

    def test_raised_cap(self):
        cfg = EvalConfig(order_cap=20)
        assert kernel_log(41, 0.3, 1.0, cfg).sign == 1


class TestShape:
    @pytest.mark.parametrize("d", range(1, 7))
    @pytest.mark.parametrize("t", [1e-3, 0.1, 0.7, 2.0])
    def test_decreasing_in_angle(self, d, t):
        phi = np.linspace(0, math.pi, 120)
        assert np.all(np.diff(kernel_log(d, t, phi).log_abs) < 0)

    @pytest.mark.parametrize("d", range(1, 7))
    def test_mass(self, d):
        for t in (1e-3, 0.1, 1.0, 5.0):
            assert mass(d, t) == pytest.approx(1.0, abs=1e-10)

    def test_periodic_and_even_in_angle(self):
        phi = np.array([0.3, 1.7])
        np.testing.assert_allclose(kernel_log(3, 0.2, -phi).log_abs, kernel_log(3, 0.2, phi).log_abs, rtol=1e-15)


class TestDerivative:
    def test_circle_value(self):
        lv = kernel_derivative_log(1, 1.0, math.pi / 2)
        expected = -2 * math.pi * math.exp(-1) * kernel(3, 1.0, math.pi / 2)
        assert lv.sign == -1
        assert lv.value == pytest.approx(expected, rel=1e-12)
        assert lv.value == pytest.approx(-0.116981, abs=1e-4)

    def test_circle_against_series_derivative(self):
        t, phi = 1.0, math.pi / 2
        s = sum(-(phi + 2 * math.pi * n) / (2 * t) * math.exp(-(phi + 2 * math.pi * n) ** 2 / (4 * t))
                for n in range(-20, 21)) / math.sqrt(4 * math.pi * t)
        assert kernel_derivative_log(1, t, phi).value == pytest.approx(s, rel=1e-12)

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_against_finite_difference(self, d):
        t, phi, h = 0.3, 1.2, 1e-5
        fd = (kernel(d, t, phi + h) - kernel(d, t, phi - h)) / (2 * h)
        assert kernel_derivative_log(d, t, phi).value == pytest.approx(fd, rel=1e-7)

    def test_endpoints(self):
        assert kernel_derivative_log(3, 0.5, 0.0).sign == 0
        assert kernel_derivative_log(2, 0.5, math.pi).sign == 0

    def test_large_time_band(self):
        lv = kernel_derivative_log(2, 2.0, 1.0)
        assert lv.sign == -1
        ratio = math.exp(lv.log_abs - envelope_log(2, 2.0, 1.0, "derivative_large_t").log_abs)
        assert 0.01 < ratio < 1.0

    def test_interior_sign(self):
        phi = np.linspace(0, math.pi, 50)[1:-1]
        for d in range(1, 7):
            for t in (1e-4, 0.01, 1.0, 5.0):
                assert np.all(kernel_derivative_log(d, t, phi).sign < 0)
