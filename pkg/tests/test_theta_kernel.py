import math
import mpmath as mp
import numpy as np
import pytest

from sphereheat.config import ThetaConfig
from sphereheat.errors import ConvergenceWarning, DomainError, PoleError
from sphereheat.theta_kernel import gauss_w, hn_theta, hn_w, reduce_angle, theta, theta_dual


def brute_theta(t, phi, dps=40):
    with mp.workdps(dps):
        t, phi = mp.mpf(t), mp.mpf(phi)
        n_max = int(10 + 10 * mp.sqrt(t))
        return sum(mp.exp(-(phi + 2 * mp.pi * n) ** 2 / (4 * t)) for n in range(-n_max, n_max + 1)) / mp.sqrt(4 * mp.pi * t)


def brute_h1_theta(t, phi, dps=40):
    """-theta'(phi)/sin(phi) summed term by term."""
    with mp.workdps(dps):
        t, phi = mp.mpf(t), mp.mpf(phi)
        s = sum((phi + 2 * mp.pi * n) / (2 * t) * mp.exp(-(phi + 2 * mp.pi * n) ** 2 / (4 * t))
                for n in range(-30, 31))
        return s / mp.sqrt(4 * mp.pi * t) / mp.sin(phi)


class TestGauss:
    def test_origin(self):
        assert gauss_w(1, 0).log_abs == pytest.approx(-1.2655121234846454, rel=1e-15)

    def test_pi(self):
        assert gauss_w(1, math.pi).log_abs == pytest.approx(-math.pi**2 / 4 - 1.2655121234846454, rel=1e-15)

    def test_rejects_nonpositive_time(self):
        with pytest.raises(DomainError):
            gauss_w(0.0, 1.0)


class TestTheta:
    def test_values(self):
        assert theta(1, 0).value == pytest.approx(0.2821239734567623, rel=1e-14)
        assert theta(1, math.pi).value == pytest.approx(0.0478460822292587, rel=1e-14)

    def test_reflection(self):
        phi = np.linspace(0.1, 3.0, 9)
        # 2 pi - phi is rounded once, so agreement is to the last bit or two
        np.testing.assert_allclose(theta(0.3, phi).log_abs, theta(0.3, 2 * math.pi - phi).log_abs, rtol=4e-15)

    def test_reduce_angle(self):
        np.testing.assert_allclose(reduce_angle(np.array([-1.0, 7.0, 2 * math.pi - 0.5])),
                                   [1.0, 7.0 - 2 * math.pi, 0.5], atol=1e-15)

    @pytest.mark.parametrize("t", [1e-6, 1e-3, 0.3, 4.0])
    def test_against_brute_force(self, t):
        phi = np.array([0.0, 0.7, 2.0, math.pi])
        ref = [float(mp.log(brute_theta(t, p))) for p in phi]
        np.testing.assert_allclose(theta(t, phi).log_abs, ref, rtol=1e-13, atol=1e-13)

    def test_tiny_time_stays_finite(self):
        lv = theta(1e-6, math.pi)
        assert lv.sign == 1 and lv.log_abs == pytest.approx(-math.pi**2 / 4e-6, rel=1e-5)


class TestThetaDual:
    def test_value_at_zero(self):
        assert theta_dual(1, 0).value == pytest.approx(theta(1, 0).value, rel=1e-12)

    def test_equilibrium(self):
        assert theta_dual(200.0, 1.3).value == pytest.approx(1 / (2 * math.pi), rel=1e-15)

    def test_identity_midpoint(self):
        assert theta_dual(0.5, math.pi / 2).value == pytest.approx(theta(0.5, math.pi / 2).value, rel=1e-12)

    def test_identity_near_antipode_at_small_time(self):
        # the float series cancels to nothing here; the precision fallback recovers it
        phi = np.array([3.0, math.pi])
        np.testing.assert_allclose(theta_dual(0.05, phi).log_abs, theta(0.05, phi).log_abs, rtol=1e-12)

    def test_warns_below_range(self):
        with pytest.warns(ConvergenceWarning):
            theta_dual(0.01, 1.0)

    def test_fallback_is_what_restores_accuracy(self):
        exact = theta(0.05, math.pi).log_abs
        raw = theta_dual(0.05, math.pi, ThetaConfig(hp_fallback=False))
        assert raw.sign <= 0 or abs(math.expm1(raw.log_abs - exact)) > 1e-3


class TestHnW:
    def test_order_zero(self):
        assert hn_w(1, math.pi / 2, 0).value == pytest.approx(0.15223005257389458, rel=1e-14)

    def test_order_one(self):
        # (-D) W_t(psi) = psi / (2 t sin psi) W_t(psi)
        expected = (math.pi / 4) * gauss_w(1, math.pi / 2).value
        lv = hn_w(1, math.pi / 2, 1)
        assert lv.sign == 1
        assert lv.value == pytest.approx(expected, rel=1e-14)
        assert lv.value == pytest.approx(0.1195612, abs=5e-8)

    def test_pole(self):
        with pytest.raises(PoleError):
            hn_w(1, 2 * math.pi, 2)

    @pytest.mark.parametrize("N", [2, 3])
    def test_against_nested_derivative(self, N):
        t, psi = 0.7, 1.1
        with mp.workdps(40):
            f = lambda x: mp.exp(-x * x / (4 * t)) / mp.sqrt(4 * mp.pi * t)
            g = f
            for _ in range(N):
                g = (lambda g: lambda x: -mp.diff(g, x) / mp.sin(x))(g)
            ref = float(g(mp.mpf(psi)))
        assert hn_w(t, psi, N).value == pytest.approx(ref, rel=1e-10)


class TestHnTheta:
    def test_order_zero_is_theta(self):
        assert hn_theta(0.4, 1.0, 0).log_abs == theta(0.4, 1.0).log_abs

    def test_order_one(self):
        lv = hn_theta(1, math.pi / 2, 1)
        assert lv.sign == 1
        assert lv.value == pytest.approx(float(brute_h1_theta(1, math.pi / 2)), rel=1e-13)

    @pytest.mark.parametrize("t", [1e-4, 0.02, 0.5, 3.0])
    def test_order_one_brute_force(self, t):
        phi = np.array([0.2, 1.0, 2.5, 3.1])
        ref = [float(mp.log(brute_h1_theta(t, p))) for p in phi]
        np.testing.assert_allclose(hn_theta(t, phi, 1).log_abs, ref, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("N", [1, 2, 4])
    def test_regimes_agree_in_overlap(self, N):
        phi = np.linspace(math.pi - 1.5, math.pi - 0.5, 7)
        for t in (0.01, 0.3, 1.5):
            a = hn_theta(t, phi, N, regime="bulk")
            b = hn_theta(t, phi, N, regime="antipodal")
            np.testing.assert_allclose(a.log_abs, b.log_abs, rtol=1e-11, atol=1e-11)
            np.testing.assert_array_equal(a.sign, b.sign)

    def test_antipode_finite(self):
        lv = hn_theta(0.01, math.pi, 3)
        assert np.isfinite(lv.log_abs) and lv.sign != 0

    def test_bulk_rejects_antipode(self):
        with pytest.raises(PoleError):
            hn_theta(0.1, math.pi, 2, regime="bulk")

    def test_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            hn_theta(0.1, 4.0, 1)

    def test_unknown_regime(self):
        with pytest.raises(DomainError):
            hn_theta(0.1, 1.0, 1, regime="sideways")
