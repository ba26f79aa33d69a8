import math

import numpy as np
import pytest

from sphereheat.bm_sampler import (
    KS_CRIT_001,
    AngleCDF,
    SpherePoint,
    angle_cdf,
    chapman_kolmogorov_test,
    equilibrium_cdf,
    equilibrium_ks,
    make_rng,
    one_sample_ks,
    sample_path,
    sample_step,
    spawn_rngs,
    step_many,
)
from sphereheat.errors import DomainError


def test_ks_constant():
    from scipy.special import kolmogi

    assert KS_CRIT_001 == pytest.approx(kolmogi(0.01), abs=1e-3)


class TestSpherePoint:
    def test_north(self):
        p = SpherePoint.north(3)
        assert p.dim == 3 and p.coords[0] == 1.0

    def test_rejects_non_unit(self):
        with pytest.raises(DomainError):
            SpherePoint([1.0, 1.0])


class TestAngleCDF:
    def test_equilibrium_symmetry(self):
        cdf = angle_cdf(2, 100.0)
        assert cdf(math.pi / 2) == pytest.approx(0.5, abs=1e-8)

    def test_matches_equilibrium_law(self):
        cdf = angle_cdf(3, 60.0)
        phi = np.linspace(0, math.pi, 11)
        np.testing.assert_allclose(cdf(phi), equilibrium_cdf(3, phi), atol=1e-8)

    def test_monotone_and_normalized(self):
        cdf = angle_cdf(3, 0.01)
        assert isinstance(cdf, AngleCDF)
        assert cdf.mass == pytest.approx(1.0, abs=1e-8)
        assert cdf(0.0) == 0.0 and cdf(math.pi) == 1.0
        assert np.all(np.diff(cdf.cdf) >= 0)

    def test_quantile_inverts(self):
        cdf = angle_cdf(2, 0.3)
        u = np.linspace(0.01, 0.99, 25)
        np.testing.assert_allclose(cdf(cdf.quantile(u)), u, atol=1e-6)

    def test_validation(self):
        with pytest.raises(DomainError):
            angle_cdf(2, 0.0)
        with pytest.raises(DomainError):
            angle_cdf(2, 0.1, n_grid=10)


class TestStepping:
    def test_stays_on_sphere(self):
        rng = make_rng(3)
        cdf = angle_cdf(2, 0.2)
        x = np.tile(SpherePoint.north(2).coords, (1000, 1))
        y, phi = step_many(x, cdf, rng)
        np.testing.assert_allclose(np.linalg.norm(y, axis=1), 1.0, atol=1e-14)
        np.testing.assert_allclose(np.arccos(np.clip(y[:, 0], -1, 1)), phi, atol=1e-6)

    def test_seeded_determinism(self):
        a = sample_path(2, 0.5, 100, make_rng(7))
        b = sample_path(2, 0.5, 100, make_rng(7))
        np.testing.assert_array_equal(a, b)
        c = sample_path(2, 0.5, 100, make_rng(8))
        assert not np.array_equal(a, c)

    def test_path_shape(self):
        p = sample_path(3, 0.1, 20, make_rng(0))
        assert p.shape == (21, 4)
        np.testing.assert_array_equal(p[0], SpherePoint.north(3).coords)

    def test_single_step(self):
        y = sample_step(SpherePoint.north(2), 0.3, make_rng(1))
        assert isinstance(y, SpherePoint) and y.dim == 2

    def test_independent_streams(self):
        r1, r2 = spawn_rngs(5, 2)
        assert not np.array_equal(r1.random(4), r2.random(4))

    def test_direction_is_uniform(self):
        # the tangent direction at the north pole of S^2 has uniform azimuth
        cdf = angle_cdf(2, 0.5)
        x = np.tile(SpherePoint.north(2).coords, (20000, 1))
        y, _ = step_many(x, cdf, make_rng(11))
        az = np.arctan2(y[:, 2], y[:, 1])
        from scipy.stats import kstest

        assert kstest(az, "uniform", args=(-math.pi, 2 * math.pi)).pvalue > 0.001


class TestStatistics:
    @pytest.mark.parametrize("d,t", [(2, 1.0), (3, 0.1)])
    def test_chapman_kolmogorov(self, d, t):
        assert chapman_kolmogorov_test(d, t, 100_000, make_rng(2024)).passed

    def test_negative_control(self):
        assert not one_sample_ks(2, 0.1, 100_000, make_rng(9), angle_scale=1.1).passed
        assert not chapman_kolmogorov_test(3, 0.1, 100_000, make_rng(9), angle_scale=1.1).passed

    def test_one_sample(self):
        rep = one_sample_ks(3, 1.0, 50_000, make_rng(4))
        assert rep.passed and rep.as_dict()["n"] == 50_000

    def test_equilibrium(self):
        assert equilibrium_ks(2, 60.0, 50_000, make_rng(5)).passed

    def test_needs_enough_samples(self):
        with pytest.raises(DomainError):
            chapman_kolmogorov_test(2, 0.1, 100, make_rng(0))
