import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from risstat import (ModelError, Scenario, Scheme, StatisticalModel, SystemDims,
                     effective_covariance, generate_covariances, monte_carlo_rate,
                     optimize_elementwise, rate_lower_bound, sample_channel,
                     sample_observation, snr_lower_bound_optimal, substream)
from risstat.simulate import complex_normal, scatterer_covariance, steering_vector

from conftest import random_model, random_phase


class ConstantNormals:
    """Generator stand-in whose complex normals are all exactly 1."""

    def standard_normal(self, shape):
        z = np.zeros(shape)
        z[..., 0] = np.sqrt(2.0)
        return z


def empirical_covariance(x):
    return x.T @ x.conj() / x.shape[0]


def rel_fro(A, B):
    return np.linalg.norm(A - B) / np.linalg.norm(B)


class TestSteering:
    def test_broadside(self):
        np.testing.assert_array_equal(steering_vector(3, 0.0), np.ones(3))

    def test_endfire_alternates(self):
        np.testing.assert_allclose(steering_vector(4, np.pi / 2), [1, -1, 1, -1], atol=1e-15)

    def test_single_scatterer_rank_one(self):
        C = scatterer_covariance(2, [0.0], [1.0])
        np.testing.assert_array_equal(C, np.ones((2, 2)))


class TestScenario:
    def test_gain_at_reference(self):
        sc = Scenario(SystemDims(M=2, N=2))
        assert sc.gain(sc.reference_distance) == pytest.approx(100.0)
        assert sc.gain(20.0) == pytest.approx(25.0)

    @pytest.mark.parametrize("kw", [dict(user_distance_range=(60.0, 15.0)),
                                    dict(ris_pos=(0.0, 0.0)),
                                    dict(n_scatterers_direct=0),
                                    dict(angular_spread_deg=200.0)])
    def test_rejects_invalid(self, kw):
        with pytest.raises(ModelError):
            Scenario(SystemDims(M=2, N=2), **kw)

    def test_zero_distance_is_degenerate(self):
        sc = Scenario(SystemDims(M=2, N=2), user_distance_range=(0.0, 60.0))
        with pytest.raises(ModelError, match="degenerate"):
            generate_covariances(sc, 0.0, substream(0))

    def test_distance_out_of_range(self):
        sc = Scenario(SystemDims(M=2, N=2))
        with pytest.raises(ModelError):
            generate_covariances(sc, 70.0, substream(0))


class TestGenerateCovariances:
    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), M=st.integers(1, 6), N=st.integers(1, 30),
           d=st.floats(15.0, 60.0))
    def test_model_invariants(self, seed, M, N, d):
        m = generate_covariances(Scenario(SystemDims(M=M, N=N)), d, substream(seed))
        assert np.trace(m.R_Tx).real == pytest.approx(M, rel=1e-12)
        assert np.trace(m.R_RIS).real == pytest.approx(M, rel=1e-12)
        for X in (m.C_d, m.C_r, m.R_RIS, m.R_Tx):
            np.testing.assert_array_equal(X, X.conj().T)
            assert np.linalg.eigvalsh(X)[0] >= -1e-10 * np.abs(X).max()
        np.testing.assert_array_equal(m.C_n, np.eye(M))
        assert 0 < m.beta < 1

    def test_deterministic(self):
        sc = Scenario(SystemDims(M=4, N=8))
        a = generate_covariances(sc, 30.0, substream(5, 0, 1))
        b = generate_covariances(sc, 30.0, substream(5, 0, 1))
        c = generate_covariances(sc, 30.0, substream(6, 0, 1))
        for name in ("C_d", "C_r", "R_RIS", "R_Tx"):
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
            assert not np.allclose(getattr(a, name), getattr(c, name))

    def test_direct_power_follows_pathloss(self):
        sc = Scenario(SystemDims(M=4, N=8), scatterer_spread_db=0.0)
        near = generate_covariances(sc, 20.0, substream(1))
        far = generate_covariances(sc, 40.0, substream(1))
        # trace(C_d) = M * gain(d) when every scatterer carries its mean power
        assert np.trace(near.C_d).real == pytest.approx(4 * sc.gain(20.0), rel=1e-12)
        assert np.trace(far.C_d).real == pytest.approx(4 * sc.gain(40.0), rel=1e-12)

    def test_zeta2_sets_noise(self):
        sc = Scenario(SystemDims(M=3, N=4, zeta2=0.25))
        m = generate_covariances(sc, 30.0, substream(0))
        np.testing.assert_array_equal(m.C_n, 0.25 * np.eye(3))


class TestSampleChannel:
    def test_no_paths_gives_zero(self, rng):
        m = random_model(rng, 3, 4, beta=0.0, C_d=np.zeros((3, 3)))
        real = sample_channel(m, random_phase(rng, 4), substream(0), size=10)
        assert not real.h.any()

    def test_single_draw_shapes(self, rng):
        m = random_model(rng, 3, 5)
        real = sample_channel(m, np.ones(5), substream(0))
        assert real.h.shape == (3,) and real.r.shape == (5,) and real.T.shape == (5, 3)

    def test_effective_channel_identity(self, rng):
        m = random_model(rng, 3, 5)
        phi = random_phase(rng, 5)
        real = sample_channel(m, phi, substream(1), size=20)
        for k in range(20):
            hH = real.h_d[k].conj() + real.r[k].conj() @ np.diag(phi).conj().T @ real.T[k]
            np.testing.assert_allclose(real.h[k].conj(), hH, atol=1e-12)

    def test_moments(self, rng):
        m = random_model(rng, 3, 5, beta=0.8)
        phi = random_phase(rng, 5)
        n = 100_000
        h = sample_channel(m, phi, substream(2), size=n).h
        C = effective_covariance(m, phi).C
        se = np.sqrt(np.diag(C).real / (2 * n))
        assert np.all(np.abs(h.real.mean(axis=0)) < 3 * se)
        assert np.all(np.abs(h.imag.mean(axis=0)) < 3 * se)
        assert rel_fro(empirical_covariance(h), C) < 0.02

    def test_common_random_numbers(self, rng):
        m = random_model(rng, 3, 4)
        a = sample_channel(m, np.ones(4), substream(3), size=5)
        b = sample_channel(m.with_beta(0.0), np.ones(4), substream(3), size=5)
        np.testing.assert_array_equal(a.h_d, b.h_d)


class TestSampleObservation:
    def test_zero_noise(self, rng):
        m = random_model(rng, 3, 4)
        real = sample_channel(m, np.ones(4), substream(0), size=4)
        obs = sample_observation(real, np.zeros((3, 3)), substream(1))
        np.testing.assert_array_equal(obs.psi, real.h)

    def test_noise_identity(self, rng):
        m = random_model(rng, 3, 4)
        real = sample_channel(m, np.ones(4), substream(0))
        obs = sample_observation(real, m.C_n, substream(1))
        np.testing.assert_array_equal(obs.psi, real.h + obs.n)
        assert obs.psi.shape == (3,)

    def test_noise_covariance(self, rng):
        C_n = np.array([[1.0, 0.3j], [-0.3j, 0.5]])
        m = random_model(rng, 2, 3)
        real = sample_channel(m, np.ones(3), substream(4), size=100_000)
        obs = sample_observation(real, C_n, substream(5))
        assert rel_fro(empirical_covariance(obs.n), C_n) < 0.02


class TestMonteCarloRate:
    def test_zero_power(self, rng):
        m = random_model(rng, 3, 4)
        dims = SystemDims(M=3, N=4, P=0.0)
        for scheme in Scheme:
            assert monte_carlo_rate(m, np.ones(4), scheme, dims, 100, substream(0)).mean_rate == 0.0

    def test_matched_filter_deterministic_channel(self):
        e1 = np.zeros((2, 2))
        e1[0, 0] = 1.0
        m = StatisticalModel(e1, np.eye(2), np.eye(2), np.eye(2), 0.0, np.eye(2))
        dims = SystemDims(M=2, N=2, P=3.0, sigma2=1.0)
        est = monte_carlo_rate(m, np.ones(2), Scheme.TTS_MATCHED_FILTER, dims, 7,
                               ConstantNormals(), keep_samples=True)
        np.testing.assert_allclose(est.samples, 2.0, rtol=1e-15)
        assert est.mean_rate == pytest.approx(2.0) and est.std_err == pytest.approx(0.0, abs=1e-15)

    def test_bilinear_above_lower_bound(self):
        sc = Scenario(SystemDims(M=4, N=16, P=10.0))
        m = generate_covariances(sc, 30.0, substream(0, 0))
        phi = optimize_elementwise(m).phi_final
        stats = effective_covariance(m, phi)
        bound = rate_lower_bound(snr_lower_bound_optimal(stats.C, stats.Q, 10.0, 1.0))
        est = monte_carlo_rate(m, phi, Scheme.BILINEAR_STAT, sc.dims, 100_000, substream(0, 1))
        assert est.mean_rate >= bound - 3 * est.std_err

    def test_no_ris_ignores_phases(self, rng):
        m = random_model(rng, 3, 4)
        dims = SystemDims(M=3, N=4, P=5.0)
        a = monte_carlo_rate(m, np.ones(4), Scheme.NO_RIS, dims, 500, substream(9))
        b = monte_carlo_rate(m, random_phase(rng, 4), Scheme.NO_RIS, dims, 500, substream(9))
        assert a == b

    def test_reproducible(self, rng):
        m = random_model(rng, 3, 4)
        dims = SystemDims(M=3, N=4, P=5.0)
        a = monte_carlo_rate(m, np.ones(4), "bilinear", dims, 1000, substream(1), True)
        b = monte_carlo_rate(m, np.ones(4), "bilinear", dims, 1000, substream(1), True)
        assert a == b
        assert a.std_err == pytest.approx(np.std(a.samples, ddof=1) / np.sqrt(1000))

    def test_rejects_empty(self, rng):
        m = random_model(rng, 2, 2)
        with pytest.raises(ValueError):
            monte_carlo_rate(m, np.ones(2), "bilinear", SystemDims(M=2, N=2), 0, substream(0))


def test_complex_normal_unit_variance():
    z = complex_normal(substream(0), (200_000,))
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.01)
    assert abs(np.mean(z * z)) < 0.01  # circular


def test_substream_independent_of_creation_order():
    a = substream(1, 2, 3).random(4)
    substream(1, 0).random(10)
    np.testing.assert_array_equal(substream(1, 2, 3).random(4), a)
    assert not np.array_equal(substream(1, 2, 4).random(4), a)
