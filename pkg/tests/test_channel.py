import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from mimolab.channel import (
    SeededRng,
    awgn,
    draw_rayleigh,
    draw_rayleigh_batch,
    normalize_power,
    snr_to_sigma,
)


class TestSeededRng:
    def test_same_key_same_sequence(self):
        a = SeededRng(42, 3).normal(100)
        b = SeededRng(42, 3).normal(100)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = SeededRng(42, 0).uniform(50)
        b = SeededRng(42, 1).uniform(50)
        assert not np.array_equal(a, b)

    def test_normal_moments(self):
        z = SeededRng(1).normal(1_000_000)
        assert abs(z.mean()) < 4 / np.sqrt(z.size)
        assert abs(z.var() - 1.0) < 0.01

    def test_integers_range_and_uniformity(self):
        draws = SeededRng(5).integers(16, 100_000)
        assert draws.min() == 0 and draws.max() == 15
        counts = np.bincount(draws, minlength=16)
        assert stats.chisquare(counts).pvalue > 1e-4


class TestDrawRayleigh:
    def test_shape(self):
        h = draw_rayleigh(2, 2, SeededRng(0))
        assert h.shape == (2, 2) and h.dtype == np.complex128

    def test_batch_shape(self):
        h = draw_rayleigh_batch(7, 1, 2, SeededRng(0))
        assert h.shape == (7, 1, 2)

    def test_moments(self):
        n = 1_000_000
        h = SeededRng(2).cnormal(n)
        assert abs(h.mean()) < 4 / np.sqrt(n)
        assert abs(np.mean(np.abs(h) ** 2) - 1.0) < 0.01

    def test_determinism(self):
        h1 = draw_rayleigh(3, 4, SeededRng(9, 1))
        h2 = draw_rayleigh(3, 4, SeededRng(9, 1))
        assert np.array_equal(h1, h2)

    def test_rejects_bad_dims(self):
        with pytest.raises(ValueError):
            draw_rayleigh(0, 2, SeededRng(0))

    def test_magnitude_squared_is_exponential(self):
        # chi-square goodness of fit of |h|^2 against Exp(1), alpha = 0.001
        n = 100_000
        x = np.abs(SeededRng(3).cnormal(n)) ** 2
        k = 32
        edges = -np.log(1.0 - np.arange(k + 1) / k)
        edges[-1] = np.inf
        counts, _ = np.histogram(x, bins=edges)
        chi2 = ((counts - n / k) ** 2 / (n / k)).sum()
        assert chi2 < stats.chi2.ppf(1.0 - 0.001, k - 1)


class TestAwgn:
    def test_zero_sigma_identity(self):
        x = SeededRng(0).cnormal(100)
        assert np.array_equal(awgn(x, 0.0, SeededRng(1)), x)

    def test_noise_power(self):
        n = 1_000_000
        y = awgn(np.zeros(n, dtype=complex), 1.0, SeededRng(4))
        assert abs(np.mean(np.abs(y) ** 2) - 1.0) < 0.01

    def test_noise_independent_of_input(self):
        n = 1_000_000
        x = SeededRng(5).cnormal(n)
        noise = awgn(x, 1.0, SeededRng(6)) - x
        corr = np.abs(np.mean(x * np.conj(noise)))
        assert corr < 4 / np.sqrt(n)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            awgn(np.zeros(4, dtype=complex), -0.1, SeededRng(0))

    def test_empirical_snr_tracks_requested(self):
        n = 1_000_000
        rng = SeededRng(8)
        x = np.exp(2j * np.pi * rng.uniform(n))  # unit-power signal
        for snr_db in [0.0, 10.0]:
            y = awgn(x, snr_to_sigma(snr_db), rng)
            measured = 10 * np.log10(np.mean(np.abs(x) ** 2) / np.mean(np.abs(y - x) ** 2))
            assert abs(measured - snr_db) < 0.1


class TestNormalizePower:
    def test_constant_power_scaling(self):
        x = np.full((4, 8), 2.0 + 0.0j)  # |entry|^2 = 4 everywhere
        y = normalize_power(x)
        assert np.allclose(y, x / 2.0)

    def test_unit_power_unchanged(self):
        rng = SeededRng(1)
        x = rng.cnormal((16, 4))
        x = x / np.sqrt(np.mean(np.abs(x) ** 2))
        assert np.abs(normalize_power(x) - x).max() < 1e-12

    def test_post_power_is_one(self):
        x = SeededRng(2).cnormal((32, 6)) * 3.7
        y = normalize_power(x)
        assert abs(np.mean(np.abs(y) ** 2) - 1.0) < 1e-9

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            normalize_power(np.zeros((3, 3), dtype=complex))

    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
    @settings(max_examples=30, deadline=None)
    def test_idempotent_and_scale_invariant(self, seed, alpha):
        x = SeededRng(seed).cnormal((8, 4))
        y = normalize_power(x)
        assert np.abs(normalize_power(y) - y).max() < 1e-12
        assert np.abs(normalize_power(alpha * x) - y).max() < 1e-12


class TestSnrToSigma:
    @pytest.mark.parametrize("snr_db,expected", [(0.0, 1.0), (20.0, 0.1)])
    def test_known_values(self, snr_db, expected):
        assert snr_to_sigma(snr_db) == pytest.approx(expected, abs=1e-15)

    def test_ten_db_power(self):
        assert snr_to_sigma(10.0) ** 2 == pytest.approx(0.1, abs=1e-15)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            snr_to_sigma(float("nan"))
