"""Envelope-spectrum pipeline tests: bandpass, Hilbert, Welch PSD."""

import numpy as np
import pytest
from scipy.signal import hilbert as scipy_hilbert

from envdiag import (
    DistributionSpec,
    ParameterError,
    PulseParams,
    Signal,
    SpectrumConfig,
    analytic_signal,
    bandpass,
    envelope,
    envelope_spectrum,
    simulate_signal,
    welch_psd,
)

FS = 25_000.0


def tone(freq, duration=1.0, amp=1.0, fs=FS):
    t = np.arange(int(duration * fs)) / fs
    return Signal(amp * np.cos(2 * np.pi * freq * t), fs)


class TestBandpass:
    def test_in_band_tone_preserved(self):
        x = tone(2500.0)
        y = bandpass(x, 2000.0, 3000.0)
        ratio = np.sqrt(np.mean(y.samples**2) / np.mean(x.samples**2))
        assert ratio >= 0.99

    def test_out_of_band_tone_attenuated(self):
        x = tone(100.0)
        y = bandpass(x, 2000.0, 3000.0)
        assert np.sqrt(np.mean(y.samples**2)) < 0.01 * np.sqrt(np.mean(x.samples**2))

    def test_full_band_is_identity(self):
        rng = np.random.default_rng(3)
        x = Signal(rng.standard_normal(4096), FS)
        y = bandpass(x, 0.0, FS / 2)
        rms = np.sqrt(np.mean((y.samples - x.samples) ** 2))
        assert rms < 1e-10

    def test_linearity(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(4096)
        a = 3.7
        y1 = bandpass(Signal(a * x, FS), 1000.0, 4000.0).samples
        y2 = a * bandpass(Signal(x, FS), 1000.0, 4000.0).samples
        assert np.max(np.abs(y1 - y2)) <= 1e-12 * np.max(np.abs(y2))

    @pytest.mark.parametrize("lo,hi", [(3000.0, 2000.0), (-1.0, 2000.0), (1000.0, 13000.0)])
    def test_band_outside_nyquist_rejected(self, lo, hi):
        with pytest.raises(ParameterError):
            bandpass(tone(2500.0), lo, hi)


class TestAnalyticSignal:
    def test_cosine_gives_sine_quadrature(self):
        # 50 Hz over exactly 1 s: the closed-form Hilbert pair is sin
        t = np.arange(int(FS)) / FS
        x = np.cos(2 * np.pi * 50.0 * t)
        z = analytic_signal(x)
        expected = np.sin(2 * np.pi * 50.0 * t)
        interior = slice(int(0.01 * FS), int(0.99 * FS))
        assert np.max(np.abs(z.imag[interior] - expected[interior])) < 1e-6

    def test_real_part_is_input_exactly(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(1000)
        z = analytic_signal(x)
        np.testing.assert_array_equal(z.real, x)

    def test_constant_vector_passes_through(self):
        z = analytic_signal(np.full(256, 2.5))
        np.testing.assert_allclose(z.imag, 0.0, atol=1e-12)
        np.testing.assert_array_equal(z.real, np.full(256, 2.5))

    def test_matches_scipy_reference(self):
        rng = np.random.default_rng(6)
        for n in (255, 256):  # odd and even lengths
            x = rng.standard_normal(n)
            np.testing.assert_allclose(analytic_signal(x), scipy_hilbert(x), atol=1e-9)

    def test_linearity(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(512)
        z1 = analytic_signal(4.2 * x)
        z2 = 4.2 * analytic_signal(x)
        assert np.max(np.abs(z1 - z2)) <= 1e-12 * np.max(np.abs(z2))

    def test_too_short_input_rejected(self):
        with pytest.raises(ParameterError):
            analytic_signal(np.array([1.0]))


class TestEnvelope:
    def test_tone_envelope_is_flat(self):
        amp = 3.0
        x = tone(50.0, amp=amp)
        env = envelope(x.samples)
        interior = slice(int(0.01 * FS), int(0.99 * FS))
        np.testing.assert_allclose(env[interior], amp, atol=1e-4 * amp)

    def test_envelope_squared_identity(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(1024)
        z = analytic_signal(x)
        np.testing.assert_allclose(envelope(x) ** 2, x**2 + z.imag**2, rtol=1e-12)

    def test_zero_vector(self):
        np.testing.assert_array_equal(envelope(np.zeros(64)), np.zeros(64))

    def test_peaks_at_impulse_centres(self):
        sig, f = simulate_signal(0.6, FS, DistributionSpec.constant(30),
                                 PulseParams(aci=3.0), seed=17, noise_std=0.0)
        env = envelope(sig.samples)
        # strongest local maxima must be spaced by the cycle length
        top = np.flatnonzero(env > 0.6 * env.max())
        groups = np.split(top, np.flatnonzero(np.diff(top) > 10) + 1)
        centres = np.array([g[np.argmax(env[g])] for g in groups]) / FS
        np.testing.assert_allclose(np.diff(centres), 1.0 / f, atol=2.0 / FS)


class TestWelchPsd:
    def test_flat_for_white_noise(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal(int(2 * FS))
        cfg = SpectrumConfig(piece_len_s=None, welch_segments=8, welch_overlap=0.5)
        spec = welch_psd(x, FS, cfg)
        band = spec.amps[(spec.freqs > 0) & (spec.freqs < FS / 4)]
        assert band.max() / np.median(band) < 10.0

    def test_tone_peak_lands_on_nearest_bin(self):
        x = tone(30.0, duration=2.0)
        spec = welch_psd(x.samples, FS, SpectrumConfig(piece_len_s=0.5))
        peak_freq = spec.freqs[np.argmax(spec.amps)]
        assert abs(peak_freq - 30.0) <= spec.df / 2

    def test_zero_input_gives_zero_spectrum(self):
        spec = welch_psd(np.zeros(int(FS)), FS, SpectrumConfig())
        assert np.all(spec.amps == 0.0)

    def test_df_exact(self):
        cfg = SpectrumConfig(piece_len_s=0.5, zero_pad_factor=4)
        spec = welch_psd(np.ones(int(FS)), FS, cfg)
        piece = int(0.5 * FS)
        assert spec.df == FS / (piece * 4)
        np.testing.assert_allclose(spec.freqs, np.arange(len(spec)) * spec.df)

    def test_parseval_single_full_piece(self):
        # no zero padding, one full-length piece: PSD integrates to the variance
        rng = np.random.default_rng(10)
        x = rng.standard_normal(int(FS)) + 0.5
        cfg = SpectrumConfig(piece_len_s=None, welch_segments=1, zero_pad_factor=1)
        spec = welch_psd(x, FS, cfg)
        assert np.sum(spec.amps) * spec.df == pytest.approx(np.var(x), rel=0.05)

    def test_too_short_input_rejected(self):
        with pytest.raises(ParameterError):
            welch_psd(np.ones(4), FS, SpectrumConfig())


class TestEnvelopeSpectrum:
    def test_harmonic_peaks_dominate_for_strong_impulses(self):
        sig, _ = simulate_signal(10.0, FS, DistributionSpec.constant(30),
                                 PulseParams(aci=3.0), seed=21)
        spec = envelope_spectrum(sig)
        # neighbourhood wider than the taper mainlobe (raw bin is 2 Hz)
        for k in (1, 2, 3):
            sel = (spec.freqs >= k * 30 - 10) & (spec.freqs <= k * 30 + 10)
            window = spec.amps[sel]
            freqs = spec.freqs[sel]
            assert window.max() >= 5 * np.median(window)
            assert abs(freqs[np.argmax(window)] - k * 30) <= 2 * spec.df

    def test_pure_noise_has_no_fault_peak(self):
        rng = np.random.default_rng(22)
        sig = Signal(rng.standard_normal(int(4 * FS)), FS)
        spec = envelope_spectrum(sig)
        sel = (spec.freqs >= 25) & (spec.freqs <= 35)
        band = (spec.freqs > 5) & (spec.freqs < 120)
        assert spec.amps[sel].max() < 5 * np.median(spec.amps[band])

    def test_amplitudes_nonnegative(self):
        sig, _ = simulate_signal(1.0, FS, DistributionSpec.constant(30),
                                 PulseParams(aci=2.0), seed=23)
        spec = envelope_spectrum(sig)
        assert np.all(spec.amps >= 0.0)

    def test_bandpass_stage_is_applied(self):
        # a strong out-of-band tone disappears once a band is configured
        t = np.arange(int(FS)) / FS
        carrier = np.cos(2 * np.pi * 2500.0 * t) * (1 + np.cos(2 * np.pi * 30.0 * t))
        low_tone = 50.0 * np.cos(2 * np.pi * 200.0 * t)
        sig = Signal(carrier + low_tone, FS)
        cfg = SpectrumConfig(bandpass=(1250.0, 3750.0))
        spec = envelope_spectrum(sig, cfg)
        sel_30 = np.argmin(np.abs(spec.freqs - 30.0))
        sel_200 = np.argmin(np.abs(spec.freqs - 200.0))
        assert spec.amps[sel_30] > 10 * spec.amps[sel_200]
