"""Harmonic peak search, frequency estimation and SNR tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from envdiag import (
    DistributionSpec,
    EstimationError,
    EstimatorConfig,
    ParameterError,
    PulseParams,
    Signal,
    SpectrumConfig,
    detect_harmonic_peak,
    envelope_spectrum,
    estimate_fault_frequency,
    estimate_per_segment,
    simulate_signal,
    snr,
)
from envdiag.envspec import EnvelopeSpectrum

FS = 25_000.0


class TestDetectHarmonicPeak:
    def test_recovers_single_spike(self, make_spectrum):
        spec = make_spectrum({30.0: 5.0})
        peak = detect_harmonic_peak(spec, 30.0, k=1)
        assert peak.freq == 30.0
        assert peak.amp == 5.0
        assert peak.order == 1

    def test_flat_spectrum_ties_toward_theoretical(self, make_spectrum):
        spec = make_spectrum({}, floor=1.0)
        peak = detect_harmonic_peak(spec, 30.0, k=1)
        assert peak.freq == 30.0

    def test_tie_break_is_symmetric(self, make_spectrum):
        # theoretical frequency off the grid: closest bin wins
        spec = make_spectrum({}, df=0.5, floor=1.0)
        peak = detect_harmonic_peak(spec, 30.2, k=1)
        assert peak.freq == 30.0

    def test_second_harmonic_window(self, make_spectrum):
        spec = make_spectrum({60.5: 3.0, 30.0: 1.0})
        peak = detect_harmonic_peak(spec, 30.0, k=2)
        assert peak.freq == 60.5
        assert peak.order == 2

    def test_window_outside_spectrum_rejected(self, make_spectrum):
        spec = make_spectrum({}, f_max=50.0, floor=1.0)
        with pytest.raises(EstimationError, match="harmonic 3"):
            detect_harmonic_peak(spec, 30.0, k=3)

    def test_synthetic_signal_second_harmonic(self):
        sig, _ = simulate_signal(10.0, FS, DistributionSpec.constant(30),
                                 PulseParams(aci=3.0), seed=31)
        spec = envelope_spectrum(sig)
        peak = detect_harmonic_peak(spec, 30.0, k=2)
        assert abs(peak.freq - 60.0) <= spec.df


class TestEstimateFaultFrequency:
    def test_exact_harmonics_average_exactly(self, make_spectrum):
        spec = make_spectrum({30.0: 5.0, 60.0: 4.0, 90.0: 3.0}, floor=0.1)
        est = estimate_fault_frequency(spec, EstimatorConfig(f_theoretical=30.0))
        assert est.f_hat == 30.0

    def test_detuned_second_harmonic_arithmetic(self, make_spectrum):
        spec = make_spectrum({30.0: 5.0, 60.5: 4.0, 90.0: 3.0}, floor=0.1)
        est = estimate_fault_frequency(spec, EstimatorConfig(f_theoretical=30.0))
        assert est.f_hat == pytest.approx((30.0 + 30.25 + 30.0) / 3, abs=1e-12)

    def test_single_harmonic_equals_fundamental(self, make_spectrum):
        spec = make_spectrum({30.5: 5.0}, floor=0.1)
        cfg = EstimatorConfig(f_theoretical=30.0, n_harmonics=1)
        est = estimate_fault_frequency(spec, cfg)
        assert est.f_hat == 30.5
        assert len(est.peaks) == 1

    def test_error_names_failing_order(self, make_spectrum):
        spec = make_spectrum({}, f_max=70.0, floor=1.0)
        with pytest.raises(EstimationError, match="harmonic 3"):
            estimate_fault_frequency(spec, EstimatorConfig(f_theoretical=30.0))

    def test_peaks_stay_inside_their_windows(self):
        sig, _ = simulate_signal(2.0, FS, DistributionSpec.uniform(29, 31),
                                 PulseParams(aci=2.0), seed=37)
        cfg = EstimatorConfig(f_theoretical=30.0)
        est = estimate_fault_frequency(envelope_spectrum(sig), cfg)
        for peak in est.peaks:
            target = peak.order * 30.0
            assert target * (1 - cfg.search_frac) <= peak.freq <= target * (1 + cfg.search_frac)

    @settings(max_examples=20, deadline=None)
    @given(scale=st.floats(min_value=1e-6, max_value=1e6))
    def test_amplitude_scaling_invariance(self, scale):
        freqs = np.arange(0, 401) * 0.5
        rng = np.random.default_rng(41)
        amps = rng.random(freqs.size) + 0.01
        cfg = EstimatorConfig(f_theoretical=30.0)
        base = estimate_fault_frequency(EnvelopeSpectrum(freqs, amps, 0.5), cfg)
        scaled = estimate_fault_frequency(EnvelopeSpectrum(freqs, scale * amps, 0.5), cfg)
        assert scaled.f_hat == base.f_hat
        assert scaled.snr == pytest.approx(base.snr, rel=1e-9)

    def test_noiseless_estimate_within_one_bin(self):
        sig, _ = simulate_signal(5.0, FS, DistributionSpec.constant(30),
                                 PulseParams(aci=3.0), seed=43, noise_std=0.0)
        spec = envelope_spectrum(sig)
        est = estimate_fault_frequency(spec, EstimatorConfig(f_theoretical=30.0))
        assert abs(est.f_hat - 30.0) <= spec.df


class TestSnr:
    def test_flat_noise_with_equal_peaks(self, make_spectrum):
        spec = make_spectrum({30.0: 2.0, 60.0: 2.0, 90.0: 2.0}, floor=1.0)
        cfg = EstimatorConfig(f_theoretical=30.0)
        peaks = [detect_harmonic_peak(spec, 30.0, k) for k in (1, 2, 3)]
        assert snr(spec, peaks, cfg) == pytest.approx(4.0)

    def test_all_equal_amplitudes_give_unity(self, make_spectrum):
        spec = make_spectrum({}, floor=1.0)
        cfg = EstimatorConfig(f_theoretical=30.0)
        peaks = [detect_harmonic_peak(spec, 30.0, k) for k in (1, 2, 3)]
        assert snr(spec, peaks, cfg) == pytest.approx(1.0)

    def test_snr_grows_with_impulse_amplitude(self):
        # batch means must order by ACI; small batch keeps it cheap
        cfg = EstimatorConfig(f_theoretical=30.0)
        means = []
        for aci in (1.0, 3.0):
            vals = []
            for i in range(20):
                sig, _ = simulate_signal(0.5, FS, DistributionSpec.constant(30),
                                         PulseParams(aci=aci), seed=(47, i))
                est = estimate_fault_frequency(envelope_spectrum(sig), cfg)
                vals.append(est.snr)
            means.append(np.mean(vals))
        assert means[1] > means[0]

    def test_needs_at_least_one_peak(self, make_spectrum):
        spec = make_spectrum({}, floor=1.0)
        with pytest.raises(ParameterError):
            snr(spec, [], EstimatorConfig(f_theoretical=30.0))


class TestEstimatePerSegment:
    def test_segment_count(self):
        sig = Signal(np.random.default_rng(0).standard_normal(int(6 * FS)), FS)
        sig = Signal(sig.samples + _impulse_train(6.0), FS)
        ests = estimate_per_segment(sig, 0.5, SpectrumConfig(),
                                    EstimatorConfig(f_theoretical=30.0))
        assert len(ests) == 12

    def test_trailing_remainder_dropped(self):
        sig = Signal(_impulse_train(2.3), FS)
        ests = estimate_per_segment(sig, 1.0, SpectrumConfig(),
                                    EstimatorConfig(f_theoretical=30.0))
        assert len(ests) == 2

    def test_constant_signal_gives_identical_estimates(self):
        sig = Signal(_impulse_train(4.0), FS)
        ests = estimate_per_segment(sig, 1.0, SpectrumConfig(),
                                    EstimatorConfig(f_theoretical=30.0))
        f_hats = {e.f_hat for e in ests}
        assert len(f_hats) == 1

    def test_signal_shorter_than_segment_rejected(self):
        sig = Signal(np.ones(int(0.25 * FS)), FS)
        with pytest.raises(EstimationError):
            estimate_per_segment(sig, 1.0, SpectrumConfig(),
                                 EstimatorConfig(f_theoretical=30.0))


def _impulse_train(duration, f=30.0, aci=3.0):
    sig, _ = simulate_signal(duration, FS, DistributionSpec.constant(f),
                             PulseParams(aci=aci), seed=53, noise_std=0.0)
    return sig.samples


class TestEstimatorConfig:
    @pytest.mark.parametrize("kwargs", [
        {"f_theoretical": -1.0},
        {"f_theoretical": 30.0, "n_harmonics": 0},
        {"f_theoretical": 30.0, "search_frac": 0.0},
        {"f_theoretical": 30.0, "search_frac": 0.25},  # windows would overlap
        {"f_theoretical": 30.0, "peak_excl_bins": -1},
    ])
    def test_invalid_config(self, kwargs):
        with pytest.raises(ParameterError):
            EstimatorConfig(**kwargs)
