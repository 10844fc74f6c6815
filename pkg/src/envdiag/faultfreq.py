"""Fault-frequency estimation from envelope spectra.

The estimator searches a window around each expected harmonic for the
amplitude maximum, normalizes every detected peak by its harmonic order
and averages the results.  A spectral signal-to-noise ratio accompanies
every estimate: mean squared peak amplitude over mean squared amplitude of
the surrounding spectrum up to the third harmonic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envspec import EnvelopeSpectrum, SpectrumConfig, envelope_spectrum
from .errors import EstimationError, ParameterError
from .sigmodel import Signal


@dataclass(frozen=True)
class EstimatorConfig:
    """Peak-search settings around a theoretical fault frequency."""

    f_theoretical: float
    n_harmonics: int = 3
    search_frac: float = 0.18
    peak_excl_bins: int = 2

    def __post_init__(self):
        if not self.f_theoretical > 0:
            raise ParameterError("f_theoretical must be positive")
        if int(self.n_harmonics) != self.n_harmonics or self.n_harmonics < 1:
            raise ParameterError("n_harmonics must be an integer >= 1")
        if not 0 < self.search_frac < 0.5:
            raise ParameterError("search_frac must lie in (0, 0.5)")
        # adjacent harmonic windows k and k+1 stay disjoint up to n_harmonics
        limit = 1.0 / (2.0 * max(self.n_harmonics - 1, 1) + 1.0)
        if self.n_harmonics > 1 and self.search_frac >= limit:
            raise ParameterError(
                f"search_frac {self.search_frac} makes harmonic windows overlap; "
                f"need < {limit:g} for {self.n_harmonics} harmonics"
            )
        if int(self.peak_excl_bins) != self.peak_excl_bins or self.peak_excl_bins < 0:
            raise ParameterError("peak_excl_bins must be a non-negative integer")


@dataclass(frozen=True)
class HarmonicPeak:
    """Location of the amplitude maximum near one harmonic order."""

    order: int
    freq: float
    amp: float
    bin: int


@dataclass(frozen=True)
class FaultFrequencyEstimate:
    """Order-normalized average of the detected harmonic peaks."""

    f_hat: float
    peaks: tuple[HarmonicPeak, ...]
    snr: float


def detect_harmonic_peak(
    spec: EnvelopeSpectrum,
    f_theoretical: float,
    k: int = 1,
    search_frac: float = 0.18,
) -> HarmonicPeak:
    """Find the amplitude maximum near the k-th harmonic.

    The search window is ``k * f_theoretical * (1 +- search_frac)``.  Exact
    amplitude ties resolve toward the bin closest to the expected harmonic
    location (and to the lower frequency if still tied).
    """
    if k < 1:
        raise ParameterError("harmonic order must be >= 1")
    target = k * f_theoretical
    lo = target * (1.0 - search_frac)
    hi = target * (1.0 + search_frac)
    i0 = int(np.searchsorted(spec.freqs, lo, side="left"))
    i1 = int(np.searchsorted(spec.freqs, hi, side="right")) - 1
    if i1 >= len(spec):
        raise EstimationError(
            f"harmonic {k}: window [{lo:g}, {hi:g}] Hz exceeds the spectrum range"
        )
    if i1 - i0 + 1 < 3:
        raise EstimationError(
            f"harmonic {k}: window [{lo:g}, {hi:g}] Hz covers fewer than 3 bins"
        )
    window = spec.amps[i0 : i1 + 1]
    peak_val = window.max()
    candidates = i0 + np.flatnonzero(window == peak_val)
    best = candidates[np.argmin(np.abs(spec.freqs[candidates] - target))]
    return HarmonicPeak(order=k, freq=float(spec.freqs[best]), amp=float(peak_val), bin=int(best))


def snr(
    spec: EnvelopeSpectrum,
    peaks: list[HarmonicPeak] | tuple[HarmonicPeak, ...],
    cfg: EstimatorConfig,
) -> float:
    """Spectral SNR: mean squared peak amplitude over the non-peak mean.

    The noise set covers the band [0.5 f_hat, 3.5 f_hat] minus
    ``peak_excl_bins`` bins on each side of every detected peak; the lower
    cut keeps residual DC leakage out of the average.
    """
    if not peaks:
        raise ParameterError("snr needs at least one detected peak")
    f_hat = float(np.mean([p.freq / p.order for p in peaks]))
    lo, hi = 0.5 * f_hat, 3.5 * f_hat
    i0 = int(np.searchsorted(spec.freqs, lo, side="left"))
    i1 = int(np.searchsorted(spec.freqs, hi, side="right")) - 1
    keep = np.ones(i1 - i0 + 1, dtype=bool)
    for p in peaks:
        a = max(i0, p.bin - cfg.peak_excl_bins)
        b = min(i1, p.bin + cfg.peak_excl_bins)
        if b >= a:
            keep[a - i0 : b - i0 + 1] = False
    noise = spec.amps[i0 : i1 + 1][keep]
    if noise.size == 0:
        raise EstimationError("no noise bins remain after excluding the peaks")
    numerator = float(np.mean([p.amp**2 for p in peaks]))
    denominator = float(np.mean(noise**2))
    if denominator == 0.0:
        raise EstimationError("noise bins are identically zero; SNR undefined")
    return numerator / denominator


def estimate_fault_frequency(
    spec: EnvelopeSpectrum, cfg: EstimatorConfig
) -> FaultFrequencyEstimate:
    """Estimate the fault frequency from ``cfg.n_harmonics`` harmonic peaks."""
    peaks = tuple(
        detect_harmonic_peak(spec, cfg.f_theoretical, k, cfg.search_frac)
        for k in range(1, cfg.n_harmonics + 1)
    )
    f_hat = float(np.mean([p.freq / p.order for p in peaks]))
    return FaultFrequencyEstimate(f_hat=f_hat, peaks=peaks, snr=snr(spec, peaks, cfg))


def segment_samples(x: Signal, seg_len: float) -> int:
    """Samples per segment; raises if the signal holds less than one."""
    if not seg_len > 0:
        raise ParameterError("segment length must be positive")
    n_seg = int(round(seg_len * x.fs))
    if n_seg < 2:
        raise ParameterError(f"segment of {seg_len:g} s holds fewer than 2 samples")
    if n_seg > len(x):
        raise EstimationError(
            f"signal of {x.duration:g} s is shorter than one {seg_len:g} s segment"
        )
    return n_seg


def iter_segments(x: Signal, seg_len: float):
    """Yield consecutive non-overlapping segments; the remainder is dropped."""
    n_seg = segment_samples(x, seg_len)
    for start in range(0, len(x) - n_seg + 1, n_seg):
        yield Signal(x.samples[start : start + n_seg], x.fs)


def estimate_per_segment(
    x: Signal,
    seg_len: float,
    spec_cfg: SpectrumConfig,
    est_cfg: EstimatorConfig,
) -> list[FaultFrequencyEstimate]:
    """One fault-frequency estimate per non-overlapping segment, in time order."""
    return [
        estimate_fault_frequency(envelope_spectrum(seg, spec_cfg), est_cfg)
        for seg in iter_segments(x, seg_len)
    ]
