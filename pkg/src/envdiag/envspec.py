"""Envelope spectrum pipeline: bandpass, Hilbert demodulation, Welch PSD."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import ParameterError
from .sigmodel import Signal

# Raised-cosine transition of the FFT bandpass mask, in units of the
# signal's own bin width fs/len(x).
BANDPASS_TRANSITION_BINS = 8


@dataclass(frozen=True)
class SpectrumConfig:
    """Envelope-spectrum settings.

    The PSD is averaged over Hann-tapered pieces of fixed duration
    ``piece_len_s`` (clipped to the segment length), zero padded by
    ``zero_pad_factor``.  A fixed piece duration keeps the frequency grid
    and the per-piece detectability identical across segment lengths, so
    calibrated thresholds remain comparable between 0.5 s and 10 s
    segments.  Setting ``piece_len_s=None`` falls back to splitting the
    segment into ``welch_segments`` pieces.
    """

    bandpass: tuple[float, float] | None = None
    window: str = "hann"
    zero_pad_factor: int = 4
    piece_len_s: float | None = 0.5
    welch_segments: int = 1
    welch_overlap: float = 0.0

    def __post_init__(self):
        if self.bandpass is not None:
            lo, hi = self.bandpass
            if not 0 <= lo < hi:
                raise ParameterError("bandpass needs 0 <= f_lo < f_hi")
            object.__setattr__(self, "bandpass", (float(lo), float(hi)))
        if int(self.zero_pad_factor) != self.zero_pad_factor or self.zero_pad_factor < 1:
            raise ParameterError("zero_pad_factor must be an integer >= 1")
        if self.piece_len_s is not None and not self.piece_len_s > 0:
            raise ParameterError("piece_len_s must be positive")
        if int(self.welch_segments) != self.welch_segments or self.welch_segments < 1:
            raise ParameterError("welch_segments must be an integer >= 1")
        if not 0 <= self.welch_overlap < 1:
            raise ParameterError("welch_overlap must lie in [0, 1)")


@dataclass(frozen=True)
class EnvelopeSpectrum:
    """One-sided PSD of a (demodulated) signal on a uniform frequency grid."""

    freqs: np.ndarray
    amps: np.ndarray
    df: float

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.float64)
        amps = np.asarray(self.amps, dtype=np.float64)
        if freqs.ndim != 1 or freqs.shape != amps.shape or freqs.size < 2:
            raise ParameterError("freqs and amps must be matching 1-D vectors")
        if not np.all(np.isfinite(amps)) or np.any(amps < 0):
            raise ParameterError("spectrum amplitudes must be finite and non-negative")
        if not self.df > 0:
            raise ParameterError("df must be positive")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "df", float(self.df))

    def __len__(self) -> int:
        return self.freqs.size


def bandpass(x: Signal, f_lo: float, f_hi: float) -> Signal:
    """Zero-phase FFT bandpass with a raised-cosine transition.

    Bins outside [f_lo, f_hi] are masked to zero; each band edge is softened
    by a half-cosine ramp spanning 8 signal bins to avoid ringing.  Edges at
    0 or fs/2 are left open, so ``bandpass(x, 0, fs/2)`` is the identity.
    """
    fs = x.fs
    if not 0 <= f_lo < f_hi <= fs / 2 + 1e-12:
        raise ParameterError(
            f"band [{f_lo:g}, {f_hi:g}] Hz must satisfy 0 <= f_lo < f_hi <= fs/2"
        )
    n = len(x)
    spec = np.fft.rfft(x.samples)
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    width = BANDPASS_TRANSITION_BINS * fs / n
    mask = np.ones_like(freqs)
    if f_lo > 0:
        a, b = f_lo - width / 2, f_lo + width / 2
        mask[freqs < a] = 0.0
        ramp = (freqs >= a) & (freqs < b)
        mask[ramp] = 0.5 * (1.0 - np.cos(np.pi * (freqs[ramp] - a) / width))
    if f_hi < fs / 2:
        a, b = f_hi - width / 2, f_hi + width / 2
        mask[freqs > b] = 0.0
        ramp = (freqs > a) & (freqs <= b)
        mask[ramp] = 0.5 * (1.0 + np.cos(np.pi * (freqs[ramp] - a) / width))
    filtered = np.fft.irfft(spec * mask, n=n)
    return Signal(filtered, fs)


def analytic_signal(x) -> np.ndarray:
    """Analytic signal ``x + j H{x}`` via the frequency-domain method.

    Negative frequencies are zeroed, positive ones doubled, DC and Nyquist
    kept; the real part of the result equals the input exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ParameterError("analytic signal needs a 1-D input of length >= 2")
    n = x.size
    spec = np.fft.fft(x)
    gain = np.zeros(n)
    gain[0] = 1.0
    if n % 2 == 0:
        gain[n // 2] = 1.0
        gain[1 : n // 2] = 2.0
    else:
        gain[1 : (n + 1) // 2] = 2.0
    hilbert_part = np.fft.ifft(spec * gain).imag
    return x + 1j * hilbert_part


def envelope(x) -> np.ndarray:
    """Magnitude of the analytic signal, ``sqrt(x^2 + H{x}^2)``."""
    return np.abs(analytic_signal(x))


def _piece_length(n: int, fs: float, cfg: SpectrumConfig) -> int:
    if cfg.piece_len_s is not None:
        return min(int(round(cfg.piece_len_s * fs)), n)
    if cfg.welch_segments == 1:
        return n
    denom = 1.0 + (cfg.welch_segments - 1) * (1.0 - cfg.welch_overlap)
    return int(n / denom)


def welch_psd(x, fs: float, cfg: SpectrumConfig = SpectrumConfig()) -> EnvelopeSpectrum:
    """One-sided Welch PSD with zero-padded pieces.

    The grid spacing is exactly ``fs / (piece_len * zero_pad_factor)``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ParameterError("welch_psd expects a 1-D vector")
    piece = _piece_length(x.size, fs, cfg)
    if piece < 8:
        raise ParameterError(
            f"input of {x.size} samples is too short for the requested segmentation"
        )
    noverlap = int(piece * cfg.welch_overlap) if x.size > piece else 0
    nfft = piece * cfg.zero_pad_factor
    window = sps.get_window(cfg.window, piece)
    freqs, psd = sps.welch(
        x,
        fs=fs,
        window=window,
        nperseg=piece,
        noverlap=noverlap,
        nfft=nfft,
        detrend="constant",
        return_onesided=True,
        scaling="density",
    )
    # tiny negative values can appear from rounding; PSD is non-negative
    np.maximum(psd, 0.0, out=psd)
    return EnvelopeSpectrum(freqs, psd, fs / nfft)


def envelope_spectrum(x: Signal, cfg: SpectrumConfig = SpectrumConfig()) -> EnvelopeSpectrum:
    """Full pipeline: optional bandpass, envelope, mean removal, Welch PSD.

    The envelope mean (a large DC term) is subtracted before the PSD so it
    cannot leak into the low-frequency bins searched for fault harmonics.
    """
    if cfg.bandpass is not None:
        x = bandpass(x, cfg.bandpass[0], cfg.bandpass[1])
    env = envelope(x.samples)
    env -= env.mean()
    return welch_psd(env, x.fs, cfg)
