"""Signal and result file I/O.

Signals travel either as CSV (one float per line) or as raw little-endian
64-bit floats; both carry a JSON sidecar (``<file>.json``) recording the
sample rate and, for simulated data, the generation parameters and the
ground-truth frequency of every segment.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .envspec import EnvelopeSpectrum
from .errors import ParameterError, SignalFormatError
from .faultfreq import FaultFrequencyEstimate
from .sigmodel import Signal
from .stats import KdeCurve, normal_pdf, uniform_pdf

FORMAT_CSV = "csv"
FORMAT_RAW = "raw-f64le"
FORMATS = (FORMAT_CSV, FORMAT_RAW)


def sidecar_path(path: str) -> str:
    return str(path) + ".json"


def infer_format(path: str) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".csv", ".txt"):
        return FORMAT_CSV
    return FORMAT_RAW


def write_signal(path, signal: Signal, fmt: str | None = None, sidecar: dict | None = None) -> None:
    """Write samples plus a JSON sidecar with at least the sample rate."""
    fmt = fmt or infer_format(path)
    if fmt == FORMAT_CSV:
        # 17 significant digits round-trip any float64
        with open(path, "w", encoding="ascii") as fh:
            fh.writelines(f"{float(v):.17g}\n" for v in signal.samples)
    elif fmt == FORMAT_RAW:
        signal.samples.astype("<f8").tofile(path)
    else:
        raise ParameterError(f"unknown signal format {fmt!r}")
    meta = {"fs": signal.fs, "n": len(signal), "format": fmt}
    if sidecar:
        meta.update(sidecar)
    with open(sidecar_path(path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_csv_samples(path) -> np.ndarray:
    values = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise SignalFormatError(
                    f"{path}: line {lineno} is not a number: {text!r}"
                ) from None
    if not values:
        raise SignalFormatError(f"{path}: no samples found")
    return np.asarray(values)


def read_signal(path, fmt: str | None = None, fs: float | None = None) -> tuple[Signal, dict]:
    """Read a signal file; the sample rate comes from the sidecar unless given.

    Returns the signal and the sidecar dictionary (empty when absent).  An
    explicit ``fs`` overrides the sidecar value; the caller is expected to
    warn the user about the override.
    """
    fmt = fmt or infer_format(path)
    meta: dict = {}
    sc = sidecar_path(path)
    if os.path.exists(sc):
        with open(sc, encoding="utf-8") as fh:
            try:
                meta = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SignalFormatError(f"{sc}: malformed sidecar: {exc}") from None
    if fs is None:
        fs = meta.get("fs")
    if fs is None:
        raise SignalFormatError(f"{path}: sample rate unknown; pass fs or provide a sidecar")
    if fmt == FORMAT_CSV:
        samples = _read_csv_samples(path)
    elif fmt == FORMAT_RAW:
        samples = np.fromfile(path, dtype="<f8")
        if samples.size == 0:
            raise SignalFormatError(f"{path}: empty raw signal file")
    else:
        raise ParameterError(f"unknown signal format {fmt!r}")
    return Signal(samples, float(fs)), meta


def write_spectrum_csv(path, spec: EnvelopeSpectrum) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("freq_hz,amplitude\n")
        for f, a in zip(spec.freqs, spec.amps):
            fh.write(f"{f:.10g},{a:.10g}\n")


def write_estimates_csv(path, estimates: list[FaultFrequencyEstimate], seg_len: float) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("segment_index,t_start_s,f_hat_hz,snr,peak1_hz,peak2_hz,peak3_hz\n")
        for i, est in enumerate(estimates):
            peaks = {p.order: p.freq for p in est.peaks}
            cols = [
                str(i),
                f"{i * seg_len:.10g}",
                f"{est.f_hat:.10g}",
                f"{est.snr:.10g}",
            ] + [f"{peaks[k]:.10g}" if k in peaks else "" for k in (1, 2, 3)]
            fh.write(",".join(cols) + "\n")


def write_kde_csv(path, curve: KdeCurve, samples) -> None:
    """KDE curve plus fitted uniform/normal overlays for plotting."""
    samples = np.asarray(samples, dtype=np.float64)
    a, b = samples.min(), samples.max()
    mu, sd = samples.mean(), np.std(samples, ddof=1)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("grid,density,uniform_pdf,normal_pdf\n")
        for g, d in zip(curve.grid, curve.density):
            fh.write(
                f"{g:.10g},{d:.10g},{uniform_pdf(g, a, b):.10g},{normal_pdf(g, mu, sd):.10g}\n"
            )
