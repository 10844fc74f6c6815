"""Monte-Carlo calibration of variance thresholds.

For every (impulse amplitude, segment length) pair a batch of
constant-frequency signals is simulated and estimated; the unbiased sample
variance of the estimates becomes the decision threshold for that cell,
stored next to the batch's mean estimate and mean SNR.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map
from .envspec import SpectrumConfig, envelope_spectrum
from .errors import CalibrationError, EstimationError, ParameterError
from .faultfreq import EstimatorConfig, estimate_fault_frequency
from .sigmodel import (
    DEFAULT_FAULT_FREQ,
    DistributionSpec,
    PulseParams,
    SeedSpec,
    simulate_signal,
)

DEFAULT_ACI_GRID = (1.0, 1.5, 2.0, 2.5, 3.0)
DEFAULT_SEG_GRID = (0.5, 1.0, 2.0, 5.0, 10.0)
DEFAULT_N_SIGNALS = 1000
MAX_FAILURE_FRAC = 0.01


def config_digest(spec_cfg: SpectrumConfig, est_cfg: EstimatorConfig) -> str:
    """Digest of the analysis settings a threshold table depends on.

    Covers the spectral estimator shape and the peak-search geometry.  The
    bandpass band, the sample rate and the theoretical frequency are
    excluded on purpose: the envelope grid spacing depends only on the
    piece duration and zero padding, and variance rescaling maps any real
    fault frequency onto the simulated 30 Hz scale.
    """
    payload = {
        "window": spec_cfg.window,
        "zero_pad_factor": spec_cfg.zero_pad_factor,
        "piece_len_s": spec_cfg.piece_len_s,
        "welch_segments": spec_cfg.welch_segments,
        "welch_overlap": spec_cfg.welch_overlap,
        "n_harmonics": est_cfg.n_harmonics,
        "search_frac": est_cfg.search_frac,
        "peak_excl_bins": est_cfg.peak_excl_bins,
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class ThresholdEntry:
    """Calibration result for one (aci, segment length) cell."""

    aci: float
    seg_len: float
    threshold: float
    mean_f_hat: float
    mean_snr: float
    n_signals: int
    master_seed: int
    config_digest: str


@dataclass(frozen=True)
class ThresholdTable:
    """Threshold entries plus the generation metadata they depend on."""

    fs: float
    f_simul: float
    n_signals: int
    master_seed: int
    noise_std: float
    pulse_base: PulseParams
    config_digest: str
    entries: tuple[ThresholdEntry, ...]

    def __post_init__(self):
        keys = [(e.aci, e.seg_len) for e in self.entries]
        if len(set(keys)) != len(keys):
            raise ParameterError("threshold table has duplicate (aci, seg_len) keys")
        for e in self.entries:
            if e.config_digest != self.config_digest:
                raise ParameterError("table entries carry mixed config digests")

    def get(self, aci: float, seg_len: float) -> ThresholdEntry:
        for e in self.entries:
            if abs(e.aci - aci) < 1e-9 and abs(e.seg_len - seg_len) < 1e-9:
                return e
        raise KeyError(f"no threshold entry for aci={aci}, seg_len={seg_len}")

    def entries_at(self, seg_len: float) -> list[ThresholdEntry]:
        return [e for e in self.entries if abs(e.seg_len - seg_len) < 1e-9]

    def aci_values(self) -> list[float]:
        return sorted({e.aci for e in self.entries})

    def seg_lengths(self) -> list[float]:
        return sorted({e.seg_len for e in self.entries})

    def to_json_dict(self) -> dict:
        return {
            "meta": {
                "fs": self.fs,
                "f_simul": self.f_simul,
                "n": self.n_signals,
                "seed": self.master_seed,
                "noise_std": self.noise_std,
                "pulse": {
                    "fc": self.pulse_base.fc,
                    "bw_lo": self.pulse_base.bw_lo,
                    "bw_hi": self.pulse_base.bw_hi,
                    "bwr": self.pulse_base.bwr,
                },
                "config_digest": self.config_digest,
            },
            "entries": [
                {
                    "aci": e.aci,
                    "seg_len_s": e.seg_len,
                    "threshold": e.threshold,
                    "mean_f_hat": e.mean_f_hat,
                    "mean_snr": e.mean_snr,
                    "n_signals": e.n_signals,
                    "master_seed": e.master_seed,
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ThresholdTable":
        meta = data["meta"]
        digest = meta["config_digest"]
        pulse = PulseParams(
            aci=1.0,
            fc=meta["pulse"]["fc"],
            bw_lo=meta["pulse"]["bw_lo"],
            bw_hi=meta["pulse"]["bw_hi"],
            bwr=meta["pulse"]["bwr"],
        )
        entries = tuple(
            ThresholdEntry(
                aci=e["aci"],
                seg_len=e["seg_len_s"],
                threshold=e["threshold"],
                mean_f_hat=e["mean_f_hat"],
                mean_snr=e["mean_snr"],
                n_signals=e["n_signals"],
                master_seed=e["master_seed"],
                config_digest=digest,
            )
            for e in data["entries"]
        )
        return cls(
            fs=meta["fs"],
            f_simul=meta["f_simul"],
            n_signals=meta["n"],
            master_seed=meta["seed"],
            noise_std=meta.get("noise_std", 1.0),
            pulse_base=pulse,
            config_digest=digest,
            entries=entries,
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ThresholdTable":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))

    def to_csv_matrix(self) -> str:
        """Threshold matrix with ACI rows and segment-length columns."""
        segs = self.seg_lengths()
        lines = ["aci," + ",".join(f"{s:g}s" for s in segs)]
        for aci in self.aci_values():
            cells = [f"{self.get(aci, s).threshold:.6g}" for s in segs]
            lines.append(f"{aci:g}," + ",".join(cells))
        return "\n".join(lines) + "\n"


def _estimate_task(args):
    """Simulate one constant-frequency signal and estimate it (worker-safe)."""
    (entry_seed, index, seg_len, fs, f_simul, pulse, spec_cfg, est_cfg, noise_std) = args
    seq = SeedSpec(entry_seed).sequence(index)
    signal, _ = simulate_signal(
        seg_len, fs, DistributionSpec.constant(f_simul), pulse, seq, noise_std
    )
    try:
        est = estimate_fault_frequency(envelope_spectrum(signal, spec_cfg), est_cfg)
    except EstimationError:
        return None
    return est.f_hat, est.snr


def calibrate_entry(
    aci: float,
    seg_len: float,
    n: int,
    fs: float,
    master_seed: int,
    spec_cfg: SpectrumConfig | None = None,
    est_cfg: EstimatorConfig | None = None,
    pulse: PulseParams | None = None,
    f_simul: float = DEFAULT_FAULT_FREQ,
    noise_std: float = 1.0,
) -> ThresholdEntry:
    """Calibrate one cell from ``n`` constant-frequency simulations.

    The threshold is the unbiased sample variance of the estimates.  Failed
    estimates are excluded up to 1% of the batch; beyond that the
    calibration aborts, since silent exclusion at scale would bias the
    variance.
    """
    if n < 2:
        raise ParameterError("calibration needs at least 2 signals per cell")
    spec_cfg = spec_cfg or SpectrumConfig()
    est_cfg = est_cfg or EstimatorConfig(f_theoretical=f_simul)
    pulse = pulse or PulseParams(aci=aci)
    if abs(pulse.aci - aci) > 1e-12:
        pulse = PulseParams(aci=aci, fc=pulse.fc, bw_lo=pulse.bw_lo, bw_hi=pulse.bw_hi, bwr=pulse.bwr)

    tasks = [
        (master_seed, i, seg_len, fs, f_simul, pulse, spec_cfg, est_cfg, noise_std)
        for i in range(n)
    ]
    results = parallel_map(_estimate_task, tasks)
    good = [r for r in results if r is not None]
    failures = n - len(good)
    if failures > MAX_FAILURE_FRAC * n:
        raise CalibrationError(
            f"{failures}/{n} estimates failed at aci={aci}, seg_len={seg_len}"
        )
    f_hats = np.array([g[0] for g in good])
    snrs = np.array([g[1] for g in good])
    return ThresholdEntry(
        aci=float(aci),
        seg_len=float(seg_len),
        threshold=float(np.var(f_hats, ddof=1)),
        mean_f_hat=float(f_hats.mean()),
        mean_snr=float(snrs.mean()),
        n_signals=len(good),
        master_seed=int(master_seed),
        config_digest=config_digest(spec_cfg, est_cfg),
    )


def _column_seed(master_seed: int, seg_index: int) -> int:
    state = np.random.SeedSequence([int(master_seed), int(seg_index)]).generate_state(1, np.uint64)
    return int(state[0])


def build_table(
    aci_list=DEFAULT_ACI_GRID,
    seg_len_list=DEFAULT_SEG_GRID,
    n: int = DEFAULT_N_SIGNALS,
    fs: float = 25_000.0,
    master_seed: int = 0,
    spec_cfg: SpectrumConfig | None = None,
    est_cfg: EstimatorConfig | None = None,
    pulse: PulseParams | None = None,
    f_simul: float = DEFAULT_FAULT_FREQ,
    noise_std: float = 1.0,
) -> ThresholdTable:
    """Calibrate the full ACI x segment-length grid.

    Per-signal seeds derive from (master_seed, segment-length index, signal
    index) and are shared across the ACI rows of a column: the rows see the
    same noise draws, which makes the monotone ordering of thresholds and
    SNRs along the ACI axis directly estimable instead of being buried in
    Monte-Carlo noise.  Results are reproducible and independent of worker
    scheduling.
    """
    aci_list = list(aci_list)
    seg_len_list = list(seg_len_list)
    if not aci_list or not seg_len_list:
        raise ParameterError("calibration grids must be non-empty")
    spec_cfg = spec_cfg or SpectrumConfig()
    est_cfg = est_cfg or EstimatorConfig(f_theoretical=f_simul)
    base = pulse or PulseParams(aci=1.0)

    entries = []
    for seg_idx, seg_len in enumerate(seg_len_list):
        col_seed = _column_seed(master_seed, seg_idx)
        for aci in aci_list:
            cell_pulse = PulseParams(
                aci=aci, fc=base.fc, bw_lo=base.bw_lo, bw_hi=base.bw_hi, bwr=base.bwr
            )
            entries.append(
                calibrate_entry(
                    aci,
                    seg_len,
                    n,
                    fs,
                    col_seed,
                    spec_cfg=spec_cfg,
                    est_cfg=est_cfg,
                    pulse=cell_pulse,
                    f_simul=f_simul,
                    noise_std=noise_std,
                )
            )
    return ThresholdTable(
        fs=float(fs),
        f_simul=float(f_simul),
        n_signals=int(n),
        master_seed=int(master_seed),
        noise_std=float(noise_std),
        pulse_base=base,
        config_digest=config_digest(spec_cfg, est_cfg),
        entries=tuple(entries),
    )
