"""Synthetic vibration signals: Gaussian noise plus a train of cyclic impulses.

The test signal is ``x(t) = x1(t) + x2(t)`` where ``x1`` is white Gaussian
noise with zero mean and unit variance and ``x2`` is a train of
Gaussian-modulated tone bursts repeating at the fault frequency.  The fault
frequency is either a fixed value or drawn per signal from a uniform or
normal law, which is what the rest of the package tries to detect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SimulationError

DEFAULT_FS = 25_000.0
DEFAULT_FAULT_FREQ = 30.0

# Pulses are evaluated on +-PULSE_SUPPORT_SIGMAS standard deviations of the
# Gaussian envelope; beyond that the envelope is below exp(-8).
PULSE_SUPPORT_SIGMAS = 4.0


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled real-valued vibration record."""

    samples: np.ndarray
    fs: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ParameterError("signal samples must form a non-empty 1-D array")
        if not np.all(np.isfinite(samples)):
            raise ParameterError("signal contains non-finite samples")
        if not self.fs > 0:
            raise ParameterError(f"sample rate must be positive, got {self.fs}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "fs", float(self.fs))

    @property
    def duration(self) -> float:
        """Record length in seconds."""
        return self.samples.size / self.fs

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class DistributionSpec:
    """Fault-frequency law: ``constant`` f, ``uniform`` (a, b) or ``normal`` (mu, sigma)."""

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        kind = str(self.kind).lower()
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", params)
        if kind == "constant":
            if len(params) != 1 or not params[0] > 0:
                raise ParameterError("constant law needs a single frequency f > 0")
        elif kind == "uniform":
            if len(params) != 2 or not 0 < params[0] < params[1]:
                raise ParameterError("uniform law needs 0 < a < b")
        elif kind == "normal":
            if len(params) != 2 or not (params[0] > 0 and params[1] > 0):
                raise ParameterError("normal law needs mu > 0 and sigma > 0")
        else:
            raise ParameterError(f"unknown distribution kind {self.kind!r}")

    @classmethod
    def constant(cls, f: float) -> "DistributionSpec":
        return cls("constant", (f,))

    @classmethod
    def uniform(cls, a: float, b: float) -> "DistributionSpec":
        return cls("uniform", (a, b))

    @classmethod
    def normal(cls, mu: float, sigma: float) -> "DistributionSpec":
        return cls("normal", (mu, sigma))

    @classmethod
    def parse(cls, text: str) -> "DistributionSpec":
        """Parse ``constant:30``, ``uniform:29,31`` or ``normal:30,0.33``."""
        kind, sep, rest = text.partition(":")
        if not sep:
            raise ParameterError(f"malformed distribution spec {text!r}")
        try:
            params = tuple(float(tok) for tok in rest.split(","))
        except ValueError:
            raise ParameterError(f"malformed distribution parameters in {text!r}") from None
        return cls(kind.strip(), params)

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "uniform":
            return float(rng.uniform(self.params[0], self.params[1]))
        return float(self.params[0] + self.params[1] * rng.standard_normal())

    def mean(self) -> float:
        """Expected fault frequency under the law."""
        if self.kind == "uniform":
            return 0.5 * (self.params[0] + self.params[1])
        return self.params[0]

    def spec_string(self) -> str:
        return f"{self.kind}:{','.join(format(p, 'g') for p in self.params)}"


@dataclass(frozen=True)
class PulseParams:
    """Cyclic-impulse component parameters.

    ``aci`` scales the unit-peak Gaussian pulse; the carrier sits at ``fc``
    with a fractional bandwidth drawn per impulse from [bw_lo, bw_hi],
    referenced at ``bwr`` dB below the spectral peak.
    """

    aci: float
    fc: float = 2500.0
    bw_lo: float = 0.4
    bw_hi: float = 0.5
    bwr: float = -6.0

    def __post_init__(self):
        if not self.aci > 0:
            raise ParameterError("aci must be positive")
        if not self.fc > 0:
            raise ParameterError("carrier frequency must be positive")
        if not 0 < self.bw_lo <= self.bw_hi < 2:
            raise ParameterError("need 0 < bw_lo <= bw_hi < 2")
        if not self.bwr < 0:
            raise ParameterError("bwr must be negative (dB below peak)")

    def time_variance(self, bw: float) -> float:
        """Gaussian-envelope variance tv for a given fractional bandwidth."""
        ref = 10.0 ** (self.bwr / 20.0)
        return -2.0 * math.log(ref) / (math.pi * bw * self.fc) ** 2

    def max_half_support(self) -> float:
        # widest pulse comes from the smallest bandwidth
        return PULSE_SUPPORT_SIGMAS * math.sqrt(self.time_variance(self.bw_lo))


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic derivation of per-signal seeds from one master seed.

    Signal ``i`` of a batch is generated from
    ``numpy.random.SeedSequence([master_seed, i])``, so the same
    (master_seed, index) pair yields a bit-identical signal regardless of
    generation order or worker scheduling.
    """

    master_seed: int

    def __post_init__(self):
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise ParameterError("master seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "master_seed", seed)

    def sequence(self, index: int) -> np.random.SeedSequence:
        if index < 0:
            raise ParameterError("signal index must be non-negative")
        return np.random.SeedSequence([self.master_seed, int(index)])


def gaussian_pulse(t, fc: float, bw: float, bwr: float = -6.0) -> np.ndarray:
    """Unit-peak Gaussian-modulated cosine burst.

    ``g(t) = exp(-t^2 / (2 tv)) * cos(2 pi fc t)`` with ``tv`` chosen so the
    spectral envelope at ``fc * (1 +- bw/2)`` sits ``bwr`` dB below its peak:
    ``tv = -2 ln(10^(bwr/20)) / (pi bw fc)^2``.
    """
    if not fc > 0:
        raise ParameterError("fc must be positive")
    if not 0 < bw < 2:
        raise ParameterError("fractional bandwidth must lie in (0, 2)")
    if not bwr < 0:
        raise ParameterError("bwr must be negative")
    t = np.asarray(t, dtype=np.float64)
    ref = 10.0 ** (bwr / 20.0)
    tv = -2.0 * math.log(ref) / (math.pi * bw * fc) ** 2
    return np.exp(-t * t / (2.0 * tv)) * np.cos(2.0 * math.pi * fc * t)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def simulate_signal(
    duration: float,
    fs: float,
    dist: DistributionSpec,
    pulse: PulseParams,
    seed,
    noise_std: float = 1.0,
) -> tuple[Signal, float]:
    """Draw one fault frequency and synthesize the two-component signal.

    Parameters
    ----------
    duration : float
        Record length in seconds.
    fs : float
        Sample rate in Hz; must clear ``2 * fc * (1 + bw_hi / 2)``.
    dist : DistributionSpec
        Law the per-signal fault frequency is drawn from.
    pulse : PulseParams
        Impulse-train parameters.
    seed : int, SeedSequence or Generator
        Source of randomness; fixed seeds give bit-identical signals.
    noise_std : float
        Standard deviation of the additive noise (0 disables it; used by
        the noiseless test oracles).

    Returns
    -------
    (Signal, float)
        The synthesized record and the fault frequency actually used.

    Notes
    -----
    Draw order is fixed: fault frequency, noise vector, first-impulse
    offset ``t0 ~ U[0, 1/f)``, then one bandwidth per impulse in time
    order.  Impulse centres are ``t0 + k/f``; each pulse is added over
    +-4 envelope standard deviations.
    """
    if not duration > 0:
        raise ParameterError("duration must be positive")
    nyquist_needed = 2.0 * pulse.fc * (1.0 + pulse.bw_hi / 2.0)
    if not fs > nyquist_needed:
        raise ParameterError(
            f"fs={fs:g} Hz leaves no Nyquist margin; need fs > {nyquist_needed:g} Hz"
        )
    if noise_std < 0:
        raise ParameterError("noise_std must be non-negative")

    rng = _as_rng(seed)
    f_true = dist.sample(rng)
    if f_true <= 0:
        raise SimulationError(f"drawn fault frequency {f_true:g} Hz is not positive")
    if duration < 2.0 / f_true:
        raise SimulationError(
            f"duration {duration:g} s holds less than one full cycle of {f_true:g} Hz"
        )

    n = int(round(duration * fs))
    if noise_std > 0:
        x = noise_std * rng.standard_normal(n)
    else:
        x = np.zeros(n)

    period = 1.0 / f_true
    t0 = rng.uniform(0.0, period)
    tail = pulse.max_half_support()
    k_min = math.ceil((-tail - t0) * f_true)
    k_max = math.floor((duration + tail - t0) * f_true)
    for k in range(k_min, k_max + 1):
        centre = t0 + k * period
        # bandwidth is redrawn for every impulse, even off-grid ones, so the
        # stream layout does not depend on rounding
        bw = rng.uniform(pulse.bw_lo, pulse.bw_hi)
        half = PULSE_SUPPORT_SIGMAS * math.sqrt(pulse.time_variance(bw))
        i0 = max(0, math.ceil((centre - half) * fs))
        i1 = min(n - 1, math.floor((centre + half) * fs))
        if i1 < i0:
            continue
        t_rel = np.arange(i0, i1 + 1) / fs - centre
        x[i0 : i1 + 1] += pulse.aci * gaussian_pulse(t_rel, pulse.fc, bw, pulse.bwr)

    return Signal(x, fs), f_true


def simulate_batch(
    n: int,
    duration: float,
    fs: float,
    dist: DistributionSpec,
    pulse: PulseParams,
    master_seed: int,
    noise_std: float = 1.0,
) -> list[tuple[Signal, float]]:
    """Generate ``n`` independent signals with per-index derived seeds."""
    if n < 1:
        raise ParameterError("batch size must be at least 1")
    seeds = SeedSpec(master_seed)
    return [
        simulate_signal(duration, fs, dist, pulse, seeds.sequence(i), noise_std)
        for i in range(n)
    ]
