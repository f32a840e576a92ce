"""Source-filter test signals with known pitch and formants.

An ideal impulse train (glottal source) drives a cascade of two-pole
resonators (vocal tract). Every generator is deterministic given its
arguments and seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .dsp import SampleBuffer
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class VowelSpec:
    f0_hz: float
    formants_hz: tuple = (700.0, 1220.0, 2600.0)
    bandwidths_hz: tuple = (80.0, 90.0, 120.0)
    duration_s: float = 0.5
    gain: float = 0.8
    seed: int = 0

    def validate(self, fs_hz: float) -> None:
        if not 50.0 <= self.f0_hz <= 500.0:
            raise InvalidArgumentError(f"f0 must lie in [50, 500] Hz, got {self.f0_hz}")
        if not 1 <= len(self.formants_hz) <= 3:
            raise InvalidArgumentError("a vowel needs between one and three formants")
        if len(self.bandwidths_hz) != len(self.formants_hz):
            raise InvalidArgumentError("formants and bandwidths differ in length")
        if any(b <= a for a, b in zip(self.formants_hz, self.formants_hz[1:])):
            raise InvalidArgumentError("formants must be strictly ascending")
        if self.formants_hz[-1] >= fs_hz / 2:
            raise InvalidArgumentError("formants must lie below the Nyquist frequency")
        if any(b <= 0 for b in self.bandwidths_hz):
            raise InvalidArgumentError("bandwidths must be positive")
        if self.duration_s <= 0 or self.gain <= 0:
            raise InvalidArgumentError("duration and gain must be positive")


def impulse_train(f0_hz: float, fs_hz: float, duration_s: float) -> SampleBuffer:
    """Unit impulses at ``round(k * fs / f0)``, zeros elsewhere."""
    if not 0 < f0_hz < fs_hz / 2:
        raise InvalidArgumentError(f"f0 must lie in (0, fs/2), got {f0_hz}")
    if duration_s < 0:
        raise InvalidArgumentError(f"duration must be non-negative, got {duration_s}")
    n = int(round(duration_s * fs_hz))
    x = np.zeros(n)
    period = fs_hz / f0_hz
    idx = np.round(np.arange(math.ceil(n / period) + 1) * period).astype(int)
    x[idx[idx < n]] = 1.0
    return SampleBuffer(x, fs_hz)


def resonator_coefficients(fc_hz: float, bw_hz: float, fs_hz: float) -> tuple[float, float]:
    """Feedback coefficients ``(a1, a2)`` of ``y[n] = x[n] + a1 y[n-1] + a2 y[n-2]``."""
    if not 0 < fc_hz < fs_hz / 2:
        raise InvalidArgumentError(f"resonance must lie in (0, fs/2), got {fc_hz}")
    if not bw_hz > 0:
        raise InvalidArgumentError(f"bandwidth must be positive, got {bw_hz}")
    r = math.exp(-math.pi * bw_hz / fs_hz)
    return 2.0 * r * math.cos(2.0 * math.pi * fc_hz / fs_hz), -r * r


def resonator(buffer: SampleBuffer, fc_hz: float, bw_hz: float) -> SampleBuffer:
    a1, a2 = resonator_coefficients(fc_hz, bw_hz, buffer.sample_rate_hz)
    y = lfilter([1.0], [1.0, -a1, -a2], buffer.samples)
    return SampleBuffer(y, buffer.sample_rate_hz)


def synth_vowel(spec: VowelSpec, fs_hz: float = 20000.0) -> SampleBuffer:
    """Impulse train through the formant cascade, peak-normalised to ``spec.gain``."""
    spec.validate(fs_hz)
    buf = impulse_train(spec.f0_hz, fs_hz, spec.duration_s)
    for fc, bw in zip(spec.formants_hz, spec.bandwidths_hz):
        buf = resonator(buf, fc, bw)
    peak = np.max(np.abs(buf.samples)) if len(buf) else 0.0
    y = buf.samples * (spec.gain / peak) if peak > 0 else buf.samples
    return SampleBuffer(y, fs_hz)


def white_noise(duration_s: float, fs_hz: float, seed: int, rms: float = 0.1) -> SampleBuffer:
    rng = np.random.default_rng(seed)
    return SampleBuffer(rms * rng.standard_normal(int(round(duration_s * fs_hz))), fs_hz)


def add_noise(buffer: SampleBuffer, snr_db: float, seed: int) -> SampleBuffer:
    """Add seeded white Gaussian noise at exactly ``snr_db`` (infinite SNR is a no-op)."""
    if math.isinf(snr_db) and snr_db > 0:
        return SampleBuffer(buffer.samples.copy(), buffer.sample_rate_hz)
    if not math.isfinite(snr_db):
        raise InvalidArgumentError(f"snr must be finite or +inf, got {snr_db}")
    x = buffer.samples
    p_signal = float(np.mean(x * x)) if x.size else 0.0
    if p_signal == 0.0:
        raise InvalidArgumentError("cannot set an SNR against a zero-energy signal")
    noise = np.random.default_rng(seed).standard_normal(x.size)
    noise *= math.sqrt(p_signal / (10.0 ** (snr_db / 10.0)) / np.mean(noise * noise))
    return SampleBuffer(x + noise, buffer.sample_rate_hz)
