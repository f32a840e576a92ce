"""Framing, windowing, spectral and cepstral primitives.

Everything here is a pure function of its arguments, so frames can be
processed independently (and concurrently) by the analysis drivers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

# Relative floor added to the magnitude spectrum before taking the log.
CEPSTRUM_FLOOR = 1e-10


@dataclass(frozen=True)
class SampleBuffer:
    """Mono signal with its sampling rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise InvalidArgumentError(f"sample rate must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))

    def __len__(self):
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass(frozen=True)
class Frame:
    samples: np.ndarray
    start_sample: int
    sample_rate_hz: float

    def __len__(self):
        return len(self.samples)

    @property
    def time_s(self) -> float:
        return self.start_sample / self.sample_rate_hz


@dataclass(frozen=True)
class Spectrum:
    """One-sided spectrum, bins 0..fft_size/2 inclusive."""

    bins: np.ndarray
    bin_width_hz: float
    is_log: bool = False

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(len(self.bins)) * self.bin_width_hz


@dataclass(frozen=True)
class CepstrumSeries:
    values: np.ndarray
    sample_rate_hz: float


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def hamming_window(window_len: int) -> np.ndarray:
    """Symmetric Hamming window, ``0.54 - 0.46 cos(2 pi n / (N - 1))`` for n in [0, N-1]."""
    if window_len < 2:
        raise InvalidArgumentError(f"window length must be >= 2, got {window_len}")
    n = np.arange(window_len)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (window_len - 1))


def frame_count(length: int, window_len: int, hop: int) -> int:
    if length < window_len:
        return 0
    return (length - window_len) // hop + 1


def frame_signal(buffer: SampleBuffer, window_len: int, hop: int) -> list[Frame]:
    """Cut ``buffer`` into full frames of ``window_len`` samples every ``hop`` samples.

    A trailing remainder shorter than one window is dropped.
    """
    if window_len < 2:
        raise InvalidArgumentError(f"window length must be >= 2, got {window_len}")
    if hop < 1:
        raise InvalidArgumentError(f"hop must be >= 1, got {hop}")
    x = buffer.samples
    count = frame_count(len(x), window_len, hop)
    return [
        Frame(x[i * hop:i * hop + window_len].copy(), i * hop, buffer.sample_rate_hz)
        for i in range(count)
    ]


def apply_window(frame: Frame, window) -> Frame:
    window = np.asarray(window, dtype=float)
    if window.shape != frame.samples.shape:
        raise InvalidArgumentError(
            f"window length {window.size} does not match frame length {frame.samples.size}"
        )
    return Frame(frame.samples * window, frame.start_sample, frame.sample_rate_hz)


def _padded_fft(samples, fft_size: int) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if not _is_pow2(fft_size):
        raise InvalidArgumentError(f"fft size must be a power of two, got {fft_size}")
    if fft_size < x.size:
        raise InvalidArgumentError(f"fft size {fft_size} is smaller than input length {x.size}")
    return np.fft.rfft(x, n=fft_size)


def magnitude_spectrum(samples, fft_size: int, sample_rate_hz: float = 1.0) -> Spectrum:
    """Magnitude of the zero-padded DFT over bins 0..fft_size/2."""
    mag = np.abs(_padded_fft(samples, fft_size))
    return Spectrum(mag, sample_rate_hz / fft_size, is_log=False)


def to_db(spec: Spectrum, floor_db: float = -300.0) -> Spectrum:
    """Convert a magnitude spectrum to 20 log10 |X| (dB)."""
    if spec.is_log:
        return spec
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(spec.bins)
    db = np.maximum(db, floor_db)
    return Spectrum(db, spec.bin_width_hz, is_log=True)


def log_magnitude_spectrum(samples, fft_size: int, sample_rate_hz: float = 1.0,
                           floor_db: float = -300.0) -> Spectrum:
    return to_db(magnitude_spectrum(samples, fft_size, sample_rate_hz), floor_db)


def smoothing_width_bins(width_hz: float, bin_width_hz: float) -> int:
    if width_hz <= 0:
        return 1
    w = max(1, int(round(width_hz / bin_width_hz)))
    if w % 2 == 0:
        w += 1
    return w


def smooth_spectrum(spec: Spectrum, width_hz: float) -> Spectrum:
    """Centred moving average of odd width over the bins.

    Near the ends the averaging window shrinks symmetrically, so bin ``k``
    averages over ``k - m .. k + m`` with ``m`` limited by the distance to
    the nearest edge.
    """
    if width_hz < 0:
        raise InvalidArgumentError(f"smoothing width must be non-negative, got {width_hz}")
    w = smoothing_width_bins(width_hz, spec.bin_width_hz)
    x = np.asarray(spec.bins, dtype=float)
    if w == 1 or x.size < 3:
        return Spectrum(x.copy(), spec.bin_width_hz, spec.is_log)
    half = w // 2
    n = x.size
    k = np.arange(n)
    m = np.minimum(half, np.minimum(k, n - 1 - k))
    csum = np.concatenate(([0.0], np.cumsum(x)))
    out = (csum[k + m + 1] - csum[k - m]) / (2 * m + 1)
    return Spectrum(out, spec.bin_width_hz, spec.is_log)


def real_cepstrum(samples, fft_size: int, sample_rate_hz: float = 1.0) -> CepstrumSeries:
    """Real cepstrum ``irfft(log(|X| + eps))`` with ``eps = 1e-10 * max|X|``."""
    mag = np.abs(_padded_fft(samples, fft_size))
    peak = mag.max()
    if peak == 0.0:
        raise InvalidArgumentError("cepstrum of an all-zero signal is undefined")
    values = np.fft.irfft(np.log(mag + CEPSTRUM_FLOOR * peak), n=fft_size)
    return CepstrumSeries(values, sample_rate_hz)
