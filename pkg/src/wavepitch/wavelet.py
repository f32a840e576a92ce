"""Daubechies filter bank: periodic DWT/IDWT, scale bands and coefficient masks."""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from ._taps import DAUBECHIES_TAPS
from .errors import InvalidArgumentError

_TOL = 1e-10


@dataclass(frozen=True)
class WaveletFilter:
    name: str
    h: np.ndarray  # low-pass analysis taps
    g: np.ndarray  # high-pass analysis taps

    @property
    def length(self) -> int:
        return self.h.size


@dataclass(frozen=True)
class DwtDecomposition:
    """Detail coefficients per scale (``details[0]`` is scale 1) plus the last approximation."""

    details: tuple
    approx: np.ndarray
    levels: int
    original_len: int
    filter_name: str

    def coefficient_energy(self) -> float:
        return float(sum(np.dot(d, d) for d in self.details) + np.dot(self.approx, self.approx))


@dataclass(frozen=True)
class ScaleBand:
    scale: int
    low_hz: float
    high_hz: float


def _validate(filt: WaveletFilter) -> None:
    h, g = filt.h, filt.g
    L = h.size
    if abs(h.sum() - np.sqrt(2.0)) > _TOL:
        raise RuntimeError(f"{filt.name}: low-pass taps do not sum to sqrt(2)")
    for k in range(L // 2):
        dot = np.dot(h[2 * k:], h[:L - 2 * k])
        if abs(dot - (1.0 if k == 0 else 0.0)) > _TOL:
            raise RuntimeError(f"{filt.name}: taps are not orthonormal under shift {2 * k}")
    n = np.arange(L)
    if not np.array_equal(g, (-1.0) ** n * h[::-1]):
        raise RuntimeError(f"{filt.name}: high-pass taps break the quadrature-mirror relation")


@lru_cache(maxsize=None)
def daubechies_filter(order: int) -> WaveletFilter:
    """Orthonormal Daubechies filter with ``order`` vanishing moments (``2 * order`` taps)."""
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= 20:
        raise InvalidArgumentError(f"Daubechies order must be an integer in [1, 20], got {order!r}")
    h = np.array(DAUBECHIES_TAPS[int(order)], dtype=float)
    g = (-1.0) ** np.arange(h.size) * h[::-1]
    h.setflags(write=False)
    g.setflags(write=False)
    filt = WaveletFilter(f"db{order}", h, g)
    _validate(filt)
    return filt


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _fold(f: np.ndarray, n: int) -> np.ndarray:
    """Periodise taps onto a circle of length n."""
    out = np.zeros(n)
    np.add.at(out, np.arange(f.size) % n, f)
    return out


def _analyze(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    # y[k] = sum_m x[m] fp[(2k - m) mod n]: circular convolution, even samples kept
    fp = _fold(f, x.size)
    return np.fft.irfft(np.fft.rfft(x) * np.fft.rfft(fp), n=x.size)[::2]


def _synthesize(y: np.ndarray, f: np.ndarray) -> np.ndarray:
    # adjoint of _analyze: x[m] = sum_k y[k] fp[(2k - m) mod n]
    n = 2 * y.size
    fp = _fold(f, n)
    up = np.zeros(n)
    up[::2] = y
    return np.fft.irfft(np.fft.rfft(up) * np.conj(np.fft.rfft(fp)), n=n)


def dwt(samples, filt: WaveletFilter, levels: int) -> DwtDecomposition:
    """Iterated two-channel analysis with periodic extension.

    Each stage computes ``y[k] = sum_n x(n) f(2k - n)`` for ``f = g`` (detail)
    and ``f = h`` (next approximation), indices modulo the current length.
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    if x.ndim != 1 or not _is_pow2(n) or n < 2:
        raise InvalidArgumentError(f"signal length must be a power of two >= 2, got {x.shape}")
    if levels < 1 or (1 << levels) > n:
        raise InvalidArgumentError(f"cannot decompose {n} samples to {levels} levels")
    details = []
    approx = x
    for _ in range(levels):
        details.append(_analyze(approx, filt.g))
        approx = _analyze(approx, filt.h)
    return DwtDecomposition(tuple(details), approx, levels, n, filt.name)


def idwt(decomp: DwtDecomposition, filt: WaveletFilter) -> np.ndarray:
    """Exact inverse of :func:`dwt` for orthonormal banks."""
    if filt.name != decomp.filter_name:
        raise InvalidArgumentError(
            f"decomposition was made with {decomp.filter_name}, not {filt.name}"
        )
    _check_lengths(decomp)
    approx = np.asarray(decomp.approx, dtype=float)
    for j in range(decomp.levels, 0, -1):
        detail = np.asarray(decomp.details[j - 1], dtype=float)
        approx = _synthesize(approx, filt.h) + _synthesize(detail, filt.g)
    return approx


def _check_lengths(decomp: DwtDecomposition) -> None:
    n = decomp.original_len
    if not _is_pow2(n) or decomp.levels < 1 or (1 << decomp.levels) > n:
        raise InvalidArgumentError("decomposition has an invalid length/level combination")
    if len(decomp.details) != decomp.levels:
        raise InvalidArgumentError("decomposition detail count does not match its level count")
    for j, d in enumerate(decomp.details, start=1):
        if len(d) != n >> j:
            raise InvalidArgumentError(f"detail at scale {j} has length {len(d)}, expected {n >> j}")
    if len(decomp.approx) != n >> decomp.levels:
        raise InvalidArgumentError("approximation length is inconsistent with the level count")


def scale_band(scale: int, fs: float) -> ScaleBand:
    """Nominal detail band of ``scale``: ``(fs / 2**(scale+1), fs / 2**scale]``."""
    if scale < 1:
        raise InvalidArgumentError(f"scale must be >= 1, got {scale}")
    if not fs > 0:
        raise InvalidArgumentError(f"sample rate must be positive, got {fs}")
    high = fs / 2.0 ** scale
    return ScaleBand(scale, high / 2.0, high)


def approx_band(levels: int, fs: float) -> ScaleBand:
    """Band left in the approximation after ``levels`` stages: ``[0, fs / 2**(levels+1)]``.

    Reported with ``scale = levels + 1``, i.e. "that scale and above".
    """
    if levels < 0:
        raise InvalidArgumentError(f"levels must be >= 0, got {levels}")
    return ScaleBand(levels + 1, 0.0, fs / 2.0 ** (levels + 1))


def mask_scales(decomp: DwtDecomposition, keep_details, keep_approx: bool) -> DwtDecomposition:
    """Copy of ``decomp`` with every detail scale not in ``keep_details`` zeroed.

    The approximation is zeroed unless ``keep_approx``.
    """
    keep = set(int(s) for s in keep_details)
    bad = [s for s in keep if not 1 <= s <= decomp.levels]
    if bad:
        raise InvalidArgumentError(
            f"scales {sorted(bad)} are outside 1..{decomp.levels}"
        )
    details = tuple(
        np.array(d, copy=True) if j in keep else np.zeros_like(d)
        for j, d in enumerate(decomp.details, start=1)
    )
    approx = np.array(decomp.approx, copy=True) if keep_approx else np.zeros_like(decomp.approx)
    return replace(decomp, details=details, approx=approx)


def bandpass_reconstruct(samples, filt: WaveletFilter, levels: int, keep_details,
                         keep_approx: bool = False) -> np.ndarray:
    """``idwt(mask_scales(dwt(x)))`` in one call."""
    decomp = dwt(samples, filt, levels)
    return idwt(mask_scales(decomp, keep_details, keep_approx), filt)
