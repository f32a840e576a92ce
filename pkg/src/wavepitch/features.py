"""Wavelet-masked pitch and formant extraction.

Both pipelines share one shape: Hamming window, DWT, zero the scales
outside the band of interest, IDWT, log spectrum, smoothing, peak picking.
The formant pipeline keeps the fine scales (everything above ~625 Hz at
20 kHz); the pitch pipeline keeps scales 5-8 (~39-625 Hz) and reads the
first peak.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy.signal import find_peaks

from .dsp import (
    Frame,
    SampleBuffer,
    Spectrum,
    apply_window,
    frame_signal,
    hamming_window,
    log_magnitude_spectrum,
    smooth_spectrum,
)
from .errors import ConfigurationError, InvalidArgumentError
from .wavelet import bandpass_reconstruct, daubechies_filter, scale_band

# Magnitudes below this (dB) are treated as silence by the log spectrum.
DB_FLOOR = -300.0


@dataclass(frozen=True)
class AnalysisConfig:
    sample_rate_hz: float = 20000.0
    formant_window: int = 256
    pitch_window: int = 512
    hop_divisor: int = 4
    formant_levels: int = 8
    pitch_levels: int = 9
    formant_keep_scales: tuple = (1, 2, 3, 4)
    pitch_keep_scales: tuple = (5, 6, 7, 8)
    wavelet_order: int = 20
    fft_size: int = 4096
    formant_smooth_hz: float = 100.0
    pitch_smooth_hz: float = 20.0
    pitch_range_hz: tuple = (50.0, 500.0)
    formant_range_hz: tuple = (200.0, 8000.0)
    peak_min_separation_hz: float = 200.0
    peak_prominence_db: float = 2.0
    # peaks further than this below the strongest in-range peak are ignored
    formant_floor_db: float = 40.0
    pitch_floor_db: float = 12.0
    # minimum normalised autocorrelation at the candidate period
    voicing_periodicity: float = 0.5
    # a candidate yields to a stronger, higher one that is this nearly as periodic
    subharmonic_margin: float = 0.05
    voicing_energy_floor: float = 1e-4
    adaptive_bands: bool = False
    # cepstral baseline
    lifter_ms: float = 3.5
    cepstral_voicing_ratio: float = 10.0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "formant_keep_scales", tuple(sorted(set(self.formant_keep_scales))))
        object.__setattr__(self, "pitch_keep_scales", tuple(sorted(set(self.pitch_keep_scales))))
        object.__setattr__(self, "pitch_range_hz", tuple(float(v) for v in self.pitch_range_hz))
        object.__setattr__(self, "formant_range_hz", tuple(float(v) for v in self.formant_range_hz))
        self.validate()

    def validate(self) -> None:
        if not self.sample_rate_hz > 0:
            raise ConfigurationError("sample_rate_hz must be positive")
        for name in ("formant_window", "pitch_window", "fft_size"):
            n = getattr(self, name)
            if n < 2 or n & (n - 1):
                raise ConfigurationError(f"{name} must be a power of two >= 2, got {n}")
        for win, lev, keep, label in (
            (self.formant_window, self.formant_levels, self.formant_keep_scales, "formant"),
            (self.pitch_window, self.pitch_levels, self.pitch_keep_scales, "pitch"),
        ):
            if lev < 1 or (1 << lev) > win:
                raise ConfigurationError(f"{label}: cannot decompose {win} samples to {lev} levels")
            if not keep or any(not 1 <= s <= lev for s in keep):
                raise ConfigurationError(f"{label} keep-scales {keep} must be a non-empty subset of 1..{lev}")
            if win > self.fft_size:
                raise ConfigurationError(f"{label} window exceeds fft_size")
        for name in ("pitch_range_hz", "formant_range_hz"):
            lo, hi = getattr(self, name)
            if not 0 <= lo < hi:
                raise ConfigurationError(f"{name} must satisfy 0 <= low < high, got {(lo, hi)}")
        if self.hop_divisor < 1:
            raise ConfigurationError("hop_divisor must be >= 1")
        if not 1 <= self.wavelet_order <= 20:
            raise ConfigurationError("wavelet_order must be in 1..20")
        if not 0.0 <= self.subharmonic_margin <= 1.0:
            raise ConfigurationError("subharmonic_margin must be in [0, 1]")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")

    @property
    def pitch_hop(self) -> int:
        return max(1, self.pitch_window // self.hop_divisor)

    @property
    def formant_hop(self) -> int:
        return max(1, self.formant_window // self.hop_divisor)

    def for_rate(self, fs: float) -> "AnalysisConfig":
        """Copy retargeted at ``fs`` with keep-scales recomputed from the dyadic band layout.

        Pitch keeps every detail scale whose band meets ``pitch_range_hz``;
        formants keep the scales that meet ``formant_range_hz`` and lie wholly
        above the pitch range. At 20 kHz this reproduces the default masks.
        """
        p_lo, p_hi = self.pitch_range_hz
        f_lo, f_hi = self.formant_range_hz
        max_pitch = int(math.log2(self.pitch_window))
        max_formant = int(math.log2(self.formant_window))
        pitch_keep = tuple(
            s for s in range(1, max_pitch + 1) if _meets(scale_band(s, fs), p_lo, p_hi)
        )
        formant_keep = tuple(
            s for s in range(1, max_formant + 1)
            if _meets(scale_band(s, fs), f_lo, f_hi) and scale_band(s, fs).low_hz >= p_hi
        )
        if not pitch_keep or not formant_keep:
            raise ConfigurationError(f"no wavelet scale covers the analysis ranges at {fs} Hz")
        return replace(
            self,
            sample_rate_hz=fs,
            pitch_keep_scales=pitch_keep,
            formant_keep_scales=formant_keep,
            pitch_levels=max(self.pitch_levels if self.pitch_levels <= max_pitch else max_pitch,
                             max(pitch_keep)),
            formant_levels=max(self.formant_levels if self.formant_levels <= max_formant
                               else max_formant, max(formant_keep)),
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


def _meets(band, lo: float, hi: float) -> bool:
    return min(band.high_hz, hi) > max(band.low_hz, lo)


def _passband(keep, fs: float) -> tuple[float, float]:
    return scale_band(max(keep), fs).low_hz, scale_band(min(keep), fs).high_hz


class Peak(NamedTuple):
    freq_hz: float
    magnitude_db: float
    prominence_db: float


@dataclass(frozen=True)
class PitchEstimate:
    f0_hz: Optional[float]
    voiced: bool
    salience_db: float
    frame_start: int
    time_s: float


@dataclass(frozen=True)
class FormantEstimate:
    formants_hz: tuple
    magnitudes_db: tuple
    frame_start: int
    time_s: float


@dataclass(frozen=True)
class AnalysisResult:
    """Pitch and formant tracks; each is on its own frame grid."""

    pitch: list
    formants: list
    config: AnalysisConfig


@lru_cache(maxsize=16)
def _window(n: int) -> np.ndarray:
    w = hamming_window(n)
    w.setflags(write=False)
    return w


def _parabolic_offset(a: float, b: float, c: float) -> float:
    denom = a - 2.0 * b + c
    if denom >= 0.0:
        return 0.0
    return float(np.clip(0.5 * (a - c) / denom, -0.5, 0.5))


def pick_peaks(spec: Spectrum, range_hz, max_count: Optional[int], min_separation_hz: float,
               min_prominence_db: float, floor_db: Optional[float] = None) -> list[Peak]:
    """Pick spectral peaks inside ``range_hz``.

    A candidate is a local maximum whose prominence (height above the higher
    of its two flanking bases) is at least ``min_prominence_db``. If
    ``floor_db`` is given, candidates more than that far below the
    spectrum's maximum within the range are dropped. Candidates are then
    accepted greedily by descending magnitude (ties: lower frequency first),
    skipping any within ``min_separation_hz`` of an accepted peak. Frequencies
    are refined by parabolic interpolation; the result is sorted by frequency.
    """
    lo, hi = range_hz
    x = np.asarray(spec.bins, dtype=float)
    df = spec.bin_width_hz
    k_lo = max(int(math.ceil(lo / df)), 0)
    k_hi = min(int(math.floor(hi / df)), x.size - 1)
    if hi <= lo or k_hi < k_lo:
        raise InvalidArgumentError(f"empty peak search range {range_hz}")
    idx, props = find_peaks(x, prominence=(min_prominence_db, None))
    prom = props["prominences"]
    inside = (idx >= k_lo) & (idx <= k_hi)
    idx, prom = idx[inside], prom[inside]
    if floor_db is not None and idx.size:
        keep = x[idx] >= x[k_lo:k_hi + 1].max() - floor_db
        idx, prom = idx[keep], prom[keep]

    refined = []
    for k in idx:
        k = int(k)
        d = _parabolic_offset(x[k - 1], x[k], x[k + 1])
        refined.append(((k + d) * df, float(x[k] - 0.25 * (x[k - 1] - x[k + 1]) * d)))

    order = sorted(range(idx.size), key=lambda i: (-x[idx[i]], idx[i]))
    accepted = []
    for i in order:
        if any(abs(refined[i][0] - refined[j][0]) < min_separation_hz for j in accepted):
            continue
        accepted.append(i)
        if max_count is not None and len(accepted) == max_count:
            break
    return [Peak(refined[i][0], refined[i][1], float(prom[i])) for i in sorted(accepted, key=lambda i: idx[i])]


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x))) if x.size else 0.0


def _check_frame(frame: Frame, expected: int, what: str) -> None:
    if len(frame) != expected:
        raise InvalidArgumentError(f"{what} frame must have {expected} samples, got {len(frame)}")


def formant_reconstruction(frame: Frame, cfg: AnalysisConfig) -> np.ndarray:
    """Windowed frame with the pitch-band scales (and approximation) removed."""
    _check_frame(frame, cfg.formant_window, "formant")
    windowed = apply_window(frame, _window(cfg.formant_window)).samples
    return bandpass_reconstruct(windowed, daubechies_filter(cfg.wavelet_order),
                                cfg.formant_levels, cfg.formant_keep_scales)


def pitch_reconstruction(frame: Frame, cfg: AnalysisConfig) -> np.ndarray:
    """Windowed frame keeping only the pitch-band detail scales."""
    _check_frame(frame, cfg.pitch_window, "pitch")
    windowed = apply_window(frame, _window(cfg.pitch_window)).samples
    return bandpass_reconstruct(windowed, daubechies_filter(cfg.wavelet_order),
                                cfg.pitch_levels, cfg.pitch_keep_scales)


def _smoothed_db(signal: np.ndarray, cfg: AnalysisConfig, width_hz: float) -> Spectrum:
    spec = log_magnitude_spectrum(signal, cfg.fft_size, cfg.sample_rate_hz, floor_db=DB_FLOOR)
    return smooth_spectrum(spec, width_hz)


def formant_spectrum(frame: Frame, cfg: AnalysisConfig) -> Spectrum:
    return _smoothed_db(formant_reconstruction(frame, cfg), cfg, cfg.formant_smooth_hz)


def pitch_spectrum(frame: Frame, cfg: AnalysisConfig) -> Spectrum:
    return _smoothed_db(pitch_reconstruction(frame, cfg), cfg, cfg.pitch_smooth_hz)


def formant_search_range(cfg: AnalysisConfig) -> tuple[float, float]:
    """``formant_range_hz`` clipped to the band the formant mask lets through."""
    lo, hi = _passband(cfg.formant_keep_scales, cfg.sample_rate_hz)
    return max(lo, cfg.formant_range_hz[0]), min(hi, cfg.formant_range_hz[1])


def pitch_search_range(cfg: AnalysisConfig) -> tuple[float, float]:
    lo, hi = _passband(cfg.pitch_keep_scales, cfg.sample_rate_hz)
    return max(lo, cfg.pitch_range_hz[0]), min(hi, cfg.pitch_range_hz[1])


def extract_formants(frame: Frame, cfg: AnalysisConfig) -> FormantEstimate:
    """Up to three formants from the high-scale reconstruction of one frame."""
    _check_frame(frame, cfg.formant_window, "formant")
    if _rms(frame.samples) < cfg.voicing_energy_floor:
        return FormantEstimate((), (), frame.start_sample, frame.time_s)
    peaks = pick_peaks(formant_spectrum(frame, cfg), formant_search_range(cfg), 3,
                       cfg.peak_min_separation_hz, cfg.peak_prominence_db, cfg.formant_floor_db)
    return FormantEstimate(
        tuple(p.freq_hz for p in peaks),
        tuple(p.magnitude_db for p in peaks),
        frame.start_sample,
        frame.time_s,
    )


# Relative lag tolerance when confirming a spectral pitch candidate in the time domain.
LAG_TOLERANCE = 0.05


def periodicity(samples, f0_hz: float, fs: float, tolerance: float = LAG_TOLERANCE) -> float:
    """Best normalised correlation between ``x[n]`` and ``x[n + L]`` over lags
    ``L`` within ``tolerance`` of ``fs / f0_hz``.

    Returns a value in [-1, 1]; ``-1`` when no lag fits inside the frame.
    """
    x = np.asarray(samples, dtype=float)
    period = fs / f0_hz
    lo = max(1, int(math.floor(period / (1.0 + tolerance))))
    hi = min(x.size - 2, int(math.ceil(period / (1.0 - tolerance))))
    best = -1.0
    for lag in range(lo, hi + 1):
        a, b = x[:-lag], x[lag:]
        denom = math.sqrt(float(a @ a) * float(b @ b))
        if denom > 0.0:
            best = max(best, float(a @ b) / denom)
    return best


class PitchCandidate(NamedTuple):
    peak: Peak
    periodicity: float


def pitch_candidates(frame: Frame, cfg: AnalysisConfig) -> list[PitchCandidate]:
    """Every prominence-qualifying peak of the pitch spectrum, lowest first,
    with the frame's periodicity at that frequency."""
    _check_frame(frame, cfg.pitch_window, "pitch")
    peaks = pick_peaks(pitch_spectrum(frame, cfg), pitch_search_range(cfg), None, 0.0,
                       cfg.peak_prominence_db, cfg.pitch_floor_db)
    return [
        PitchCandidate(p, periodicity(frame.samples, p.freq_hz, cfg.sample_rate_hz))
        for p in peaks
    ]


def _dominated(cand: PitchCandidate, cands: list[PitchCandidate], margin: float) -> bool:
    """True when a stronger, higher-frequency candidate is (almost) as periodic.

    A periodic frame also correlates at multiples of its period, so a weak
    low peak (noise, or a sub-harmonic) can pass the periodicity gate.
    """
    return any(
        o.peak.freq_hz > cand.peak.freq_hz
        and o.peak.magnitude_db > cand.peak.magnitude_db
        and o.periodicity >= cand.periodicity - margin
        for o in cands
    )


def extract_pitch(frame: Frame, cfg: AnalysisConfig) -> PitchEstimate:
    """First (lowest) qualifying peak of the pitch-band spectrum.

    A peak qualifies when it clears the prominence and floor tests, the raw
    frame is periodic at its frequency (``voicing_periodicity``), and no
    stronger higher peak explains the periodicity equally well.
    """
    _check_frame(frame, cfg.pitch_window, "pitch")
    unvoiced = PitchEstimate(None, False, 0.0, frame.start_sample, frame.time_s)
    if _rms(frame.samples) < cfg.voicing_energy_floor:
        return unvoiced
    cands = pitch_candidates(frame, cfg)
    for cand in cands:
        if cand.periodicity >= cfg.voicing_periodicity and not _dominated(
                cand, cands, cfg.subharmonic_margin):
            p = cand.peak
            return PitchEstimate(p.freq_hz, True, p.prominence_db, frame.start_sample, frame.time_s)
    return unvoiced


def effective_config(buffer: SampleBuffer, cfg: AnalysisConfig) -> AnalysisConfig:
    fs = buffer.sample_rate_hz
    if cfg.adaptive_bands:
        return cfg.for_rate(fs)
    if not math.isclose(fs, cfg.sample_rate_hz):
        raise ConfigurationError(
            f"buffer is sampled at {fs} Hz but the configuration expects {cfg.sample_rate_hz} Hz; "
            "enable adaptive_bands to retarget the wavelet masks"
        )
    return cfg


def _map(fn, frames, cfg: AnalysisConfig) -> list:
    if cfg.workers > 1 and len(frames) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(lambda f: fn(f, cfg), frames))
    return [fn(f, cfg) for f in frames]


def analyze(buffer: SampleBuffer, cfg: AnalysisConfig = AnalysisConfig()) -> AnalysisResult:
    """Run both pipelines over ``buffer``; results are in frame order."""
    cfg = effective_config(buffer, cfg)
    pitch_frames = frame_signal(buffer, cfg.pitch_window, cfg.pitch_hop)
    formant_frames = frame_signal(buffer, cfg.formant_window, cfg.formant_hop)
    return AnalysisResult(
        _map(extract_pitch, pitch_frames, cfg),
        _map(extract_formants, formant_frames, cfg),
        cfg,
    )
