"""Cepstral pitch and formant estimators used as the comparison baseline."""
from __future__ import annotations

import numpy as np

from .dsp import Frame, Spectrum, real_cepstrum
from .errors import InvalidArgumentError
from .features import (
    AnalysisConfig,
    FormantEstimate,
    PitchEstimate,
    _parabolic_offset,
    _rms,
    _window,
    pick_peaks,
)

# A sub-multiple of the strongest quefrency wins when its peak reaches this
# fraction of the strongest one (guards against period-doubling).
SUBMULTIPLE_RATIO = 0.6


def _check(frame: Frame, n: int, what: str) -> None:
    if len(frame) != n:
        raise InvalidArgumentError(f"{what} frame must have {n} samples, got {len(frame)}")


def frame_cepstrum(frame: Frame, cfg: AnalysisConfig) -> np.ndarray:
    windowed = frame.samples * _window(len(frame))
    return real_cepstrum(windowed, cfg.fft_size, cfg.sample_rate_hz).values


def cepstral_pitch(frame: Frame, cfg: AnalysisConfig) -> PitchEstimate:
    """Pitch from the strongest rahmonic in the 50-500 Hz quefrency band.

    Voiced when the peak exceeds ``cfg.cepstral_voicing_ratio`` times the
    median absolute cepstral value of the band and the frame is not silent.
    """
    _check(frame, cfg.pitch_window, "pitch")
    unvoiced = PitchEstimate(None, False, 0.0, frame.start_sample, frame.time_s)
    if _rms(frame.samples) < cfg.voicing_energy_floor:
        return unvoiced
    c = frame_cepstrum(frame, cfg)
    fs = cfg.sample_rate_hz
    f_lo, f_hi = cfg.pitch_range_hz
    q_lo = max(2, int(np.floor(fs / f_hi)))
    q_hi = min(c.size // 2 - 1, int(np.ceil(fs / f_lo)))
    band = c[q_lo:q_hi + 1]
    q = q_lo + int(np.argmax(band))
    peak = c[q]
    # A perfectly periodic input has an exactly zero cepstrum between
    # rahmonics; keep the noise level strictly positive so it still counts.
    level = max(float(np.median(np.abs(band))), 1e-12 * abs(peak))
    if peak <= 0.0 or peak < cfg.cepstral_voicing_ratio * level:
        return unvoiced

    for k in (4, 3, 2):
        centre = q / k
        if centre < q_lo:
            continue
        lo = max(q_lo, int(np.floor(centre * 0.95)))
        hi = min(q_hi, int(np.ceil(centre * 1.05)))
        if hi < lo:
            continue
        qs = lo + int(np.argmax(c[lo:hi + 1]))
        if c[qs] >= SUBMULTIPLE_RATIO * peak:
            q = qs
            break

    d = _parabolic_offset(c[q - 1], c[q], c[q + 1])
    f0 = fs / (q + d)
    if not f_lo <= f0 <= f_hi:
        return unvoiced
    salience = float(20.0 * np.log10(c[q] / level))
    return PitchEstimate(f0, True, salience, frame.start_sample, frame.time_s)


def lifter(cepstrum: np.ndarray, cutoff: int) -> np.ndarray:
    """Keep quefrencies ``|q| < cutoff`` (both ends of the circular sequence)."""
    out = np.zeros_like(cepstrum)
    if cutoff <= 0:
        return out
    cutoff = min(cutoff, cepstrum.size // 2)
    out[:cutoff] = cepstrum[:cutoff]
    if cutoff > 1:
        out[-(cutoff - 1):] = cepstrum[-(cutoff - 1):]
    return out


def cepstral_envelope(frame: Frame, cfg: AnalysisConfig, lifter_ms: float | None = None) -> Spectrum:
    """Low-quefrency log envelope in dB (natural-log cepstrum rescaled by 20/ln 10)."""
    ms = cfg.lifter_ms if lifter_ms is None else lifter_ms
    c = frame_cepstrum(frame, cfg)
    cutoff = int(round(ms * 1e-3 * cfg.sample_rate_hz))
    env = np.fft.rfft(lifter(c, cutoff)).real * (20.0 / np.log(10.0))
    return Spectrum(env, cfg.sample_rate_hz / cfg.fft_size, is_log=True)


def cepstral_formants(frame: Frame, cfg: AnalysisConfig) -> FormantEstimate:
    _check(frame, cfg.formant_window, "formant")
    if _rms(frame.samples) < cfg.voicing_energy_floor:
        return FormantEstimate((), (), frame.start_sample, frame.time_s)
    peaks = pick_peaks(cepstral_envelope(frame, cfg), cfg.formant_range_hz, 3,
                       cfg.peak_min_separation_hz, cfg.peak_prominence_db, cfg.formant_floor_db)
    return FormantEstimate(
        tuple(p.freq_hz for p in peaks),
        tuple(p.magnitude_db for p in peaks),
        frame.start_sample,
        frame.time_s,
    )
