"""Command-line front end: ``wavepitch --mode {analyze,compare,synth,bands}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import replace
from typing import Optional

import numpy as np

from .cepstrum import cepstral_formants, cepstral_pitch
from .dsp import SampleBuffer, frame_signal
from .errors import ConfigurationError, InvalidArgumentError, WavError
from .features import (
    AnalysisConfig,
    analyze,
    effective_config,
    formant_spectrum,
    pitch_spectrum,
)
from .synth import VowelSpec, add_noise, synth_vowel, white_noise
from .wavelet import approx_band, scale_band
from .wavio import read_wav, write_wav

log = logging.getLogger("wavepitch")

ANALYZE_COLUMNS = ["frame_index", "time_s", "voiced", "f0_hz", "f1_hz", "f2_hz", "f3_hz"]
COMPARE_COLUMNS = [
    "frame_index", "time_s",
    "voiced_dwt", "voiced_cepstrum",
    "f0_dwt", "f0_cepstrum",
    "f1_dwt", "f1_cepstrum",
    "f2_dwt", "f2_cepstrum",
    "f3_dwt", "f3_cepstrum",
]
AGREEMENT_TOLERANCE = 0.10


class CliError(Exception):
    pass


# -- argument parsing -------------------------------------------------------

def _floats(text: str, n: Optional[int] = None) -> tuple:
    try:
        vals = tuple(float(v) for v in text.replace(":", ",").split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers, got {text!r}")
    return vals


def _range(text: str) -> tuple:
    return _floats(text, 2)


def _per_pipeline(text: str) -> tuple:
    """``pitch=VALUE``, ``formant=VALUE`` or a bare ``VALUE`` for both pipelines."""
    kind, sep, value = text.partition("=")
    if not sep:
        return "both", text
    if kind not in ("pitch", "formant"):
        raise argparse.ArgumentTypeError(f"expected pitch=VALUE or formant=VALUE, got {text!r}")
    return kind, value


def _kinds(kind: str) -> tuple:
    return ("pitch", "formant") if kind == "both" else (kind,)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="wavepitch",
        description="Wavelet-based pitch and formant extraction with a cepstral baseline.",
    )
    p.add_argument("--mode", required=True, choices=["analyze", "compare", "synth", "bands"])
    p.add_argument("--input", help="input WAV file (analyze, compare)")
    p.add_argument("--output", default="-", help="output file; '-' for standard output")
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    a = p.add_argument_group("analysis")
    a.add_argument("--wavelet-order", type=int, help="Daubechies order, 1..20 (default 20)")
    a.add_argument("--window", type=_per_pipeline, action="append", default=[],
                   metavar="[{pitch,formant}=]N", help="frame length in samples")
    a.add_argument("--hop-divisor", type=int, help="hop = window / divisor (default 4)")
    a.add_argument("--levels", type=_per_pipeline, action="append", default=[],
                   metavar="[{pitch,formant}=]J",
                   help="decomposition depth; in bands mode, the number of detail scales (default 9)")
    a.add_argument("--keep-scales", type=_per_pipeline, action="append", default=[],
                   metavar="[{pitch,formant}=]S,S,..", help="detail scales kept by the mask")
    a.add_argument("--fft-size", type=int)
    a.add_argument("--smooth-hz", type=_per_pipeline, action="append", default=[],
                   metavar="[{pitch,formant}=]HZ", help="spectral smoothing width")
    a.add_argument("--pitch-range", type=_range, metavar="LO,HI")
    a.add_argument("--formant-range", type=_range, metavar="LO,HI")
    a.add_argument("--adaptive-bands", action="store_true",
                   help="recompute wavelet masks for the input's sample rate")
    a.add_argument("--emit-spectra", metavar="DIR", help="write smoothed spectra as TSV files")
    a.add_argument("--channel", type=int, help="channel index for multi-channel input")
    a.add_argument("--workers", type=int, default=1, help="threads for per-frame analysis")

    s = p.add_argument_group("synth")
    s.add_argument("--sample-rate", type=float, default=20000.0)
    s.add_argument("--f0", type=float, default=130.0)
    s.add_argument("--formants", type=_floats, default=(700.0, 1220.0, 2600.0))
    s.add_argument("--bandwidths", type=_floats, default=(80.0, 90.0, 120.0))
    s.add_argument("--duration", type=float, default=1.0)
    s.add_argument("--gain", type=float, default=0.8)
    s.add_argument("--snr", type=float, default=math.inf, help="added white noise SNR in dB")
    s.add_argument("--noise-only", action="store_true", help="emit seeded white noise instead")
    s.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> AnalysisConfig:
    kw = {}
    if args.wavelet_order is not None:
        kw["wavelet_order"] = args.wavelet_order
    if args.hop_divisor is not None:
        kw["hop_divisor"] = args.hop_divisor
    if args.fft_size is not None:
        kw["fft_size"] = args.fft_size
    if args.pitch_range is not None:
        kw["pitch_range_hz"] = args.pitch_range
    if args.formant_range is not None:
        kw["formant_range_hz"] = args.formant_range
    try:
        for field, values, conv in (
            ("window", args.window, int),
            ("levels", args.levels, int),
            ("keep_scales", args.keep_scales,
             lambda v: tuple(int(s) for s in v.split(",") if s.strip())),
            ("smooth_hz", args.smooth_hz, float),
        ):
            for kind, v in values:
                for k in _kinds(kind):
                    kw[f"{k}_{field}"] = conv(v)
    except ValueError as exc:
        raise ConfigurationError(f"bad per-pipeline value: {exc}")
    kw["adaptive_bands"] = args.adaptive_bands
    kw["workers"] = args.workers
    return replace(AnalysisConfig(), **kw)


# -- output helpers ---------------------------------------------------------

def _fmt(v, digits: int = 3) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.{digits}f}"
    return str(v)


def _json_value(v):
    if isinstance(v, float):
        return round(v, 6)
    return v


def _open_out(path: str):
    if path == "-":
        return _Stdout()
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()


def _write_records(path: str, fmt: str, columns, records, header: dict) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for rec in records:
            w.writerow([_fmt(rec[c], 6 if c == "time_s" else 3) for c in columns])
        text = buf.getvalue()
    else:
        doc = dict(header)
        doc["records"] = [{c: _json_value(rec[c]) for c in columns} for rec in records]
        text = json.dumps(doc, indent=2) + "\n"
    with _open_out(path) as fh:
        fh.write(text)


def _write_spectrum(path: str, spec) -> None:
    freqs = spec.freqs
    with open(path, "w", encoding="utf-8") as fh:
        for f, m in zip(freqs, spec.bins):
            fh.write(f"{f:.4f}\t{m:.4f}\n")


def aligned_formant_index(pitch_start: int, cfg: AnalysisConfig, n_formant: int) -> Optional[int]:
    """Formant frame whose centre is nearest the pitch frame's centre."""
    if n_formant == 0:
        return None
    centre = pitch_start + cfg.pitch_window / 2
    j = (centre - cfg.formant_window / 2) / cfg.formant_hop
    j = int(min(max(math.floor(j + 0.5), 0), n_formant - 1))
    return j


def _load(args) -> SampleBuffer:
    if not args.input:
        raise CliError("--input is required for this mode")
    return read_wav(args.input, channel=args.channel)


# -- commands ---------------------------------------------------------------

def run_analyze(args) -> int:
    cfg = config_from_args(args)
    buf = _load(args)
    cfg = effective_config(buf, cfg)
    result = analyze(buf, cfg)
    records = []
    for i, p in enumerate(result.pitch):
        j = aligned_formant_index(p.frame_start, cfg, len(result.formants))
        fhz = result.formants[j].formants_hz if j is not None else ()
        rec = {
            "frame_index": i,
            "time_s": p.time_s,
            "voiced": p.voiced,
            "f0_hz": p.f0_hz,
        }
        for k in range(3):
            rec[f"f{k + 1}_hz"] = fhz[k] if k < len(fhz) else None
        records.append(rec)
    _write_records(args.output, args.format, ANALYZE_COLUMNS, records,
                   {"config": cfg.to_dict(), "sample_rate_hz": buf.sample_rate_hz})
    if args.emit_spectra:
        _emit_spectra(args.emit_spectra, buf, cfg)
    return 0


def _emit_spectra(directory: str, buf: SampleBuffer, cfg: AnalysisConfig) -> None:
    pitch_frames = frame_signal(buf, cfg.pitch_window, cfg.pitch_hop)
    formant_frames = frame_signal(buf, cfg.formant_window, cfg.formant_hop)
    for sub in ("pitch", "formant"):
        os.makedirs(os.path.join(directory, sub), exist_ok=True)
    for i, fr in enumerate(pitch_frames):
        _write_spectrum(os.path.join(directory, "pitch", f"frame_{i}.tsv"), pitch_spectrum(fr, cfg))
        j = aligned_formant_index(fr.start_sample, cfg, len(formant_frames))
        if j is not None:
            _write_spectrum(os.path.join(directory, "formant", f"frame_{i}.tsv"),
                            formant_spectrum(formant_frames[j], cfg))


def compare_summary(records) -> dict:
    both = [r for r in records if r["voiced_dwt"] and r["voiced_cepstrum"]]
    rel = [abs(r["f0_dwt"] - r["f0_cepstrum"]) / r["f0_cepstrum"] for r in both]
    agree = sum(1 for d in rel if d <= AGREEMENT_TOLERANCE)
    return {
        "frames": len(records),
        "voiced_dwt": sum(1 for r in records if r["voiced_dwt"]),
        "voiced_cepstrum": sum(1 for r in records if r["voiced_cepstrum"]),
        "mutually_voiced": len(both),
        "voicing_agreement": (
            sum(1 for r in records if r["voiced_dwt"] == r["voiced_cepstrum"]) / len(records)
            if records else 1.0
        ),
        "agreement_rate": agree / len(both) if both else 1.0,
        "agreement_tolerance": AGREEMENT_TOLERANCE,
        "mean_abs_rel_diff": float(np.mean(rel)) if rel else 0.0,
    }


def run_compare(args) -> int:
    cfg = config_from_args(args)
    buf = _load(args)
    cfg = effective_config(buf, cfg)
    result = analyze(buf, cfg)
    pitch_frames = frame_signal(buf, cfg.pitch_window, cfg.pitch_hop)
    formant_frames = frame_signal(buf, cfg.formant_window, cfg.formant_hop)
    records = []
    for i, (p, fr) in enumerate(zip(result.pitch, pitch_frames)):
        c = cepstral_pitch(fr, cfg)
        j = aligned_formant_index(fr.start_sample, cfg, len(formant_frames))
        fd = result.formants[j].formants_hz if j is not None else ()
        fc = cepstral_formants(formant_frames[j], cfg).formants_hz if j is not None else ()
        rec = {
            "frame_index": i,
            "time_s": p.time_s,
            "voiced_dwt": p.voiced,
            "voiced_cepstrum": c.voiced,
            "f0_dwt": p.f0_hz,
            "f0_cepstrum": c.f0_hz,
        }
        for k in range(3):
            rec[f"f{k + 1}_dwt"] = fd[k] if k < len(fd) else None
            rec[f"f{k + 1}_cepstrum"] = fc[k] if k < len(fc) else None
        records.append(rec)
    summary = compare_summary(records)
    _write_records(args.output, args.format, COMPARE_COLUMNS, records,
                   {"config": cfg.to_dict(), "sample_rate_hz": buf.sample_rate_hz,
                    "summary": {k: _json_value(v) for k, v in summary.items()}})
    if args.format == "csv" and args.output != "-":
        with open(args.output + ".summary.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(json.dumps(summary, sort_keys=True), file=sys.stderr if args.output == "-" else sys.stdout)
    return 0


def run_synth(args) -> int:
    if args.output == "-":
        raise CliError("synth needs --output PATH for the WAV file")
    fs = args.sample_rate
    if args.noise_only:
        buf = white_noise(args.duration, fs, args.seed)
    else:
        spec = VowelSpec(args.f0, tuple(args.formants), tuple(args.bandwidths),
                         args.duration, args.gain, args.seed)
        buf = synth_vowel(spec, fs)
        if not math.isinf(args.snr):
            buf = add_noise(buf, args.snr, args.seed)
    try:
        write_wav(args.output, buf)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc.strerror}")
    return 0


def bands_table(fs: float, levels: int) -> list[tuple[str, float, float]]:
    rows = [(str(s), b.low_hz, b.high_hz) for s in range(1, levels + 1) for b in [scale_band(s, fs)]]
    a = approx_band(levels, fs)
    rows.append((f"{a.scale}+", a.low_hz, a.high_hz))
    return rows


def run_bands(args) -> int:
    levels = 9
    for kind, v in args.levels:
        levels = int(v)
    if levels < 1:
        raise CliError("--levels must be >= 1")
    out = ["scale\tlow_hz\thigh_hz"]
    for label, lo, hi in bands_table(args.sample_rate, levels):
        out.append(f"{label}\t{lo:.10g}\t{hi:.10g}")
    sys.stdout.write("\n".join(out) + "\n")
    return 0


COMMANDS = {"analyze": run_analyze, "compare": run_compare, "synth": run_synth, "bands": run_bands}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    try:
        return COMMANDS[args.mode](args)
    except FileNotFoundError as exc:
        log.error("%s", exc)
    except WavError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
    except (ConfigurationError, InvalidArgumentError, CliError) as exc:
        log.error("%s", exc)
    except OSError as exc:
        log.error("I/O error: %s", exc)
    return 1


if __name__ == "__main__":
    sys.exit(main())
