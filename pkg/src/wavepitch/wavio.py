"""Minimal RIFF/WAVE reader (PCM16, float32) and PCM16 writer."""
from __future__ import annotations

import os
import struct
import wave
from typing import Optional

import numpy as np

from .dsp import SampleBuffer
from .errors import ChannelSelectionError, MalformedWavError, UnsupportedEncodingError

_PCM = 1
_FLOAT = 3
_EXTENSIBLE = 0xFFFE


def _chunks(data: bytes, path):
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size and cid != b"data":
            raise MalformedWavError(f"{path}: chunk {cid!r} is truncated")
        yield cid, body
        pos += 8 + size + (size & 1)


def read_wav(path, channel: Optional[int] = None) -> SampleBuffer:
    """Read a mono (or one selected channel of a multi-channel) WAV file.

    PCM16 is scaled by 1/32768, so -32768 maps to -1.0; float32 is
    returned as stored.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"{path}: no such file")
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWavError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    for cid, body in _chunks(data, path):
        if cid == b"fmt ":
            if len(body) < 16:
                raise MalformedWavError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body)
            if fmt[0] == _EXTENSIBLE:
                if len(body) < 26:
                    raise MalformedWavError(f"{path}: extensible fmt chunk too short")
                fmt = (struct.unpack_from("<H", body, 24)[0],) + fmt[1:]
        elif cid == b"data":
            payload = body
            break
    if fmt is None:
        raise MalformedWavError(f"{path}: missing fmt chunk")
    if payload is None:
        raise MalformedWavError(f"{path}: missing data chunk")

    tag, n_channels, rate, _, block_align, bits = fmt
    if n_channels < 1 or rate < 1:
        raise MalformedWavError(f"{path}: invalid channel count or sample rate")
    if tag == _PCM and bits == 16:
        dtype, scale = np.dtype("<i2"), 1.0 / 32768.0
    elif tag == _FLOAT and bits == 32:
        dtype, scale = np.dtype("<f4"), 1.0
    else:
        raise UnsupportedEncodingError(
            f"{path}: unsupported encoding (format tag {tag}, {bits} bits); "
            "only 16-bit PCM and 32-bit float are read"
        )

    frame_bytes = dtype.itemsize * n_channels
    usable = len(payload) - len(payload) % frame_bytes
    samples = np.frombuffer(payload[:usable], dtype=dtype).reshape(-1, n_channels)
    if n_channels > 1:
        if channel is None:
            raise ChannelSelectionError(
                f"{path}: file has {n_channels} channels; select one with --channel"
            )
        if not 0 <= channel < n_channels:
            raise ChannelSelectionError(f"{path}: channel {channel} out of range 0..{n_channels - 1}")
        mono = samples[:, channel]
    else:
        if channel not in (None, 0):
            raise ChannelSelectionError(f"{path}: mono file has no channel {channel}")
        mono = samples[:, 0]
    return SampleBuffer(mono.astype(float) * scale, float(rate))


def write_wav(path, buffer: SampleBuffer) -> None:
    """Write ``buffer`` as mono 16-bit PCM, clipping to the representable range."""
    pcm = np.clip(np.round(buffer.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(round(buffer.sample_rate_hz)))
        w.writeframes(pcm.tobytes())
