import struct
import wave

import numpy as np
import pytest

from wavepitch.dsp import SampleBuffer
from wavepitch.errors import ChannelSelectionError, MalformedWavError, UnsupportedEncodingError
from wavepitch.wavio import read_wav, write_wav


def _riff(fmt_body: bytes, data: bytes, extra: bytes = b"") -> bytes:
    chunks = b"fmt " + struct.pack("<I", len(fmt_body)) + fmt_body + extra
    chunks += b"data" + struct.pack("<I", len(data)) + data
    return b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks


def _fmt(tag, channels, rate, bits):
    align = channels * bits // 8
    return struct.pack("<HHIIHH", tag, channels, rate, rate * align, align, bits)


def _pcm16_file(tmp_path, values, channels=1, rate=8000):
    with wave.open(str(tmp_path / "x.wav"), "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(np.asarray(values, dtype="<i2").tobytes())
    return tmp_path / "x.wav"


def test_pcm16_normalisation(tmp_path):
    buf = read_wav(_pcm16_file(tmp_path, [32767, -32768, 0, 16384]))
    np.testing.assert_allclose(buf.samples, [32767 / 32768, -1.0, 0.0, 0.5])
    assert buf.sample_rate_hz == 8000.0


def test_float32(tmp_path):
    vals = np.array([0.25, -0.5, 1.0], dtype="<f4")
    p = tmp_path / "f.wav"
    p.write_bytes(_riff(_fmt(3, 1, 44100, 32), vals.tobytes()))
    buf = read_wav(p)
    np.testing.assert_array_equal(buf.samples, [0.25, -0.5, 1.0])
    assert buf.sample_rate_hz == 44100.0


def test_extensible_float_and_extra_chunks(tmp_path):
    body = _fmt(0xFFFE, 1, 16000, 32) + struct.pack("<HHI", 22, 32, 0) + struct.pack("<H", 3) + b"\0" * 14
    extra = b"LIST" + struct.pack("<I", 3) + b"abc" + b"\0"
    p = tmp_path / "e.wav"
    p.write_bytes(_riff(body, np.array([0.5], "<f4").tobytes(), extra))
    np.testing.assert_array_equal(read_wav(p).samples, [0.5])


def test_stereo_requires_channel(tmp_path):
    p = _pcm16_file(tmp_path, [1000, -1000, 2000, -2000], channels=2)
    with pytest.raises(ChannelSelectionError, match="channel"):
        read_wav(p)
    np.testing.assert_allclose(read_wav(p, channel=1).samples * 32768, [-1000, -2000])
    with pytest.raises(ChannelSelectionError):
        read_wav(p, channel=2)


def test_mono_rejects_other_channel(tmp_path):
    with pytest.raises(ChannelSelectionError):
        read_wav(_pcm16_file(tmp_path, [0, 1]), channel=1)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_wav(tmp_path / "nope.wav")


@pytest.mark.parametrize("blob", [
    b"", b"RIFF", b"RIFX\0\0\0\0WAVE", b"RIFF\x10\0\0\0WAVEfmt \x10\0\0\0\x01\0",
])
def test_malformed(tmp_path, blob):
    p = tmp_path / "bad.wav"
    p.write_bytes(blob)
    with pytest.raises(MalformedWavError):
        read_wav(p)


def test_missing_data_chunk(tmp_path):
    body = _fmt(1, 1, 8000, 16)
    p = tmp_path / "nodata.wav"
    p.write_bytes(b"RIFF" + struct.pack("<I", 28) + b"WAVE" + b"fmt " + struct.pack("<I", 16) + body)
    with pytest.raises(MalformedWavError, match="data"):
        read_wav(p)


@pytest.mark.parametrize("tag,bits", [(1, 8), (1, 24), (3, 64), (6, 8)])
def test_unsupported(tmp_path, tag, bits):
    p = tmp_path / "u.wav"
    p.write_bytes(_riff(_fmt(tag, 1, 8000, bits), b"\0" * 24))
    with pytest.raises(UnsupportedEncodingError):
        read_wav(p)


def test_round_trip_and_clipping(tmp_path):
    x = np.array([0.0, 0.5, -0.25, 1.5, -2.0])
    write_wav(tmp_path / "r.wav", SampleBuffer(x, 20000.0))
    buf = read_wav(tmp_path / "r.wav")
    np.testing.assert_allclose(buf.samples, [0.0, 0.5, -0.25, 32767 / 32768, -1.0])
    assert buf.sample_rate_hz == 20000.0


def test_empty_file_round_trip(tmp_path):
    write_wav(tmp_path / "z.wav", SampleBuffer(np.zeros(0), 20000.0))
    assert len(read_wav(tmp_path / "z.wav")) == 0
