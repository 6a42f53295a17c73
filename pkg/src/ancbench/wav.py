"""16-bit PCM WAV codec.

Reading is done by hand so that malformed files produce errors naming the
offending chunk; writing goes through the standard :mod:`wave` module.
Quantisation convention: int16 ``k`` <-> float ``k / 32768``.
"""
from __future__ import annotations

import struct
import wave

import numpy as np

from .errors import TruncatedDataError, UnsupportedCodecError, WavHeaderError
from .signals import Signal

SCALE = 32768.0
_PCM = 1
_EXTENSIBLE = 0xFFFE


def _chunks(buf: bytes):
    pos = 12
    while pos < len(buf):
        if pos + 8 > len(buf):
            raise TruncatedDataError("incomplete chunk header", chunk=f"@{pos}")
        cid = buf[pos : pos + 4]
        (size,) = struct.unpack_from("<I", buf, pos + 4)
        name = cid.decode("latin-1")
        body = buf[pos + 8 : pos + 8 + size]
        yield name, body, size
        pos += 8 + size + (size & 1)


def decode_wav(buf: bytes) -> Signal:
    if len(buf) < 12:
        raise WavHeaderError("file too short for a RIFF header", chunk="RIFF")
    if buf[0:4] != b"RIFF":
        raise WavHeaderError("missing RIFF signature", chunk="RIFF")
    if buf[8:12] != b"WAVE":
        raise WavHeaderError("RIFF form type is not WAVE", chunk="RIFF")

    fmt = None
    for name, body, size in _chunks(buf):
        if name == "fmt ":
            if len(body) < size:
                raise TruncatedDataError("chunk ends early", chunk="fmt ")
            if size < 16:
                raise WavHeaderError(f"fmt chunk too small ({size} bytes)", chunk="fmt ")
            tag, channels, rate, _, block_align, bits = struct.unpack_from("<HHIIHH", body)
            if tag == _EXTENSIBLE and size >= 40:
                tag = struct.unpack_from("<H", body, 24)[0]
            if tag != _PCM:
                raise UnsupportedCodecError(f"format tag {tag:#06x} is not PCM", chunk="fmt ")
            if bits != 16:
                raise UnsupportedCodecError(f"{bits}-bit samples are not supported (16-bit only)", chunk="fmt ")
            if channels < 1 or rate < 1:
                raise WavHeaderError(f"invalid channels={channels} rate={rate}", chunk="fmt ")
            if block_align != 2 * channels:
                raise WavHeaderError(f"block align {block_align} inconsistent with {channels} channels", chunk="fmt ")
            fmt = (channels, rate)
        elif name == "data":
            if fmt is None:
                raise WavHeaderError("data chunk before fmt chunk", chunk="data")
            channels, rate = fmt
            if len(body) < size:
                raise TruncatedDataError(f"declared {size} bytes, found {len(body)}", chunk="data")
            frame = 2 * channels
            if size % frame:
                raise TruncatedDataError(f"{size} bytes is not a whole number of frames", chunk="data")
            ints = np.frombuffer(body, dtype="<i2").astype(np.float64)
            frames = ints.reshape(-1, channels)
            samples = frames.mean(axis=1) if channels > 1 else frames[:, 0]
            return Signal(samples / SCALE, rate)
    if fmt is None:
        raise WavHeaderError("no fmt chunk", chunk="fmt ")
    raise WavHeaderError("no data chunk", chunk="data")


def wav_read(path) -> Signal:
    """Read a 16-bit PCM WAV file; multi-channel audio is averaged to mono."""
    with open(path, "rb") as fh:
        return decode_wav(fh.read())


def quantize(samples) -> np.ndarray:
    """Clip to [-1, 1] and round to int16 codes."""
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    return np.clip(np.rint(x * SCALE), -32768, 32767).astype("<i2")


def wav_write(path, signal: Signal) -> None:
    """Write ``signal`` as mono 16-bit PCM."""
    codes = quantize(signal.samples)
    with open(path, "wb") as raw, wave.open(raw, "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(signal.sample_rate)
        fh.writeframes(codes.tobytes())
