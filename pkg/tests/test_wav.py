import struct

import numpy as np
import pytest

from ancbench.errors import TruncatedDataError, UnsupportedCodecError, WavHeaderError
from ancbench.signals import Signal
from ancbench.wav import decode_wav, quantize, wav_read, wav_write


def riff(*chunks, form=b"WAVE"):
    body = form + b"".join(cid + struct.pack("<I", len(data)) + data + b"\0" * (len(data) & 1) for cid, data in chunks)
    return b"RIFF" + struct.pack("<I", len(body)) + body


def fmt_chunk(tag=1, channels=1, rate=8000, bits=16):
    align = channels * bits // 8
    return b"fmt ", struct.pack("<HHIIHH", tag, channels, rate, rate * align, align, bits)


def pcm(*codes):
    return b"data", np.array(codes, dtype="<i2").tobytes()


class TestRoundTrip:
    def test_random_signals_within_one_lsb(self, tmp_path):
        rng = np.random.default_rng(3)
        path = tmp_path / "x.wav"
        for _ in range(50):
            s = Signal(rng.uniform(-1, 1, rng.integers(0, 400)), int(rng.choice([8000, 16000, 44100])))
            wav_write(path, s)
            back = wav_read(path)
            assert back.sample_rate == s.sample_rate
            assert len(back) == len(s)
            if len(s):
                assert np.max(np.abs(back.samples - s.samples)) <= 1 / 32768

    def test_full_scale_code(self, tmp_path):
        path = tmp_path / "max.wav"
        path.write_bytes(riff(fmt_chunk(), pcm(0x7FFF, -0x8000, 0)))
        assert wav_read(path).samples.tolist() == [32767 / 32768, -1.0, 0.0]
        wav_write(path, Signal([32767 / 32768, -1.0, 1.0], 8000))
        assert wav_read(path).samples.tolist() == [32767 / 32768, -1.0, 32767 / 32768]

    def test_quantize_clips(self):
        assert quantize([2.0, -3.0, 0.5]).tolist() == [32767, -32768, 16384]

    def test_stereo_is_averaged(self):
        s = decode_wav(riff(fmt_chunk(channels=2), pcm(100, 300, -200, 0)))
        assert s.samples.tolist() == [200 / 32768, -100 / 32768]

    def test_skips_unknown_chunks(self):
        s = decode_wav(riff(fmt_chunk(), (b"LIST", b"abc"), pcm(1, 2)))
        assert len(s) == 2

    def test_writer_output_matches_reader(self, tmp_path):
        path = tmp_path / "w.wav"
        wav_write(path, Signal([0.0, 0.25, -0.5], 22050))
        raw = path.read_bytes()
        assert raw[:4] == b"RIFF" and raw[8:12] == b"WAVE"
        assert decode_wav(raw).sample_rate == 22050


class TestErrors:
    def test_not_a_wav(self, tmp_path):
        path = tmp_path / "notes.txt"
        path.write_text("hello, this is not audio at all")
        with pytest.raises(WavHeaderError) as info:
            wav_read(path)
        assert info.value.chunk == "RIFF"

    def test_wrong_form_type(self):
        with pytest.raises(WavHeaderError, match="RIFF"):
            decode_wav(riff(fmt_chunk(), pcm(1), form=b"AVI "))

    def test_too_short(self):
        with pytest.raises(WavHeaderError):
            decode_wav(b"RIF")

    def test_float_codec(self):
        with pytest.raises(UnsupportedCodecError) as info:
            decode_wav(riff(fmt_chunk(tag=3, bits=32), pcm(1, 2)))
        assert info.value.chunk == "fmt "

    def test_eight_bit(self):
        with pytest.raises(UnsupportedCodecError, match="16-bit"):
            decode_wav(riff(fmt_chunk(bits=8), pcm(1)))

    def test_truncated_data(self):
        buf = riff(fmt_chunk(), pcm(1, 2, 3, 4))
        with pytest.raises(TruncatedDataError) as info:
            decode_wav(buf[:-3])
        assert info.value.chunk == "data"

    def test_missing_data(self):
        with pytest.raises(WavHeaderError) as info:
            decode_wav(riff(fmt_chunk()))
        assert info.value.chunk == "data"

    def test_data_before_fmt(self):
        with pytest.raises(WavHeaderError, match="before fmt"):
            decode_wav(riff(pcm(1), fmt_chunk()))

    def test_missing_file_is_os_error(self, tmp_path):
        with pytest.raises(OSError):
            wav_read(tmp_path / "absent.wav")
