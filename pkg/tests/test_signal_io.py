import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import wav_bytes
from talim.errors import (
    InvalidClip,
    IoFailure,
    MultiChannel,
    NotWav,
    TruncatedData,
    UnsupportedEncoding,
)
from talim.signal_io import AudioClip, decode_wav, encode_wav, load_wav, write_wav


def pcm16(values):
    return struct.pack(f"<{len(values)}h", *values)


class TestAudioClip:
    def test_rejects_empty(self):
        with pytest.raises(InvalidClip):
            AudioClip(np.array([]), 44100)

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidClip):
            AudioClip(np.array([0.0, 1.5]), 44100)

    def test_rejects_nan(self):
        with pytest.raises(InvalidClip):
            AudioClip(np.array([0.0, np.nan]), 44100)

    @pytest.mark.parametrize("rate", [0, -8000, 44100.5])
    def test_rejects_bad_rate(self, rate):
        with pytest.raises(InvalidClip):
            AudioClip(np.zeros(4), rate)

    def test_samples_read_only(self):
        clip = AudioClip(np.zeros(4), 8000)
        with pytest.raises(ValueError):
            clip.samples[0] = 0.5

    def test_duration(self):
        assert AudioClip(np.zeros(22050), 44100).duration == 0.5


class TestDecode:
    def test_pcm16_scaling_endpoints(self):
        clip = decode_wav(wav_bytes(pcm16([32767, -32768, 0, 16384])))
        assert clip.samples[0] == pytest.approx(32767 / 32768)
        assert clip.samples[1] == -1.0
        assert clip.samples[2] == 0.0
        assert clip.samples[3] == 0.5

    def test_one_second_file(self):
        clip = decode_wav(wav_bytes(pcm16([0] * 44100)))
        assert len(clip) == 44100
        assert clip.sample_rate == 44100
        assert clip.duration == 1.0

    def test_sample_rate_preserved(self):
        assert decode_wav(wav_bytes(pcm16([1, 2]), rate=22050)).sample_rate == 22050

    def test_float32(self):
        payload = struct.pack("<3f", 0.25, -0.5, 1.0)
        clip = decode_wav(wav_bytes(payload, tag=3, bits=32))
        np.testing.assert_array_equal(clip.samples, [0.25, -0.5, 1.0])

    def test_float_is_clamped(self):
        payload = struct.pack("<2d", 1.5, -3.0)
        clip = decode_wav(wav_bytes(payload, tag=3, bits=64))
        np.testing.assert_array_equal(clip.samples, [1.0, -1.0])

    def test_pcm24(self):
        vals = [1 << 22, -(1 << 23), -1]
        payload = b"".join(v.to_bytes(3, "little", signed=True) for v in vals)
        clip = decode_wav(wav_bytes(payload, bits=24))
        np.testing.assert_allclose(clip.samples, [0.5, -1.0, -1 / (1 << 23)])

    def test_pcm8(self):
        clip = decode_wav(wav_bytes(bytes([128, 0, 192]), bits=8))
        np.testing.assert_allclose(clip.samples, [0.0, -1.0, 0.5])

    def test_extensible_pcm(self):
        clip = decode_wav(wav_bytes(pcm16([16384]), extensible=True))
        assert clip.samples[0] == 0.5

    def test_skips_unknown_chunks(self):
        raw = wav_bytes(pcm16([100, 200]))
        extra = b"LIST" + struct.pack("<I", 3) + b"abc\x00"
        raw = raw[:12] + extra + raw[12:]
        clip = decode_wav(raw)
        assert len(clip) == 2

    def test_not_wav(self):
        with pytest.raises(NotWav):
            decode_wav(b"RIFX\x00\x00\x00\x00WAVEjunk")

    def test_missing_fmt(self):
        with pytest.raises(NotWav):
            decode_wav(b"RIFF" + struct.pack("<I", 4) + b"WAVE")

    def test_compressed_rejected(self):
        with pytest.raises(UnsupportedEncoding):
            decode_wav(wav_bytes(b"\x00\x00", tag=2))  # ADPCM

    def test_extensible_compressed_rejected(self):
        with pytest.raises(UnsupportedEncoding):
            decode_wav(wav_bytes(b"\x00\x00", tag=0x55, extensible=True))

    def test_stereo_rejected(self):
        with pytest.raises(MultiChannel):
            decode_wav(wav_bytes(pcm16([0, 0, 1, 1]), channels=2))

    def test_declared_length_exceeds_data(self):
        with pytest.raises(TruncatedData):
            decode_wav(wav_bytes(pcm16([1, 2]), data_size=400))

    def test_partial_sample(self):
        with pytest.raises(TruncatedData):
            decode_wav(wav_bytes(pcm16([1, 2]) + b"\x01"))

    def test_deterministic(self):
        raw = wav_bytes(pcm16(list(range(-50, 50))))
        a, b = decode_wav(raw), decode_wav(raw)
        np.testing.assert_array_equal(a.samples, b.samples)


class TestWriteRead:
    def test_ramp_round_trip(self, tmp_path):
        clip = AudioClip(np.linspace(-1, 1, 100), 44100)
        write_wav(clip, tmp_path / "ramp.wav")
        back = load_wav(tmp_path / "ramp.wav")
        assert back.sample_rate == 44100
        assert np.max(np.abs(back.samples - clip.samples)) <= 1 / 32768

    def test_float32_round_trip(self, tmp_path):
        clip = AudioClip(np.linspace(-1, 1, 33), 48000)
        write_wav(clip, tmp_path / "f.wav", encoding="float32")
        np.testing.assert_allclose(load_wav(tmp_path / "f.wav").samples, clip.samples, atol=1e-7)

    def test_empty_clip_never_reaches_write(self):
        with pytest.raises(InvalidClip):
            AudioClip(np.zeros(0), 44100)
        with pytest.raises(InvalidClip):
            write_wav(np.zeros(0), "unused.wav")

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoFailure):
            load_wav(tmp_path / "absent.wav")

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(IoFailure):
            write_wav(AudioClip(np.zeros(3), 8000), tmp_path / "no" / "such" / "x.wav")

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, st.integers(1, 500), elements=st.floats(-1, 1)),
           st.sampled_from([8000, 22050, 44100, 96000]))
    def test_round_trip_within_one_lsb(self, samples, rate):
        clip = AudioClip(samples, rate)
        back = decode_wav(encode_wav(clip))
        assert back.sample_rate == rate
        assert np.max(np.abs(back.samples - clip.samples)) <= 1 / 32768
