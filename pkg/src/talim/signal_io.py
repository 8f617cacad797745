"""WAV decoding/encoding into normalized mono sample buffers.

Only RIFF/WAVE with integer PCM or IEEE float samples is understood.
Multi-channel files are rejected instead of being downmixed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from os import PathLike

import numpy as np

from .errors import (
    InvalidClip,
    IoFailure,
    MultiChannel,
    NotWav,
    TruncatedData,
    UnsupportedEncoding,
)

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

DEFAULT_SAMPLE_RATE = 44100


@dataclass(frozen=True)
class AudioClip:
    """Mono samples in [-1, 1] with their sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int
    source_id: str = field(default="")

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64).ravel()
        if x.size == 0:
            raise InvalidClip("clip has no samples")
        if not np.all(np.isfinite(x)):
            raise InvalidClip("clip contains non-finite samples")
        if np.max(np.abs(x)) > 1.0:
            raise InvalidClip("samples must lie in [-1, 1]")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise InvalidClip(f"bad sample rate {self.sample_rate!r}")
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def scaled(self, gain: float) -> AudioClip:
        return AudioClip(self.samples * gain, self.sample_rate, self.source_id)


def _decode_format(fmt: bytes) -> tuple[int, int, int, int, int]:
    if len(fmt) < 16:
        raise NotWav("fmt chunk too short")
    tag, channels, rate, _byte_rate, block_align, bits = struct.unpack_from("<HHIIHH", fmt)
    if tag == WAVE_FORMAT_EXTENSIBLE:
        if len(fmt) < 40:
            raise NotWav("extensible fmt chunk too short")
        # the sub-format GUID starts with the plain format tag
        (tag,) = struct.unpack_from("<H", fmt, 24)
    return tag, channels, rate, block_align, bits


def _pcm_to_float(raw: bytes, tag: int, bits: int) -> np.ndarray:
    if tag == WAVE_FORMAT_PCM:
        if bits == 8:
            return (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
        if bits == 16:
            return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
        if bits == 24:
            b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
            v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
            v = np.where(v >= 1 << 23, v - (1 << 24), v)
            return v.astype(np.float64) / float(1 << 23)
        if bits == 32:
            return np.frombuffer(raw, dtype="<i4").astype(np.float64) / float(1 << 31)
    elif tag == WAVE_FORMAT_IEEE_FLOAT:
        if bits in (32, 64):
            dtype = "<f4" if bits == 32 else "<f8"
            x = np.frombuffer(raw, dtype=dtype).astype(np.float64)
            return np.clip(x, -1.0, 1.0)
    else:
        raise UnsupportedEncoding(f"WAV format tag 0x{tag:04x} is not PCM or IEEE float")
    raise UnsupportedEncoding(f"{bits}-bit samples are not supported for format 0x{tag:04x}")


def decode_wav(data: bytes, source_id: str = "") -> AudioClip:
    """Decode WAV bytes; see :func:`load_wav`."""
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise NotWav(f"{source_id or 'input'}: missing RIFF/WAVE magic")

    fmt = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = pos + 8
        if chunk_id == b"fmt ":
            fmt = _decode_format(data[body:body + size])
        elif chunk_id == b"data":
            if fmt is None:
                raise NotWav("data chunk precedes fmt chunk")
            tag, channels, rate, block_align, bits = fmt
            if tag not in (WAVE_FORMAT_PCM, WAVE_FORMAT_IEEE_FLOAT):
                raise UnsupportedEncoding(f"WAV format tag 0x{tag:04x} is not PCM or IEEE float")
            if channels != 1:
                raise MultiChannel(f"{channels} channels; only mono input is accepted")
            if block_align <= 0 or block_align * 8 != bits:
                raise UnsupportedEncoding(f"block align {block_align} inconsistent with {bits} bits")
            if size > len(data) - body:
                raise TruncatedData(
                    f"data chunk declares {size} bytes but only {len(data) - body} present")
            if size % block_align:
                raise TruncatedData(f"data length {size} is not a multiple of block align {block_align}")
            if size == 0:
                raise TruncatedData("data chunk is empty")
            samples = _pcm_to_float(data[body:body + size], tag, bits)
            return AudioClip(samples, rate, source_id)
        pos = body + size + (size & 1)

    if fmt is None:
        raise NotWav("no fmt chunk")
    raise TruncatedData("no data chunk")


def load_wav(path: str | PathLike) -> AudioClip:
    """Read a mono WAV file into an :class:`AudioClip`.

    Integer PCM is scaled by ``2**(bits-1)`` (so 16-bit values land in
    [-1, 1)), float samples are clamped to [-1, 1].
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return decode_wav(data, source_id=str(path))


def encode_wav(clip: AudioClip, encoding: str = "pcm16") -> bytes:
    if encoding == "pcm16":
        q = np.clip(np.round(clip.samples * 32768.0), -32768, 32767).astype("<i2")
        tag, bits = WAVE_FORMAT_PCM, 16
    elif encoding == "float32":
        q = clip.samples.astype("<f4")
        tag, bits = WAVE_FORMAT_IEEE_FLOAT, 32
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    block_align = bits // 8
    payload = q.tobytes()
    fmt = struct.pack("<HHIIHH", tag, 1, clip.sample_rate,
                      clip.sample_rate * block_align, block_align, bits)
    header = b"RIFF" + struct.pack("<I", 4 + 8 + len(fmt) + 8 + len(payload)) + b"WAVE"
    return (header + b"fmt " + struct.pack("<I", len(fmt)) + fmt
            + b"data" + struct.pack("<I", len(payload)) + payload)


def write_wav(clip: AudioClip, path: str | PathLike, encoding: str = "pcm16") -> None:
    """Write ``clip`` as a mono WAV file (16-bit PCM unless ``encoding='float32'``)."""
    if not isinstance(clip, AudioClip):
        raise InvalidClip("write_wav expects an AudioClip")
    data = encode_wav(clip, encoding)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
