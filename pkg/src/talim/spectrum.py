"""Framed magnitude spectra, the long term average spectrum, and RMS envelopes."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from os import PathLike

import numpy as np
from scipy.signal import get_window

from .errors import BadFrameLength, ClipTooShort
from .signal_io import AudioClip

DB_FLOOR = -120.0

_WINDOW_ALIASES = {"rect": "boxcar", "rectangular": "boxcar", "none": "boxcar", "hanning": "hann"}


@dataclass(frozen=True)
class SpectrumConfig:
    frame_size: int = 4096
    hop: int = 2048
    window: str = "hann"

    def __post_init__(self):
        n = self.frame_size
        if n < 8 or n & (n - 1):
            raise BadFrameLength(f"frame_size must be a power of two >= 8, got {n}")
        if not 0 < self.hop <= n:
            raise ValueError(f"hop must satisfy 0 < hop <= frame_size, got {self.hop}")
        window_samples(self.window, 8)  # reject unknown window names early


@dataclass(frozen=True)
class Ltas:
    """Bin-wise average of linear frame magnitudes.

    ``magnitudes`` keeps the linear average; ``magnitudes_db`` is the floored
    dB view used for display and peak picking.
    """

    bin_freqs: np.ndarray
    magnitudes: np.ndarray
    frame_count: int
    sample_rate: int
    window: str = "hann"

    @property
    def magnitudes_db(self) -> np.ndarray:
        return to_db(self.magnitudes)

    @property
    def bin_width(self) -> float:
        return float(self.bin_freqs[1] - self.bin_freqs[0])

    @property
    def nyquist(self) -> float:
        return self.sample_rate / 2.0

    def to_csv(self, path: str | PathLike) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["freq_hz", "magnitude_db"])
            for f, m in zip(self.bin_freqs, self.magnitudes_db):
                w.writerow([repr(float(f)), repr(float(m))])


@dataclass(frozen=True)
class Envelope:
    times: np.ndarray
    rms_values: np.ndarray


def to_db(linear) -> np.ndarray:
    lin = np.asarray(linear, dtype=np.float64)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(lin)
    return np.maximum(db, DB_FLOOR)


def window_name(window) -> str:
    if not isinstance(window, str):
        return "custom"
    return _WINDOW_ALIASES.get(window.lower(), window.lower())


def window_samples(window, n: int) -> np.ndarray:
    """Periodic (DFT-even) window of length ``n``; arrays pass through."""
    if isinstance(window, str):
        name = window_name(window)
        try:
            return get_window(name, n, fftbins=True)
        except ValueError as exc:
            raise ValueError(f"unknown window {window!r}") from exc
    w = np.asarray(window, dtype=np.float64)
    if w.shape != (n,):
        raise ValueError(f"window length {w.shape} does not match frame length {n}")
    return w


def magnitude_spectrum(frame, window="rectangular") -> np.ndarray:
    """One-sided DFT magnitudes scaled by ``2 / sum(window)``.

    A full-scale sine centred on a bin reports its amplitude there.
    Returns ``N // 2 + 1`` values.
    """
    x = np.asarray(frame, dtype=np.float64)
    n = x.size
    if x.ndim != 1 or n < 8 or n & (n - 1):
        raise BadFrameLength(f"frame length must be a power of two >= 8, got {x.shape}")
    w = window_samples(window, n)
    return np.abs(np.fft.rfft(x * w)) * (2.0 / np.sum(w))


def frame_starts(length: int, frame_size: int, hop: int) -> np.ndarray:
    # incomplete trailing frames are dropped
    if length < frame_size:
        return np.empty(0, dtype=np.int64)
    return np.arange(0, length - frame_size + 1, hop)


def frame_spectra(clip: AudioClip, cfg: SpectrumConfig) -> np.ndarray:
    """Matrix of per-frame magnitude spectra, shape (frames, N//2+1)."""
    starts = frame_starts(len(clip), cfg.frame_size, cfg.hop)
    if starts.size == 0:
        raise ClipTooShort(
            f"clip has {len(clip)} samples, fewer than frame_size {cfg.frame_size}")
    w = window_samples(cfg.window, cfg.frame_size)
    idx = starts[:, None] + np.arange(cfg.frame_size)[None, :]
    frames = clip.samples[idx] * w
    return np.abs(np.fft.rfft(frames, axis=1)) * (2.0 / np.sum(w))


def average_spectra(spectra: np.ndarray, frame_size: int, sample_rate: int,
                    window: str = "hann") -> Ltas:
    spectra = np.asarray(spectra, dtype=np.float64)
    freqs = np.arange(frame_size // 2 + 1) * (sample_rate / frame_size)
    mean = np.sum(spectra, axis=0) / spectra.shape[0]
    return Ltas(freqs, mean, spectra.shape[0], sample_rate, window_name(window))


def compute_ltas(clip: AudioClip, cfg: SpectrumConfig | None = None) -> Ltas:
    """Long term average spectrum of ``clip``.

    Every complete frame is windowed, transformed, and its linear magnitude
    averaged bin by bin.
    """
    cfg = cfg or SpectrumConfig()
    return average_spectra(frame_spectra(clip, cfg), cfg.frame_size, clip.sample_rate, cfg.window)


def compute_envelope(clip: AudioClip, window_ms: float = 10.0, hop_ms: float = 1.0) -> Envelope:
    """Sliding-window RMS, each value stamped with its window's start time.

    Window length may be fractional in samples: the cumulative energy is
    linearly interpolated at the window end.
    """
    if not window_ms >= hop_ms > 0:
        raise ValueError("need window_ms >= hop_ms > 0")
    sr = clip.sample_rate
    win = window_ms * sr / 1000.0
    hop = max(1, int(round(hop_ms * sr / 1000.0)))
    n = len(clip)
    if n < win:
        raise ClipTooShort(f"clip has {n} samples, window needs {win:.1f}")
    x = clip.samples
    energy = np.concatenate(([0.0], np.cumsum(x * x)))
    starts = np.arange(0, int(np.floor(n - win)) + 1, hop)
    ends = starts + win
    total = np.interp(ends, np.arange(n + 1), energy) - energy[starts]
    rms = np.sqrt(np.maximum(total, 0.0) / win)
    return Envelope(starts / sr, rms)
