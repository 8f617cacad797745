"""Pitch estimation, LTAS peak picking and harmonic partial extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClipTooShort, F0OutOfRange, NoPeaks, NoPitch
from .signal_io import AudioClip
from .spectrum import Ltas

DEFAULT_FMIN = 80.0
DEFAULT_FMAX = 1000.0
DEFAULT_MAX_PARTIALS = 10
DEFAULT_MIN_SEPARATION = 50.0
DEFAULT_THRESHOLD_DB = 40.0

PITCH_SEGMENT_SECONDS = 0.5
MIN_PITCH_CORRELATION = 0.3
ACF_OVERSAMPLE = 8

_TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class Peak:
    freq: float
    magnitude_db: float


@dataclass(frozen=True)
class HarmonicSeries:
    """Fundamental plus contiguous partials ``k = 1..K``."""

    f0: float
    indices: np.ndarray
    freqs: np.ndarray
    amps: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        freqs = np.asarray(self.freqs, dtype=np.float64)
        amps = np.asarray(self.amps, dtype=np.float64)
        if not (idx.shape == freqs.shape == amps.shape) or idx.ndim != 1:
            raise ValueError("indices, freqs and amps must be 1-D and equally long")
        if idx.size < 2:
            raise ValueError("a harmonic series needs at least 2 partials")
        if idx[0] != 1 or np.any(np.diff(idx) <= 0):
            raise ValueError("partial indices must increase strictly from 1")
        if np.any(amps < 0):
            raise ValueError("partial amplitudes must be non-negative")
        if self.f0 <= 0:
            raise ValueError("f0 must be positive")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amps(cls, amps, f0: float = 100.0, freqs=None) -> HarmonicSeries:
        amps = np.asarray(amps, dtype=np.float64)
        k = np.arange(1, amps.size + 1)
        return cls(f0, k, k * f0 if freqs is None else freqs, amps)

    @property
    def partials(self) -> list[tuple[int, float, float]]:
        return [(int(k), float(f), float(a)) for k, f, a in zip(self.indices, self.freqs, self.amps)]

    def __len__(self) -> int:
        return self.indices.size


def parabolic_vertex(a: float, b: float, c: float) -> tuple[float, float]:
    """Offset and height of the parabola through (-1, a), (0, b), (1, c)."""
    denom = a - 2.0 * b + c
    if denom == 0:
        return 0.0, b
    p = 0.5 * (a - c) / denom
    return p, b - 0.25 * (a - c) * p


def _hann_kernel(offset: float) -> float:
    # magnitude of the normalized Hann transform ``offset`` bins off centre
    if offset == 0:
        return 1.0
    return abs(np.sinc(offset) / (1.0 - offset * offset))


def interpolate_peak(magnitudes: np.ndarray, i: int, window: str = "hann") -> tuple[float, float]:
    """Sub-bin offset and linear amplitude of the spectral peak at bin ``i``.

    Hann spectra use the exact two-bin ratio of the Hann main lobe, which is
    unbiased for a stationary sinusoid; other windows fall back to the
    three-point parabola on dB magnitudes.
    """
    mag = magnitudes
    b = mag[i]
    if not (0 < i < mag.size - 1) or b <= 0 or b < mag[i - 1] or b < mag[i + 1]:
        return 0.0, float(b)
    a, c = mag[i - 1], mag[i + 1]
    if window == "hann":
        if c >= a:
            ratio = c / b
            offset = min(max((2.0 * ratio - 1.0) / (ratio + 1.0), 0.0), 0.5)
        else:
            ratio = a / b
            offset = -min(max((2.0 * ratio - 1.0) / (ratio + 1.0), 0.0), 0.5)
        return offset, float(b / _hann_kernel(offset))
    db = 20.0 * np.log10(np.maximum([a, b, c], _TINY))
    offset, height = parabolic_vertex(*db)
    return offset, float(10.0 ** (height / 20.0))


def loudest_segment(samples: np.ndarray, length: int) -> np.ndarray:
    if samples.size <= length:
        return samples
    energy = np.concatenate(([0.0], np.cumsum(samples * samples)))
    start = int(np.argmax(energy[length:] - energy[:-length]))
    return samples[start:start + length]


def normalized_autocorrelation(x: np.ndarray, oversample: int = 1) -> np.ndarray:
    """Biased autocorrelation divided by its zero-lag value.

    With ``oversample > 1`` the sequence is band-limited interpolated, so
    entry ``j`` holds the lag ``j / oversample`` samples.
    """
    n = x.size
    nfft = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(x, nfft)
    power = spec.real ** 2 + spec.imag ** 2
    if oversample > 1:
        # the Nyquist bin becomes an interior bin of the longer transform
        power[-1] *= 0.5
    acf = np.fft.irfft(power, nfft * oversample)[:n * oversample]
    if acf[0] <= 0:
        return np.zeros(n * oversample)
    return acf / acf[0]


def estimate_f0(clip: AudioClip, fmin: float = DEFAULT_FMIN, fmax: float = DEFAULT_FMAX) -> float:
    """Fundamental frequency in Hz by normalized autocorrelation.

    The loudest 0.5 s of the clip is autocorrelated on a lag grid eight times
    finer than the sample period, so peak heights at fractional periods
    compare fairly. The highest local maximum with lag in
    ``[1/fmax, 1/fmin]`` wins; the biased estimator tapers with lag, so a
    true period beats its multiples. The winner is then located precisely on
    the window-corrected autocorrelation by parabolic interpolation.

    Raises
    ------
    ClipTooShort
        clip not longer than ``2 / fmin`` seconds.
    NoPitch
        best normalized correlation below 0.3.
    """
    if not 0 < fmin < fmax:
        raise ValueError(f"need 0 < fmin < fmax, got {fmin}, {fmax}")
    sr = clip.sample_rate
    if clip.duration <= 2.0 / fmin:
        raise ClipTooShort(f"pitch search down to {fmin} Hz needs more than {2.0 / fmin:.4f} s")

    seg = loudest_segment(clip.samples, int(round(PITCH_SEGMENT_SECONDS * sr)))
    seg = seg - seg.mean()
    up = ACF_OVERSAMPLE
    acf = normalized_autocorrelation(seg, up)
    lag_lo = max(1, int(math.ceil(up * sr / fmax)))
    lag_hi = min(acf.size - 2, int(math.floor(up * sr / fmin)))
    if lag_hi <= lag_lo:
        raise ClipTooShort("segment too short for the requested pitch range")

    lags = np.arange(lag_lo, lag_hi + 1)
    vals = acf[lags]
    is_peak = (vals >= acf[lags - 1]) & (vals >= acf[lags + 1])
    cand = lags[is_peak] if np.any(is_peak) else lags
    best = int(cand[np.argmax(acf[cand])])
    if acf[best] < MIN_PITCH_CORRELATION:
        raise NoPitch(f"max normalized autocorrelation {acf[best]:.3f} < {MIN_PITCH_CORRELATION}")

    return up * sr / _refine_lag(seg, best, up)


def _refine_lag(seg: np.ndarray, lag: int, up: int) -> float:
    """Fractional lag of the autocorrelation peak nearest ``lag`` (grid units).

    The rectangular segment's edges bias the plain estimate by a few parts in
    1e4; windowing the segment and dividing by the window's own
    autocorrelation removes both the edge terms and the lag taper.
    """
    w = np.hanning(seg.size + 2)[1:-1]  # no zero end points
    lo, hi = max(lag - up, 1), min(lag + up, up * seg.size - 2)
    rxw = normalized_autocorrelation(seg * w, up)[lo - 1:hi + 2]
    rw = normalized_autocorrelation(w, up)[lo - 1:hi + 2]
    if np.any(rw <= 0):
        return float(lag)
    r = rxw / rw
    j = int(np.argmax(r[1:-1])) + 1
    offset, _ = parabolic_vertex(r[j - 1], r[j], r[j + 1])
    return lo - 1 + j + offset


def detect_peaks(ltas: Ltas, min_separation: float = DEFAULT_MIN_SEPARATION,
                 threshold_db: float = DEFAULT_THRESHOLD_DB) -> list[Peak]:
    """Interpolated LTAS peaks, strongest first.

    Interior bins strictly above both neighbours (in floored dB) and within
    ``threshold_db`` of the spectrum maximum qualify. Of two peaks closer than
    ``min_separation`` Hz only the stronger survives.
    """
    db = ltas.magnitudes_db
    df = ltas.bin_width
    mid = db[1:-1]
    floor = db.max() - threshold_db
    bins = np.nonzero((mid > db[:-2]) & (mid > db[2:]) & (mid >= floor))[0] + 1

    found = []
    for i in bins:
        p, amp = interpolate_peak(ltas.magnitudes, i, ltas.window)
        found.append(Peak(float((i + p) * df), float(20.0 * np.log10(max(amp, _TINY)))))
    found.sort(key=lambda pk: (-pk.magnitude_db, pk.freq))

    kept: list[Peak] = []
    for pk in found:
        if all(abs(pk.freq - q.freq) >= min_separation for q in kept):
            kept.append(pk)
    if not kept:
        raise NoPeaks(f"no local maximum within {threshold_db} dB of the LTAS maximum")
    return kept


def extract_partials(ltas: Ltas, f0: float, max_partials: int = DEFAULT_MAX_PARTIALS) -> HarmonicSeries:
    """Harmonic partials ``k = 1..K`` read off the LTAS.

    Partial ``k`` is the interpolated maximum (see :func:`interpolate_peak`)
    within ``k*f0 +- f0/4``;
    ``K = min(max_partials, floor(nyquist / f0) - 1)``. Weak partials keep
    their measured amplitude so the indices stay contiguous.
    """
    if max_partials < 2:
        raise ValueError("max_partials must be at least 2")
    nyq = ltas.nyquist
    if not f0 > 0 or 2.0 * f0 >= nyq:
        raise F0OutOfRange(f"f0 {f0} Hz outside (0, nyquist/2)")
    count = min(max_partials, int(math.floor(nyq / f0)) - 1)
    if count < 2:
        raise F0OutOfRange(f"f0 {f0} Hz leaves room for fewer than 2 partials below nyquist")

    df = ltas.bin_width
    mag = ltas.magnitudes
    last = mag.size - 1

    ks = np.arange(1, count + 1)
    freqs = np.empty(count)
    amps = np.empty(count)
    for j, k in enumerate(ks):
        lo = max(int(math.ceil((k * f0 - f0 / 4.0) / df)), 0)
        hi = min(int(math.floor((k * f0 + f0 / 4.0) / df)), last)
        if hi < lo:
            lo = hi = min(int(round(k * f0 / df)), last)
        i = lo + int(np.argmax(mag[lo:hi + 1]))
        offset, amps[j] = interpolate_peak(mag, i, ltas.window)
        freqs[j] = (i + offset) * df
    return HarmonicSeries(float(f0), ks, freqs, amps)

