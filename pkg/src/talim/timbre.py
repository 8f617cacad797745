"""The fourteen per-stroke timbre descriptors.

Harmonic ratios (tristimulus, odd/even, irregularity, inharmonicity) come
from LTAS partial amplitudes; brightness and centroid are amplitude-weighted
means of the whole LTAS on the Bark and ERB-rate scales.
"""

from __future__ import annotations

import logging
import math
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import harmonics
from .errors import FewerThanTwoPeaks, NoPeaks, SilentClip, TalimError, ZeroSpectrum
from .harmonics import HarmonicSeries, Peak
from .signal_io import AudioClip
from .spectrum import DB_FLOOR, Envelope, Ltas, SpectrumConfig, compute_envelope, compute_ltas

log = logging.getLogger(__name__)

ATTACK_THRESHOLD = 0.1


@dataclass(frozen=True)
class TimbreVector:
    brightness: float
    tristimulus1: float
    tristimulus2: float
    tristimulus3: float
    odd_param: float
    even_param: float
    irregularity: float
    inharmonicity: float
    centroid: float
    pitch: float
    attack_time: float
    rms_power: float
    peak_freq_diff: float
    peak_amp_diff: float

    def __post_init__(self):
        for name in FEATURE_NAMES:
            object.__setattr__(self, name, float(getattr(self, name)))

    def as_dict(self) -> dict[str, float]:
        return {k: float(v) for k, v in asdict(self).items()}

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in FEATURE_NAMES], dtype=np.float64)

    def violations(self, tol: float = 1e-9) -> list[str]:
        """Names of invariants this vector breaks (empty when valid)."""
        bad = []
        if abs(self.tristimulus1 + self.tristimulus2 + self.tristimulus3 - 1.0) > tol:
            bad.append("t1+t2+t3 != 1")
        if abs(self.tristimulus1 + self.odd_param + self.even_param - 1.0) > tol:
            bad.append("t1+odd+even != 1")
        for name in ("tristimulus1", "tristimulus2", "tristimulus3", "odd_param", "even_param"):
            if not -tol <= getattr(self, name) <= 1.0 + tol:
                bad.append(f"{name} outside [0, 1]")
        if self.attack_time < 0:
            bad.append("attack_time < 0")
        if self.peak_amp_diff < 0:
            bad.append("peak_amp_diff < 0")
        values = self.as_array()
        if not np.all(np.isfinite(values[:-2])) or np.any(np.isinf(values[-2:])):
            bad.append("non-finite value")
        return bad

    @property
    def complete(self) -> bool:
        """False when the two-peak differences are undefined (single-peak LTAS)."""
        return bool(np.all(np.isfinite(self.as_array())))


FEATURE_NAMES = tuple(f.name for f in fields(TimbreVector))

# row labels as printed in the descriptive statistics table
DISPLAY_LABELS = {
    "brightness": "Brightness",
    "tristimulus1": "Tristimulus1",
    "tristimulus2": "Tristimulus2",
    "tristimulus3": "Tristimulus3",
    "odd_param": "Odd parameter",
    "even_param": "Even Parameter",
    "irregularity": "Spectral Irregularity",
    "inharmonicity": "Spectral inharmonicity",
    "centroid": "Spectral Centroid",
    "pitch": "pitch",
    "attack_time": "Attack time",
    "rms_power": "Average RMS power",
    "peak_freq_diff": "Diff in freq of 2 peaks",
    "peak_amp_diff": "Diff in amp of 2 peaks",
}


@dataclass(frozen=True)
class FeatureParams:
    fmin: float = harmonics.DEFAULT_FMIN
    fmax: float = harmonics.DEFAULT_FMAX
    max_partials: int = harmonics.DEFAULT_MAX_PARTIALS
    min_separation: float = harmonics.DEFAULT_MIN_SEPARATION
    threshold_db: float = harmonics.DEFAULT_THRESHOLD_DB
    envelope_window_ms: float = 10.0
    envelope_hop_ms: float = 1.0
    # round the envelope window to whole pitch periods so RMS does not ripple
    pitch_synchronous: bool = True

    def envelope_window(self, f0: float) -> float:
        if not self.pitch_synchronous:
            return self.envelope_window_ms
        period = 1000.0 / f0
        return max(1, round(self.envelope_window_ms / period)) * period


def _amps(series) -> np.ndarray:
    if isinstance(series, HarmonicSeries):
        return series.amps
    a = np.asarray(series, dtype=np.float64).ravel()
    if np.any(a < 0):
        raise ValueError("partial amplitudes must be non-negative")
    return a


def _total(a: np.ndarray) -> float:
    s = float(np.sum(a))
    if s <= 0:
        raise ZeroSpectrum("all partial amplitudes are zero")
    return s


def tristimulus(series) -> tuple[float, float, float]:
    """(T1, T2, T3): amplitude share of partial 1, partials 2-4, partials 5+."""
    a = _amps(series)
    if a.size < 1:
        raise ValueError("need at least one partial")
    s = _total(a)
    return a[0] / s, float(np.sum(a[1:4])) / s, float(np.sum(a[4:])) / s


def odd_even(series) -> tuple[float, float]:
    """(odd, even) amplitude shares; the fundamental is not counted as odd."""
    a = _amps(series)
    if a.size < 2:
        raise ValueError("need at least two partials")
    s = _total(a)
    # a[1] is partial 2
    return float(np.sum(a[2::2])) / s, float(np.sum(a[1::2])) / s


def irregularity(series) -> float:
    a = _amps(series)
    if a.size < 2:
        raise ValueError("need at least two partials")
    energy = float(np.sum(a * a))
    if energy <= 0:
        raise ZeroSpectrum("all partial amplitudes are zero")
    return float(np.sum(np.diff(a) ** 2)) / energy


def inharmonicity(series: HarmonicSeries) -> float:
    """Amplitude-weighted signed deviation of partials from ``k*f0``, in percent."""
    a = series.amps
    s = _total(a)
    ideal = series.indices * series.f0
    return 100.0 * float(np.sum(a * (series.freqs - ideal) / ideal)) / s


def bark(f):
    f = np.asarray(f, dtype=np.float64)
    return 13.0 * np.arctan(0.00076 * f) + 3.5 * np.arctan((f / 7500.0) ** 2)


def erb_rate(f):
    f = np.asarray(f, dtype=np.float64)
    return 21.4 * np.log10(1.0 + 0.00437 * f)


def _weighted_scale_mean(ltas: Ltas, scale) -> float:
    a = ltas.magnitudes
    s = float(np.sum(a))
    if s <= 0:
        raise ZeroSpectrum("LTAS is identically zero")
    return float(np.sum(scale(ltas.bin_freqs) * a)) / s


def brightness(ltas: Ltas) -> float:
    """Magnitude-weighted mean Bark value of the LTAS."""
    return _weighted_scale_mean(ltas, bark)


def centroid(ltas: Ltas) -> float:
    """Magnitude-weighted mean ERB-rate value of the LTAS."""
    return _weighted_scale_mean(ltas, erb_rate)


def attack_time(env: Envelope, threshold: float = ATTACK_THRESHOLD) -> float:
    """Seconds from the first ``threshold * peak`` crossing to the RMS peak."""
    rms = np.asarray(env.rms_values)
    peak_i = int(np.argmax(rms))
    peak = rms[peak_i]
    if not peak > 0:
        raise SilentClip("envelope is identically zero")
    onset_i = int(np.argmax(rms >= threshold * peak))
    return max(0.0, float(env.times[peak_i] - env.times[onset_i]))


def rms_power_db(clip: AudioClip) -> float:
    ms = float(np.mean(clip.samples * clip.samples))
    if ms <= 0:
        return DB_FLOOR
    return max(DB_FLOOR, 10.0 * np.log10(ms))


def peak_diffs(peaks: list[Peak]) -> tuple[float, float]:
    """(|freq difference| Hz, |level difference| dB) of the two strongest peaks."""
    if len(peaks) < 2:
        raise FewerThanTwoPeaks(f"need two peaks, got {len(peaks)}")
    first, second = sorted(peaks, key=lambda pk: -pk.magnitude_db)[:2]
    return abs(first.freq - second.freq), abs(first.magnitude_db - second.magnitude_db)


def _peak_diffs_or_nan(ltas: Ltas, params: FeatureParams) -> tuple[float, float]:
    try:
        peaks = harmonics.detect_peaks(ltas, params.min_separation, params.threshold_db)
        return peak_diffs(peaks)
    except (NoPeaks, FewerThanTwoPeaks) as exc:
        log.warning("two-peak differences undefined: %s", exc)
        return math.nan, math.nan


@contextmanager
def _tagged(feature: str):
    try:
        yield
    except TalimError as exc:
        if exc.feature is None:
            exc.feature = feature
        raise


def compute_all(clip: AudioClip, cfg: SpectrumConfig | None = None,
                params: FeatureParams | None = None) -> TimbreVector:
    """Full descriptor vector for one stroke.

    Errors from any stage propagate with ``feature`` set to the descriptor
    being computed. When the LTAS holds fewer than two peaks (a pure tone)
    both peak differences are NaN and the vector is not ``complete``.
    """
    cfg = cfg or SpectrumConfig()
    params = params or FeatureParams()
    if not np.any(clip.samples):
        raise SilentClip(f"{clip.source_id or 'clip'} is silent")

    with _tagged("ltas"):
        ltas = compute_ltas(clip, cfg)
    with _tagged("pitch"):
        f0 = harmonics.estimate_f0(clip, params.fmin, params.fmax)
    with _tagged("partials"):
        series = harmonics.extract_partials(ltas, f0, params.max_partials)
    with _tagged("tristimulus1"):
        t1, t2, t3 = tristimulus(series)
    with _tagged("odd_param"):
        odd, even = odd_even(series)
    with _tagged("irregularity"):
        irr = irregularity(series)
    with _tagged("inharmonicity"):
        inh = inharmonicity(series)
    with _tagged("brightness"):
        bright = brightness(ltas)
    with _tagged("centroid"):
        cent = centroid(ltas)
    with _tagged("attack_time"):
        window_ms = params.envelope_window(f0)
        env = compute_envelope(clip, window_ms, min(params.envelope_hop_ms, window_ms))
        attack = attack_time(env)
    with _tagged("peak_freq_diff"):
        fdiff, adiff = _peak_diffs_or_nan(ltas, params)

    return TimbreVector(
        brightness=bright,
        tristimulus1=t1,
        tristimulus2=t2,
        tristimulus3=t3,
        odd_param=odd,
        even_param=even,
        irregularity=irr,
        inharmonicity=inh,
        centroid=cent,
        pitch=f0,
        attack_time=attack,
        rms_power=rms_power_db(clip),
        peak_freq_diff=fdiff,
        peak_amp_diff=adiff,
    )
