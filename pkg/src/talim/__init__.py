"""Timbre analysis of single percussion strokes and the statistics built on it."""

__version__ = "0.1.0"

from .errors import AnalysisError, SignalIOError, TalimError
from .harmonics import HarmonicSeries, detect_peaks, estimate_f0, extract_partials
from .signal_io import AudioClip, decode_wav, encode_wav, load_wav, write_wav
from .spectrum import Ltas, SpectrumConfig, compute_envelope, compute_ltas, magnitude_spectrum
from .synth import SynthSpec, synth_stroke
from .timbre import FEATURE_NAMES, FeatureParams, TimbreVector, compute_all

__all__ = [
    "AnalysisError", "AudioClip", "FEATURE_NAMES", "FeatureParams", "HarmonicSeries", "Ltas",
    "SignalIOError", "SpectrumConfig", "SynthSpec", "TalimError", "TimbreVector",
    "compute_all", "compute_envelope", "compute_ltas", "decode_wav", "detect_peaks",
    "encode_wav", "estimate_f0", "extract_partials", "load_wav", "magnitude_spectrum",
    "synth_stroke", "write_wav",
]
