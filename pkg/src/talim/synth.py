"""Additive synthetic strokes whose timbre is known by construction.

Used as ground truth for the extraction pipeline: a linear attack ramp times
a sum of exponentially decaying sinusoids at ``k * f0 * stretch_k``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from os import PathLike

import numpy as np

from .errors import SpecInvalid
from .signal_io import AudioClip

PEAK_LEVEL = 0.9

# bols recorded on each instrument
STROKES = ("ta", "ti", "teen", "ghe", "ge", "thun", "tu", "te", "re")
REFERENCE_F0 = 259.0


@dataclass(frozen=True)
class SynthSpec:
    f0: float
    partial_amps: tuple[float, ...]
    stretch: tuple[float, ...] | None = None
    attack: float = 0.012
    decay: tuple[float, ...] | None = None
    duration: float = 1.0
    sample_rate: int = 44100

    def __post_init__(self):
        object.__setattr__(self, "partial_amps", tuple(float(a) for a in self.partial_amps))
        n = len(self.partial_amps)
        stretch = (1.0,) * n if self.stretch is None else tuple(float(s) for s in self.stretch)
        # slow equal decay keeps LTAS amplitude ratios equal to the requested ratios
        decay = (self.duration,) * n if self.decay is None else tuple(float(d) for d in self.decay)
        object.__setattr__(self, "stretch", stretch)
        object.__setattr__(self, "decay", decay)
        self.validate()

    def validate(self) -> None:
        n = len(self.partial_amps)
        if n == 0:
            raise SpecInvalid("at least one partial is required")
        if len(self.stretch) != n or len(self.decay) != n:
            raise SpecInvalid("stretch and decay must have one entry per partial")
        if not self.f0 > 0:
            raise SpecInvalid("f0 must be positive")
        if any(a < 0 for a in self.partial_amps) or not any(a > 0 for a in self.partial_amps):
            raise SpecInvalid("partial amplitudes must be non-negative and not all zero")
        if any(d <= 0 for d in self.decay) or any(s <= 0 for s in self.stretch):
            raise SpecInvalid("decay constants and stretch factors must be positive")
        if self.sample_rate <= 0 or int(self.sample_rate) != self.sample_rate:
            raise SpecInvalid("sample_rate must be a positive integer")
        if max(self.partial_freqs) >= self.sample_rate / 2:
            raise SpecInvalid("highest partial must lie below nyquist")
        if not self.duration > self.attack >= 0:
            raise SpecInvalid("need duration > attack >= 0")

    @property
    def partial_freqs(self) -> np.ndarray:
        k = np.arange(1, len(self.partial_amps) + 1)
        return k * self.f0 * np.asarray(self.stretch)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> SynthSpec:
        return cls(**json.loads(text))


def reference_preset(f0: float = REFERENCE_F0, **kw) -> SynthSpec:
    """Fundamental plus four equal overtones."""
    return SynthSpec(f0=f0, partial_amps=(1.0,) * 5, **kw)


def synth_stroke(spec: SynthSpec, source_id: str = "synth") -> AudioClip:
    spec.validate()
    sr = spec.sample_rate
    t = np.arange(int(round(spec.duration * sr))) / sr
    if spec.attack > 0:
        ramp = np.minimum(t / spec.attack, 1.0)
    else:
        ramp = np.ones_like(t)
    s = np.zeros_like(t)
    for a, f, tau in zip(spec.partial_amps, spec.partial_freqs, spec.decay):
        if a:
            s += a * np.exp(-t / tau) * np.sin(2.0 * np.pi * f * t)
    s *= ramp
    peak = np.max(np.abs(s))
    if not peak > 0:
        raise SpecInvalid("spec synthesizes silence")
    return AudioClip(s * (PEAK_LEVEL / peak), sr, source_id)


def random_spec(rng: np.random.Generator, f0_range=(100.0, 500.0), partials=(3, 8),
                amp_range=(0.1, 1.0), **kw) -> SynthSpec:
    n = int(rng.integers(partials[0], partials[1] + 1))
    return SynthSpec(
        f0=float(rng.uniform(*f0_range)),
        partial_amps=tuple(float(a) for a in rng.uniform(*amp_range, size=n)),
        **kw,
    )


@dataclass(frozen=True)
class CorpusEntry:
    tabla_id: str
    stroke_label: str
    spec: SynthSpec = field(repr=False)


def stroke_corpus(seed: int = 0, tablas: int = 5, strokes=STROKES,
                  duration: float = 0.5) -> list[CorpusEntry]:
    """Synthetic tablas x strokes corpus.

    Each instrument gets its own tuning; each stroke its own spectral shape,
    attack and damping, perturbed per instrument.
    """
    rng = np.random.default_rng(seed)
    base = {s: rng.uniform(0.1, 1.0, size=8) for s in strokes}
    attack = {s: rng.uniform(0.004, 0.02) for s in strokes}
    damping = {s: rng.uniform(0.15, 1.0) for s in strokes}
    entries = []
    for t in range(tablas):
        tuning = rng.uniform(200.0, 320.0)
        for s in strokes:
            amps = base[s] * rng.uniform(0.7, 1.3, size=base[s].size)
            n = int(rng.integers(5, 9))
            spec = SynthSpec(
                f0=tuning * rng.uniform(0.97, 1.03),
                partial_amps=tuple(float(a) for a in amps[:n]),
                stretch=tuple(float(x) for x in 1.0 + rng.uniform(-0.004, 0.004, size=n)),
                attack=float(attack[s] * rng.uniform(0.8, 1.2)),
                decay=tuple(float(d) for d in damping[s] * rng.uniform(0.8, 1.2, size=n)),
                duration=duration,
            )
            entries.append(CorpusEntry(f"tabla{t + 1}", s, spec))
    return entries


def write_sidecar(spec: SynthSpec, path: str | PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(spec.to_json() + "\n")
