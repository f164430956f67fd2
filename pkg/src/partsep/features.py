"""Per-note model inputs: pitch/time/duration columns, hints, augmentation.

Feature extraction is pure: a (mixture, hints, config) triple always encodes
to the same FeatureTensor.  Randomness (transposition augmentation) lives in
the caller's RNG and is applied to the mixture *before* encoding, so that
derived features (frequency, pitch hints) are recomputed from shifted pitches
rather than patched up after the fact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Mixture, Note

TIME_ENCODINGS = ("raw_time", "raw_beat_position", "time_embedding",
                  "beat_position_embedding")

# Inclusive semitone ranges for transposition augmentation.
AUGMENT_RANGES = {"none": (0, 0), "light": (-1, 1), "strong": (-5, 6)}

TIME_CLIP = 4096
BEAT_CLIP = 4096
DURATION_CLIP = 192


@dataclass(frozen=True)
class FeatureConfig:
    """What goes into the per-note input vector.

    ``use_embeddings`` switches pitch/beat/position from raw scalars to
    embedding indices; the embedding tables themselves live with the model.
    """

    use_embeddings: bool = True
    time_encoding: str = "beat_position_embedding"
    use_duration: bool = False
    use_entry_hints: bool = False
    use_pitch_hints: bool = False
    time_clip: int = TIME_CLIP
    beat_clip: int = BEAT_CLIP
    duration_clip: int = DURATION_CLIP
    augment: str = "strong"

    def __post_init__(self):
        if self.time_encoding not in TIME_ENCODINGS:
            raise ValueError(f"unknown time_encoding {self.time_encoding!r}")
        if self.augment not in AUGMENT_RANGES:
            raise ValueError(f"unknown augment profile {self.augment!r}")
        if min(self.time_clip, self.beat_clip, self.duration_clip) <= 0:
            raise ValueError("clips must be positive")

    @property
    def uses_beat_position(self) -> bool:
        return self.time_encoding in ("raw_beat_position",
                                      "beat_position_embedding")

    def to_text(self) -> str:
        lines = []
        for key, value in self.__dict__.items():
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FeatureConfig":
        kwargs = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in cls.__dataclass_fields__:
                raise ValueError(f"unknown feature option {key!r}")
            field_type = cls.__dataclass_fields__[key].type
            if field_type == "bool":
                kwargs[key] = value.lower() in ("1", "true", "yes")
            elif field_type == "int":
                kwargs[key] = int(value)
            else:
                kwargs[key] = value
        return cls(**kwargs)


@dataclass(frozen=True)
class Hints:
    """Side information about the parts of a song.

    ``onsets[k]`` is the time of part k's first note, or None for a part
    that never plays; ``mean_pitches[k]`` is its average pitch (0.0 sentinel
    when unused).  During training these come from the ground truth; in a
    live session they come from the player's part switches.
    """

    onsets: tuple
    mean_pitches: tuple

    def __post_init__(self):
        if len(self.onsets) != len(self.mean_pitches):
            raise ValueError("onsets and mean_pitches must align")

    @property
    def k(self) -> int:
        return len(self.onsets)


def hints_of(mixture: Mixture) -> Hints:
    """Derive entry/pitch hints from a labelled mixture."""
    labels = mixture.label_array()
    times = mixture.times()
    pitches = mixture.pitches()
    onsets = []
    means = []
    for k in range(mixture.K):
        mask = labels == k
        if mask.any():
            onsets.append(int(times[mask].min()))
            means.append(float(pitches[mask].mean()))
        else:
            onsets.append(None)
            means.append(0.0)
    return Hints(tuple(onsets), tuple(means))


def frequency(pitch):
    """Fundamental frequency in Hz: f = 440 * 2^((p - 69) / 12)."""
    return 440.0 * np.exp2((np.asarray(pitch, dtype=np.float64) - 69.0) / 12.0)


def beat_position(time, resolution: int):
    """Split a step count into (beat index, position within the beat)."""
    time = np.asarray(time)
    return time // resolution, time % resolution


def entry_hints(mixture: Mixture, hints: Optional[Hints] = None) -> np.ndarray:
    """(N, K) unit-step matrix: row i, column k is 1 iff part k has entered
    by the time of note i.  Unused parts give all-zero columns."""
    if hints is None:
        hints = hints_of(mixture)
    times = mixture.times()
    out = np.zeros((len(mixture.notes), hints.k), dtype=np.float64)
    for k, onset in enumerate(hints.onsets):
        if onset is not None:
            out[:, k] = times >= onset
    return out


def pitch_hints(mixture: Mixture, hints: Optional[Hints] = None) -> np.ndarray:
    """(K,) average pitch per part, 0 for unused parts."""
    if hints is None:
        hints = hints_of(mixture)
    return np.asarray(hints.mean_pitches, dtype=np.float64)


def transpose(mixture: Mixture, shift: int) -> Mixture:
    """Shift every pitch by `shift` semitones, clamping to [0, 127].

    Labels are untouched.  Notes keep their positions in the sequence:
    clamping can create pitch ties but never reorders, so the canonical
    order is preserved up to those ties.
    """
    if shift == 0:
        return mixture
    notes = tuple(
        Note(n.time, min(127, max(0, n.pitch + shift)), n.duration)
        for n in mixture.notes
    )
    return Mixture(notes=notes, labels=mixture.labels, K=mixture.K,
                   resolution=mixture.resolution)


def sample_shift(augment: str, rng) -> int:
    lo, hi = AUGMENT_RANGES[augment]
    return rng.randint(lo, hi) if hasattr(rng, "randint") else int(rng.integers(lo, hi + 1))


def transpose_augment(mixture: Mixture, augment: str, rng) -> Mixture:
    """Randomly transpose a whole training sequence (one coherent shift)."""
    return transpose(mixture, sample_shift(augment, rng))


@dataclass(frozen=True)
class FeatureTensor:
    """Column view of an encoded mixture; optional columns are None when the
    config does not select them."""

    pitch: np.ndarray            # (N,) int
    frequency: np.ndarray        # (N,) Hz
    time: Optional[np.ndarray]   # (N,) clipped steps, time-based encodings
    beat: Optional[np.ndarray]   # (N,) beat/position-based encodings
    position: Optional[np.ndarray]
    duration: Optional[np.ndarray]
    entry: Optional[np.ndarray]       # (N, K) ∈ {0, 1}
    pitch_hint: Optional[np.ndarray]  # (N, K), mean pitch / 128

    def __post_init__(self):
        n = len(self.pitch)
        if self.pitch.min(initial=0) < 0 or self.pitch.max(initial=0) > 127:
            raise ValueError("pitch out of range")
        if (self.frequency <= 0).any():
            raise ValueError("frequency must be positive")
        for name in ("frequency", "time", "beat", "position", "duration",
                     "entry", "pitch_hint"):
            col = getattr(self, name)
            if col is not None and len(col) != n:
                raise ValueError(f"column {name} has {len(col)} rows, want {n}")
        if self.entry is not None:
            values = np.unique(self.entry)
            if not np.isin(values, (0.0, 1.0)).all():
                raise ValueError("entry hints must be 0/1")

    @property
    def n(self) -> int:
        return len(self.pitch)


def encode(mixture: Mixture, hints: Optional[Hints],
           config: FeatureConfig) -> FeatureTensor:
    """Encode a mixture into model-input columns.

    Time is clipped to ``config.time_clip`` before the beat/position split,
    so beat*resolution + position always reconstructs the clipped time.
    Raises ValueError when the config asks for hints but none are given.
    """
    if (config.use_entry_hints or config.use_pitch_hints) and hints is None:
        raise ValueError("config requests hints but none were provided")

    pitch = mixture.pitches()
    freq = frequency(pitch)
    times = np.minimum(mixture.times(), config.time_clip)

    time_col = beat_col = pos_col = None
    if config.uses_beat_position:
        beat_col, pos_col = beat_position(times, mixture.resolution)
        beat_col = np.minimum(beat_col, config.beat_clip)
    else:
        time_col = times

    duration_col = None
    if config.use_duration:
        duration_col = np.minimum(mixture.durations(), config.duration_clip)

    entry_col = None
    if config.use_entry_hints:
        entry_col = entry_hints(mixture, hints)

    hint_col = None
    if config.use_pitch_hints:
        row = pitch_hints(mixture, hints) / 128.0
        hint_col = np.tile(row, (len(mixture.notes), 1))

    return FeatureTensor(pitch=pitch, frequency=freq, time=time_col,
                         beat=beat_col, position=pos_col,
                         duration=duration_col, entry=entry_col,
                         pitch_hint=hint_col)
