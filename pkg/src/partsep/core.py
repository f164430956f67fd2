"""Shared domain types for part separation, plus downmix and the accuracy metric.

A multitrack `Song` holds one `Track` per part. Downmixing merges every
track into a single globally-ordered note sequence (the `Mixture`) while
remembering which part each note came from; that (notes, labels) pair is
what every separation model trains and evaluates on.

All types here are immutable after construction and safe to share across
threads. Times are integer steps on the song's metrical grid
(`Song.resolution` steps per quarter note).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Note",
    "Track",
    "Song",
    "Mixture",
    "Prediction",
    "downmix",
    "accuracy",
    "CANONICAL_ORDER_DOC",
]

# Global note order used everywhere a mixture is built or replayed:
# (time, pitch, duration, part) ascending. Low-to-high within a chord,
# and the originating part index breaks exact duplicates so the merge
# stays deterministic and lossless.
CANONICAL_ORDER_DOC = "(time asc, pitch asc, duration asc, part_id asc)"


@dataclass(frozen=True, order=True)
class Note:
    """One musical event on the step grid.

    Invariants: time >= 0, 0 <= pitch <= 127 (MIDI note number),
    duration >= 1 step.
    """

    time: int
    pitch: int
    duration: int = 1

    def __post_init__(self):
        if self.time < 0:
            raise ValueError(f"note time must be >= 0, got {self.time}")
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch must be in [0, 127], got {self.pitch}")
        if self.duration < 1:
            raise ValueError(f"duration must be >= 1, got {self.duration}")


@dataclass(frozen=True)
class Track:
    """All notes of one part, sorted by (time, pitch, duration).

    `part_id` is the zero-based label this track's notes receive when the
    song is downmixed; it must be unique within a song. `program` keeps the
    General MIDI program number when the track came from an SMF (-1 when
    unknown or not applicable).
    """

    part_id: int
    name: str
    notes: tuple[Note, ...]
    program: int = -1

    def __post_init__(self):
        if self.part_id < 0:
            raise ValueError(f"part_id must be >= 0, got {self.part_id}")
        notes = tuple(sorted(self.notes, key=lambda n: (n.time, n.pitch, n.duration)))
        object.__setattr__(self, "notes", notes)

    def __len__(self) -> int:
        return len(self.notes)


@dataclass(frozen=True)
class Song:
    """A multitrack piece: ordered tracks plus grid/provenance metadata.

    `resolution` is the number of time steps per quarter note (24 for every
    cleaned corpus; equal to the SMF ticks-per-quarter on raw parses).
    `tempo_map` is only populated on raw parses of absolute-time corpora:
    (tick, microseconds per quarter) change points, consumed by the
    quantizer and empty afterwards.
    """

    resolution: int
    tracks: tuple[Track, ...]
    source_id: str = ""
    tempo_map: tuple[tuple[int, float], ...] = field(default=())

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        ids = [t.part_id for t in self.tracks]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate part_id in song {self.source_id!r}: {ids}")

    @property
    def K(self) -> int:
        """Number of parts (= track count)."""
        return len(self.tracks)

    @property
    def note_count(self) -> int:
        return sum(len(t) for t in self.tracks)


@dataclass(frozen=True)
class Mixture:
    """A label-stripped, globally ordered note sequence with its ground truth.

    `notes[i]` is the i-th note in canonical order and `labels[i]` the part
    it belongs to. Models see the notes (and optional hints) and must
    recover the labels. `resolution` carries the source song's grid so that
    beat/position features can be derived without the song in hand.
    """

    notes: tuple[Note, ...]
    labels: tuple[int, ...]
    K: int
    resolution: int = 24

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        if len(self.notes) != len(self.labels):
            raise ValueError(
                f"mixture has {len(self.notes)} notes but {len(self.labels)} labels"
            )
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        bad = [y for y in self.labels if not 0 <= y < self.K]
        if bad:
            raise ValueError(f"labels outside [0, {self.K - 1}]: {sorted(set(bad))[:5]}")

    def __len__(self) -> int:
        return len(self.notes)

    def times(self) -> np.ndarray:
        return np.fromiter((n.time for n in self.notes), dtype=np.int64, count=len(self))

    def pitches(self) -> np.ndarray:
        return np.fromiter((n.pitch for n in self.notes), dtype=np.int64, count=len(self))

    def durations(self) -> np.ndarray:
        return np.fromiter(
            (n.duration for n in self.notes), dtype=np.int64, count=len(self)
        )

    def label_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)


@dataclass(frozen=True)
class Prediction:
    """Per-note part labels, optionally with the per-class scores behind them.

    When `scores` is present it is an (N, K) float matrix whose row-wise
    argmax agrees with `labels` (heuristic baselines usually leave it None).
    """

    labels: tuple[int, ...]
    scores: np.ndarray | None = None

    def __post_init__(self):
        if self.scores is not None:
            s = np.asarray(self.scores)
            if s.ndim != 2 or s.shape[0] != len(self.labels):
                raise ValueError(f"scores shape {s.shape} does not match N={len(self.labels)}")
            if not np.all(np.isfinite(s)):
                raise ValueError("scores contain non-finite values")
            if len(self.labels) and not np.array_equal(
                np.argmax(s, axis=1), np.asarray(self.labels)
            ):
                raise ValueError("argmax of scores disagrees with labels")
            object.__setattr__(self, "scores", s)

    def __len__(self) -> int:
        return len(self.labels)


def downmix(song: Song) -> Mixture:
    """Merge all tracks of `song` into a single canonically ordered mixture.

    The merge is lossless: the multiset of (time, pitch, duration, label)
    equals the input's, and identical notes appearing in different tracks
    stay distinct events. Songs with fewer than two parts are rejected
    because separating them is not a task.
    """
    if song.K < 2:
        raise ValueError(
            f"song {song.source_id!r} has {song.K} track(s); need at least 2 parts"
        )
    merged: list[tuple[int, int, int, int]] = []
    for track in song.tracks:
        for n in track.notes:
            merged.append((n.time, n.pitch, n.duration, track.part_id))
    merged.sort()
    notes = tuple(Note(t, p, d) for t, p, d, _ in merged)
    labels = tuple(y for _, _, _, y in merged)
    return Mixture(notes=notes, labels=labels, K=song.K,
                   resolution=song.resolution)


def accuracy(pred: Prediction, truth: Mixture) -> float:
    """Fraction of notes whose predicted part matches the ground truth."""
    if len(pred.labels) != len(truth.labels):
        raise ValueError(
            f"prediction has {len(pred.labels)} labels, mixture has {len(truth.labels)}"
        )
    if not truth.labels:
        return 1.0
    hits = sum(a == b for a, b in zip(pred.labels, truth.labels))
    return hits / len(truth.labels)


def regroup(mixture: Mixture, labels: tuple[int, ...] | None = None,
            names: list[str] | None = None, resolution: int | None = None,
            source_id: str = "") -> Song:
    """Inverse of downmix: rebuild a Song from a mixture and (possibly
    predicted) labels. Used by the separation writer; lossless on the note
    multiset regardless of label quality."""
    if resolution is None:
        resolution = mixture.resolution
    labels = mixture.labels if labels is None else labels
    if len(labels) != len(mixture.notes):
        raise ValueError("labels length does not match mixture")
    buckets: list[list[Note]] = [[] for _ in range(mixture.K)]
    for note, y in zip(mixture.notes, labels):
        if not 0 <= y < mixture.K:
            raise ValueError(f"label {y} outside [0, {mixture.K - 1}]")
        buckets[y].append(note)
    tracks = []
    for k, bucket in enumerate(buckets):
        name = names[k] if names else f"part {k + 1}"
        tracks.append(Track(part_id=k, name=name, notes=tuple(bucket)))
    return Song(resolution=resolution, tracks=tuple(tracks), source_id=source_id)
