"""Persistent datasets: the train/valid/test split, the manifest table,
and the line-per-note text format everything downstream consumes.

A dataset file is diff-friendly and language-neutral: one CSV line per
note, `source_id,split,note_index,time,pitch,duration,label,K`, notes in
canonical mixture order within each song. The companion manifest lists one
`source_id,split,note_count,K` row per song.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from partsep.core import Mixture, Note, Song, downmix

SPLITS = ("train", "valid", "test")


@dataclass(frozen=True)
class ManifestEntry:
    source_id: str
    split: str
    note_count: int
    K: int


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry] = field(default_factory=list)

    def totals(self) -> dict[str, dict[str, int]]:
        out = {s: {"files": 0, "notes": 0} for s in SPLITS}
        for e in self.entries:
            out[e.split]["files"] += 1
            out[e.split]["notes"] += e.note_count
        return out

    def split_of(self) -> dict[str, str]:
        return {e.source_id: e.split for e in self.entries}

    def to_text(self) -> str:
        lines = ["source_id,split,note_count,K"]
        for e in self.entries:
            lines.append(f"{e.source_id},{e.split},{e.note_count},{e.K}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DatasetManifest":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != "source_id,split,note_count,K":
            raise ValueError("manifest missing its header row")
        entries = []
        for ln in lines[1:]:
            source_id, split, note_count, k = ln.split(",")
            if split not in SPLITS:
                raise ValueError(f"unknown split {split!r} in manifest")
            entries.append(ManifestEntry(source_id, split, int(note_count), int(k)))
        return cls(entries)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        return cls.from_text(Path(path).read_text())


def assign_splits(
    source_ids: list[str],
    seed: int,
    ratio: tuple[int, int, int] = (8, 1, 1),
    override: dict[str, str] | None = None,
) -> dict[str, str]:
    """Deterministic by-file split assignment.

    A seeded shuffle deals files into train/valid/test at the given ratio
    (file counts rounded to the nearest whole file, so 409 files go
    327/41/41). `override` pins specific files to predefined splits, for
    corpora that ship with official splits.
    """
    if not source_ids:
        raise ValueError("cannot split an empty corpus")
    if len(set(source_ids)) != len(source_ids):
        raise ValueError("duplicate source_ids in corpus")
    override = override or {}
    for sid, split in override.items():
        if split not in SPLITS:
            raise ValueError(f"override for {sid!r} has unknown split {split!r}")

    free = sorted(sid for sid in source_ids if sid not in override)
    rng = random.Random(seed)
    rng.shuffle(free)
    total = sum(ratio)
    n = len(free)
    n_valid = round(n * ratio[1] / total)
    n_test = round(n * ratio[2] / total)
    assignment = dict(override)
    for i, sid in enumerate(free):
        if i < n_test:
            assignment[sid] = "test"
        elif i < n_test + n_valid:
            assignment[sid] = "valid"
        else:
            assignment[sid] = "train"
    return {sid: assignment[sid] for sid in source_ids}


def split_corpus(
    songs: list[Song],
    seed: int,
    ratio: tuple[int, int, int] = (8, 1, 1),
    override: dict[str, str] | None = None,
) -> DatasetManifest:
    if not songs:
        raise ValueError("cannot split an empty corpus")
    assignment = assign_splits([s.source_id for s in songs], seed, ratio, override)
    entries = [
        ManifestEntry(s.source_id, assignment[s.source_id], s.note_count, s.K)
        for s in songs
    ]
    return DatasetManifest(entries)


@dataclass(frozen=True)
class DatasetRecord:
    """One song of a persisted dataset: its mixture plus bookkeeping."""

    source_id: str
    split: str
    mixture: Mixture


def write_dataset(songs: list[Song], manifest: DatasetManifest, path: str | Path) -> None:
    """Write the one-line-per-note dataset file for all songs in the manifest."""
    split_of = manifest.split_of()
    lines = []
    for song in songs:
        mix = downmix(song)
        split = split_of[song.source_id]
        for i, (note, label) in enumerate(zip(mix.notes, mix.labels)):
            lines.append(
                f"{song.source_id},{split},{i},{note.time},{note.pitch},"
                f"{note.duration},{label},{mix.K}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def read_dataset(path: str | Path) -> list[DatasetRecord]:
    """Read a dataset file back into per-song mixtures (file order preserved)."""
    records: list[DatasetRecord] = []
    current: tuple[str, str, int] | None = None
    notes: list[Note] = []
    labels: list[int] = []

    def flush():
        if current is not None:
            sid, split, k = current
            records.append(
                DatasetRecord(sid, split, Mixture(tuple(notes), tuple(labels), k))
            )

    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        if not raw.strip():
            continue
        fields = raw.split(",")
        if len(fields) != 8:
            raise ValueError(f"{path}:{lineno}: expected 8 fields, got {len(fields)}")
        sid, split, idx, time, pitch, duration, label, k = fields
        key = (sid, split, int(k))
        if key != current:
            flush()
            current = key
            notes, labels = [], []
        if int(idx) != len(notes):
            raise ValueError(f"{path}:{lineno}: note_index out of sequence")
        notes.append(Note(int(time), int(pitch), int(duration)))
        labels.append(int(label))
    flush()
    return records


def records_by_split(records: list[DatasetRecord]) -> dict[str, list[DatasetRecord]]:
    out: dict[str, list[DatasetRecord]] = {s: [] for s in SPLITS}
    for r in records:
        out[r.split].append(r)
    return out
