"""Corpus cleaning: quantization to the step grid, instrument-family
mapping for pop corpora, and the admission filter.

Every corpus ends up on a 24-steps-per-quarter grid, fine enough for 32nd
notes and triplets. Metrical-timing corpora are rescaled from their tick
resolution; absolute-time corpora (the game profile) are converted through
their tempo map at a fixed 125 quarter notes per minute, i.e. 20 ms per
step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from partsep.core import Note, Song, Track
from partsep.ingest.smf import parse_smf

DEFAULT_RESOLUTION = 24
GAME_QPM = 125.0  # fixed tempo convention for absolute-time corpora
DEFAULT_US_PER_QUARTER = 500_000.0  # MIDI default when no set-tempo appears

GENRE_PROFILES = ("chorale", "quartet", "game", "pop", "generic")

# Ensembles by profile, in label order.
ENSEMBLES: dict[str, tuple[str, ...]] = {
    "chorale": ("soprano", "alto", "tenor", "bass"),
    "quartet": ("first violin", "second violin", "viola", "cello"),
    "game": ("pulse wave I", "pulse wave II", "triangle wave"),
    "pop": ("piano", "guitar", "bass", "strings", "brass"),
}

# The five General MIDI 1 families kept for the pop profile, as
# (family name, zero-based program range). Everything else is discarded.
POP_FAMILIES: tuple[tuple[str, range], ...] = (
    ("piano", range(0, 8)),
    ("guitar", range(24, 32)),
    ("bass", range(32, 40)),
    ("strings", range(40, 48)),
    ("brass", range(56, 64)),
)


@dataclass(frozen=True)
class CorpusConfig:
    """How a corpus is parsed, cleaned, and split."""

    resolution: int = DEFAULT_RESOLUTION
    genre_profile: str = "generic"
    split_ratio: tuple[int, int, int] = (8, 1, 1)
    split_seed: int = 0
    family_map_path: str | None = None

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        if self.genre_profile not in GENRE_PROFILES:
            raise ValueError(f"unknown genre profile {self.genre_profile!r}")
        if any(r <= 0 for r in self.split_ratio):
            raise ValueError(f"split ratios must be positive, got {self.split_ratio}")

    @property
    def drop_drums(self) -> bool:
        return self.genre_profile in ("game", "pop")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def default_family_map() -> dict[int, str]:
    """Zero-based GM program number -> family name, for the five kept families."""
    table: dict[int, str] = {}
    for name, programs in POP_FAMILIES:
        for p in programs:
            table[p] = name
    return table


def load_family_map(path: str | Path) -> dict[int, str]:
    """Read a `program=family` override file (zero-based program numbers)."""
    table: dict[int, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        prog, family = line.split("=", 1)
        table[int(prog.strip())] = family.strip()
    return table


def quantize(song: Song, resolution: int = DEFAULT_RESOLUTION, absolute_time: bool = False) -> Song:
    """Snap a raw song onto `resolution` steps per quarter note.

    Times and durations round to the nearest step (half up); durations are
    clamped to one step so no note disappears. With `absolute_time` the
    song's tick times are first converted to seconds through its tempo map,
    then gridded at the 125 qpm convention (20 ms per step).
    """
    if absolute_time:
        to_step = _absolute_time_stepper(song, resolution)
    else:
        factor = resolution / song.resolution

        def to_step(tick: int) -> float:
            return tick * factor

    tracks = []
    for track in song.tracks:
        notes = []
        for n in track.notes:
            start = round_half_up(to_step(n.time))
            end = round_half_up(to_step(n.time + n.duration))
            notes.append(Note(time=start, pitch=n.pitch, duration=max(1, end - start)))
        tracks.append(
            Track(part_id=track.part_id, name=track.name, notes=tuple(notes),
                  program=track.program)
        )
    return Song(resolution=resolution, tracks=tuple(tracks), source_id=song.source_id)


def _absolute_time_stepper(song: Song, resolution: int):
    """tick -> fractional step at a fixed 125 qpm, honoring the tempo map."""
    step_seconds = 60.0 / (GAME_QPM * resolution)
    tempo_map = list(song.tempo_map) or [(0, DEFAULT_US_PER_QUARTER)]
    if tempo_map[0][0] > 0:
        tempo_map.insert(0, (0, DEFAULT_US_PER_QUARTER))
    # prefix seconds at each tempo change
    starts = [t for t, _ in tempo_map]
    seconds_at = [0.0]
    for (t0, us), t1 in zip(tempo_map, starts[1:]):
        seconds_at.append(seconds_at[-1] + (t1 - t0) * us / 1e6 / song.resolution)

    def to_step(tick: int) -> float:
        import bisect

        i = bisect.bisect_right(starts, tick) - 1
        t0, us = tempo_map[i]
        seconds = seconds_at[i] + (tick - t0) * us / 1e6 / song.resolution
        return seconds / step_seconds

    return to_step


def map_pop_families(song: Song, family_map: dict[int, str] | None = None) -> Song:
    """Collapse a pop song's tracks into the five instrument families.

    Tracks whose program falls outside the kept families are discarded;
    tracks landing in the same family merge into one part. Output part
    order follows the fixed pop ensemble order, renumbered contiguously.
    """
    table = default_family_map() if family_map is None else family_map
    by_family: dict[str, list[Note]] = {}
    for track in song.tracks:
        family = table.get(track.program)
        if family is None:
            continue
        by_family.setdefault(family, []).extend(track.notes)
    tracks = []
    for name in ENSEMBLES["pop"]:
        if name in by_family:
            tracks.append(
                Track(part_id=len(tracks), name=name, notes=tuple(by_family[name]))
            )
    return Song(resolution=song.resolution, tracks=tuple(tracks),
                source_id=song.source_id)


def clean(song: Song, config: CorpusConfig) -> Song | None:
    """Run the profile's cleaning steps; None when the song is not admissible.

    Steps: quantize to the target grid (through the tempo map for the game
    profile), map pop instruments to families, drop empty tracks, renumber
    parts contiguously, and discard songs with fewer than two active tracks
    (separation is trivial there).
    """
    song = quantize(song, config.resolution, absolute_time=config.genre_profile == "game")
    if config.genre_profile == "pop":
        fam = load_family_map(config.family_map_path) if config.family_map_path else None
        song = map_pop_families(song, fam)
    kept = [t for t in song.tracks if len(t.notes)]
    tracks = tuple(
        Track(part_id=i, name=t.name, notes=t.notes, program=t.program)
        for i, t in enumerate(kept)
    )
    if len(tracks) < 2:
        return None
    return Song(resolution=song.resolution, tracks=tracks, source_id=song.source_id)


def load_corpus_file(path: str | Path, config: CorpusConfig) -> Song | None:
    """Parse + clean one SMF from disk; None when rejected."""
    path = Path(path)
    raw = parse_smf(path.read_bytes(), source_id=path.stem, drop_drums=config.drop_drums)
    return clean(raw, config)


def load_corpus_dir(directory: str | Path, config: CorpusConfig) -> list[Song]:
    """Parse + clean every .mid file under `directory` (sorted by name)."""
    directory = Path(directory)
    songs = []
    for path in sorted(directory.glob("*.mid")):
        song = load_corpus_file(path, config)
        if song is not None:
            songs.append(song)
    return songs


@dataclass
class CorpusStats:
    files: int = 0
    notes: int = 0
    parts: dict[int, int] = field(default_factory=dict)

    @classmethod
    def of(cls, songs: list[Song]) -> "CorpusStats":
        stats = cls()
        for s in songs:
            stats.files += 1
            stats.notes += s.note_count
            stats.parts[s.K] = stats.parts.get(s.K, 0) + 1
        return stats
