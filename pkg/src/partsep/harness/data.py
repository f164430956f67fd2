"""Corpus plumbing shared by the CLI, experiments, and acceptance checks.

The chorale experiments prefer a real corpus under ``<root>/chorales``;
when none is present they fall back to the generated stand-in, which is
materialized as ordinary .mid files once and then loaded through the same
parse/clean/split pipeline as any external corpus.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..core import Mixture, Song, downmix
from ..ingest import (
    CorpusConfig,
    DatasetManifest,
    load_corpus_dir,
    split_corpus,
    write_smf,
)
from ..synthetic import (
    disjoint_octaves_corpus,
    interchangeable_corpus,
    standin_chorale_corpus,
)

STANDIN_FILES = 409
STANDIN_SEED = 11
SPLIT_SEED = 0


@dataclass
class LoadedCorpus:
    songs: list[Song]
    manifest: DatasetManifest
    splits: dict[str, list[Mixture]]  # train / valid / test

    @property
    def note_count(self) -> int:
        return sum(s.note_count for s in self.songs)


def _split(songs: list[Song], seed: int = SPLIT_SEED) -> LoadedCorpus:
    manifest = split_corpus(songs, seed=seed)
    assignment = {e.source_id: e.split for e in manifest.entries}
    splits: dict[str, list[Mixture]] = {"train": [], "valid": [], "test": []}
    for song in songs:
        splits[assignment[song.source_id]].append(downmix(song))
    return LoadedCorpus(songs=songs, manifest=manifest, splits=splits)


def ensure_standin(root: str | Path) -> Path:
    """Write the stand-in chorale corpus as .mid files (once)."""
    directory = Path(root) / "standin"
    if len(list(directory.glob("*.mid"))) != STANDIN_FILES:
        directory.mkdir(parents=True, exist_ok=True)
        for old in directory.glob("*.mid"):
            old.unlink()
        for song in standin_chorale_corpus(STANDIN_FILES, seed=STANDIN_SEED):
            (directory / f"{song.source_id}.mid").write_bytes(
                write_smf(song, qpm=100.0))
    return directory


def chorale_source(root: str | Path) -> tuple[Path, bool]:
    """(corpus directory, whether it is a real chorale corpus)."""
    real = Path(root) / "chorales"
    if real.is_dir() and any(real.glob("*.mid")):
        return real, True
    return ensure_standin(root), False


def load_chorales(root: str | Path) -> tuple[LoadedCorpus, bool]:
    directory, real = chorale_source(root)
    config = CorpusConfig(genre_profile="chorale")
    songs = load_corpus_dir(directory, config)
    if not songs:
        raise ValueError(f"no usable songs under {directory}")
    return _split(songs), real


def load_octaves() -> LoadedCorpus:
    return _split(disjoint_octaves_corpus())


def load_pair() -> LoadedCorpus:
    return _split(interchangeable_corpus())


CORPUS_LOADERS = {
    "octaves": load_octaves,
    "pair": load_pair,
}


def load_corpus(name: str, root: str | Path) -> LoadedCorpus:
    if name == "chorales":
        return load_chorales(root)[0]
    if name in CORPUS_LOADERS:
        return CORPUS_LOADERS[name]()
    raise ValueError(f"unknown corpus {name!r}")
