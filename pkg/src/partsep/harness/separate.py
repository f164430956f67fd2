"""End-to-end separation of one file: mixture in, per-part SMF out.

The writer is lossless on the note multiset whatever the labels say; part
names come from the genre profile's ensemble when one is known.  An
optional piano-roll image colours notes by predicted part for eyeballing
results.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..core import Mixture, Prediction, Song, downmix, regroup
from ..ingest import ENSEMBLES, CorpusConfig, load_corpus_file, write_smf
from ..neural import SeparationModel, predict


def part_names(profile: str | None, k: int) -> list[str]:
    ensemble = ENSEMBLES.get(profile or "")
    if ensemble and len(ensemble) >= k:
        return list(ensemble[:k])
    return [f"part {i + 1}" for i in range(k)]


def separate_mixture(model: SeparationModel, mixture: Mixture,
                     profile: str | None = None, mode: str | None = None,
                     source_id: str = "") -> tuple[Song, Prediction]:
    """Predict labels and regroup into a Song ready for writing."""
    pred = predict(model, mixture, mode=mode)
    song = regroup(mixture, labels=pred.labels,
                   names=part_names(profile, mixture.K), source_id=source_id)
    return song, pred


def separate_file(model: SeparationModel, in_path: str | Path,
                  out_path: str | Path, profile: str = "generic",
                  mode: str | None = None, qpm: float = 120.0,
                  roll_path: str | Path | None = None) -> Song:
    """Read an SMF, separate it, write the regrouped SMF (and the roll)."""
    in_path = Path(in_path)
    config = CorpusConfig(genre_profile=profile)
    song = load_corpus_file(in_path, config)
    if song is None:
        raise ValueError(f"{in_path} has fewer than two usable parts")
    mixture = downmix(song)
    separated, pred = separate_mixture(model, mixture, profile=profile,
                                       mode=mode, source_id=in_path.stem)
    Path(out_path).write_bytes(write_smf(separated, qpm=qpm))
    if roll_path is not None:
        render_roll(mixture, pred.labels, roll_path,
                    names=part_names(profile, mixture.K))
    return separated


def render_roll(mixture: Mixture, labels, path: str | Path,
                names: list[str] | None = None) -> None:
    """Piano roll PNG, one colour per predicted part."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    k = mixture.K
    names = names or [f"part {i + 1}" for i in range(k)]
    cmap = plt.get_cmap("tab10")
    fig, ax = plt.subplots(figsize=(12, 4))
    for note, y in zip(mixture.notes, labels):
        ax.broken_barh([(note.time, note.duration)], (note.pitch - 0.4, 0.8),
                       facecolors=cmap(y % 10))
    handles = [plt.Rectangle((0, 0), 1, 1, facecolor=cmap(i % 10))
               for i in range(k)]
    ax.legend(handles, names, loc="upper right", fontsize=8)
    ax.set_xlabel("time (steps)")
    ax.set_ylabel("pitch")
    pitches = [n.pitch for n in mixture.notes]
    ax.set_ylim(min(pitches) - 3, max(pitches) + 3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def multiset(song: Song) -> dict:
    """The (time, pitch, duration) multiset, for losslessness checks."""
    counts: dict[tuple[int, int, int], int] = {}
    for track in song.tracks:
        for n in track.notes:
            key = (n.time, n.pitch, n.duration)
            counts[key] = counts.get(key, 0) + 1
    return counts
