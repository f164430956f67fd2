"""Procedurally generated corpora with controlled statistics.

Three families, all deterministic per seed:

* disjoint octaves — K parts in non-overlapping pitch ranges; trivially
  zone-separable, a floor check for every model.
* interchangeable pair — two parts whose *global* pitch statistics are
  identical because the high/low register assignment flips from song to
  song; only per-song side information (pitch hints) can tell which index
  owns which register.
* chorale stand-in — four-voice SATB-range writing with triadic harmony,
  stepwise voice leading, passing tones and occasional crossings, sized
  like a real chorale corpus (hundreds of files, ~240 notes each).  Used
  to exercise the full pipeline at realistic scale and difficulty.
"""

from __future__ import annotations

import random

from .core import Note, Song, Track

MAJOR = (0, 2, 4, 5, 7, 9, 11)

# (name, low, high) per voice, soprano first
SATB_RANGES = (
    ("soprano", 60, 79),
    ("alto", 55, 72),
    ("tenor", 48, 65),
    ("bass", 36, 57),
)

# functional-harmony tendencies over scale degrees 0..6 (I..vii)
_PROGRESSIONS = {
    0: (3, 4, 5, 1, 0, 3, 4),
    1: (4, 6, 4),
    2: (5, 3),
    3: (4, 0, 1, 4),
    4: (0, 5, 0),
    5: (3, 1, 4),
    6: (0,),
}


def _chord_pcs(key: int, degree: int) -> tuple[int, int, int]:
    return tuple((key + MAJOR[(degree + off) % 7]) % 12 for off in (0, 2, 4))


def _nearest_tone(prev: int, pcs, lo: int, hi: int, rng: random.Random) -> int:
    candidates = [p for p in range(lo, hi + 1) if p % 12 in pcs]
    best = min(abs(p - prev) for p in candidates)
    pool = [p for p in candidates if abs(p - prev) <= best + 2]
    return rng.choice(pool)


def standin_chorale_song(source_id: str, seed: int) -> Song:
    """One four-voice chorale-like piece on the 24-step grid."""
    rng = random.Random(seed)
    key = rng.randrange(12)
    n_chords = rng.randint(40, 70)

    degree = 0
    voices: list[list[Note]] = [[] for _ in range(4)]
    prev = [None, None, None, None]
    t = 0
    for ci in range(n_chords):
        pcs = _chord_pcs(key, degree)
        # phrase ends get held chords
        dur = 48 if (ci % 8 == 7 or ci == n_chords - 1) else 24
        pitches = []
        for vi, (_, lo, hi) in enumerate(SATB_RANGES):
            pc_pool = pcs if vi != 3 else (pcs[0],)  # bass takes the root
            if prev[vi] is None:
                start = rng.randint(lo + (hi - lo) // 3, hi - (hi - lo) // 4)
                pitch = _nearest_tone(start, pc_pool, lo, hi, rng)
            else:
                pitch = _nearest_tone(prev[vi], pc_pool, lo, hi, rng)
            pitches.append(pitch)
        # occasional inner-voice crossing keeps the task honest
        if rng.random() < 0.05 and abs(pitches[1] - pitches[2]) <= 4:
            pitches[1], pitches[2] = pitches[2], pitches[1]
        for vi, pitch in enumerate(pitches):
            walk = rng.random()
            threshold = 0.35 if vi == 0 else 0.08
            nxt = None
            if dur == 24 and walk < threshold and prev[vi] is not None:
                # split the beat with a passing eighth toward a neighbor
                step = rng.choice((-2, -1, 1, 2))
                _, lo, hi = SATB_RANGES[vi]
                if lo <= pitch + step <= hi:
                    nxt = pitch + step
            if nxt is None:
                voices[vi].append(Note(t, pitch, dur))
            else:
                voices[vi].append(Note(t, pitch, 12))
                voices[vi].append(Note(t + 12, nxt, 12))
            prev[vi] = pitch
        t += dur
        degree = rng.choice(_PROGRESSIONS[degree])

    tracks = tuple(
        Track(part_id=vi, name=SATB_RANGES[vi][0], notes=tuple(notes))
        for vi, notes in enumerate(voices)
    )
    return Song(resolution=24, tracks=tracks, source_id=source_id)


def standin_chorale_corpus(n: int = 409, seed: int = 11) -> list[Song]:
    return [standin_chorale_song(f"standin_{i:04d}", seed * 100003 + i)
            for i in range(n)]


def disjoint_octaves_song(source_id: str, seed: int, k: int = 4) -> Song:
    """K random walks, each confined to its own octave."""
    rng = random.Random(seed)
    tracks = []
    for part in range(k):
        lo = 36 + 12 * part
        pitch = rng.randint(lo + 3, lo + 8)
        notes = []
        t = rng.randrange(0, 12)
        for _ in range(rng.randint(40, 70)):
            pitch = min(lo + 11, max(lo, pitch + rng.randint(-3, 3)))
            dur = rng.choice((6, 12, 12, 24))
            notes.append(Note(t, pitch, dur))
            t += dur if rng.random() > 0.1 else dur + rng.choice((6, 12))
        tracks.append(Track(part_id=part, name=f"part {part + 1}",
                            notes=tuple(notes)))
    return Song(resolution=24, tracks=tuple(tracks), source_id=source_id)


def disjoint_octaves_corpus(n: int = 240, seed: int = 21, k: int = 4) -> list[Song]:
    return [disjoint_octaves_song(f"octaves_{i:04d}", seed * 99991 + i, k)
            for i in range(n)]


def interchangeable_song(source_id: str, seed: int, swap: bool) -> Song:
    """Two non-crossing contours; `swap` flips which part is the high one."""
    rng = random.Random(seed)
    length = rng.randint(50, 80)
    contours = []
    for lo, hi in ((64, 80), (45, 61)):
        pitch = rng.randint(lo + 4, hi - 4)
        notes = []
        for step in range(length):
            pitch = min(hi, max(lo, pitch + rng.randint(-2, 2)))
            notes.append(Note(step * 12, pitch, 12))
        contours.append(tuple(notes))
    high, low = contours
    first, second = (low, high) if swap else (high, low)
    return Song(resolution=24, tracks=(
        Track(part_id=0, name="part 1", notes=first),
        Track(part_id=1, name="part 2", notes=second),
    ), source_id=source_id)


def interchangeable_corpus(n: int = 320, seed: int = 31) -> list[Song]:
    return [interchangeable_song(f"pair_{i:04d}", seed * 7919 + i,
                                 swap=bool(i % 2))
            for i in range(n)]
