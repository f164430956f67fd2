"""Statistical guarantees of the generated corpora."""

import numpy as np

from partsep.baselines import fit_zones
from partsep.core import accuracy, downmix
from partsep.features import hints_of
from partsep.synthetic import (
    SATB_RANGES,
    disjoint_octaves_corpus,
    interchangeable_corpus,
    standin_chorale_corpus,
)


class TestDisjointOctaves:
    def test_parts_never_share_pitch(self):
        for song in disjoint_octaves_corpus(5):
            ranges = [(min(n.pitch for n in t.notes), max(n.pitch for n in t.notes))
                      for t in song.tracks]
            for (_, hi), (lo, _) in zip(ranges[:-1], ranges[1:]):
                assert hi < lo

    def test_zones_separate_perfectly(self):
        mixes = [downmix(s) for s in disjoint_octaves_corpus(8)]
        zones = fit_zones(mixes[:6])
        for mix in mixes[6:]:
            assert accuracy(zones.predict(mix), mix) == 1.0

    def test_deterministic(self):
        a = disjoint_octaves_corpus(3, seed=9)
        b = disjoint_octaves_corpus(3, seed=9)
        assert a == b


class TestInterchangeable:
    def test_registers_flip_between_songs(self):
        songs = interchangeable_corpus(6)
        means = [hints_of(downmix(s)).mean_pitches for s in songs]
        for even, odd in zip(means[0::2], means[1::2]):
            assert even[0] > even[1]   # part 0 high on even songs
            assert odd[0] < odd[1]     # flipped on odd songs

    def test_global_statistics_symmetric(self):
        songs = interchangeable_corpus(40)
        per_part = [[], []]
        for song in songs:
            mix = downmix(song)
            for note, label in zip(mix.notes, mix.labels):
                per_part[label].append(note.pitch)
        m0, m1 = np.mean(per_part[0]), np.mean(per_part[1])
        assert abs(m0 - m1) < 2.0  # neither index owns a register overall

    def test_contours_never_cross(self):
        for song in interchangeable_corpus(4):
            by_time = {}
            for track in song.tracks:
                top = max(hints_of(downmix(song)).mean_pitches)
                for n in track.notes:
                    by_time.setdefault(n.time, []).append(n.pitch)
            assert all(max(v) - min(v) > 0 for v in by_time.values()
                       if len(v) == 2)


class TestChoraleStandIn:
    def test_corpus_scale(self):
        corpus = standin_chorale_corpus(20)
        notes = [len(downmix(s)) for s in corpus]
        assert all(s.K == 4 for s in corpus)
        assert 150 <= np.mean(notes) <= 350

    def test_voices_stay_in_range(self):
        for song in standin_chorale_corpus(5):
            for track, (name, lo, hi) in zip(song.tracks, SATB_RANGES):
                assert track.name == name
                assert all(lo <= n.pitch <= hi for n in track.notes)

    def test_ranges_overlap_between_voices(self):
        # adjacent voices must be confusable or the task is trivial
        for (_, lo_a, hi_a), (_, lo_b, hi_b) in zip(SATB_RANGES, SATB_RANGES[1:]):
            assert lo_a < hi_b

    def test_grid_alignment(self):
        for song in standin_chorale_corpus(3):
            assert song.resolution == 24
            for track in song.tracks:
                for n in track.notes:
                    assert n.time % 12 == 0
                    assert n.duration in (12, 24, 48)

    def test_deterministic(self):
        assert standin_chorale_corpus(4) == standin_chorale_corpus(4)
