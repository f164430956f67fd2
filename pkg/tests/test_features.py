"""Feature extraction: frequency, beat/position, hints, clipping, augmentation."""

import random

import numpy as np
import pytest

from partsep.core import Mixture, Note, Song, Track, downmix
from partsep.features import (
    AUGMENT_RANGES,
    FeatureConfig,
    Hints,
    beat_position,
    encode,
    entry_hints,
    frequency,
    hints_of,
    pitch_hints,
    sample_shift,
    transpose,
    transpose_augment,
)


def make_mixture(rows, k, resolution=24):
    """rows = [(time, pitch, duration, label), ...] in canonical order."""
    notes = tuple(Note(t, p, d) for t, p, d, _ in rows)
    labels = tuple(y for _, _, _, y in rows)
    return Mixture(notes=notes, labels=labels, K=k, resolution=resolution)


class TestFrequency:
    def test_reference_pitch(self):
        assert frequency(69) == 440.0

    def test_octave_doubles(self):
        assert frequency(81) == pytest.approx(880.0)

    def test_middle_c(self):
        assert frequency(60) == pytest.approx(261.6256, abs=1e-3)

    def test_strictly_increasing(self):
        f = frequency(np.arange(128))
        assert (np.diff(f) > 0).all()

    def test_octave_ratio_everywhere(self):
        p = np.arange(0, 116)
        assert frequency(p + 12) == pytest.approx(2.0 * frequency(p))


class TestBeatPosition:
    @pytest.mark.parametrize("time,res,expect", [
        (0, 24, (0, 0)),
        (24, 24, (1, 0)),
        (50, 24, (2, 2)),
    ])
    def test_examples(self, time, res, expect):
        beat, pos = beat_position(time, res)
        assert (int(beat), int(pos)) == expect

    def test_reconstruction(self):
        times = np.arange(0, 500, 7)
        beat, pos = beat_position(times, 24)
        assert (beat * 24 + pos == times).all()


class TestHints:
    def test_entry_step_function(self):
        rows = [(0, 60, 4, 0), (5, 70, 4, 0), (10, 50, 4, 1), (12, 62, 4, 0)]
        mix = make_mixture(rows, k=2)
        hints = entry_hints(mix)
        # part 1 enters at t=10: zero before, one from then on
        assert hints[:, 1].tolist() == [0.0, 0.0, 1.0, 1.0]
        # part 0 enters at t=0: all ones
        assert hints[:, 0].tolist() == [1.0, 1.0, 1.0, 1.0]

    def test_unused_part_all_zero(self):
        mix = make_mixture([(0, 60, 4, 0), (4, 62, 4, 0)], k=3)
        hints = entry_hints(mix)
        assert not hints[:, 1].any()
        assert not hints[:, 2].any()

    def test_pitch_hint_is_mean(self):
        rows = [(0, 60, 4, 0), (4, 64, 4, 0), (8, 68, 4, 0), (0, 72, 4, 1)]
        mix = make_mixture(sorted(rows), k=2)
        assert pitch_hints(mix).tolist() == [64.0, 72.0]

    def test_unused_part_sentinel_zero(self):
        mix = make_mixture([(0, 60, 4, 0), (4, 62, 4, 2)], k=3)
        assert pitch_hints(mix)[1] == 0.0

    def test_satb_hints_descend(self):
        rng = random.Random(11)
        ranges = [(67, 79), (60, 72), (52, 64), (40, 57)]  # S, A, T, B
        tracks = tuple(
            Track(k, "satb"[k],
                  tuple(Note(t * 6, rng.randint(lo, hi), 6) for t in range(30)))
            for k, (lo, hi) in enumerate(ranges)
        )
        hints = pitch_hints(downmix(Song(24, tracks)))
        assert (np.diff(hints) < 0).all()


class TestTranspose:
    def test_shift_up_six(self):
        mix = make_mixture([(0, 60, 4, 0), (4, 65, 4, 1)], k=2)
        out = transpose(mix, 6)
        assert [n.pitch for n in out.notes] == [66, 71]
        assert out.labels == mix.labels

    def test_shift_zero_identity(self):
        mix = make_mixture([(0, 60, 4, 0)], k=1)
        assert transpose(mix, 0) is mix

    def test_intervals_preserved_without_clamping(self):
        rng = random.Random(3)
        rows = sorted((rng.randrange(100), rng.randrange(30, 90), 4, 0)
                      for _ in range(50))
        mix = make_mixture(rows, k=1)
        out = transpose(mix, -5)
        assert (out.pitches() - mix.pitches() == -5).all()

    def test_clamped_at_edges(self):
        mix = make_mixture([(0, 125, 4, 0), (4, 2, 4, 0)], k=1)
        assert [n.pitch for n in transpose(mix, 6).notes] == [127, 8]
        assert [n.pitch for n in transpose(mix, -6).notes] == [119, 0]

    def test_sample_shift_ranges(self):
        rng = random.Random(0)
        for profile, (lo, hi) in AUGMENT_RANGES.items():
            seen = {sample_shift(profile, rng) for _ in range(300)}
            assert min(seen) >= lo and max(seen) <= hi
            if profile != "none":
                assert seen == set(range(lo, hi + 1))

    def test_augment_none_is_identity(self):
        mix = make_mixture([(0, 60, 4, 0)], k=1)
        assert transpose_augment(mix, "none", random.Random(1)) is mix


class TestEncode:
    def _mix(self):
        rows = [(0, 60, 4, 0), (5000, 70, 200, 1)]
        return make_mixture(rows, k=2)

    def test_time_clipped_at_4096(self):
        cfg = FeatureConfig(time_encoding="raw_time")
        assert encode(self._mix(), None, cfg).time.tolist() == [0, 4096]

    def test_duration_clipped_at_192(self):
        cfg = FeatureConfig(time_encoding="raw_time", use_duration=True)
        assert encode(self._mix(), None, cfg).duration.tolist() == [4, 192]

    def test_time_encodings_share_pitch_column(self):
        mix = self._mix()
        a = encode(mix, None, FeatureConfig(time_encoding="raw_time"))
        b = encode(mix, None, FeatureConfig(time_encoding="beat_position_embedding"))
        assert (a.pitch == b.pitch).all()
        assert a.beat is None and b.time is None
        assert b.beat is not None

    def test_beat_position_reconstructs_clipped_time(self):
        rng = random.Random(9)
        rows = sorted((rng.randrange(6000), rng.randrange(128), 4, 0)
                      for _ in range(200))
        mix = make_mixture(rows, k=1)
        ft = encode(mix, None, FeatureConfig(time_encoding="beat_position_embedding"))
        clipped = np.minimum(mix.times(), 4096)
        assert (ft.beat * 24 + ft.position == clipped).all()

    def test_hints_required_when_configured(self):
        cfg = FeatureConfig(use_entry_hints=True)
        with pytest.raises(ValueError):
            encode(self._mix(), None, cfg)

    def test_hint_columns(self):
        mix = self._mix()
        cfg = FeatureConfig(use_entry_hints=True, use_pitch_hints=True)
        ft = encode(mix, hints_of(mix), cfg)
        assert ft.entry.shape == (2, 2)
        assert ft.entry[0].tolist() == [1.0, 0.0]
        assert ft.pitch_hint[0] == pytest.approx([60 / 128, 70 / 128])
        assert (ft.pitch_hint[0] == ft.pitch_hint[1]).all()

    def test_row_count_matches_for_every_config(self):
        mix = self._mix()
        hints = hints_of(mix)
        for enc in ("raw_time", "raw_beat_position", "time_embedding",
                    "beat_position_embedding"):
            for dur in (False, True):
                cfg = FeatureConfig(time_encoding=enc, use_duration=dur,
                                    use_entry_hints=True, use_pitch_hints=True)
                assert encode(mix, hints, cfg).n == len(mix)

    def test_deterministic(self):
        mix = self._mix()
        cfg = FeatureConfig(use_pitch_hints=True)
        a = encode(mix, hints_of(mix), cfg)
        b = encode(mix, hints_of(mix), cfg)
        assert (a.pitch == b.pitch).all() and (a.frequency == b.frequency).all()


class TestConfig:
    def test_text_roundtrip(self):
        cfg = FeatureConfig(use_embeddings=False, time_encoding="raw_time",
                            use_duration=True, augment="light")
        assert FeatureConfig.from_text(cfg.to_text()) == cfg

    def test_comments_and_blank_lines_ignored(self):
        text = "# a comment\n\ntime_encoding=raw_time\nuse_duration=true\n"
        cfg = FeatureConfig.from_text(text)
        assert cfg.time_encoding == "raw_time"
        assert cfg.use_duration is True

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            FeatureConfig.from_text("volume=11\n")

    def test_bad_encoding_rejected(self):
        with pytest.raises(ValueError):
            FeatureConfig(time_encoding="sundial")

    def test_hints_of_roundtrip(self):
        mix = make_mixture([(0, 60, 4, 0), (2, 72, 4, 1)], k=2)
        h = hints_of(mix)
        assert h == Hints(onsets=(0, 2), mean_pitches=(60.0, 72.0))
