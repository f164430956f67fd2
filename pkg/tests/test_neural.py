"""Model wiring, causality, online stepping, checkpoints, and training."""

import copy
import os

import numpy as np
import pytest

from partsep.core import Mixture, Note, Song, Track, downmix
from partsep.features import FeatureConfig, encode, hints_of
from partsep.neural import (
    ModelConfig,
    OnlineStepper,
    SeparationModel,
    TrainConfig,
    crop_tensor,
    default_model_config,
    encode_step,
    evaluate,
    load_checkpoint,
    make_batch,
    predict,
    save_checkpoint,
    train,
)
from partsep.synthetic import disjoint_octaves_song, standin_chorale_song

ARCHS = ("lstm", "bilstm", "transformer_enc", "transformer_dec")


def chorale_mixture(seed=5):
    return downmix(standin_chorale_song(f"fix_{seed}", seed))


def octave_mixture(seed=1):
    return downmix(disjoint_octaves_song(f"oct_{seed}", seed))


class TestModelConfig:
    def test_online_archs_reject_duration(self):
        for arch in ("lstm", "transformer_dec"):
            with pytest.raises(ValueError):
                ModelConfig(arch=arch, k=4,
                            feature=FeatureConfig(use_duration=True))

    def test_offline_archs_accept_duration(self):
        for arch in ("bilstm", "transformer_enc"):
            cfg = ModelConfig(arch=arch, k=4,
                              feature=FeatureConfig(use_duration=True))
            assert not cfg.is_online

    def test_defaults_wire_duration_by_arch(self):
        assert default_model_config("bilstm", k=4).feature.use_duration
        assert default_model_config("transformer_enc", k=4).feature.use_duration
        assert not default_model_config("lstm", k=4).feature.use_duration
        assert not default_model_config("transformer_dec", k=4).feature.use_duration

    def test_rejects_unknown_arch_and_bad_k(self):
        with pytest.raises(ValueError):
            ModelConfig(arch="gru", k=4)
        with pytest.raises(ValueError):
            ModelConfig(arch="lstm", k=1)

    def test_dict_roundtrip(self):
        cfg = default_model_config("transformer_enc", k=3,
                                   use_pitch_hints=True, augment="light")
        again = ModelConfig.from_dict(cfg.to_dict())
        assert again == cfg


class TestBatch:
    def test_padding_and_mask(self):
        mix = chorale_mixture()
        fc = FeatureConfig()
        ft = encode(mix, hints=None, config=fc)
        items = [(crop_tensor(ft, 0, 5), mix.label_array()[:5]),
                 (crop_tensor(ft, 0, 3), mix.label_array()[:3])]
        batch = make_batch(items)
        assert batch.mask.shape == (2, 5)
        assert batch.mask.tolist() == [[1, 1, 1, 1, 1], [1, 1, 1, 0, 0]]
        assert batch.labels.shape == (2, 5)
        # padded tail is zeros in every column
        for col in batch.columns.values():
            assert not col[1, 3:].any()

    def test_inconsistent_columns_rejected(self):
        mix = chorale_mixture()
        with_dur = encode(mix, hints=None,
                          config=FeatureConfig(use_duration=True))
        without = encode(mix, hints=None, config=FeatureConfig())
        with pytest.raises(ValueError):
            make_batch([(with_dur, None), (without, None)])

    def test_explicit_length_crops(self):
        mix = chorale_mixture()
        ft = encode(mix, hints=None, config=FeatureConfig())
        batch = make_batch([(ft, mix.label_array())], length=16)
        assert batch.mask.shape == (1, 16)
        assert batch.mask.all()


class TestForward:
    def test_logit_shapes_all_archs(self):
        mix = octave_mixture()
        for arch in ARCHS:
            cfg = default_model_config(arch, k=4)
            model = SeparationModel(cfg, seed=2)
            ft = encode(mix, hints=None, config=cfg.feature)
            batch = make_batch([(ft, None)])
            logits, state = model.forward(batch, training=False)
            assert logits.data.shape == (1, len(mix), 4)
            if arch == "lstm":
                assert len(state) == cfg.layers
            else:
                assert state is None

    def test_state_rejected_off_lstm(self):
        mix = octave_mixture()
        for arch in ("bilstm", "transformer_enc", "transformer_dec"):
            cfg = default_model_config(arch, k=4)
            model = SeparationModel(cfg, seed=2)
            ft = encode(mix, hints=None, config=cfg.feature)
            batch = make_batch([(ft, None)])
            with pytest.raises(ValueError):
                model.forward(batch, training=False, state=[(None, None)])

    def test_training_forward_needs_rng(self):
        cfg = default_model_config("lstm", k=4)
        model = SeparationModel(cfg, seed=2)
        ft = encode(octave_mixture(), hints=None, config=cfg.feature)
        with pytest.raises(ValueError):
            model.forward(make_batch([(ft, None)]), training=True)

    def test_column_mismatch_rejected(self):
        cfg = default_model_config("lstm", k=4, use_entry_hints=True)
        model = SeparationModel(cfg, seed=2)
        plain = encode(octave_mixture(), hints=None, config=FeatureConfig())
        with pytest.raises(ValueError):
            model.forward(make_batch([(plain, None)]), training=False)


def perturbed_batches(mixture, cfg, j):
    """Two batches identical except note j carries a different pitch."""
    ft = encode(mixture, hints=None, config=cfg.feature)
    a = make_batch([(ft, None)])
    b = make_batch([(ft, None)])
    b.columns = {k: v.copy() for k, v in b.columns.items()}
    b.columns["pitch"][0, j] = (b.columns["pitch"][0, j] + 7) % 128
    b.columns["frequency"][0, j] *= 1.5
    return a, b


class TestCausality:
    def test_online_archs_ignore_the_future_bitwise(self):
        mix = octave_mixture()
        j = 40
        for arch in ("lstm", "transformer_dec"):
            cfg = default_model_config(arch, k=4)
            model = SeparationModel(cfg, seed=4)
            a, b = perturbed_batches(mix, cfg, j)
            la, _ = model.forward(a, training=False)
            lb, _ = model.forward(b, training=False)
            assert np.array_equal(la.data[0, :j], lb.data[0, :j]), arch
            assert not np.array_equal(la.data[0, j:], lb.data[0, j:]), arch

    def test_offline_archs_see_the_future(self):
        mix = octave_mixture()
        j = 40
        for arch in ("bilstm", "transformer_enc"):
            cfg = default_model_config(arch, k=4)
            model = SeparationModel(cfg, seed=4)
            a, b = perturbed_batches(mix, cfg, j)
            la, _ = model.forward(a, training=False)
            lb, _ = model.forward(b, training=False)
            assert not np.array_equal(la.data[0, :j], lb.data[0, :j]), arch


class TestEncodeStep:
    def test_rows_match_full_encode(self):
        mix = chorale_mixture()
        hints = hints_of(mix)
        fc = FeatureConfig(use_entry_hints=True, use_pitch_hints=True)
        full = encode(mix, hints=hints, config=fc)
        for i, note in enumerate(mix.notes):
            cols = encode_step(note.time, note.pitch, hints, fc,
                               mix.resolution, mix.K)
            assert cols["pitch"] == full.pitch[i]
            assert cols["frequency"] == pytest.approx(full.frequency[i])
            assert cols["beat"] == full.beat[i]
            assert cols["position"] == full.position[i]
            assert np.array_equal(cols["entry"].reshape(-1), full.entry[i])
            assert np.allclose(cols["pitch_hint"].reshape(-1),
                               full.pitch_hint[i])

    def test_raw_time_variant(self):
        mix = chorale_mixture()
        fc = FeatureConfig(time_encoding="raw_time")
        full = encode(mix, hints=None, config=fc)
        note = mix.notes[10]
        cols = encode_step(note.time, note.pitch, None, fc,
                           mix.resolution, mix.K)
        assert cols["time"] == full.time[10]

    def test_duration_configs_rejected(self):
        fc = FeatureConfig(use_duration=True)
        with pytest.raises(ValueError):
            encode_step(0, 60, None, fc, 24, 4)


class TestOnlineStepper:
    def test_matches_batched_forward_closely(self):
        mix = octave_mixture()
        for arch in ("lstm", "transformer_dec"):
            cfg = default_model_config(arch, k=4)
            model = SeparationModel(cfg, seed=6)
            ft = encode(mix, hints=None, config=cfg.feature)
            logits, _ = model.forward(make_batch([(ft, None)]), training=False)
            stepper = OnlineStepper(model, resolution=mix.resolution)
            stepped = np.stack([
                stepper.step(n.time, n.pitch, None)[0] for n in mix.notes])
            assert np.allclose(stepped, logits.data[0], atol=1e-4), arch
            agree = (stepped.argmax(-1) == logits.data[0].argmax(-1)).mean()
            assert agree == 1.0, arch

    def test_reset_replays_bit_exactly(self):
        mix = octave_mixture()
        cfg = default_model_config("lstm", k=4)
        model = SeparationModel(cfg, seed=6)
        stepper = OnlineStepper(model, resolution=mix.resolution)
        first = [stepper.step(n.time, n.pitch, None)[0] for n in mix.notes[:30]]
        stepper.reset()
        second = [stepper.step(n.time, n.pitch, None)[0] for n in mix.notes[:30]]
        assert all(np.array_equal(x, y) for x, y in zip(first, second))

    def test_probabilities_normalised(self):
        cfg = default_model_config("transformer_dec", k=4)
        model = SeparationModel(cfg, seed=6)
        stepper = OnlineStepper(model, resolution=24)
        _, probs = stepper.step(0, 60, None)
        assert probs.shape == (4,)
        assert probs.sum() == pytest.approx(1.0)
        assert (probs >= 0).all()


class TestPredict:
    def test_labels_cover_mixture(self):
        mix = octave_mixture()
        for arch in ARCHS:
            cfg = default_model_config(arch, k=4)
            model = SeparationModel(cfg, seed=8)
            pred = predict(model, mix)
            assert len(pred.labels) == len(mix)
            assert all(0 <= p < 4 for p in pred.labels)
            assert pred.scores.shape == (len(mix), 4)

    def test_online_prefix_property(self):
        mix = octave_mixture()
        hints = hints_of(mix)
        n = 50
        trunc = Mixture(notes=mix.notes[:n], labels=mix.labels[:n],
                        K=mix.K, resolution=mix.resolution)
        for arch in ("lstm", "transformer_dec"):
            cfg = default_model_config(arch, k=4)
            model = SeparationModel(cfg, seed=8)
            whole = predict(model, mix, hints=hints)
            part = predict(model, trunc, hints=hints)
            assert whole.labels[:n] == part.labels
            assert np.array_equal(whole.scores[:n], part.scores)

    def test_k_mismatch_rejected(self):
        cfg = default_model_config("lstm", k=3)
        model = SeparationModel(cfg, seed=8)
        with pytest.raises(ValueError):
            predict(model, octave_mixture())

    def test_untrained_is_near_chance(self):
        mix = octave_mixture()
        cfg = default_model_config("lstm", k=4)
        model = SeparationModel(cfg, seed=8)
        pred = predict(model, mix)
        hits = sum(a == b for a, b in zip(pred.labels, mix.labels))
        assert 0.05 <= hits / len(mix) <= 0.6


class TestCheckpoint:
    def test_roundtrip_is_bit_exact(self, tmp_path):
        cfg = default_model_config("bilstm", k=4, use_pitch_hints=True)
        model = SeparationModel(cfg, seed=9)
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, model, meta={"note": "test", "epoch": 3})
        clone, meta = load_checkpoint(path)
        assert meta["note"] == "test" and meta["epoch"] == 3
        assert clone.config == cfg
        for name, tensor in model.params().items():
            other = clone.params()[name]
            assert tensor.data.dtype == other.data.dtype
            assert np.array_equal(tensor.data, other.data), name

    def test_loaded_model_predicts_identically(self, tmp_path):
        mix = octave_mixture()
        cfg = default_model_config("lstm", k=4)
        model = SeparationModel(cfg, seed=9)
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, model)
        clone, _ = load_checkpoint(path)
        assert predict(model, mix).labels == predict(clone, mix).labels

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"NOTACKPT" + b"\x00" * 64)
        with pytest.raises(ValueError):
            load_checkpoint(path)

    def test_rejects_truncated_payload(self, tmp_path):
        cfg = default_model_config("lstm", k=2)
        model = SeparationModel(cfg, seed=9)
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, model)
        raw = path.read_bytes()
        path.write_bytes(raw[:-17])
        with pytest.raises(ValueError):
            load_checkpoint(path)

    def test_no_stray_temp_files(self, tmp_path):
        cfg = default_model_config("lstm", k=2)
        model = SeparationModel(cfg, seed=9)
        save_checkpoint(tmp_path / "model.ckpt", model)
        assert os.listdir(tmp_path) == ["model.ckpt"]


class TestTrainConfig:
    def test_text_roundtrip(self):
        cfg = TrainConfig(batch_size=4, epochs=7, alpha=0.002, seed=3)
        assert TrainConfig.from_text(cfg.to_text()) == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig.from_text("momentum=0.9\n")

    def test_eval_shorter_than_train_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig(train_len=500, eval_len=100)


class TestTraining:
    def test_loss_falls_when_memorising(self):
        mix = octave_mixture()
        cfg = default_model_config("lstm", k=4, augment="none")
        model = SeparationModel(cfg, seed=0)
        log = train(model, [mix], [mix],
                    TrainConfig(batch_size=1, epochs=4, seed=0))
        assert len(log.rows) == 4
        assert log.rows[-1]["loss"] < log.rows[0]["loss"]
        assert log.elapsed > 0
        assert 0.0 <= log.best_valid <= 1.0

    def test_same_seed_same_run(self):
        mixes = [octave_mixture(s) for s in (1, 2)]
        logs = []
        finals = []
        for _ in range(2):
            cfg = default_model_config("lstm", k=4)
            model = SeparationModel(cfg, seed=5)
            log = train(model, mixes, mixes[:1],
                        TrainConfig(batch_size=2, epochs=2, seed=5))
            logs.append(log.to_text())
            finals.append({k: v.data.copy() for k, v in model.params().items()})
        assert logs[0] == logs[1]
        assert all(np.array_equal(finals[0][k], finals[1][k]) for k in finals[0])

    def test_best_weights_win(self):
        # after training, stored weights must reproduce the best validation
        mixes = [octave_mixture(s) for s in (1, 2, 3)]
        cfg = default_model_config("lstm", k=4, augment="none")
        model = SeparationModel(cfg, seed=1)
        log = train(model, mixes[:2], mixes[2:],
                    TrainConfig(batch_size=2, epochs=3, seed=1))
        assert evaluate(model, mixes[2:]) == pytest.approx(log.best_valid)

    def test_divergence_raises(self):
        mix = octave_mixture()
        cfg = default_model_config("lstm", k=4)
        model = SeparationModel(cfg, seed=0)
        weight = next(iter(model.params().values()))
        weight.data[...] = np.inf
        with np.errstate(invalid="ignore"):
            with pytest.raises(RuntimeError, match="diverged"):
                train(model, [mix], [mix], TrainConfig(batch_size=1, epochs=1))

    def test_empty_sets_rejected(self):
        cfg = default_model_config("lstm", k=4)
        model = SeparationModel(cfg, seed=0)
        with pytest.raises(ValueError):
            train(model, [], [octave_mixture()], TrainConfig())

    def test_windowed_eval_carries_lstm_state(self):
        mix = chorale_mixture()
        cfg = default_model_config("lstm", k=4)
        model = SeparationModel(cfg, seed=3)
        whole = evaluate(model, [mix], eval_len=2000)
        windowed = evaluate(model, [mix], eval_len=50)
        assert abs(whole - windowed) <= 0.02
