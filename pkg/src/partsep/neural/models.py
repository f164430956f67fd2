"""The four separation models on the autodiff kernel.

Two forward paths exist on purpose:

* `SeparationModel.forward` — batched (B, T) tensors for training and for
  offline (full-context) inference.  The LSTM input projection runs as one
  big matmul; transformers attend under padding (+ lookahead) masks.
* `OnlineStepper` — one note at a time with carried state (LSTM hidden/cell
  or decoder KV cache).  `predict` for online architectures and the live
  gateway both run on this path, so streamed labels equal batch-online
  labels bit for bit: they are the same sequence of operations.

Feature/architecture compatibility is enforced at config time: online
models must not see durations (the remaining duration of the current note
is future information in a live setting).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..core import Mixture, Prediction
from ..features import FeatureConfig, FeatureTensor, Hints, encode, frequency, hints_of
from ..kernel import (
    BiLSTM,
    Embedding,
    LayerNorm,
    Linear,
    LSTM,
    Tensor,
    TransformerBlock,
    causal_mask,
    concat,
    dropout,
    padding_mask,
)

ARCHS = ("lstm", "bilstm", "transformer_enc", "transformer_dec")
ONLINE_ARCHS = ("lstm", "transformer_dec")

EMB_WIDTH = 16
PITCH_TABLE = 128
POSITION_TABLE = 128  # position < resolution; 128 covers any sane grid


@dataclass(frozen=True)
class ModelConfig:
    """Architecture plus the feature recipe the model was built for."""

    arch: str
    k: int
    feature: FeatureConfig = field(default_factory=FeatureConfig)
    hidden: int = 128       # BiLSTM: total width, half per direction
    layers: int = 3
    heads: int = 8
    ffn: int = 256
    dropout: float = 0.2
    emb_width: int = EMB_WIDTH

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ValueError(f"unknown arch {self.arch!r}")
        if self.k < 2:
            raise ValueError(f"need at least 2 output classes, got {self.k}")
        if self.arch.startswith("transformer") and self.hidden % self.heads:
            raise ValueError(f"heads ({self.heads}) must divide width ({self.hidden})")
        if self.arch == "bilstm" and self.hidden % 2:
            raise ValueError("bilstm width must be even (half per direction)")
        if self.is_online and self.feature.use_duration:
            raise ValueError(
                f"{self.arch} is online and cannot take durations as input")

    @property
    def is_online(self) -> bool:
        return self.arch in ONLINE_ARCHS

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["feature"] = dict(self.feature.__dict__)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["feature"] = FeatureConfig(**d["feature"])
        return cls(**d)


def default_model_config(arch: str, k: int, **feature_overrides) -> ModelConfig:
    """Per-architecture defaults: offline models additionally take durations."""
    feature = FeatureConfig(use_duration=arch in ("bilstm", "transformer_enc"))
    if feature_overrides:
        feature = replace(feature, **feature_overrides)
    return ModelConfig(arch=arch, k=k, feature=feature)


# ---------------------------------------------------------------------------
# batching


def feature_columns(ft: FeatureTensor) -> dict[str, np.ndarray]:
    """Non-None columns of a FeatureTensor as a name->array dict."""
    cols = {"pitch": ft.pitch, "frequency": ft.frequency}
    for name in ("time", "beat", "position", "duration", "entry", "pitch_hint"):
        value = getattr(ft, name)
        if value is not None:
            cols[name] = value
    return cols


@dataclass
class Batch:
    columns: dict[str, np.ndarray]  # each (B, T) or (B, T, K)
    mask: np.ndarray                # (B, T), 1 = real note
    labels: Optional[np.ndarray]    # (B, T) int, only for training/eval


def make_batch(items, length: int | None = None,
               dtype=np.float32) -> Batch:
    """Pad a list of (FeatureTensor, labels-or-None) into one batch."""
    col_sets = [feature_columns(ft) for ft, _ in items]
    names = set(col_sets[0])
    if any(set(c) != names for c in col_sets):
        raise ValueError("inconsistent feature columns across batch")
    lengths = [ft.n for ft, _ in items]
    t_max = max(lengths) if length is None else length
    b = len(items)

    columns: dict[str, np.ndarray] = {}
    for name in names:
        first = col_sets[0][name]
        shape = (b, t_max) + first.shape[1:]
        dt = dtype if np.issubdtype(first.dtype, np.floating) else np.int64
        out = np.zeros(shape, dtype=dt)
        for row, cols in enumerate(col_sets):
            out[row, :lengths[row]] = cols[name][:t_max]
        columns[name] = out

    mask = np.zeros((b, t_max), dtype=dtype)
    for row, n in enumerate(lengths):
        mask[row, :min(n, t_max)] = 1.0

    labels = None
    if items[0][1] is not None:
        labels = np.zeros((b, t_max), dtype=np.int64)
        for row, (_, lab) in enumerate(items):
            labels[row, :lengths[row]] = np.asarray(lab)[:t_max]
    return Batch(columns=columns, mask=mask, labels=labels)


def crop_tensor(ft: FeatureTensor, lo: int, hi: int) -> FeatureTensor:
    """Row slice [lo, hi) of every column (training window crops)."""
    pick = lambda col: None if col is None else col[lo:hi]
    return FeatureTensor(pitch=ft.pitch[lo:hi], frequency=ft.frequency[lo:hi],
                         time=pick(ft.time), beat=pick(ft.beat),
                         position=pick(ft.position), duration=pick(ft.duration),
                         entry=pick(ft.entry), pitch_hint=pick(ft.pitch_hint))


# ---------------------------------------------------------------------------
# the model


class SeparationModel:
    def __init__(self, config: ModelConfig, seed: int = 0, dtype=np.float32):
        self.config = config
        self.dtype = dtype
        rng = np.random.default_rng(seed)
        fc = config.feature
        w = config.emb_width

        self.embeddings: dict[str, Embedding] = {}
        d_in = 1  # frequency (scaled) is always an input
        if fc.use_embeddings:
            self.embeddings["pitch"] = Embedding(PITCH_TABLE, w, rng, dtype)
            d_in += w
        else:
            d_in += 1
        if fc.time_encoding == "raw_time":
            d_in += 1
        elif fc.time_encoding == "raw_beat_position":
            d_in += 2
        elif fc.time_encoding == "time_embedding":
            self.embeddings["time"] = Embedding(fc.time_clip + 1, w, rng, dtype)
            d_in += w
        else:  # beat_position_embedding
            self.embeddings["beat"] = Embedding(fc.beat_clip + 1, w, rng, dtype)
            self.embeddings["position"] = Embedding(POSITION_TABLE, w, rng, dtype)
            d_in += 2 * w
        if fc.use_duration:
            if fc.use_embeddings:
                self.embeddings["duration"] = Embedding(fc.duration_clip + 1, w,
                                                        rng, dtype)
                d_in += w
            else:
                d_in += 1
        if fc.use_entry_hints:
            d_in += config.k
        if fc.use_pitch_hints:
            d_in += config.k

        self.d_in = d_in
        self.proj = Linear(d_in, config.hidden, rng, dtype)
        if config.arch == "lstm":
            self.body = [LSTM(config.hidden, config.hidden, rng, dtype)
                         for _ in range(config.layers)]
        elif config.arch == "bilstm":
            self.body = [BiLSTM(config.hidden, config.hidden // 2, rng, dtype)
                         for _ in range(config.layers)]
        else:
            self.body = [TransformerBlock(config.hidden, config.heads,
                                          config.ffn, rng, dtype)
                         for _ in range(config.layers)]
            self.final_ln = LayerNorm(config.hidden, dtype)
        self.head = Linear(config.hidden, config.k, rng, dtype)

    # -- parameters -------------------------------------------------------

    def params(self) -> dict[str, Tensor]:
        out = {}
        for name, emb in self.embeddings.items():
            out[f"emb.{name}.table"] = emb.table
        out.update({f"proj.{k}": v for k, v in self.proj.params().items()})
        for i, layer in enumerate(self.body):
            out.update({f"body.{i}.{k}": v for k, v in layer.params().items()})
        if hasattr(self, "final_ln"):
            out.update({f"final_ln.{k}": v
                        for k, v in self.final_ln.params().items()})
        out.update({f"head.{k}": v for k, v in self.head.params().items()})
        return out

    # -- forward ----------------------------------------------------------

    def _expected_columns(self) -> set[str]:
        fc = self.config.feature
        cols = {"pitch", "frequency"}
        cols |= {"raw_time": {"time"}, "time_embedding": {"time"},
                 "raw_beat_position": {"beat", "position"},
                 "beat_position_embedding": {"beat", "position"},
                 }[fc.time_encoding]
        if fc.use_duration:
            cols.add("duration")
        if fc.use_entry_hints:
            cols.add("entry")
        if fc.use_pitch_hints:
            cols.add("pitch_hint")
        return cols

    def _inputs(self, batch: Batch) -> Tensor:
        fc = self.config.feature
        got = set(batch.columns)
        want = self._expected_columns()
        if got != want:
            raise ValueError(
                f"feature/arch mismatch: model expects {sorted(want)}, "
                f"batch carries {sorted(got)}")
        cols = batch.columns
        dt = self.dtype
        const = lambda a: Tensor(np.ascontiguousarray(a, dtype=dt))
        pieces: list[Tensor] = []
        if fc.use_embeddings:
            pieces.append(self.embeddings["pitch"](cols["pitch"]))
        else:
            pieces.append(const(cols["pitch"][..., None] / 128.0))
        if fc.time_encoding == "raw_time":
            pieces.append(const(cols["time"][..., None] / fc.time_clip))
        elif fc.time_encoding == "raw_beat_position":
            pieces.append(const(cols["beat"][..., None] / fc.beat_clip))
            pieces.append(const(cols["position"][..., None] / POSITION_TABLE))
        elif fc.time_encoding == "time_embedding":
            pieces.append(self.embeddings["time"](cols["time"]))
        else:
            pieces.append(self.embeddings["beat"](cols["beat"]))
            pieces.append(self.embeddings["position"](cols["position"]))
        if fc.use_duration:
            if fc.use_embeddings:
                pieces.append(self.embeddings["duration"](cols["duration"]))
            else:
                pieces.append(const(cols["duration"][..., None] / fc.duration_clip))
        pieces.append(const(cols["frequency"][..., None] / 440.0))
        if fc.use_entry_hints:
            pieces.append(const(cols["entry"]))
        if fc.use_pitch_hints:
            pieces.append(const(cols["pitch_hint"]))
        return self.proj(concat(pieces, axis=-1))

    def forward(self, batch: Batch, rng: np.random.Generator | None = None,
                training: bool = False, state=None):
        """Batched scores (B, T, K); returns (logits, new_state).

        `state` is a per-layer list of (h, c) for the LSTM and must be None
        for other architectures (transformer windows restart cold).
        """
        cfg = self.config
        if training and rng is None:
            raise ValueError("training forward needs an RNG for dropout")
        x = self._inputs(batch)
        new_state = None
        if cfg.arch in ("lstm", "bilstm"):
            if cfg.arch == "bilstm":
                if state is not None:
                    raise ValueError("bilstm carries no cross-window state")
                for layer in self.body:
                    x = dropout(layer(x, mask=batch.mask), cfg.dropout, rng,
                                training)
            else:
                new_state = []
                for i, layer in enumerate(self.body):
                    x, st = layer(x, mask=batch.mask,
                                  state=None if state is None else state[i])
                    x = dropout(x, cfg.dropout, rng, training)
                    new_state.append(st)
        else:
            if state is not None:
                raise ValueError("transformers carry no cross-window state")
            t = x.data.shape[1]
            add_mask = padding_mask(batch.mask, dtype=self.dtype)
            if cfg.arch == "transformer_dec":
                add_mask = add_mask + causal_mask(t, dtype=self.dtype)
            for block in self.body:
                x = block(x, add_mask, cfg.dropout, rng, training)
            x = self.final_ln(x)
        return self.head(x), new_state


# ---------------------------------------------------------------------------
# single-note feature rows and the online stepping engine


def encode_step(time: int, pitch: int, hints: Optional[Hints],
                config: FeatureConfig, resolution: int, k: int) -> dict:
    """Feature columns for one incoming note, shaped (1, 1, ...).

    Produces exactly the values `encode` would compute for this row, so a
    stepped pass over a mixture sees the same numbers as a batch encode.
    """
    t = min(int(time), config.time_clip)
    cols: dict[str, np.ndarray] = {
        "pitch": np.array([[pitch]], dtype=np.int64),
        "frequency": np.array([[frequency(pitch)]]),
    }
    if config.uses_beat_position:
        cols["beat"] = np.array([[min(t // resolution, config.beat_clip)]],
                                dtype=np.int64)
        cols["position"] = np.array([[t % resolution]], dtype=np.int64)
    else:
        cols["time"] = np.array([[t]], dtype=np.int64)
    if config.use_duration:
        raise ValueError("online stepping cannot supply durations")
    if config.use_entry_hints:
        if hints is None:
            raise ValueError("config requests hints but none were provided")
        row = [1.0 if (on is not None and time >= on) else 0.0
               for on in hints.onsets]
        cols["entry"] = np.array([[row]])
    if config.use_pitch_hints:
        if hints is None:
            raise ValueError("config requests hints but none were provided")
        cols["pitch_hint"] = np.array(
            [[[m / 128.0 for m in hints.mean_pitches]]])
    return cols


class OnlineStepper:
    """Feed one note at a time through an online model.

    LSTM: carries (h, c) per layer.  Transformer decoder: keeps per-block
    key/value caches and attends over the whole history.  The same object
    serves batch-replay prediction and the live gateway.
    """

    def __init__(self, model: SeparationModel, resolution: int = 24):
        if not model.config.is_online:
            raise ValueError(f"{model.config.arch} has no online mode")
        self.model = model
        self.resolution = resolution
        self.reset()

    def reset(self) -> None:
        self._state = None          # lstm per-layer (h, c)
        self._kv = None             # decoder per-block (keys, values)
        self._count = 0

    def step(self, time: int, pitch: int, hints: Optional[Hints]):
        """Process one note; returns (raw scores (K,), probabilities (K,))."""
        model = self.model
        cfg = model.config
        cols = encode_step(time, pitch, hints, cfg.feature, self.resolution,
                           cfg.k)
        batch = Batch(columns=cols, mask=np.ones((1, 1), dtype=model.dtype),
                      labels=None)
        x = model._inputs(batch)
        if cfg.arch == "lstm":
            new_state = []
            for i, layer in enumerate(model.body):
                x, st = layer(x, state=None if self._state is None
                              else self._state[i])
                new_state.append(st)
            self._state = new_state
        else:
            x = self._decoder_step(x)
        logits = model.head(x)
        self._count += 1
        return logits.data[0, 0].copy(), _softmax_row(logits.data[0, 0])

    def _decoder_step(self, x: Tensor) -> Tensor:
        model = self.model
        cfg = model.config
        dk = cfg.hidden // cfg.heads
        if self._kv is None:
            self._kv = [None] * len(model.body)
        for b, block in enumerate(model.body):
            att = block.att
            fused = att.qkv(block.ln1(x))           # (1, 1, 3*hidden)
            fused = fused.reshape(1, 1, 3, cfg.heads, dk).transpose(2, 0, 3, 1, 4)
            q, k, v = fused[0], fused[1], fused[2]  # (1, heads, 1, dk)
            if self._kv[b] is None:
                keys, values = k, v
            else:
                keys = concat([self._kv[b][0], k], axis=2)
                values = concat([self._kv[b][1], v], axis=2)
            self._kv[b] = (Tensor(keys.data), Tensor(values.data))
            q = q * (1.0 / np.sqrt(dk))  # same op order as the batched path
            scores = q @ keys.transpose(0, 1, 3, 2)
            mixed = (scores.softmax(-1) @ values).transpose(0, 2, 1, 3)
            x = x + att.out(mixed.reshape(1, 1, cfg.hidden))
            x = x + block.ffn(block.ln2(x))
        return model.final_ln(x)


def _softmax_row(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


# ---------------------------------------------------------------------------
# prediction


def predict(model: SeparationModel, mixture: Mixture,
            hints: Optional[Hints] = None, mode: str | None = None,
            eval_len: int = 2000) -> Prediction:
    """Label a whole mixture with a trained model.

    Online architectures run the stepped engine (identical to the live
    path); offline ones run batched full-context windows of `eval_len`.
    Hints default to ground-truth-derived when the feature config wants
    them, mirroring how the datasets are built.
    """
    cfg = model.config
    if mode is not None:
        want = "online" if cfg.is_online else "offline"
        if mode != want:
            raise ValueError(f"{cfg.arch} is an {want} model, asked for {mode}")
    if mixture.K != cfg.k:
        raise ValueError(f"mixture has K={mixture.K}, model has K={cfg.k}")
    fc = cfg.feature
    if hints is None and (fc.use_entry_hints or fc.use_pitch_hints):
        hints = hints_of(mixture)
    n = len(mixture)
    if n == 0:
        return Prediction(labels=())

    if cfg.is_online:
        stepper = OnlineStepper(model, resolution=mixture.resolution)
        scores = np.empty((n, cfg.k))
        for i, note in enumerate(mixture.notes):
            _, probs = stepper.step(note.time, note.pitch, hints)
            scores[i] = probs
    else:
        ft = encode(mixture, hints, fc)
        scores = np.empty((n, cfg.k))
        for lo in range(0, n, eval_len):
            hi = min(lo + eval_len, n)
            window = crop_tensor(ft, lo, hi)
            batch = make_batch([(window, None)], dtype=model.dtype)
            logits, _ = model.forward(batch, training=False)
            z = logits.data[0].astype(np.float64)
            e = np.exp(z - z.max(axis=-1, keepdims=True))
            scores[lo:hi] = e / e.sum(axis=-1, keepdims=True)
    labels = tuple(int(i) for i in scores.argmax(axis=1))
    return Prediction(labels=labels, scores=scores)
