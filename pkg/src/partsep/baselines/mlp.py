"""Per-note MLP classifier over hand-crafted context features.

Each note is classified independently from a fixed-size window of its
neighbours in the canonical order: pitch offsets (with their L1
magnitudes), time gaps, the note's own entry hints, and the labels of the
preceding context notes.  Those history labels are the model's own
predictions in plain mode and the ground truth in oracle mode, which
isolates how much of the error comes from compounding history mistakes.

Three fully-connected ReLU layers of 128 units feed a K-way softmax head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Mixture, Prediction
from ..features import Hints, entry_hints, hints_of
from ..kernel import Adam, Linear, Tensor, cross_entropy

TIME_GAP_CLIP = 96  # four quarters at 24 steps each


@dataclass(frozen=True)
class MlpConfig:
    k: int
    context: int = 2      # notes consulted on each side
    hidden: int = 128
    layers: int = 3
    use_entry_hints: bool = True

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.context < 0:
            raise ValueError("context must be non-negative")
        if self.hidden <= 0 or self.layers <= 0:
            raise ValueError("hidden and layers must be positive")

    @property
    def feature_dim(self) -> int:
        per_neighbour = 4  # exists, signed offset, L1 distance, time gap
        dim = 1 + 2 * self.context * per_neighbour
        if self.use_entry_hints:
            dim += self.k
        dim += self.context * self.k  # one-hot history labels
        return dim


def feature_row(mixture: Mixture, i: int, history, entries: np.ndarray,
                config: MlpConfig) -> np.ndarray:
    """The classifier input for note `i`.

    `history` supplies labels for notes before `i` (indexable); `entries`
    is the (N, K) entry-hint matrix for the whole mixture.
    """
    notes = mixture.notes
    own = notes[i]
    row = [own.pitch / 127.0]
    offsets = [*range(-config.context, 0), *range(1, config.context + 1)]
    for off in offsets:
        j = i + off
        if 0 <= j < len(notes):
            dp = notes[j].pitch - own.pitch
            dt = max(-TIME_GAP_CLIP, min(TIME_GAP_CLIP, notes[j].time - own.time))
            row += [1.0, dp / 127.0, abs(dp) / 127.0, dt / TIME_GAP_CLIP]
        else:
            row += [0.0, 0.0, 0.0, 0.0]
    if config.use_entry_hints:
        row += entries[i].tolist()
    for off in range(-config.context, 0):
        j = i + off
        onehot = [0.0] * config.k
        if j >= 0:
            onehot[history[j]] = 1.0
        row += onehot
    return np.asarray(row, dtype=np.float32)


def feature_matrix(mixture: Mixture, history, hints: Hints,
                   config: MlpConfig) -> np.ndarray:
    entries = entry_hints(mixture, hints)
    return np.stack([feature_row(mixture, i, history, entries, config)
                     for i in range(len(mixture))])


class MlpBaseline:
    def __init__(self, config: MlpConfig, seed: int = 0):
        self.config = config
        self.trained = False
        rng = np.random.default_rng(seed)
        dims = [config.feature_dim] + [config.hidden] * config.layers
        self.stack = [Linear(a, b, rng) for a, b in zip(dims, dims[1:])]
        self.head = Linear(config.hidden, config.k, rng)

    def params(self) -> dict[str, Tensor]:
        out = {}
        for i, layer in enumerate(self.stack):
            out.update({f"stack.{i}.{k}": v for k, v in layer.params().items()})
        out.update({f"head.{k}": v for k, v in self.head.params().items()})
        return out

    def forward(self, x: np.ndarray) -> Tensor:
        h = Tensor(np.asarray(x, dtype=np.float32))
        for layer in self.stack:
            h = layer(h).relu()
        return self.head(h)


def train_mlp(model: MlpBaseline, mixtures: list[Mixture],
              epochs: int = 30, batch: int = 256, alpha: float = 1e-3,
              seed: int = 0) -> list[float]:
    """Teacher-forced fit (truth history labels); returns per-epoch losses."""
    if not mixtures:
        raise ValueError("need a non-empty training set")
    rows = []
    labels = []
    for mix in mixtures:
        if mix.K != model.config.k:
            raise ValueError(f"mixture has K={mix.K}, model expects {model.config.k}")
        rows.append(feature_matrix(mix, mix.labels, hints_of(mix), model.config))
        labels.append(mix.label_array())
    x = np.concatenate(rows)
    y = np.concatenate(labels)

    rng = np.random.default_rng(seed)
    opt = Adam(model.params(), alpha=alpha)
    ones = np.ones_like(y, dtype=np.float32)
    losses = []
    for _ in range(epochs):
        order = rng.permutation(len(y))
        total = 0.0
        steps = 0
        for lo in range(0, len(order), batch):
            pick = order[lo:lo + batch]
            logits = model.forward(x[pick])
            loss = cross_entropy(logits, y[pick], ones[pick])
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += float(loss.data)
            steps += 1
        losses.append(total / steps)
    model.trained = True
    return losses


def mlp_predict(model: MlpBaseline, mixture: Mixture,
                oracle_history: bool = False) -> Prediction:
    """Label every note; history labels are self-predicted unless oracle."""
    if not model.trained:
        raise ValueError("model has not been trained")
    if mixture.K != model.config.k:
        raise ValueError(f"mixture has K={mixture.K}, model expects {model.config.k}")
    hints = hints_of(mixture)
    if oracle_history:
        x = feature_matrix(mixture, mixture.labels, hints, model.config)
        scores = model.forward(x).data
        return Prediction(labels=tuple(int(v) for v in scores.argmax(axis=1)),
                          scores=scores.astype(np.float64))
    entries = entry_hints(mixture, hints)
    predicted: list[int] = []
    score_rows = []
    for i in range(len(mixture)):
        row = feature_row(mixture, i, predicted, entries, model.config)
        scores = model.forward(row[None, :]).data[0]
        predicted.append(int(scores.argmax()))
        score_rows.append(scores.astype(np.float64))
    return Prediction(labels=tuple(predicted), scores=np.stack(score_rows))


def save_mlp(path, model: MlpBaseline) -> None:
    """Plain-text weight dump (same tabular family as the dataset files)."""
    cfg = model.config
    lines = [f"k={cfg.k}", f"context={cfg.context}", f"hidden={cfg.hidden}",
             f"layers={cfg.layers}", f"use_entry_hints={int(cfg.use_entry_hints)}"]
    for name, tensor in model.params().items():
        arr = tensor.data
        shape = ",".join(str(s) for s in arr.shape)
        lines.append(f"param={name} shape={shape}")
        lines.extend(" ".join(repr(float(v)) for v in row)
                     for row in arr.reshape(arr.shape[0], -1))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mlp(path) -> MlpBaseline:
    with open(path) as fh:
        lines = fh.read().splitlines()
    fields = {}
    idx = 0
    while idx < len(lines) and not lines[idx].startswith("param="):
        key, _, value = lines[idx].partition("=")
        fields[key] = int(value)
        idx += 1
    config = MlpConfig(k=fields["k"], context=fields["context"],
                       hidden=fields["hidden"], layers=fields["layers"],
                       use_entry_hints=bool(fields["use_entry_hints"]))
    model = MlpBaseline(config)
    params = model.params()
    while idx < len(lines):
        header = lines[idx]
        name_part, shape_part = header.split(" ")
        name = name_part.split("=", 1)[1]
        shape = tuple(int(s) for s in shape_part.split("=", 1)[1].split(","))
        if name not in params:
            raise ValueError(f"unknown parameter {name!r} in {path}")
        rows = lines[idx + 1:idx + 1 + shape[0]]
        arr = np.asarray([[float(v) for v in row.split()] for row in rows],
                         dtype=np.float32).reshape(shape)
        if arr.shape != params[name].data.shape:
            raise ValueError(f"shape mismatch for {name!r}")
        params[name].data[...] = arr
        idx += 1 + shape[0]
    model.trained = True
    return model
