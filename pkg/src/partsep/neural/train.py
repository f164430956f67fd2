"""Training loop: Adam on cross entropy with augmentation and early stopping.

Deterministic given the seed: one numpy Generator drives shuffling, window
crops, transposition shifts and dropout masks, and the loop itself is a
single thread of batched steps.  Validation accuracy uses the fast batched
forward; the champion parameters are snapshotted and restored at the end,
so the function returns the best-validation model, not the last one.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field

import numpy as np

from ..core import Mixture
from ..features import encode, hints_of, sample_shift, transpose
from ..kernel import Adam, cross_entropy
from .models import Batch, SeparationModel, crop_tensor, make_batch


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 16
    train_len: int = 500
    eval_len: int = 2000
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epochs: int = 100
    patience: int = 10
    seed: int = 0

    def __post_init__(self):
        if min(self.batch_size, self.train_len, self.eval_len,
               self.epochs, self.patience) <= 0:
            raise ValueError("batch/lengths/epochs/patience must be positive")
        if self.eval_len < self.train_len:
            raise ValueError("eval_len must be >= train_len")

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.__dict__.items())

    @classmethod
    def from_text(cls, text: str) -> "TrainConfig":
        kwargs = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in cls.__dataclass_fields__:
                raise ValueError(f"unknown training option {key!r}")
            kind = cls.__dataclass_fields__[key].type
            kwargs[key] = float(value) if kind == "float" else int(value)
        return cls(**kwargs)


@dataclass
class TrainLog:
    rows: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    best_valid: float = 0.0
    elapsed: float = 0.0  # wall seconds; deliberately outside to_text()

    def to_text(self) -> str:
        lines = [f"epoch={r['epoch']} steps={r['steps']} "
                 f"loss={r['loss']:.6f} valid={r['valid']:.6f}"
                 for r in self.rows]
        lines.append(f"best epoch={self.best_epoch} valid={self.best_valid:.6f}")
        return "\n".join(lines) + "\n"


def _prepared(mixture: Mixture, model: SeparationModel):
    fc = model.config.feature
    needs_hints = fc.use_entry_hints or fc.use_pitch_hints
    hints = hints_of(mixture) if needs_hints else None
    return encode(mixture, hints, fc)


def evaluate(model: SeparationModel, mixtures: list[Mixture],
             eval_len: int = 2000) -> float:
    """Note accuracy via the batched forward, windowed at `eval_len`.

    This is the training-loop metric (fast path).  Recurrent windows carry
    (h, c) across the boundary; transformer windows restart cold.
    """
    correct = 0
    total = 0
    carries_state = model.config.arch == "lstm"
    for mix in mixtures:
        ft = _prepared(mix, model)
        labels = mix.label_array()
        state = None
        for lo in range(0, len(mix), eval_len):
            hi = min(lo + eval_len, len(mix))
            batch = make_batch([(crop_tensor(ft, lo, hi), None)],
                               dtype=model.dtype)
            logits, state = model.forward(batch, training=False,
                                          state=state if carries_state else None)
            pred = logits.data[0].argmax(axis=-1)
            correct += int((pred == labels[lo:hi]).sum())
            total += hi - lo
            if not carries_state:
                state = None
    return correct / total if total else 0.0


def train(model: SeparationModel, train_set: list[Mixture],
          valid_set: list[Mixture], config: TrainConfig) -> TrainLog:
    """Fit `model` in place; returns the log. Best-validation weights win."""
    if not train_set or not valid_set:
        raise ValueError("need non-empty train and valid sets")
    fc = model.config.feature
    rng = np.random.default_rng(config.seed)
    opt = Adam(model.params(), alpha=config.alpha, beta1=config.beta1,
               beta2=config.beta2)
    log = TrainLog()
    best_params: dict[str, np.ndarray] | None = None
    since_best = 0
    started = _time.perf_counter()

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_set))
        loss_sum = 0.0
        steps = 0
        for lo in range(0, len(order), config.batch_size):
            items = []
            for idx in order[lo:lo + config.batch_size]:
                mix = train_set[idx]
                aug = transpose(mix, sample_shift(fc.augment, rng))
                if aug.labels != mix.labels:
                    raise AssertionError("augmentation altered labels")
                ft = _prepared(aug, model)
                labels = aug.label_array()
                if ft.n > config.train_len:
                    start = int(rng.integers(0, ft.n - config.train_len + 1))
                    ft = crop_tensor(ft, start, start + config.train_len)
                    labels = labels[start:start + config.train_len]
                items.append((ft, labels))
            batch = make_batch(items, dtype=model.dtype)
            logits, _ = model.forward(batch, rng=rng, training=True)
            loss = cross_entropy(logits, batch.labels, batch.mask)
            value = float(loss.data)
            if not np.isfinite(value):
                raise RuntimeError(
                    f"training diverged: loss={value} at epoch {epoch} "
                    f"step {steps} (try a lower alpha)")
            opt.zero_grad()
            loss.backward()
            opt.step()
            loss_sum += value
            steps += 1
            del logits, loss  # drop the tape before the next forward builds one

        valid_acc = evaluate(model, valid_set, config.eval_len)
        log.rows.append({"epoch": epoch, "steps": steps,
                         "loss": loss_sum / max(steps, 1), "valid": valid_acc})
        if valid_acc > log.best_valid or best_params is None:
            log.best_valid = valid_acc
            log.best_epoch = epoch
            best_params = {k: v.data.copy() for k, v in model.params().items()}
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.patience:
                break

    for key, tensor in model.params().items():
        tensor.data[...] = best_params[key]
    log.elapsed = _time.perf_counter() - started
    return log
