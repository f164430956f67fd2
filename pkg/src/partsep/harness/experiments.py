"""Named training runs with on-disk caching.

Every experiment is a frozen spec; its hash goes into the checkpoint and
metrics files so stale caches installed by older specs re-train rather
than silently serving the wrong model.  Results land in
``<root>/checkpoints/<name>.{ckpt,metrics}`` and the aggregate table in
``<root>/results.txt``.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from pathlib import Path

from ..baselines import MlpBaseline, MlpConfig, load_mlp, mlp_predict, save_mlp, train_mlp
from ..core import accuracy
from ..neural import (
    SeparationModel,
    TrainConfig,
    default_model_config,
    evaluate,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .data import LoadedCorpus, load_corpus


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    arch: str
    corpus: str = "chorales"
    features: tuple[tuple[str, object], ...] = ()  # FeatureConfig overrides
    epochs: int = 100
    patience: int = 10
    seed: int = 0

    def model_config(self, k: int):
        return default_model_config(self.arch, k, **dict(self.features))

    def train_config(self) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, patience=self.patience,
                           seed=self.seed)


def spec_hash(spec: ExperimentSpec) -> str:
    payload = repr((spec.arch, spec.corpus, tuple(sorted(spec.features)),
                    spec.epochs, spec.patience, spec.seed))
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def standard_experiments() -> list[ExperimentSpec]:
    """Everything the results table needs, in run order (cheap runs last)."""
    specs = [
        ExperimentSpec("lstm", "lstm"),
        ExperimentSpec("bilstm", "bilstm"),
        ExperimentSpec("transformer_enc", "transformer_enc"),
        ExperimentSpec("transformer_dec", "transformer_dec"),
    ]
    # ablations share one reduced budget so their rows compare fairly
    ab = dict(epochs=60, patience=10)
    specs += [
        ExperimentSpec("lstm_raw_time", "lstm",
                       features=(("time_encoding", "raw_time"),), **ab),
        ExperimentSpec("lstm_raw_beat_position", "lstm",
                       features=(("time_encoding", "raw_beat_position"),), **ab),
        ExperimentSpec("lstm_time_embedding", "lstm",
                       features=(("time_encoding", "time_embedding"),), **ab),
        ExperimentSpec("lstm_ablation_base", "lstm", **ab),
        ExperimentSpec("lstm_no_aug", "lstm",
                       features=(("augment", "none"),), **ab),
        ExperimentSpec("lstm_light_aug", "lstm",
                       features=(("augment", "light"),), **ab),
        ExperimentSpec("bilstm_no_duration", "bilstm",
                       features=(("use_duration", False),), **ab),
    ]
    # synthetic corpora turn transposition off: shifting an octave-locked or
    # hint-anchored song moves notes across the very boundaries the corpus is
    # built on, so augmentation corrupts the task instead of regularizing it
    specs += [
        ExperimentSpec("pair_lstm", "lstm", corpus="pair",
                       features=(("augment", "none"),),
                       epochs=60, patience=20),
        ExperimentSpec("pair_lstm_hints", "lstm", corpus="pair",
                       features=(("augment", "none"),
                                 ("use_pitch_hints", True)),
                       epochs=60, patience=20),
    ]
    specs += [
        ExperimentSpec(f"octaves_{arch}", arch, corpus="octaves",
                       features=(("augment", "none"),),
                       epochs=40, patience=15)
        for arch in ("lstm", "bilstm", "transformer_enc", "transformer_dec")
    ]
    return specs


def _read_metrics(path: Path) -> dict:
    out = {}
    for line in path.read_text().splitlines():
        key, _, value = line.partition("=")
        out[key] = value if key in ("spec", "name", "corpus") else float(value)
    return out


def _write_metrics(path: Path, metrics: dict) -> None:
    path.write_text("".join(f"{k}={v}\n" for k, v in metrics.items()))


def run_experiment(spec: ExperimentSpec, root: str | Path,
                   corpus: LoadedCorpus | None = None,
                   log=lambda msg: None) -> dict:
    """Train (or reuse the cached run of) one experiment; returns metrics."""
    ckpt_dir = Path(root) / "checkpoints"
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = ckpt_dir / f"{spec.name}.metrics"
    digest = spec_hash(spec)
    if metrics_path.exists():
        cached = _read_metrics(metrics_path)
        if cached.get("spec") == digest and (ckpt_dir / f"{spec.name}.ckpt").exists():
            log(f"{spec.name}: cached (test={cached['test']:.4f})")
            return cached

    if corpus is None:
        corpus = load_corpus(spec.corpus, root)
    k = corpus.splits["train"][0].K
    model = SeparationModel(spec.model_config(k), seed=spec.seed)
    started = time.perf_counter()
    tlog = train(model, corpus.splits["train"], corpus.splits["valid"],
                 spec.train_config())
    test = evaluate(model, corpus.splits["test"])
    metrics = {
        "name": spec.name, "corpus": spec.corpus, "spec": digest,
        "test": round(test, 6), "valid": round(tlog.best_valid, 6),
        "best_epoch": tlog.best_epoch, "epochs_run": len(tlog.rows),
        "elapsed": round(time.perf_counter() - started, 1),
    }
    save_checkpoint(ckpt_dir / f"{spec.name}.ckpt", model,
                    meta={"spec": digest, "name": spec.name,
                          "corpus": spec.corpus})
    (ckpt_dir / f"{spec.name}.log").write_text(tlog.to_text())
    _write_metrics(metrics_path, metrics)
    log(f"{spec.name}: test={test:.4f} valid={tlog.best_valid:.4f} "
        f"epochs={len(tlog.rows)} elapsed={metrics['elapsed']}s")
    return metrics


def load_trained(name: str, root: str | Path) -> SeparationModel:
    """Load a cached experiment's model, verifying its spec hash."""
    spec = {s.name: s for s in standard_experiments()}.get(name)
    path = Path(root) / "checkpoints" / f"{name}.ckpt"
    if not path.exists():
        raise FileNotFoundError(f"no checkpoint for experiment {name!r} at {path}")
    model, meta = load_checkpoint(path)
    if spec is not None and meta.get("spec") != spec_hash(spec):
        raise ValueError(f"checkpoint for {name!r} was built from a stale spec")
    return model


MLP_EPOCHS = 30
MLP_SEED = 0


def run_mlp(root: str | Path, corpus: LoadedCorpus | None = None,
            log=lambda msg: None) -> dict:
    """Train/cache the MLP baseline; returns plain and oracle accuracies."""
    ckpt_dir = Path(root) / "checkpoints"
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = ckpt_dir / "mlp.metrics"
    weights_path = ckpt_dir / "mlp.txt"
    if metrics_path.exists() and weights_path.exists():
        cached = _read_metrics(metrics_path)
        log(f"mlp: cached (test={cached['test']:.4f})")
        return cached

    if corpus is None:
        corpus = load_corpus("chorales", root)
    k = corpus.splits["train"][0].K
    model = MlpBaseline(MlpConfig(k=k), seed=MLP_SEED)
    started = time.perf_counter()
    train_mlp(model, corpus.splits["train"], epochs=MLP_EPOCHS, seed=MLP_SEED)
    test = corpus.splits["test"]
    plain = sum(accuracy(mlp_predict(model, m), m) * len(m) for m in test)
    oracle = sum(accuracy(mlp_predict(model, m, oracle_history=True), m) * len(m)
                 for m in test)
    notes = sum(len(m) for m in test)
    metrics = {
        "name": "mlp", "corpus": "chorales", "spec": "-",
        "test": round(plain / notes, 6), "oracle": round(oracle / notes, 6),
        "elapsed": round(time.perf_counter() - started, 1),
    }
    save_mlp(weights_path, model)
    _write_metrics(metrics_path, metrics)
    log(f"mlp: test={metrics['test']:.4f} oracle={metrics['oracle']:.4f}")
    return metrics


def load_trained_mlp(root: str | Path) -> MlpBaseline:
    path = Path(root) / "checkpoints" / "mlp.txt"
    if not path.exists():
        raise FileNotFoundError(f"no MLP weights at {path}")
    return load_mlp(path)


def results_table(rows: list[dict]) -> str:
    headers = ("name", "corpus", "test", "valid", "oracle", "spec")
    table = [headers]
    for row in rows:
        table.append(tuple(
            f"{row[h]:.4f}" if isinstance(row.get(h), float) else str(row.get(h, "-"))
            for h in headers))
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in table]
    return "\n".join(lines) + "\n"


def run_all(root: str | Path, log=lambda msg: None) -> list[dict]:
    """Run every standard experiment plus the MLP; write the results table."""
    root = Path(root)
    rows = []
    cache: dict[str, LoadedCorpus] = {}
    for spec in standard_experiments():
        if spec.corpus not in cache:
            cache[spec.corpus] = load_corpus(spec.corpus, root)
        rows.append(run_experiment(spec, root, cache[spec.corpus], log=log))
    rows.append(run_mlp(root, cache.get("chorales"), log=log))
    (root / "results.txt").write_text(results_table(rows))
    return rows
