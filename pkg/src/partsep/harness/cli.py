"""Command-line front end: ingest, train, eval, ablate, separate, serve, gradcheck.

Every option mirrors a config-file key one to one.  Values resolve in
three layers: built-in defaults, then ``--config file`` (key=value lines,
``#`` comments), then explicit flags.  The config file wins over defaults
and flags win over the config file.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

GRAD_TOL = 1e-4

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def read_config_file(path: str | Path) -> dict[str, str]:
    """key=value lines; '#' starts a comment; blank lines ignored."""
    pairs: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"config line without '=': {raw!r}")
        pairs[key.strip()] = value.strip()
    return pairs


def resolve(args: argparse.Namespace, option_types: dict[str, object],
            defaults: dict[str, object]) -> dict[str, object]:
    """Apply defaults < config file < flags for one subcommand."""
    merged = dict(defaults)
    if getattr(args, "config", None):
        for key, text in read_config_file(args.config).items():
            if key not in option_types:
                raise ValueError(f"unknown config key {key!r}")
            merged[key] = option_types[key](text)
    for key in option_types:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _add_options(parser: argparse.ArgumentParser,
                 options: dict[str, tuple]) -> dict[str, object]:
    """Register --key flags (default None so resolve() can layer them)."""
    types = {}
    for key, (kind, default, help_text) in options.items():
        suffix = "" if default is None else f" [{default}]"
        parser.add_argument(f"--{key}", type=kind, default=None,
                            help=help_text + suffix)
        types[key] = kind
    parser.add_argument("--config", default=None, metavar="FILE",
                        help="key=value file; flags override it")
    return types


# per-subcommand option tables: key -> (type, default, help)

INGEST_OPTIONS = {
    "root": (str, "data", "working directory for corpora and caches"),
    "corpus": (str, "chorales", "built-in corpus: chorales, octaves, pair"),
    "dir": (str, None, "ingest an external directory of .mid files instead"),
    "profile": (str, "generic", "genre profile for --dir (chorale/quartet/game/pop/generic)"),
    "out": (str, None, "also write the per-note dataset text here"),
}

TRAIN_OPTIONS = {
    "root": (str, "data", "working directory for corpora and caches"),
    "name": (str, None, "registry experiment to run (see --list)"),
    "arch": (str, None, "ad-hoc run: lstm, bilstm, transformer_enc, transformer_dec"),
    "corpus": (str, "chorales", "corpus for ad-hoc runs"),
    "epochs": (int, 100, "training epoch cap"),
    "patience": (int, 10, "early-stopping patience (epochs)"),
    "seed": (int, 0, "seed for init, batching, and augmentation"),
    "time_encoding": (str, None, "raw_time, raw_beat_position, time_embedding, beat_position_embedding"),
    "augment": (str, None, "transposition augmentation: none, light, strong"),
    "use_duration": (_bool, None, "feed note durations (offline archs only)"),
    "use_entry_hints": (_bool, None, "feed entry hints"),
    "use_pitch_hints": (_bool, None, "feed mean-pitch hints"),
    "use_embeddings": (_bool, None, "embed pitch/time indices instead of raw scalars"),
}

_FEATURE_KEYS = ("time_encoding", "augment", "use_duration",
                 "use_entry_hints", "use_pitch_hints", "use_embeddings")

EVAL_OPTIONS = {
    "root": (str, "data", "working directory for corpora and caches"),
    "model": (str, None, "experiment name or checkpoint path (required)"),
    "corpus": (str, "chorales", "corpus to evaluate on"),
    "split": (str, "test", "train, valid, or test"),
}

ABLATE_OPTIONS = {
    "root": (str, "data", "working directory for corpora and caches"),
}

SEPARATE_OPTIONS = {
    "root": (str, "data", "working directory for corpora and caches"),
    "model": (str, None, "experiment name or checkpoint path (required)"),
    "profile": (str, "generic", "genre profile for part names"),
    "qpm": (float, 120.0, "tempo written to the output file"),
    "roll": (str, None, "write a colored piano-roll PNG here"),
}

SERVE_OPTIONS = {
    "root": (str, "data", "working directory for corpora and caches"),
    "model": (str, None, "online experiment name or checkpoint path (required)"),
    "host": (str, "127.0.0.1", "bind address"),
    "port": (int, 8765, "bind port"),
    "profile": (str, None, "genre profile for part names in the hello frame"),
    "qpm": (float, 125.0, "tempo mapping wall-clock ms to steps"),
}

GRADCHECK_OPTIONS = {
    "seed": (int, 0, "seed for the toy inputs"),
}


def _defaults(options: dict[str, tuple]) -> dict[str, object]:
    return {k: v[1] for k, v in options.items()}


def _resolve_model(ref: str, root: str):
    """An experiment name under <root>/checkpoints, or a direct .ckpt path."""
    from ..neural import load_checkpoint
    from .experiments import load_trained

    if ref is None:
        raise ValueError("--model is required")
    path = Path(ref)
    if path.suffix == ".ckpt" or path.exists():
        model, _ = load_checkpoint(path)
        return model
    return load_trained(ref, root)


def cmd_ingest(opts) -> int:
    from ..ingest import CorpusConfig, CorpusStats, load_corpus_dir, split_corpus, write_dataset
    from .data import chorale_source, load_corpus

    root = Path(opts["root"])
    if opts["dir"]:
        songs = load_corpus_dir(opts["dir"], CorpusConfig(genre_profile=opts["profile"]))
        if not songs:
            raise ValueError(f"no usable songs under {opts['dir']}")
        manifest = split_corpus(songs)
        name = Path(opts["dir"]).name
    else:
        if opts["corpus"] == "chorales":
            _, real = chorale_source(root)
            print("chorales: real corpus" if real else "chorales: generated stand-in")
        corpus = load_corpus(opts["corpus"], root)
        songs, manifest, name = corpus.songs, corpus.manifest, opts["corpus"]

    stats = CorpusStats.of(songs)
    parts = ", ".join(f"{k}-part x{n}" for k, n in sorted(stats.parts.items()))
    print(f"{name}: {stats.files} files, {stats.notes} notes ({parts})")
    for split, tot in manifest.totals().items():
        print(f"  {split:5s} {tot['files']:4d} files {tot['notes']:8d} notes")
    root.mkdir(parents=True, exist_ok=True)
    manifest_path = root / f"{name}.manifest.txt"
    manifest_path.write_text(manifest.to_text())
    print(f"manifest -> {manifest_path}")
    if opts["out"]:
        write_dataset(songs, manifest, opts["out"])
        print(f"dataset  -> {opts['out']}")
    return 0


def cmd_train(opts, list_only: bool = False) -> int:
    from .experiments import ExperimentSpec, run_experiment, standard_experiments

    registry = {s.name: s for s in standard_experiments()}
    if list_only:
        for spec in registry.values():
            print(f"{spec.name:24s} {spec.arch:16s} {spec.corpus}")
        return 0

    if opts["name"]:
        if opts["name"] not in registry:
            raise ValueError(f"unknown experiment {opts['name']!r}; "
                             "use --list to see the registry")
        spec = registry[opts["name"]]
    elif opts["arch"]:
        features = tuple((k, opts[k]) for k in _FEATURE_KEYS
                         if opts[k] is not None)
        spec = ExperimentSpec(name=f"custom_{opts['arch']}", arch=opts["arch"],
                              corpus=opts["corpus"], features=features,
                              epochs=opts["epochs"], patience=opts["patience"],
                              seed=opts["seed"])
    else:
        raise ValueError("train needs --name or --arch")

    metrics = run_experiment(spec, opts["root"], log=print)
    print(f"test accuracy {metrics['test']:.4f}")
    return 0


def cmd_eval(opts) -> int:
    from ..neural import evaluate
    from .data import load_corpus

    model = _resolve_model(opts["model"], opts["root"])
    corpus = load_corpus(opts["corpus"], opts["root"])
    if opts["split"] not in corpus.splits:
        raise ValueError(f"unknown split {opts['split']!r}")
    mixtures = corpus.splits[opts["split"]]
    acc = evaluate(model, mixtures)
    notes = sum(len(m) for m in mixtures)
    print(f"{opts['corpus']}/{opts['split']}: accuracy {acc:.4f} "
          f"({len(mixtures)} songs, {notes} notes)")
    return 0


def cmd_ablate(opts) -> int:
    from .experiments import results_table, run_all

    rows = run_all(opts["root"], log=print)
    print()
    print(results_table(rows), end="")
    print(f"table -> {Path(opts['root']) / 'results.txt'}")
    return 0


def cmd_separate(opts, in_path: str, out_path: str) -> int:
    from .separate import separate_file

    model = _resolve_model(opts["model"], opts["root"])
    song = separate_file(model, in_path, out_path, profile=opts["profile"],
                         qpm=opts["qpm"], roll_path=opts["roll"])
    names = ", ".join(t.name for t in song.tracks)
    print(f"{in_path} -> {out_path} ({song.note_count} notes into: {names})")
    if opts["roll"]:
        print(f"roll -> {opts['roll']}")
    return 0


def cmd_serve(opts) -> int:
    from .server import serve

    model = _resolve_model(opts["model"], opts["root"])
    print(f"serving {model.config.arch} (K={model.config.k}) "
          f"on ws://{opts['host']}:{opts['port']}")
    serve(model, host=opts["host"], port=opts["port"],
          profile=opts["profile"], qpm=opts["qpm"])
    return 0


def cmd_gradcheck(opts) -> int:
    from ..kernel.gradcheck import battery

    started = time.perf_counter()
    results = battery(seed=opts["seed"])
    elapsed = time.perf_counter() - started
    failed = [name for name, err in results.items() if not err < GRAD_TOL]
    for name, err in results.items():
        verdict = "ok" if err < GRAD_TOL else "FAIL"
        print(f"{name:20s} {err:.3e}  {verdict}")
    print(f"total {elapsed:.1f}s, tolerance {GRAD_TOL:.0e}")
    return 1 if failed else 0


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, dict]]:
    parser = argparse.ArgumentParser(
        prog="partsep",
        description="Part separation for symbolic multitrack music")
    sub = parser.add_subparsers(dest="command", required=True)
    tables = {}

    p = sub.add_parser("ingest", help="build/inspect a corpus and its manifest")
    tables["ingest"] = _add_options(p, INGEST_OPTIONS)

    p = sub.add_parser("train", help="train one experiment (registry or ad hoc)")
    p.add_argument("--list", action="store_true",
                   help="list registry experiments and exit")
    tables["train"] = _add_options(p, TRAIN_OPTIONS)

    p = sub.add_parser("eval", help="evaluate a trained model on a corpus split")
    tables["eval"] = _add_options(p, EVAL_OPTIONS)

    p = sub.add_parser("ablate", help="run the full experiment/ablation table")
    tables["ablate"] = _add_options(p, ABLATE_OPTIONS)

    p = sub.add_parser("separate", help="label one .mid and write per-part tracks")
    p.add_argument("input", help="mixture .mid to separate")
    p.add_argument("output", help="separated .mid to write")
    tables["separate"] = _add_options(p, SEPARATE_OPTIONS)

    p = sub.add_parser("serve", help="run the live websocket gateway")
    tables["serve"] = _add_options(p, SERVE_OPTIONS)

    p = sub.add_parser("gradcheck", help="finite-difference check of the kernel")
    tables["gradcheck"] = _add_options(p, GRADCHECK_OPTIONS)

    return parser, tables


def main(argv: list[str] | None = None) -> int:
    parser, tables = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    options = {
        "ingest": INGEST_OPTIONS, "train": TRAIN_OPTIONS, "eval": EVAL_OPTIONS,
        "ablate": ABLATE_OPTIONS, "separate": SEPARATE_OPTIONS,
        "serve": SERVE_OPTIONS, "gradcheck": GRADCHECK_OPTIONS,
    }[command]
    try:
        opts = resolve(args, tables[command], _defaults(options))
        if command == "ingest":
            return cmd_ingest(opts)
        if command == "train":
            return cmd_train(opts, list_only=args.list)
        if command == "eval":
            return cmd_eval(opts)
        if command == "ablate":
            return cmd_ablate(opts)
        if command == "separate":
            return cmd_separate(opts, args.input, args.output)
        if command == "serve":
            return cmd_serve(opts)
        return cmd_gradcheck(opts)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
