"""Experiment driver, separation writer, live session, server, and CLI."""

from partsep.harness.data import (
    LoadedCorpus,
    chorale_source,
    ensure_standin,
    load_chorales,
    load_corpus,
    load_octaves,
    load_pair,
)
from partsep.harness.experiments import (
    ExperimentSpec,
    load_trained,
    load_trained_mlp,
    results_table,
    run_all,
    run_experiment,
    run_mlp,
    spec_hash,
    standard_experiments,
)
from partsep.harness.separate import (
    multiset,
    part_names,
    render_roll,
    separate_file,
    separate_mixture,
)
from partsep.harness.server import Gateway, serve
from partsep.harness.session import DEFAULT_QPM, LiveSession, replay_events

__all__ = [
    "DEFAULT_QPM",
    "ExperimentSpec",
    "Gateway",
    "LiveSession",
    "LoadedCorpus",
    "chorale_source",
    "ensure_standin",
    "load_chorales",
    "load_corpus",
    "load_octaves",
    "load_pair",
    "load_trained",
    "load_trained_mlp",
    "multiset",
    "part_names",
    "render_roll",
    "replay_events",
    "results_table",
    "run_all",
    "run_experiment",
    "run_mlp",
    "separate_file",
    "separate_mixture",
    "serve",
    "spec_hash",
    "standard_experiments",
]
