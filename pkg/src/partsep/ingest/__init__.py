"""Corpus ingestion: SMF parsing, cleaning/quantization, splits, persistence."""

from partsep.ingest.dataset import (
    DatasetManifest,
    DatasetRecord,
    ManifestEntry,
    assign_splits,
    read_dataset,
    records_by_split,
    split_corpus,
    write_dataset,
)
from partsep.ingest.pipeline import (
    ENSEMBLES,
    CorpusConfig,
    CorpusStats,
    clean,
    default_family_map,
    load_corpus_dir,
    load_corpus_file,
    map_pop_families,
    quantize,
    round_half_up,
)
from partsep.ingest.smf import SmfParseError, parse_smf, write_smf

__all__ = [
    "CorpusConfig",
    "CorpusStats",
    "DatasetManifest",
    "DatasetRecord",
    "ManifestEntry",
    "ENSEMBLES",
    "SmfParseError",
    "assign_splits",
    "clean",
    "default_family_map",
    "load_corpus_dir",
    "load_corpus_file",
    "map_pop_families",
    "parse_smf",
    "quantize",
    "read_dataset",
    "records_by_split",
    "round_half_up",
    "split_corpus",
    "write_dataset",
]
