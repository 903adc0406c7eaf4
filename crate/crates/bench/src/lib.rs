//! Inputs shared by the benchmarks: the bundled schemas, corpus and beams.

use std::path::PathBuf;

use ssql_core::eval::{read_corpus, CorpusEntry};
use ssql_core::rerank::{read_beam_file, BeamSet};
use ssql_core::schema::{load_schemas, SchemaSet};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

pub fn schemas() -> SchemaSet {
    load_schemas(data_path("tables.json")).expect("bundled schemas")
}

pub fn corpus() -> Vec<CorpusEntry> {
    read_corpus(data_path("corpus.jsonl")).expect("bundled corpus")
}

pub fn beams() -> Vec<BeamSet> {
    read_beam_file(data_path("beams.jsonl")).expect("bundled beams")
}
