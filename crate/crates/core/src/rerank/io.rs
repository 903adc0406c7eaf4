use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use super::{BeamSet, RerankError, TrainingTarget};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BeamRecord {
    question: String,
    db_id: String,
    beams: Vec<BeamEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BeamEntry {
    sql: String,
    /// Natural log of the generator probability.
    logprob: f64,
    #[serde(default)]
    correct: Option<bool>,
}

/// One JSON record per line:
/// `{"question", "db_id", "beams": [{"sql", "logprob", "correct"?}]}`.
/// Blank lines are skipped; errors name the 1-based line.
pub fn parse_beam_lines(text: &str) -> Result<Vec<BeamSet>, RerankError> {
    let mut sets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| RerankError::MalformedBeamFile {
            line: i + 1,
            message,
        };
        let record: BeamRecord =
            serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let beams = record
            .beams
            .into_iter()
            .map(|b| (b.sql, b.logprob.exp(), b.correct))
            .collect();
        let set = BeamSet::new(record.question, record.db_id, beams)
            .map_err(|e| malformed(e.to_string()))?;
        sets.push(set);
    }
    Ok(sets)
}

pub fn read_beam_file(path: impl AsRef<Path>) -> Result<Vec<BeamSet>, RerankError> {
    parse_beam_lines(&std::fs::read_to_string(path)?)
}

/// One JSON record per line: `{"question", "sql", "schema", "target"}`.
pub fn write_training_targets(
    mut out: impl Write,
    targets: &[TrainingTarget],
) -> Result<(), RerankError> {
    for t in targets {
        serde_json::to_writer(&mut out, t).map_err(std::io::Error::from)?;
        writeln!(out)?;
    }
    Ok(())
}
