use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// One gold query. `id` defaults to the 1-based position in the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusEntry {
    pub id: String,
    pub db_id: String,
    pub sql: String,
}

/// Spider records carry the text under `query` and a parsed tree under
/// `sql`; plain records carry the text under `sql`.
#[derive(Deserialize)]
struct RawEntry {
    #[serde(default)]
    id: Option<serde_json::Value>,
    db_id: String,
    #[serde(default)]
    query: Option<String>,
    #[serde(default)]
    sql: Option<serde_json::Value>,
}

impl RawEntry {
    fn into_entry(self) -> Result<CorpusEntry, String> {
        let sql = match (self.query, self.sql) {
            (Some(q), _) => q,
            (None, Some(serde_json::Value::String(s))) => s,
            _ => return Err("record has no `query` or string `sql` field".into()),
        };
        let id = match self.id {
            None | Some(serde_json::Value::Null) => String::new(),
            Some(serde_json::Value::String(s)) => s,
            Some(other) => other.to_string(),
        };
        Ok(CorpusEntry {
            id,
            db_id: self.db_id,
            sql,
        })
    }
}

impl CorpusEntry {
    pub fn new(id: impl Into<String>, db_id: impl Into<String>, sql: impl Into<String>) -> Self {
        CorpusEntry {
            id: id.into(),
            db_id: db_id.into(),
            sql: sql.into(),
        }
    }
}

/// Accepts either a JSON array of records (Spider's `dev.json` layout, with
/// the SQL under `query`) or one record per line.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, EvalError> {
    let malformed = |line: usize, message: String| EvalError::MalformedCorpus { line, message };
    let mut entries = Vec::new();
    if text.trim_start().starts_with('[') {
        let raw: Vec<RawEntry> =
            serde_json::from_str(text).map_err(|e| malformed(e.line(), e.to_string()))?;
        for (i, r) in raw.into_iter().enumerate() {
            // Line numbers are unknown once the array is parsed; report the record.
            entries.push(
                r.into_entry()
                    .map_err(|m| malformed(0, format!("record {}: {m}", i + 1)))?,
            );
        }
    } else {
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawEntry =
                serde_json::from_str(line).map_err(|e| malformed(i + 1, e.to_string()))?;
            entries.push(raw.into_entry().map_err(|m| malformed(i + 1, m))?);
        }
    }
    for (i, e) in entries.iter_mut().enumerate() {
        if e.id.is_empty() {
            e.id = (i + 1).to_string();
        }
    }
    Ok(entries)
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<CorpusEntry>, EvalError> {
    parse_corpus(&std::fs::read_to_string(path)?)
}
