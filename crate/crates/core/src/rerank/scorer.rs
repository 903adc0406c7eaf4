use std::collections::{BTreeSet, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use super::{RerankError, DEFAULT_D_FLOOR};

/// What a re-estimator sees for one candidate.
#[derive(Debug, Clone, Copy)]
pub struct ScorerInput<'a> {
    pub question: &'a str,
    pub sql: &'a str,
    /// Output of `filter_schema`; empty when the SQL does not parse.
    pub schema_text: &'a str,
}

impl ScorerInput<'_> {
    /// One-line serialization, `question | sql | schema`, used by the
    /// external scorer protocol.
    pub fn line(&self) -> String {
        let flat = |s: &str| s.replace(['\n', '\r'], " ");
        format!(
            "{} | {} | {}",
            flat(self.question),
            flat(self.sql),
            flat(self.schema_text)
        )
    }
}

/// A re-estimated score in (0, 1] for one candidate.
///
/// Scorers are called concurrently across candidates unless `is_serial`
/// returns true.
pub trait Scorer: Sync {
    fn score(&self, input: &ScorerInput<'_>) -> Result<f64, RerankError>;

    fn is_serial(&self) -> bool {
        false
    }
}

impl<F> Scorer for F
where
    F: Fn(&ScorerInput<'_>) -> f64 + Sync,
{
    fn score(&self, input: &ScorerInput<'_>) -> Result<f64, RerankError> {
        Ok(self(input))
    }
}

/// Deterministic lexical stand-in for a trained re-estimator.
///
/// The terms of a candidate are the words of its filtered schema text (table
/// and column names split on non-alphanumerics, lowercased, plural-stemmed).
/// The score is `matched / total`, where `matched` counts terms that also
/// occur among the question's words, floored at `floor`. A candidate that
/// does not parse (empty schema text) scores `floor`.
#[derive(Debug, Clone, Copy)]
pub struct BaselineScorer {
    pub floor: f64,
}

impl Default for BaselineScorer {
    fn default() -> Self {
        BaselineScorer {
            floor: DEFAULT_D_FLOOR,
        }
    }
}

impl BaselineScorer {
    pub fn raw_score(question: &str, schema_text: &str) -> f64 {
        let terms = words(schema_text);
        if terms.is_empty() {
            return 0.0;
        }
        let asked = words(question);
        terms.intersection(&asked).count() as f64 / terms.len() as f64
    }
}

impl Scorer for BaselineScorer {
    fn score(&self, input: &ScorerInput<'_>) -> Result<f64, RerankError> {
        Ok(Self::raw_score(input.question, input.schema_text).max(self.floor))
    }
}

fn words(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| stem(&w.to_lowercase()))
        .collect()
}

/// Strips common English plural endings.
pub(crate) fn stem(word: &str) -> String {
    let n = word.len();
    if n > 4 && word.ends_with("ies") {
        format!("{}y", &word[..n - 3])
    } else if n > 4
        && (word.ends_with("sses")
            || word.ends_with("xes")
            || word.ends_with("ches")
            || word.ends_with("shes"))
    {
        word[..n - 2].to_string()
    } else if n > 3
        && word.ends_with('s')
        && !word.ends_with("ss")
        && !word.ends_with("us")
        && !word.ends_with("is")
    {
        word[..n - 1].to_string()
    } else {
        word.to_string()
    }
}

/// Scores through a long-running child process started with `sh -c`.
/// Each request is one [`ScorerInput::line`]; each response is one line
/// holding a decimal in (0, 1].
pub struct ExternalScorer {
    command: String,
    io: Mutex<ExternalIo>,
}

struct ExternalIo {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl ExternalScorer {
    pub fn spawn(command: &str) -> Result<ExternalScorer, RerankError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| RerankError::ScorerFailure(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = BufReader::new(child.stdout.take().expect("stdout is piped"));
        Ok(ExternalScorer {
            command: command.to_string(),
            io: Mutex::new(ExternalIo {
                child,
                stdin,
                stdout,
            }),
        })
    }
}

impl Scorer for ExternalScorer {
    fn score(&self, input: &ScorerInput<'_>) -> Result<f64, RerankError> {
        let fail = |msg: String| RerankError::ScorerFailure(format!("`{}`: {msg}", self.command));
        let mut io = self.io.lock().map_err(|_| fail("poisoned".into()))?;
        writeln!(io.stdin, "{}", input.line()).map_err(|e| fail(e.to_string()))?;
        io.stdin.flush().map_err(|e| fail(e.to_string()))?;
        let mut reply = String::new();
        let n = io
            .stdout
            .read_line(&mut reply)
            .map_err(|e| fail(e.to_string()))?;
        if n == 0 {
            return Err(fail("scorer closed its output".into()));
        }
        reply
            .trim()
            .parse::<f64>()
            .map_err(|_| fail(format!("unreadable reply {:?}", reply.trim())))
    }

    fn is_serial(&self) -> bool {
        true
    }
}

impl Drop for ExternalScorer {
    fn drop(&mut self) {
        if let Ok(io) = self.io.get_mut() {
            let _ = io.child.kill();
            let _ = io.child.wait();
        }
    }
}

/// Scores from the correctness labels of a beam file: `hit` for a candidate
/// labelled correct, `miss` otherwise. An upper bound on what a
/// re-estimator could achieve on that file.
#[derive(Debug, Clone)]
pub struct OracleScorer {
    correct: HashSet<(String, String)>,
    pub hit: f64,
    pub miss: f64,
}

impl OracleScorer {
    pub fn from_beams(sets: &[super::BeamSet], hit: f64, miss: f64) -> OracleScorer {
        let correct = sets
            .iter()
            .flat_map(|s| {
                s.candidates
                    .iter()
                    .filter(|c| c.correct == Some(true))
                    .map(|c| (s.question.clone(), c.sql.clone()))
            })
            .collect();
        OracleScorer { correct, hit, miss }
    }
}

impl Scorer for OracleScorer {
    fn score(&self, input: &ScorerInput<'_>) -> Result<f64, RerankError> {
        let key = (input.question.to_string(), input.sql.to_string());
        Ok(if self.correct.contains(&key) {
            self.hit
        } else {
            self.miss
        })
    }
}
