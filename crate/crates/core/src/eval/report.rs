use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rerank::BeamCandidate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    SelfJoin,
    /// The gold query joins more tables than the lifted one.
    NonMinimalJoin,
    Disconnected,
    Mismatch,
    /// The gold query names an unknown database or does not parse.
    InvalidGold,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::SelfJoin => "self_join",
            FailureReason::NonMinimalJoin => "non_minimal_join",
            FailureReason::Disconnected => "disconnected",
            FailureReason::Mismatch => "mismatch",
            FailureReason::InvalidGold => "invalid_gold",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub id: String,
    pub reason: FailureReason,
    pub detail: String,
}

/// Lengths for one query that could be lowered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryStats {
    pub id: String,
    pub sql_tokens: usize,
    pub ssql_tokens: usize,
    pub joins: usize,
    pub recovered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub total: usize,
    pub recovered: usize,
    pub recovery_rate: f64,
    pub failures: Vec<Failure>,
    pub avg_sql_tokens: f64,
    pub avg_ssql_tokens: f64,
    pub entries: Vec<EntryStats>,
}

impl RecoveryReport {
    pub(crate) fn new(total: usize, failures: Vec<Failure>, entries: Vec<EntryStats>) -> Self {
        let recovered = total - failures.len();
        let mean = |f: fn(&EntryStats) -> usize| {
            if entries.is_empty() {
                0.0
            } else {
                entries.iter().map(f).sum::<usize>() as f64 / entries.len() as f64
            }
        };
        RecoveryReport {
            total,
            recovered,
            recovery_rate: if total == 0 {
                0.0
            } else {
                recovered as f64 / total as f64
            },
            avg_sql_tokens: mean(|e| e.sql_tokens),
            avg_ssql_tokens: mean(|e| e.ssql_tokens),
            failures,
            entries,
        }
    }

    pub fn failures_with(&self, reason: FailureReason) -> impl Iterator<Item = &Failure> {
        self.failures.iter().filter(move |f| f.reason == reason)
    }
}

impl fmt::Display for RecoveryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "recovered {}/{} ({:.1}%)",
            self.recovered,
            self.total,
            100.0 * self.recovery_rate
        )?;
        writeln!(
            f,
            "avg tokens: sql {:.2}, ssql {:.2}",
            self.avg_sql_tokens, self.avg_ssql_tokens
        )?;
        for x in &self.failures {
            writeln!(f, "  {} {}: {}", x.id, x.reason, x.detail)?;
        }
        Ok(())
    }
}

/// The top candidate under each ordering for one beam set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub question: String,
    pub by_g: BeamCandidate,
    pub by_combined: BeamCandidate,
    pub by_standalone: BeamCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankReport {
    pub total: usize,
    pub top1_by_g: usize,
    pub top1_by_combined: usize,
    pub top1_by_standalone: usize,
    pub selections: Vec<Selection>,
}

impl RerankReport {
    pub(crate) fn new(selections: Vec<Selection>) -> Self {
        let count = |pick: fn(&Selection) -> &BeamCandidate| {
            selections
                .iter()
                .filter(|s| pick(s).correct == Some(true))
                .count()
        };
        RerankReport {
            total: selections.len(),
            top1_by_g: count(|s| &s.by_g),
            top1_by_combined: count(|s| &s.by_combined),
            top1_by_standalone: count(|s| &s.by_standalone),
            selections,
        }
    }
}

impl fmt::Display for RerankReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "beam sets: {}", self.total)?;
        writeln!(f, "top-1 correct by g:          {}", self.top1_by_g)?;
        writeln!(f, "top-1 correct by combined:   {}", self.top1_by_combined)?;
        writeln!(
            f,
            "top-1 correct by standalone: {}",
            self.top1_by_standalone
        )
    }
}
