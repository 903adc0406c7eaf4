//! Beam re-ranking: the generator probability `g` of each candidate is mixed
//! with a re-estimated score `d` as `S = α·ln g + (1−α)·ln d`.

mod filter;
mod io;
mod scorer;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::schema::Schema;

pub use filter::{filter_schema, filter_schema_text};
pub use io::{parse_beam_lines, read_beam_file, write_training_targets};
pub use scorer::{BaselineScorer, ExternalScorer, OracleScorer, Scorer, ScorerInput};

pub const DEFAULT_ALPHA: f64 = 0.7;
pub const DEFAULT_DELTA: f64 = 0.7;
pub const DEFAULT_D_FLOOR: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum RerankError {
    #[error("generator probability {0} is outside (0, 1]")]
    InvalidScore(f64),
    #[error("scorer failed: {0}")]
    ScorerFailure(String),
    #[error("candidate {rank} of \"{question}\" has no correctness label")]
    MissingLabel { question: String, rank: usize },
    #[error("malformed beam file at line {line}: {message}")]
    MalformedBeamFile { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RerankConfig {
    pub alpha: f64,
    pub d_floor: f64,
}

impl Default for RerankConfig {
    fn default() -> Self {
        RerankConfig {
            alpha: DEFAULT_ALPHA,
            d_floor: DEFAULT_D_FLOOR,
        }
    }
}

impl RerankConfig {
    pub fn new(alpha: f64, d_floor: f64) -> Result<RerankConfig, RerankError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(RerankError::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        if !(d_floor > 0.0 && d_floor < 1.0) {
            return Err(RerankError::InvalidConfig(format!(
                "d_floor must lie in (0, 1), got {d_floor}"
            )));
        }
        Ok(RerankConfig { alpha, d_floor })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelConfig {
    pub delta: f64,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig {
            delta: DEFAULT_DELTA,
        }
    }
}

impl LabelConfig {
    /// `delta` must lie strictly between 0.5 and 1 so that correct
    /// candidates always receive the larger target.
    pub fn new(delta: f64) -> Result<LabelConfig, RerankError> {
        if !(delta > 0.5 && delta < 1.0) {
            return Err(RerankError::InvalidConfig(format!(
                "delta must lie in (0.5, 1), got {delta}"
            )));
        }
        Ok(LabelConfig { delta })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamCandidate {
    pub sql: String,
    pub g: f64,
    /// 1-based position in generator order.
    pub g_rank: usize,
    /// Re-estimated score after clamping to `[d_floor, 1]`.
    pub d: Option<f64>,
    pub score: Option<f64>,
    pub correct: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSet {
    pub question: String,
    pub db_id: String,
    pub candidates: Vec<BeamCandidate>,
}

impl BeamSet {
    /// Builds a beam set from `(sql, g, correct)` triples in any order;
    /// candidates are sorted by descending `g` (stable) and ranked.
    pub fn new(
        question: impl Into<String>,
        db_id: impl Into<String>,
        beams: Vec<(String, f64, Option<bool>)>,
    ) -> Result<BeamSet, RerankError> {
        let question = question.into();
        if beams.is_empty() {
            return Err(RerankError::InvalidConfig(format!(
                "beam set for \"{question}\" is empty"
            )));
        }
        let mut candidates = Vec::with_capacity(beams.len());
        for (sql, g, correct) in beams {
            check_probability(g)?;
            candidates.push(BeamCandidate {
                sql,
                g,
                g_rank: 0,
                d: None,
                score: None,
                correct,
            });
        }
        candidates.sort_by(|a, b| b.g.total_cmp(&a.g));
        for (i, c) in candidates.iter_mut().enumerate() {
            c.g_rank = i + 1;
        }
        Ok(BeamSet {
            question,
            db_id: db_id.into(),
            candidates,
        })
    }

    pub fn top(&self) -> &BeamCandidate {
        &self.candidates[0]
    }
}

fn check_probability(g: f64) -> Result<(), RerankError> {
    if g > 0.0 && g <= 1.0 {
        Ok(())
    } else {
        Err(RerankError::InvalidScore(g))
    }
}

/// `α·ln g + (1−α)·ln d`, with `d` clamped to `[d_floor, 1]` first.
pub fn combine_score(g: f64, d: f64, config: &RerankConfig) -> Result<f64, RerankError> {
    check_probability(g)?;
    if d.is_nan() {
        return Err(RerankError::ScorerFailure(
            "re-estimated score is NaN".into(),
        ));
    }
    let d = clamp_d(d, config);
    let a = config.alpha;
    Ok(a * g.ln() + (1.0 - a) * d.ln())
}

fn clamp_d(d: f64, config: &RerankConfig) -> f64 {
    d.clamp(config.d_floor, 1.0)
}

/// Scores every candidate and returns the set clamped-`d` annotated, without
/// reordering.
fn score_candidates(
    beams: &BeamSet,
    schema: &Schema,
    scorer: &dyn Scorer,
    config: &RerankConfig,
) -> Result<BeamSet, RerankError> {
    let score_one = |c: &BeamCandidate| -> Result<f64, RerankError> {
        let schema_text = filter_schema_text(&c.sql, schema);
        let input = ScorerInput {
            question: &beams.question,
            sql: &c.sql,
            schema_text: &schema_text,
        };
        let d = scorer.score(&input)?;
        if !(d > 0.0 && d <= 1.0) {
            return Err(RerankError::ScorerFailure(format!(
                "score {d} for \"{}\" is outside (0, 1]",
                c.sql
            )));
        }
        Ok(clamp_d(d, config))
    };
    let ds: Vec<f64> = if scorer.is_serial() {
        beams
            .candidates
            .iter()
            .map(score_one)
            .collect::<Result<_, _>>()?
    } else {
        beams
            .candidates
            .par_iter()
            .map(score_one)
            .collect::<Result<_, _>>()?
    };
    let mut out = beams.clone();
    for (c, d) in out.candidates.iter_mut().zip(ds) {
        c.d = Some(d);
    }
    Ok(out)
}

fn sort_by_key_then_rank(beams: &mut BeamSet, key: impl Fn(&BeamCandidate) -> f64) {
    beams
        .candidates
        .sort_by(|a, b| key(b).total_cmp(&key(a)).then(a.g_rank.cmp(&b.g_rank)));
}

/// Orders candidates by combined score, best first; ties keep generator order.
pub fn rerank_beams(
    beams: &BeamSet,
    schema: &Schema,
    scorer: &dyn Scorer,
    config: &RerankConfig,
) -> Result<BeamSet, RerankError> {
    let mut out = score_candidates(beams, schema, scorer, config)?;
    for c in &mut out.candidates {
        c.score = Some(combine_score(c.g, c.d.expect("scored above"), config)?);
    }
    sort_by_key_then_rank(&mut out, |c| c.score.unwrap_or(f64::NEG_INFINITY));
    Ok(out)
}

/// Orders candidates by the re-estimated score alone, ignoring `g`.
pub fn standalone_rank(
    beams: &BeamSet,
    schema: &Schema,
    scorer: &dyn Scorer,
    config: &RerankConfig,
) -> Result<BeamSet, RerankError> {
    let mut out = score_candidates(beams, schema, scorer, config)?;
    sort_by_key_then_rank(&mut out, |c| c.d.unwrap_or(0.0));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTarget {
    pub question: String,
    pub sql: String,
    pub schema: String,
    pub target: f64,
}

/// The soft target of a labelled candidate: the generator's top beam gets
/// `δ` when correct, any other correct beam gets 1, and every wrong beam
/// gets `1 − δ`.
pub fn soft_logit(g_rank: usize, correct: bool, config: &LabelConfig) -> f64 {
    match (g_rank == 1, correct) {
        (true, true) => config.delta,
        (false, true) => 1.0,
        (_, false) => 1.0 - config.delta,
    }
}

pub fn assign_soft_logits(
    beams: &BeamSet,
    schema: &Schema,
    config: &LabelConfig,
) -> Result<Vec<TrainingTarget>, RerankError> {
    let mut ordered: Vec<&BeamCandidate> = beams.candidates.iter().collect();
    ordered.sort_by_key(|c| c.g_rank);
    ordered
        .into_iter()
        .map(|c| {
            let correct = c.correct.ok_or_else(|| RerankError::MissingLabel {
                question: beams.question.clone(),
                rank: c.g_rank,
            })?;
            Ok(TrainingTarget {
                question: beams.question.clone(),
                sql: c.sql.clone(),
                schema: filter_schema_text(&c.sql, schema),
                target: soft_logit(c.g_rank, correct, config),
            })
        })
        .collect()
}
