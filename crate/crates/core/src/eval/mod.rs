//! Structural query matching, SSQL round-trip recovery and rerank accuracy.

mod corpus;
mod report;

use std::collections::HashMap;

use rayon::prelude::*;

use crate::rerank::{rerank_beams, standalone_rank, BeamSet, RerankConfig, RerankError, Scorer};
use crate::schema::{build_graph, SchemaError, SchemaGraph, SchemaSet};
use crate::sqlast::{
    blocks, normalize_as_sets, parse_sql, print_sql, token_count, Condition, Expr, Literal,
    Predicate, Source, SqlQuery,
};
use crate::ssql::{lift_with_graph, lower_to_ssql, parse_ssql, print_ssql, LiftError, LowerError};

pub use corpus::{parse_corpus, read_corpus, CorpusEntry};
pub use report::{EntryStats, Failure, FailureReason, RecoveryReport, RerankReport, Selection};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Rerank(#[from] RerankError),
    #[error("malformed corpus at line {line}: {message}")]
    MalformedCorpus { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The form two queries must share to count as an exact set match: the
/// normalized tree with SELECT items and GROUP BY columns as sets, and, when
/// `ignore_values` is set, every literal inside a condition replaced by a
/// placeholder.
pub fn match_key(q: &SqlQuery, ignore_values: bool) -> SqlQuery {
    if ignore_values {
        let mut q = q.clone();
        strip_query(&mut q);
        normalize_as_sets(&q)
    } else {
        normalize_as_sets(q)
    }
}

pub fn exact_set_match(predicted: &SqlQuery, gold: &SqlQuery, ignore_values: bool) -> bool {
    match_key(predicted, ignore_values) == match_key(gold, ignore_values)
}

fn strip_query(q: &mut SqlQuery) {
    for item in &mut q.from.items {
        if let Source::Subquery(sub) = &mut item.source {
            strip_query(sub);
        }
        if let Some(on) = &mut item.on {
            strip_cond(on);
        }
    }
    q.select.iter_mut().for_each(|e| strip_expr(e, false));
    if let Some(c) = &mut q.where_clause {
        strip_cond(c);
    }
    if let Some(c) = &mut q.having {
        strip_cond(c);
    }
    q.order_by
        .iter_mut()
        .for_each(|o| strip_expr(&mut o.expr, false));
    if let Some((_, rest)) = &mut q.set_op {
        strip_query(rest);
    }
}

fn strip_expr(e: &mut Expr<crate::sqlast::Sql>, in_condition: bool) {
    match e {
        Expr::Literal(l) if in_condition => *l = Literal::Placeholder,
        Expr::Subquery(q) => strip_query(q),
        Expr::Aggregate { arg, .. } => strip_expr(arg, in_condition),
        Expr::Arith { left, right, .. } => {
            strip_expr(left, in_condition);
            strip_expr(right, in_condition);
        }
        Expr::Column(_) | Expr::Star | Expr::Literal(_) => {}
    }
}

fn strip_cond(c: &mut Condition<crate::sqlast::Sql>) {
    match c {
        Condition::Predicate(Predicate::Compare { left, right, .. }) => {
            strip_expr(left, true);
            strip_expr(right, true);
        }
        Condition::Predicate(Predicate::Between { expr, low, high }) => {
            strip_expr(expr, true);
            strip_expr(low, true);
            strip_expr(high, true);
        }
        Condition::And(parts) | Condition::Or(parts) => parts.iter_mut().for_each(strip_cond),
    }
}

/// Table sources across every block, a measure of join size.
fn table_sources(q: &SqlQuery) -> usize {
    blocks(q).iter().map(|b| b.from.tables().count()).sum()
}

/// Joins across every block: FROM items beyond the first.
pub fn join_count(q: &SqlQuery) -> usize {
    blocks(q)
        .iter()
        .map(|b| b.from.items.len().saturating_sub(1))
        .sum()
}

enum Outcome {
    Recovered(EntryStats),
    Failed(Failure, Option<EntryStats>),
}

fn roundtrip_entry(
    entry: &CorpusEntry,
    schemas: &SchemaSet,
    graphs: &HashMap<&str, SchemaGraph>,
    ignore_values: bool,
) -> Outcome {
    let fail = |reason, detail: String| {
        Outcome::Failed(
            Failure {
                id: entry.id.clone(),
                reason,
                detail,
            },
            None,
        )
    };
    let (Ok(schema), Some(graph)) = (schemas.get(&entry.db_id), graphs.get(entry.db_id.as_str()))
    else {
        return fail(
            FailureReason::InvalidGold,
            format!("unknown db_id {}", entry.db_id),
        );
    };
    let gold = match parse_sql(&entry.sql, schema) {
        Ok(q) => q,
        Err(e) => return fail(FailureReason::InvalidGold, e.to_string()),
    };
    let lowered = match lower_to_ssql(&gold, schema) {
        Ok(q) => q,
        Err(e @ LowerError::UnsupportedSelfJoin { .. }) => {
            return fail(FailureReason::SelfJoin, e.to_string())
        }
        Err(e) => return fail(FailureReason::Mismatch, e.to_string()),
    };
    let ssql_text = print_ssql(&lowered, schema);
    let stats = EntryStats {
        id: entry.id.clone(),
        sql_tokens: token_count(&print_sql(&gold, schema)),
        ssql_tokens: token_count(&ssql_text),
        joins: join_count(&gold),
        recovered: false,
    };
    let failed = |reason, detail: String, stats: EntryStats| {
        Outcome::Failed(
            Failure {
                id: entry.id.clone(),
                reason,
                detail,
            },
            Some(stats),
        )
    };
    let reparsed = match parse_ssql(&ssql_text, schema) {
        Ok(q) => q,
        Err(e) => return failed(FailureReason::Mismatch, e.to_string(), stats),
    };
    let lifted = match lift_with_graph(&reparsed, schema, graph) {
        Ok(q) => q,
        Err(e @ LiftError::Disconnected { .. }) => {
            return failed(FailureReason::Disconnected, e.to_string(), stats)
        }
        Err(e) => return failed(FailureReason::Mismatch, e.to_string(), stats),
    };
    if exact_set_match(&lifted, &gold, ignore_values) {
        return Outcome::Recovered(EntryStats {
            recovered: true,
            ..stats
        });
    }
    let reason = if table_sources(&gold) > table_sources(&lifted) {
        FailureReason::NonMinimalJoin
    } else {
        FailureReason::Mismatch
    };
    failed(reason, print_sql(&lifted, schema), stats)
}

/// Lowers, prints, reparses and lifts every corpus query, then compares the
/// result with the original. Failures are recorded, never raised. Token
/// averages cover the entries that could be lowered.
pub fn roundtrip_report(corpus: &[CorpusEntry], schemas: &SchemaSet) -> RecoveryReport {
    roundtrip_report_with(corpus, schemas, false)
}

/// [`roundtrip_report`] with a choice of literal handling in the final match.
pub fn roundtrip_report_with(
    corpus: &[CorpusEntry],
    schemas: &SchemaSet,
    ignore_values: bool,
) -> RecoveryReport {
    let graphs: HashMap<&str, SchemaGraph> = schemas
        .iter()
        .map(|s| (s.db_id.as_str(), build_graph(s)))
        .collect();
    let outcomes: Vec<Outcome> = corpus
        .par_iter()
        .map(|e| roundtrip_entry(e, schemas, &graphs, ignore_values))
        .collect();

    let mut failures = Vec::new();
    let mut entries = Vec::new();
    for outcome in outcomes {
        match outcome {
            Outcome::Recovered(stats) => entries.push(stats),
            Outcome::Failed(failure, stats) => {
                failures.push(failure);
                entries.extend(stats);
            }
        }
    }
    RecoveryReport::new(corpus.len(), failures, entries)
}

/// Top-1 correctness of generator order, combined-score order and
/// standalone order over labelled beam sets.
pub fn rerank_report(
    beam_sets: &[BeamSet],
    schemas: &SchemaSet,
    scorer: &dyn Scorer,
    config: &RerankConfig,
) -> Result<RerankReport, EvalError> {
    let evaluate = |set: &BeamSet| -> Result<Selection, EvalError> {
        if let Some(c) = set.candidates.iter().find(|c| c.correct.is_none()) {
            return Err(RerankError::MissingLabel {
                question: set.question.clone(),
                rank: c.g_rank,
            }
            .into());
        }
        let schema = schemas.get(&set.db_id)?;
        let combined = rerank_beams(set, schema, scorer, config)?;
        let alone = standalone_rank(set, schema, scorer, config)?;
        Ok(Selection {
            question: set.question.clone(),
            by_g: set.top().clone(),
            by_combined: combined.top().clone(),
            by_standalone: alone.top().clone(),
        })
    };
    let selections: Vec<Selection> = if scorer.is_serial() {
        beam_sets.iter().map(evaluate).collect::<Result<_, _>>()?
    } else {
        beam_sets
            .par_iter()
            .map(evaluate)
            .collect::<Result<_, _>>()?
    };
    Ok(RerankReport::new(selections))
}
