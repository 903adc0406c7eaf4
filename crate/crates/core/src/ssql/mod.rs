//! SSQL: SQL with the join structure removed.
//!
//! Columns are written as fused `table.column` tokens and FROM lists the
//! tables the query mentions, in schema order. Lowering drops joins and
//! aliases; lifting recovers them with a Steiner tree over the schema graph.

mod lift;
mod lower;

use std::collections::BTreeSet;

use crate::schema::{ColumnId, Schema, TableId};
use crate::sqlast::parser::{
    self, Mode, RawColumn, RawCond, RawExpr, RawPred, RawQuery, RawSource,
};
use crate::sqlast::{
    contains_aggregate, ident, write_query, AggFunc, Condition, Dialect, Expr, Literal, OrderItem,
    Predicate, Printer, Query, SyntaxError,
};

pub use lift::{lift_to_sql, lift_with_graph, LiftError};
pub use lower::{lower_to_ssql, LowerError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ssql;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SsqlFrom {
    /// Sorted, without duplicates.
    Tables(Vec<TableId>),
    Subquery(Box<SsqlQuery>),
}

impl Dialect for Ssql {
    type Column = ColumnId;
    type From = SsqlFrom;

    fn from_conditions(_: &SsqlFrom) -> Vec<&Condition<Ssql>> {
        Vec::new()
    }

    fn from_subqueries(from: &SsqlFrom) -> Vec<&SsqlQuery> {
        match from {
            SsqlFrom::Subquery(q) => vec![q.as_ref()],
            SsqlFrom::Tables(_) => Vec::new(),
        }
    }
}

pub type SsqlQuery = Query<Ssql>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SsqlError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown fused token {token} at position {position}")]
    UnknownFusedToken { token: String, position: usize },
    #[error("unknown table {name} at position {position}")]
    UnknownTable { name: String, position: usize },
    #[error("{message} at position {position}")]
    Invalid { message: String, position: usize },
}

/// Parses SSQL text. Every column must be a fused `table.column` token that
/// names a schema column.
pub fn parse_ssql(text: &str, schema: &Schema) -> Result<SsqlQuery, SsqlError> {
    let raw = parser::parse(text, Mode::Ssql)?;
    resolve(&raw, schema)
}

fn resolve(raw: &RawQuery, schema: &Schema) -> Result<SsqlQuery, SsqlError> {
    // Columns first, so a bad fused token is reported before its table.
    let select = raw
        .select
        .iter()
        .map(|e| expr(e, schema))
        .collect::<Result<_, _>>()?;
    let where_clause = raw
        .where_clause
        .as_ref()
        .map(|c| cond(c, schema))
        .transpose()?;
    let group_by = raw
        .group_by
        .iter()
        .map(|c| match column(c, schema)? {
            Some(id) => Ok(id),
            None => Err(unknown_token(c)),
        })
        .collect::<Result<_, _>>()?;
    let having = raw.having.as_ref().map(|c| cond(c, schema)).transpose()?;
    let order_by = raw
        .order_by
        .iter()
        .map(|(e, descending)| {
            Ok(OrderItem {
                expr: expr(e, schema)?,
                descending: *descending,
            })
        })
        .collect::<Result<_, SsqlError>>()?;

    let from = if let Some(item) = raw
        .from
        .iter()
        .find(|i| matches!(i.source, RawSource::Subquery(_)))
    {
        if raw.from.len() != 1 {
            return Err(SsqlError::Invalid {
                message: "a derived table must be the only FROM source".into(),
                position: item.position,
            });
        }
        let RawSource::Subquery(sub) = &item.source else {
            unreachable!()
        };
        SsqlFrom::Subquery(Box::new(resolve(sub, schema)?))
    } else {
        let mut tables = BTreeSet::new();
        for item in &raw.from {
            let RawSource::Table(name) = &item.source else {
                unreachable!()
            };
            let t = schema
                .find_table(name)
                .ok_or_else(|| SsqlError::UnknownTable {
                    name: name.clone(),
                    position: item.position,
                })?;
            tables.insert(t);
        }
        SsqlFrom::Tables(tables.into_iter().collect())
    };

    let set_op = match &raw.set_op {
        Some((op, rest)) => Some((*op, Box::new(resolve(rest, schema)?))),
        None => None,
    };
    Ok(Query {
        distinct: raw.distinct,
        select,
        from,
        where_clause,
        group_by,
        having,
        order_by,
        limit: raw.limit,
        set_op,
    })
}

fn unknown_token(c: &RawColumn) -> SsqlError {
    let token = match &c.qualifier {
        Some(q) => format!("{q}.{}", c.name),
        None => c.name.clone(),
    };
    SsqlError::UnknownFusedToken {
        token,
        position: c.position,
    }
}

/// `Ok(None)` for a lone double-quoted token, which is read as a string.
fn column(c: &RawColumn, schema: &Schema) -> Result<Option<ColumnId>, SsqlError> {
    match &c.qualifier {
        Some(q) => schema
            .find_qualified(q, &c.name)
            .map(Some)
            .ok_or_else(|| unknown_token(c)),
        None if c.quoted => Ok(None),
        None => Err(unknown_token(c)),
    }
}

fn expr(e: &RawExpr, schema: &Schema) -> Result<Expr<Ssql>, SsqlError> {
    Ok(match e {
        RawExpr::Column(c) => match column(c, schema)? {
            Some(id) => Expr::Column(id),
            None => Expr::Literal(Literal::Str(c.name.clone())),
        },
        RawExpr::Star => Expr::Star,
        RawExpr::Number(n) => Expr::Literal(Literal::Number(n.clone())),
        RawExpr::Str(s) => Expr::Literal(Literal::Str(s.clone())),
        RawExpr::Aggregate {
            func,
            distinct,
            arg,
            position,
        } => {
            if contains_aggregate(arg)
                || (matches!(**arg, RawExpr::Star) && *func != AggFunc::Count)
            {
                return Err(SsqlError::Invalid {
                    message: format!("invalid argument to {}", func.name()),
                    position: *position,
                });
            }
            Expr::Aggregate {
                func: *func,
                distinct: *distinct,
                arg: Box::new(expr(arg, schema)?),
            }
        }
        RawExpr::Arith { op, left, right } => Expr::Arith {
            op: *op,
            left: Box::new(expr(left, schema)?),
            right: Box::new(expr(right, schema)?),
        },
        RawExpr::Subquery(q) => Expr::Subquery(Box::new(resolve(q, schema)?)),
    })
}

fn cond(c: &RawCond, schema: &Schema) -> Result<Condition<Ssql>, SsqlError> {
    Ok(match c {
        RawCond::Predicate(RawPred::Compare { left, op, right }) => {
            Condition::Predicate(Predicate::Compare {
                left: expr(left, schema)?,
                op: *op,
                right: expr(right, schema)?,
            })
        }
        RawCond::Predicate(RawPred::Between { expr: e, low, high }) => {
            Condition::Predicate(Predicate::Between {
                expr: expr(e, schema)?,
                low: expr(low, schema)?,
                high: expr(high, schema)?,
            })
        }
        RawCond::And(parts) => Condition::And(
            parts
                .iter()
                .map(|p| cond(p, schema))
                .collect::<Result<_, _>>()?,
        ),
        RawCond::Or(parts) => Condition::Or(
            parts
                .iter()
                .map(|p| cond(p, schema))
                .collect::<Result<_, _>>()?,
        ),
    })
}

struct SsqlPrinter<'s> {
    schema: &'s Schema,
}

impl Printer<Ssql> for SsqlPrinter<'_> {
    fn enter_block(&mut self, _: &SsqlQuery) {}

    fn exit_block(&mut self) {}

    fn column(&self, c: &ColumnId, out: &mut String) {
        out.push_str(&ident(self.schema.table_name(c.table)));
        out.push('.');
        out.push_str(&ident(self.schema.column_name(*c)));
    }

    fn from(&mut self, from: &SsqlFrom, out: &mut String) {
        match from {
            SsqlFrom::Tables(tables) => {
                for (i, t) in tables.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" , ");
                    }
                    out.push_str(&ident(self.schema.table_name(*t)));
                }
            }
            SsqlFrom::Subquery(q) => {
                out.push('(');
                write_query(q, self, out);
                out.push(')');
            }
        }
    }
}

pub fn print_ssql(q: &SsqlQuery, schema: &Schema) -> String {
    let mut out = String::new();
    write_query(q, &mut SsqlPrinter { schema }, &mut out);
    out
}

#[cfg(test)]
mod tests;
