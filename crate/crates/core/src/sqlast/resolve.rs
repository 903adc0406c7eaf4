//! Binds table names, aliases and column names of a parsed SQL query to the
//! schema, producing scope/source-indexed column references.

use super::parser::{RawColumn, RawCond, RawExpr, RawFromItem, RawPred, RawQuery, RawSource};
use super::{
    AggFunc, ColumnRef, Condition, Expr, FromClause, FromItem, Literal, OrderItem, Predicate,
    Query, Source, SqlError, SqlQuery,
};
use crate::schema::{ColumnId, Schema, TableId};

pub(super) fn resolve(raw: &RawQuery, schema: &Schema) -> Result<SqlQuery, SqlError> {
    Resolver {
        schema,
        scopes: Vec::new(),
    }
    .query(raw)
}

struct ScopeSource {
    table: Option<TableId>,
    alias: Option<String>,
    /// Output columns of a FROM subquery, by lowercase name.
    derived: Vec<(String, ColumnId)>,
}

struct Resolver<'s> {
    schema: &'s Schema,
    scopes: Vec<Vec<ScopeSource>>,
}

impl Resolver<'_> {
    fn query(&mut self, raw: &RawQuery) -> Result<SqlQuery, SqlError> {
        let mut q = self.block(raw)?;
        if let Some((op, rest)) = &raw.set_op {
            q.set_op = Some((*op, Box::new(self.query(rest)?)));
        }
        Ok(q)
    }

    fn block(&mut self, raw: &RawQuery) -> Result<SqlQuery, SqlError> {
        let mut sources = Vec::with_capacity(raw.from.len());
        let mut items = Vec::with_capacity(raw.from.len());
        for item in &raw.from {
            let (source, scope) = self.resolve_source(item)?;
            items.push(source);
            sources.push(scope);
        }
        self.scopes.push(sources);
        let result = self.block_body(raw, items);
        self.scopes.pop();
        result
    }

    fn resolve_source(&mut self, item: &RawFromItem) -> Result<(Source, ScopeSource), SqlError> {
        let alias = item.alias.as_ref().map(|a| a.to_lowercase());
        match &item.source {
            RawSource::Table(name) => {
                let t = self
                    .schema
                    .find_table(name)
                    .ok_or_else(|| SqlError::UnknownTable {
                        name: name.clone(),
                        position: item.position,
                    })?;
                Ok((
                    Source::Table(t),
                    ScopeSource {
                        table: Some(t),
                        alias,
                        derived: Vec::new(),
                    },
                ))
            }
            RawSource::Subquery(sub) => {
                // A derived table cannot see the enclosing query.
                let saved = std::mem::take(&mut self.scopes);
                let resolved = self.query(sub);
                self.scopes = saved;
                let sub = resolved?;
                let derived = sub
                    .select
                    .iter()
                    .filter_map(|e| match e {
                        Expr::Column(c) => {
                            Some((self.schema.column_name(c.column).to_lowercase(), c.column))
                        }
                        _ => None,
                    })
                    .collect();
                Ok((
                    Source::Subquery(Box::new(sub)),
                    ScopeSource {
                        table: None,
                        alias,
                        derived,
                    },
                ))
            }
        }
    }

    fn block_body(&mut self, raw: &RawQuery, sources: Vec<Source>) -> Result<SqlQuery, SqlError> {
        let mut items = Vec::with_capacity(sources.len());
        for (source, item) in sources.into_iter().zip(&raw.from) {
            let on = item.on.as_ref().map(|c| self.cond(c)).transpose()?;
            items.push(FromItem { source, on });
        }
        let select = raw
            .select
            .iter()
            .map(|e| self.expr(e))
            .collect::<Result<_, _>>()?;
        let where_clause = raw
            .where_clause
            .as_ref()
            .map(|c| self.cond(c))
            .transpose()?;
        let group_by = raw
            .group_by
            .iter()
            .map(|c| {
                self.column(c)?.ok_or_else(|| SqlError::UnknownColumn {
                    name: c.name.clone(),
                    position: c.position,
                })
            })
            .collect::<Result<_, _>>()?;
        let having = raw.having.as_ref().map(|c| self.cond(c)).transpose()?;
        let order_by = raw
            .order_by
            .iter()
            .map(|(e, descending)| {
                Ok(OrderItem {
                    expr: self.expr(e)?,
                    descending: *descending,
                })
            })
            .collect::<Result<_, SqlError>>()?;
        Ok(Query {
            distinct: raw.distinct,
            select,
            from: FromClause { items },
            where_clause,
            group_by,
            having,
            order_by,
            limit: raw.limit,
            set_op: None,
        })
    }

    fn lookup(&self, source: &ScopeSource, name: &str) -> Option<ColumnId> {
        match source.table {
            Some(t) => self.schema.find_column(t, name),
            None => {
                let lower = name.to_lowercase();
                source
                    .derived
                    .iter()
                    .find(|(n, _)| *n == lower)
                    .map(|&(_, c)| c)
            }
        }
    }

    /// `Ok(None)` only for a lone double-quoted token that names no column.
    fn column(&self, c: &RawColumn) -> Result<Option<ColumnRef>, SqlError> {
        let ambiguous = |name: String| SqlError::AmbiguousColumn {
            name,
            position: c.position,
        };
        if let Some(qualifier) = &c.qualifier {
            let q = qualifier.to_lowercase();
            for (scope, sources) in self.scopes.iter().rev().enumerate() {
                let mut hits: Vec<usize> = (0..sources.len())
                    .filter(|&i| sources[i].alias.as_deref() == Some(q.as_str()))
                    .collect();
                if hits.is_empty() {
                    hits = (0..sources.len())
                        .filter(|&i| {
                            sources[i]
                                .table
                                .is_some_and(|t| self.schema.table_name(t).eq_ignore_ascii_case(&q))
                        })
                        .collect();
                }
                match hits.as_slice() {
                    [] => continue,
                    [source] => {
                        return match self.lookup(&sources[*source], &c.name) {
                            Some(column) => Ok(Some(ColumnRef {
                                scope,
                                source: *source,
                                column,
                            })),
                            None => Err(SqlError::UnknownColumn {
                                name: format!("{qualifier}.{}", c.name),
                                position: c.position,
                            }),
                        };
                    }
                    _ => return Err(ambiguous(qualifier.clone())),
                }
            }
            return Err(SqlError::UnknownTable {
                name: qualifier.clone(),
                position: c.position,
            });
        }

        for (scope, sources) in self.scopes.iter().rev().enumerate() {
            let hits: Vec<(usize, ColumnId)> = sources
                .iter()
                .enumerate()
                .filter_map(|(i, s)| self.lookup(s, &c.name).map(|col| (i, col)))
                .collect();
            match hits.as_slice() {
                [] => continue,
                [(source, column)] => {
                    return Ok(Some(ColumnRef {
                        scope,
                        source: *source,
                        column: *column,
                    }))
                }
                _ => return Err(ambiguous(c.name.clone())),
            }
        }
        if c.quoted {
            Ok(None)
        } else {
            Err(SqlError::UnknownColumn {
                name: c.name.clone(),
                position: c.position,
            })
        }
    }

    fn expr(&mut self, e: &RawExpr) -> Result<Expr<super::Sql>, SqlError> {
        Ok(match e {
            RawExpr::Column(c) => match self.column(c)? {
                Some(r) => Expr::Column(r),
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
                if contains_aggregate(arg) {
                    return Err(SqlError::Invalid {
                        message: "nested aggregate".into(),
                        position: *position,
                    });
                }
                if matches!(**arg, RawExpr::Star) && *func != AggFunc::Count {
                    return Err(SqlError::Invalid {
                        message: format!("{}(*) is not allowed", func.name()),
                        position: *position,
                    });
                }
                Expr::Aggregate {
                    func: *func,
                    distinct: *distinct,
                    arg: Box::new(self.expr(arg)?),
                }
            }
            RawExpr::Arith { op, left, right } => Expr::Arith {
                op: *op,
                left: Box::new(self.expr(left)?),
                right: Box::new(self.expr(right)?),
            },
            RawExpr::Subquery(q) => Expr::Subquery(Box::new(self.query(q)?)),
        })
    }

    fn cond(&mut self, c: &RawCond) -> Result<Condition<super::Sql>, SqlError> {
        Ok(match c {
            RawCond::Predicate(RawPred::Compare { left, op, right }) => {
                Condition::Predicate(Predicate::Compare {
                    left: self.expr(left)?,
                    op: *op,
                    right: self.expr(right)?,
                })
            }
            RawCond::Predicate(RawPred::Between { expr, low, high }) => {
                Condition::Predicate(Predicate::Between {
                    expr: self.expr(expr)?,
                    low: self.expr(low)?,
                    high: self.expr(high)?,
                })
            }
            RawCond::And(parts) => Condition::And(
                parts
                    .iter()
                    .map(|p| self.cond(p))
                    .collect::<Result<_, _>>()?,
            ),
            RawCond::Or(parts) => Condition::Or(
                parts
                    .iter()
                    .map(|p| self.cond(p))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }
}

pub(crate) fn contains_aggregate(e: &RawExpr) -> bool {
    match e {
        RawExpr::Aggregate { .. } => true,
        RawExpr::Arith { left, right, .. } => contains_aggregate(left) || contains_aggregate(right),
        _ => false,
    }
}
