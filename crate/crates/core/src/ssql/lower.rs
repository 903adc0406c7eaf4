use std::collections::HashSet;

use super::{Ssql, SsqlFrom, SsqlQuery};
use crate::schema::{ColumnId, Schema, TableId};
use crate::sqlast::{convert, walk_block, ColumnRef, Converter, Source, Sql, SqlQuery};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LowerError {
    #[error("self-join on {table} cannot be expressed without aliases")]
    UnsupportedSelfJoin { table: String },
    #[error("a derived table joined with other sources cannot be lowered")]
    DerivedTableJoin,
    #[error("column {column} is read through a derived table")]
    DerivedColumn { column: String },
}

/// Drops joins, join conditions and aliases.
///
/// A block's FROM keeps the tables referenced outside join conditions
/// (including from nested subqueries), plus tables not referenced at all.
/// Tables that only serve as join connectors are dropped. When nothing would
/// remain, as in `count(*)` over a join, every table is kept.
pub fn lower_to_ssql(q: &SqlQuery, schema: &Schema) -> Result<SsqlQuery, LowerError> {
    convert(
        q,
        &mut Lowerer {
            schema,
            scopes: Vec::new(),
        },
    )
}

struct Lowerer<'s> {
    schema: &'s Schema,
    /// Per block, whether each FROM source is a base table.
    scopes: Vec<Vec<bool>>,
}

impl Converter<Sql, Ssql> for Lowerer<'_> {
    type Error = LowerError;

    fn enter_block(&mut self, q: &SqlQuery) -> Result<SsqlFrom, LowerError> {
        let items = &q.from.items;
        if let Some(sub) = items.iter().find_map(|i| match &i.source {
            Source::Subquery(s) => Some(s),
            Source::Table(_) => None,
        }) {
            if items.len() != 1 {
                return Err(LowerError::DerivedTableJoin);
            }
            let saved = std::mem::take(&mut self.scopes);
            let lowered = convert(sub, self);
            self.scopes = saved;
            self.scopes.push(vec![false]);
            return Ok(SsqlFrom::Subquery(Box::new(lowered?)));
        }

        let tables: Vec<TableId> = q.from.tables().collect();
        let mut seen = HashSet::new();
        for &t in &tables {
            if !seen.insert(t) {
                return Err(LowerError::UnsupportedSelfJoin {
                    table: self.schema.table_name(t).to_string(),
                });
            }
        }
        let mut mentioned = vec![false; tables.len()];
        walk_block(q, 0, false, &mut |c: &ColumnRef, depth| {
            if c.scope == depth {
                mentioned[c.source] = true;
            }
        });
        let mut referenced = vec![false; tables.len()];
        walk_block(q, 0, true, &mut |c: &ColumnRef, depth| {
            if c.scope == depth {
                referenced[c.source] = true;
            }
        });
        let mut keep: Vec<TableId> = (0..tables.len())
            .filter(|&i| mentioned[i] || !referenced[i])
            .map(|i| tables[i])
            .collect();
        if keep.is_empty() {
            keep = tables.clone();
        }
        keep.sort();
        self.scopes.push(vec![true; tables.len()]);
        Ok(SsqlFrom::Tables(keep))
    }

    fn exit_block(&mut self) {
        self.scopes.pop();
    }

    fn column(&mut self, c: &ColumnRef) -> Result<ColumnId, LowerError> {
        let scope = &self.scopes[self.scopes.len() - 1 - c.scope];
        if scope[c.source] {
            Ok(c.column)
        } else {
            Err(LowerError::DerivedColumn {
                column: self.schema.column_name(c.column).to_string(),
            })
        }
    }
}
