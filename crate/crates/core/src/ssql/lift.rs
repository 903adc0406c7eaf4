use std::collections::{BTreeSet, HashSet};

use super::{Ssql, SsqlFrom, SsqlQuery};
use crate::schema::{
    build_graph, join_plan_from_tree, steiner_tree, ColumnId, NodeId, Schema, SchemaGraph,
    SteinerError, TableId,
};
use crate::sqlast::{
    convert, walk_block, CmpOp, ColumnRef, Condition, Converter, Expr, FromClause, FromItem,
    Source, Sql, SqlQuery,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LiftError {
    #[error("no join path connects {tables}")]
    Disconnected { tables: String },
    #[error(transparent)]
    Steiner(SteinerError),
    #[error("column {column} belongs to no table in scope")]
    UnresolvedColumn { column: String },
}

/// Restores joins and join conditions.
///
/// In each block the Steiner terminals are the FROM tables and the block's
/// own fused columns. A column whose table is listed by an enclosing block
/// (and not by this one) is an outer reference; a column whose table is
/// listed nowhere is treated as this block's and pulls its table in.
pub fn lift_to_sql(q: &SsqlQuery, schema: &Schema) -> Result<SqlQuery, LiftError> {
    lift_with_graph(q, schema, &build_graph(schema))
}

/// [`lift_to_sql`] with a prebuilt graph of `schema`.
pub fn lift_with_graph(
    q: &SsqlQuery,
    schema: &Schema,
    graph: &SchemaGraph,
) -> Result<SqlQuery, LiftError> {
    convert(
        q,
        &mut Lifter {
            schema,
            graph,
            scopes: Vec::new(),
        },
    )
}

struct Lifter<'s> {
    schema: &'s Schema,
    graph: &'s SchemaGraph,
    /// FROM tables of each open block, in join order.
    scopes: Vec<Vec<TableId>>,
}

impl Lifter<'_> {
    fn plan_block(&self, q: &SsqlQuery, tables: &[TableId]) -> Result<FromClause, LiftError> {
        let outer: HashSet<TableId> = self.scopes.iter().flatten().copied().collect();
        let mut terminals: BTreeSet<NodeId> =
            tables.iter().map(|&t| self.graph.table_node(t)).collect();
        walk_block(q, 0, true, &mut |c: &ColumnId, depth| {
            if depth == 0 && (tables.contains(&c.table) || !outer.contains(&c.table)) {
                terminals.insert(self.graph.column_node(*c));
            }
        });
        let terminals: Vec<NodeId> = terminals.into_iter().collect();
        let tree = steiner_tree(self.graph, &terminals).map_err(|e| match e {
            SteinerError::DisconnectedTerminals => LiftError::Disconnected {
                tables: self.describe_terminals(&terminals),
            },
            other => LiftError::Steiner(other),
        })?;
        let plan = join_plan_from_tree(&tree, self.graph);

        let reference = |c: ColumnId| {
            Expr::Column(ColumnRef {
                scope: 0,
                source: plan.position(c.table).expect("step tables are in the plan"),
                column: c,
            })
        };
        let items = plan
            .tables
            .iter()
            .map(|&t| {
                let on = plan
                    .steps
                    .iter()
                    .filter(|s| s.right.table == t)
                    .map(|s| Condition::compare(reference(s.left), CmpOp::Eq, reference(s.right)))
                    .collect();
                FromItem {
                    source: Source::Table(t),
                    on: Condition::and(on),
                }
            })
            .collect();
        Ok(FromClause { items })
    }

    fn describe_terminals(&self, terminals: &[NodeId]) -> String {
        let names: BTreeSet<&str> = terminals
            .iter()
            .map(|&n| self.schema.table_name(self.graph.owner(n)))
            .collect();
        names.into_iter().collect::<Vec<_>>().join(", ")
    }
}

impl Converter<Ssql, Sql> for Lifter<'_> {
    type Error = LiftError;

    fn enter_block(&mut self, q: &SsqlQuery) -> Result<FromClause, LiftError> {
        match &q.from {
            SsqlFrom::Subquery(sub) => {
                let saved = std::mem::take(&mut self.scopes);
                let lifted = convert(sub.as_ref(), self);
                self.scopes = saved;
                self.scopes.push(Vec::new());
                Ok(FromClause {
                    items: vec![FromItem {
                        source: Source::Subquery(Box::new(lifted?)),
                        on: None,
                    }],
                })
            }
            SsqlFrom::Tables(tables) => {
                let from = self.plan_block(q, tables)?;
                self.scopes.push(from.tables().collect());
                Ok(from)
            }
        }
    }

    fn exit_block(&mut self) {
        self.scopes.pop();
    }

    fn column(&mut self, c: &ColumnId) -> Result<ColumnRef, LiftError> {
        for (scope, tables) in self.scopes.iter().rev().enumerate() {
            if let Some(source) = tables.iter().position(|&t| t == c.table) {
                return Ok(ColumnRef {
                    scope,
                    source,
                    column: *c,
                });
            }
        }
        Err(LiftError::UnresolvedColumn {
            column: format!(
                "{}.{}",
                self.schema.table_name(c.table),
                self.schema.column_name(*c)
            ),
        })
    }
}
