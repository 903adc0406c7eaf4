use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::schema::{ColumnId, Schema, TableId};
use crate::sqlast::{blocks, parse_sql, walk_block, SqlQuery};

/// The part of the schema a query touches, as
/// `table : col , col | table : col`, in schema order. Every FROM table is
/// listed, join connectors included, but only columns used outside join
/// conditions are; a table read only through `*` or joins has no columns.
pub fn filter_schema(sql: &SqlQuery, schema: &Schema) -> String {
    let mut used: BTreeMap<TableId, BTreeSet<ColumnId>> = BTreeMap::new();
    for block in blocks(sql) {
        for t in block.from.tables() {
            used.entry(t).or_default();
        }
        walk_block(block, 0, false, &mut |c, depth| {
            if depth == 0 {
                used.entry(c.column.table).or_default().insert(c.column);
            }
        });
    }
    used.iter()
        .map(|(&t, cols)| {
            let name = schema.table_name(t).to_lowercase();
            if cols.is_empty() {
                format!("{name} :")
            } else {
                let cols: Vec<String> = cols
                    .iter()
                    .map(|&c| schema.column_name(c).to_lowercase())
                    .collect();
                format!("{name} : {}", cols.join(" , "))
            }
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

/// [`filter_schema`] on SQL text; empty when the text does not parse
/// against the schema.
pub fn filter_schema_text(sql: &str, schema: &Schema) -> String {
    parse_sql(sql, schema)
        .map(|q| filter_schema(&q, schema))
        .unwrap_or_default()
}
