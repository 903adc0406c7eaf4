//! Database schemas, the table/column graph and Steiner-tree join recovery.

mod graph;
mod spider;
mod steiner;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use graph::{build_graph, Edge, EdgeId, EdgeKind, Node, NodeId, SchemaGraph};
pub use spider::{load_schema, load_schemas, parse_tables_json, SchemaSet};
pub use steiner::{
    join_plan_from_tree, steiner_tree, JoinPlan, JoinStep, SteinerTree, EXACT_MAX_NODES,
    EXACT_MAX_TERMINALS,
};

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("schema file not found: {0}")]
    FileNotFound(String),
    #[error("malformed schema file: {0}")]
    MalformedSchemaFile(String),
    #[error("unknown db_id: {0}")]
    UnknownDbId(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SteinerError {
    #[error("terminal set is empty")]
    EmptyTerminals,
    #[error("terminal {0} is not a node of the schema graph")]
    UnknownNode(usize),
    #[error("no connected subgraph covers all terminals")]
    DisconnectedTerminals,
}

/// Index of a table in schema order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TableId(pub usize);

/// A column, addressed by its owning table and its position inside that table.
///
/// The derived ordering is schema order: by table, then by column position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColumnId {
    pub table: TableId,
    pub index: usize,
}

impl ColumnId {
    pub fn new(table: usize, index: usize) -> Self {
        ColumnId {
            table: TableId(table),
            index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeTag {
    Text,
    Number,
    Time,
    Boolean,
    Others,
}

impl TypeTag {
    pub fn from_spider(tag: &str) -> TypeTag {
        match tag.to_ascii_lowercase().as_str() {
            "text" => TypeTag::Text,
            "number" => TypeTag::Number,
            "time" => TypeTag::Time,
            "boolean" => TypeTag::Boolean,
            _ => TypeTag::Others,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub table: TableId,
    pub type_tag: TypeTag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
}

/// Metadata of one database: tables, columns, primary and foreign keys.
///
/// Names keep their original casing; every lookup is case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub db_id: String,
    pub tables: Vec<Table>,
    pub foreign_keys: Vec<(ColumnId, ColumnId)>,
    pub primary_keys: Vec<ColumnId>,
    table_index: HashMap<String, TableId>,
}

/// Builder-side description of a table used by [`Schema::new`].
#[derive(Debug, Clone)]
pub struct TableDef {
    pub name: String,
    pub columns: Vec<(String, TypeTag)>,
}

impl TableDef {
    /// Table whose columns all carry the `others` type tag.
    pub fn untyped(name: &str, columns: &[&str]) -> TableDef {
        TableDef {
            name: name.to_string(),
            columns: columns
                .iter()
                .map(|c| (c.to_string(), TypeTag::Others))
                .collect(),
        }
    }
}

impl Schema {
    /// Validates and assembles a schema. Duplicate and self-referencing
    /// foreign-key pairs are dropped; `(a, b)` and `(b, a)` count as duplicates.
    pub fn new(
        db_id: impl Into<String>,
        tables: Vec<TableDef>,
        foreign_keys: Vec<(ColumnId, ColumnId)>,
        primary_keys: Vec<ColumnId>,
    ) -> Result<Schema, SchemaError> {
        let db_id = db_id.into();
        let malformed = |msg: String| SchemaError::MalformedSchemaFile(format!("{db_id}: {msg}"));

        let mut table_index = HashMap::new();
        let mut built = Vec::with_capacity(tables.len());
        for (t, def) in tables.into_iter().enumerate() {
            if def.name.is_empty() {
                return Err(malformed(format!("table {t} has an empty name")));
            }
            if def.columns.is_empty() {
                return Err(malformed(format!("table {} has no columns", def.name)));
            }
            if table_index
                .insert(def.name.to_lowercase(), TableId(t))
                .is_some()
            {
                return Err(malformed(format!("duplicate table name {}", def.name)));
            }
            let mut seen = std::collections::HashSet::new();
            let mut columns = Vec::with_capacity(def.columns.len());
            for (name, type_tag) in def.columns {
                if name.is_empty() {
                    return Err(malformed(format!("empty column name in {}", def.name)));
                }
                if !seen.insert(name.to_lowercase()) {
                    return Err(malformed(format!("duplicate column {}.{}", def.name, name)));
                }
                columns.push(Column {
                    name,
                    table: TableId(t),
                    type_tag,
                });
            }
            built.push(Table {
                name: def.name,
                columns,
            });
        }

        let exists = |c: &ColumnId| {
            built
                .get(c.table.0)
                .is_some_and(|t| c.index < t.columns.len())
        };
        let mut fks: Vec<(ColumnId, ColumnId)> = Vec::with_capacity(foreign_keys.len());
        for (a, b) in foreign_keys {
            if !exists(&a) || !exists(&b) {
                return Err(malformed(format!("foreign key {a:?} -> {b:?} is dangling")));
            }
            if a == b {
                continue;
            }
            if fks
                .iter()
                .any(|&(x, y)| (x == a && y == b) || (x == b && y == a))
            {
                continue;
            }
            fks.push((a, b));
        }
        for pk in &primary_keys {
            if !exists(pk) {
                return Err(malformed(format!("primary key {pk:?} is dangling")));
            }
        }

        Ok(Schema {
            db_id,
            tables: built,
            foreign_keys: fks,
            primary_keys,
            table_index,
        })
    }

    pub fn table(&self, id: TableId) -> &Table {
        &self.tables[id.0]
    }

    pub fn column(&self, id: ColumnId) -> &Column {
        &self.tables[id.table.0].columns[id.index]
    }

    pub fn table_name(&self, id: TableId) -> &str {
        &self.tables[id.0].name
    }

    pub fn column_name(&self, id: ColumnId) -> &str {
        &self.column(id).name
    }

    pub fn find_table(&self, name: &str) -> Option<TableId> {
        self.table_index.get(&name.to_lowercase()).copied()
    }

    pub fn find_column(&self, table: TableId, name: &str) -> Option<ColumnId> {
        self.tables[table.0]
            .columns
            .iter()
            .position(|c| c.name.eq_ignore_ascii_case(name))
            .map(|index| ColumnId { table, index })
    }

    /// Resolves `table.column` with case-insensitive matching.
    pub fn find_qualified(&self, table: &str, column: &str) -> Option<ColumnId> {
        let t = self.find_table(table)?;
        self.find_column(t, column)
    }

    pub fn column_count(&self) -> usize {
        self.tables.iter().map(|t| t.columns.len()).sum()
    }

    pub fn column_ids(&self) -> impl Iterator<Item = ColumnId> + '_ {
        self.tables.iter().enumerate().flat_map(|(t, table)| {
            (0..table.columns.len()).map(move |index| ColumnId::new(t, index))
        })
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.db_id)?;
        for table in &self.tables {
            let cols: Vec<&str> = table.columns.iter().map(|c| c.name.as_str()).collect();
            writeln!(f, "  {} ({})", table.name, cols.join(", "))?;
        }
        for (a, b) in &self.foreign_keys {
            writeln!(
                f,
                "  {}.{} = {}.{}",
                self.table_name(a.table),
                self.column_name(*a),
                self.table_name(b.table),
                self.column_name(*b)
            )?;
        }
        Ok(())
    }
}
