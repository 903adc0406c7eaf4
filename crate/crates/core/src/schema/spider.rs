use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{ColumnId, Schema, SchemaError, TableDef, TypeTag};

#[derive(Debug, Deserialize)]
struct RawEntry {
    db_id: String,
    table_names_original: Vec<String>,
    column_names_original: Vec<(i64, String)>,
    column_types: Vec<String>,
    #[serde(default)]
    foreign_keys: Vec<(usize, usize)>,
    #[serde(default)]
    primary_keys: Vec<PrimaryKey>,
}

/// Newer tables files list composite primary keys as nested arrays.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PrimaryKey {
    Single(usize),
    Composite(Vec<usize>),
}

/// All schemas of a tables file, keyed by `db_id`.
#[derive(Debug, Clone, Default)]
pub struct SchemaSet {
    schemas: BTreeMap<String, Schema>,
}

impl SchemaSet {
    pub fn get(&self, db_id: &str) -> Result<&Schema, SchemaError> {
        self.schemas
            .get(db_id)
            .ok_or_else(|| SchemaError::UnknownDbId(db_id.to_string()))
    }

    pub fn insert(&mut self, schema: Schema) {
        self.schemas.insert(schema.db_id.clone(), schema);
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Schema> {
        self.schemas.values()
    }
}

impl FromIterator<Schema> for SchemaSet {
    fn from_iter<I: IntoIterator<Item = Schema>>(iter: I) -> Self {
        let mut set = SchemaSet::default();
        for s in iter {
            set.insert(s);
        }
        set
    }
}

pub fn load_schemas(path: impl AsRef<Path>) -> Result<SchemaSet, SchemaError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => SchemaError::FileNotFound(path.display().to_string()),
        _ => SchemaError::MalformedSchemaFile(format!("{}: {e}", path.display())),
    })?;
    parse_tables_json(&text)
}

pub fn load_schema(path: impl AsRef<Path>, db_id: &str) -> Result<Schema, SchemaError> {
    let set = load_schemas(path)?;
    set.get(db_id).cloned()
}

/// Parses the Spider tables-array document.
pub fn parse_tables_json(text: &str) -> Result<SchemaSet, SchemaError> {
    let entries: Vec<RawEntry> =
        serde_json::from_str(text).map_err(|e| SchemaError::MalformedSchemaFile(e.to_string()))?;
    entries.into_iter().map(convert).collect()
}

fn convert(entry: RawEntry) -> Result<Schema, SchemaError> {
    let malformed =
        |msg: String| SchemaError::MalformedSchemaFile(format!("{}: {msg}", entry.db_id));
    if entry.column_types.len() != entry.column_names_original.len() {
        return Err(malformed(format!(
            "{} column types for {} columns",
            entry.column_types.len(),
            entry.column_names_original.len()
        )));
    }

    let mut tables: Vec<TableDef> = entry
        .table_names_original
        .iter()
        .map(|name| TableDef {
            name: name.clone(),
            columns: Vec::new(),
        })
        .collect();
    // Global column index -> resolved id; `None` for the synthetic "*".
    let mut by_index: Vec<Option<ColumnId>> = Vec::with_capacity(entry.column_names_original.len());
    for ((table, name), type_tag) in entry.column_names_original.iter().zip(&entry.column_types) {
        if *table < 0 {
            by_index.push(None);
            continue;
        }
        let t = *table as usize;
        let def = tables
            .get_mut(t)
            .ok_or_else(|| malformed(format!("column {name} references table index {t}")))?;
        by_index.push(Some(ColumnId::new(t, def.columns.len())));
        def.columns
            .push((name.clone(), TypeTag::from_spider(type_tag)));
    }

    let resolve = |i: usize| -> Result<ColumnId, SchemaError> {
        by_index
            .get(i)
            .copied()
            .flatten()
            .ok_or_else(|| malformed(format!("column index {i} does not name a table column")))
    };
    let mut fks = Vec::with_capacity(entry.foreign_keys.len());
    for &(a, b) in &entry.foreign_keys {
        fks.push((resolve(a)?, resolve(b)?));
    }
    let mut pks = Vec::new();
    for pk in &entry.primary_keys {
        match pk {
            PrimaryKey::Single(i) => pks.push(resolve(*i)?),
            PrimaryKey::Composite(is) => {
                for i in is {
                    pks.push(resolve(*i)?);
                }
            }
        }
    }
    Schema::new(entry.db_id.clone(), tables, fks, pks)
}
