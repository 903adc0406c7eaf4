pub mod eval;
pub mod rerank;
pub mod schema;
pub mod sqlast;
pub mod ssql;

pub use eval::{exact_set_match, rerank_report, roundtrip_report, RecoveryReport, RerankReport};
pub use rerank::{
    assign_soft_logits, combine_score, rerank_beams, BeamSet, LabelConfig, RerankConfig, Scorer,
};
pub use schema::{load_schema, load_schemas, ColumnId, JoinPlan, Schema, SchemaSet, TableId};
pub use sqlast::{parse_sql, print_sql, SqlQuery};
pub use ssql::{lift_to_sql, lower_to_ssql, parse_ssql, print_ssql, SsqlQuery};
