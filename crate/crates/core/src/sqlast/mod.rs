//! Spider-dialect SQL: syntax tree, parser, canonical printer and normalizer.
//!
//! The tree is generic over a [`Dialect`] so the same expression and condition
//! types serve both standard SQL (alias-bound column references, joined FROM
//! clauses) and SSQL (fused `table.column` tokens, plain table lists).

mod lexer;
mod normalize;
pub(crate) mod parser;
mod print;
mod resolve;

use std::fmt;
use std::hash::Hash;

use crate::schema::{ColumnId, Schema, TableId};

pub(crate) use normalize::normalize_as_sets;
pub use normalize::normalize_sql;
pub use print::print_sql;
pub(crate) use print::{ident, write_query, Printer};
pub(crate) use resolve::contains_aggregate;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    /// Byte offset of the offending token.
    pub position: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at position {}: expected {}, found {}",
            self.position,
            self.expected.join(" | "),
            self.found
        )
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SqlError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown table {name} at position {position}")]
    UnknownTable { name: String, position: usize },
    #[error("unknown column {name} at position {position}")]
    UnknownColumn { name: String, position: usize },
    #[error("ambiguous column {name} at position {position}")]
    AmbiguousColumn { name: String, position: usize },
    #[error("{message} at position {position}")]
    Invalid { message: String, position: usize },
}

/// Per-dialect pieces of the syntax tree.
pub trait Dialect: Clone + fmt::Debug + PartialEq + Eq + Hash + PartialOrd + Ord {
    type Column: Clone + fmt::Debug + PartialEq + Eq + Hash + PartialOrd + Ord;
    type From: Clone + fmt::Debug + PartialEq + Eq + Hash + PartialOrd + Ord;

    fn from_conditions(from: &Self::From) -> Vec<&Condition<Self>>;
    fn from_subqueries(from: &Self::From) -> Vec<&Query<Self>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sql;

/// A resolved column reference.
///
/// `scope` counts enclosing query blocks outward (0 is the block the reference
/// appears in) and `source` indexes that block's FROM items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnRef {
    pub scope: usize,
    pub source: usize,
    pub column: ColumnId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FromClause {
    pub items: Vec<FromItem>,
}

/// One FROM source; `on` is the condition of the `join` that introduced it.
/// Items after the first without `on` were comma-joined.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FromItem {
    pub source: Source,
    pub on: Option<Condition<Sql>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Table(TableId),
    Subquery(Box<SqlQuery>),
}

impl Dialect for Sql {
    type Column = ColumnRef;
    type From = FromClause;

    fn from_conditions(from: &FromClause) -> Vec<&Condition<Sql>> {
        from.items.iter().filter_map(|i| i.on.as_ref()).collect()
    }

    fn from_subqueries(from: &FromClause) -> Vec<&SqlQuery> {
        from.items
            .iter()
            .filter_map(|i| match &i.source {
                Source::Subquery(q) => Some(q.as_ref()),
                Source::Table(_) => None,
            })
            .collect()
    }
}

pub type SqlQuery = Query<Sql>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Query<D: Dialect> {
    pub distinct: bool,
    pub select: Vec<Expr<D>>,
    pub from: D::From,
    pub where_clause: Option<Condition<D>>,
    pub group_by: Vec<D::Column>,
    pub having: Option<Condition<D>>,
    pub order_by: Vec<OrderItem<D>>,
    pub limit: Option<u64>,
    pub set_op: Option<(SetOp, Box<Query<D>>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetOp {
    Union,
    Intersect,
    Except,
}

impl SetOp {
    pub fn keyword(self) -> &'static str {
        match self {
            SetOp::Union => "union",
            SetOp::Intersect => "intersect",
            SetOp::Except => "except",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderItem<D: Dialect> {
    pub expr: Expr<D>,
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr<D: Dialect> {
    Column(D::Column),
    /// `*`, either as a select item or as the argument of `count`.
    Star,
    Literal(Literal),
    Aggregate {
        func: AggFunc,
        distinct: bool,
        arg: Box<Expr<D>>,
    },
    Arith {
        op: ArithOp,
        left: Box<Expr<D>>,
        right: Box<Expr<D>>,
    },
    Subquery(Box<Query<D>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    /// Kept exactly as written.
    Number(String),
    Str(String),
    /// Stand-in for any value when comparing without values.
    Placeholder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggFunc {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggFunc {
    pub fn name(self) -> &'static str {
        match self {
            AggFunc::Count => "count",
            AggFunc::Sum => "sum",
            AggFunc::Avg => "avg",
            AggFunc::Min => "min",
            AggFunc::Max => "max",
        }
    }

    pub fn from_name(name: &str) -> Option<AggFunc> {
        match name.to_ascii_lowercase().as_str() {
            "count" => Some(AggFunc::Count),
            "sum" => Some(AggFunc::Sum),
            "avg" => Some(AggFunc::Avg),
            "min" => Some(AggFunc::Min),
            "max" => Some(AggFunc::Max),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Like,
    NotLike,
    In,
    NotIn,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Like => "like",
            CmpOp::NotLike => "not like",
            CmpOp::In => "in",
            CmpOp::NotIn => "not in",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition<D: Dialect> {
    Predicate(Predicate<D>),
    And(Vec<Condition<D>>),
    Or(Vec<Condition<D>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate<D: Dialect> {
    Compare {
        left: Expr<D>,
        op: CmpOp,
        right: Expr<D>,
    },
    Between {
        expr: Expr<D>,
        low: Expr<D>,
        high: Expr<D>,
    },
}

impl<D: Dialect> Condition<D> {
    pub fn and(mut parts: Vec<Condition<D>>) -> Option<Condition<D>> {
        match parts.len() {
            0 => None,
            1 => parts.pop(),
            _ => Some(Condition::And(parts)),
        }
    }

    pub fn compare(left: Expr<D>, op: CmpOp, right: Expr<D>) -> Condition<D> {
        Condition::Predicate(Predicate::Compare { left, op, right })
    }
}

impl FromClause {
    pub fn tables(&self) -> impl Iterator<Item = TableId> + '_ {
        self.items.iter().filter_map(|i| match i.source {
            Source::Table(t) => Some(t),
            Source::Subquery(_) => None,
        })
    }

    /// Number of join clauses (items introduced by `join ... on`).
    pub fn join_count(&self) -> usize {
        self.items.iter().filter(|i| i.on.is_some()).count()
    }
}

/// Calls `f` for every column reference of one query block, with the nesting
/// depth at which it occurs. Subquery operands are entered at `depth + 1`
/// together with their set-operation branches; the block's own set-operation
/// branch and FROM subqueries are separate blocks and are skipped. ON
/// conditions are included when `include_from` is set.
pub fn walk_block<D: Dialect>(
    q: &Query<D>,
    depth: usize,
    include_from: bool,
    f: &mut dyn FnMut(&D::Column, usize),
) {
    for e in &q.select {
        walk_expr(e, depth, f);
    }
    if include_from {
        for c in D::from_conditions(&q.from) {
            walk_cond(c, depth, f);
        }
    }
    if let Some(c) = &q.where_clause {
        walk_cond(c, depth, f);
    }
    for c in &q.group_by {
        f(c, depth);
    }
    if let Some(c) = &q.having {
        walk_cond(c, depth, f);
    }
    for o in &q.order_by {
        walk_expr(&o.expr, depth, f);
    }
}

fn walk_nested<D: Dialect>(q: &Query<D>, depth: usize, f: &mut dyn FnMut(&D::Column, usize)) {
    walk_block(q, depth, true, f);
    if let Some((_, rest)) = &q.set_op {
        walk_nested(rest, depth, f);
    }
}

fn walk_expr<D: Dialect>(e: &Expr<D>, depth: usize, f: &mut dyn FnMut(&D::Column, usize)) {
    match e {
        Expr::Column(c) => f(c, depth),
        Expr::Star | Expr::Literal(_) => {}
        Expr::Aggregate { arg, .. } => walk_expr(arg, depth, f),
        Expr::Arith { left, right, .. } => {
            walk_expr(left, depth, f);
            walk_expr(right, depth, f);
        }
        Expr::Subquery(q) => walk_nested(q, depth + 1, f),
    }
}

fn walk_cond<D: Dialect>(c: &Condition<D>, depth: usize, f: &mut dyn FnMut(&D::Column, usize)) {
    match c {
        Condition::Predicate(Predicate::Compare { left, right, .. }) => {
            walk_expr(left, depth, f);
            walk_expr(right, depth, f);
        }
        Condition::Predicate(Predicate::Between { expr, low, high }) => {
            walk_expr(expr, depth, f);
            walk_expr(low, depth, f);
            walk_expr(high, depth, f);
        }
        Condition::And(cs) | Condition::Or(cs) => {
            for c in cs {
                walk_cond(c, depth, f);
            }
        }
    }
}

/// Every query block reachable from `q`, including FROM subqueries and
/// set-operation branches, in pre-order.
pub fn blocks<D: Dialect>(q: &Query<D>) -> Vec<&Query<D>> {
    fn expr_blocks<'q, D: Dialect>(e: &'q Expr<D>, out: &mut Vec<&'q Query<D>>) {
        match e {
            Expr::Aggregate { arg, .. } => expr_blocks(arg, out),
            Expr::Arith { left, right, .. } => {
                expr_blocks(left, out);
                expr_blocks(right, out);
            }
            Expr::Subquery(q) => collect(q, out),
            _ => {}
        }
    }
    fn cond_blocks<'q, D: Dialect>(c: &'q Condition<D>, out: &mut Vec<&'q Query<D>>) {
        match c {
            Condition::Predicate(Predicate::Compare { left, right, .. }) => {
                expr_blocks(left, out);
                expr_blocks(right, out);
            }
            Condition::Predicate(Predicate::Between { expr, low, high }) => {
                expr_blocks(expr, out);
                expr_blocks(low, out);
                expr_blocks(high, out);
            }
            Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| cond_blocks(c, out)),
        }
    }
    fn collect<'q, D: Dialect>(q: &'q Query<D>, out: &mut Vec<&'q Query<D>>) {
        out.push(q);
        for sub in D::from_subqueries(&q.from) {
            collect(sub, out);
        }
        for c in D::from_conditions(&q.from) {
            cond_blocks(c, out);
        }
        q.select.iter().for_each(|e| expr_blocks(e, out));
        q.where_clause.iter().for_each(|c| cond_blocks(c, out));
        q.having.iter().for_each(|c| cond_blocks(c, out));
        q.order_by.iter().for_each(|o| expr_blocks(&o.expr, out));
        if let Some((_, rest)) = &q.set_op {
            collect(rest, out);
        }
    }
    let mut out = Vec::new();
    collect(q, &mut out);
    out
}

/// Every column reference anywhere in the query.
pub fn all_columns<D: Dialect>(q: &Query<D>) -> Vec<&D::Column> {
    let mut out = Vec::new();
    collect_columns(q, &mut out);
    out
}

fn collect_columns<'q, D: Dialect>(q: &'q Query<D>, out: &mut Vec<&'q D::Column>) {
    fn expr<'q, D: Dialect>(e: &'q Expr<D>, out: &mut Vec<&'q D::Column>) {
        match e {
            Expr::Column(c) => out.push(c),
            Expr::Aggregate { arg, .. } => expr(arg, out),
            Expr::Arith { left, right, .. } => {
                expr(left, out);
                expr(right, out);
            }
            Expr::Subquery(q) => collect_columns(q, out),
            Expr::Star | Expr::Literal(_) => {}
        }
    }
    fn cond<'q, D: Dialect>(c: &'q Condition<D>, out: &mut Vec<&'q D::Column>) {
        match c {
            Condition::Predicate(Predicate::Compare { left, right, .. }) => {
                expr(left, out);
                expr(right, out);
            }
            Condition::Predicate(Predicate::Between { expr: e, low, high }) => {
                expr(e, out);
                expr(low, out);
                expr(high, out);
            }
            Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| cond(c, out)),
        }
    }
    for sub in D::from_subqueries(&q.from) {
        collect_columns(sub, out);
    }
    for c in D::from_conditions(&q.from) {
        cond(c, out);
    }
    q.select.iter().for_each(|e| expr(e, out));
    q.where_clause.iter().for_each(|c| cond(c, out));
    out.extend(q.group_by.iter());
    q.having.iter().for_each(|c| cond(c, out));
    q.order_by.iter().for_each(|o| expr(&o.expr, out));
    if let Some((_, rest)) = &q.set_op {
        collect_columns(rest, out);
    }
}

/// Rewrites a query from one dialect to another, one block at a time.
/// `enter_block` converts the FROM clause (recursing into FROM subqueries
/// itself) and sets up whatever scope `column` needs; `exit_block` undoes it.
pub(crate) trait Converter<A: Dialect, B: Dialect> {
    type Error;
    fn enter_block(&mut self, q: &Query<A>) -> Result<B::From, Self::Error>;
    fn exit_block(&mut self);
    fn column(&mut self, c: &A::Column) -> Result<B::Column, Self::Error>;
}

pub(crate) fn convert<A: Dialect, B: Dialect, C: Converter<A, B>>(
    q: &Query<A>,
    conv: &mut C,
) -> Result<Query<B>, C::Error> {
    let from = conv.enter_block(q)?;
    let select = q
        .select
        .iter()
        .map(|e| convert_expr(e, conv))
        .collect::<Result<_, _>>()?;
    let where_clause = q
        .where_clause
        .as_ref()
        .map(|c| convert_cond(c, conv))
        .transpose()?;
    let group_by = q
        .group_by
        .iter()
        .map(|c| conv.column(c))
        .collect::<Result<_, _>>()?;
    let having = q
        .having
        .as_ref()
        .map(|c| convert_cond(c, conv))
        .transpose()?;
    let order_by = q
        .order_by
        .iter()
        .map(|o| {
            Ok(OrderItem {
                expr: convert_expr(&o.expr, conv)?,
                descending: o.descending,
            })
        })
        .collect::<Result<_, C::Error>>()?;
    conv.exit_block();
    let set_op = match &q.set_op {
        Some((op, rest)) => Some((*op, Box::new(convert(rest, conv)?))),
        None => None,
    };
    Ok(Query {
        distinct: q.distinct,
        select,
        from,
        where_clause,
        group_by,
        having,
        order_by,
        limit: q.limit,
        set_op,
    })
}

pub(crate) fn convert_expr<A: Dialect, B: Dialect, C: Converter<A, B>>(
    e: &Expr<A>,
    conv: &mut C,
) -> Result<Expr<B>, C::Error> {
    Ok(match e {
        Expr::Column(c) => Expr::Column(conv.column(c)?),
        Expr::Star => Expr::Star,
        Expr::Literal(l) => Expr::Literal(l.clone()),
        Expr::Aggregate {
            func,
            distinct,
            arg,
        } => Expr::Aggregate {
            func: *func,
            distinct: *distinct,
            arg: Box::new(convert_expr(arg, conv)?),
        },
        Expr::Arith { op, left, right } => Expr::Arith {
            op: *op,
            left: Box::new(convert_expr(left, conv)?),
            right: Box::new(convert_expr(right, conv)?),
        },
        Expr::Subquery(q) => Expr::Subquery(Box::new(convert(q, conv)?)),
    })
}

pub(crate) fn convert_cond<A: Dialect, B: Dialect, C: Converter<A, B>>(
    c: &Condition<A>,
    conv: &mut C,
) -> Result<Condition<B>, C::Error> {
    Ok(match c {
        Condition::Predicate(Predicate::Compare { left, op, right }) => {
            Condition::Predicate(Predicate::Compare {
                left: convert_expr(left, conv)?,
                op: *op,
                right: convert_expr(right, conv)?,
            })
        }
        Condition::Predicate(Predicate::Between { expr, low, high }) => {
            Condition::Predicate(Predicate::Between {
                expr: convert_expr(expr, conv)?,
                low: convert_expr(low, conv)?,
                high: convert_expr(high, conv)?,
            })
        }
        Condition::And(parts) => Condition::And(
            parts
                .iter()
                .map(|p| convert_cond(p, conv))
                .collect::<Result<_, _>>()?,
        ),
        Condition::Or(parts) => Condition::Or(
            parts
                .iter()
                .map(|p| convert_cond(p, conv))
                .collect::<Result<_, _>>()?,
        ),
    })
}

/// Parses Spider-dialect SQL and resolves every reference against `schema`.
pub fn parse_sql(text: &str, schema: &Schema) -> Result<SqlQuery, SqlError> {
    let raw = parser::parse(text, parser::Mode::Sql)?;
    resolve::resolve(&raw, schema)
}

/// Number of whitespace-separated tokens.
pub fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::schema;

    fn roundtrip(text: &str) -> String {
        let s = schema("concert_singer");
        print_sql(&parse_sql(text, &s).unwrap(), &s)
    }

    #[test]
    fn canonical_single_table() {
        assert_eq!(
            roundtrip("SELECT count(*) FROM singer"),
            "select count(*) from singer"
        );
        assert_eq!(
            roundtrip("SELECT Name, Country, Age FROM singer ORDER BY age DESC"),
            "select name , country , age from singer order by age desc"
        );
    }

    #[test]
    fn aliases_resolve_to_tables() {
        let s = schema("concert_singer");
        let q = parse_sql(
            "SELECT T1.Name FROM singer AS T1 JOIN singer_in_concert AS T2 ON T1.Singer_ID = T2.Singer_ID",
            &s,
        )
        .unwrap();
        let tables: Vec<&str> = q.from.tables().map(|t| s.table_name(t)).collect();
        assert_eq!(tables, ["singer", "singer_in_concert"]);
        let Expr::Column(c) = &q.select[0] else {
            panic!()
        };
        assert_eq!((c.scope, c.source), (0, 0));
        assert_eq!(s.column_name(c.column), "Name");
        assert_eq!(
            print_sql(&q, &s),
            "select t1.name from singer as t1 join singer_in_concert as t2 on t1.singer_id = t2.singer_id"
        );
    }

    #[test]
    fn syntax_error_position() {
        let s = schema("concert_singer");
        match parse_sql("SELECT FROM x", &s) {
            Err(SqlError::Syntax(e)) => assert_eq!(e.position, 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resolution_errors() {
        let s = schema("concert_singer");
        assert!(matches!(
            parse_sql("select name from nosuch", &s),
            Err(SqlError::UnknownTable { .. })
        ));
        assert!(matches!(
            parse_sql("select nosuch from singer", &s),
            Err(SqlError::UnknownColumn { .. })
        ));
        assert!(matches!(
            parse_sql(
                "select name from singer join stadium on singer_id = stadium_id",
                &s
            ),
            Err(SqlError::AmbiguousColumn { .. })
        ));
        assert!(matches!(
            parse_sql("select count(max(age)) from singer", &s),
            Err(SqlError::Invalid { .. })
        ));
    }

    #[test]
    fn double_quoted_values() {
        let s = schema("concert_singer");
        let q = parse_sql("select name from singer where country = \"France\"", &s).unwrap();
        assert_eq!(
            print_sql(&q, &s),
            "select name from singer where country = 'France'"
        );
        let q = parse_sql("select \"Name\" from singer", &s).unwrap();
        assert!(matches!(q.select[0], Expr::Column(_)));
    }

    #[test]
    fn correlated_reference_prints_qualified() {
        assert_eq!(
            roundtrip("SELECT name FROM singer AS s WHERE age > (SELECT avg(age) FROM singer AS t WHERE t.country = s.country)"),
            "select t1.name from singer as t1 where t1.age > (select avg(age) from singer where country = t1.country)"
        );
        assert_eq!(
            roundtrip(
                "SELECT name FROM stadium WHERE stadium_id NOT IN (SELECT stadium_id FROM concert)"
            ),
            "select name from stadium where stadium_id not in (select stadium_id from concert)"
        );
    }

    #[test]
    fn from_subquery() {
        assert_eq!(
            roundtrip(
                "SELECT count(*) FROM (SELECT name FROM singer UNION SELECT name FROM stadium)"
            ),
            "select count(*) from (select name from singer union select name from stadium)"
        );
    }

    #[test]
    fn printing_is_a_fixpoint() {
        let s = schema("concert_singer");
        for text in [
            "SELECT T2.name , count(*) FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = T2.stadium_id GROUP BY T1.stadium_id HAVING count(*) >= 2",
            "select name from singer where (age > 30 or country = 'UK') and is_male = 'T'",
            "select avg(capacity) , max(capacity) from stadium where capacity between 1000 and 5000",
            "select name from stadium where capacity * 2 > (highest - lowest) / 3",
            "select song_name from singer where song_name like '%Hey%' intersect select name from singer where age < 40",
        ] {
            let once = print_sql(&parse_sql(text, &s).unwrap(), &s);
            let twice = print_sql(&parse_sql(&once, &s).unwrap(), &s);
            assert_eq!(once, twice, "{text}");
        }
    }

    #[test]
    fn normalization_ignores_join_order_and_conjunct_order() {
        let s = schema("concert_singer");
        let a = parse_sql(
            "SELECT T1.name FROM singer AS T1 JOIN singer_in_concert AS T2 ON T1.singer_id = T2.singer_id JOIN concert AS T3 ON T2.concert_id = T3.concert_id WHERE T3.year = 2014 AND T1.age > 20",
            &s,
        )
        .unwrap();
        let b = parse_sql(
            "SELECT A.name FROM concert AS C JOIN singer_in_concert AS B ON C.concert_id = B.concert_id JOIN singer AS A ON A.singer_id = B.singer_id WHERE A.age > 20 AND C.year = 2014",
            &s,
        )
        .unwrap();
        assert_ne!(a, b);
        assert_eq!(normalize_sql(&a), normalize_sql(&b));
        let n = normalize_sql(&a);
        assert_eq!(normalize_sql(&n), n);
        // normalized text reparses to the same tree
        let text = print_sql(&n, &s);
        assert_eq!(normalize_sql(&parse_sql(&text, &s).unwrap()), n);
    }

    #[test]
    fn normalization_keeps_distinct_queries_apart() {
        let s = schema("concert_singer");
        let a = parse_sql("select name from singer where age > 20", &s).unwrap();
        let b = parse_sql("select name from singer where age < 20", &s).unwrap();
        assert_ne!(normalize_sql(&a), normalize_sql(&b));
    }

    #[test]
    fn walkers_see_nested_columns() {
        let s = schema("concert_singer");
        let q = parse_sql(
            "select name from stadium where stadium_id not in (select stadium_id from concert where year = 2014)",
            &s,
        )
        .unwrap();
        assert_eq!(all_columns(&q).len(), 4);
        assert_eq!(blocks(&q).len(), 2);
        let mut depths = Vec::new();
        walk_block(&q, 0, true, &mut |_, d| depths.push(d));
        assert_eq!(depths, vec![0, 0, 1, 1]);
    }

    #[test]
    fn token_counts() {
        assert_eq!(token_count("select count(*) from singer"), 4);
    }
}
