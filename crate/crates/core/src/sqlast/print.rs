//! Canonical text: lowercase keywords and identifiers, single spaces between
//! tokens, ` , ` between list items.

use super::lexer::Keyword;
use super::{
    walk_block, Condition, Dialect, Expr, FromClause, Literal, Predicate, Query, Source, Sql,
    SqlQuery,
};
use crate::schema::Schema;

/// Dialect-specific parts of printing.
pub(crate) trait Printer<D: Dialect> {
    fn enter_block(&mut self, q: &Query<D>);
    fn exit_block(&mut self);
    fn column(&self, c: &D::Column, out: &mut String);
    fn from(&mut self, from: &D::From, out: &mut String);
}

/// Lowercases a name and quotes it when it would not lex back as one
/// identifier.
pub(crate) fn ident(name: &str) -> String {
    let lower = name.to_lowercase();
    let simple = lower
        .bytes()
        .next()
        .is_some_and(|b| b.is_ascii_lowercase() || b == b'_')
        && lower
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_');
    if simple && Keyword::lookup(&lower).is_none() {
        lower
    } else {
        format!("\"{}\"", lower.replace('"', "\"\""))
    }
}

pub(crate) fn write_query<D: Dialect, P: Printer<D>>(q: &Query<D>, p: &mut P, out: &mut String) {
    p.enter_block(q);
    out.push_str("select ");
    if q.distinct {
        out.push_str("distinct ");
    }
    for (i, e) in q.select.iter().enumerate() {
        if i > 0 {
            out.push_str(" , ");
        }
        write_expr(e, p, out);
    }
    out.push_str(" from ");
    p.from(&q.from, out);
    if let Some(c) = &q.where_clause {
        out.push_str(" where ");
        write_cond(c, p, out);
    }
    if !q.group_by.is_empty() {
        out.push_str(" group by ");
        for (i, c) in q.group_by.iter().enumerate() {
            if i > 0 {
                out.push_str(" , ");
            }
            p.column(c, out);
        }
    }
    if let Some(c) = &q.having {
        out.push_str(" having ");
        write_cond(c, p, out);
    }
    if !q.order_by.is_empty() {
        out.push_str(" order by ");
        for (i, o) in q.order_by.iter().enumerate() {
            if i > 0 {
                out.push_str(" , ");
            }
            write_expr(&o.expr, p, out);
            if o.descending {
                out.push_str(" desc");
            }
        }
    }
    if let Some(n) = q.limit {
        out.push_str(&format!(" limit {n}"));
    }
    p.exit_block();
    if let Some((op, rest)) = &q.set_op {
        out.push(' ');
        out.push_str(op.keyword());
        out.push(' ');
        write_query(rest, p, out);
    }
}

pub(crate) fn write_expr<D: Dialect, P: Printer<D>>(e: &Expr<D>, p: &mut P, out: &mut String) {
    match e {
        Expr::Column(c) => p.column(c, out),
        Expr::Star => out.push('*'),
        Expr::Literal(Literal::Number(n)) => out.push_str(n),
        Expr::Literal(Literal::Str(s)) => {
            out.push('\'');
            out.push_str(&s.replace('\'', "''"));
            out.push('\'');
        }
        Expr::Literal(Literal::Placeholder) => out.push_str("'?'"),
        Expr::Aggregate {
            func,
            distinct,
            arg,
        } => {
            out.push_str(func.name());
            out.push('(');
            if *distinct {
                out.push_str("distinct ");
            }
            write_expr(arg, p, out);
            out.push(')');
        }
        Expr::Arith { op, left, right } => {
            write_operand(left, p, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_operand(right, p, out);
        }
        Expr::Subquery(q) => {
            out.push('(');
            write_query(q, p, out);
            out.push(')');
        }
    }
}

fn write_operand<D: Dialect, P: Printer<D>>(e: &Expr<D>, p: &mut P, out: &mut String) {
    if matches!(e, Expr::Arith { .. }) {
        out.push('(');
        write_expr(e, p, out);
        out.push(')');
    } else {
        write_expr(e, p, out);
    }
}

pub(crate) fn write_cond<D: Dialect, P: Printer<D>>(c: &Condition<D>, p: &mut P, out: &mut String) {
    match c {
        Condition::Predicate(Predicate::Compare { left, op, right }) => {
            write_expr(left, p, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(right, p, out);
        }
        Condition::Predicate(Predicate::Between { expr, low, high }) => {
            write_expr(expr, p, out);
            out.push_str(" between ");
            write_expr(low, p, out);
            out.push_str(" and ");
            write_expr(high, p, out);
        }
        Condition::And(parts) | Condition::Or(parts) => {
            let sep = if matches!(c, Condition::And(_)) {
                " and "
            } else {
                " or "
            };
            for (i, part) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                if matches!(part, Condition::Predicate(_)) {
                    write_cond(part, p, out);
                } else {
                    out.push('(');
                    write_cond(part, p, out);
                    out.push(')');
                }
            }
        }
    }
}

enum Label {
    Alias(String),
    /// Single-source block: columns print bare, or `table.column` from
    /// nested blocks.
    Bare(String),
    Derived,
}

struct SqlPrinter<'s> {
    schema: &'s Schema,
    scopes: Vec<Vec<Label>>,
}

impl Printer<Sql> for SqlPrinter<'_> {
    fn enter_block(&mut self, q: &SqlQuery) {
        let offset = self
            .scopes
            .iter()
            .flatten()
            .filter(|l| matches!(l, Label::Alias(_)))
            .count();
        let mut referenced_from_inside = false;
        walk_block(q, 0, true, &mut |c, depth| {
            referenced_from_inside |= depth > 0 && c.scope == depth;
        });
        let items = &q.from.items;
        let labels = if items.len() == 1 && !referenced_from_inside {
            vec![match &items[0].source {
                Source::Table(t) => Label::Bare(ident(self.schema.table_name(*t))),
                Source::Subquery(_) => Label::Derived,
            }]
        } else {
            (0..items.len())
                .map(|i| Label::Alias(format!("t{}", offset + i + 1)))
                .collect()
        };
        self.scopes.push(labels);
    }

    fn exit_block(&mut self) {
        self.scopes.pop();
    }

    fn column(&self, c: &super::ColumnRef, out: &mut String) {
        let name = ident(self.schema.column_name(c.column));
        let scope = &self.scopes[self.scopes.len() - 1 - c.scope];
        match &scope[c.source] {
            Label::Alias(a) => {
                out.push_str(a);
                out.push('.');
            }
            Label::Bare(t) if c.scope > 0 => {
                out.push_str(t);
                out.push('.');
            }
            Label::Bare(_) | Label::Derived => {}
        }
        out.push_str(&name);
    }

    fn from(&mut self, from: &FromClause, out: &mut String) {
        for (i, item) in from.items.iter().enumerate() {
            if i > 0 {
                out.push_str(if item.on.is_some() { " join " } else { " , " });
            }
            match &item.source {
                Source::Table(t) => out.push_str(&ident(self.schema.table_name(*t))),
                Source::Subquery(q) => {
                    out.push('(');
                    write_query(q, self, out);
                    out.push(')');
                }
            }
            if let Some(Label::Alias(a)) = self.scopes.last().and_then(|s| s.get(i)) {
                out.push_str(" as ");
                out.push_str(a);
            }
            if let Some(on) = &item.on {
                out.push_str(" on ");
                write_cond(on, self, out);
            }
        }
    }
}

/// Canonical SQL text of a resolved query.
pub fn print_sql(q: &SqlQuery, schema: &Schema) -> String {
    let mut out = String::new();
    write_query(
        q,
        &mut SqlPrinter {
            schema,
            scopes: Vec::new(),
        },
        &mut out,
    );
    out
}
