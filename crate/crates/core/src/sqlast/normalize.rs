//! Order-insensitive canonical form of a resolved query: FROM sources sorted
//! (with references renumbered), join conditions pooled and reattached,
//! AND/OR operands flattened, sorted and deduplicated, and the operands of
//! `=` / `!=` put in order. Normalizing twice changes nothing.

use super::{CmpOp, ColumnRef, Condition, Expr, FromItem, Predicate, Source, Sql, SqlQuery};

pub fn normalize_sql(q: &SqlQuery) -> SqlQuery {
    normalize(q, false)
}

/// Normalization that also treats SELECT items and GROUP BY columns as
/// sets (sorted, deduplicated).
pub(crate) fn normalize_as_sets(q: &SqlQuery) -> SqlQuery {
    normalize(q, true)
}

fn normalize(q: &SqlQuery, sets: bool) -> SqlQuery {
    let mut q = q.clone();
    reorder(&mut q, sets);
    canon_query(&mut q, sets);
    q
}

fn reorder(q: &mut SqlQuery, sets: bool) {
    reorder_block(q, sets);
    for_each_operand_query(q, &mut |sub| reorder(sub, sets));
    if let Some((_, rest)) = &mut q.set_op {
        reorder(rest, sets);
    }
}

fn reorder_block(q: &mut SqlQuery, sets: bool) {
    for item in &mut q.from.items {
        if let Source::Subquery(sub) = &mut item.source {
            **sub = normalize(sub, sets);
        }
    }
    let items = std::mem::take(&mut q.from.items);
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[a].source.cmp(&items[b].source));
    let mut perm = vec![0; items.len()];
    for (new, &old) in order.iter().enumerate() {
        perm[old] = new;
    }

    let mut conjuncts = Vec::new();
    let mut slots: Vec<Option<FromItem>> = items.into_iter().map(Some).collect();
    let mut sorted = Vec::with_capacity(slots.len());
    for &old in &order {
        let mut item = slots[old].take().expect("each index visited once");
        match item.on.take() {
            Some(Condition::And(parts)) => conjuncts.extend(parts),
            Some(c) => conjuncts.push(c),
            None => {}
        }
        sorted.push(item);
    }
    q.from.items = sorted;

    let mut remap = |c: &mut ColumnRef, depth: usize| {
        if c.scope == depth {
            c.source = perm[c.source];
        }
    };
    refs_in_block(q, 0, &mut remap);
    for c in &mut conjuncts {
        refs_in_cond(c, 0, &mut remap);
    }

    // Each pooled conjunct goes to the latest source it mentions.
    let n = q.from.items.len();
    let mut attached: Vec<Vec<Condition<Sql>>> = vec![Vec::new(); n];
    for mut c in conjuncts {
        let mut last = 0;
        refs_in_cond(&mut c, 0, &mut |r, depth| {
            if r.scope == depth {
                last = last.max(r.source);
            }
        });
        attached[last.max(1).min(n - 1)].push(c);
    }
    for (item, parts) in q.from.items.iter_mut().zip(attached) {
        item.on = Condition::and(parts);
    }
}

/// Subquery operands of one block (not FROM subqueries, not the block's own
/// set-operation branch).
fn for_each_operand_query(q: &mut SqlQuery, f: &mut dyn FnMut(&mut SqlQuery)) {
    fn expr(e: &mut Expr<Sql>, f: &mut dyn FnMut(&mut SqlQuery)) {
        match e {
            Expr::Subquery(q) => f(q),
            Expr::Aggregate { arg, .. } => expr(arg, f),
            Expr::Arith { left, right, .. } => {
                expr(left, f);
                expr(right, f);
            }
            Expr::Column(_) | Expr::Star | Expr::Literal(_) => {}
        }
    }
    fn cond(c: &mut Condition<Sql>, f: &mut dyn FnMut(&mut SqlQuery)) {
        match c {
            Condition::Predicate(Predicate::Compare { left, right, .. }) => {
                expr(left, f);
                expr(right, f);
            }
            Condition::Predicate(Predicate::Between { expr: e, low, high }) => {
                expr(e, f);
                expr(low, f);
                expr(high, f);
            }
            Condition::And(parts) | Condition::Or(parts) => {
                parts.iter_mut().for_each(|p| cond(p, f))
            }
        }
    }
    for item in &mut q.from.items {
        if let Some(on) = &mut item.on {
            cond(on, f);
        }
    }
    q.select.iter_mut().for_each(|e| expr(e, f));
    if let Some(c) = &mut q.where_clause {
        cond(c, f);
    }
    if let Some(c) = &mut q.having {
        cond(c, f);
    }
    q.order_by.iter_mut().for_each(|o| expr(&mut o.expr, f));
}

type RefFn<'a> = dyn FnMut(&mut ColumnRef, usize) + 'a;

fn refs_in_block(q: &mut SqlQuery, depth: usize, f: &mut RefFn<'_>) {
    for item in &mut q.from.items {
        if let Some(on) = &mut item.on {
            refs_in_cond(on, depth, f);
        }
    }
    q.select.iter_mut().for_each(|e| refs_in_expr(e, depth, f));
    if let Some(c) = &mut q.where_clause {
        refs_in_cond(c, depth, f);
    }
    q.group_by.iter_mut().for_each(|c| f(c, depth));
    if let Some(c) = &mut q.having {
        refs_in_cond(c, depth, f);
    }
    q.order_by
        .iter_mut()
        .for_each(|o| refs_in_expr(&mut o.expr, depth, f));
}

fn refs_in_nested(q: &mut SqlQuery, depth: usize, f: &mut RefFn<'_>) {
    refs_in_block(q, depth, f);
    if let Some((_, rest)) = &mut q.set_op {
        refs_in_nested(rest, depth, f);
    }
}

fn refs_in_expr(e: &mut Expr<Sql>, depth: usize, f: &mut RefFn<'_>) {
    match e {
        Expr::Column(c) => f(c, depth),
        Expr::Aggregate { arg, .. } => refs_in_expr(arg, depth, f),
        Expr::Arith { left, right, .. } => {
            refs_in_expr(left, depth, f);
            refs_in_expr(right, depth, f);
        }
        Expr::Subquery(q) => refs_in_nested(q, depth + 1, f),
        Expr::Star | Expr::Literal(_) => {}
    }
}

fn refs_in_cond(c: &mut Condition<Sql>, depth: usize, f: &mut RefFn<'_>) {
    match c {
        Condition::Predicate(Predicate::Compare { left, right, .. }) => {
            refs_in_expr(left, depth, f);
            refs_in_expr(right, depth, f);
        }
        Condition::Predicate(Predicate::Between { expr, low, high }) => {
            refs_in_expr(expr, depth, f);
            refs_in_expr(low, depth, f);
            refs_in_expr(high, depth, f);
        }
        Condition::And(parts) | Condition::Or(parts) => {
            parts.iter_mut().for_each(|p| refs_in_cond(p, depth, f))
        }
    }
}

fn canon_query(q: &mut SqlQuery, sets: bool) {
    for item in &mut q.from.items {
        if let Source::Subquery(sub) = &mut item.source {
            canon_query(sub, sets);
        }
        if let Some(on) = item.on.take() {
            item.on = Some(canon_cond(on, sets));
        }
    }
    q.select.iter_mut().for_each(|e| canon_expr(e, sets));
    q.where_clause = q.where_clause.take().map(|c| canon_cond(c, sets));
    q.having = q.having.take().map(|c| canon_cond(c, sets));
    q.order_by
        .iter_mut()
        .for_each(|o| canon_expr(&mut o.expr, sets));
    if sets {
        q.select.sort();
        q.select.dedup();
        q.group_by.sort();
        q.group_by.dedup();
    }
    if let Some((_, rest)) = &mut q.set_op {
        canon_query(rest, sets);
    }
}

fn canon_expr(e: &mut Expr<Sql>, sets: bool) {
    match e {
        Expr::Subquery(q) => canon_query(q, sets),
        Expr::Aggregate { arg, .. } => canon_expr(arg, sets),
        Expr::Arith { left, right, .. } => {
            canon_expr(left, sets);
            canon_expr(right, sets);
        }
        Expr::Column(_) | Expr::Star | Expr::Literal(_) => {}
    }
}

fn canon_cond(c: Condition<Sql>, sets: bool) -> Condition<Sql> {
    match c {
        Condition::Predicate(Predicate::Compare {
            mut left,
            op,
            mut right,
        }) => {
            canon_expr(&mut left, sets);
            canon_expr(&mut right, sets);
            if matches!(op, CmpOp::Eq | CmpOp::Ne) && right < left {
                std::mem::swap(&mut left, &mut right);
            }
            Condition::Predicate(Predicate::Compare { left, op, right })
        }
        Condition::Predicate(Predicate::Between {
            mut expr,
            mut low,
            mut high,
        }) => {
            canon_expr(&mut expr, sets);
            canon_expr(&mut low, sets);
            canon_expr(&mut high, sets);
            Condition::Predicate(Predicate::Between { expr, low, high })
        }
        Condition::And(parts) => {
            let flat = flatten(parts, sets, |c| match c {
                Condition::And(inner) => Ok(inner),
                other => Err(other),
            });
            rebuild(flat, Condition::And)
        }
        Condition::Or(parts) => {
            let flat = flatten(parts, sets, |c| match c {
                Condition::Or(inner) => Ok(inner),
                other => Err(other),
            });
            rebuild(flat, Condition::Or)
        }
    }
}

fn flatten(
    parts: Vec<Condition<Sql>>,
    sets: bool,
    split: impl Fn(Condition<Sql>) -> Result<Vec<Condition<Sql>>, Condition<Sql>>,
) -> Vec<Condition<Sql>> {
    let mut out = Vec::with_capacity(parts.len());
    for p in parts {
        match split(canon_cond(p, sets)) {
            Ok(inner) => out.extend(inner),
            Err(single) => out.push(single),
        }
    }
    out.sort();
    out.dedup();
    out
}

fn rebuild(
    mut parts: Vec<Condition<Sql>>,
    wrap: fn(Vec<Condition<Sql>>) -> Condition<Sql>,
) -> Condition<Sql> {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        wrap(parts)
    }
}
