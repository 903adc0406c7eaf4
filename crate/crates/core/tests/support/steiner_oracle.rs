//! Brute-force minimum Steiner tree sizes for tiny schema graphs.
//!
//! Enumerates every node subset, keeps the connected ones, then propagates the
//! smallest connected superset size down to every subset. A terminal set `T`
//! needs `min |U| - 1` edges over connected `U ⊇ T`.

use rand::rngs::StdRng;
use rand::Rng;
use ssql_core::schema::{build_graph, ColumnId, Schema, TableDef};

pub const MAX_ORACLE_NODES: usize = 16;

pub struct Oracle {
    pub nodes: usize,
    /// smallest connected superset size per mask; `u32::MAX` when none
    best: Vec<u32>,
}

impl Oracle {
    pub fn new(schema: &Schema) -> Oracle {
        let graph = build_graph(schema);
        let n = graph.node_count();
        assert!(n <= MAX_ORACLE_NODES, "oracle graph too large: {n}");
        let mut adj = vec![0u32; n];
        for e in graph.edges() {
            adj[e.a.0] |= 1 << e.b.0;
            adj[e.b.0] |= 1 << e.a.0;
        }
        let total = 1usize << n;
        let mut best = vec![u32::MAX; total];
        #[allow(clippy::needless_range_loop)]
        for mask in 1..total {
            let m = mask as u32;
            let start = m & m.wrapping_neg();
            let mut seen = start;
            let mut frontier = start;
            while frontier != 0 {
                let bit = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let next = adj[bit] & m & !seen;
                seen |= next;
                frontier |= next;
            }
            if seen == m {
                best[mask] = m.count_ones();
            }
        }
        for b in 0..n {
            for mask in 0..total {
                if mask & (1 << b) == 0 {
                    let up = best[mask | (1 << b)];
                    if up < best[mask] {
                        best[mask] = up;
                    }
                }
            }
        }
        Oracle { nodes: n, best }
    }

    /// Minimum edge count, or `None` when the terminals are disconnected.
    pub fn min_edges(&self, terminals: &[usize]) -> Option<usize> {
        let mask: usize = terminals.iter().map(|t| 1usize << t).sum();
        match self.best[mask] {
            u32::MAX => None,
            size => Some(size as usize - 1),
        }
    }
}

/// Random schema with 2..=`max_tables` tables and at most 16 graph nodes.
pub fn random_schema(rng: &mut StdRng, max_tables: usize) -> Schema {
    let tables = rng.gen_range(2..=max_tables);
    let mut columns = vec![1usize; tables];
    let budget = MAX_ORACLE_NODES - 2 * tables;
    for _ in 0..rng.gen_range(0..=budget) {
        let t = rng.gen_range(0..tables);
        columns[t] += 1;
    }
    let defs: Vec<TableDef> = columns
        .iter()
        .enumerate()
        .map(|(t, &c)| {
            let names: Vec<String> = (0..c).map(|i| format!("c{i}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            TableDef::untyped(&format!("t{t}"), &refs)
        })
        .collect();
    let mut fks = Vec::new();
    for _ in 0..rng.gen_range(0..=tables + 1) {
        let a = rng.gen_range(0..tables);
        let b = rng.gen_range(0..tables);
        if a == b {
            continue;
        }
        fks.push((
            ColumnId::new(a, rng.gen_range(0..columns[a])),
            ColumnId::new(b, rng.gen_range(0..columns[b])),
        ));
    }
    Schema::new("random", defs, fks, vec![]).unwrap()
}

/// Every subset of `0..n` with between 1 and `max` elements.
pub fn subsets_up_to(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1usize..(1 << n) {
        if mask.count_ones() as usize <= max {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}
