use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ssql_bench::{beams, corpus, schemas};
use ssql_core::eval::roundtrip_report;
use ssql_core::rerank::{rerank_beams, BaselineScorer, RerankConfig};
use ssql_core::schema::{build_graph, steiner_tree, NodeId};
use ssql_core::sqlast::parse_sql;
use ssql_core::ssql::{lift_with_graph, lower_to_ssql};

fn steiner(c: &mut Criterion) {
    let set = schemas();
    let schema = set.get("concert_singer").unwrap();
    let graph = build_graph(schema);
    let tables: Vec<NodeId> = (0..schema.tables.len())
        .map(|t| graph.table_node(ssql_core::schema::TableId(t)))
        .collect();
    c.bench_function("steiner/all tables", |b| {
        b.iter(|| steiner_tree(&graph, black_box(&tables)).unwrap())
    });
    let pair = [tables[0], tables[1]];
    c.bench_function("steiner/stadium-singer", |b| {
        b.iter(|| steiner_tree(&graph, black_box(&pair)).unwrap())
    });
}

fn parse(c: &mut Criterion) {
    let set = schemas();
    let entries = corpus();
    c.bench_function("parse/corpus", |b| {
        b.iter(|| {
            for e in &entries {
                black_box(parse_sql(&e.sql, set.get(&e.db_id).unwrap()).unwrap());
            }
        })
    });
}

fn lower_lift(c: &mut Criterion) {
    let set = schemas();
    let graphs: Vec<_> = set
        .iter()
        .map(|s| (s.db_id.clone(), build_graph(s)))
        .collect();
    let lowered: Vec<_> = corpus()
        .iter()
        .filter_map(|e| {
            let schema = set.get(&e.db_id).unwrap();
            let q = parse_sql(&e.sql, schema).unwrap();
            lower_to_ssql(&q, schema)
                .ok()
                .map(|l| (e.db_id.clone(), q, l))
        })
        .collect();
    c.bench_function("lower/corpus", |b| {
        b.iter(|| {
            for (db, q, _) in &lowered {
                black_box(lower_to_ssql(q, set.get(db).unwrap()).unwrap());
            }
        })
    });
    c.bench_function("lift/corpus", |b| {
        b.iter(|| {
            for (db, _, l) in &lowered {
                let graph = &graphs.iter().find(|(d, _)| d == db).unwrap().1;
                black_box(lift_with_graph(l, set.get(db).unwrap(), graph).unwrap());
            }
        })
    });
    let entries = corpus();
    c.bench_function("roundtrip/report", |b| {
        b.iter(|| black_box(roundtrip_report(&entries, &set)))
    });
}

fn rerank(c: &mut Criterion) {
    let set = schemas();
    let sets = beams();
    let scorer = BaselineScorer::default();
    let config = RerankConfig::default();
    c.bench_function("rerank/baseline", |b| {
        b.iter(|| {
            for s in &sets {
                black_box(rerank_beams(s, set.get(&s.db_id).unwrap(), &scorer, &config).unwrap());
            }
        })
    });
}

criterion_group!(benches, steiner, parse, lower_lift, rerank);
criterion_main!(benches);
