#[path = "support/steiner_oracle.rs"]
mod steiner_oracle;

use rand::rngs::StdRng;
use rand::SeedableRng;
use ssql_core::schema::{
    build_graph, join_plan_from_tree, steiner_tree, ColumnId, EdgeKind, NodeId, Schema,
    SteinerError, TableDef,
};
use steiner_oracle::{random_schema, subsets_up_to, Oracle};

#[test]
fn matches_brute_force_on_random_schemas() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut checked = 0usize;
    for _ in 0..20 {
        let schema = random_schema(&mut rng, 8);
        let oracle = Oracle::new(&schema);
        let graph = build_graph(&schema);
        for terminals in subsets_up_to(oracle.nodes, 4) {
            let nodes: Vec<NodeId> = terminals.iter().map(|&t| NodeId(t)).collect();
            let got = steiner_tree(&graph, &nodes);
            match oracle.min_edges(&terminals) {
                None => assert_eq!(got, Err(SteinerError::DisconnectedTerminals)),
                Some(min) => {
                    let tree = got.unwrap();
                    assert_eq!(tree.size(), min, "terminals {terminals:?}\n{schema}");
                    let plan = join_plan_from_tree(&tree, &graph);
                    let fk_edges = tree
                        .edges
                        .iter()
                        .filter(|e| graph.edge(**e).kind == EdgeKind::ForeignKey)
                        .count();
                    assert_eq!(plan.steps.len(), fk_edges);
                }
            }
            checked += 1;
        }
    }
    assert!(checked > 10_000);
}

#[test]
fn output_is_deterministic() {
    let mut rng = StdRng::seed_from_u64(7);
    let schema = random_schema(&mut rng, 8);
    let graph = build_graph(&schema);
    for terminals in subsets_up_to(graph.node_count(), 3) {
        let nodes: Vec<NodeId> = terminals.iter().map(|&t| NodeId(t)).collect();
        let a = steiner_tree(&graph, &nodes);
        let b = steiner_tree(&build_graph(&schema), &nodes);
        assert_eq!(a, b);
    }
}

#[test]
fn extra_edges_never_grow_the_tree() {
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..10 {
        let schema = random_schema(&mut rng, 6);
        let graph = build_graph(&schema);
        // add one more foreign key between the first columns of tables 0 and 1
        let defs: Vec<TableDef> = schema
            .tables
            .iter()
            .map(|t| TableDef {
                name: t.name.clone(),
                columns: t
                    .columns
                    .iter()
                    .map(|c| (c.name.clone(), c.type_tag))
                    .collect(),
            })
            .collect();
        let mut fks = schema.foreign_keys.clone();
        fks.push((ColumnId::new(0, 0), ColumnId::new(1, 0)));
        let bigger = Schema::new("bigger", defs, fks, vec![]).unwrap();
        let bigger_graph = build_graph(&bigger);
        for terminals in subsets_up_to(graph.node_count(), 3) {
            let nodes: Vec<NodeId> = terminals.iter().map(|&t| NodeId(t)).collect();
            if let Ok(small) = steiner_tree(&graph, &nodes) {
                let big = steiner_tree(&bigger_graph, &nodes).unwrap();
                assert!(big.size() <= small.size());
            }
        }
    }
}

#[test]
fn branches_may_attach_to_different_members_of_a_terminal_group() {
    // t1.c0 and t3.c0 are adjacent terminals; t1.c1 hangs off t1 and t4 off
    // t3.c0, so the optimum attaches branches to both ends of that edge.
    let defs = vec![
        TableDef::untyped("t0", &["c0"]),
        TableDef::untyped("t1", &["c0", "c1", "c2"]),
        TableDef::untyped("t2", &["c0"]),
        TableDef::untyped("t3", &["c0"]),
        TableDef::untyped("t4", &["c0", "c1"]),
    ];
    let fks = vec![
        (ColumnId::new(1, 2), ColumnId::new(4, 0)),
        (ColumnId::new(3, 0), ColumnId::new(4, 1)),
        (ColumnId::new(1, 0), ColumnId::new(3, 0)),
        (ColumnId::new(3, 0), ColumnId::new(4, 0)),
    ];
    let schema = Schema::new("groups", defs, fks, vec![]).unwrap();
    let graph = build_graph(&schema);
    let terminals = [
        graph.table_node(ssql_core::schema::TableId(4)),
        graph.column_node(ColumnId::new(1, 0)),
        graph.column_node(ColumnId::new(1, 1)),
        graph.column_node(ColumnId::new(3, 0)),
    ];
    let tree = steiner_tree(&graph, &terminals).unwrap();
    assert_eq!(tree.size(), 5);
    assert!(tree.exact);
}
