//! Minimum Steiner trees over a [`SchemaGraph`] with unit edge weights.
//!
//! Small instances are solved exactly with a Dreyfus–Wagner dynamic program;
//! larger ones fall back to shortest-path merging. Before either solver runs,
//! two reductions that never change the optimum are applied:
//!
//! * non-terminal nodes of degree at most one are pruned repeatedly;
//! * terminals joined by an edge are merged into one group. With unit weights
//!   some optimal tree contains every terminal-terminal edge (swap it in for
//!   any other edge of the cycle it closes), so each group is spanned
//!   internally and treated as a single super-terminal.
//!
//! Among trees with the fewest edges, the one whose table set has the smallest
//! colexicographic rank wins: every table node carries a tie-break weight of
//! `2^rank` that is far below the cost of an edge.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use super::graph::{EdgeId, EdgeKind, Node, NodeId, SchemaGraph};
use super::{ColumnId, SteinerError, TableId};

/// Largest terminal-group count handled by the exact solver.
pub const EXACT_MAX_TERMINALS: usize = 6;
/// Largest reduced-graph node count handled by the exact solver.
pub const EXACT_MAX_NODES: usize = 40;

type Cost = u128;
const EDGE_COST: Cost = 1 << 64;
const INF: Cost = Cost::MAX;
/// Tables ranked at or above this bound carry no tie-break weight, which keeps
/// the weight sum below one edge.
const WEIGHTED_TABLES: usize = 48;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteinerTree {
    pub terminals: BTreeSet<NodeId>,
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<EdgeId>,
    /// Whether the exact solver produced this tree.
    pub exact: bool,
}

impl SteinerTree {
    pub fn size(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JoinStep {
    /// Column of the table that appears earlier in the plan.
    pub left: ColumnId,
    pub right: ColumnId,
}

/// Tables and foreign-key join conditions recovered from a Steiner tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinPlan {
    pub tables: Vec<TableId>,
    pub steps: Vec<JoinStep>,
}

impl JoinPlan {
    pub fn position(&self, table: TableId) -> Option<usize> {
        self.tables.iter().position(|&t| t == table)
    }

    pub fn render(&self, schema: &super::Schema) -> String {
        let names: Vec<&str> = self.tables.iter().map(|&t| schema.table_name(t)).collect();
        let mut out = format!("tables: {}", names.join(", "));
        for step in &self.steps {
            out.push_str(&format!(
                "\njoin: {}.{} = {}.{}",
                schema.table_name(step.left.table),
                schema.column_name(step.left),
                schema.table_name(step.right.table),
                schema.column_name(step.right)
            ));
        }
        out
    }
}

/// Reduced view of the graph the solvers run on. Each terminal group is
/// contracted to a single node, so a group's internal edges are paid once
/// however many branches attach to it.
struct Reduced {
    len: usize,
    adjacency: Vec<Vec<(usize, EdgeId)>>,
    weights: Vec<Cost>,
    groups: Vec<Group>,
}

struct Group {
    nodes: Vec<usize>,
    edges: Vec<EdgeId>,
    cost: Cost,
}

pub fn steiner_tree(
    graph: &SchemaGraph,
    terminals: &[NodeId],
) -> Result<SteinerTree, SteinerError> {
    if terminals.is_empty() {
        return Err(SteinerError::EmptyTerminals);
    }
    if let Some(bad) = terminals.iter().find(|t| t.0 >= graph.node_count()) {
        return Err(SteinerError::UnknownNode(bad.0));
    }
    let terminals: BTreeSet<NodeId> = terminals.iter().copied().collect();
    let first = *terminals.iter().next().unwrap();

    let component = reachable(graph, first);
    if terminals.iter().any(|t| !component[t.0]) {
        return Err(SteinerError::DisconnectedTerminals);
    }
    if terminals.len() == 1 {
        return Ok(SteinerTree {
            nodes: terminals.clone(),
            terminals,
            edges: BTreeSet::new(),
            exact: true,
        });
    }

    let reduced = Reduced::new(graph, &terminals, component);
    let exact = reduced.groups.len() <= EXACT_MAX_TERMINALS && reduced.len <= EXACT_MAX_NODES;
    let mut edges: BTreeSet<EdgeId> = reduced
        .groups
        .iter()
        .flat_map(|g| g.edges.iter().copied())
        .collect();
    if reduced.groups.len() > 1 {
        let connecting = if exact {
            reduced.dreyfus_wagner()
        } else {
            reduced.path_merge()
        };
        edges.extend(connecting);
    }

    let mut nodes = terminals.clone();
    for e in &edges {
        let edge = graph.edge(*e);
        nodes.insert(edge.a);
        nodes.insert(edge.b);
    }
    debug_assert_eq!(edges.len() + 1, nodes.len(), "solver output is not a tree");
    Ok(SteinerTree {
        terminals,
        nodes,
        edges,
        exact,
    })
}

fn reachable(graph: &SchemaGraph, start: NodeId) -> Vec<bool> {
    let mut seen = vec![false; graph.node_count()];
    let mut queue = VecDeque::from([start]);
    seen[start.0] = true;
    while let Some(n) = queue.pop_front() {
        for &(m, _) in graph.neighbors(n) {
            if !seen[m.0] {
                seen[m.0] = true;
                queue.push_back(m);
            }
        }
    }
    seen
}

impl Reduced {
    fn new(graph: &SchemaGraph, terminals: &BTreeSet<NodeId>, mut active: Vec<bool>) -> Self {
        // Repeatedly drop non-terminal leaves.
        let mut degree: Vec<usize> = (0..graph.node_count())
            .map(|n| {
                graph
                    .neighbors(NodeId(n))
                    .iter()
                    .filter(|(m, _)| active[m.0])
                    .count()
            })
            .collect();
        let mut queue: Vec<usize> = (0..graph.node_count())
            .filter(|&n| active[n] && degree[n] <= 1 && !terminals.contains(&NodeId(n)))
            .collect();
        while let Some(n) = queue.pop() {
            if !active[n] {
                continue;
            }
            active[n] = false;
            for &(m, _) in graph.neighbors(NodeId(n)) {
                if active[m.0] {
                    degree[m.0] -= 1;
                    if degree[m.0] <= 1 && !terminals.contains(&m) {
                        queue.push(m.0);
                    }
                }
            }
        }

        let nodes: Vec<NodeId> = (0..graph.node_count())
            .filter(|&n| active[n])
            .map(NodeId)
            .collect();
        let mut local = vec![usize::MAX; graph.node_count()];
        for (i, n) in nodes.iter().enumerate() {
            local[n.0] = i;
        }
        let adjacency: Vec<Vec<(usize, EdgeId)>> = nodes
            .iter()
            .map(|&n| {
                graph
                    .neighbors(n)
                    .iter()
                    .filter(|(m, _)| active[m.0])
                    .map(|&(m, e)| (local[m.0], e))
                    .collect()
            })
            .collect();

        let mut table_rank = 0usize;
        let weights: Vec<Cost> = nodes
            .iter()
            .map(|&n| match graph.node(n) {
                Node::Table(_) => {
                    let w = if table_rank < WEIGHTED_TABLES {
                        1 << table_rank
                    } else {
                        0
                    };
                    table_rank += 1;
                    w
                }
                Node::Column(_) => 0,
            })
            .collect();

        // Terminal groups: BFS over edges whose endpoints are both terminals.
        let is_terminal: Vec<bool> = nodes.iter().map(|n| terminals.contains(n)).collect();
        let mut assigned = vec![false; nodes.len()];
        let mut groups = Vec::new();
        for start in 0..nodes.len() {
            if !is_terminal[start] || assigned[start] {
                continue;
            }
            assigned[start] = true;
            let mut group = Group {
                nodes: vec![start],
                edges: Vec::new(),
                cost: 0,
            };
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &(u, e) in &adjacency[v] {
                    if is_terminal[u] && !assigned[u] {
                        assigned[u] = true;
                        group.nodes.push(u);
                        group.edges.push(e);
                        queue.push_back(u);
                    }
                }
            }
            group.cost = group.edges.len() as Cost * EDGE_COST
                + group.nodes.iter().map(|&v| weights[v]).sum::<Cost>();
            groups.push(group);
        }

        let mut index = vec![usize::MAX; nodes.len()];
        for (i, g) in groups.iter_mut().enumerate() {
            for &v in &g.nodes {
                index[v] = i;
            }
            g.nodes = vec![i];
        }
        let mut len = groups.len();
        for slot in index.iter_mut().filter(|s| **s == usize::MAX) {
            *slot = len;
            len += 1;
        }
        let mut contracted: Vec<Vec<(usize, EdgeId)>> = vec![Vec::new(); len];
        let mut contracted_weights: Vec<Cost> = vec![0; len];
        for v in 0..nodes.len() {
            contracted_weights[index[v]] += weights[v];
            for &(u, e) in &adjacency[v] {
                if index[u] != index[v] {
                    contracted[index[v]].push((index[u], e));
                }
            }
        }
        // Parallel edges out of a group lead to the same node set; keep the
        // lowest-numbered one.
        for list in &mut contracted {
            list.sort();
            list.dedup_by_key(|(n, _)| *n);
        }

        Reduced {
            len,
            adjacency: contracted,
            weights: contracted_weights,
            groups,
        }
    }

    fn edge(&self, a: usize, b: usize) -> EdgeId {
        self.adjacency[a]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, e)| e)
            .expect("adjacent nodes share an edge")
    }

    /// Relaxes `dist` along paths; `pred` records the node each value came from.
    fn dijkstra(&self, dist: &mut [Cost], pred: &mut [Option<usize>]) {
        let mut heap: BinaryHeap<Reverse<(Cost, usize)>> = dist
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != INF)
            .map(|(v, &d)| Reverse((d, v)))
            .collect();
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(u, _) in &self.adjacency[v] {
                let next = d + EDGE_COST + self.weights[u];
                if next < dist[u] {
                    dist[u] = next;
                    pred[u] = Some(v);
                    heap.push(Reverse((next, u)));
                }
            }
        }
    }

    fn dreyfus_wagner(&self) -> BTreeSet<EdgeId> {
        #[derive(Clone, Copy)]
        enum Back {
            Unset,
            Root,
            Pred(usize),
            Merge(usize),
        }

        let n = self.len;
        let k = self.groups.len();
        let full = (1usize << k) - 1;
        let mut dp = vec![vec![INF; n]; full + 1];
        let mut back = vec![vec![Back::Unset; n]; full + 1];

        for mask in 1..=full {
            if mask.count_ones() == 1 {
                let group = &self.groups[mask.trailing_zeros() as usize];
                for &v in &group.nodes {
                    dp[mask][v] = group.cost;
                    back[mask][v] = Back::Root;
                }
            } else {
                let low = mask & mask.wrapping_neg();
                let mut sub = (mask - 1) & mask;
                while sub > 0 {
                    if sub & low != 0 {
                        let other = mask ^ sub;
                        for v in 0..n {
                            let (a, b) = (dp[sub][v], dp[other][v]);
                            if a == INF || b == INF {
                                continue;
                            }
                            let cost = a + b - self.weights[v];
                            if cost < dp[mask][v] {
                                dp[mask][v] = cost;
                                back[mask][v] = Back::Merge(sub);
                            }
                        }
                    }
                    sub = (sub - 1) & mask;
                }
            }
            let mut pred = vec![None; n];
            self.dijkstra(&mut dp[mask], &mut pred);
            for (v, p) in pred.into_iter().enumerate() {
                if let Some(p) = p {
                    back[mask][v] = Back::Pred(p);
                }
            }
        }

        let (root, _) = dp[full]
            .iter()
            .enumerate()
            .min_by_key(|&(v, &c)| (c, v))
            .expect("reduced graph is non-empty");
        let mut edges = BTreeSet::new();
        let mut stack = vec![(full, root)];
        while let Some((mask, v)) = stack.pop() {
            match back[mask][v] {
                Back::Root => {}
                Back::Pred(u) => {
                    edges.insert(self.edge(u, v));
                    stack.push((mask, u));
                }
                Back::Merge(sub) => {
                    stack.push((sub, v));
                    stack.push((mask ^ sub, v));
                }
                Back::Unset => unreachable!("finite dp cell without a back pointer"),
            }
        }
        edges
    }

    /// Multi-source shortest paths from `sources`, each starting at zero cost.
    fn paths_from(&self, sources: &[usize]) -> (Vec<Cost>, Vec<Option<usize>>) {
        let mut dist = vec![INF; self.len];
        let mut pred = vec![None; self.len];
        for &s in sources {
            dist[s] = 0;
        }
        self.dijkstra(&mut dist, &mut pred);
        (dist, pred)
    }

    fn trace(
        &self,
        pred: &[Option<usize>],
        mut v: usize,
        edges: &mut BTreeSet<EdgeId>,
    ) -> Vec<usize> {
        let mut visited = vec![v];
        while let Some(p) = pred[v] {
            edges.insert(self.edge(p, v));
            visited.push(p);
            v = p;
        }
        visited
    }

    fn nearest(&self, dist: &[Cost], group: &Group) -> (Cost, usize) {
        group
            .nodes
            .iter()
            .map(|&v| (dist[v], v))
            .min()
            .expect("groups are non-empty")
    }

    /// Joins the closest pair of groups, then attaches the group nearest to the
    /// growing tree until every group is connected.
    fn path_merge(&self) -> BTreeSet<EdgeId> {
        let k = self.groups.len();
        let mut edges = BTreeSet::new();

        // (distance, group i, group j, predecessors from i, endpoint in j)
        type Candidate = (Cost, usize, usize, Vec<Option<usize>>, usize);
        let mut best: Option<Candidate> = None;
        for i in 0..k {
            let (dist, pred) = self.paths_from(&self.groups[i].nodes);
            for j in (i + 1)..k {
                let (d, v) = self.nearest(&dist, &self.groups[j]);
                if best.as_ref().is_none_or(|b| d < b.0) {
                    best = Some((d, i, j, pred.clone(), v));
                }
            }
        }
        let (_, i, j, pred, end) = best.expect("at least two groups");
        let mut in_tree = vec![false; self.len];
        let mut connected = vec![false; k];
        for g in [i, j] {
            connected[g] = true;
            for &v in &self.groups[g].nodes {
                in_tree[v] = true;
            }
        }
        for v in self.trace(&pred, end, &mut edges) {
            in_tree[v] = true;
        }

        while connected.iter().any(|c| !c) {
            let sources: Vec<usize> = (0..self.len).filter(|&v| in_tree[v]).collect();
            let (dist, pred) = self.paths_from(&sources);
            let (_, g, end) = (0..k)
                .filter(|&g| !connected[g])
                .map(|g| {
                    let (d, v) = self.nearest(&dist, &self.groups[g]);
                    (d, g, v)
                })
                .min()
                .expect("an unconnected group remains");
            connected[g] = true;
            for &v in &self.groups[g].nodes {
                in_tree[v] = true;
            }
            for v in self.trace(&pred, end, &mut edges) {
                in_tree[v] = true;
            }
        }
        edges
    }
}

/// Materializes the tables and foreign-key joins of a Steiner tree.
///
/// Tables are ordered by a breadth-first walk over the joins, starting at the
/// lowest-indexed table among the terminals and visiting neighbors in schema
/// order. Each step is oriented so `left` belongs to the earlier table.
/// Foreign keys between two columns of the same table join nothing and are
/// skipped.
pub fn join_plan_from_tree(tree: &SteinerTree, graph: &SchemaGraph) -> JoinPlan {
    let tables: BTreeSet<TableId> = tree.nodes.iter().map(|&n| graph.owner(n)).collect();
    let links: Vec<(ColumnId, ColumnId)> = tree
        .edges
        .iter()
        .map(|&e| graph.edge(e))
        .filter(|e| e.kind == EdgeKind::ForeignKey)
        .filter_map(|e| match (graph.node(e.a), graph.node(e.b)) {
            (Node::Column(x), Node::Column(y)) if x.table != y.table => Some((x, y)),
            _ => None,
        })
        .collect();

    let mut neighbors: BTreeMap<TableId, BTreeSet<TableId>> = BTreeMap::new();
    for &(x, y) in &links {
        neighbors.entry(x.table).or_default().insert(y.table);
        neighbors.entry(y.table).or_default().insert(x.table);
    }

    let root = tree
        .terminals
        .iter()
        .map(|&n| graph.owner(n))
        .min()
        .or_else(|| tables.iter().next().copied());
    let mut order = Vec::with_capacity(tables.len());
    let mut seen = BTreeSet::new();
    let starts = root.into_iter().chain(tables.iter().copied());
    for start in starts {
        if !seen.insert(start) {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        while let Some(t) = queue.pop_front() {
            order.push(t);
            for &m in neighbors.get(&t).into_iter().flatten() {
                if seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
    }

    let position = |t: TableId| order.iter().position(|&o| o == t).unwrap();
    let mut steps: Vec<JoinStep> = links
        .into_iter()
        .map(|(x, y)| {
            if position(x.table) <= position(y.table) {
                JoinStep { left: x, right: y }
            } else {
                JoinStep { left: y, right: x }
            }
        })
        .collect();
    steps.sort_by_key(|s| {
        (
            position(s.right.table),
            position(s.left.table),
            s.left,
            s.right,
        )
    });

    JoinPlan {
        tables: order,
        steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{build_graph, Schema, TableDef};

    fn chain() -> Schema {
        // A(id) <- B(a_id, c_id) -> C(id)
        Schema::new(
            "chain",
            vec![
                TableDef::untyped("A", &["id", "name"]),
                TableDef::untyped("B", &["a_id", "c_id"]),
                TableDef::untyped("C", &["id", "year"]),
            ],
            vec![
                (ColumnId::new(1, 0), ColumnId::new(0, 0)),
                (ColumnId::new(1, 1), ColumnId::new(2, 0)),
            ],
            vec![],
        )
        .unwrap()
    }

    fn star() -> Schema {
        // junction J links D1, D2, D3
        Schema::new(
            "star",
            vec![
                TableDef::untyped("D1", &["id", "name"]),
                TableDef::untyped("D2", &["id", "year"]),
                TableDef::untyped("D3", &["id", "size"]),
                TableDef::untyped("J", &["d1", "d2", "d3"]),
            ],
            vec![
                (ColumnId::new(3, 0), ColumnId::new(0, 0)),
                (ColumnId::new(3, 1), ColumnId::new(1, 0)),
                (ColumnId::new(3, 2), ColumnId::new(2, 0)),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn single_terminal_is_empty_tree() {
        let s = chain();
        let g = build_graph(&s);
        let t = steiner_tree(&g, &[g.table_node(TableId(1))]).unwrap();
        assert!(t.edges.is_empty());
        let plan = join_plan_from_tree(&t, &g);
        assert_eq!(plan.tables, vec![TableId(1)]);
        assert!(plan.steps.is_empty());
    }

    #[test]
    fn chain_goes_through_middle_table() {
        let s = chain();
        let g = build_graph(&s);
        let t = steiner_tree(&g, &[g.table_node(TableId(0)), g.table_node(TableId(2))]).unwrap();
        // A - A.id = B.a_id - B - B.c_id = C.id - C
        assert_eq!(t.size(), 6);
        let plan = join_plan_from_tree(&t, &g);
        assert_eq!(plan.tables, vec![TableId(0), TableId(1), TableId(2)]);
        assert_eq!(
            plan.steps,
            vec![
                JoinStep {
                    left: ColumnId::new(0, 0),
                    right: ColumnId::new(1, 0)
                },
                JoinStep {
                    left: ColumnId::new(1, 1),
                    right: ColumnId::new(2, 0)
                },
            ]
        );
    }

    #[test]
    fn star_pulls_in_junction() {
        let s = star();
        let g = build_graph(&s);
        let d1_name = g.column_node(ColumnId::new(0, 1));
        let d2_year = g.column_node(ColumnId::new(1, 1));
        let t = steiner_tree(&g, &[d1_name, d2_year]).unwrap();
        // name - D1 - D1.id - J.d1 - J - J.d2 - D2.id - D2 - year
        assert_eq!(t.size(), 8);
        let plan = join_plan_from_tree(&t, &g);
        assert_eq!(plan.tables, vec![TableId(0), TableId(3), TableId(1)]);
        assert_eq!(plan.steps.len(), 2);
    }

    #[test]
    fn disconnected_terminals() {
        let s = Schema::new(
            "two",
            vec![
                TableDef::untyped("A", &["x"]),
                TableDef::untyped("B", &["y"]),
            ],
            vec![],
            vec![],
        )
        .unwrap();
        let g = build_graph(&s);
        let err = steiner_tree(&g, &[NodeId(0), NodeId(1)]).unwrap_err();
        assert_eq!(err, SteinerError::DisconnectedTerminals);
    }

    #[test]
    fn invalid_terminals() {
        let s = chain();
        let g = build_graph(&s);
        assert_eq!(steiner_tree(&g, &[]), Err(SteinerError::EmptyTerminals));
        assert_eq!(
            steiner_tree(&g, &[NodeId(99)]),
            Err(SteinerError::UnknownNode(99))
        );
    }

    #[test]
    fn tie_prefers_lower_tables() {
        // A and D connected both through B and through C.
        let s = Schema::new(
            "diamond",
            vec![
                TableDef::untyped("A", &["id"]),
                TableDef::untyped("B", &["a", "d"]),
                TableDef::untyped("C", &["a", "d"]),
                TableDef::untyped("D", &["id"]),
            ],
            vec![
                (ColumnId::new(2, 0), ColumnId::new(0, 0)),
                (ColumnId::new(2, 1), ColumnId::new(3, 0)),
                (ColumnId::new(1, 0), ColumnId::new(0, 0)),
                (ColumnId::new(1, 1), ColumnId::new(3, 0)),
            ],
            vec![],
        )
        .unwrap();
        let g = build_graph(&s);
        let t = steiner_tree(&g, &[g.table_node(TableId(0)), g.table_node(TableId(3))]).unwrap();
        let plan = join_plan_from_tree(&t, &g);
        assert_eq!(plan.tables, vec![TableId(0), TableId(1), TableId(3)]);
    }

    #[test]
    fn heuristic_beyond_exact_envelope() {
        // T0 - T1 - ... - T7, each Ti.next -> T(i+1).id
        let tables: Vec<TableDef> = (0..8)
            .map(|i| TableDef::untyped(&format!("T{i}"), &["id", "next"]))
            .collect();
        let fks = (0..7)
            .map(|i| (ColumnId::new(i, 1), ColumnId::new(i + 1, 0)))
            .collect();
        let s = Schema::new("long", tables, fks, vec![]).unwrap();
        let g = build_graph(&s);
        let terminals: Vec<NodeId> = (0..7).map(|t| g.table_node(TableId(t))).collect();
        let t = steiner_tree(&g, &terminals).unwrap();
        assert!(!t.exact);
        assert_eq!(t.size(), 18);
        assert_eq!(t.edges.len() + 1, t.nodes.len());
    }
}
