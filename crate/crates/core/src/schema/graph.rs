use super::{ColumnId, Schema, TableId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Table(TableId),
    Column(ColumnId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Membership,
    ForeignKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn other(&self, n: NodeId) -> NodeId {
        if self.a == n {
            self.b
        } else {
            self.a
        }
    }
}

/// Undirected graph over the tables and columns of one schema.
///
/// Nodes are numbered tables first (schema order), then columns (schema order).
/// Membership edges tie each column to its table; foreign-key edges tie the two
/// columns of each foreign-key pair.
#[derive(Debug, Clone)]
pub struct SchemaGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    column_offsets: Vec<usize>,
}

pub fn build_graph(schema: &Schema) -> SchemaGraph {
    let table_count = schema.tables.len();
    let mut nodes: Vec<Node> = (0..table_count).map(|t| Node::Table(TableId(t))).collect();
    let mut column_offsets = Vec::with_capacity(table_count);
    for (t, table) in schema.tables.iter().enumerate() {
        column_offsets.push(nodes.len());
        nodes.extend((0..table.columns.len()).map(|i| Node::Column(ColumnId::new(t, i))));
    }

    let mut graph = SchemaGraph {
        adjacency: vec![Vec::new(); nodes.len()],
        nodes,
        edges: Vec::new(),
        column_offsets,
    };
    for column in schema.column_ids() {
        let a = graph.table_node(column.table);
        let b = graph.column_node(column);
        graph.push_edge(a, b, EdgeKind::Membership);
    }
    for &(x, y) in &schema.foreign_keys {
        let a = graph.column_node(x);
        let b = graph.column_node(y);
        graph.push_edge(a, b, EdgeKind::ForeignKey);
    }
    graph
}

impl SchemaGraph {
    fn push_edge(&mut self, a: NodeId, b: NodeId, kind: EdgeKind) {
        let id = EdgeId(self.edges.len());
        self.edges.push(Edge { a, b, kind });
        self.adjacency[a.0].push((b, id));
        self.adjacency[b.0].push((a, id));
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn table_count(&self) -> usize {
        self.column_offsets.len()
    }

    pub fn count_edges(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edge(&self, id: EdgeId) -> Edge {
        self.edges[id.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[id.0]
    }

    pub fn table_node(&self, table: TableId) -> NodeId {
        NodeId(table.0)
    }

    pub fn column_node(&self, column: ColumnId) -> NodeId {
        NodeId(self.column_offsets[column.table.0] + column.index)
    }

    /// Owning table of a node (a table owns itself).
    pub fn owner(&self, id: NodeId) -> TableId {
        match self.nodes[id.0] {
            Node::Table(t) => t,
            Node::Column(c) => c.table,
        }
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.adjacency[a.0]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, e)| e)
    }
}
