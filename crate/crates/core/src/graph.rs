//! Undirected simple graph with string node ids.
//!
//! Nodes are indexed in input order; "ascending id" everywhere in the
//! crate means ascending index.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index into a [`Graph`].
pub type NodeIx = usize;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    ids: Vec<String>,
    index: HashMap<String, NodeIx>,
    adjacency: Vec<Vec<NodeIx>>,
    edges: Vec<(NodeIx, NodeIx)>,
}

impl Graph {
    /// Builds a graph, dropping self-loops and duplicate (or reversed) edges.
    ///
    /// Fails on duplicate node ids or edges referencing unknown nodes.
    pub fn new<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Self> {
        let mut g = Graph::default();
        for id in nodes {
            g.add_node(id.as_ref())?;
        }
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = g.ix(a).ok_or_else(|| Error::invalid(format!("edge references unknown node {a:?}")))?;
            let ib = g.ix(b).ok_or_else(|| Error::invalid(format!("edge references unknown node {b:?}")))?;
            g.add_edge(ia, ib);
        }
        Ok(g)
    }

    fn add_node(&mut self, id: &str) -> Result<NodeIx> {
        if self.index.contains_key(id) {
            return Err(Error::invalid(format!("duplicate node id {id:?}")));
        }
        let ix = self.ids.len();
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), ix);
        self.adjacency.push(Vec::new());
        Ok(ix)
    }

    fn add_edge(&mut self, a: NodeIx, b: NodeIx) {
        if a == b {
            return;
        }
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        if let Err(pos) = self.adjacency[u].binary_search(&v) {
            self.adjacency[u].insert(pos, v);
            let pos = self.adjacency[v].binary_search(&u).unwrap_err();
            self.adjacency[v].insert(pos, u);
            self.edges.push((u, v));
        }
    }

    /// Builds a graph from index pairs over `n` nodes named `"0"`, `"1"`, ...
    pub fn from_index_edges(n: usize, edges: &[(NodeIx, NodeIx)]) -> Self {
        let mut g = Graph::default();
        for i in 0..n {
            g.add_node(&i.to_string()).expect("fresh ids are unique");
        }
        for &(a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} nodes");
            g.add_edge(a, b);
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, ix: NodeIx) -> &str {
        &self.ids[ix]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn ix(&self, id: &str) -> Option<NodeIx> {
        self.index.get(id).copied()
    }

    /// Neighbors in ascending index order.
    pub fn neighbors(&self, ix: NodeIx) -> &[NodeIx] {
        &self.adjacency[ix]
    }

    pub fn degree(&self, ix: NodeIx) -> usize {
        self.adjacency[ix].len()
    }

    pub fn has_edge(&self, a: NodeIx, b: NodeIx) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in insertion order.
    pub fn edges(&self) -> &[(NodeIx, NodeIx)] {
        &self.edges
    }

    /// Subgraph induced by `keep`, preserving relative node order.
    pub fn induced(&self, keep: &[NodeIx]) -> Graph {
        let set: HashSet<NodeIx> = keep.iter().copied().collect();
        let mut sorted: Vec<NodeIx> = set.iter().copied().collect();
        sorted.sort_unstable();
        let mut g = Graph::default();
        for &v in &sorted {
            g.add_node(&self.ids[v]).expect("ids are unique");
        }
        for &(u, v) in &self.edges {
            if set.contains(&u) && set.contains(&v) {
                let (a, b) = (g.index[&self.ids[u]], g.index[&self.ids[v]]);
                g.add_edge(a, b);
            }
        }
        g
    }

    /// Parses either the JSON form or a whitespace-separated edge list.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_edge_list(text)
        }
    }

    /// `{"nodes": ["a", ...], "edges": [["a", "b"], ...]}`. Ids may be
    /// strings or integers; a `directed` flag is accepted and ignored since
    /// edges are symmetrized.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        doc.try_into()
    }

    /// One `a b` pair per line; blank lines and `#`/`%` comments skipped.
    /// A line with a single token declares an isolated node; tokens after
    /// the second (weights) are ignored.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut g = Graph::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
                continue;
            }
            let mut it = line.split_whitespace();
            let a = it.next().expect("non-empty line");
            let ia = match g.ix(a) {
                Some(i) => i,
                None => g.add_node(a)?,
            };
            if let Some(b) = it.next() {
                let ib = match g.ix(b) {
                    Some(i) => i,
                    None => g.add_node(b)?,
                };
                g.add_edge(ia, ib);
            }
        }
        Ok(g)
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            nodes: self.ids.iter().cloned().map(NodeId::Str).collect(),
            edges: self
                .edges
                .iter()
                .map(|&(u, v)| [NodeId::Str(self.ids[u].clone()), NodeId::Str(self.ids[v].clone())])
                .collect(),
        }
    }
}

/// Node id as it appears in JSON input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeId {
    Str(String),
    Int(i64),
}

impl NodeId {
    fn into_string(self) -> String {
        match self {
            NodeId::Str(s) => s,
            NodeId::Int(i) => i.to_string(),
        }
    }
}

/// Wire form of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub nodes: Vec<NodeId>,
    #[serde(default)]
    pub edges: Vec<[NodeId; 2]>,
}

impl TryFrom<GraphDoc> for Graph {
    type Error = Error;

    fn try_from(doc: GraphDoc) -> Result<Self> {
        let nodes: Vec<String> = doc.nodes.into_iter().map(NodeId::into_string).collect();
        let edges: Vec<(String, String)> = doc
            .edges
            .into_iter()
            .map(|[a, b]| (a.into_string(), b.into_string()))
            .collect();
        Graph::new(&nodes, &edges)
    }
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_doc().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = GraphDoc::deserialize(d)?;
        Graph::try_from(doc).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_loops_and_duplicates() {
        let g = Graph::new(&["a", "b", "c"], &[("a", "b"), ("b", "a"), ("c", "c"), ("b", "c")]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn rejects_unknown_endpoints_and_duplicate_ids() {
        assert!(Graph::new(&["a"], &[("a", "z")]).is_err());
        assert!(Graph::new(&["a", "a"], &[]).is_err());
    }

    #[test]
    fn parses_json_with_numeric_ids() {
        let g = Graph::parse(r#"{"nodes": [1, 2, "x"], "edges": [[1, 2], [2, "x"]], "directed": true}"#).unwrap();
        assert_eq!(g.ids(), &["1", "2", "x"]);
        assert!(g.has_edge(0, 1) && g.has_edge(2, 1));
    }

    #[test]
    fn parses_edge_lists() {
        let g = Graph::parse("# rome graph\n0 1\n1 2\n\n2 0\n7\n").unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degree(3), 0);
    }

    #[test]
    fn json_round_trip() {
        let g = Graph::new(&["a", "b", "c"], &[("a", "b"), ("c", "b")]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"nodes":["a","b","c"],"edges":[["a","b"],["b","c"]]}"#);
        assert_eq!(Graph::parse(&text).unwrap(), g);
    }

    #[test]
    fn induced_subgraph() {
        let g = Graph::from_index_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let h = g.induced(&[2, 0, 1]);
        assert_eq!(h.ids(), &["0", "1", "2"]);
        assert_eq!(h.edge_count(), 2);
    }
}
