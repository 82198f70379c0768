use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::day::Day;
use crate::taxonomy::IndicatorTaxonomy;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Person,
    Indicator,
    Organization,
    Country,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EdgeKind {
    HasIndicator,
    Knows,
    AffiliatedWith,
    LocatedIn,
}

impl EdgeKind {
    /// The only (source, target) node kinds this edge kind may connect.
    pub fn endpoints(self) -> (NodeKind, NodeKind) {
        match self {
            EdgeKind::HasIndicator => (NodeKind::Person, NodeKind::Indicator),
            EdgeKind::Knows => (NodeKind::Person, NodeKind::Person),
            EdgeKind::AffiliatedWith => (NodeKind::Person, NodeKind::Organization),
            EdgeKind::LocatedIn => (NodeKind::Person, NodeKind::Country),
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::HasIndicator => "HAS_INDICATOR",
            EdgeKind::Knows => "KNOWS",
            EdgeKind::AffiliatedWith => "AFFILIATED_WITH",
            EdgeKind::LocatedIn => "LOCATED_IN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub attrs: BTreeMap<String, String>,
}

impl Node {
    pub fn new(id: impl Into<NodeId>, kind: NodeKind) -> Self {
        Node { id: id.into(), kind, attrs: BTreeMap::new() }
    }

    pub fn person(id: impl Into<NodeId>, name: &str) -> Self {
        Node::new(id, NodeKind::Person).with_attr("name", name)
    }

    pub fn indicator(id: impl Into<NodeId>, category: &str) -> Self {
        Node::new(id, NodeKind::Indicator).with_attr("category", category)
    }

    pub fn organization(id: impl Into<NodeId>, name: &str) -> Self {
        Node::new(id, NodeKind::Organization).with_attr("name", name)
    }

    pub fn country(id: impl Into<NodeId>, name: &str) -> Self {
        Node::new(id, NodeKind::Country).with_attr("name", name)
    }

    pub fn with_attr(mut self, key: &str, value: &str) -> Self {
        self.attrs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs.get(key).map(String::as_str)
    }

    /// The `name` attribute, falling back to the id.
    pub fn display_name(&self) -> &str {
        self.attr("name").unwrap_or(self.id.as_str())
    }

    /// Category of an indicator node.
    pub fn category(&self) -> Option<&str> {
        match self.kind {
            NodeKind::Indicator => self.attr("category"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
    pub timestamp: Option<Day>,
}

impl Edge {
    pub fn new(src: impl Into<NodeId>, dst: impl Into<NodeId>, kind: EdgeKind) -> Self {
        Edge { src: src.into(), dst: dst.into(), kind, timestamp: None }
    }

    pub fn at(mut self, day: Day) -> Self {
        self.timestamp = Some(day);
        self
    }

    fn same_link(&self, other: &Edge) -> bool {
        if self.kind != other.kind {
            return false;
        }
        let forward = self.src == other.src && self.dst == other.dst;
        match self.kind {
            EdgeKind::Knows => forward || (self.src == other.dst && self.dst == other.src),
            _ => forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("node id must not be empty")]
    EmptyId,
    #[error("duplicate node id {0}")]
    DuplicateId(NodeId),
    #[error("node {id} is missing required attribute {attr:?}")]
    MissingRequiredAttr { id: NodeId, attr: &'static str },
    #[error("indicator {id} has category {category:?} which is not in the taxonomy")]
    UnknownCategory { id: NodeId, category: String },
    #[error("edge endpoint {0} does not exist")]
    DanglingEndpoint(NodeId),
    #[error("{kind} cannot connect {src:?} to {dst:?}")]
    IllegalEdgeKind { kind: EdgeKind, src: NodeKind, dst: NodeKind },
    #[error("{0} KNOWS itself")]
    SelfLoop(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("radius must be at least 1")]
    InvalidRadius,
}

/// Typed property graph of a knowledge network.
///
/// `HAS_INDICATOR` edges may repeat (the same behavior observed on different
/// dates); all other edge kinds are deduplicated, with `KNOWS` compared as an
/// undirected pair.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    taxonomy: Arc<IndicatorTaxonomy>,
    nodes: BTreeMap<NodeId, Node>,
    edges: Vec<Edge>,
    outgoing: HashMap<NodeId, Vec<usize>>,
    incoming: HashMap<NodeId, Vec<usize>>,
    version: u64,
}

impl KnowledgeGraph {
    pub fn new(taxonomy: impl Into<Arc<IndicatorTaxonomy>>) -> Self {
        KnowledgeGraph {
            taxonomy: taxonomy.into(),
            nodes: BTreeMap::new(),
            edges: Vec::new(),
            outgoing: HashMap::new(),
            incoming: HashMap::new(),
            version: 0,
        }
    }

    pub fn taxonomy(&self) -> &IndicatorTaxonomy {
        &self.taxonomy
    }

    pub fn shared_taxonomy(&self) -> Arc<IndicatorTaxonomy> {
        Arc::clone(&self.taxonomy)
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn add_node(&mut self, node: Node) -> Result<NodeId, GraphError> {
        let id = self.insert_node(node)?;
        self.version += 1;
        Ok(id)
    }

    /// Stores `edge`. Returns `false` when an identical non-repeatable link
    /// already exists, in which case the graph is unchanged.
    pub fn add_edge(&mut self, edge: Edge) -> Result<bool, GraphError> {
        let added = self.insert_edge(edge)?;
        if added {
            self.version += 1;
        }
        Ok(added)
    }

    pub(crate) fn bump_version(&mut self) {
        self.version += 1;
    }

    pub(crate) fn insert_node(&mut self, node: Node) -> Result<NodeId, GraphError> {
        if node.id.as_str().is_empty() {
            return Err(GraphError::EmptyId);
        }
        if self.nodes.contains_key(&node.id) {
            return Err(GraphError::DuplicateId(node.id));
        }
        match node.kind {
            NodeKind::Person => {
                if node.attr("name").is_none() {
                    return Err(GraphError::MissingRequiredAttr { id: node.id, attr: "name" });
                }
            }
            NodeKind::Indicator => match node.attr("category") {
                None => return Err(GraphError::MissingRequiredAttr { id: node.id, attr: "category" }),
                Some(c) if !self.taxonomy.contains(c) => {
                    let category = c.to_string();
                    return Err(GraphError::UnknownCategory { id: node.id, category });
                }
                Some(_) => {}
            },
            NodeKind::Organization | NodeKind::Country => {}
        }
        let id = node.id.clone();
        self.nodes.insert(id.clone(), node);
        Ok(id)
    }

    pub(crate) fn insert_edge(&mut self, edge: Edge) -> Result<bool, GraphError> {
        let src = self.nodes.get(&edge.src).ok_or_else(|| GraphError::DanglingEndpoint(edge.src.clone()))?;
        let dst = self.nodes.get(&edge.dst).ok_or_else(|| GraphError::DanglingEndpoint(edge.dst.clone()))?;
        if edge.kind.endpoints() != (src.kind, dst.kind) {
            return Err(GraphError::IllegalEdgeKind { kind: edge.kind, src: src.kind, dst: dst.kind });
        }
        if edge.kind == EdgeKind::Knows && edge.src == edge.dst {
            return Err(GraphError::SelfLoop(edge.src));
        }
        if edge.kind != EdgeKind::HasIndicator {
            let duplicate = self
                .outgoing
                .get(&edge.src)
                .into_iter()
                .chain(self.incoming.get(&edge.src))
                .flatten()
                .any(|&i| self.edges[i].same_link(&edge));
            if duplicate {
                return Ok(false);
            }
        }
        let idx = self.edges.len();
        self.outgoing.entry(edge.src.clone()).or_default().push(idx);
        self.incoming.entry(edge.dst.clone()).or_default().push(idx);
        self.edges.push(edge);
        Ok(true)
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    /// All nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    /// Person nodes in ascending id order.
    pub fn persons(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values().filter(|n| n.kind == NodeKind::Person)
    }

    /// All edges in insertion order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn outgoing(&self, id: &str) -> impl Iterator<Item = &Edge> {
        self.outgoing.get(id).into_iter().flatten().map(move |&i| &self.edges[i])
    }

    pub fn incoming(&self, id: &str) -> impl Iterator<Item = &Edge> {
        self.incoming.get(id).into_iter().flatten().map(move |&i| &self.edges[i])
    }

    /// Nodes adjacent to `id` over one edge of `kind`. `KNOWS` is followed in
    /// both directions, every other kind only forwards.
    pub fn adjacent(&self, id: &str, kind: EdgeKind) -> impl Iterator<Item = &NodeId> {
        let forward = self.outgoing(id).filter(move |e| e.kind == kind).map(|e| &e.dst);
        let backward = self.incoming(id).filter(move |e| kind == EdgeKind::Knows && e.kind == kind).map(|e| &e.src);
        forward.chain(backward)
    }

    /// Everything reachable from `start` within `radius` hops of `kind`,
    /// excluding `start` itself.
    pub fn neighbors(&self, start: &str, kind: EdgeKind, radius: u32) -> Result<BTreeSet<NodeId>, GraphError> {
        if radius == 0 {
            return Err(GraphError::InvalidRadius);
        }
        let start = self.nodes.get_key_value(start).ok_or_else(|| GraphError::UnknownNode(start.into()))?.0;
        let mut seen = BTreeSet::new();
        let mut frontier = VecDeque::from([(start, 0u32)]);
        while let Some((id, depth)) = frontier.pop_front() {
            if depth == radius {
                continue;
            }
            for next in self.adjacent(id.as_str(), kind) {
                if next != start && seen.insert(next.clone()) {
                    frontier.push_back((next, depth + 1));
                }
            }
        }
        Ok(seen)
    }
}
