//! Line-oriented graph files: one JSON record per line, discriminated by `"t"`.
//!
//! ```text
//! {"t":"node","id":"p1","kind":"Person","attrs":{"name":"A"}}
//! {"t":"edge","src":"p1","dst":"i1","kind":"HAS_INDICATOR","ts":"2015-03-05"}
//! ```

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::model::{Edge, EdgeKind, GraphError, KnowledgeGraph, Node, NodeId, NodeKind};
use crate::day::Day;
use crate::taxonomy::IndicatorTaxonomy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "lowercase")]
pub enum Record {
    Node {
        id: NodeId,
        kind: NodeKind,
        #[serde(default)]
        attrs: BTreeMap<String, String>,
    },
    Edge {
        src: NodeId,
        dst: NodeId,
        kind: EdgeKind,
        #[serde(default)]
        ts: Option<Day>,
    },
}

impl From<&Node> for Record {
    fn from(n: &Node) -> Self {
        Record::Node { id: n.id.clone(), kind: n.kind, attrs: n.attrs.clone() }
    }
}

impl From<&Edge> for Record {
    fn from(e: &Edge) -> Self {
        Record::Edge { src: e.src.clone(), dst: e.dst.clone(), kind: e.kind, ts: e.timestamp }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("line {line}: {source}")]
    IntegrityViolation { line: usize, source: GraphError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn parse_record(line: &str) -> Result<Record, String> {
    serde_json::from_str(line).map_err(|e| e.to_string())
}

fn apply(g: &mut KnowledgeGraph, record: Record) -> Result<bool, GraphError> {
    match record {
        Record::Node { id, kind, attrs } => g.insert_node(Node { id, kind, attrs }).map(|_| true),
        Record::Edge { src, dst, kind, ts } => g.insert_edge(Edge { src, dst, kind, timestamp: ts }),
    }
}

/// Writes nodes in id order followed by edges in insertion order.
pub fn save<W: Write>(g: &KnowledgeGraph, mut sink: W) -> std::io::Result<()> {
    let records = g.nodes().map(Record::from).chain(g.edges().iter().map(Record::from));
    for r in records {
        serde_json::to_writer(&mut sink, &r)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}

/// Reads a graph file. Edge records may appear before the nodes they
/// reference; they are applied after all node records.
pub fn load<R: BufRead>(
    source: R,
    taxonomy: impl Into<Arc<IndicatorTaxonomy>>,
) -> Result<KnowledgeGraph, PersistError> {
    let mut g = KnowledgeGraph::new(taxonomy);
    let mut edges = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(&line).map_err(|message| PersistError::MalformedRecord { line: line_no, message })?;
        match record {
            Record::Node { .. } => {
                apply(&mut g, record).map_err(|source| PersistError::IntegrityViolation { line: line_no, source })?;
                g.bump_version();
            }
            Record::Edge { .. } => edges.push((line_no, record)),
        }
    }
    for (line_no, record) in edges {
        // duplicates of deduplicated kinds are dropped silently, as add_edge does
        if apply(&mut g, record).map_err(|source| PersistError::IntegrityViolation { line: line_no, source })? {
            g.bump_version();
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub nodes_added: usize,
    pub edges_added: usize,
    pub errors: Vec<LineError>,
    /// Non-blank lines that decoded as records, whether or not they applied.
    #[serde(skip)]
    pub records_parsed: usize,
}

/// Applies graph-file lines in order, each independently: a bad line is
/// reported and skipped. The graph version is bumped once if anything changed.
pub fn ingest_lines(g: &mut KnowledgeGraph, text: &str) -> IngestReport {
    let mut report = IngestReport::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let record = match parse_record(line) {
            Ok(r) => r,
            Err(message) => {
                report.errors.push(LineError { line: line_no, message });
                continue;
            }
        };
        report.records_parsed += 1;
        let is_node = matches!(record, Record::Node { .. });
        match apply(g, record) {
            Ok(true) if is_node => report.nodes_added += 1,
            Ok(true) => report.edges_added += 1,
            Ok(false) => {}
            Err(e) => report.errors.push(LineError { line: line_no, message: e.to_string() }),
        }
    }
    if report.nodes_added + report.edges_added > 0 {
        g.bump_version();
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tax() -> IndicatorTaxonomy {
        IndicatorTaxonomy::default()
    }

    fn round_trip(g: &KnowledgeGraph) -> KnowledgeGraph {
        let mut buf = Vec::new();
        save(g, &mut buf).unwrap();
        load(buf.as_slice(), tax()).unwrap()
    }

    fn assert_same(a: &KnowledgeGraph, b: &KnowledgeGraph) {
        assert_eq!(a.nodes().collect::<Vec<_>>(), b.nodes().collect::<Vec<_>>());
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn empty_round_trip() {
        let g = KnowledgeGraph::new(tax());
        let back = round_trip(&g);
        assert_eq!(back.node_count(), 0);
        assert_eq!(back.edge_count(), 0);
    }

    #[test]
    fn small_graph_round_trip() {
        let mut g = KnowledgeGraph::new(tax());
        g.add_node(Node::person("p1", "A")).unwrap();
        g.add_node(Node::person("p2", "B")).unwrap();
        for (i, c) in ["C1", "C2", "C3"].iter().enumerate() {
            g.add_node(Node::indicator(format!("i{i}"), c)).unwrap();
        }
        let d = Day::from_ymd(2015, 3, 5).unwrap();
        g.add_edge(Edge::new("p1", "i0", EdgeKind::HasIndicator).at(d)).unwrap();
        g.add_edge(Edge::new("p1", "i1", EdgeKind::HasIndicator)).unwrap();
        g.add_edge(Edge::new("p2", "i2", EdgeKind::HasIndicator).at(d)).unwrap();
        g.add_edge(Edge::new("p2", "i2", EdgeKind::HasIndicator).at(Day(d.0 + 7))).unwrap();
        g.add_edge(Edge::new("p1", "p2", EdgeKind::Knows)).unwrap();
        let back = round_trip(&g);
        assert_same(&g, &back);
        assert_eq!(back.version(), 10);
    }

    #[test]
    fn exact_wire_format() {
        let mut g = KnowledgeGraph::new(tax());
        g.add_node(Node::person("p1", "A")).unwrap();
        g.add_node(Node::indicator("i1", "C1")).unwrap();
        g.add_edge(Edge::new("p1", "i1", EdgeKind::HasIndicator).at(Day::from_ymd(2015, 3, 5).unwrap())).unwrap();
        g.add_node(Node::person("p2", "B")).unwrap();
        g.add_edge(Edge::new("p1", "p2", EdgeKind::Knows)).unwrap();
        let mut buf = Vec::new();
        save(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            concat!(
                r#"{"t":"node","id":"i1","kind":"Indicator","attrs":{"category":"C1"}}"#,
                "\n",
                r#"{"t":"node","id":"p1","kind":"Person","attrs":{"name":"A"}}"#,
                "\n",
                r#"{"t":"node","id":"p2","kind":"Person","attrs":{"name":"B"}}"#,
                "\n",
                r#"{"t":"edge","src":"p1","dst":"i1","kind":"HAS_INDICATOR","ts":"2015-03-05"}"#,
                "\n",
                r#"{"t":"edge","src":"p1","dst":"p2","kind":"KNOWS","ts":null}"#,
                "\n",
            )
        );
    }

    #[test]
    fn unknown_kind_is_malformed() {
        let text = "{\"t\":\"node\",\"id\":\"p1\",\"kind\":\"Person\",\"attrs\":{\"name\":\"A\"}}\n{\"t\":\"node\",\"id\":\"x\",\"kind\":\"Planet\",\"attrs\":{}}\n";
        match load(text.as_bytes(), tax()) {
            Err(PersistError::MalformedRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn integrity_violation_reports_line() {
        let text = "\n{\"t\":\"edge\",\"src\":\"a\",\"dst\":\"b\",\"kind\":\"KNOWS\",\"ts\":null}\n";
        match load(text.as_bytes(), tax()) {
            Err(PersistError::IntegrityViolation { line, source: GraphError::DanglingEndpoint(_) }) => {
                assert_eq!(line, 2)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ingest_counts_and_line_errors() {
        let mut g = KnowledgeGraph::new(tax());
        let body = concat!(
            r#"{"t":"node","id":"p1","kind":"Person","attrs":{"name":"A"}}"#,
            "\n",
            r#"{"t":"node","id":"p2","kind":"Person","attrs":{"name":"B"}}"#,
            "\n",
            r#"{"t":"edge","src":"p1","dst":"p2","kind":"KNOWS"}"#,
            "\n",
        );
        let r = ingest_lines(&mut g, body);
        assert_eq!((r.nodes_added, r.edges_added, r.errors.len()), (2, 1, 0));
        assert_eq!(g.version(), 1);

        let r = ingest_lines(&mut g, "{\"t\":\"node\",\"id\":\"p3\",\"kind\":\"Person\",\"attrs\":{\"name\":\"C\"}}\nnot json\n{\"t\":\"edge\",\"src\":\"p1\",\"dst\":\"p3\",\"kind\":\"KNOWS\"}");
        assert_eq!((r.nodes_added, r.edges_added), (1, 1));
        assert_eq!(r.errors, vec![LineError { line: 2, message: r.errors[0].message.clone() }]);
        assert_eq!(g.version(), 2);

        let r = ingest_lines(&mut g, "");
        assert_eq!(r, IngestReport::default());
        assert_eq!(g.version(), 2);
    }
}
