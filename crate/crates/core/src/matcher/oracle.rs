//! Exhaustive evaluation of the similarity definitions, used to check [`rank`](super::rank).
//!
//! Deliberately avoids the graph's adjacency indexes and the matcher's
//! per-person profiles: every membership test is a scan over the full edge
//! list.

use std::collections::BTreeSet;

use super::{Gate, MatchError, MatchResult, RankedResults, RequirementMatch, Subject};
use crate::day::Day;
use crate::dsl::{MatchMode, QueryGraph};
use crate::graph::{Edge, EdgeKind, KnowledgeGraph, NodeId, NodeKind};

pub const DEFAULT_ORACLE_CAP: usize = 200;

pub fn brute_force_oracle(g: &KnowledgeGraph, q: &QueryGraph) -> Result<RankedResults, MatchError> {
    brute_force_oracle_with_cap(g, q, DEFAULT_ORACLE_CAP)
}

pub fn brute_force_oracle_with_cap(
    g: &KnowledgeGraph,
    q: &QueryGraph,
    cap: usize,
) -> Result<RankedResults, MatchError> {
    q.check().map_err(MatchError::InvalidQuery)?;
    let persons: Vec<NodeId> = g.nodes().filter(|n| n.kind == NodeKind::Person).map(|n| n.id.clone()).collect();
    if persons.len() > cap {
        return Err(MatchError::GraphTooLarge { persons: persons.len(), cap });
    }

    let mut scored = Vec::new();
    for p in &persons {
        let r = match q.mode {
            MatchMode::Individual => evaluate_group(g, q, p, BTreeSet::from([p.clone()]), false),
            MatchMode::Neighborhood { radius } => {
                let gates = failed_gates(g, q, p);
                if gates.is_empty() {
                    let members: BTreeSet<NodeId> =
                        within_radius(g, p, radius).into_iter().filter(|m| failed_gates(g, q, m).is_empty()).collect();
                    evaluate_group(g, q, p, members, true)
                } else {
                    evaluate_group(g, q, p, BTreeSet::from([p.clone()]), true)
                }
            }
        };
        if r.score >= q.threshold {
            scored.push(r);
        }
    }

    // selection sort by (score desc, id asc), independent of the matcher's comparator
    let mut ordered = Vec::with_capacity(scored.len());
    while !scored.is_empty() {
        let mut best = 0;
        for i in 1..scored.len() {
            let (a, b) = (&scored[i], &scored[best]);
            if a.score > b.score || (a.score == b.score && a.subject.id() < b.subject.id()) {
                best = i;
            }
        }
        ordered.push(scored.remove(best));
    }

    let entries = if matches!(q.mode, MatchMode::Neighborhood { .. }) {
        let mut kept: Vec<MatchResult> = Vec::new();
        for r in ordered {
            let mine = r.subject.members();
            let subsumed = kept.iter().any(|k| {
                let theirs = k.subject.members();
                mine.iter().all(|m| theirs.contains(m))
            });
            if !subsumed {
                kept.push(r);
            }
        }
        kept
    } else {
        ordered
    };
    Ok(RankedResults { query: q.clone(), graph_version: g.version(), entries })
}

fn edges_from<'g>(g: &'g KnowledgeGraph, src: &'g NodeId, kind: EdgeKind) -> impl Iterator<Item = &'g Edge> {
    g.edges().iter().filter(move |e| e.kind == kind && &e.src == src)
}

fn failed_gates(g: &KnowledgeGraph, q: &QueryGraph, p: &NodeId) -> Vec<Gate> {
    let has_link = |kind: EdgeKind, wanted: &str| {
        edges_from(g, p, kind).any(|e| {
            let n = g.node(e.dst.as_str()).expect("edge endpoint exists");
            n.id.as_str() == wanted || n.attr("name").unwrap_or(n.id.as_str()) == wanted
        })
    };
    let mut out = Vec::new();
    if q.country_filter.as_deref().is_some_and(|c| !has_link(EdgeKind::LocatedIn, c)) {
        out.push(Gate::Country);
    }
    if q.org_filter.as_deref().is_some_and(|o| !has_link(EdgeKind::AffiliatedWith, o)) {
        out.push(Gate::Organization);
    }
    out
}

/// The seed plus every person within `radius` undirected KNOWS hops.
fn within_radius(g: &KnowledgeGraph, seed: &NodeId, radius: u32) -> BTreeSet<NodeId> {
    let mut reached = BTreeSet::from([seed.clone()]);
    let mut frontier = reached.clone();
    for _ in 0..radius {
        let mut next = BTreeSet::new();
        for e in g.edges().iter().filter(|e| e.kind == EdgeKind::Knows) {
            if frontier.contains(&e.src) && !reached.contains(&e.dst) {
                next.insert(e.dst.clone());
            }
            if frontier.contains(&e.dst) && !reached.contains(&e.src) {
                next.insert(e.src.clone());
            }
        }
        reached.extend(next.iter().cloned());
        frontier = next;
    }
    reached
}

/// Earliest dated indicator edge of `category` held by `p`, if any such edge exists.
fn holds(g: &KnowledgeGraph, p: &NodeId, category: &str) -> Option<Option<Day>> {
    let mut found = false;
    let mut earliest: Option<Day> = None;
    for e in edges_from(g, p, EdgeKind::HasIndicator) {
        if g.node(e.dst.as_str()).and_then(|n| n.attr("category")) == Some(category) {
            found = true;
            if let Some(t) = e.timestamp {
                earliest = Some(earliest.map_or(t, |x| x.min(t)));
            }
        }
    }
    found.then_some(earliest)
}

fn evaluate_group(
    g: &KnowledgeGraph,
    q: &QueryGraph,
    seed: &NodeId,
    members: BTreeSet<NodeId>,
    as_group: bool,
) -> MatchResult {
    let gates = failed_gates(g, q, seed);
    let mut breakdown = Vec::new();
    let (mut numerator, mut denominator) = (0.0, 0.0);
    for r in &q.requirements {
        let hit = members.iter().find_map(|m| holds(g, m, &r.category).map(|ts| (m.clone(), ts)));
        denominator += r.weight;
        if hit.is_some() {
            numerator += r.weight;
        }
        breakdown.push(RequirementMatch {
            category: r.category.clone(),
            weight: r.weight,
            matched: hit.is_some(),
            timestamp: hit.as_ref().and_then(|(_, ts)| *ts),
            matched_by: hit.map(|(m, _)| m),
        });
    }
    let score = if gates.is_empty() { numerator / denominator } else { 0.0 };
    let subject = if as_group {
        Subject::Neighborhood { seed: seed.clone(), members }
    } else {
        Subject::Individual { person: seed.clone() }
    };
    MatchResult { subject, score, breakdown, failed_gates: gates }
}
