use std::collections::{BTreeSet, HashMap};

use super::{coverage, Gate, MatchError, MatchResult, RequirementMatch, Subject};
use crate::day::Day;
use crate::dsl::{MatchMode, QueryGraph};
use crate::graph::{EdgeKind, KnowledgeGraph, Node, NodeId, NodeKind};

/// A person's indicator holdings and gate status, precomputed once per query.
#[derive(Debug, Clone, Default)]
pub(crate) struct Profile {
    /// Category → earliest dated `HAS_INDICATOR` edge (None when all undated).
    pub categories: HashMap<String, Option<Day>>,
    pub failed_gates: Vec<Gate>,
}

impl Profile {
    pub fn passes(&self) -> bool {
        self.failed_gates.is_empty()
    }
}

fn names_match(node: &Node, wanted: &str) -> bool {
    node.display_name() == wanted || node.id.as_str() == wanted
}

fn linked_to(g: &KnowledgeGraph, person: &str, kind: EdgeKind, wanted: &str) -> bool {
    g.outgoing(person).filter(|e| e.kind == kind).filter_map(|e| g.node(e.dst.as_str())).any(|n| names_match(n, wanted))
}

fn earliest(a: Option<Day>, b: Option<Day>) -> Option<Day> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) | (None, x) => x,
    }
}

pub(crate) fn profile(g: &KnowledgeGraph, q: &QueryGraph, person: &str) -> Profile {
    let mut p = Profile::default();
    for e in g.outgoing(person).filter(|e| e.kind == EdgeKind::HasIndicator) {
        if let Some(c) = g.node(e.dst.as_str()).and_then(Node::category) {
            let slot = p.categories.entry(c.to_string()).or_insert(None);
            *slot = earliest(*slot, e.timestamp);
        }
    }
    if let Some(country) = &q.country_filter {
        if !linked_to(g, person, EdgeKind::LocatedIn, country) {
            p.failed_gates.push(Gate::Country);
        }
    }
    if let Some(org) = &q.org_filter {
        if !linked_to(g, person, EdgeKind::AffiliatedWith, org) {
            p.failed_gates.push(Gate::Organization);
        }
    }
    p
}

pub(crate) fn require_person<'g>(g: &'g KnowledgeGraph, id: &str) -> Result<&'g Node, MatchError> {
    let node = g.node(id).ok_or_else(|| MatchError::UnknownNode(id.into()))?;
    if node.kind != NodeKind::Person {
        return Err(MatchError::NotAPerson(node.id.clone()));
    }
    Ok(node)
}

/// Scores a group whose members (ascending id order) have the given profiles.
pub(crate) fn group_result<'a>(
    q: &QueryGraph,
    subject: Subject,
    members: impl Iterator<Item = (&'a NodeId, &'a Profile)> + Clone,
    failed_gates: Vec<Gate>,
) -> MatchResult {
    let breakdown: Vec<RequirementMatch> = q
        .requirements
        .iter()
        .map(|r| {
            let hit = members.clone().find_map(|(id, p)| p.categories.get(&r.category).map(|ts| (id, *ts)));
            RequirementMatch {
                category: r.category.clone(),
                weight: r.weight,
                matched: hit.is_some(),
                matched_by: hit.map(|(id, _)| id.clone()),
                timestamp: hit.and_then(|(_, ts)| ts),
            }
        })
        .collect();
    let score = if failed_gates.is_empty() { coverage(breakdown.iter().map(|m| (m.weight, m.matched))) } else { 0.0 };
    MatchResult { subject, score, breakdown, failed_gates }
}

pub(crate) fn individual_from_profile(q: &QueryGraph, id: &NodeId, p: &Profile) -> MatchResult {
    let subject = Subject::Individual { person: id.clone() };
    group_result(q, subject, std::iter::once((id, p)), p.failed_gates.clone())
}

pub(crate) fn radius_of(q: &QueryGraph) -> u32 {
    match q.mode {
        MatchMode::Neighborhood { radius } => radius,
        MatchMode::Individual => 1,
    }
}

pub(crate) fn neighborhood_from<'a>(
    g: &KnowledgeGraph,
    q: &QueryGraph,
    seed: &NodeId,
    mut profile_of: impl FnMut(&NodeId) -> &'a Profile,
) -> MatchResult {
    let seed_profile = profile_of(seed);
    if !seed_profile.passes() {
        let subject = Subject::Neighborhood { seed: seed.clone(), members: BTreeSet::from([seed.clone()]) };
        let gates = seed_profile.failed_gates.clone();
        return group_result(q, subject, std::iter::once((seed, seed_profile)), gates);
    }
    let mut members =
        g.neighbors(seed.as_str(), EdgeKind::Knows, radius_of(q)).expect("seed exists and radius is positive");
    members.insert(seed.clone());
    let profiled: Vec<(&NodeId, &Profile)> =
        members.iter().map(|id| (id, profile_of(id))).filter(|(_, p)| p.passes()).collect();
    let kept: BTreeSet<NodeId> = profiled.iter().map(|(id, _)| (*id).clone()).collect();
    let subject = Subject::Neighborhood { seed: seed.clone(), members: kept };
    group_result(q, subject, profiled.iter().copied(), Vec::new())
}

pub fn individual_similarity(g: &KnowledgeGraph, q: &QueryGraph, person: &str) -> Result<MatchResult, MatchError> {
    let node = require_person(g, person)?;
    Ok(individual_from_profile(q, &node.id, &profile(g, q, person)))
}

pub fn neighborhood_similarity(g: &KnowledgeGraph, q: &QueryGraph, seed: &str) -> Result<MatchResult, MatchError> {
    let seed = &require_person(g, seed)?.id;
    let mut cache: HashMap<NodeId, Profile> = HashMap::new();
    // profiles are built up front so the closure can hand out shared borrows
    let mut ids: Vec<NodeId> =
        g.neighbors(seed.as_str(), EdgeKind::Knows, radius_of(q)).expect("seed exists").into_iter().collect();
    ids.push(seed.clone());
    for id in ids {
        let p = profile(g, q, id.as_str());
        cache.insert(id, p);
    }
    Ok(neighborhood_from(g, q, seed, |id| &cache[id]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::IndicatorRequirement;
    use crate::graph::Edge;
    use crate::taxonomy::IndicatorTaxonomy;

    fn four_query() -> QueryGraph {
        QueryGraph::new("q", ["C1", "C2", "C3", "C4"].map(IndicatorRequirement::new).to_vec())
    }

    fn graph_with(holdings: &[(&str, &[&str])]) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new(IndicatorTaxonomy::default());
        for c in IndicatorTaxonomy::default().categories() {
            g.add_node(Node::indicator(format!("ind-{c}"), c)).unwrap();
        }
        g.add_node(Node::country("ctry", "A")).unwrap();
        g.add_node(Node::organization("org", "B")).unwrap();
        for (p, cats) in holdings {
            g.add_node(Node::person(*p, p)).unwrap();
            g.add_edge(Edge::new(*p, "ctry", EdgeKind::LocatedIn)).unwrap();
            g.add_edge(Edge::new(*p, "org", EdgeKind::AffiliatedWith)).unwrap();
            for c in *cats {
                g.add_edge(Edge::new(*p, format!("ind-{c}"), EdgeKind::HasIndicator)).unwrap();
            }
        }
        g
    }

    #[test]
    fn full_none_and_partial_coverage() {
        let g = graph_with(&[("all", &["C1", "C2", "C3", "C4"]), ("none", &[]), ("three", &["C1", "C2", "C4"])]);
        let mut q = four_query();
        q.country_filter = Some("A".into());
        q.org_filter = Some("B".into());
        assert_eq!(individual_similarity(&g, &q, "all").unwrap().score, 1.0);
        assert_eq!(individual_similarity(&g, &q, "none").unwrap().score, 0.0);
        let three = individual_similarity(&g, &q, "three").unwrap();
        assert_eq!(three.score, 0.75);
        assert!(three.score >= 0.7);
        assert_eq!(three.derived_score(), three.score);
        assert!(!three.breakdown[2].matched);
        assert_eq!(three.breakdown[3].matched_by.as_ref().map(NodeId::as_str), Some("three"));
    }

    #[test]
    fn failed_gate_zeroes_score_but_keeps_breakdown() {
        let g = graph_with(&[("all", &["C1", "C2", "C3", "C4"])]);
        let mut q = four_query();
        q.country_filter = Some("Elsewhere".into());
        let r = individual_similarity(&g, &q, "all").unwrap();
        assert_eq!(r.score, 0.0);
        assert_eq!(r.failed_gates, vec![Gate::Country]);
        assert!(r.breakdown.iter().all(|m| m.matched));
    }

    #[test]
    fn gates_match_on_id_or_name() {
        let g = graph_with(&[("p", &["C1"])]);
        let mut q = four_query();
        q.country_filter = Some("ctry".into());
        q.org_filter = Some("B".into());
        assert!(individual_similarity(&g, &q, "p").unwrap().failed_gates.is_empty());
    }

    #[test]
    fn weighted_ratio() {
        let g = graph_with(&[("p", &["C1"])]);
        let q = QueryGraph::new(
            "q",
            vec![IndicatorRequirement::weighted("C1", 3.0), IndicatorRequirement::weighted("C2", 1.0)],
        );
        assert_eq!(individual_similarity(&g, &q, "p").unwrap().score, 0.75);
    }

    #[test]
    fn earliest_dated_timestamp_reported() {
        let mut g = graph_with(&[("p", &[])]);
        let (d1, d2) = (Day::from_ymd(2014, 1, 1).unwrap(), Day::from_ymd(2012, 6, 1).unwrap());
        g.add_edge(Edge::new("p", "ind-C1", EdgeKind::HasIndicator).at(d1)).unwrap();
        g.add_edge(Edge::new("p", "ind-C1", EdgeKind::HasIndicator)).unwrap();
        g.add_edge(Edge::new("p", "ind-C1", EdgeKind::HasIndicator).at(d2)).unwrap();
        let r = individual_similarity(&g, &four_query(), "p").unwrap();
        assert_eq!(r.breakdown[0].timestamp, Some(d2));
    }

    #[test]
    fn not_a_person() {
        let g = graph_with(&[]);
        assert_eq!(individual_similarity(&g, &four_query(), "org"), Err(MatchError::NotAPerson("org".into())));
        assert_eq!(individual_similarity(&g, &four_query(), "zz"), Err(MatchError::UnknownNode("zz".into())));
        assert!(matches!(neighborhood_similarity(&g, &four_query(), "ctry"), Err(MatchError::NotAPerson(_))));
    }

    #[test]
    fn group_coverage() {
        let mut g = graph_with(&[("p1", &["C1", "C2"]), ("p2", &["C3", "C4"])]);
        g.add_edge(Edge::new("p1", "p2", EdgeKind::Knows)).unwrap();
        let mut q = four_query();
        q.mode = MatchMode::Neighborhood { radius: 1 };
        let r = neighborhood_similarity(&g, &q, "p1").unwrap();
        assert_eq!(r.score, 1.0);
        assert_eq!(r.subject.members().len(), 2);
        assert_eq!(r.breakdown[2].matched_by.as_ref().map(NodeId::as_str), Some("p2"));
    }

    #[test]
    fn matched_by_is_least_member() {
        let mut g = graph_with(&[("b", &["C1"]), ("a", &["C1"])]);
        g.add_edge(Edge::new("b", "a", EdgeKind::Knows)).unwrap();
        let mut q = four_query();
        q.mode = MatchMode::Neighborhood { radius: 1 };
        let r = neighborhood_similarity(&g, &q, "b").unwrap();
        assert_eq!(r.breakdown[0].matched_by.as_ref().map(NodeId::as_str), Some("a"));
    }

    #[test]
    fn singleton_neighborhood_equals_individual() {
        let g = graph_with(&[("p", &["C1", "C3"])]);
        let mut q = four_query();
        q.mode = MatchMode::Neighborhood { radius: 2 };
        let n = neighborhood_similarity(&g, &q, "p").unwrap();
        let i = individual_similarity(&g, &q, "p").unwrap();
        assert_eq!(n.score, i.score);
        assert_eq!(n.breakdown, i.breakdown);
    }

    #[test]
    fn seed_failing_gate_scores_zero() {
        let mut g = graph_with(&[("p1", &["C1", "C2", "C3", "C4"])]);
        g.add_node(Node::country("other", "Z")).unwrap();
        g.add_node(Node::person("p0", "p0")).unwrap();
        g.add_edge(Edge::new("p0", "other", EdgeKind::LocatedIn)).unwrap();
        g.add_edge(Edge::new("p0", "p1", EdgeKind::Knows)).unwrap();
        let mut q = four_query();
        q.country_filter = Some("A".into());
        q.mode = MatchMode::Neighborhood { radius: 1 };
        let r = neighborhood_similarity(&g, &q, "p0").unwrap();
        assert_eq!(r.score, 0.0);
        assert_eq!(r.failed_gates, vec![Gate::Country]);
        // p1 passes and reaches p0, but p0 is gated out of p1's group
        let r = neighborhood_similarity(&g, &q, "p1").unwrap();
        assert_eq!(r.score, 1.0);
        assert_eq!(r.subject.members(), BTreeSet::from(["p1".into()]));
    }
}
