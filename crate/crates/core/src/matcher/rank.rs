use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use super::score::{individual_from_profile, neighborhood_from, profile, Profile};
use super::{result_order, MatchError, MatchResult, RankedResults};
use crate::dsl::{MatchMode, QueryGraph};
use crate::graph::{KnowledgeGraph, NodeId};

/// Scores every person (or every person's neighborhood) and keeps those at or
/// above the query threshold.
pub fn rank(g: &KnowledgeGraph, q: &QueryGraph) -> Result<RankedResults, MatchError> {
    rank_with_threshold(g, q, q.threshold)
}

/// [`rank`] with an explicit threshold in place of the query's own.
///
/// Neighborhood results are deduplicated in rank order: a group whose member
/// set is contained in an already kept group is dropped. Dedup only looks at
/// higher-ranked entries, so filtering a threshold-0 ranking at `t` gives the
/// same list as ranking at `t` directly.
pub fn rank_with_threshold(g: &KnowledgeGraph, q: &QueryGraph, threshold: f64) -> Result<RankedResults, MatchError> {
    q.check().map_err(MatchError::InvalidQuery)?;
    let persons: Vec<&NodeId> = g.persons().map(|n| &n.id).collect();
    let profiles: HashMap<&NodeId, Profile> = persons.par_iter().map(|id| (*id, profile(g, q, id.as_str()))).collect();

    let mut entries: Vec<MatchResult> = match q.mode {
        MatchMode::Individual => persons
            .par_iter()
            .map(|id| individual_from_profile(q, id, &profiles[id]))
            .filter(|r| r.score >= threshold)
            .collect(),
        MatchMode::Neighborhood { .. } => persons
            .par_iter()
            .map(|id| neighborhood_from(g, q, id, |m| &profiles[m]))
            .filter(|r| r.score >= threshold)
            .collect(),
    };
    entries.sort_by(result_order);
    if let MatchMode::Neighborhood { .. } = q.mode {
        entries = drop_subsumed(entries);
    }
    Ok(RankedResults { query: q.clone(), graph_version: g.version(), entries })
}

fn drop_subsumed(sorted: Vec<MatchResult>) -> Vec<MatchResult> {
    let mut kept_sets: Vec<BTreeSet<NodeId>> = Vec::new();
    let mut kept = Vec::new();
    for r in sorted {
        let members = r.subject.members();
        if kept_sets.iter().any(|k| members.is_subset(k)) {
            continue;
        }
        kept_sets.push(members);
        kept.push(r);
    }
    kept
}
