//! Inexact matching of query graphs against a knowledge network.
//!
//! A person's similarity to a query is the weighted fraction of required
//! indicator categories they hold:
//!
//! ```text
//! S(p, q) = Σ_r w_r · m(p, r) / Σ_r w_r
//! ```
//!
//! where `m(p, r)` is 1 when `p` has at least one `HAS_INDICATOR` edge to an
//! indicator of `r`'s category. Country and organization filters are hard
//! gates: failing one forces the score to 0. Neighborhood similarity applies
//! the same rule to a seed person plus everyone within `radius` `KNOWS` hops,
//! counting a requirement as met when any gated member meets it.

mod format;
mod oracle;
mod rank;
mod score;

pub use format::{write_lines, write_table};
pub use oracle::{brute_force_oracle, brute_force_oracle_with_cap, DEFAULT_ORACLE_CAP};
pub use rank::{rank, rank_with_threshold};
pub use score::{individual_similarity, neighborhood_similarity};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::day::Day;
use crate::dsl::QueryGraph;
use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatchError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("{0} is not a person")]
    NotAPerson(NodeId),
    #[error("graph has {persons} persons, above the oracle cap of {cap}")]
    GraphTooLarge { persons: usize, cap: usize },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Subject {
    Individual { person: NodeId },
    Neighborhood { seed: NodeId, members: BTreeSet<NodeId> },
}

impl Subject {
    /// The person the result is anchored on; the sort key for ranking.
    pub fn id(&self) -> &NodeId {
        match self {
            Subject::Individual { person } => person,
            Subject::Neighborhood { seed, .. } => seed,
        }
    }

    pub fn members(&self) -> BTreeSet<NodeId> {
        match self {
            Subject::Individual { person } => BTreeSet::from([person.clone()]),
            Subject::Neighborhood { members, .. } => members.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Country,
    Organization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementMatch {
    pub category: String,
    pub weight: f64,
    pub matched: bool,
    pub matched_by: Option<NodeId>,
    /// Earliest dated matching indicator edge of `matched_by`.
    pub timestamp: Option<Day>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub subject: Subject,
    pub score: f64,
    pub breakdown: Vec<RequirementMatch>,
    /// Context gates the subject failed; non-empty forces the score to 0.
    pub failed_gates: Vec<Gate>,
}

impl MatchResult {
    /// Recomputes the score from the breakdown and gate record.
    pub fn derived_score(&self) -> f64 {
        if !self.failed_gates.is_empty() {
            return 0.0;
        }
        coverage(self.breakdown.iter().map(|m| (m.weight, m.matched)))
    }
}

/// `Σ w·m / Σ w`, summed in requirement order.
pub(crate) fn coverage(items: impl Iterator<Item = (f64, bool)>) -> f64 {
    let (mut hit, mut total) = (0.0, 0.0);
    for (w, m) in items {
        total += w;
        if m {
            hit += w;
        }
    }
    if total > 0.0 {
        hit / total
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedResults {
    pub query: QueryGraph,
    pub graph_version: u64,
    /// Sorted by score descending, then subject id ascending.
    pub entries: Vec<MatchResult>,
}

impl RankedResults {
    /// Entries scoring at least `threshold`. Because entries are sorted this
    /// is always a prefix.
    pub fn filtered(&self, threshold: f64) -> RankedResults {
        let keep = self.entries.iter().take_while(|e| e.score >= threshold).count();
        RankedResults {
            query: self.query.clone(),
            graph_version: self.graph_version,
            entries: self.entries[..keep].to_vec(),
        }
    }
}

pub(crate) fn result_order(a: &MatchResult, b: &MatchResult) -> std::cmp::Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.subject.id().cmp(b.subject.id()))
}
