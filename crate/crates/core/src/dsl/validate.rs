use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::ast::QueryGraph;
use crate::taxonomy::IndicatorTaxonomy;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "warning", content = "category")]
pub enum Warning {
    UnknownCategory(String),
    DuplicateCategory(String),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::UnknownCategory(c) => write!(f, "category {c:?} is not in the taxonomy"),
            Warning::DuplicateCategory(c) => write!(f, "category {c:?} is required more than once"),
        }
    }
}

/// Non-fatal checks of a parsed query against the configured taxonomy.
pub fn validate(q: &QueryGraph, taxonomy: &IndicatorTaxonomy) -> Vec<Warning> {
    let mut seen = HashSet::new();
    let mut warnings = Vec::new();
    for r in &q.requirements {
        if !seen.insert(r.category.as_str()) {
            // report each duplicated category once
            let w = Warning::DuplicateCategory(r.category.clone());
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        } else if !taxonomy.contains(&r.category) {
            warnings.push(Warning::UnknownCategory(r.category.clone()));
        }
    }
    warnings
}
