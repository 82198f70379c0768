use serde::{Deserialize, Serialize};

pub const DEFAULT_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRequirement {
    pub category: String,
    pub weight: f64,
}

impl IndicatorRequirement {
    pub fn new(category: impl Into<String>) -> Self {
        IndicatorRequirement { category: category.into(), weight: 1.0 }
    }

    pub fn weighted(category: impl Into<String>, weight: f64) -> Self {
        IndicatorRequirement { category: category.into(), weight }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatchMode {
    #[default]
    Individual,
    Neighborhood {
        radius: u32,
    },
}

/// A parsed analyst query: weighted indicator requirements plus optional
/// country / organization gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryGraph {
    pub name: String,
    pub requirements: Vec<IndicatorRequirement>,
    pub country_filter: Option<String>,
    pub org_filter: Option<String>,
    pub threshold: f64,
    pub mode: MatchMode,
}

impl QueryGraph {
    pub fn new(name: impl Into<String>, requirements: Vec<IndicatorRequirement>) -> Self {
        QueryGraph {
            name: name.into(),
            requirements,
            country_filter: None,
            org_filter: None,
            threshold: DEFAULT_THRESHOLD,
            mode: MatchMode::Individual,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.requirements.iter().map(|r| r.weight).sum()
    }

    /// Checks the structural invariants the parser enforces. Useful for
    /// queries built in code rather than parsed.
    pub fn check(&self) -> Result<(), String> {
        if self.requirements.is_empty() {
            return Err("query has no indicator requirements".into());
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(format!("threshold {} outside [0, 1]", self.threshold));
        }
        for r in &self.requirements {
            if r.category.is_empty() {
                return Err("empty indicator category".into());
            }
            if !(r.weight.is_finite() && r.weight > 0.0) {
                return Err(format!("weight {} for {:?} is not a positive number", r.weight, r.category));
            }
        }
        if let MatchMode::Neighborhood { radius: 0 } = self.mode {
            return Err("radius must be at least 1".into());
        }
        Ok(())
    }
}
