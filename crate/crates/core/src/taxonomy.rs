use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Number of indicator categories in the default configuration.
pub const DEFAULT_CATEGORY_COUNT: usize = 15;

#[derive(Debug, thiserror::Error)]
pub enum TaxonomyError {
    #[error("taxonomy has no categories")]
    Empty,
    #[error("duplicate category {0:?}")]
    Duplicate(String),
    #[error("empty category name at position {0}")]
    EmptyName(usize),
    #[error("parent mapping refers to unknown category {0:?}")]
    UnknownParentKey(String),
    #[error("reading taxonomy: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing taxonomy: {0}")]
    Json(#[from] serde_json::Error),
}

/// The ordered set of indicator categories the system is configured with.
///
/// Category order is significant: classifiers emit one probability per category
/// in this order and feature vectors lay categories out in this order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTaxonomy", into = "RawTaxonomy")]
pub struct IndicatorTaxonomy {
    categories: Vec<String>,
    parents: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct RawTaxonomy {
    categories: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    parents: BTreeMap<String, String>,
}

impl TryFrom<RawTaxonomy> for IndicatorTaxonomy {
    type Error = TaxonomyError;

    fn try_from(raw: RawTaxonomy) -> Result<Self, Self::Error> {
        IndicatorTaxonomy::with_parents(raw.categories, raw.parents)
    }
}

impl From<IndicatorTaxonomy> for RawTaxonomy {
    fn from(t: IndicatorTaxonomy) -> Self {
        RawTaxonomy { categories: t.categories, parents: t.parents }
    }
}

impl IndicatorTaxonomy {
    pub fn new<I, S>(categories: I) -> Result<Self, TaxonomyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_parents(categories.into_iter().map(Into::into).collect(), BTreeMap::new())
    }

    pub fn with_parents(categories: Vec<String>, parents: BTreeMap<String, String>) -> Result<Self, TaxonomyError> {
        if categories.is_empty() {
            return Err(TaxonomyError::Empty);
        }
        let mut seen = HashSet::new();
        for (i, c) in categories.iter().enumerate() {
            if c.is_empty() {
                return Err(TaxonomyError::EmptyName(i));
            }
            if !seen.insert(c.as_str()) {
                return Err(TaxonomyError::Duplicate(c.clone()));
            }
        }
        if let Some(k) = parents.keys().find(|k| !seen.contains(k.as_str())) {
            return Err(TaxonomyError::UnknownParentKey(k.clone()));
        }
        Ok(IndicatorTaxonomy { categories, parents })
    }

    /// Placeholder names `C1`..`C15`.
    pub fn default_placeholder() -> Self {
        Self::new((1..=DEFAULT_CATEGORY_COUNT).map(|i| format!("C{i}"))).expect("placeholder taxonomy is valid")
    }

    pub fn load(path: &Path) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn contains(&self, category: &str) -> bool {
        self.index_of(category).is_some()
    }

    pub fn index_of(&self, category: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == category)
    }

    pub fn parent(&self, category: &str) -> Option<&str> {
        self.parents.get(category).map(String::as_str)
    }
}

impl Default for IndicatorTaxonomy {
    fn default() -> Self {
        Self::default_placeholder()
    }
}
