use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::taxonomy::IndicatorTaxonomy;

/// Most labels a coded snippet may carry.
pub const MAX_LABELS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSnippet {
    pub text: String,
    pub labels: BTreeSet<String>,
}

impl LabeledSnippet {
    pub fn new<I, S>(text: impl Into<String>, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        LabeledSnippet { text: text.into(), labels: labels.into_iter().map(Into::into).collect() }
    }
}

/// One line of a corpus file. `feedback` carries review provenance for
/// records appended through the feedback loop and is ignored by training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub text: String,
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<serde_json::Value>,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("snippet {index}: has no labels")]
    NoLabels { index: usize },
    #[error("snippet {index}: {count} labels, at most {MAX_LABELS} allowed")]
    TooManyLabels { index: usize, count: usize },
    #[error("snippet {index}: label {label:?} is not in the taxonomy")]
    UnknownLabel { index: usize, label: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn load_corpus<R: BufRead>(source: R) -> Result<Vec<LabeledSnippet>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::Malformed { line: i + 1, message: e.to_string() })?;
        out.push(LabeledSnippet::new(record.text, record.labels));
    }
    Ok(out)
}

/// Checks label counts and membership. `allow_over_cap` lifts the
/// [`MAX_LABELS`] limit for corpora coded under a different protocol.
pub fn validate_corpus(
    corpus: &[LabeledSnippet],
    taxonomy: &IndicatorTaxonomy,
    allow_over_cap: bool,
) -> Result<(), CorpusError> {
    for (index, s) in corpus.iter().enumerate() {
        if s.labels.is_empty() {
            return Err(CorpusError::NoLabels { index });
        }
        if !allow_over_cap && s.labels.len() > MAX_LABELS {
            return Err(CorpusError::TooManyLabels { index, count: s.labels.len() });
        }
        if let Some(label) = s.labels.iter().find(|l| !taxonomy.contains(l)) {
            return Err(CorpusError::UnknownLabel { index, label: label.clone() });
        }
    }
    Ok(())
}

/// Appends one record to a corpus file, creating it if needed.
pub fn append_record(path: &Path, record: &CorpusRecord) -> std::io::Result<()> {
    let mut line = serde_json::to_vec(record).map_err(std::io::Error::other)?;
    line.push(b'\n');
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(&line)?;
    f.sync_data()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_lines_and_ignores_provenance() {
        let text = "{\"text\":\"a b\",\"labels\":[\"C1\"]}\n\n{\"text\":\"c\",\"labels\":[\"C2\",\"C1\"],\"feedback\":{\"note\":\"x\"}}\n";
        let c = load_corpus(text.as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].labels, BTreeSet::from(["C1".to_string(), "C2".to_string()]));
    }

    #[test]
    fn malformed_line_number() {
        let err = load_corpus("{\"text\":\"a\",\"labels\":[]}\n{oops".as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 2, .. }));
    }

    #[test]
    fn label_cap_with_bypass() {
        let tax = IndicatorTaxonomy::default();
        let c = vec![LabeledSnippet::new("x", ["C1", "C2", "C3", "C4"])];
        assert!(matches!(validate_corpus(&c, &tax, false), Err(CorpusError::TooManyLabels { count: 4, .. })));
        assert!(validate_corpus(&c, &tax, true).is_ok());
        let c = vec![LabeledSnippet::new("x", ["Nope"])];
        assert!(matches!(validate_corpus(&c, &tax, false), Err(CorpusError::UnknownLabel { .. })));
        let c = vec![LabeledSnippet::new("x", Vec::<String>::new())];
        assert!(matches!(validate_corpus(&c, &tax, false), Err(CorpusError::NoLabels { index: 0 })));
    }

    #[test]
    fn append_creates_and_extends() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let r = CorpusRecord { text: "t".into(), labels: vec!["C1".into()], feedback: None };
        append_record(&path, &r).unwrap();
        append_record(&path, &r).unwrap();
        let c = load_corpus(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
        assert_eq!(c.len(), 2);
    }
}
