use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::corpus::LabeledSnippet;
use super::preprocess::preprocess;
use crate::taxonomy::IndicatorTaxonomy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams { learning_rate: 4.0, epochs: 300, l2: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrainError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("no terms survive preprocessing; vocabulary is empty")]
    EmptyVocabulary,
    #[error("label {0:?} is not in the taxonomy")]
    UnknownLabel(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
}

/// One-vs-rest logistic models over TF-IDF features, one per taxonomy category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorModel {
    pub categories: Vec<String>,
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    /// `weights[c][t]`: weight of term `t` for category `c`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub seed: u64,
    pub hyperparams: Hyperparams,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

type SparseVec = Vec<(usize, f64)>;

impl IndicatorModel {
    fn rebuild_index(&mut self) {
        self.index = self.vocabulary.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    }

    /// Restores the term index after deserialization.
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        let mut m: IndicatorModel = serde_json::from_str(text)?;
        m.rebuild_index();
        Ok(m)
    }

    /// L2-normalized TF-IDF vector; out-of-vocabulary terms are ignored.
    fn features(&self, text: &str) -> SparseVec {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for term in preprocess(text) {
            if let Some(&i) = self.index.get(&term) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
        let mut v: SparseVec = counts.into_iter().map(|(i, tf)| (i, tf * self.idf[i])).collect();
        let norm = v.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|(_, x)| *x /= norm);
        }
        v
    }

    fn logit(&self, category: usize, x: &SparseVec) -> f64 {
        let w = &self.weights[category];
        self.biases[category] + x.iter().map(|&(i, v)| w[i] * v).sum::<f64>()
    }

    /// Probability per category in taxonomy order.
    pub fn probabilities(&self, text: &str) -> Vec<f64> {
        let x = self.features(text);
        (0..self.categories.len()).map(|c| sigmoid(self.logit(c, &x))).collect()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Trains one logistic model per category by full-batch gradient descent on
/// mean cross-entropy plus `l2/2 · ‖w‖²`, starting from zero weights.
///
/// Full-batch updates make the result independent of snippet order; `seed`
/// is recorded with the model for provenance.
pub fn train(
    corpus: &[LabeledSnippet],
    taxonomy: &IndicatorTaxonomy,
    hyperparams: Hyperparams,
    seed: u64,
) -> Result<IndicatorModel, TrainError> {
    if corpus.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let Hyperparams { learning_rate, l2, epochs } = hyperparams;
    if !(learning_rate.is_finite() && learning_rate > 0.0 && l2.is_finite() && l2 >= 0.0) {
        return Err(TrainError::InvalidHyperparams(format!("learning rate {learning_rate}, l2 {l2}")));
    }
    if let Some(bad) = corpus.iter().flat_map(|s| &s.labels).find(|l| !taxonomy.contains(l)) {
        return Err(TrainError::UnknownLabel(bad.clone()));
    }

    let docs: Vec<Vec<String>> = corpus.iter().map(|s| preprocess(&s.text)).collect();
    let vocabulary: Vec<String> = docs.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if vocabulary.is_empty() {
        return Err(TrainError::EmptyVocabulary);
    }
    let n = corpus.len() as f64;
    let mut df = vec![0usize; vocabulary.len()];
    let index: HashMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    for doc in &docs {
        for t in doc.iter().map(|t| index[t.as_str()]).collect::<BTreeSet<_>>() {
            df[t] += 1;
        }
    }
    // unsmoothed idf keeps the features invariant to duplicating the corpus
    let idf: Vec<f64> = df.iter().map(|&d| (n / d as f64).ln() + 1.0).collect();

    let categories = taxonomy.categories().to_vec();
    let mut model = IndicatorModel {
        weights: vec![vec![0.0; vocabulary.len()]; categories.len()],
        biases: vec![0.0; categories.len()],
        categories,
        vocabulary,
        idf,
        seed,
        hyperparams,
        index: HashMap::new(),
    };
    model.rebuild_index();

    let features: Vec<SparseVec> = corpus.iter().map(|s| model.features(&s.text)).collect();
    let targets: Vec<Vec<f64>> = corpus
        .iter()
        .map(|s| model.categories.iter().map(|c| if s.labels.contains(c) { 1.0 } else { 0.0 }).collect())
        .collect();

    let dim = model.vocabulary.len();
    let mut grad = vec![0.0; dim];
    for _ in 0..epochs {
        for c in 0..model.categories.len() {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            for (x, y) in features.iter().zip(&targets) {
                let err = sigmoid(model.logit(c, x)) - y[c];
                grad_b += err;
                for &(i, v) in x {
                    grad[i] += err * v;
                }
            }
            let w = &mut model.weights[c];
            for (wi, gi) in w.iter_mut().zip(&grad) {
                *wi -= learning_rate * (gi / n + l2 * *wi);
            }
            model.biases[c] -= learning_rate * grad_b / n;
        }
    }
    Ok(model)
}

/// Category → probability for every taxonomy category the model was trained with.
pub fn predict(model: &IndicatorModel, text: &str) -> BTreeMap<String, f64> {
    model.categories.iter().cloned().zip(model.probabilities(text)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn travel_taxonomy() -> IndicatorTaxonomy {
        IndicatorTaxonomy::new(["Travel", "Other"]).unwrap()
    }

    fn travel_corpus() -> Vec<LabeledSnippet> {
        let mut c = Vec::new();
        for t in
            ["he planned hijra abroad", "hijra to the region", "talked about hijra often", "prepared hijra documents"]
        {
            c.push(LabeledSnippet::new(t, ["Travel"]));
        }
        for t in ["bought groceries downtown", "attended school classes", "watched videos online", "met family members"]
        {
            c.push(LabeledSnippet::new(t, ["Other"]));
        }
        c
    }

    #[test]
    fn separable_toy() {
        let m = train(&travel_corpus(), &travel_taxonomy(), Hyperparams::default(), 1).unwrap();
        let p = predict(&m, "planned hijra");
        assert!(p["Travel"] > 0.5, "{p:?}");
        assert!(p["Travel"] > p["Other"]);
        assert!(predict(&m, "bought groceries")["Travel"] < 0.5);
    }

    #[test]
    fn duplicated_corpus_predicts_the_same() {
        let c = travel_corpus();
        let doubled: Vec<_> = c.iter().chain(&c).cloned().collect();
        let a = train(&c, &travel_taxonomy(), Hyperparams::default(), 1).unwrap();
        let b = train(&doubled, &travel_taxonomy(), Hyperparams::default(), 1).unwrap();
        for text in ["planned hijra", "bought groceries", "unknown words entirely", "hijra groceries school"] {
            let (pa, pb) = (a.probabilities(text), b.probabilities(text));
            for (x, y) in pa.iter().zip(&pb) {
                assert!((x - y).abs() < 1e-9, "{text}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn zero_epochs_is_uninformative() {
        let hp = Hyperparams { epochs: 0, ..Hyperparams::default() };
        let m = train(&travel_corpus(), &travel_taxonomy(), hp, 1).unwrap();
        assert!(m.weights.iter().flatten().all(|&w| w == 0.0));
        assert!(predict(&m, "planned hijra").values().all(|&p| p == 0.5));
    }

    #[test]
    fn out_of_vocabulary_gives_bias_only() {
        let m = train(&travel_corpus(), &travel_taxonomy(), Hyperparams::default(), 1).unwrap();
        let p = m.probabilities("zzz qqq");
        for (c, &pc) in p.iter().enumerate() {
            assert_eq!(pc, sigmoid(m.biases[c]));
        }
    }

    #[test]
    fn all_categories_reported() {
        let tax = IndicatorTaxonomy::default();
        let corpus = vec![LabeledSnippet::new("training camp", ["C3"]), LabeledSnippet::new("travel abroad", ["C1"])];
        let m = train(&corpus, &tax, Hyperparams::default(), 0).unwrap();
        let p = predict(&m, "camp");
        assert_eq!(p.len(), 15);
        assert!(p.values().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn errors() {
        let tax = travel_taxonomy();
        assert_eq!(train(&[], &tax, Hyperparams::default(), 0), Err(TrainError::EmptyCorpus));
        let stop_only = vec![LabeledSnippet::new("the and of", ["Travel"])];
        assert_eq!(train(&stop_only, &tax, Hyperparams::default(), 0), Err(TrainError::EmptyVocabulary));
        let unknown = vec![LabeledSnippet::new("x", ["Nope"])];
        assert!(matches!(train(&unknown, &tax, Hyperparams::default(), 0), Err(TrainError::UnknownLabel(_))));
    }

    #[test]
    fn serialization_round_trip_predicts_identically() {
        let m = train(&travel_corpus(), &travel_taxonomy(), Hyperparams::default(), 3).unwrap();
        let back = IndicatorModel::from_json(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back.probabilities("planned hijra"), m.probabilities("planned hijra"));
    }
}
