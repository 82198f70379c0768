use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::corpus::LabeledSnippet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StratifyError {
    #[error("k must be at least 2, got {0}")]
    KTooSmall(usize),
    #[error("k = {k} exceeds corpus size {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    /// Fold of each snippet, indexed like the corpus.
    pub assignment: Vec<usize>,
}

impl FoldAssignment {
    pub fn fold_members(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    /// Positive count of `label` in each fold.
    pub fn label_counts(&self, corpus: &[LabeledSnippet], label: &str) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for (s, &f) in corpus.iter().zip(&self.assignment) {
            if s.labels.contains(label) {
                counts[f] += 1;
            }
        }
        counts
    }
}

/// Iterative stratification for multi-label data.
///
/// Repeatedly takes the label with the fewest unassigned positives and
/// distributes those snippets, each to the fold that most lacks that label
/// (ties: fewest snippets overall, then lowest fold index). A snippet placed
/// counts toward every one of its labels. `seed` fixes the order in which a
/// label's snippets are visited.
///
/// Greedy placement alone can overshoot a label whose positives were mostly
/// placed while distributing rarer co-occurring labels, so a repair pass then
/// swaps snippets between folds while that strictly reduces the total excess
/// over the `|count - total/k| <= 1` band.
pub fn stratified_kfold(corpus: &[LabeledSnippet], k: usize, seed: u64) -> Result<FoldAssignment, StratifyError> {
    if corpus.is_empty() {
        return Err(StratifyError::EmptyCorpus);
    }
    if k < 2 {
        return Err(StratifyError::KTooSmall(k));
    }
    if k > corpus.len() {
        return Err(StratifyError::KTooLarge { k, n: corpus.len() });
    }

    let label_index: BTreeMap<&str, usize> = corpus
        .iter()
        .flat_map(|s| s.labels.iter().map(String::as_str))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    let labels_of: Vec<Vec<usize>> =
        corpus.iter().map(|s| s.labels.iter().map(|l| label_index[l.as_str()]).collect()).collect();
    let n_labels = label_index.len();

    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut state = Placement {
        fold_of: vec![None; corpus.len()],
        per_label: vec![vec![0usize; n_labels]; k],
        per_fold: vec![0usize; k],
        remaining: vec![0usize; n_labels],
    };
    for ls in &labels_of {
        for &l in ls {
            state.remaining[l] += 1;
        }
    }

    while let Some(label) = (0..n_labels).filter(|&l| state.remaining[l] > 0).min_by_key(|&l| (state.remaining[l], l)) {
        for &s in &order {
            if state.fold_of[s].is_some() || !labels_of[s].contains(&label) {
                continue;
            }
            // greatest remaining demand for the label is the fold holding the fewest of it
            let fold = (0..k).min_by_key(|&f| (state.per_label[f][label], state.per_fold[f], f)).expect("k >= 2");
            state.place(s, fold, &labels_of[s]);
        }
    }
    // snippets without labels go to the smallest folds
    for &s in &order {
        if state.fold_of[s].is_none() {
            let fold = (0..k).min_by_key(|&f| (state.per_fold[f], f)).expect("k >= 2");
            state.place(s, fold, &labels_of[s]);
        }
    }

    let mut assignment: Vec<usize> = state.fold_of.into_iter().map(|f| f.expect("every snippet placed")).collect();
    rebalance(&mut assignment, &labels_of, n_labels, k);
    Ok(FoldAssignment { k, assignment })
}

/// Amount by which `count` leaves the band `|count·k − total| ≤ k`, scaled by k.
fn excess(count: usize, total: usize, k: usize) -> usize {
    if total < k {
        return 0;
    }
    (count * k).abs_diff(total).saturating_sub(k)
}

fn rebalance(assignment: &mut [usize], labels_of: &[Vec<usize>], n_labels: usize, k: usize) {
    let mut counts = vec![vec![0usize; n_labels]; k];
    let mut totals = vec![0usize; n_labels];
    for (s, ls) in labels_of.iter().enumerate() {
        for &l in ls {
            counts[assignment[s]][l] += 1;
            totals[l] += 1;
        }
    }
    let n = assignment.len();

    // change in total excess if snippet a (fold fa) and b (fold fb) trade places
    let swap_delta = |counts: &Vec<Vec<usize>>, a: usize, b: usize, fa: usize, fb: usize| -> i64 {
        let mut delta = 0i64;
        let mut touched: Vec<usize> = labels_of[a].iter().chain(&labels_of[b]).copied().collect();
        touched.sort_unstable();
        touched.dedup();
        for l in touched {
            let moved = i64::from(labels_of[a].contains(&l)) - i64::from(labels_of[b].contains(&l));
            if moved == 0 {
                continue;
            }
            let (ca, cb) = (counts[fa][l] as i64, counts[fb][l] as i64);
            let before = excess(ca as usize, totals[l], k) + excess(cb as usize, totals[l], k);
            let after = excess((ca - moved) as usize, totals[l], k) + excess((cb + moved) as usize, totals[l], k);
            delta += after as i64 - before as i64;
        }
        delta
    };

    loop {
        let balanced = (0..n_labels).all(|l| (0..k).all(|f| excess(counts[f][l], totals[l], k) == 0));
        if balanced {
            return;
        }
        let mut best: Option<(i64, usize, usize)> = None;
        'search: for a in 0..n {
            for b in a + 1..n {
                let (fa, fb) = (assignment[a], assignment[b]);
                if fa == fb || labels_of[a] == labels_of[b] {
                    continue;
                }
                let d = swap_delta(&counts, a, b, fa, fb);
                if d < 0 && best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                    if d <= -(2 * k as i64) {
                        break 'search;
                    }
                }
            }
        }
        let Some((_, a, b)) = best else { return };
        let (fa, fb) = (assignment[a], assignment[b]);
        for &l in &labels_of[a] {
            counts[fa][l] -= 1;
            counts[fb][l] += 1;
        }
        for &l in &labels_of[b] {
            counts[fb][l] -= 1;
            counts[fa][l] += 1;
        }
        assignment[a] = fb;
        assignment[b] = fa;
    }
}

struct Placement {
    fold_of: Vec<Option<usize>>,
    per_label: Vec<Vec<usize>>,
    per_fold: Vec<usize>,
    remaining: Vec<usize>,
}

impl Placement {
    fn place(&mut self, snippet: usize, fold: usize, labels: &[usize]) {
        self.fold_of[snippet] = Some(fold);
        self.per_fold[fold] += 1;
        for &l in labels {
            self.per_label[fold][l] += 1;
            self.remaining[l] -= 1;
        }
    }
}
