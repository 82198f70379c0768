mod common;

use inspect_core::nlp::{stratified_kfold, LabeledSnippet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn fold_invariant_on_many_random_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..300u64 {
        let n = 20 + (trial as usize * 7) % 400;
        let labels = 2 + (trial as usize % 14);
        let corpus = common::random_corpus(&mut rng, n, labels);
        for k in [5, 10] {
            let folds = stratified_kfold(&corpus, k, trial).unwrap();
            if let Err(e) = common::folds_balanced(&corpus, &folds) {
                panic!("trial {trial}, n {n}, k {k}: {e}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_snippet_gets_one_fold(
        raw in prop::collection::vec(prop::collection::btree_set(0usize..6, 1..=3), 10..120),
        k in 2usize..10,
        seed in any::<u64>(),
    ) {
        let corpus: Vec<LabeledSnippet> = raw
            .iter()
            .enumerate()
            .map(|(i, ls)| LabeledSnippet::new(format!("s{i}"), ls.iter().map(|l| format!("L{l}"))))
            .collect();
        let folds = stratified_kfold(&corpus, k, seed).unwrap();
        prop_assert_eq!(folds.assignment.len(), corpus.len());
        prop_assert!(folds.assignment.iter().all(|&f| f < k));
        prop_assert!(common::folds_balanced(&corpus, &folds).is_ok());
        prop_assert_eq!(&folds, &stratified_kfold(&corpus, k, seed).unwrap());
    }
}
