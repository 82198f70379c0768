use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::trajectory::Trajectory;
use super::SynthError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryFidelity {
    pub category: String,
    pub real_presence: f64,
    pub synthetic_presence: f64,
    /// Two-sample KS statistic on first-occurrence dates; `None` when
    /// either side has no occurrence of the category.
    pub ks: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub categories: Vec<CategoryFidelity>,
    /// Mean over categories of `|real_presence − synthetic_presence|`.
    pub presence_l1: f64,
    /// Total-variation distance between trajectory-length histograms.
    pub length_tv: f64,
}

impl FidelityReport {
    pub fn max_ks(&self) -> Option<f64> {
        self.categories.iter().filter_map(|c| c.ks).reduce(f64::max)
    }
}

/// Largest gap between the two empirical CDFs.
pub fn ks_statistic(a: &[i32], b: &[i32]) -> f64 {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort_unstable();
    b.sort_unstable();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] == t {
            i += 1;
        }
        while j < b.len() && b[j] == t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Compares datasets over `categories`, which fixes report order.
pub fn fidelity_report<'a>(
    real: &[Trajectory],
    synthetic: &[Trajectory],
    categories: impl IntoIterator<Item = &'a str>,
) -> Result<FidelityReport, SynthError> {
    if real.is_empty() || synthetic.is_empty() {
        return Err(SynthError::EmptyDataset);
    }
    let firsts =
        |data: &[Trajectory], c: &str| -> Vec<i32> { data.iter().filter_map(|h| h.first(c)).map(|d| d.0).collect() };
    let rows: Vec<CategoryFidelity> = categories
        .into_iter()
        .map(|c| {
            let (r, s) = (firsts(real, c), firsts(synthetic, c));
            CategoryFidelity {
                category: c.to_string(),
                real_presence: r.len() as f64 / real.len() as f64,
                synthetic_presence: s.len() as f64 / synthetic.len() as f64,
                ks: (!r.is_empty() && !s.is_empty()).then(|| ks_statistic(&r, &s)),
            }
        })
        .collect();
    let presence_l1 = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|c| (c.real_presence - c.synthetic_presence).abs()).sum::<f64>() / rows.len() as f64
    };
    let hist = |data: &[Trajectory]| {
        let mut h: BTreeMap<usize, f64> = BTreeMap::new();
        for t in data {
            *h.entry(t.len()).or_default() += 1.0 / data.len() as f64;
        }
        h
    };
    let (hr, hs) = (hist(real), hist(synthetic));
    let lengths: std::collections::BTreeSet<usize> = hr.keys().chain(hs.keys()).copied().collect();
    let length_tv =
        0.5 * lengths.iter().map(|l| (hr.get(l).unwrap_or(&0.0) - hs.get(l).unwrap_or(&0.0)).abs()).sum::<f64>();
    Ok(FidelityReport { categories: rows, presence_l1, length_tv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::day::Day;
    use crate::synth::Event;

    fn h(events: &[(i32, &str)]) -> Trajectory {
        Trajectory::anonymous(events.iter().map(|&(t, c)| Event::new(Day(t), c)).collect())
    }

    #[test]
    fn ks_known_values() {
        assert_eq!(ks_statistic(&[1, 2, 3], &[1, 2, 3]), 0.0);
        assert_eq!(ks_statistic(&[1, 2], &[3, 4]), 1.0);
        // F_a jumps to 0.5 at 1, F_b stays 0 until 2
        assert_eq!(ks_statistic(&[1, 3], &[2, 4]), 0.5);
    }

    #[test]
    fn identical_sets_have_zero_gaps() {
        let real = vec![h(&[(1, "C1"), (5, "C2")]), h(&[(3, "C1")]), h(&[])];
        let r = fidelity_report(&real, &real, ["C1", "C2", "C3"]).unwrap();
        assert_eq!(r.presence_l1, 0.0);
        assert_eq!(r.length_tv, 0.0);
        assert_eq!(r.max_ks(), Some(0.0));
        assert_eq!(r.categories[2].ks, None);
    }

    #[test]
    fn empty_synthetic_gap_is_mean_presence() {
        let real = vec![h(&[(1, "C1"), (5, "C2")]), h(&[(3, "C1")]), h(&[])];
        let empty = vec![h(&[]); 4];
        let r = fidelity_report(&real, &empty, ["C1", "C2", "C3"]).unwrap();
        let mean_presence = (2.0 / 3.0 + 1.0 / 3.0 + 0.0) / 3.0;
        assert!((r.presence_l1 - mean_presence).abs() < 1e-15);
        assert!((r.length_tv - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(fidelity_report(&real, &[], ["C1"]), Err(SynthError::EmptyDataset)));
    }
}
