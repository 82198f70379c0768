use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::trajectory::{Event, Trajectory};
use super::SynthError;
use crate::day::Day;
use crate::taxonomy::IndicatorTaxonomy;

/// Empirical CDF of one category's event dates.
///
/// `support[i] = (t_i, F(t_i))` with strictly increasing `t_i` and
/// nondecreasing `F`; the last fraction is 1. Empty support marks a category
/// with no events in the fitted dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCdf {
    pub category: String,
    pub support: Vec<(i32, f64)>,
}

impl CategoryCdf {
    fn fit(category: &str, mut days: Vec<i32>) -> Self {
        days.sort_unstable();
        let n = days.len() as f64;
        let mut support: Vec<(i32, f64)> = Vec::new();
        for (i, &d) in days.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match support.last_mut() {
                Some(last) if last.0 == d => last.1 = f,
                _ => support.push((d, f)),
            }
        }
        CategoryCdf { category: category.to_string(), support }
    }

    pub fn usable(&self) -> bool {
        !self.support.is_empty()
    }

    pub fn min(&self) -> Option<Day> {
        self.support.first().map(|&(t, _)| Day(t))
    }

    pub fn max(&self) -> Option<Day> {
        self.support.last().map(|&(t, _)| Day(t))
    }

    /// Step CDF: fraction of fitted dates `<= t`.
    pub fn cdf(&self, t: Day) -> f64 {
        let k = self.support.partition_point(|&(s, _)| s <= t.0);
        if k == 0 {
            0.0
        } else {
            self.support[k - 1].1
        }
    }

    /// Piecewise-linear inverse through the support points, clamped to
    /// `[min, max]` and rounded to the nearest day.
    pub fn inverse(&self, u: f64) -> Option<Day> {
        let (first, last) = (self.support.first()?, self.support.last()?);
        // NaN lands on the first support point
        if u.is_nan() || u <= first.1 {
            return Some(Day(first.0));
        }
        if u >= last.1 {
            return Some(Day(last.0));
        }
        let k = self.support.partition_point(|&(_, f)| f < u);
        let (t1, f1) = self.support[k];
        let (t0, f0) = self.support[k - 1];
        let x = t0 as f64 + (u - f0) / (f1 - f0) * (t1 - t0) as f64;
        Some(Day(x.round() as i32))
    }

    /// Widest gap between consecutive support dates, in days.
    pub fn max_gap(&self) -> i32 {
        self.support.windows(2).map(|w| w[1].0 - w[0].0).max().unwrap_or(0)
    }
}

/// Per-category CDFs in taxonomy order; maps trajectories to
/// `[presence, time]` pairs and back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapper {
    pub cdfs: Vec<CategoryCdf>,
}

pub const PRESENCE_THRESHOLD: f64 = 0.5;

pub fn fit_mapper(dataset: &[Trajectory], tax: &IndicatorTaxonomy) -> Result<FeatureMapper, SynthError> {
    if dataset.is_empty() {
        return Err(SynthError::EmptyDataset);
    }
    let mut days: BTreeMap<&str, Vec<i32>> = tax.categories().iter().map(|c| (c.as_str(), Vec::new())).collect();
    for e in dataset.iter().flat_map(|h| &h.events) {
        match days.get_mut(e.c.as_str()) {
            Some(v) => v.push(e.t.0),
            None => return Err(SynthError::UnknownCategory(e.c.clone())),
        }
    }
    let cdfs = tax.categories().iter().map(|c| CategoryCdf::fit(c, days.remove(c.as_str()).unwrap())).collect();
    Ok(FeatureMapper { cdfs })
}

impl FeatureMapper {
    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.cdfs.iter().map(|c| c.category.as_str())
    }

    pub fn dim(&self) -> usize {
        2 * self.cdfs.len()
    }

    pub fn cdf(&self, category: &str) -> Option<&CategoryCdf> {
        self.cdfs.iter().find(|c| c.category == category)
    }

    pub fn encode(&self, h: &Trajectory) -> Result<Vec<f64>, SynthError> {
        let mut v = vec![0.0; self.dim()];
        for e in &h.events {
            let i = self
                .cdfs
                .iter()
                .position(|c| c.category == e.c)
                .ok_or_else(|| SynthError::UnknownCategory(e.c.clone()))?;
            let cdf = &self.cdfs[i];
            // events are sorted, so the first hit per category is the earliest
            if v[2 * i] == 0.0 && cdf.usable() {
                v[2 * i] = 1.0;
                v[2 * i + 1] = cdf.cdf(e.t);
            }
        }
        Ok(v)
    }

    pub fn decode(&self, v: &[f64]) -> Result<Trajectory, SynthError> {
        if v.len() != self.dim() {
            return Err(SynthError::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        let events = self
            .cdfs
            .iter()
            .enumerate()
            .filter(|&(i, _)| v[2 * i] >= PRESENCE_THRESHOLD)
            .filter_map(|(i, cdf)| Some(Event::new(cdf.inverse(v[2 * i + 1].clamp(0.0, 1.0))?, cdf.category.as_str())))
            .collect();
        Ok(Trajectory::anonymous(events))
    }
}

pub fn encode_features(m: &FeatureMapper, h: &Trajectory) -> Result<Vec<f64>, SynthError> {
    m.encode(h)
}

pub fn decode_features(m: &FeatureMapper, v: &[f64]) -> Result<Trajectory, SynthError> {
    m.decode(v)
}
