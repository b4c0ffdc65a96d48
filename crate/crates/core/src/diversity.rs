//! Hill numbers (diversity of order k), Shannon entropy and richness.
//!
//! For relative abundances `p_n` the diversity of order `k` is
//! `(Σ p_n^k)^(1/(1-k))`. Order 0 is the richness, order 1 is the limit
//! `exp(H)` with `H` the Shannon entropy in nats, order 2 is the inverse
//! Simpson concentration.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orders closer than this to 1 use `exp(H)` instead of the power formula.
pub const SHANNON_EPSILON: f64 = 1e-9;

/// A multiset of class labels.
///
/// Zero counts are never stored, so the number of entries is the richness.
/// Labels are kept sorted, which makes iteration and serialization stable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyDistribution {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl FrequencyDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a distribution from `(label, count)` pairs. Duplicate labels
    /// are merged and zero counts dropped; a negative count is rejected.
    pub fn from_counts<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, i64)>,
        S: Into<String>,
    {
        let mut dist = Self::new();
        for (label, count) in pairs {
            let label = label.into();
            if count < 0 {
                return Err(Error::Validation(format!(
                    "negative count {count} for class {label:?}"
                )));
            }
            dist.add_n(label, count as u64);
        }
        Ok(dist)
    }

    /// One occurrence per item.
    pub fn from_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut dist = Self::new();
        for label in labels {
            dist.add(label);
        }
        dist
    }

    pub fn add<S: Into<String>>(&mut self, label: S) {
        self.add_n(label, 1);
    }

    pub fn add_n<S: Into<String>>(&mut self, label: S, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(label.into()).or_insert(0) += count;
        self.total += count;
    }

    pub fn merge(&mut self, other: &FrequencyDistribution) {
        for (label, &count) in &other.counts {
            self.add_n(label.clone(), count);
        }
    }

    pub fn get(&self, label: &str) -> u64 {
        self.counts.get(label).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Number of distinct classes.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn counts(&self) -> impl Iterator<Item = u64> + Clone + '_ {
        self.counts.values().copied()
    }

    /// Relative abundances in label order.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total as f64;
        self.counts().map(|c| c as f64 / total).collect()
    }
}

impl<S: Into<String>> FromIterator<S> for FrequencyDistribution {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self::from_labels(iter)
    }
}

/// The order `k ≥ 0` of a Hill number.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DiversityOrder(f64);

impl DiversityOrder {
    pub const RICHNESS: DiversityOrder = DiversityOrder(0.0);
    pub const SHANNON: DiversityOrder = DiversityOrder(1.0);
    pub const SIMPSON: DiversityOrder = DiversityOrder(2.0);

    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::Validation(format!(
                "diversity order must be finite and non-negative, got {k}"
            )));
        }
        Ok(DiversityOrder(k))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_shannon(self) -> bool {
        (self.0 - 1.0).abs() < SHANNON_EPSILON
    }
}

impl Default for DiversityOrder {
    fn default() -> Self {
        Self::SHANNON
    }
}

impl TryFrom<f64> for DiversityOrder {
    type Error = Error;

    fn try_from(k: f64) -> Result<Self> {
        Self::new(k)
    }
}

impl From<DiversityOrder> for f64 {
    fn from(order: DiversityOrder) -> f64 {
        order.0
    }
}

impl fmt::Display for DiversityOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn richness(dist: &FrequencyDistribution) -> usize {
    dist.len()
}

/// Shannon entropy in nats.
pub fn shannon_entropy(dist: &FrequencyDistribution) -> Result<f64> {
    non_empty(dist)?;
    Ok(entropy_of_counts(dist.counts(), dist.total()))
}

pub fn hill_diversity(dist: &FrequencyDistribution, order: DiversityOrder) -> Result<f64> {
    non_empty(dist)?;
    Ok(hill_of_counts(dist.counts(), dist.total(), order))
}

/// Diversity divided by richness; the evenness of usage of the observed classes.
pub fn diversity_richness_ratio(dist: &FrequencyDistribution, order: DiversityOrder) -> Result<f64> {
    let d = hill_diversity(dist, order)?;
    Ok(d / richness(dist) as f64)
}

fn non_empty(dist: &FrequencyDistribution) -> Result<()> {
    if dist.is_empty() {
        return Err(Error::Domain("empty frequency distribution".into()));
    }
    Ok(())
}

pub(crate) fn entropy_of_counts(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    let total = total as f64;
    let h: f64 = counts
        .map(|c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    // A single class gives -1·ln(1) = -0.0.
    h.max(0.0)
}

/// Hill number from raw positive counts. The caller guarantees at least
/// one count and `total == Σ counts`.
pub(crate) fn hill_of_counts<I>(counts: I, total: u64, order: DiversityOrder) -> f64
where
    I: Iterator<Item = u64> + Clone,
{
    let n_classes = counts.clone().count() as f64;
    let k = order.value();
    let d = if k == 0.0 {
        n_classes
    } else if order.is_shannon() {
        entropy_of_counts(counts, total).exp()
    } else {
        let total = total as f64;
        let sum: f64 = counts.map(|c| (c as f64 / total).powf(k)).sum();
        (sum.ln() / (1.0 - k)).exp()
    };
    // Rounding can push uniform cases a few ulps outside [1, R].
    d.clamp(1.0, n_classes)
}
