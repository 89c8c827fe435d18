//! Finite distributions over arbitrary ordered keys.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::probcore::source::MASS_TOLERANCE;

/// A finite distribution. Keys with zero mass may be present; they still
/// belong to the universe the distribution is defined on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteDistribution<K: Ord> {
    probs: BTreeMap<K, f64>,
}

impl<K: Ord + Clone> FiniteDistribution<K> {
    pub fn new<I: IntoIterator<Item = (K, f64)>>(entries: I) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (k, p) in entries {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!("negative mass {p}")));
            }
            *probs.entry(k).or_insert(0.0) += p;
        }
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("total mass {total} is not 1")));
        }
        Ok(Self { probs })
    }

    /// Builds a distribution from counts; fails on an empty sample.
    pub fn from_counts<I: IntoIterator<Item = (K, u64)>>(counts: I) -> Result<Self> {
        let counts: Vec<(K, u64)> = counts.into_iter().collect();
        let total: u64 = counts.iter().map(|(_, c)| c).sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("no samples".into()));
        }
        Self::new(counts.into_iter().map(|(k, c)| (k, c as f64 / total as f64)))
    }

    pub fn prob(&self, key: &K) -> f64 {
        self.probs.get(key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.probs.iter().map(|(k, p)| (k, *p))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn same_universe(&self, other: &Self) -> bool {
        self.probs.len() == other.probs.len() && self.probs.keys().zip(other.probs.keys()).all(|(a, b)| a == b)
    }

    /// Extends the universe with `keys`, giving new keys zero mass.
    pub fn extended<'a, I: IntoIterator<Item = &'a K>>(&self, keys: I) -> Self
    where
        K: 'a,
    {
        let mut probs = self.probs.clone();
        for k in keys {
            probs.entry(k.clone()).or_insert(0.0);
        }
        Self { probs }
    }

    /// Image distribution under `f`.
    pub fn map<L: Ord + Clone, F: Fn(&K) -> L>(&self, f: F) -> FiniteDistribution<L> {
        let mut probs = BTreeMap::new();
        for (k, p) in &self.probs {
            *probs.entry(f(k)).or_insert(0.0) += p;
        }
        FiniteDistribution { probs }
    }
}

/// Total variation distance `½ Σ |p − q|` on a common universe.
pub fn tv_distance<K: Ord + Clone>(p: &FiniteDistribution<K>, q: &FiniteDistribution<K>) -> Result<f64> {
    if !p.same_universe(q) {
        return Err(Error::MismatchedSupport);
    }
    let sum: f64 = p.probs.values().zip(q.probs.values()).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

/// Total variation distance after padding both distributions to the union of
/// their universes.
pub fn tv_distance_aligned<K: Ord + Clone>(p: &FiniteDistribution<K>, q: &FiniteDistribution<K>) -> f64 {
    let pa = p.extended(q.probs.keys());
    let qa = q.extended(p.probs.keys());
    tv_distance(&pa, &qa).expect("aligned universes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_of_bernoullis() {
        let p = FiniteDistribution::new([(0, 0.5), (1, 0.5)]).unwrap();
        let q = FiniteDistribution::new([(0, 0.75), (1, 0.25)]).unwrap();
        assert!((tv_distance(&p, &q).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mismatched_universe_rejected() {
        let p = FiniteDistribution::new([(0, 1.0)]).unwrap();
        let q = FiniteDistribution::new([(1, 1.0)]).unwrap();
        assert!(matches!(tv_distance(&p, &q), Err(Error::MismatchedSupport)));
        assert_eq!(tv_distance_aligned(&p, &q), 1.0);
    }
}
