//! Conditional min-entropy and leftover-hash extraction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hashing::affine::{draw_hash, encoding_width};

/// Reference measure `Q_Z` for the conditional min-entropy.
#[derive(Debug, Clone, PartialEq)]
pub enum Conditioning {
    Given(Vec<f64>),
    /// Maximize over `Q_Z`; the optimum is `Q_Z(z) ∝ max_x P_XZ(x,z)`.
    Optimize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinEntropyReport {
    pub value: f64,
    pub conditioning: String,
    pub q_z: Vec<f64>,
}

/// `H_min(P_XZ | Q_Z) = −log max_{x,z} P_XZ(x,z)/Q_Z(z)` for a table `joint[x][z]`.
pub fn min_entropy(joint: &[Vec<f64>], cond: &Conditioning) -> Result<MinEntropyReport> {
    let nz = joint.first().map(|r| r.len()).unwrap_or(0);
    if nz == 0 || joint.iter().any(|r| r.len() != nz) {
        return Err(Error::InvalidDistribution("joint table must be a non-empty rectangle".into()));
    }
    let col_max: Vec<f64> = (0..nz).map(|z| joint.iter().map(|r| r[z]).fold(0.0, f64::max)).collect();
    match cond {
        Conditioning::Given(q) => {
            if q.len() != nz {
                return Err(Error::InvalidDistribution(format!("Q_Z has {} entries, expected {nz}", q.len())));
            }
            let mut worst: f64 = 0.0;
            for z in 0..nz {
                if col_max[z] > 0.0 {
                    if q[z] <= 0.0 {
                        return Err(Error::SupportViolation);
                    }
                    worst = worst.max(col_max[z] / q[z]);
                }
            }
            Ok(MinEntropyReport { value: -worst.log2(), conditioning: "given".into(), q_z: q.clone() })
        }
        Conditioning::Optimize => {
            let total: f64 = col_max.iter().sum();
            let q = col_max.iter().map(|m| m / total).collect();
            Ok(MinEntropyReport { value: -total.log2(), conditioning: "optimized".into(), q_z: q })
        }
    }
}

/// `½·√(2^{k + log|V| − H_min})`, the leftover-hash distance bound.
pub fn leftover_bound(k: f64, log_v: f64, h_min: f64) -> f64 {
    0.5 * 2f64.powf((k + log_v - h_min) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extraction {
    pub keys: Vec<u64>,
    pub bound: f64,
}

/// Hashes each sample (symbol indices of a `universe`-sized alphabet) to a
/// `k`-bit key with one seeded draw from the affine family.
pub fn extract(samples: &[usize], universe: usize, k: usize, seed: u64, h_min: f64, log_v: f64) -> Result<Extraction> {
    if k == 0 || k > 64 {
        return Err(Error::ParameterRange(format!("key length {k} not in 1..=64")));
    }
    if let Some(bad) = samples.iter().find(|s| **s >= universe) {
        return Err(Error::OutOfRange(format!("sample {bad} outside a universe of {universe}")));
    }
    let f = draw_hash(encoding_width(universe), k, seed)?;
    Ok(Extraction {
        keys: samples.iter().map(|s| f.eval(*s as u64, k)).collect(),
        bound: leftover_bound(k as f64, log_v, h_min),
    })
}
