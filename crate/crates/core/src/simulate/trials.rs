//! Seeded Monte Carlo runs of a simulation protocol.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::simulate::channel::SimOutcome;
use crate::simulate::coins::RngCoins;
use crate::simulate::protocols::Simulation;

/// Runs `trials` independent trials; trial `t` uses stream `t` of `seed`, so
/// the result does not depend on the thread count.
pub fn run_trials(sim: &dyn Simulation, trials: u64, seed: u64) -> Vec<SimOutcome> {
    (0..trials)
        .into_par_iter()
        .map(|t| sim.run(&mut RngCoins::new(seed, t)))
        .collect()
}

/// Aggregate statistics of a batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSummary {
    pub trials: u64,
    pub mean_bits: f64,
    pub max_bits: usize,
    /// Number of trials per total bit count.
    pub bit_histogram: BTreeMap<usize, u64>,
    /// Number of trials per declared error cause.
    pub errors: BTreeMap<String, u64>,
    /// Trials where both parties output the same transcript.
    pub agreements: u64,
    pub error_rate: f64,
    pub disagreement_rate: f64,
}

impl TrialSummary {
    pub fn from_outcomes(outcomes: &[SimOutcome]) -> Self {
        let mut bit_histogram = BTreeMap::new();
        let mut errors = BTreeMap::new();
        let mut agreements = 0;
        let mut total_bits = 0usize;
        let mut declared = 0u64;
        for o in outcomes {
            *bit_histogram.entry(o.bits).or_insert(0) += 1;
            total_bits += o.bits;
            if let Some(e) = o.error {
                *errors.entry(e.as_str().to_string()).or_insert(0) += 1;
                declared += 1;
            }
            if o.agrees() {
                agreements += 1;
            }
        }
        let n = outcomes.len() as u64;
        let denom = n.max(1) as f64;
        Self {
            trials: n,
            mean_bits: total_bits as f64 / denom,
            max_bits: outcomes.iter().map(|o| o.bits).max().unwrap_or(0),
            bit_histogram,
            errors,
            agreements,
            error_rate: declared as f64 / denom,
            disagreement_rate: (n - agreements) as f64 / denom,
        }
    }
}
