//! Exact and Monte Carlo measurement of simulation error and communication.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probcore::{tv_distance_aligned, FiniteDistribution};
use crate::protocol::ViewKey;
use crate::simulate::{enumerate_into, run_trials, SimOutcome, Simulation};

/// Default cap on the number of enumerated randomness paths.
pub const EXACT_LIMIT: u64 = 1 << 24;
/// Fewest trials accepted by the plug-in estimator.
pub const MIN_PLUGIN_TRIALS: u64 = 10_000;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Exact,
    Plugin,
}

impl EvalMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EvalMode::Exact => "exact",
            EvalMode::Plugin => "plugin",
        }
    }
}

/// A total-variation estimate between the simulated and the true view.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TVEstimate {
    pub value: f64,
    pub method: EvalMode,
    /// Bootstrap half-width (0 for exact).
    pub ci_halfwidth: f64,
    /// Trials for plug-in, enumerated paths for exact.
    pub samples: u64,
}

/// Exact law of `(Π_X, Π_Y, X, Y)` by enumerating every random choice.
pub fn exact_view_law(sim: &dyn Simulation, limit: u64) -> Result<FiniteDistribution<ViewKey>> {
    Ok(exact_view_law_counted(sim, limit)?.0)
}

fn exact_view_law_counted(sim: &dyn Simulation, limit: u64) -> Result<(FiniteDistribution<ViewKey>, u64)> {
    // millions of tiny path masses land on few keys; compensated sums keep
    // the per-key totals exact to a few ulps
    let mut law: BTreeMap<ViewKey, (f64, f64)> = BTreeMap::new();
    let n = enumerate_into(limit, |c| sim.run(c).view(), |k, p| {
        let e = law.entry(k).or_insert((0.0, 0.0));
        neumaier_add(e, p);
    })?;
    Ok((FiniteDistribution::new(law.into_iter().map(|(k, (s, c))| (k, s + c)))?, n))
}

fn neumaier_add(acc: &mut (f64, f64), v: f64) {
    let t = acc.0 + v;
    if acc.0.abs() >= v.abs() {
        acc.1 += (acc.0 - t) + v;
    } else {
        acc.1 += (v - t) + acc.0;
    }
    acc.0 = t;
}

/// Simulation error in the chosen mode.
pub fn measure_sim_error(sim: &dyn Simulation, mode: EvalMode, trials: u64, seed: u64) -> Result<TVEstimate> {
    match mode {
        EvalMode::Exact => {
            let (law, n) = exact_view_law_counted(sim, EXACT_LIMIT)?;
            Ok(TVEstimate {
                value: tv_distance_aligned(&law, &sim.target_view()),
                method: EvalMode::Exact,
                ci_halfwidth: 0.0,
                samples: n,
            })
        }
        EvalMode::Plugin => {
            if trials < MIN_PLUGIN_TRIALS {
                return Err(Error::InvalidConfig(format!("plug-in estimation needs at least {MIN_PLUGIN_TRIALS} trials")));
            }
            let outcomes = run_trials(sim, trials, seed);
            plugin_tv(&outcomes, &sim.target_view(), seed)
        }
    }
}

fn tv_from_counts(keys: &[ViewKey], counts: &[u64], total: u64, target: &FiniteDistribution<ViewKey>) -> f64 {
    let mut seen = 0.0;
    let mut acc = 0.0;
    for (k, c) in keys.iter().zip(counts) {
        let t = target.prob(k);
        seen += t;
        acc += (*c as f64 / total as f64 - t).abs();
    }
    // target mass on views never observed
    let unseen: f64 = target.iter().map(|(_, p)| p).sum::<f64>() - seen;
    0.5 * (acc + unseen.max(0.0))
}

/// Plug-in TV of the empirical view law against `target`, with a bootstrap
/// half-width `1.96·sd + |mean_boot − value|` over 1000 multinomial resamples.
pub fn plugin_tv(outcomes: &[SimOutcome], target: &FiniteDistribution<ViewKey>, seed: u64) -> Result<TVEstimate> {
    if outcomes.is_empty() {
        return Err(Error::InvalidConfig("no outcomes".into()));
    }
    let mut counts: BTreeMap<ViewKey, u64> = BTreeMap::new();
    for o in outcomes {
        *counts.entry(o.view()).or_insert(0) += 1;
    }
    let total = outcomes.len() as u64;
    let keys: Vec<ViewKey> = counts.keys().cloned().collect();
    let observed: Vec<u64> = counts.values().copied().collect();
    let value = tv_from_counts(&keys, &observed, total, target);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let mut stats = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resampled = vec![0u64; keys.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        // multinomial draw as a chain of conditional binomials
        let mut left = total;
        let mut mass_left = 1.0;
        for (i, c) in observed.iter().enumerate() {
            let p = *c as f64 / total as f64;
            let draw = if i + 1 == observed.len() || left == 0 {
                left
            } else {
                let q = (p / mass_left).clamp(0.0, 1.0);
                Binomial::new(left, q).expect("valid binomial").sample(&mut rng)
            };
            resampled[i] = draw;
            left -= draw;
            mass_left -= p;
        }
        stats.push(tv_from_counts(&keys, &resampled, total, target));
    }
    let mean = stats.iter().sum::<f64>() / stats.len() as f64;
    let var = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (stats.len() - 1) as f64;
    Ok(TVEstimate {
        value,
        method: EvalMode::Plugin,
        ci_halfwidth: 1.96 * var.sqrt() + (mean - value).abs(),
        samples: total,
    })
}

/// Bit-count statistics of a batch of outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommStats {
    pub trials: u64,
    pub histogram: BTreeMap<usize, u64>,
    pub mean: f64,
    pub min: usize,
    pub max: usize,
    pub median: usize,
    pub p90: usize,
    pub p99: usize,
}

pub fn comm_stats(outcomes: &[SimOutcome]) -> Result<CommStats> {
    if outcomes.is_empty() {
        return Err(Error::InvalidConfig("no outcomes".into()));
    }
    let mut bits: Vec<usize> = outcomes.iter().map(|o| o.bits).collect();
    bits.sort_unstable();
    let mut histogram = BTreeMap::new();
    for b in &bits {
        *histogram.entry(*b).or_insert(0) += 1;
    }
    let q = |f: f64| bits[((bits.len() as f64 * f).ceil() as usize).clamp(1, bits.len()) - 1];
    Ok(CommStats {
        trials: bits.len() as u64,
        mean: bits.iter().sum::<usize>() as f64 / bits.len() as f64,
        min: bits[0],
        max: bits[bits.len() - 1],
        median: q(0.5),
        p90: q(0.9),
        p99: q(0.99),
        histogram,
    })
}

/// Fraction of outcomes where both parties output the same transcript.
pub fn agreement_rate(outcomes: &[SimOutcome]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    outcomes.iter().filter(|o| o.agrees()).count() as f64 / outcomes.len() as f64
}

/// `Pr[Π_X = Π_Y = Π]` under an exact view law whose true transcript is
/// deterministic given the inputs, with `truth(x, y)` that transcript.
pub fn exact_agreement<F: Fn(usize, usize) -> usize>(law: &FiniteDistribution<ViewKey>, truth: F) -> f64 {
    law.iter()
        .filter(|(k, _)| {
            let t = Some(truth(k.x, k.y));
            k.tau_x == t && k.tau_y == t
        })
        .map(|(_, p)| p)
        .sum()
}
