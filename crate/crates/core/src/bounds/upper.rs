//! Budget of the full simulation: per-round slack `δ_t`, itemized `ε′`
//! and the total length `l_max`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::probcore::{Density, DensityModel, SpectrumTable};
use crate::simulate::{Protocol5, RoundConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundBudget {
    pub round: usize,
    pub n_rx: usize,
    pub n_tx: usize,
    pub delta_rx: f64,
    pub delta_tx: f64,
    /// `N_rx + 3 log N_tx + Δ_rx + Δ_tx + 3γ`.
    pub delta_t: f64,
    pub tail_rx: f64,
    pub tail_tx: f64,
    /// `4·Pr[T_rx⁽⁰⁾] + 4·Pr[T_tx⁽⁰⁾]`.
    pub tail_term: f64,
    /// `3(N_rx + N_tx + 2)·2^{−γ}`.
    pub hash_term: f64,
    /// `3/N_tx + 3/N_rx`.
    pub index_term: f64,
    pub eps_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBoundBudget {
    pub gamma: f64,
    pub target_eps: f64,
    pub rounds: Vec<RoundBudget>,
    pub eps_prime: f64,
    /// `Σ δ_t`.
    pub lambda_prime: f64,
    /// Upper tail of the ic spectrum at `target − ε′`.
    pub ic_tail: f64,
    pub l_max: f64,
    /// `Pr[ic > l_max − λ′] + ε′` for the integer budget `⌈l_max⌉`.
    pub error_bound: f64,
}

impl UpperBoundBudget {
    /// The integer budget actually handed to the simulation.
    pub fn l_max_bits(&self) -> usize {
        self.l_max.ceil().max(1.0) as usize
    }
}

/// Itemized per-round slack; `tails[t] = (Pr[T_rx⁽⁰⁾], Pr[T_tx⁽⁰⁾])` of round `t`, unconditional.
pub fn round_budgets(configs: &[RoundConfig], tails: &[(f64, f64)], gamma: f64) -> Result<Vec<RoundBudget>> {
    if configs.is_empty() || configs.len() != tails.len() {
        return Err(Error::InvalidConfig("need one tail pair per round and at least one round".into()));
    }
    let g = 2f64.powf(-gamma);
    let mut rounds = Vec::with_capacity(configs.len());
    for (t, (c, &(tail_rx, tail_tx))) in configs.iter().zip(tails).enumerate() {
        c.rx.validate()?;
        c.tx.validate()?;
        let (n_rx, n_tx) = (c.rx.n_slices(), c.tx.n_slices());
        let delta_t = n_rx as f64 + 3.0 * (n_tx as f64).log2() + c.rx.delta + c.tx.delta + 3.0 * gamma;
        let tail_term = 4.0 * tail_rx + 4.0 * tail_tx;
        let hash_term = 3.0 * (n_rx + n_tx + 2) as f64 * g;
        let index_term = 3.0 / n_tx as f64 + 3.0 / n_rx as f64;
        rounds.push(RoundBudget {
            round: t + 1,
            n_rx,
            n_tx,
            delta_rx: c.rx.delta,
            delta_tx: c.tx.delta,
            delta_t,
            tail_rx,
            tail_tx,
            tail_term,
            hash_term,
            index_term,
            eps_prime: tail_term + hash_term + index_term,
        });
    }
    Ok(rounds)
}

/// `Pr[ic > l_max − λ′] + ε′`, capped at 1; without a budget the first term vanishes.
pub fn budget_error_bound(rounds: &[RoundBudget], ic: &SpectrumTable, l_max: Option<usize>) -> f64 {
    let eps_prime: f64 = rounds.iter().map(|r| r.eps_prime).sum();
    let lambda_prime: f64 = rounds.iter().map(|r| r.delta_t).sum();
    let over = l_max.map(|l| ic.prob_greater(l as f64 - lambda_prime)).unwrap_or(0.0);
    (eps_prime + over).min(1.0)
}

pub fn upper_bound_budget(
    configs: &[RoundConfig],
    tails: &[(f64, f64)],
    gamma: f64,
    target_eps: f64,
    ic: &SpectrumTable,
) -> Result<UpperBoundBudget> {
    if !(target_eps > 0.0 && target_eps < 1.0) {
        return Err(Error::ParameterRange(format!("target eps {target_eps} not in (0,1)")));
    }
    let rounds = round_budgets(configs, tails, gamma)?;
    let eps_prime: f64 = rounds.iter().map(|r| r.eps_prime).sum();
    if eps_prime >= target_eps {
        return Err(Error::InfeasibleBudget { eps_prime, target: target_eps });
    }
    let lambda_prime: f64 = rounds.iter().map(|r| r.delta_t).sum();
    let ic_tail = ic.inf_tail(target_eps - eps_prime, true);
    let l_max = ic_tail + lambda_prime;
    let bits = l_max.ceil().max(1.0) as usize;
    let error_bound = budget_error_bound(&rounds, ic, Some(bits));
    Ok(UpperBoundBudget { gamma, target_eps, rounds, eps_prime, lambda_prime, ic_tail, l_max, error_bound })
}

/// Budget for a constructed full simulation, using its exact round tails.
pub fn protocol5_budget(p5: &Protocol5, target_eps: f64) -> Result<UpperBoundBudget> {
    upper_bound_budget(&p5.configs(), &p5.tail_masses(), p5.gamma(), target_eps, &p5.law().spectrum(Density::Ic)?)
}
