//! Construction of simulation protocols from a configuration, with defaults
//! filled in and the matching analytic error budget.

use crate::bounds::{budget_error_bound, protocol5_budget, round_budgets};
use crate::error::{Error, Result};
use crate::hashing::{min_entropy, Conditioning};
use crate::probcore::{source_spectrum, Density, DensityKind, DensityModel, SliceConfig, TailSide};
use crate::protocol::RoundLaw;
use crate::simulate::{
    default_round_configs, receiver_spectrum, transmitter_spectrum, Protocol1, Protocol2, Protocol3, Protocol4,
    Protocol5, Simulation,
};

use super::config::{ExperimentConfig, Model, SimKind, DEFAULT_EPS};

pub enum Built {
    P1(Protocol1),
    P2(Protocol2),
    P3(Protocol3),
    P4(Protocol4),
    P5(Protocol5),
}

impl Built {
    pub fn simulation(&self) -> &dyn Simulation {
        match self {
            Built::P1(p) => p,
            Built::P2(p) => p,
            Built::P3(p) => p,
            Built::P4(p) => p,
            Built::P5(p) => p,
        }
    }

    /// Analytic bound on the simulation error of the configured protocol.
    pub fn error_budget(&self) -> Result<f64> {
        match self {
            Built::P1(p) => Ok(p.error_bound()),
            Built::P2(p) => Ok(p.error_bound()),
            Built::P3(p) => p.error_bound(),
            Built::P4(p) => p.error_bound(),
            Built::P5(p) => {
                let ic = p.law().spectrum(Density::Ic)?;
                let rounds = round_budgets(&p.configs(), &p.tail_masses(), p.gamma())?;
                Ok(budget_error_bound(&rounds, &ic, p.l_max()))
            }
        }
    }
}

fn tree_and_law(model: &Model) -> Result<(&crate::protocol::ProtocolTree, &crate::protocol::TranscriptLaw)> {
    match model {
        Model::Law { tree, law } => Ok((tree, law)),
        Model::Region(_) => Err(Error::InvalidConfig("simulation needs an explicit tree protocol".into())),
    }
}

/// Builds the configured simulation; `cfg` is updated with every default used.
pub fn build(cfg: &mut ExperimentConfig, kind: SimKind) -> Result<Built> {
    cfg.simulation = Some(kind);
    let gamma = cfg.gamma();
    match kind {
        SimKind::P1 | SimKind::P2 => {
            let source = cfg.resolve_source()?;
            let spectrum = source_spectrum(&source, DensityKind::CondXGivenY)?;
            if kind == SimKind::P1 {
                let l = match cfg.hash_len {
                    Some(l) => l,
                    None => {
                        let tail = spectrum.eps_tail(cfg.eps.unwrap_or(DEFAULT_EPS), TailSide::Upper)?;
                        (tail.max(0.0) + gamma).ceil() as usize + 1
                    }
                };
                cfg.hash_len = Some(l);
                Ok(Built::P1(Protocol1::new(&source, l, gamma, None)?))
            } else {
                let slice = SliceConfig { gamma, ..cfg.slice.unwrap_or_else(|| SliceConfig::around(&spectrum, gamma)) };
                cfg.slice = Some(slice);
                let p = Protocol2::new(&source, slice, cfg.hash_len, None)?;
                cfg.hash_len = Some(p.schedule().l);
                Ok(Built::P2(p))
            }
        }
        SimKind::P3 | SimKind::P4 => {
            let model = cfg.resolve_model()?;
            let (tree, law) = tree_and_law(&model)?;
            if tree.rounds() != 1 {
                return Err(Error::InvalidConfig(format!(
                    "one-round simulation needs a one-round protocol, got {} rounds",
                    tree.rounds()
                )));
            }
            let round = RoundLaw::first_round(tree, law.source())?;
            let rx = receiver_spectrum(&round)?;
            let slice = SliceConfig { gamma, ..cfg.slice.unwrap_or_else(|| SliceConfig::around(&rx, gamma)) };
            cfg.slice = Some(slice);
            if kind == SimKind::P3 {
                let k = match cfg.k {
                    Some(k) => k,
                    None => {
                        let h = min_entropy(&round.joint_tau_x(), &Conditioning::Optimize)?.value;
                        (h - 2.0 * gamma).floor().max(0.0) as usize
                    }
                };
                let p = Protocol3::new(&round, k, slice)?;
                cfg.k = Some(p.k());
                Ok(Built::P3(p))
            } else {
                let tx = transmitter_spectrum(&round)?;
                let slice_x = SliceConfig { gamma, ..cfg.slice_x.unwrap_or_else(|| SliceConfig::around(&tx, gamma)) };
                cfg.slice_x = Some(slice_x);
                Ok(Built::P4(Protocol4::new(&round, slice, slice_x, gamma)?))
            }
        }
        SimKind::P5 => {
            let model = cfg.resolve_model()?;
            let (tree, law) = tree_and_law(&model)?;
            let rounds = match &cfg.rounds {
                Some(r) => r.clone(),
                None => default_round_configs(tree, law.source(), gamma)?,
            };
            cfg.rounds = Some(rounds.clone());
            let mut p = Protocol5::new(tree, law.source(), &rounds, gamma, cfg.l_max)?;
            if cfg.l_max.is_none() {
                if let Some(target) = cfg.target_eps {
                    let budget = protocol5_budget(&p, target)?;
                    cfg.l_max = Some(budget.l_max_bits());
                    p = Protocol5::new(tree, law.source(), &rounds, gamma, cfg.l_max)?;
                }
            }
            Ok(Built::P5(p))
        }
    }
}
