//! The converse bound `D_ε(π) ≥ sup{λ : Pr[ic > λ] ≥ ε + ε′} − λ′`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probcore::{Density, DensityModel, SpectrumTable, TailSide};

/// A closed interval `[lo, hi]` of density values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::ParameterRange(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// The exact support range of a spectrum.
    pub fn of(s: &SpectrumTable) -> Self {
        Self { lo: s.min(), hi: s.max() }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Essential intervals of `h(X,Y)`, `h(X|YΠ)` and `hsum(XΠ,YΠ)` plus the
/// declared mass they leave out. `None` intervals default to the exact
/// spectrum range.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    #[serde(default)]
    pub joint: Option<Interval>,
    #[serde(default)]
    pub cond: Option<Interval>,
    #[serde(default)]
    pub sum: Option<Interval>,
    #[serde(default)]
    pub eps_tail_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct LowerBoundReport {
    pub eps: f64,
    /// `sup{λ : Pr[ic > λ] ≥ ε + ε′}`.
    pub lambda_eps: f64,
    /// Lower ε-tail `sup{λ : Pr[ic > λ] > ε}`.
    pub lower_tail: f64,
    /// Upper ε-tail `inf{λ : Pr[ic > λ] < ε}`.
    pub upper_tail: f64,
    /// `upper_tail − lower_tail`; nonzero when an atom sits at the threshold.
    pub tail_gap: f64,
    pub Lambda1: f64,
    pub Lambda2: f64,
    pub Lambda3: f64,
    pub intervals: [Interval; 3],
    pub eps_tail_mass: f64,
    /// Mass the intervals actually leave out.
    pub leaked_mass: f64,
    pub eta: f64,
    pub eps_prime: f64,
    pub lambda_prime: f64,
    pub bound: f64,
    pub vacuous: bool,
}

/// `λ′ = 2 log(Λ₁Λ₃) + log Λ₂ − log(1 − 3η) + 9 log(1/η) + 3`, each `Λ`
/// floored at 1.
pub fn lambda_prime(l1: f64, l2: f64, l3: f64, eta: f64) -> f64 {
    let (l1, l2, l3) = (l1.max(1.0), l2.max(1.0), l3.max(1.0));
    2.0 * (l1 * l3).log2() + l2.log2() - (1.0 - 3.0 * eta).log2() + 9.0 * (1.0 / eta).log2() + 3.0
}

pub fn lower_bound(model: &dyn DensityModel, eps: f64, eta: f64, spec: &TailSpec) -> Result<LowerBoundReport> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::ParameterRange(format!("eps {eps} not in [0,1)")));
    }
    if !(eta > 0.0 && eta < 1.0 / 3.0) {
        return Err(Error::ParameterRange(format!("eta {eta} not in (0,1/3)")));
    }
    if !(spec.eps_tail_mass >= 0.0) {
        return Err(Error::ParameterRange("negative tail mass".into()));
    }
    let ic = model.spectrum(Density::Ic)?;
    let spectra = [
        model.spectrum(Density::Joint)?,
        model.spectrum(Density::CondXGivenYTau)?,
        model.spectrum(Density::SumExtended)?,
    ];
    let chosen = [spec.joint, spec.cond, spec.sum];
    let mut intervals = [Interval { lo: 0.0, hi: 0.0 }; 3];
    let mut leaked = 0.0;
    for i in 0..3 {
        intervals[i] = chosen[i].unwrap_or_else(|| Interval::of(&spectra[i]));
        leaked += spectra[i].prob_outside(intervals[i].lo, intervals[i].hi);
    }
    if leaked > spec.eps_tail_mass + 1e-12 {
        return Err(Error::TailMassViolated { declared: spec.eps_tail_mass, actual: leaked });
    }
    let eps_prime = spec.eps_tail_mass + 2.0 * eta;
    let lp = lambda_prime(intervals[0].length(), intervals[1].length(), intervals[2].length(), eta);
    let lambda_eps = ic.sup_tail(eps + eps_prime, false);
    let lower_tail = ic.eps_tail(eps, TailSide::Lower)?;
    let upper_tail = ic.eps_tail(eps, TailSide::Upper)?;
    let bound = lambda_eps - lp;
    Ok(LowerBoundReport {
        eps,
        lambda_eps,
        lower_tail,
        upper_tail,
        tail_gap: upper_tail - lower_tail,
        Lambda1: intervals[0].length(),
        Lambda2: intervals[1].length(),
        Lambda3: intervals[2].length(),
        intervals,
        eps_tail_mass: spec.eps_tail_mass,
        leaked_mass: leaked,
        eta,
        eps_prime,
        lambda_prime: lp,
        bound,
        vacuous: !(bound > 0.0),
    })
}
