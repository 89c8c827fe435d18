//! Information densities of sources and of (transcript, input) views.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probcore::source::JointSource;
use crate::probcore::spectrum::SpectrumTable;

/// Entropy densities that depend only on the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    /// `−log P(x,y)`
    Joint,
    /// `−log P(x|y)`
    CondXGivenY,
    /// `−log P(y|x)`
    CondYGivenX,
    /// `−log P(x|y) − log P(y|x)`
    Sum,
    /// `log P(x|y) − log P(x)`
    Mutual,
}

pub fn entropy_density(source: &JointSource, kind: DensityKind, x: usize, y: usize) -> Result<f64> {
    let pxy = source.p(x, y);
    if pxy <= 0.0 {
        return Err(Error::ZeroMassAtom(format!("P_XY({x},{y}) = 0")));
    }
    let (px, py) = (source.px(x), source.py(y));
    Ok(match kind {
        DensityKind::Joint => -pxy.log2(),
        DensityKind::CondXGivenY => -(pxy / py).log2(),
        DensityKind::CondYGivenX => -(pxy / px).log2(),
        DensityKind::Sum => -(pxy / py).log2() - (pxy / px).log2(),
        DensityKind::Mutual => (pxy / (px * py)).log2(),
    })
}

/// Densities over the joint law of a transcript `τ` and the inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    /// Information complexity density `ic(τ;x,y)`.
    Ic,
    Joint,
    CondXGivenY,
    CondYGivenX,
    Sum,
    Mutual,
    /// `−log P(x|y,τ)`
    CondXGivenYTau,
    /// `−log P(y|x,τ)`
    CondYGivenXTau,
    /// `hsum((x,τ),(y,τ)) = −log P(x|y,τ) − log P(y|x,τ)`
    SumExtended,
    /// `−log P(τ|x)`
    TauGivenX,
    /// `−log P(τ|y)`
    TauGivenY,
}

impl Density {
    pub const ALL: [Density; 11] = [
        Density::Ic,
        Density::Joint,
        Density::CondXGivenY,
        Density::CondYGivenX,
        Density::Sum,
        Density::Mutual,
        Density::CondXGivenYTau,
        Density::CondYGivenXTau,
        Density::SumExtended,
        Density::TauGivenX,
        Density::TauGivenY,
    ];
}

/// One class of `(τ, x, y)` triples sharing the same conditional probabilities.
///
/// `prob` is the total mass of the class; the other fields are the point
/// probabilities every member shares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewAtom {
    pub prob: f64,
    pub p_xy: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_tau_xy: f64,
    pub p_tau_x: f64,
    pub p_tau_y: f64,
}

impl ViewAtom {
    pub fn density(&self, d: Density) -> f64 {
        let px_given_y = self.p_xy / self.p_y;
        let py_given_x = self.p_xy / self.p_x;
        // P(x|y,τ) = P(x,y) P(τ|x,y) / (P(y) P(τ|y))
        let px_given_ytau = px_given_y * self.p_tau_xy / self.p_tau_y;
        let py_given_xtau = py_given_x * self.p_tau_xy / self.p_tau_x;
        match d {
            Density::Ic => (self.p_tau_xy / self.p_tau_x).log2() + (self.p_tau_xy / self.p_tau_y).log2(),
            Density::Joint => -self.p_xy.log2(),
            Density::CondXGivenY => -px_given_y.log2(),
            Density::CondYGivenX => -py_given_x.log2(),
            Density::Sum => -px_given_y.log2() - py_given_x.log2(),
            Density::Mutual => (px_given_y / self.p_x).log2(),
            Density::CondXGivenYTau => -px_given_ytau.log2(),
            Density::CondYGivenXTau => -py_given_xtau.log2(),
            Density::SumExtended => -px_given_ytau.log2() - py_given_xtau.log2(),
            Density::TauGivenX => -self.p_tau_x.log2(),
            Density::TauGivenY => -self.p_tau_y.log2(),
        }
    }
}

/// Anything whose densities have an exactly computable spectrum.
pub trait DensityModel {
    fn spectrum(&self, d: Density) -> Result<SpectrumTable>;
}

/// Spectrum of a density from a list of view atoms.
pub fn spectrum_from_atoms(atoms: &[ViewAtom], d: Density) -> Result<SpectrumTable> {
    SpectrumTable::from_weighted(atoms.iter().map(|a| (a.density(d), a.prob)))
}

/// Spectrum of a source-only density.
pub fn source_spectrum(source: &JointSource, kind: DensityKind) -> Result<SpectrumTable> {
    let mut weighted = Vec::new();
    for (x, y, m) in source.support() {
        weighted.push((entropy_density(source, kind, x, y)?, m));
    }
    SpectrumTable::from_weighted(weighted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copy_source_sum_density_is_zero() {
        let s = JointSource::copy(1).unwrap();
        assert_eq!(entropy_density(&s, DensityKind::Sum, 0, 0).unwrap(), 0.0);
        assert_eq!(entropy_density(&s, DensityKind::Joint, 1, 1).unwrap(), 1.0);
        assert!(matches!(entropy_density(&s, DensityKind::Joint, 0, 1), Err(Error::ZeroMassAtom(_))));
    }

    #[test]
    fn independent_bits_sum_density() {
        let s = JointSource::independent_uniform(1, 1).unwrap();
        assert_eq!(entropy_density(&s, DensityKind::Sum, 0, 1).unwrap(), 2.0);
        assert_eq!(entropy_density(&s, DensityKind::Mutual, 0, 1).unwrap(), 0.0);
    }
}
