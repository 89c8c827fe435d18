//! The four-region protocol on `X = Y = {1..2ⁿ}` with `δ = 1/n`, kept in
//! aggregated form so that large `n` costs nothing.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::probcore::{spectrum_from_atoms, Density, DensityModel, JointSource, SpectrumTable, ViewAtom};
use crate::protocol::law::{Row, TranscriptLaw};

/// One block of input pairs on which the transcript laws are constant.
#[derive(Debug, Clone, Serialize)]
pub struct Region {
    pub name: String,
    pub x_small: bool,
    pub y_small: bool,
    /// Total probability of the block.
    pub mass: f64,
    #[serde(skip)]
    pub atom: ViewAtom,
}

/// Aggregated source and deterministic transcript law of the example.
///
/// `τ = a` if both inputs exceed `δ2ⁿ`, `b` if only `x` does, `c` if only `y`
/// does, and `(x, y)` if neither does.
#[derive(Debug, Clone, Serialize)]
pub struct RegionLaw {
    pub n: u32,
    pub delta: f64,
    /// `⌊δ2ⁿ⌋`: number of "small" symbols per party.
    pub small: f64,
    pub size: f64,
    pub regions: Vec<Region>,
}

pub fn appendix_a_example(n: u32) -> Result<RegionLaw> {
    if !(4..=60).contains(&n) {
        return Err(Error::ParameterRange(format!("appendix example needs 4 <= n <= 60, got {n}")));
    }
    let size = 2f64.powi(n as i32);
    let delta = 1.0 / n as f64;
    let small = (delta * size).floor();
    let s = small / size;
    let u = 1.0 - s;
    let cell = 1.0 / (size * size);
    let marg = 1.0 / size;
    let atom = |prob: f64, p_tau_x: f64, p_tau_y: f64| ViewAtom {
        prob,
        p_xy: cell,
        p_x: marg,
        p_y: marg,
        p_tau_xy: 1.0,
        p_tau_x,
        p_tau_y,
    };
    // P(τ|x) is the probability that y falls in the block that completes τ
    let regions = vec![
        Region { name: "a".into(), x_small: false, y_small: false, mass: u * u, atom: atom(u * u, u, u) },
        Region { name: "b".into(), x_small: false, y_small: true, mass: u * s, atom: atom(u * s, s, u) },
        Region { name: "c".into(), x_small: true, y_small: false, mass: s * u, atom: atom(s * u, u, s) },
        Region { name: "xy".into(), x_small: true, y_small: true, mass: s * s, atom: atom(s * s, marg, marg) },
    ];
    Ok(RegionLaw { n, delta, small, size, regions })
}

impl RegionLaw {
    pub fn view_atoms(&self) -> Vec<ViewAtom> {
        self.regions.iter().map(|r| r.atom).collect()
    }

    /// `Pr[Π ∉ {a, b, c}]`.
    pub fn prob_pair_transcript(&self) -> f64 {
        self.regions[3].mass
    }

    /// Explicit source and transcript law; only for `n ≤ 8`.
    pub fn expand(&self) -> Result<(JointSource, TranscriptLaw)> {
        if self.n > 8 {
            return Err(Error::TooLarge { atoms: 1u64 << (2 * self.n), limit: 1 << 16 });
        }
        let size = self.size as usize;
        let small = self.small as usize;
        let labels: Vec<String> = (1..=size).map(|v| v.to_string()).collect();
        let m = 1.0 / (size * size) as f64;
        let source = JointSource::new(labels.clone(), labels, vec![m; size * size])?;
        let mut tau_labels = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        for x in 1..=small {
            for y in 1..=small {
                tau_labels.push(format!("({x},{y})"));
            }
        }
        let mut by_xy: Vec<Row> = Vec::with_capacity(size * size);
        for x in 0..size {
            for y in 0..size {
                let t = match (x < small, y < small) {
                    (false, false) => 0,
                    (false, true) => 1,
                    (true, false) => 2,
                    (true, true) => 3 + x * small + y,
                };
                by_xy.push(vec![(t, 1.0)]);
            }
        }
        let law = TranscriptLaw::from_conditional(source.clone(), tau_labels, by_xy)?;
        Ok((source, law))
    }
}

impl DensityModel for RegionLaw {
    fn spectrum(&self, d: Density) -> Result<SpectrumTable> {
        spectrum_from_atoms(&self.view_atoms(), d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_transcript_mass_is_delta_squared() {
        let r = appendix_a_example(16).unwrap();
        assert!((r.prob_pair_transcript() - 1.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_n() {
        assert!(appendix_a_example(3).is_err());
    }
}
