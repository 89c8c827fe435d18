//! Spectrum slicing parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probcore::spectrum::SpectrumTable;

const SLICE_TOLERANCE: f64 = 1e-9;

/// Slicing of a density range `[λ_min, λ_max)` into `n_slices` slices of width `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub delta: f64,
    #[serde(default)]
    pub gamma: f64,
}

impl SliceConfig {
    pub fn new(lambda_min: f64, lambda_max: f64, delta: f64, gamma: f64) -> Result<Self> {
        let cfg = Self { lambda_min, lambda_max, delta, gamma };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min.is_finite() && self.lambda_max.is_finite() && self.lambda_max > self.lambda_min) {
            return Err(Error::InvalidConfig(format!(
                "need lambda_max > lambda_min, got [{}, {})",
                self.lambda_min, self.lambda_max
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Number of slices; the last one is shorter when `Δ` does not divide the span.
    pub fn n_slices(&self) -> usize {
        (((self.lambda_max - self.lambda_min) / self.delta) - SLICE_TOLERANCE).ceil().max(1.0) as usize
    }

    /// Slice index in `1..=N` of a density value, or 0 for the tail set `T⁽⁰⁾`.
    pub fn slice_of(&self, h: f64) -> usize {
        if h < self.lambda_min - SLICE_TOLERANCE || h >= self.lambda_max - SLICE_TOLERANCE {
            return 0;
        }
        let i = ((h - self.lambda_min + SLICE_TOLERANCE) / self.delta).floor() as usize + 1;
        i.min(self.n_slices())
    }

    /// `Pr[T⁽⁰⁾]` under the given density spectrum.
    pub fn tail_mass(&self, spectrum: &SpectrumTable) -> f64 {
        spectrum.atoms().iter().filter(|(v, _)| self.slice_of(*v) == 0).fold(0.0, |acc, (_, p)| acc + p)
    }

    /// Mass of every slice `0..=N` under the given spectrum.
    pub fn slice_masses(&self, spectrum: &SpectrumTable) -> Vec<f64> {
        let mut masses = vec![0.0; self.n_slices() + 1];
        for (v, p) in spectrum.atoms() {
            masses[self.slice_of(*v)] += p;
        }
        masses
    }

    /// Hash-based protocols send whole bits per slice, so `Δ` must be integral.
    pub fn integral_delta(&self) -> Result<usize> {
        let r = self.delta.round();
        if (self.delta - r).abs() > SLICE_TOLERANCE || r < 1.0 {
            return Err(Error::InvalidConfig(format!("hash slices need an integral delta, got {}", self.delta)));
        }
        Ok(r as usize)
    }

    /// First hash length `l = ⌈λ_min + Δ + γ⌉`.
    pub fn first_hash_len(&self) -> usize {
        (self.lambda_min + self.delta + self.gamma - SLICE_TOLERANCE).ceil().max(1.0) as usize
    }

    /// Default slicing around the bulk of a spectrum: `mean ± 3σ` rounded outwards
    /// to whole bits, `λ_min ≥ 0`, a span of at least one bit and `Δ = ⌈√span⌉`.
    pub fn around(spectrum: &SpectrumTable, gamma: f64) -> Self {
        let m = spectrum.moments();
        let sd = m.variance.sqrt();
        let lambda_min = (m.mean - 3.0 * sd).max(0.0).floor();
        let lambda_max = (m.mean + 3.0 * sd).ceil().max(lambda_min + 1.0);
        let span = lambda_max - lambda_min;
        let delta = span.sqrt().ceil().max(1.0);
        Self { lambda_min, lambda_max, delta, gamma }
    }
}
