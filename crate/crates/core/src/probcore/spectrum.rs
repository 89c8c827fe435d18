//! Distributions of information densities ("spectra") and their tails.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probcore::source::MASS_TOLERANCE;

/// Atoms whose values differ by at most this (scaled by `max(1, |v|)`) are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Slack used when comparing a tail mass against a threshold.
const TAIL_TOLERANCE: f64 = 1e-12;

/// Which ε-tail of a density to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailSide {
    /// `sup{λ : Pr[D > λ] > ε}`
    Lower,
    /// `inf{λ : Pr[D > λ] < ε}`
    Upper,
}

/// The distribution of a real-valued density, as sorted `(value, prob)` atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    atoms: Vec<(f64, f64)>,
}

/// Mean, variance and third central moment of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub third_central_moment: f64,
}

impl SpectrumTable {
    /// Builds a spectrum from weighted values. Zero-weight atoms are dropped and
    /// equal values merged; total weight must be 1.
    pub fn from_weighted<I: IntoIterator<Item = (f64, f64)>>(weighted: I) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut total = 0.0;
        for (v, p) in weighted {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!("negative atom mass {p}")));
            }
            if p == 0.0 {
                continue;
            }
            if !v.is_finite() {
                return Err(Error::InvalidDistribution(format!("non-finite density value {v}")));
            }
            total += p;
            // `+ 0.0` turns −0 (from −log 1) into 0
            atoms.push((v + 0.0, p));
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("spectrum mass {total} is not 1")));
        }
        Ok(Self { atoms: merge_sorted(atoms) })
    }

    /// A single atom of mass one.
    pub fn point(value: f64) -> Self {
        Self { atoms: vec![(value, 1.0)] }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.atoms[0].0
    }

    pub fn max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].0
    }

    /// `Pr[D > λ]`.
    pub fn prob_greater(&self, lambda: f64) -> f64 {
        // summed from the top so that masses of large atoms are exact
        self.atoms.iter().rev().take_while(|(v, _)| *v > lambda).map(|(_, p)| p).sum()
    }

    /// `Pr[D >= λ]`.
    pub fn prob_at_least(&self, lambda: f64) -> f64 {
        self.atoms.iter().rev().take_while(|(v, _)| *v >= lambda).map(|(_, p)| p).sum()
    }

    /// `Pr[D < λ]`.
    pub fn prob_less(&self, lambda: f64) -> f64 {
        self.atoms.iter().take_while(|(v, _)| *v < lambda).map(|(_, p)| p).sum()
    }

    /// Mass outside the closed interval `[lo, hi]`.
    pub fn prob_outside(&self, lo: f64, hi: f64) -> f64 {
        self.atoms.iter().filter(|(v, _)| *v < lo || *v > hi).fold(0.0, |acc, (_, p)| acc + p)
    }

    /// Suffix tail masses: `tails[i] = Pr[D > v_i]`.
    fn tails_above(&self) -> Vec<f64> {
        let mut tails = vec![0.0; self.atoms.len()];
        let mut acc = 0.0;
        for i in (0..self.atoms.len()).rev() {
            tails[i] = acc;
            acc += self.atoms[i].1;
        }
        tails
    }

    /// `sup{λ : Pr[D > λ] > t}` (strict) or `sup{λ : Pr[D > λ] >= t}` (weak).
    ///
    /// Returns `-inf` when no λ qualifies (only possible for the weak form with `t > 1`)
    /// and the spectrum minimum when only λ below every atom qualifies.
    pub fn sup_tail(&self, threshold: f64, strict: bool) -> f64 {
        if threshold > 1.0 + TAIL_TOLERANCE || (strict && threshold >= 1.0 - TAIL_TOLERANCE) {
            return f64::NEG_INFINITY;
        }
        let tails = self.tails_above();
        for (i, tail) in tails.iter().enumerate() {
            let fails = if strict {
                *tail <= threshold + TAIL_TOLERANCE
            } else {
                *tail < threshold - TAIL_TOLERANCE
            };
            if fails {
                return self.atoms[i].0;
            }
        }
        self.max()
    }

    /// `inf{λ : Pr[D > λ] < t}` (strict) or `inf{λ : Pr[D > λ] <= t}` (weak).
    ///
    /// Returns `+inf` when no λ qualifies (e.g. the strict form with `t = 0`).
    pub fn inf_tail(&self, threshold: f64, strict: bool) -> f64 {
        let qualifies = |tail: f64| {
            if strict {
                tail < threshold - TAIL_TOLERANCE
            } else {
                tail <= threshold + TAIL_TOLERANCE
            }
        };
        if qualifies(1.0) {
            return f64::NEG_INFINITY;
        }
        let tails = self.tails_above();
        match tails.iter().position(|t| qualifies(*t)) {
            Some(i) => self.atoms[i].0,
            None => f64::INFINITY,
        }
    }

    /// The lower or upper ε-tail.
    pub fn eps_tail(&self, eps: f64, side: TailSide) -> Result<f64> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::OutOfRange(format!("eps {eps} not in [0,1)")));
        }
        Ok(match side {
            TailSide::Lower => self.sup_tail(eps, true),
            TailSide::Upper => self.inf_tail(eps, true),
        })
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(v, p)| v * p).sum()
    }

    pub fn moments(&self) -> MomentSummary {
        let mean = self.mean();
        let (mut var, mut third) = (0.0, 0.0);
        for (v, p) in &self.atoms {
            let d = v - mean;
            var += p * d * d;
            third += p * d * d * d;
        }
        MomentSummary { mean, variance: var.max(0.0), third_central_moment: third }
    }

    /// Distribution of the sum of independent draws from `self` and `other`.
    pub fn convolve(&self, other: &SpectrumTable) -> SpectrumTable {
        let mut out = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for (a, p) in &self.atoms {
            for (b, q) in &other.atoms {
                out.push((a + b, p * q));
            }
        }
        SpectrumTable { atoms: merge_sorted(out) }
    }

    /// `n`-fold self-convolution (the spectrum of a sum of `n` IID copies).
    pub fn power(&self, n: usize) -> Result<SpectrumTable> {
        if n == 0 {
            return Err(Error::ParameterRange("convolution order must be >= 1".into()));
        }
        let mut result: Option<SpectrumTable> = None;
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.convolve(&base),
                });
            }
            k >>= 1;
            if k > 0 {
                base = base.convolve(&base);
            }
        }
        Ok(result.expect("n >= 1"))
    }

    /// Mixture `Σ w_i · S_i`; weights must sum to one.
    pub fn mixture(parts: &[(f64, &SpectrumTable)]) -> Result<SpectrumTable> {
        SpectrumTable::from_weighted(
            parts.iter().flat_map(|(w, s)| s.atoms.iter().map(move |(v, p)| (*v, w * p))),
        )
    }

    /// The spectrum of `D + c`.
    pub fn shifted(&self, c: f64) -> SpectrumTable {
        SpectrumTable { atoms: self.atoms.iter().map(|(v, p)| (v + c, *p)).collect() }
    }

    /// Largest gap between adjacent atom values (0 for a point mass).
    pub fn max_gap(&self) -> f64 {
        self.atoms.windows(2).map(|w| w[1].0 - w[0].0).fold(0.0, f64::max)
    }

    /// Writes `value,prob` rows with a header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["value", "prob"])?;
        for (v, p) in &self.atoms {
            wr.write_record([format!("{v}"), format!("{p}")])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn merge_sorted(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        match merged.last_mut() {
            Some(last) if (v - last.0).abs() <= MERGE_TOLERANCE * last.0.abs().max(1.0) => {
                last.1 += p;
            }
            _ => merged.push((v, p)),
        }
    }
    merged
}
