//! Protocols built from others: IID products and the coin-mixed protocol.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::probcore::{Density, DensityModel, JointSource, SpectrumTable};
use crate::protocol::law::TranscriptLaw;

/// `π` applied independently to each of `n` coordinates, kept factored.
#[derive(Debug, Clone)]
pub struct ProductLaw {
    pub base: TranscriptLaw,
    pub n: usize,
}

pub fn product_protocol(law: &TranscriptLaw, n: usize) -> Result<ProductLaw> {
    if n == 0 {
        return Err(Error::ParameterRange("product order must be >= 1".into()));
    }
    Ok(ProductLaw { base: law.clone(), n })
}

impl ProductLaw {
    /// Explicit law on the product alphabet (small `n` only).
    pub fn expand(&self) -> Result<TranscriptLaw> {
        let atoms = (self.base.source().nx() * self.base.source().ny()) as u64;
        let total = atoms.checked_pow(self.n as u32).unwrap_or(u64::MAX);
        if total > 1 << 20 {
            return Err(Error::TooLarge { atoms: total, limit: 1 << 20 });
        }
        let mut acc = self.base.clone();
        for _ in 1..self.n {
            acc = acc.product(&self.base)?;
        }
        Ok(acc)
    }

    pub fn source(&self) -> Result<JointSource> {
        self.base.source().power(self.n)
    }
}

impl DensityModel for ProductLaw {
    /// Every density of an IID product is a sum over coordinates.
    fn spectrum(&self, d: Density) -> Result<SpectrumTable> {
        self.base.spectrum(d)?.power(self.n)
    }
}

/// Party 1 flips a private coin `Π₀` (heads with probability `p`), announces
/// it, and the parties run `π_h` or `π_t` on all `n` coordinates.
#[derive(Debug, Clone)]
pub struct MixedLaw {
    pub heads: TranscriptLaw,
    pub tails: TranscriptLaw,
    pub p: f64,
    pub n: usize,
}

/// Summary of the mixed protocol's information complexity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MixedSummary {
    pub ic_heads: f64,
    pub ic_tails: f64,
    /// `n[p·IC(π_h) + (1−p)·IC(π_t)]`; the coin adds nothing since it is independent of the inputs.
    pub ic_total: f64,
}

pub fn mixed_protocol(heads: &TranscriptLaw, tails: &TranscriptLaw, p: f64, n: usize) -> Result<MixedLaw> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ParameterRange(format!("coin bias {p} not in (0,1)")));
    }
    if n == 0 {
        return Err(Error::ParameterRange("n must be >= 1".into()));
    }
    if heads.source() != tails.source() {
        return Err(Error::AlphabetMismatch("mixed branches must share the source".into()));
    }
    Ok(MixedLaw { heads: heads.clone(), tails: tails.clone(), p, n })
}

impl MixedLaw {
    pub fn summary(&self) -> Result<MixedSummary> {
        let ic_heads = self.heads.information_complexity()?;
        let ic_tails = self.tails.information_complexity()?;
        Ok(MixedSummary {
            ic_heads,
            ic_tails,
            ic_total: self.n as f64 * (self.p * ic_heads + (1.0 - self.p) * ic_tails),
        })
    }

    /// Monte Carlo draws of `ic(Π;Xⁿ,Yⁿ)/n`: the coin, then every coordinate's
    /// `(x, y, τ)` from the selected branch.
    pub fn sample_normalized_ic(&self, draws: usize, seed: u64) -> Result<Vec<f64>> {
        let branch = |law: &TranscriptLaw| -> Result<(WeightedIndex<f64>, Vec<f64>)> {
            let triples = law.triples();
            let values = triples
                .iter()
                .map(|&(t, x, y, _)| law.ic_density(t, x, y))
                .collect::<Result<Vec<_>>>()?;
            let index = WeightedIndex::new(triples.iter().map(|t| t.3))
                .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
            Ok((index, values))
        };
        let (hi, hv) = branch(&self.heads)?;
        let (ti, tv) = branch(&self.tails)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(draws);
        for _ in 0..draws {
            let heads = rand::Rng::random_bool(&mut rng, self.p);
            let (index, values) = if heads { (&hi, &hv) } else { (&ti, &tv) };
            let mut total = 0.0;
            for _ in 0..self.n {
                total += values[index.sample(&mut rng)];
            }
            out.push(total / self.n as f64);
        }
        Ok(out)
    }
}

impl DensityModel for MixedLaw {
    fn spectrum(&self, d: Density) -> Result<SpectrumTable> {
        let h = self.heads.spectrum(d)?.power(self.n)?;
        let t = self.tails.spectrum(d)?.power(self.n)?;
        // −log P(π₀, τ | x) picks up the coin's own surprisal
        let (h, t) = match d {
            Density::TauGivenX | Density::TauGivenY => (h.shifted(-self.p.log2()), t.shifted(-(1.0 - self.p).log2())),
            _ => (h, t),
        };
        SpectrumTable::mixture(&[(self.p, &h), (1.0 - self.p, &t)])
    }
}
