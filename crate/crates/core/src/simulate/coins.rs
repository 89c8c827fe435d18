//! Sources of randomness: seeded pseudo-random streams for Monte Carlo runs
//! and an exhaustive choice-tape enumerator for exact laws.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Every random decision a protocol makes goes through this trait.
pub trait Coins {
    /// `n ≤ 64` uniform bits packed into the low end of the result.
    fn bits(&mut self, n: u32) -> u64;
    /// An index drawn proportionally to `weights` (never a zero-weight index).
    fn choose(&mut self, weights: &[f64]) -> usize;
    /// Draw from a precomputed sampler.
    fn sample(&mut self, sampler: &DiscreteSampler) -> usize {
        self.choose(&sampler.weights)
    }
}

/// A fixed discrete law with a cumulative table for fast inversion.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteSampler {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidDistribution(format!("bad weight {w}")));
            }
            acc += w;
            cumulative.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::InvalidDistribution("all weights are zero".into()));
        }
        Ok(Self { weights, cumulative })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn invert(&self, u: f64) -> usize {
        let target = u * self.cumulative[self.cumulative.len() - 1];
        let i = self.cumulative.partition_point(|c| *c <= target);
        if i < self.weights.len() {
            i
        } else {
            self.last_positive()
        }
    }

    fn last_positive(&self) -> usize {
        self.weights.iter().rposition(|w| *w > 0.0).expect("positive weight exists")
    }
}

/// Counter-based pseudo-random coins: stream `trial` of the master seed.
#[derive(Debug, Clone)]
pub struct RngCoins {
    rng: ChaCha8Rng,
}

impl RngCoins {
    pub fn new(master_seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream);
        Self { rng }
    }
}

impl Coins for RngCoins {
    fn bits(&mut self, n: u32) -> u64 {
        match n {
            0 => 0,
            64 => self.rng.next_u64(),
            _ => self.rng.next_u64() >> (64 - n),
        }
    }

    fn choose(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut target = self.rng.random::<f64>() * total;
        let mut last = 0;
        for (i, w) in weights.iter().enumerate() {
            if *w > 0.0 {
                if target < *w {
                    return i;
                }
                target -= w;
                last = i;
            }
        }
        last
    }

    fn sample(&mut self, sampler: &DiscreteSampler) -> usize {
        sampler.invert(self.rng.random::<f64>())
    }
}

#[derive(Debug, Clone)]
enum Options {
    Uniform(u64),
    Weighted(Vec<(usize, f64)>),
}

impl Options {
    fn len(&self) -> u64 {
        match self {
            Options::Uniform(n) => *n,
            Options::Weighted(v) => v.len() as u64,
        }
    }
}

#[derive(Debug, Clone)]
struct Point {
    choice: u64,
    options: Options,
}

/// Replays and advances a tape of choices so that repeated runs visit every
/// outcome of every random decision exactly once.
#[derive(Debug, Default)]
pub struct TapeCoins {
    tape: Vec<Point>,
    pos: usize,
    prob: f64,
}

impl TapeCoins {
    fn new() -> Self {
        Self { tape: Vec::new(), pos: 0, prob: 1.0 }
    }

    fn next_point(&mut self, options: impl FnOnce() -> Options) -> u64 {
        if self.pos == self.tape.len() {
            self.tape.push(Point { choice: 0, options: options() });
        }
        let point = &self.tape[self.pos];
        self.pos += 1;
        let (choice, p) = match &point.options {
            Options::Uniform(n) => (point.choice, 1.0 / *n as f64),
            Options::Weighted(v) => {
                let (idx, w) = v[point.choice as usize];
                (idx as u64, w)
            }
        };
        self.prob *= p;
        choice
    }

    /// Moves to the next unexplored tape; false when the enumeration is complete.
    fn advance(&mut self) -> bool {
        self.tape.truncate(self.pos);
        while let Some(last) = self.tape.last_mut() {
            if last.choice + 1 < last.options.len() {
                last.choice += 1;
                self.pos = 0;
                self.prob = 1.0;
                return true;
            }
            self.tape.pop();
        }
        false
    }
}

impl Coins for TapeCoins {
    fn bits(&mut self, n: u32) -> u64 {
        if n == 0 {
            return 0;
        }
        assert!(n < 64, "exhaustive enumeration of {n} bits at once");
        self.next_point(|| Options::Uniform(1u64 << n))
    }

    fn choose(&mut self, weights: &[f64]) -> usize {
        self.next_point(|| {
            let total: f64 = weights.iter().sum();
            Options::Weighted(
                weights.iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(i, w)| (i, w / total)).collect(),
            )
        }) as usize
    }
}

/// Runs `f` once for every complete choice tape and reports each result with
/// its probability. Fails with `TooLarge` beyond `limit` tapes.
pub fn enumerate<R, F>(limit: u64, f: F) -> Result<Vec<(R, f64)>>
where
    F: FnMut(&mut dyn Coins) -> R,
{
    let mut out = Vec::new();
    enumerate_into(limit, f, |r, p| out.push((r, p)))?;
    Ok(out)
}

/// As [`enumerate`], handing each `(result, probability)` to `sink` instead
/// of collecting them; returns the number of tapes.
pub fn enumerate_into<R, F, S>(limit: u64, mut f: F, mut sink: S) -> Result<u64>
where
    F: FnMut(&mut dyn Coins) -> R,
    S: FnMut(R, f64),
{
    let mut coins = TapeCoins::new();
    let mut count = 0u64;
    loop {
        let r = f(&mut coins);
        count += 1;
        if count > limit {
            return Err(Error::TooLarge { atoms: count, limit });
        }
        sink(r, coins.prob);
        if !coins.advance() {
            return Ok(count);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_covers_all_outcomes() {
        let out = enumerate(100, |c| {
            let a = c.bits(2);
            let b = if a == 0 { c.choose(&[0.25, 0.0, 0.75]) as u64 } else { 9 };
            (a, b)
        })
        .unwrap();
        assert_eq!(out.len(), 5);
        let total: f64 = out.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-15);
        let p02: f64 = out.iter().filter(|(r, _)| *r == (0, 2)).map(|(_, p)| p).sum();
        assert!((p02 - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn enumeration_limit() {
        assert!(matches!(enumerate(3, |c| c.bits(3)), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn rng_streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| RngCoins::new(7, 1).bits(64)).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(RngCoins::new(7, 1).bits(64), RngCoins::new(7, 2).bits(64));
    }

    #[test]
    fn sampler_skips_zero_weights() {
        let s = DiscreteSampler::new(vec![0.0, 1.0, 0.0]).unwrap();
        let mut c = RngCoins::new(1, 0);
        for _ in 0..100 {
            assert_eq!(c.sample(&s), 1);
        }
    }
}
