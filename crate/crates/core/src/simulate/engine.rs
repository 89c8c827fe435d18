//! The hash exchange shared by the slice-based protocols.

use crate::error::{Error, Result};
use crate::hashing::AffineHash;
use crate::probcore::{JointSource, SliceConfig};
use crate::simulate::channel::{ChannelLog, Direction, ErrorCause, MessageKind, OverBudget};
use crate::simulate::coins::{Coins, DiscreteSampler};

/// Receiver candidates for one context (its own input and history), grouped
/// by the slice of their density `−log Q(item|context)`.
#[derive(Debug, Clone, Default)]
pub struct Codebook {
    slices: Vec<Vec<u64>>,
}

impl Codebook {
    pub fn build<I: IntoIterator<Item = (usize, f64)>>(items: I, cfg: &SliceConfig) -> Self {
        let mut slices = vec![Vec::new(); cfg.n_slices() + 1];
        for (item, q) in items {
            if q > 0.0 {
                slices[cfg.slice_of(-q.log2())].push(item as u64);
            }
        }
        Self { slices }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn slice(&self, i: usize) -> &[u64] {
        self.slices.get(i).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Integer hash schedule: `l` bits first, then `Δ` bits per further slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwSchedule {
    pub l: usize,
    pub delta: usize,
    pub n: usize,
}

impl SwSchedule {
    /// Schedule with the default first block `l = ⌈λ_min + Δ + γ⌉`.
    pub fn from_config(cfg: &SliceConfig) -> Result<Self> {
        Self::with_first_block(cfg, cfg.first_hash_len())
    }

    pub fn with_first_block(cfg: &SliceConfig, l: usize) -> Result<Self> {
        cfg.validate()?;
        if l == 0 {
            return Err(Error::InvalidConfig("first hash block must be at least one bit".into()));
        }
        Ok(Self { l, delta: cfg.integral_delta()?, n: cfg.n_slices() })
    }

    /// Hash bits known to the receiver after slice `i`.
    pub fn stream_len(&self, i: usize) -> usize {
        self.l + (i - 1) * self.delta
    }

    /// Hash bits in the worst case.
    pub fn worst_len(&self) -> usize {
        self.stream_len(self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwRun {
    pub decoded: Option<usize>,
    pub slice: usize,
    pub error: Option<ErrorCause>,
}

/// Sends `item` slice by slice until the receiver finds a unique candidate.
///
/// The first `usim.len()` stream bits are shared randomness standing in for
/// hash bits, so they are never transmitted. Every slice costs one feedback
/// bit; an error declared in slice `i` takes the place of that slice's
/// feedback, so a run ending in slice `i` always costs `L_i − k + i` bits.
#[allow(clippy::too_many_arguments)]
pub fn exchange(
    hash: &mut AffineHash,
    coins: &mut dyn Coins,
    item: usize,
    usim: &[bool],
    codebook: &Codebook,
    schedule: &SwSchedule,
    round: usize,
    dir: Direction,
    log: &mut ChannelLog,
) -> std::result::Result<SwRun, OverBudget> {
    let back = match dir {
        Direction::OneToTwo => Direction::TwoToOne,
        Direction::TwoToOne => Direction::OneToTwo,
    };
    let item = item as u64;
    let mut reference: Vec<bool> = usim.to_vec();
    for i in 1..=schedule.n {
        let len = schedule.stream_len(i);
        if len > reference.len() {
            hash.ensure(len, coins);
            log.send(round, dir, len - reference.len(), MessageKind::Hash)?;
            for j in reference.len()..len {
                reference.push(hash.bit(j, item));
            }
        }
        let mut found = None;
        let mut count = 0;
        for &c in codebook.slice(i) {
            if hash.matches(c, &reference) {
                count += 1;
                found = Some(c as usize);
                if count > 1 {
                    break;
                }
            }
        }
        if count == 1 {
            log.send(round, back, 1, MessageKind::Ack)?;
            return Ok(SwRun { decoded: found, slice: i, error: None });
        }
        log.send(round, back, 1, MessageKind::Nack)?;
        if count > 1 && i >= 2 {
            return Ok(SwRun { decoded: None, slice: i, error: Some(ErrorCause::MultipleMatch) });
        }
    }
    Ok(SwRun { decoded: None, slice: schedule.n, error: Some(ErrorCause::NoMatch) })
}

/// `k` shared uniform bits.
pub fn shared_bits(coins: &mut dyn Coins, k: usize) -> Vec<bool> {
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let take = (k - out.len()).min(32);
        let v = coins.bits(take as u32);
        for b in 0..take {
            out.push((v >> b) & 1 == 1);
        }
    }
    out
}

/// Samples from `support` conditioned on the item's first `usim.len()` hash
/// bits equalling `usim`. When no supported item qualifies the first
/// supported item is emitted.
pub fn conditioned_sample(coins: &mut dyn Coins, hash: &AffineHash, usim: &[bool], support: &[(usize, f64)]) -> usize {
    if usim.is_empty() {
        let w: Vec<f64> = support.iter().map(|(_, p)| *p).collect();
        return support[coins.choose(&w)].0;
    }
    let w: Vec<f64> = support.iter().map(|&(t, p)| if hash.matches(t as u64, usim) { p } else { 0.0 }).collect();
    if w.iter().all(|v| *v == 0.0) {
        return support[0].0;
    }
    support[coins.choose(&w)].0
}

/// Draws input pairs `(x, y)` from a source.
#[derive(Debug, Clone)]
pub struct InputSampler {
    sampler: DiscreteSampler,
    ny: usize,
}

impl InputSampler {
    pub fn new(source: &JointSource) -> Self {
        Self {
            sampler: DiscreteSampler::new(source.mass().to_vec()).expect("sources are normalized"),
            ny: source.ny(),
        }
    }

    pub fn draw(&self, coins: &mut dyn Coins) -> (usize, usize) {
        let c = coins.sample(&self.sampler);
        (c / self.ny, c % self.ny)
    }
}
