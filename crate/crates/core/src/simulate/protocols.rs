//! Protocols 1–5: Slepian-Wolf coding, its interactive variant, one-round
//! simulation with shared randomness, the improved one-round simulation and
//! the full multi-round simulation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hashing::{encoding_width, min_entropy, AffineHash, Conditioning};
use crate::probcore::{FiniteDistribution, JointSource, SliceConfig, SpectrumTable};
use crate::protocol::{Owner, ProtocolTree, RoundLaw, Row, TranscriptLaw, ViewKey};
use crate::simulate::channel::{ChannelLog, Direction, ErrorCause, MessageKind, SimOutcome};
use crate::simulate::coins::Coins;
use crate::simulate::engine::{conditioned_sample, exchange, shared_bits, Codebook, InputSampler, SwSchedule};

/// A runnable simulation protocol together with the law it tries to reproduce.
pub trait Simulation: Sync {
    fn name(&self) -> &'static str;
    fn source(&self) -> &JointSource;
    /// Labels of the transcript indices appearing in outcomes.
    fn transcript_labels(&self) -> Vec<String>;
    fn run(&self, coins: &mut dyn Coins) -> SimOutcome;
    /// Law of the ideal view `(Π, Π, X, Y)`.
    fn target_view(&self) -> FiniteDistribution<ViewKey>;
}

fn outcome(x: usize, y: usize, log: ChannelLog) -> SimOutcome {
    SimOutcome {
        tau_x: None,
        tau_y: None,
        x,
        y,
        bits: log.total_bits,
        error: None,
        rounds_completed: 0,
        slice: None,
        j: None,
        log,
    }
}

fn finish(mut out: SimOutcome, log: ChannelLog) -> SimOutcome {
    out.bits = log.total_bits;
    out.log = log;
    if out.error.is_some() {
        out.tau_x = None;
        out.tau_y = None;
    }
    out
}

fn send_x_view(source: &JointSource) -> FiniteDistribution<ViewKey> {
    FiniteDistribution::new(source.support().map(|(x, y, m)| (ViewKey { tau_x: Some(x), tau_y: Some(x), x, y }, m)))
        .expect("source is normalized")
}

/// Auxiliary conditional law `Q(x|y)`, stored `q[x * |Y| + y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxLaw {
    q: Vec<f64>,
    ny: usize,
}

impl AuxLaw {
    /// The true conditional `P(x|y)`.
    pub fn from_source(source: &JointSource) -> Self {
        let ny = source.ny();
        let q = (0..source.nx() * ny).map(|c| source.p_x_given_y(c / ny, c % ny)).collect();
        Self { q, ny }
    }

    pub fn new(source: &JointSource, q: Vec<f64>) -> Result<Self> {
        let (nx, ny) = (source.nx(), source.ny());
        if q.len() != nx * ny {
            return Err(Error::AlphabetMismatch(format!("aux law has {} entries, expected {}", q.len(), nx * ny)));
        }
        for y in 0..ny {
            let total: f64 = (0..nx).map(|x| q[x * ny + y]).sum();
            if (total - 1.0).abs() > 1e-9 || (0..nx).any(|x| q[x * ny + y] < 0.0) {
                return Err(Error::InvalidDistribution(format!("Q(.|y) for y = {y} is not a distribution")));
            }
        }
        Ok(Self { q, ny })
    }

    pub fn q(&self, x: usize, y: usize) -> f64 {
        self.q[x * self.ny + y]
    }

    /// `h_Q(x|y) = −log Q(x|y)` (infinite off the support).
    pub fn density(&self, x: usize, y: usize) -> f64 {
        -self.q(x, y).log2()
    }

    /// Spectrum of `h_Q(X|Y)` under the true source (pairs with `Q = 0` land at a large sentinel).
    pub fn spectrum(&self, source: &JointSource) -> Result<SpectrumTable> {
        SpectrumTable::from_weighted(source.support().map(|(x, y, m)| {
            let h = self.density(x, y);
            (if h.is_finite() { h } else { 1e300 }, m)
        }))
    }
}

// ---------------------------------------------------------------- Protocol 1

/// One-shot Slepian-Wolf coding of `X` with an `l`-bit hash and a typical-set decoder.
#[derive(Debug, Clone)]
pub struct Protocol1 {
    source: JointSource,
    inputs: InputSampler,
    aux: AuxLaw,
    l: usize,
    gamma: f64,
    width: u32,
    typical: Vec<Vec<u64>>,
}

impl Protocol1 {
    pub fn new(source: &JointSource, l: usize, gamma: f64, aux: Option<AuxLaw>) -> Result<Self> {
        if !(gamma >= 0.0 && (l as f64) > gamma) {
            return Err(Error::InvalidConfig(format!("need l > gamma >= 0, got l = {l}, gamma = {gamma}")));
        }
        let aux = aux.unwrap_or_else(|| AuxLaw::from_source(source));
        let threshold = l as f64 - gamma;
        let typical = (0..source.ny())
            .map(|y| {
                (0..source.nx())
                    .filter(|&x| aux.q(x, y) > 0.0 && aux.density(x, y) <= threshold + 1e-12)
                    .map(|x| x as u64)
                    .collect()
            })
            .collect();
        Ok(Self {
            source: source.clone(),
            inputs: InputSampler::new(source),
            width: encoding_width(source.nx()),
            aux,
            l,
            gamma,
            typical,
        })
    }

    pub fn is_typical(&self, x: usize, y: usize) -> bool {
        self.aux.q(x, y) > 0.0 && self.aux.density(x, y) <= self.l as f64 - self.gamma + 1e-12
    }

    /// `P(T^c)`: mass of pairs outside the typical set.
    pub fn atypical_mass(&self) -> f64 {
        self.source.support().filter(|(x, y, _)| !self.is_typical(*x, *y)).map(|(_, _, m)| m).sum()
    }

    /// Error bound `P(T^c) + 2^{−γ}`.
    pub fn error_bound(&self) -> f64 {
        self.atypical_mass() + 2f64.powf(-self.gamma)
    }
}

impl Simulation for Protocol1 {
    fn name(&self) -> &'static str {
        "p1"
    }

    fn source(&self) -> &JointSource {
        &self.source
    }

    fn transcript_labels(&self) -> Vec<String> {
        self.source.x_alphabet().to_vec()
    }

    fn run(&self, coins: &mut dyn Coins) -> SimOutcome {
        let (x, y) = self.inputs.draw(coins);
        let mut log = ChannelLog::new();
        let mut out = outcome(x, y, ChannelLog::new());
        let hash = AffineHash::draw(self.width, self.l, coins).expect("valid width");
        log.send(1, Direction::OneToTwo, self.l, MessageKind::Hash).expect("no budget");
        let reference: Vec<bool> = (0..self.l).map(|j| hash.bit(j, x as u64)).collect();
        let mut matches = self.typical[y].iter().filter(|&&c| hash.matches(c, &reference));
        let first = matches.next();
        let second = matches.next();
        out.tau_x = Some(x);
        out.rounds_completed = 1;
        out.slice = Some(1);
        match (first, second) {
            (Some(&c), None) => out.tau_y = Some(c as usize),
            (None, _) => out.error = Some(ErrorCause::NoMatch),
            _ => out.error = Some(ErrorCause::MultipleMatch),
        }
        if out.error.is_some() && !self.is_typical(x, y) {
            out.error = Some(ErrorCause::Tail);
        }
        finish(out, log)
    }

    fn target_view(&self) -> FiniteDistribution<ViewKey> {
        send_x_view(&self.source)
    }
}

// ---------------------------------------------------------------- Protocol 2

/// Interactive Slepian-Wolf coding with spectrum slicing and ACK/NACK feedback.
#[derive(Debug, Clone)]
pub struct Protocol2 {
    source: JointSource,
    inputs: InputSampler,
    aux: AuxLaw,
    cfg: SliceConfig,
    schedule: SwSchedule,
    width: u32,
    codebooks: Vec<Codebook>,
}

impl Protocol2 {
    /// `l` defaults to `⌈λ_min + Δ + γ⌉`.
    pub fn new(source: &JointSource, cfg: SliceConfig, l: Option<usize>, aux: Option<AuxLaw>) -> Result<Self> {
        let schedule = match l {
            Some(l) => SwSchedule::with_first_block(&cfg, l)?,
            None => SwSchedule::from_config(&cfg)?,
        };
        if (schedule.l as f64) < cfg.gamma {
            return Err(Error::InvalidConfig(format!("need l >= gamma, got l = {}", schedule.l)));
        }
        let aux = aux.unwrap_or_else(|| AuxLaw::from_source(source));
        let codebooks = (0..source.ny())
            .map(|y| Codebook::build((0..source.nx()).map(|x| (x, aux.q(x, y))), &cfg))
            .collect();
        Ok(Self {
            source: source.clone(),
            inputs: InputSampler::new(source),
            width: encoding_width(source.nx()),
            aux,
            cfg,
            schedule,
            codebooks,
        })
    }

    pub fn config(&self) -> &SliceConfig {
        &self.cfg
    }

    pub fn schedule(&self) -> &SwSchedule {
        &self.schedule
    }

    /// Slice of the pair `(x, y)` (0 for the tail set).
    pub fn slice_of(&self, x: usize, y: usize) -> usize {
        if self.aux.q(x, y) <= 0.0 {
            0
        } else {
            self.cfg.slice_of(self.aux.density(x, y))
        }
    }

    /// `Pr[(X,Y) ∈ T⁽⁰⁾]`.
    pub fn tail_mass(&self) -> f64 {
        self.source.support().filter(|(x, y, _)| self.slice_of(*x, *y) == 0).map(|(_, _, m)| m).sum()
    }

    /// Error bound `Pr[T⁽⁰⁾] + N·2^{−γ}`.
    pub fn error_bound(&self) -> f64 {
        self.tail_mass() + self.schedule.n as f64 * 2f64.powf(-self.cfg.gamma)
    }

    /// Bits sent when the exchange ends in slice `i`: `l + (i−1)Δ + i`.
    pub fn bits_in_slice(&self, i: usize) -> usize {
        self.schedule.stream_len(i) + i
    }

    /// Per-pair error bound `i·2^{λ_min + Δ − l}` for a pair in slice `i ≥ 1`.
    pub fn slice_error_bound(&self, i: usize) -> f64 {
        i as f64 * 2f64.powf(self.cfg.lambda_min + self.cfg.delta - self.schedule.l as f64)
    }
}

impl Simulation for Protocol2 {
    fn name(&self) -> &'static str {
        "p2"
    }

    fn source(&self) -> &JointSource {
        &self.source
    }

    fn transcript_labels(&self) -> Vec<String> {
        self.source.x_alphabet().to_vec()
    }

    fn run(&self, coins: &mut dyn Coins) -> SimOutcome {
        let (x, y) = self.inputs.draw(coins);
        let mut log = ChannelLog::new();
        let mut out = outcome(x, y, ChannelLog::new());
        let mut hash = AffineHash::empty(self.width).expect("valid width");
        let run = exchange(&mut hash, coins, x, &[], &self.codebooks[y], &self.schedule, 1, Direction::OneToTwo, &mut log)
            .expect("no budget");
        out.tau_x = Some(x);
        out.tau_y = run.decoded;
        out.slice = Some(run.slice);
        out.rounds_completed = 1;
        out.error = run.error;
        if out.error.is_some() && self.slice_of(x, y) == 0 {
            out.error = Some(ErrorCause::Tail);
        }
        finish(out, log)
    }

    fn target_view(&self) -> FiniteDistribution<ViewKey> {
        send_x_view(&self.source)
    }
}

// ------------------------------------------------------- Protocols 3 and 4

fn round_view(round: &RoundLaw) -> FiniteDistribution<ViewKey> {
    let s = round.source();
    FiniteDistribution::new(s.support().flat_map(|(x, y, m)| {
        round.row_x(x).iter().map(move |&(t, p)| (ViewKey { tau_x: Some(t), tau_y: Some(t), x, y }, m * p))
    }))
    .expect("round law is normalized")
}

fn receiver_codebooks(round: &RoundLaw, cfg: &SliceConfig) -> Vec<Codebook> {
    (0..round.source().ny()).map(|y| Codebook::build(round.row_y(y).iter().copied(), cfg)).collect()
}

/// Spectrum of `h(Π₁|Y) = −log P(Π₁|Y)`.
pub fn receiver_spectrum(round: &RoundLaw) -> Result<SpectrumTable> {
    let s = round.source();
    let mut w = Vec::new();
    for (x, y, m) in s.support() {
        for &(t, p) in round.row_x(x) {
            w.push((-round.p_tau_given_y(t, y).log2(), m * p));
        }
    }
    SpectrumTable::from_weighted(w)
}

/// Spectrum of `h(Π₁|X) = −log P(Π₁|X)`.
pub fn transmitter_spectrum(round: &RoundLaw) -> Result<SpectrumTable> {
    let s = round.source();
    let mut w = Vec::new();
    for x in 0..s.nx() {
        for &(_, p) in round.row_x(x) {
            w.push((-p.log2(), s.px(x) * p));
        }
    }
    SpectrumTable::from_weighted(w)
}

/// One-round simulation: `k` shared bits stand in for the first `k` hash bits.
#[derive(Debug, Clone)]
pub struct Protocol3 {
    round: RoundLaw,
    inputs: InputSampler,
    cfg: SliceConfig,
    schedule: SwSchedule,
    k: usize,
    width: u32,
    codebooks: Vec<Codebook>,
}

impl Protocol3 {
    /// `k` is clamped to the worst-case hash length.
    pub fn new(round: &RoundLaw, k: usize, cfg: SliceConfig) -> Result<Self> {
        let schedule = SwSchedule::from_config(&cfg)?;
        Ok(Self {
            inputs: InputSampler::new(round.source()),
            width: encoding_width(round.n_transcripts()),
            codebooks: receiver_codebooks(round, &cfg),
            k: k.min(schedule.worst_len()),
            round: round.clone(),
            cfg,
            schedule,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn schedule(&self) -> &SwSchedule {
        &self.schedule
    }

    /// `Pr[(Π₁, Y) ∈ T⁽⁰⁾]`.
    pub fn tail_mass(&self) -> Result<f64> {
        Ok(self.cfg.tail_mass(&receiver_spectrum(&self.round)?))
    }

    /// `H_min(P_{Π₁X} | Q_X)` with the optimal `Q_X`.
    pub fn min_entropy(&self) -> Result<f64> {
        Ok(min_entropy(&self.round.joint_tau_x(), &Conditioning::Optimize)?.value)
    }

    /// `Pr[T⁽⁰⁾] + N·2^{−γ} + ½·√(2^{k − H_min})`.
    pub fn error_bound(&self) -> Result<f64> {
        Ok(self.tail_mass()?
            + self.schedule.n as f64 * 2f64.powf(-self.cfg.gamma)
            + 0.5 * 2f64.powf((self.k as f64 - self.min_entropy()?) / 2.0))
    }
}

impl Simulation for Protocol3 {
    fn name(&self) -> &'static str {
        "p3"
    }

    fn source(&self) -> &JointSource {
        self.round.source()
    }

    fn transcript_labels(&self) -> Vec<String> {
        self.round.labels().to_vec()
    }

    fn run(&self, coins: &mut dyn Coins) -> SimOutcome {
        let (x, y) = self.inputs.draw(coins);
        let mut log = ChannelLog::new();
        let mut out = outcome(x, y, ChannelLog::new());
        let mut hash = AffineHash::empty(self.width).expect("valid width");
        hash.ensure(self.k, coins);
        let usim = shared_bits(coins, self.k);
        let tau = conditioned_sample(coins, &hash, &usim, self.round.row_x(x));
        let run = exchange(&mut hash, coins, tau, &usim, &self.codebooks[y], &self.schedule, 1, Direction::OneToTwo, &mut log)
            .expect("no budget");
        out.tau_x = Some(tau);
        out.tau_y = run.decoded;
        out.slice = Some(run.slice);
        out.rounds_completed = 1;
        out.error = run.error;
        if out.error.is_some() && self.cfg.slice_of(-self.round.p_tau_given_y(tau, y).log2()) == 0 {
            out.error = Some(ErrorCause::Tail);
        }
        finish(out, log)
    }

    fn target_view(&self) -> FiniteDistribution<ViewKey> {
        round_view(&self.round)
    }
}

/// Bits needed to send a slice index `J ∈ {0..N}`: `⌈log₂ N⌉ + 1`.
pub fn index_bits(n: usize) -> usize {
    (n as f64).log2().ceil() as usize + 1
}

/// Shared-randomness length for slice `j`:
/// `⌊λ_min + (j−1)Δ − 2 log N − 2γ + 2⌋`, clamped to `[0, cap]`.
pub fn k_for_slice(cfg_x: &SliceConfig, j: usize, gamma: f64, cap: usize) -> usize {
    let n = cfg_x.n_slices() as f64;
    let k = cfg_x.lambda_min + (j as f64 - 1.0) * cfg_x.delta - 2.0 * n.log2() - 2.0 * gamma + 2.0;
    if k <= 0.0 {
        0
    } else {
        (k.floor() as usize).min(cap)
    }
}

/// Entries of a conditional row tagged with their slice under `cfg`.
fn tag_slices(row: &Row, cfg: &SliceConfig) -> Vec<(usize, f64, usize)> {
    row.iter().map(|&(t, p)| (t, p, cfg.slice_of(-p.log2()))).collect()
}

fn j_weights(tagged: &[(usize, f64, usize)], n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    for &(_, p, j) in tagged {
        w[j] += p;
    }
    w
}

/// Improved one-round simulation: the transmitter first announces the slice
/// `J` of `h(Π₁|X)` and extracts shared randomness matched to that slice.
#[derive(Debug, Clone)]
pub struct Protocol4 {
    round: RoundLaw,
    inputs: InputSampler,
    cfg_y: SliceConfig,
    cfg_x: SliceConfig,
    gamma: f64,
    schedule: SwSchedule,
    width: u32,
    codebooks: Vec<Codebook>,
    tagged: Vec<Vec<(usize, f64, usize)>>,
    j_weights: Vec<Vec<f64>>,
    p_j: Vec<f64>,
    good: Vec<bool>,
    k_of_j: Vec<usize>,
}

impl Protocol4 {
    /// `gamma` overrides the slack stored in either slice configuration.
    pub fn new(round: &RoundLaw, cfg_y: SliceConfig, cfg_x: SliceConfig, gamma: f64) -> Result<Self> {
        cfg_x.validate()?;
        let cfg_y = SliceConfig { gamma, ..cfg_y };
        let cfg_x = SliceConfig { gamma, ..cfg_x };
        let schedule = SwSchedule::from_config(&cfg_y)?;
        let nx_slices = cfg_x.n_slices();
        let p_j = cfg_x.slice_masses(&transmitter_spectrum(round)?);
        let threshold = 1.0 / (nx_slices * nx_slices) as f64;
        let good = p_j.iter().enumerate().map(|(j, p)| j > 0 && *p >= threshold - 1e-12).collect();
        let k_of_j = (0..=nx_slices).map(|j| if j == 0 { 0 } else { k_for_slice(&cfg_x, j, gamma, schedule.worst_len()) }).collect();
        let tagged: Vec<_> = (0..round.source().nx()).map(|x| tag_slices(round.row_x(x), &cfg_x)).collect();
        let j_weights = tagged.iter().map(|t| j_weights(t, nx_slices)).collect();
        Ok(Self {
            inputs: InputSampler::new(round.source()),
            width: encoding_width(round.n_transcripts()),
            codebooks: receiver_codebooks(round, &cfg_y),
            round: round.clone(),
            cfg_y,
            cfg_x,
            gamma,
            schedule,
            tagged,
            j_weights,
            p_j,
            good,
            k_of_j,
        })
    }

    pub fn good_indices(&self) -> Vec<usize> {
        (0..self.good.len()).filter(|&j| self.good[j]).collect()
    }

    pub fn p_j(&self) -> &[f64] {
        &self.p_j
    }

    pub fn k_of_j(&self, j: usize) -> usize {
        self.k_of_j[j]
    }

    pub fn schedule(&self) -> &SwSchedule {
        &self.schedule
    }

    pub fn j_bits(&self) -> usize {
        index_bits(self.cfg_x.n_slices())
    }

    pub fn tail_masses(&self) -> Result<(f64, f64)> {
        Ok((
            self.cfg_y.tail_mass(&receiver_spectrum(&self.round)?),
            self.cfg_x.tail_mass(&transmitter_spectrum(&self.round)?),
        ))
    }

    /// `Pr[T_Y⁽⁰⁾] + Pr[T_X⁽⁰⁾] + (N_Y + 1)·2^{−γ} + 1/N_X`.
    pub fn error_bound(&self) -> Result<f64> {
        let (ty, tx) = self.tail_masses()?;
        Ok(ty + tx
            + (self.cfg_y.n_slices() as f64 + 1.0) * 2f64.powf(-self.gamma)
            + 1.0 / self.cfg_x.n_slices() as f64)
    }

    /// `(h(τ|y) − h(τ|x) + N_Y + 3 log N_X + Δ_Y + Δ_X + 3γ)₊` for one triple.
    pub fn bit_bound(&self, tau: usize, x: usize, y: usize) -> f64 {
        let hy = -self.round.p_tau_given_y(tau, y).log2();
        let hx = -self.round.p_tau_given_x(tau, x).log2();
        (hy - hx
            + self.cfg_y.n_slices() as f64
            + 3.0 * (self.cfg_x.n_slices() as f64).log2()
            + self.cfg_y.delta
            + self.cfg_x.delta
            + 3.0 * self.gamma)
            .max(0.0)
    }

    /// Whether `(τ, y)` lies in the receiver's tail set.
    pub fn receiver_tail(&self, tau: usize, y: usize) -> bool {
        self.cfg_y.slice_of(-self.round.p_tau_given_y(tau, y).log2()) == 0
    }
}

impl Simulation for Protocol4 {
    fn name(&self) -> &'static str {
        "p4"
    }

    fn source(&self) -> &JointSource {
        self.round.source()
    }

    fn transcript_labels(&self) -> Vec<String> {
        self.round.labels().to_vec()
    }

    fn run(&self, coins: &mut dyn Coins) -> SimOutcome {
        let (x, y) = self.inputs.draw(coins);
        let mut log = ChannelLog::new();
        let mut out = outcome(x, y, ChannelLog::new());
        let j = coins.choose(&self.j_weights[x]);
        out.j = Some(j);
        log.send(1, Direction::OneToTwo, self.j_bits(), MessageKind::IndexJ).expect("no budget");
        if !self.good[j] {
            out.error = Some(ErrorCause::BadJ);
            return finish(out, log);
        }
        let k = self.k_of_j[j];
        let mut hash = AffineHash::empty(self.width).expect("valid width");
        hash.ensure(k, coins);
        let usim = shared_bits(coins, k);
        let support: Vec<(usize, f64)> =
            self.tagged[x].iter().filter(|e| e.2 == j).map(|&(t, p, _)| (t, p)).collect();
        let tau = conditioned_sample(coins, &hash, &usim, &support);
        let run = exchange(&mut hash, coins, tau, &usim, &self.codebooks[y], &self.schedule, 1, Direction::OneToTwo, &mut log)
            .expect("no budget");
        out.tau_x = Some(tau);
        out.tau_y = run.decoded;
        out.slice = Some(run.slice);
        out.rounds_completed = 1;
        out.error = run.error;
        if out.error.is_some() && self.receiver_tail(tau, y) {
            out.error = Some(ErrorCause::Tail);
        }
        finish(out, log)
    }

    fn target_view(&self) -> FiniteDistribution<ViewKey> {
        round_view(&self.round)
    }
}

// ---------------------------------------------------------------- Protocol 5

/// Slice configurations of one round: the transmitter's density
/// `h(Π_t | own input, Π^{t−1})` and the receiver's `h(Π_t | own input, Π^{t−1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundConfig {
    pub tx: SliceConfig,
    pub rx: SliceConfig,
}

/// Exact spectra of the per-round densities of a tree protocol.
#[derive(Debug, Clone)]
pub struct RoundSpectra {
    pub round: usize,
    /// Probability that round `t` takes place; the spectra are conditional on it.
    pub reach: f64,
    pub tx: SpectrumTable,
    pub rx: SpectrumTable,
}

#[derive(Debug, Clone)]
struct NodeCache {
    round: usize,
    tx: Owner,
    /// Per transmitter symbol: `(local end index, prob)`.
    tx_rows: Vec<Row>,
    /// Per receiver symbol: `(local end index, prob)`.
    rx_rows: Vec<Row>,
    ends: Vec<usize>,
}

fn node_cache(tree: &ProtocolTree, source: &JointSource, v: usize) -> NodeCache {
    let tx = tree.owner(v).expect("round starts are internal");
    let (nx, ny) = (source.nx(), source.ny());
    let ends = tree.round_ends(v);
    let (n_tx, n_rx) = match tx {
        Owner::Party1 => (nx, ny),
        Owner::Party2 => (ny, nx),
    };
    let tx_rows: Vec<Row> = (0..n_tx)
        .map(|s| ends.iter().enumerate().filter(|(_, e)| e.prob[s] > 0.0).map(|(i, e)| (i, e.prob[s])).collect())
        .collect();
    let (a1, a2) = tree.path_weights(v, nx, ny);
    let mut rx_rows = Vec::with_capacity(n_rx);
    for r in 0..n_rx {
        // posterior of the transmitter's input given the receiver's input and the history
        let post: Vec<f64> = (0..n_tx)
            .map(|s| match tx {
                Owner::Party1 => source.p(s, r) * a1[s],
                Owner::Party2 => source.p(r, s) * a2[s],
            })
            .collect();
        let total: f64 = post.iter().sum();
        let mut acc = vec![0.0; ends.len()];
        if total > 0.0 {
            for (s, w) in post.iter().enumerate() {
                if *w > 0.0 {
                    for (i, e) in ends.iter().enumerate() {
                        acc[i] += w / total * e.prob[s];
                    }
                }
            }
        }
        rx_rows.push(acc.into_iter().enumerate().filter(|(_, p)| *p > 0.0).collect());
    }
    NodeCache { round: tree.round_of(v), tx, tx_rows, rx_rows, ends: ends.iter().map(|e| e.node).collect() }
}

/// Per-round density spectra under the true law of the protocol.
pub fn round_spectra(tree: &ProtocolTree, source: &JointSource) -> Result<Vec<RoundSpectra>> {
    tree.check_alphabets(source.nx(), source.ny())?;
    let d = tree.rounds();
    let mut tx_atoms: Vec<Vec<(f64, f64)>> = vec![Vec::new(); d];
    let mut rx_atoms: Vec<Vec<(f64, f64)>> = vec![Vec::new(); d];
    let mut reach = vec![0.0; d];
    let (nx, ny) = (source.nx(), source.ny());
    for v in tree.round_starts() {
        let cache = node_cache(tree, source, v);
        let t = cache.round - 1;
        let (a1, a2) = tree.path_weights(v, nx, ny);
        for (x, y, m) in source.support() {
            let w = m * a1[x] * a2[y];
            if w <= 0.0 {
                continue;
            }
            reach[t] += w;
            let (s_tx, s_rx) = match cache.tx {
                Owner::Party1 => (x, y),
                Owner::Party2 => (y, x),
            };
            for &(i, p) in &cache.tx_rows[s_tx] {
                let q = cache.rx_rows[s_rx].iter().find(|e| e.0 == i).map(|e| e.1).unwrap_or(0.0);
                tx_atoms[t].push((-p.log2(), w * p));
                rx_atoms[t].push((-q.log2(), w * p));
            }
        }
    }
    (0..d)
        .map(|t| {
            let r = reach[t];
            Ok(RoundSpectra {
                round: t + 1,
                reach: r,
                tx: SpectrumTable::from_weighted(tx_atoms[t].iter().map(|(v, p)| (*v, p / r)))?,
                rx: SpectrumTable::from_weighted(rx_atoms[t].iter().map(|(v, p)| (*v, p / r)))?,
            })
        })
        .collect()
}

/// Default per-round configurations: `mean ± 3σ` slicing of each round density.
pub fn default_round_configs(tree: &ProtocolTree, source: &JointSource, gamma: f64) -> Result<Vec<RoundConfig>> {
    Ok(round_spectra(tree, source)?
        .iter()
        .map(|s| RoundConfig { tx: SliceConfig::around(&s.tx, gamma), rx: SliceConfig::around(&s.rx, gamma) })
        .collect())
}

#[derive(Debug, Clone)]
struct RoundPlan {
    cfg_tx: SliceConfig,
    cfg_rx: SliceConfig,
    schedule: SwSchedule,
    good: Vec<bool>,
    k_of_j: Vec<usize>,
    j_bits: usize,
}

/// Full simulation: the improved one-round simulation applied round after
/// round with the roles alternating, under an optional total budget `l_max`.
#[derive(Debug, Clone)]
pub struct Protocol5 {
    tree: ProtocolTree,
    law: TranscriptLaw,
    inputs: InputSampler,
    gamma: f64,
    l_max: Option<usize>,
    plans: Vec<RoundPlan>,
    spectra: Vec<RoundSpectra>,
    caches: Vec<Option<NodeCache>>,
    /// Per round-start node and transmitter symbol: tagged rows and J weights.
    tagged: Vec<Vec<Vec<(usize, f64, usize)>>>,
    j_weights: Vec<Vec<Vec<f64>>>,
    rx_books: Vec<Vec<Codebook>>,
    width: u32,
}

impl Protocol5 {
    pub fn new(
        tree: &ProtocolTree,
        source: &JointSource,
        configs: &[RoundConfig],
        gamma: f64,
        l_max: Option<usize>,
    ) -> Result<Self> {
        let law = TranscriptLaw::from_tree(tree, source)?;
        let d = tree.rounds();
        if configs.len() != d {
            return Err(Error::InvalidConfig(format!("{} round configurations for a {d}-round protocol", configs.len())));
        }
        if l_max == Some(0) {
            return Err(Error::InvalidConfig("l_max must be positive".into()));
        }
        let spectra = round_spectra(tree, source)?;
        let mut plans = Vec::with_capacity(d);
        for (c, s) in configs.iter().zip(&spectra) {
            let cfg_tx = SliceConfig { gamma, ..c.tx };
            let cfg_rx = SliceConfig { gamma, ..c.rx };
            cfg_tx.validate()?;
            let schedule = SwSchedule::from_config(&cfg_rx)?;
            let n = cfg_tx.n_slices();
            let p_j = cfg_tx.slice_masses(&s.tx);
            let threshold = 1.0 / (n * n) as f64;
            plans.push(RoundPlan {
                good: p_j.iter().enumerate().map(|(j, p)| j > 0 && *p >= threshold - 1e-12).collect(),
                k_of_j: (0..=n).map(|j| if j == 0 { 0 } else { k_for_slice(&cfg_tx, j, gamma, schedule.worst_len()) }).collect(),
                j_bits: index_bits(n),
                cfg_tx,
                cfg_rx,
                schedule,
            });
        }
        let n_nodes = tree.nodes().len();
        let mut caches = vec![None; n_nodes];
        let mut tagged = vec![Vec::new(); n_nodes];
        let mut jw = vec![Vec::new(); n_nodes];
        let mut books = vec![Vec::new(); n_nodes];
        let mut max_ends = 1;
        for v in tree.round_starts() {
            let c = node_cache(tree, source, v);
            let plan = &plans[c.round - 1];
            max_ends = max_ends.max(c.ends.len());
            tagged[v] = c.tx_rows.iter().map(|r| tag_slices(r, &plan.cfg_tx)).collect();
            jw[v] = tagged[v].iter().map(|t| j_weights(t, plan.cfg_tx.n_slices())).collect();
            books[v] = c.rx_rows.iter().map(|r| Codebook::build(r.iter().copied(), &plan.cfg_rx)).collect();
            caches[v] = Some(c);
        }
        Ok(Self {
            tree: tree.clone(),
            law,
            inputs: InputSampler::new(source),
            gamma,
            l_max,
            plans,
            spectra,
            caches,
            tagged,
            j_weights: jw,
            rx_books: books,
            width: encoding_width(max_ends),
        })
    }

    pub fn law(&self) -> &TranscriptLaw {
        &self.law
    }

    pub fn round_spectra(&self) -> &[RoundSpectra] {
        &self.spectra
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn l_max(&self) -> Option<usize> {
        self.l_max
    }

    /// Effective configurations (with the common `γ`).
    pub fn configs(&self) -> Vec<RoundConfig> {
        self.plans.iter().map(|p| RoundConfig { tx: p.cfg_tx, rx: p.cfg_rx }).collect()
    }

    /// Unconditional tail probabilities `(Pr[T_rx⁽⁰⁾], Pr[T_tx⁽⁰⁾])` per round.
    pub fn tail_masses(&self) -> Vec<(f64, f64)> {
        self.plans
            .iter()
            .zip(&self.spectra)
            .map(|(p, s)| (s.reach * p.cfg_rx.tail_mass(&s.rx), s.reach * p.cfg_tx.tail_mass(&s.tx)))
            .collect()
    }

    fn leaf_out(&self, v: usize) -> Option<usize> {
        self.tree.leaf_index(v)
    }
}

impl Simulation for Protocol5 {
    fn name(&self) -> &'static str {
        "p5"
    }

    fn source(&self) -> &JointSource {
        self.law.source()
    }

    fn transcript_labels(&self) -> Vec<String> {
        self.law.labels().to_vec()
    }

    fn run(&self, coins: &mut dyn Coins) -> SimOutcome {
        let (x, y) = self.inputs.draw(coins);
        let mut log = match self.l_max {
            Some(b) => ChannelLog::with_budget(b),
            None => ChannelLog::new(),
        };
        let mut out = outcome(x, y, ChannelLog::new());
        // current node estimate of party 1 and party 2
        let mut node = [0usize, 0usize];
        for t in 1..=self.plans.len() {
            let tx = Owner::of_round(t);
            let (ti, ri) = match tx {
                Owner::Party1 => (0, 1),
                Owner::Party2 => (1, 0),
            };
            let (s_tx, s_rx) = match tx {
                Owner::Party1 => (x, y),
                Owner::Party2 => (y, x),
            };
            let v_tx = node[ti];
            if self.tree.owner(v_tx) != Some(tx) {
                break;
            }
            let cache = self.caches[v_tx].as_ref().expect("round start");
            let plan = &self.plans[cache.round - 1];
            let dir = match tx {
                Owner::Party1 => Direction::OneToTwo,
                Owner::Party2 => Direction::TwoToOne,
            };
            let j = coins.choose(&self.j_weights[v_tx][s_tx]);
            out.j = Some(j);
            if log.send(t, dir, plan.j_bits, MessageKind::IndexJ).is_err() {
                out.error = Some(ErrorCause::BudgetExceeded);
                return finish(out, log);
            }
            if !plan.good[j] {
                out.error = Some(ErrorCause::BadJ);
                return finish(out, log);
            }
            let k = plan.k_of_j[j];
            let mut hash = AffineHash::empty(self.width).expect("valid width");
            hash.ensure(k, coins);
            let usim = shared_bits(coins, k);
            let support: Vec<(usize, f64)> =
                self.tagged[v_tx][s_tx].iter().filter(|e| e.2 == j).map(|&(i, p, _)| (i, p)).collect();
            let local = conditioned_sample(coins, &hash, &usim, &support);
            let v_rx = node[ri];
            let rx_cache = if self.tree.owner(v_rx) == Some(tx) { self.caches[v_rx].as_ref() } else { None };
            let empty = Codebook::empty();
            let book = match rx_cache {
                Some(_) => &self.rx_books[v_rx][s_rx],
                None => &empty,
            };
            let run = match exchange(&mut hash, coins, local, &usim, book, &plan.schedule, t, dir, &mut log) {
                Ok(r) => r,
                Err(_) => {
                    out.error = Some(ErrorCause::BudgetExceeded);
                    return finish(out, log);
                }
            };
            out.slice = Some(run.slice);
            if let Some(e) = run.error {
                let q = rx_cache
                    .map(|c| c.rx_rows[s_rx].iter().find(|r| r.0 == local).map(|r| r.1).unwrap_or(0.0))
                    .unwrap_or(0.0);
                let in_tail = q <= 0.0 || plan.cfg_rx.slice_of(-q.log2()) == 0;
                out.error = Some(if in_tail { ErrorCause::Tail } else { e });
                return finish(out, log);
            }
            node[ti] = cache.ends[local];
            let decoded = run.decoded.expect("decoded on success");
            node[ri] = rx_cache.expect("candidates came from the receiver's node").ends[decoded];
            out.rounds_completed = t;
        }
        out.tau_x = self.leaf_out(node[0]);
        out.tau_y = self.leaf_out(node[1]);
        if out.tau_x.is_none() || out.tau_y.is_none() {
            out.error = Some(ErrorCause::NoMatch);
        }
        finish(out, log)
    }

    fn target_view(&self) -> FiniteDistribution<ViewKey> {
        self.law.true_view()
    }
}
