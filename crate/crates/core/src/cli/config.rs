//! Experiment configuration: parsing of source and protocol specs, and
//! resolution of every default so that reports can be re-ingested verbatim.

use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::bounds::TailSpec;
use crate::error::{Error, Result};
use crate::probcore::{Density, DensityModel, JointSource, JointSourceDoc, SliceConfig, SpectrumTable};
use crate::protocol::{appendix_a_example, generators, ProtocolTree, RegionLaw, TranscriptLaw, TreeDoc};
use crate::simulate::RoundConfig;

/// A source given by name (`dsbs:q`, `dsbs:q:k`, `copy:k`, `indep:k`,
/// `indep:kx:ky`), by JSON file path, or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceSpec {
    Named(String),
    Inline(JointSourceDoc),
}

/// A protocol given by name (`constant`, `send-x`, `data-exchange`, `bsc:c`,
/// `xor`, `noisy-exchange:c`, `appendix-a:n`), by tree JSON path, or inline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProtocolSpec {
    Named(String),
    Inline(TreeDoc),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SimKind {
    P1,
    P2,
    P3,
    P4,
    P5,
}

/// The function `F` whose computation the direct-product threshold concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionSpec {
    /// `F = (X, Y)`
    #[default]
    Xy,
    X,
    Y,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimKind>,
    /// Hash length of Protocol 1 or first hash block of Protocol 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hash_len: Option<usize>,
    /// Shared-randomness length of Protocol 3.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Receiver slicing (Protocols 2–4).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<SliceConfig>,
    /// Transmitter slicing (Protocol 4).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice_x: Option<SliceConfig>,
    /// Per-round slicing (Protocol 5).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<Vec<RoundConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Target error used to size the budget `l_max` of Protocol 5.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tails: Option<TailSpec>,
    /// Distributions for `bound beta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

pub const DEFAULT_GAMMA: f64 = 3.0;
pub const DEFAULT_EPS: f64 = 0.01;
pub const DEFAULT_ETA: f64 = 0.01;
pub const DEFAULT_TRIALS: u64 = 10_000;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Resolves the source, replacing a file reference by the inline document.
    pub fn resolve_source(&mut self) -> Result<JointSource> {
        let spec = self.source.clone().ok_or_else(|| Error::InvalidConfig("missing source".into()))?;
        let source = parse_source(&spec)?;
        if let SourceSpec::Named(name) = &spec {
            if !is_generator_name(name) {
                self.source = Some(SourceSpec::Inline(source.to_doc()));
            }
        }
        Ok(source)
    }

    /// Resolves the protocol (default `send-x`) to a density model.
    pub fn resolve_model(&mut self) -> Result<Model> {
        let spec = self.protocol.clone().unwrap_or(ProtocolSpec::Named("send-x".into()));
        self.protocol = Some(spec.clone());
        if let ProtocolSpec::Named(name) = &spec {
            if let Some(n) = name.strip_prefix("appendix-a:") {
                let n = n.parse().map_err(|_| Error::InvalidConfig(format!("bad appendix size in '{name}'")))?;
                return Ok(Model::Region(appendix_a_example(n)?));
            }
        }
        let source = self.resolve_source()?;
        let tree = parse_protocol(&spec, &source)?;
        if let ProtocolSpec::Named(name) = &spec {
            if !is_protocol_name(name) {
                self.protocol = Some(ProtocolSpec::Inline(tree.clone().into()));
            }
        }
        let law = TranscriptLaw::from_tree(&tree, &source)?;
        Ok(Model::Law { tree, law })
    }

    pub fn gamma(&mut self) -> f64 {
        *self.gamma.get_or_insert(DEFAULT_GAMMA)
    }
}

fn is_generator_name(name: &str) -> bool {
    ["dsbs:", "copy:", "indep:"].iter().any(|p| name.starts_with(p))
}

fn is_protocol_name(name: &str) -> bool {
    matches!(name, "constant" | "send-x" | "data-exchange" | "xor")
        || ["bsc:", "noisy-exchange:", "appendix-a:"].iter().any(|p| name.starts_with(p))
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::InvalidConfig(format!("cannot parse {what} from '{s}'")))
}

pub fn parse_source(spec: &SourceSpec) -> Result<JointSource> {
    match spec {
        SourceSpec::Inline(doc) => JointSource::from_doc(doc),
        SourceSpec::Named(name) => {
            let parts: Vec<&str> = name.split(':').collect();
            match parts.as_slice() {
                ["dsbs", q] => JointSource::dsbs(num(q, "crossover")?),
                ["dsbs", q, k] => JointSource::dsbs_bits(num(q, "crossover")?, num(k, "bit width")?),
                ["copy", k] => JointSource::copy(num(k, "bit width")?),
                ["indep", k] => JointSource::independent_uniform(num(k, "bit width")?, num(k, "bit width")?),
                ["indep", kx, ky] => JointSource::independent_uniform(num(kx, "bit width")?, num(ky, "bit width")?),
                _ => {
                    let text = std::fs::read_to_string(name)
                        .map_err(|e| Error::InvalidConfig(format!("unknown source '{name}' ({e})")))?;
                    JointSource::from_json(&text)
                }
            }
        }
    }
}

fn bit_width(source: &JointSource) -> Result<u32> {
    let n = source.nx();
    if !n.is_power_of_two() || source.ny() != n {
        return Err(Error::InvalidConfig("this protocol needs equal power-of-two alphabets".into()));
    }
    Ok(n.trailing_zeros())
}

pub fn parse_protocol(spec: &ProtocolSpec, source: &JointSource) -> Result<ProtocolTree> {
    match spec {
        ProtocolSpec::Inline(doc) => ProtocolTree::try_from(doc.clone()),
        ProtocolSpec::Named(name) => {
            let parts: Vec<&str> = name.split(':').collect();
            match parts.as_slice() {
                ["constant"] => Ok(generators::constant()),
                ["send-x"] => Ok(generators::send_x(source)),
                ["data-exchange"] => Ok(generators::data_exchange(source)),
                ["xor"] => Ok(generators::xor_reply(bit_width(source)?)),
                ["bsc", c] => generators::bsc(bit_width(source)?, num(c, "crossover")?),
                ["noisy-exchange", c] => generators::noisy_exchange(bit_width(source)?, num(c, "crossover")?),
                _ => {
                    let text = std::fs::read_to_string(name)
                        .map_err(|e| Error::InvalidConfig(format!("unknown protocol '{name}' ({e})")))?;
                    ProtocolTree::from_json(&text)
                }
            }
        }
    }
}

/// A protocol together with its source, in whichever exact form is available.
#[derive(Debug, Clone)]
pub enum Model {
    Law { tree: ProtocolTree, law: TranscriptLaw },
    Region(RegionLaw),
}

impl Model {
    /// `(H(X|Y), H(Y|X))` of the source.
    pub fn conditional_entropies(&self) -> (f64, f64) {
        match self {
            Model::Law { law, .. } => (law.source().entropy_x_given_y(), law.source().entropy_y_given_x()),
            // independent uniform n-bit inputs
            Model::Region(r) => (r.n as f64, r.n as f64),
        }
    }

    /// Rounds of an explicit tree protocol.
    pub fn rounds(&self) -> Option<usize> {
        match self {
            Model::Law { tree, .. } => Some(tree.rounds()),
            Model::Region(_) => None,
        }
    }

    pub fn ic(&self) -> Result<SpectrumTable> {
        self.spectrum(Density::Ic)
    }
}

impl DensityModel for Model {
    fn spectrum(&self, d: Density) -> Result<SpectrumTable> {
        match self {
            Model::Law { law, .. } => law.spectrum(d),
            Model::Region(r) => r.spectrum(d),
        }
    }
}
