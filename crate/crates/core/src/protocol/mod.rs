//! Tree protocols, their transcript laws, and the named example protocols.

pub mod appendix;
pub mod composite;
pub mod generators;
pub mod law;
pub mod tree;

pub use appendix::{appendix_a_example, Region, RegionLaw};
pub use composite::{mixed_protocol, product_protocol, MixedLaw, MixedSummary, ProductLaw};
pub use generators::data_exchange_protocol;
pub use law::{RoundLaw, Row, TranscriptLaw, ViewKey};
pub use tree::{Node, Owner, ProtocolTree, RoundEnd, TreeDoc};

use crate::error::Result;
use crate::probcore::JointSource;

/// Exact transcript law of a tree protocol on a source.
pub fn transcript_law(tree: &ProtocolTree, source: &JointSource) -> Result<TranscriptLaw> {
    TranscriptLaw::from_tree(tree, source)
}
