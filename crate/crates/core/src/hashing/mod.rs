//! 2-universal hashing, conditional min-entropy and randomness extraction.

pub mod affine;
pub mod extract;

pub use affine::{draw_hash, draw_hash_stream, encoding_width, AffineHash, HashFamily};
pub use extract::{extract, leftover_bound, min_entropy, Conditioning, Extraction, MinEntropyReport};
