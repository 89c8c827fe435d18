//! Information complexity density toolkit.
//!
//! Exact spectra of information densities for finite two-party protocols,
//! the spectrum-sliced simulation protocols built from 2-universal hashing,
//! and computable single-shot lower, upper and second-order bounds on the
//! communication needed to simulate a protocol.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod eval;
pub mod hashing;
pub mod probcore;
pub mod protocol;
pub mod simulate;

pub use error::{Error, Result};
