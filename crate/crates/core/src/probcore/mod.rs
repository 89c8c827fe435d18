//! Finite probability substrate: sources, densities, spectra and distances.

pub mod density;
pub mod dist;
pub mod gauss;
pub mod slice;
pub mod source;
pub mod spectrum;

pub use density::{entropy_density, source_spectrum, spectrum_from_atoms, Density, DensityKind, DensityModel, ViewAtom};
pub use dist::{tv_distance, tv_distance_aligned, FiniteDistribution};
pub use gauss::{q_function, q_inv};
pub use slice::SliceConfig;
pub use source::{binary_entropy, bit_labels, JointSource, JointSourceDoc, MASS_TOLERANCE};
pub use spectrum::{MomentSummary, SpectrumTable, TailSide};
