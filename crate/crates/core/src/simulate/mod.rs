//! Simulation protocols, the coin sources that drive them and the channel log.

pub mod channel;
pub mod coins;
pub mod engine;
pub mod protocols;
pub mod trials;

pub use channel::{ChannelLog, Direction, ErrorCause, Message, MessageKind, OverBudget, SimOutcome};
pub use coins::{enumerate, enumerate_into, Coins, DiscreteSampler, RngCoins};
pub use engine::{conditioned_sample, exchange, shared_bits, Codebook, InputSampler, SwRun, SwSchedule};
pub use protocols::{
    default_round_configs, index_bits, k_for_slice, receiver_spectrum, round_spectra, transmitter_spectrum, AuxLaw,
    Protocol1, Protocol2, Protocol3, Protocol4, Protocol5, RoundConfig, RoundSpectra, Simulation,
};
pub use trials::{run_trials, TrialSummary};
