use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero-probability atom: {0}")]
    ZeroMassAtom(String),
    #[error("distributions are defined on different universes")]
    MismatchedSupport,
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("support of P_Z is not contained in the support of Q_Z")]
    SupportViolation,
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("essential intervals leak {actual} of tail mass, more than the declared {declared}")]
    TailMassViolated { declared: f64, actual: f64 },
    #[error("budget infeasible: eps' = {eps_prime} is not below the target {target}")]
    InfeasibleBudget { eps_prime: f64, target: f64 },
    #[error("spectrum has zero variance")]
    ZeroVariance,
    #[error("parameter out of range: {0}")]
    ParameterRange(String),
    #[error("randomness space too large for exact enumeration ({atoms} atoms, limit {limit})")]
    TooLarge { atoms: u64, limit: u64 },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
