use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid codebook: {0}")]
    Codebook(String),

    #[error("alist: {0}")]
    Alist(String),

    #[error("generator cache: {0}")]
    Generator(String),

    #[error("parity-check matrix cannot be put in systematic form (rank {rank} < {checks} checks)")]
    RankDeficient { rank: usize, checks: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("instance too large for exhaustive enumeration ({0} joint hypotheses)")]
    TooLarge(u128),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
