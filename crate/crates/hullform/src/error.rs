use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{}: byte {offset}: {message}", path.display())]
    Binary { path: PathBuf, offset: u64, message: String },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: line {line}: {source}", path.display())]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Toml {
        path: PathBuf,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("nothing to read: {0}")]
    Missing(String),
    #[error("{} already exists (pass --force to overwrite)", .0.display())]
    Exists(PathBuf),
    #[error("archive {} was written by a different configuration (hash {found:016x}, expected {expected:016x})", path.display())]
    ConfigMismatch { path: PathBuf, found: u64, expected: u64 },
    #[error("{}: {source}", path.display())]
    Data {
        path: PathBuf,
        #[source]
        source: hullform_core::Error,
    },
    #[error(transparent)]
    Core(#[from] hullform_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use hullform_core::Error as E;
        match self {
            Error::Config(_) | Error::Exists(_) | Error::Toml { .. } => 1,
            Error::Core(e) => match e {
                E::Config(_) | E::InvalidBounds { .. } | E::OutOfBounds { .. } | E::UnsupportedDimension(_) => 1,
                E::Diverged { .. }
                | E::NonFiniteFeature(_)
                | E::RankDeficient
                | E::ZeroVariance
                | E::InfeasibleStart(_)
                | E::EmptyFront
                | E::MorphRejected { .. } => 3,
                _ => 2,
            },
            _ => 2,
        }
    }
}
