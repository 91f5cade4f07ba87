use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{context}: {source}")]
    Physics {
        context: String,
        #[source]
        source: cra_photon::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("cannot build thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn physics(context: impl Into<String>, source: cra_photon::Error) -> Self {
        Self::Physics {
            context: context.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attach channel context to a physics error.
pub trait Context<T> {
    fn context<F: FnOnce() -> String>(self, f: F) -> CliResult<T>;
}

impl<T> Context<T> for cra_photon::Result<T> {
    fn context<F: FnOnce() -> String>(self, f: F) -> CliResult<T> {
        self.map_err(|e| CliError::physics(f(), e))
    }
}
