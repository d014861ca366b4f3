use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] thermistor_core::Error),
    #[error("sweep tuple lambda = {lambda}, alpha = {alpha}: {source}")]
    Tuple {
        lambda: f64,
        alpha: f64,
        source: Box<CliError>,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(line: usize, message: impl std::fmt::Display) -> Self {
        CliError::Config(format!("line {line}: {message}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
