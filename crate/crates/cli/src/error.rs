use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}:{line}: {message}", path.display())]
    Schema { path: PathBuf, line: usize, message: String },
    #[error("{}:{line}: {source}", path.display())]
    Expression {
        path: PathBuf,
        line: usize,
        #[source]
        source: jetsym::Error,
    },
    #[error("cannot read {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{command} needs {what}")]
    Missing { command: &'static str, what: &'static str },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: jetsym::Error,
    },
}

pub(crate) trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError>;
}

impl<T> Context<T> for jetsym::Result<T> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { context: what.into(), source })
    }
}
