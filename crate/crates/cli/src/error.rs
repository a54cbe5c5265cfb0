use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },

    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),

    #[error("config parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("invalid config at `{path}`: {message}")]
    Invalid { path: String, message: String },

    #[error("{context}: {source}")]
    Model {
        context: String,
        source: mttdl_core::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn model(context: impl Into<String>) -> impl FnOnce(mttdl_core::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Model { context, source }
    }
}
