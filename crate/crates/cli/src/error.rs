use attrlens_core::analysis::AnalysisError;
use attrlens_core::annotate::AnnotateError;
use attrlens_core::attrgen::GenerateError;
use attrlens_core::backends::BackendError;
use attrlens_core::store::StoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error("unknown category: {0}")]
    UnknownCategory(String),
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("{0}")]
    Gated(String),
    #[error("{failed} report(s) failed: {}", .messages.join("; "))]
    Reports {
        failed: usize,
        messages: Vec<String>,
        backend: bool,
    },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl CliError {
    /// Process exit status: 1 config or usage, 2 backend, 3 unparseable LLM
    /// output, 4 workflow gating, 5 analysis input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_)
            | CliError::Config(_)
            | CliError::Store(_)
            | CliError::UnknownCategory(_)
            | CliError::InvalidAssignment(_) => 1,
            CliError::Backend(_) => 2,
            CliError::Generate(GenerateError::Backend { .. }) => 2,
            CliError::Generate(GenerateError::Parse { .. }) => 3,
            CliError::Generate(GenerateError::InvalidInput(_)) => 1,
            CliError::Annotate(AnnotateError::Backend { .. }) => 2,
            CliError::Annotate(_) => 1,
            CliError::Gated(_) => 4,
            CliError::Reports { backend: true, .. } => 2,
            CliError::Reports { .. } => 5,
            CliError::Analysis(AnalysisError::Backend(_)) => 2,
            CliError::Analysis(_) => 5,
        }
    }
}
