pub mod config;
pub mod parallel;
pub mod report;
pub mod repro;
pub mod run;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] trace_forms_core::Error),
}

impl CliError {
    /// Stable machine-readable error kind for the JSON error channel.
    pub fn kind(&self) -> &'static str {
        use trace_forms_core::Error as E;
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Core(e) => match e {
                E::InvalidInput(_) => "invalid-input",
                E::InvalidBody(_) => "invalid-body",
                E::UnboundedBody => "unbounded-body",
                E::DegenerateBody(_) => "degenerate-body",
                E::AsymmetricInput => "asymmetric-input",
                E::StrictnessViolation(_) => "strictness-violation",
                E::RuleMismatch(_) => "rule-mismatch",
                E::NonlinearIntegrand => "nonlinear-integrand",
                E::ZeroNormalization => "zero-normalization",
                E::GroupTooLarge(_) => "group-too-large",
                E::InvariantViolation(_) => "invariant-violation",
            },
        }
    }

    /// Config and usage errors exit 2 (matching argument parse failures);
    /// runtime and invariant errors exit 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
