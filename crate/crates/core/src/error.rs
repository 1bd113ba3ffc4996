use thiserror::Error;

/// Errors surfaced by body construction, quadrature, and group operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("unbounded body: halfspace normals do not span the ambient space")]
    UnboundedBody,

    #[error("degenerate body: {0}")]
    DegenerateBody(String),

    #[error("asymmetric input: halfspaces do not come in opposite pairs")]
    AsymmetricInput,

    #[error("strict convexity violated at a quadrature node: {0}")]
    StrictnessViolation(String),

    #[error("quadrature rule does not match the body: {0}")]
    RuleMismatch(String),

    #[error("integrand is not affine on a facet; use a sampling rule instead")]
    NonlinearIntegrand,

    #[error("zero normalization constant for the requested measure")]
    ZeroNormalization,

    #[error("group too large or infinite: closure exceeded {0} elements")]
    GroupTooLarge(usize),

    #[error("body is not invariant under the group action: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
