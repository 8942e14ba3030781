use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix dimension {0} is not even")]
    OddDimension(usize),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symplectic (residual {residual:.3e}, tolerance {tol:.1e})")]
    NotSymplectic { residual: f64, tol: f64 },
    #[error("dimension mismatch: expected 2n = {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ill-conditioned spectrum near eigenvalue {re:+.6e}{im:+.6e}i: {reason}")]
    IllConditioned { re: f64, im: f64, reason: String },
    #[error("parameter t = {0} is outside [0, 1]")]
    OutOfDomain(f64),
    #[error("endpoint mismatch in catenation (gap {0:.3e})")]
    EndpointMismatch(f64),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("rotation number of the normalization stages is not even (measured {0:.9})")]
    OddRotation(f64),
    #[error("phase refinement exhausted near t = {t:.12} (depth cap {depth})")]
    RefinementExhausted { t: f64, depth: u32 },
    #[error("path is not a loop (endpoint gap {0:.3e})")]
    NotALoop(f64),
    #[error("value {value:.12} is not within {tol:.1e} of an integer")]
    NonIntegerResidual { value: f64, tol: f64 },
    #[error("endpoint block {block} lies on the cycle (angle {angle:.12})")]
    OnCycle { block: usize, angle: f64 },
    #[error("block {block}: angles {from:.9} and {to:.9} lie in different half-circles")]
    HalfCircleMismatch { block: usize, from: f64, to: f64 },
    #[error("path does not start at the identity (gap {0:.3e})")]
    NotFromIdentity(f64),
    #[error("endpoint has eigenvalue 1 (path is degenerate)")]
    Degenerate,
    #[error("endpoint is L0-degenerate (det V = {0:.3e})")]
    L0Degenerate(f64),
    #[error("index routes disagree: {0}")]
    RouteMismatch(String),
    #[error("no admissible perturbation: {0}")]
    NoAdmissiblePerturbation(String),
    #[error("L0-concavity unavailable: {0}")]
    ConcavityUnavailable(String),
    #[error("irregular crossing at t = {t:.12}: {reason}")]
    IrregularCrossing { t: f64, reason: String },
    #[error("eigenphase branch tracking failed near t = {0:.12}")]
    BranchTrackingFailure(f64),
    #[error("frame is not Lagrangian (residual {0:.3e})")]
    NotLagrangian(f64),
    #[error("no transversal perturbation found for the Lagrangian pair")]
    NonTransversalAfterPerturbation,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Input problems (bad documents, wrong shapes) as opposed to failures of
    /// a computation on valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::OddDimension(_)
                | Error::NotSquare { .. }
                | Error::NotSymplectic { .. }
                | Error::DimensionMismatch { .. }
                | Error::OutOfDomain(_)
                | Error::EndpointMismatch(_)
                | Error::Schema(_)
                | Error::NotLagrangian(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::OddDimension(_) => "OddDimension",
            Error::NotSquare { .. } => "NotSquare",
            Error::NotSymplectic { .. } => "NotSymplectic",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::EndpointMismatch(_) => "EndpointMismatch",
            Error::Schema(_) => "SchemaError",
            Error::OddRotation(_) => "OddRotation",
            Error::RefinementExhausted { .. } => "RefinementExhausted",
            Error::NotALoop(_) => "NotALoop",
            Error::NonIntegerResidual { .. } => "NonIntegerResidual",
            Error::OnCycle { .. } => "OnCycle",
            Error::HalfCircleMismatch { .. } => "HalfCircleMismatch",
            Error::NotFromIdentity(_) => "NotFromIdentity",
            Error::Degenerate => "Degenerate",
            Error::L0Degenerate(_) => "L0Degenerate",
            Error::RouteMismatch(_) => "RouteMismatch",
            Error::NoAdmissiblePerturbation(_) => "NoAdmissiblePerturbation",
            Error::ConcavityUnavailable(_) => "ConcavityUnavailable",
            Error::IrregularCrossing { .. } => "IrregularCrossing",
            Error::BranchTrackingFailure(_) => "BranchTrackingFailure",
            Error::NotLagrangian(_) => "NotLagrangian",
            Error::NonTransversalAfterPerturbation => "NonTransversalAfterPerturbation",
            Error::Numerical(_) => "Numerical",
        }
    }
}
