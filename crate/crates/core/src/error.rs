//! Crate-wide error type.
//!
//! One enum covers every failure the pipeline can produce so that callers
//! (CLI, FFI) can map variants to exit codes / status codes in one place.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, MongeError>;

/// Every error the toolkit can raise.
#[derive(Debug, Clone, Error)]
pub enum MongeError {
    /// Operands live in different dimensions (or do not match the domain).
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A body constructor was given inconsistent data (radius <= 0,
    /// lower >= upper, too few vertices, flat vertex set, ...).
    #[error("degenerate body: {0}")]
    DegenerateBody(String),

    /// A chord or Hilbert-distance query was made at a point that is not
    /// strictly inside the body (clearance below tolerance).
    #[error("point is not interior to the body (clearance {clearance:.3e} < required {required:.3e})")]
    PointNotInterior { clearance: f64, required: f64 },

    /// Chord direction has norm below tolerance.
    #[error("chord direction is numerically zero (norm {0:.3e})")]
    ZeroDirection(f64),

    /// Scalar parameter (interpolation time, mesh, tolerance, radius)
    /// outside its documented range.
    #[error("parameter {0} outside its valid range")]
    ParameterOutOfRange(f64),

    /// Measure constructor rejected its input (empty support, nonpositive
    /// or non-finite weight, zero total mass).
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// Grid discretization produced no interior cell centers.
    #[error("discretization produced no interior points (resolution {resolution})")]
    EmptyDiscretization { resolution: usize },

    /// Rejection sampler exhausted its attempt budget.
    #[error("rejection sampling exceeded its budget ({attempts} attempts for {requested} points)")]
    RejectionBudgetExceeded { attempts: usize, requested: usize },

    /// Operation needs at least two distinct atoms (doubling estimation).
    #[error("measure is degenerate for this operation: {0}")]
    DegenerateMeasure(String),

    /// Net construction received an empty point list.
    #[error("cannot build a net from an empty point set")]
    EmptyNet,

    /// Transportation LP has no feasible plan (mismatched masses or an
    /// admissibility mask that cuts off every coupling).
    #[error("transportation problem is infeasible: {0}")]
    Infeasible(String),

    /// The simplex failed to converge within its pivot budget or produced
    /// an inconsistent certificate.
    #[error("numerical failure in solver: {0}")]
    NumericalFailure(String),

    /// Lipschitz potential extraction requires a cost with power == 1.
    #[error("cost matrix is not a distance cost (power {0})")]
    NotDistanceCost(f64),

    /// Reconciled potential failed its 1-Lipschitz verification.
    #[error("extracted potential violates the Lipschitz bound by {excess:.3e} on pair ({u}, {v})")]
    LipschitzViolation { u: usize, v: usize, excess: f64 },

    /// Tight-set mask admits no feasible plan (eta too small).
    #[error("admissible set is empty or infeasible (eta = {eta:.3e})")]
    EmptyAdmissibleSet { eta: f64 },

    /// Brute-force enumeration refused an instance above its size cap.
    #[error("instance too large for exhaustive enumeration: {size} > {cap}")]
    TooLarge { size: usize, cap: usize },

    /// A checker was handed a plan whose cost provenance does not license
    /// the check (e.g. interpolant disjointness needs a strictly convex cost).
    #[error("cost provenance mismatch: {0}")]
    ProvenanceMismatch(String),

    /// A cost matrix entry was non-finite or negative.
    #[error("invalid cost matrix: {0}")]
    InvalidCost(String),

    /// Run configuration or input file is malformed.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Underlying I/O failure (file read/write), carried as text so the
    /// error type stays Clone.
    #[error("i/o error: {0}")]
    Io(String),
}

impl MongeError {
    /// Coarse classification used by the CLI for exit codes: `true` for
    /// errors caused by user input (config, files, geometry of the data),
    /// `false` for solver/checker failures on valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            MongeError::DimensionMismatch { .. }
                | MongeError::DegenerateBody(_)
                | MongeError::PointNotInterior { .. }
                | MongeError::ZeroDirection(_)
                | MongeError::ParameterOutOfRange(_)
                | MongeError::InvalidMeasure(_)
                | MongeError::EmptyDiscretization { .. }
                | MongeError::DegenerateMeasure(_)
                | MongeError::EmptyNet
                | MongeError::TooLarge { .. }
                | MongeError::InvalidConfig(_)
                | MongeError::Io(_)
        )
    }
}

impl From<std::io::Error> for MongeError {
    fn from(e: std::io::Error) -> Self {
        MongeError::Io(e.to_string())
    }
}
