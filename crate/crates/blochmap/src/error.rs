//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the library.
///
/// Messages carry the offending numbers so callers (and the CLI) can report
/// actionable diagnostics without re-deriving them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A Bloch vector's norm exceeds 1 beyond the allowed tolerance.
    #[error("Bloch vector norm {norm} exceeds 1 by more than {tolerance}")]
    StateOutsideBall { norm: f64, tolerance: f64 },

    /// An axis passed to frame construction is numerically zero.
    #[error("cannot build a frame from an axis of norm {norm} (threshold {threshold})")]
    ZeroAxis { norm: f64, threshold: f64 },

    /// A 4×4 matrix expected to be Hermitian is not, within tolerance.
    #[error("matrix is not Hermitian: max |M - M†| entry is {residual} (tolerance {tolerance})")]
    NotHermitian { residual: f64, tolerance: f64 },

    /// A Choi matrix fails the partial-trace (trace-preservation) check.
    #[error(
        "Choi matrix is not trace-preserving: max |Tr_1 Ω - I/2| entry is {residual} \
         (tolerance {tolerance})"
    )]
    NotTracePreserving { residual: f64, tolerance: f64 },

    /// A map fails complete positivity: its Choi matrix has a negative
    /// eigenvalue beyond tolerance.
    #[error(
        "map is not completely positive: min Choi eigenvalue {min_eigenvalue} \
         (tolerance {tolerance})"
    )]
    NotCompletelyPositive {
        min_eigenvalue: f64,
        tolerance: f64,
    },

    /// A channel required to be unital has a non-zero translation.
    #[error("channel is not unital: |t| = {shift_norm} (tolerance {tolerance})")]
    NotUnital { shift_norm: f64, tolerance: f64 },

    /// Input records are mutually inconsistent (e.g. duplicate inputs with
    /// different outputs, or outputs incompatible with any channel).
    #[error("records are inconsistent: {reason}")]
    InconsistentRecords { reason: String },

    /// The record geometry is degenerate for the requested reconstruction
    /// (e.g. coincident input states).
    #[error("degenerate record geometry: {reason}")]
    DegenerateGeometry { reason: String },

    /// The constrained search found no completely positive channel
    /// reproducing the records.
    #[error("no completely positive estimate found (best CP violation {violation})")]
    NoCpEstimate { violation: f64 },

    /// A quantity failed validation (catch-all with a named field).
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
}

/// Convenient alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;
