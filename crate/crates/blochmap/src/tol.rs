//! Default numerical tolerances, stated once so every module and test agrees.
//!
//! All values are given as `f64`; generic code converts them with
//! [`crate::scalar::Real::of`]. They are defaults — functions that take an
//! explicit tolerance parameter accept overrides.

/// Maximum allowed excess of a Bloch vector's norm over 1.
pub const STATE: f64 = 1e-9;

/// Below this norm an axis is considered zero when building a frame.
pub const FRAME: f64 = 1e-12;

/// Generic numerical comparison tolerance (residuals, consistency checks).
pub const NUM: f64 = 1e-10;

/// Hermiticity / symmetry residual tolerance for 4×4 matrices.
pub const HERM: f64 = 1e-12;

/// Complete-positivity margin: Choi eigenvalues above `-CP` count as
/// non-negative.
pub const CP: f64 = 1e-9;

/// Maximum residual allowed when an estimate must reproduce its input
/// records exactly.
pub const FIT: f64 = 1e-8;

/// Slack when freezing an earlier objective during lexicographic
/// minimization.
pub const LEX: f64 = 1e-6;

/// Off-diagonal convergence threshold for the 3×3 symmetric Jacobi
/// eigensolver.
pub const JACOBI_3: f64 = 1e-12;

/// Off-diagonal convergence threshold for the 4×4 Hermitian Jacobi
/// eigensolver.
pub const JACOBI_4: f64 = 1e-13;

use crate::scalar::Real;

/// A default tolerance widened so it stays meaningful in lower precision:
/// the stated `f64` value, floored at a small multiple of the machine
/// epsilon of `T`. For `f64` this returns the constant unchanged.
#[inline]
pub fn scaled<T: Real>(value: f64) -> T {
    T::of(value).max(T::epsilon() * T::of(32.0))
}
