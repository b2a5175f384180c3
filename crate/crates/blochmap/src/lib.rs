//! # blochmap
//!
//! A toolkit for single-qubit quantum channels in affine (Bloch) form.
//!
//! States of a two-level system are represented by Bloch vectors `r` with
//! `ρ = ½(I + r·σ)`, and channels by affine maps `r → E·r + t` with a real
//! 3×3 matrix `E` and a translation `t`. The crate provides:
//!
//! * [`bloch`] — state and channel algebra: application, composition,
//!   trace distance, fidelities, singular decomposition `E = R_U·D·R_V`,
//!   orthonormal operator frames and basis changes.
//! * [`cp`] — complete-positivity machinery: Choi matrix construction and
//!   inversion, positivity certification with Fujiwara–Algoet margins,
//!   Kraus extraction, and the two-pair Uhlmann compatibility screen.
//! * [`reconstruct`] — the conservative estimation ladder that produces a
//!   best-estimate channel from 0–3 known input→output state pairs (plus a
//!   direct solve for 4 affinely independent pairs), with a CP-constrained
//!   derivative-free search for the branches without closed forms.
//! * [`metrics`] — estimate-quality metrics: unital channel capacity,
//!   Monte-Carlo average channel distance, hierarchy evaluation, and
//!   deterministic Bloch-image sampling for visualization.
//!
//! All numerical code is generic over the scalar type through
//! [`scalar::Real`] (implemented for `f32` and `f64`); the aliases below fix
//! the common concrete choices. Every operation is a pure function of its
//! inputs — no globals, no hidden state — and all randomized computations
//! take explicit seeds, so results are bit-for-bit reproducible.

pub mod bloch;
pub mod cp;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod reconstruct;
pub mod scalar;
pub mod tol;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` Bloch vector.
pub type BlochVector64 = bloch::BlochVector<f64>;
/// `f32` Bloch vector.
pub type BlochVector32 = bloch::BlochVector<f32>;
/// `f64` affine channel.
pub type AffineChannel64 = bloch::AffineChannel<f64>;
/// `f32` affine channel.
pub type AffineChannel32 = bloch::AffineChannel<f32>;
/// `f64` orthonormal operator frame.
pub type Frame64 = bloch::Frame<f64>;
/// `f32` orthonormal operator frame.
pub type Frame32 = bloch::Frame<f32>;
/// `f64` singular decomposition data.
pub type SingularData64 = bloch::SingularData<f64>;
/// `f32` singular decomposition data.
pub type SingularData32 = bloch::SingularData<f32>;
/// `f64` Choi matrix.
pub type ChoiMatrix64 = cp::ChoiMatrix<f64>;
/// `f32` Choi matrix.
pub type ChoiMatrix32 = cp::ChoiMatrix<f32>;
/// `f64` complete-positivity certificate.
pub type CpCertificate64 = cp::CpCertificate<f64>;
/// `f32` complete-positivity certificate.
pub type CpCertificate32 = cp::CpCertificate<f32>;
/// `f64` Kraus operator set.
pub type KrausSet64 = cp::KrausSet<f64>;
/// `f32` Kraus operator set.
pub type KrausSet32 = cp::KrausSet<f32>;
/// `f64` transformation record.
pub type TransformationRecord64 = reconstruct::TransformationRecord<f64>;
/// `f32` transformation record.
pub type TransformationRecord32 = reconstruct::TransformationRecord<f32>;
/// `f64` canonical two-record data.
pub type CanonicalPair64 = reconstruct::CanonicalPair<f64>;
/// `f32` canonical two-record data.
pub type CanonicalPair32 = reconstruct::CanonicalPair<f32>;
/// `f64` reconstruction report.
pub type ReconstructionReport64 = reconstruct::ReconstructionReport<f64>;
/// `f32` reconstruction report.
pub type ReconstructionReport32 = reconstruct::ReconstructionReport<f32>;
/// `f64` Monte-Carlo distance estimate.
pub type DistanceEstimate64 = metrics::DistanceEstimate<f64>;
/// `f32` Monte-Carlo distance estimate.
pub type DistanceEstimate32 = metrics::DistanceEstimate<f32>;
