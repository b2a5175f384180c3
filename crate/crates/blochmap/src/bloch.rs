//! Bloch-vector and affine-channel algebra.
//!
//! A two-level quantum state is `ρ = ½(I + r·σ)` with a real Bloch vector
//! `r` of norm ≤ 1; a channel acts as the affine map `r → E·r + t`. This
//! module provides the state/channel types, application and composition,
//! trace distance and fidelities, the signed singular decomposition
//! `E = R_U·D·R_V`, orthonormal operator frames, and basis changes between
//! an adaptable frame pair and the fixed σ-basis.

use crate::error::{Error, Result};
use crate::linalg::{
    v3_add, v3_cross, v3_dot, v3_norm, v3_norm2, v3_normalize, v3_scale, v3_sub, v3_zero, Mat3,
    Vec3,
};
use crate::scalar::Real;
use crate::tol;

/// State of a two-level system in Bloch form: `ρ = ½(I + r·σ)`.
///
/// The components are the coefficients of `σ_x`, `σ_y`, `σ_z`. A physical
/// state satisfies `x² + y² + z² ≤ 1`; intermediate unit-trace operators
/// (which may exceed the ball) also use this type where documented.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> BlochVector<T> {
    /// Creates a Bloch vector from components.
    pub fn new(x: T, y: T, z: T) -> Self {
        BlochVector { x, y, z }
    }

    /// The total mixture `I/2` (Bloch-ball center).
    pub fn zero() -> Self {
        BlochVector::new(T::zero(), T::zero(), T::zero())
    }

    /// Converts from a coordinate array.
    pub fn from_array(a: Vec3<T>) -> Self {
        BlochVector::new(a[0], a[1], a[2])
    }

    /// Converts to a coordinate array.
    pub fn to_array(self) -> Vec3<T> {
        [self.x, self.y, self.z]
    }

    /// Euclidean norm `|r|`.
    pub fn norm(self) -> T {
        v3_norm(&self.to_array())
    }

    /// Squared Euclidean norm.
    pub fn norm2(self) -> T {
        v3_norm2(&self.to_array())
    }

    /// Inner product with another Bloch vector.
    pub fn dot(self, other: Self) -> T {
        v3_dot(&self.to_array(), &other.to_array())
    }

    /// Checks that the vector is a valid state: finite components and norm
    /// at most `1 + ε` with the state tolerance `ε` (1e-9 at `f64`).
    pub fn validate_state(self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err(Error::Invalid {
                field: "state".to_string(),
                reason: "non-finite component".to_string(),
            });
        }
        let eps = tol::scaled::<T>(tol::STATE);
        let n = self.norm();
        if n > T::one() + eps {
            return Err(Error::StateOutsideBall {
                norm: n.as_f64(),
                tolerance: eps.as_f64(),
            });
        }
        Ok(())
    }

    /// True when the state is pure (`|r| = 1`) within the state tolerance.
    pub fn is_pure(self) -> bool {
        (self.norm() - T::one()).abs() <= tol::scaled::<T>(tol::STATE)
    }
}

/// Qubit channel in affine form: `r → E·r + t`.
///
/// Equivalently the 4×4 matrix with first row `(1, 0, 0, 0)`, first column
/// `(1, t)`, and lower-right block `E`; trace preservation is structural in
/// this representation. The channel is *unital* iff `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineChannel<T> {
    /// 3×3 linear block `E`, row-major.
    pub e: Mat3<T>,
    /// Translation `t` (image of the total mixture).
    pub t: BlochVector<T>,
}

impl<T: Real> AffineChannel<T> {
    /// Creates a channel from its linear block and translation.
    pub fn new(e: Mat3<T>, t: BlochVector<T>) -> Self {
        AffineChannel { e, t }
    }

    /// The identity channel.
    pub fn identity() -> Self {
        AffineChannel::new(Mat3::identity(), BlochVector::zero())
    }

    /// The total contraction: every state maps to the total mixture
    /// (`E = 0`, `t = 0`).
    pub fn total_contraction() -> Self {
        AffineChannel::new(Mat3::zeros(), BlochVector::zero())
    }

    /// The constant map sending every state to `target`.
    pub fn constant_map(target: BlochVector<T>) -> Self {
        AffineChannel::new(Mat3::zeros(), target)
    }

    /// Unital channel with diagonal linear block.
    pub fn diagonal(d: Vec3<T>) -> Self {
        AffineChannel::new(Mat3::diagonal(d), BlochVector::zero())
    }

    /// Applies the channel: `E·r + t`.
    pub fn apply(&self, r: BlochVector<T>) -> BlochVector<T> {
        BlochVector::from_array(v3_add(&self.e.mul_vec(&r.to_array()), &self.t.to_array()))
    }

    /// Norm of the translation `|t|` (distance of the mixture's image from
    /// the ball center).
    pub fn shift_norm(&self) -> T {
        self.t.norm()
    }

    /// True when the channel preserves the total mixture (`|t|` below the
    /// numerical tolerance).
    pub fn is_unital(&self) -> bool {
        self.shift_norm() <= tol::scaled::<T>(tol::NUM)
    }

    /// Composition `self ∘ inner`: first `inner`, then `self`.
    ///
    /// `apply(compose, r) = apply(self, apply(inner, r))` for all `r`.
    pub fn compose(&self, inner: &Self) -> Self {
        let e = self.e.mul(&inner.e);
        let t = v3_add(&self.e.mul_vec(&inner.t.to_array()), &self.t.to_array());
        AffineChannel::new(e, BlochVector::from_array(t))
    }

    /// Builds a channel from the 4×4 affine matrix.
    ///
    /// The first row must be exactly `(1, 0, 0, 0)` and all entries finite.
    pub fn from_affine4(m: &[[T; 4]; 4]) -> Result<Self> {
        for row in m {
            for &x in row {
                if !x.is_finite() {
                    return Err(Error::Invalid {
                        field: "matrix".to_string(),
                        reason: "non-finite entry".to_string(),
                    });
                }
            }
        }
        let first_ok = m[0][0] == T::one()
            && m[0][1] == T::zero()
            && m[0][2] == T::zero()
            && m[0][3] == T::zero();
        if !first_ok {
            return Err(Error::Invalid {
                field: "matrix".to_string(),
                reason: "first row of the affine form must be (1, 0, 0, 0)".to_string(),
            });
        }
        let mut e = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                e.0[i][j] = m[i + 1][j + 1];
            }
        }
        let t = BlochVector::new(m[1][0], m[2][0], m[3][0]);
        Ok(AffineChannel::new(e, t))
    }

    /// The 4×4 affine matrix of the channel.
    pub fn to_affine4(&self) -> [[T; 4]; 4] {
        let mut m = [[T::zero(); 4]; 4];
        m[0][0] = T::one();
        let t = self.t.to_array();
        for i in 0..3 {
            m[i + 1][0] = t[i];
            for j in 0..3 {
                m[i + 1][j + 1] = self.e.0[i][j];
            }
        }
        m
    }

    /// Largest absolute difference between the affine forms of two channels
    /// (metric used by round-trip and golden tests).
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let e = self.e.max_abs_diff(&other.e);
        let dt = v3_sub(&self.t.to_array(), &other.t.to_array());
        e.max(dt[0].abs()).max(dt[1].abs()).max(dt[2].abs())
    }
}

/// Trace distance between two states: `D(ρ, ξ) = Tr|ρ − ξ| = |r − s|`.
///
/// Ranges over `[0, 2]`; 2 for antipodal pure states.
pub fn trace_distance<T: Real>(r: BlochVector<T>, s: BlochVector<T>) -> T {
    v3_norm(&v3_sub(&r.to_array(), &s.to_array()))
}

/// Weighted trace distance `D(ρ, w·ξ) = Tr|ρ − w·ξ|` for a positive weight
/// `w` (the second operator is scaled, so it is not unit-trace for
/// `w ≠ 1`).
///
/// For qubits `ρ − w·ξ = ½((1−w)I + (r − w·s)·σ)` has eigenvalues
/// `½((1−w) ± |r − w·s|)`, so the distance is the sum of their absolute
/// values. Used by the two-pair compatibility screen.
pub fn weighted_trace_distance<T: Real>(r: BlochVector<T>, s: BlochVector<T>, w: T) -> T {
    let d = v3_norm(&v3_sub(&r.to_array(), &v3_scale(&s.to_array(), w)));
    let half = T::of(0.5);
    let lo = half * (T::one() - w - d);
    let hi = half * (T::one() - w + d);
    lo.abs() + hi.abs()
}

/// Fidelity of a state to the total mixture:
/// `F(ρ, I/2) = ½(√(1+|r|) + √(1−|r|))`.
///
/// Monotone decreasing in `|r|`, ranging from 1 (at the center) down to
/// `1/√2` (pure states).
pub fn fidelity_to_mixture<T: Real>(r: BlochVector<T>) -> Result<T> {
    r.validate_state()?;
    let n = r.norm().min(T::one());
    let half = T::of(0.5);
    Ok(half * ((T::one() + n).sqrt() + (T::one() - n).sqrt()))
}

/// Uhlmann fidelity `F(ρ, ξ) = Tr√(√ρ ξ √ρ)` via the two-level closed
/// form `F = √((1 + r·s + √((1−|r|²)(1−|s|²)))/2)`.
///
/// Symmetric; equals 1 iff the states coincide; 0 for orthogonal pure
/// states.
pub fn fidelity<T: Real>(r: BlochVector<T>, s: BlochVector<T>) -> Result<T> {
    r.validate_state()?;
    s.validate_state()?;
    let pr = (T::one() - r.norm2()).max(T::zero());
    let ps = (T::one() - s.norm2()).max(T::zero());
    let inner = (T::one() + r.dot(s) + (pr * ps).sqrt()) * T::of(0.5);
    Ok(inner.max(T::zero()).sqrt())
}

/// Handedness of an orthonormal frame: the sign of the determinant of its
/// axis matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Determinant +1.
    RightHanded,
    /// Determinant −1.
    LeftHanded,
}

impl Orientation {
    /// The determinant sign as a scalar.
    pub fn sign<T: Real>(self) -> T {
        match self {
            Orientation::RightHanded => T::one(),
            Orientation::LeftHanded => -T::one(),
        }
    }

    /// Stable lowercase name (used in reports).
    pub fn name(self) -> &'static str {
        match self {
            Orientation::RightHanded => "right_handed",
            Orientation::LeftHanded => "left_handed",
        }
    }
}

/// Which frame axis a distinguished direction is assigned to by
/// [`complete_frame`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameSlot {
    /// The direction becomes `ex`.
    X,
    /// The direction becomes `ey`.
    Y,
    /// The direction becomes `ez`.
    Z,
}

/// Orthonormal operator frame: three mutually orthogonal unit Bloch
/// directions defining generalized σ-axes.
///
/// Construction validates orthonormality, so a `Frame` obtained from this
/// module's constructors always satisfies its invariants; consumers that
/// accept a caller-supplied frame re-validate defensively.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame<T> {
    ex: BlochVector<T>,
    ey: BlochVector<T>,
    ez: BlochVector<T>,
    orientation: Orientation,
}

impl<T: Real> Frame<T> {
    /// Builds a frame from three axes, validating unit norms, pairwise
    /// orthogonality (within the frame tolerance), and determinant ±1.
    pub fn new(ex: BlochVector<T>, ey: BlochVector<T>, ez: BlochVector<T>) -> Result<Self> {
        let eps = tol::scaled::<T>(tol::FRAME);
        let axes = [ex.to_array(), ey.to_array(), ez.to_array()];
        let mut worst = T::zero();
        for i in 0..3 {
            for j in i..3 {
                let expect = if i == j { T::one() } else { T::zero() };
                worst = worst.max((v3_dot(&axes[i], &axes[j]) - expect).abs());
            }
        }
        // Gram deviations in the dot products are first order in the axis
        // errors; allow a small constant factor over the per-axis budget.
        if worst > eps * T::of(8.0) {
            return Err(Error::Invalid {
                field: "frame".to_string(),
                reason: format!(
                    "axes are not orthonormal: max Gram deviation {}",
                    worst.as_f64()
                ),
            });
        }
        let det = Mat3::from_cols(&axes[0], &axes[1], &axes[2]).det();
        let orientation = if det > T::zero() {
            Orientation::RightHanded
        } else {
            Orientation::LeftHanded
        };
        Ok(Frame {
            ex,
            ey,
            ez,
            orientation,
        })
    }

    /// The standard σ-basis frame `{(1,0,0), (0,1,0), (0,0,1)}`.
    pub fn sigma() -> Self {
        Frame {
            ex: BlochVector::new(T::one(), T::zero(), T::zero()),
            ey: BlochVector::new(T::zero(), T::one(), T::zero()),
            ez: BlochVector::new(T::zero(), T::zero(), T::one()),
            orientation: Orientation::RightHanded,
        }
    }

    /// First axis.
    pub fn ex(&self) -> BlochVector<T> {
        self.ex
    }

    /// Second axis.
    pub fn ey(&self) -> BlochVector<T> {
        self.ey
    }

    /// Third axis.
    pub fn ez(&self) -> BlochVector<T> {
        self.ez
    }

    /// Recorded handedness.
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// The orthogonal matrix whose columns are the frame axes: maps
    /// frame coordinates to σ-basis coordinates.
    pub fn matrix(&self) -> Mat3<T> {
        Mat3::from_cols(
            &self.ex.to_array(),
            &self.ey.to_array(),
            &self.ez.to_array(),
        )
    }

    /// Coordinates of a σ-basis vector in this frame.
    pub fn coordinates_of(&self, r: BlochVector<T>) -> BlochVector<T> {
        BlochVector::from_array(self.matrix().transpose().mul_vec(&r.to_array()))
    }
}

/// Completes a single direction into a full orthonormal frame.
///
/// The normalized `axis` occupies the requested `slot`; the two remaining
/// axes are chosen deterministically: the coordinate axis least aligned
/// with the direction is Gram-Schmidt-orthogonalized to give the next
/// axis (cyclically following the slot), and the cross product gives the
/// last. Right-handed requests yield determinant +1; left-handed requests
/// negate the cross-product axis.
///
/// Errors with a zero-axis report when `|axis|` is numerically zero.
pub fn complete_frame<T: Real>(
    axis: BlochVector<T>,
    slot: FrameSlot,
    orientation: Orientation,
) -> Result<Frame<T>> {
    let eps = tol::scaled::<T>(tol::FRAME);
    let a = axis.to_array();
    let u = v3_normalize(&a, eps).ok_or(Error::ZeroAxis {
        norm: v3_norm(&a).as_f64(),
        threshold: eps.as_f64(),
    })?;
    // Coordinate axis least aligned with u (ties -> smallest index).
    let mut k = 0;
    for i in 1..3 {
        if u[i].abs() < u[k].abs() {
            k = i;
        }
    }
    let mut ek = v3_zero();
    ek[k] = T::one();
    let v_raw = v3_sub(&ek, &v3_scale(&u, u[k]));
    let v = v3_normalize(&v_raw, eps).expect("residual of least-aligned axis is nonzero");
    let mut w = v3_cross(&u, &v);
    if orientation == Orientation::LeftHanded {
        w = v3_scale(&w, -T::one());
    }
    let (ex, ey, ez) = match slot {
        FrameSlot::X => (u, v, w),
        FrameSlot::Y => (w, u, v),
        FrameSlot::Z => (v, w, u),
    };
    Frame::new(
        BlochVector::from_array(ex),
        BlochVector::from_array(ey),
        BlochVector::from_array(ez),
    )
}

/// Expresses a channel given in an adaptable frame pair in the fixed
/// σ-basis.
///
/// With `F_in`, `F_out` the axis matrices of the frames (columns are the
/// axes), the returned channel has `E = F_out·E_ad·F_inᵀ` and
/// `t = F_out·t_ad`, so applying it to σ-coordinates reproduces the
/// adaptable-basis action exactly. Frames are re-validated; orthogonality
/// makes the inverse a transpose.
pub fn rebase<T: Real>(
    ch_ad: &AffineChannel<T>,
    in_frame: &Frame<T>,
    out_frame: &Frame<T>,
) -> Result<AffineChannel<T>> {
    let f_in = Frame::new(in_frame.ex, in_frame.ey, in_frame.ez)?;
    let f_out = Frame::new(out_frame.ex, out_frame.ey, out_frame.ez)?;
    let x = f_in.matrix();
    let y = f_out.matrix();
    let e = y.mul(&ch_ad.e).mul(&x.transpose());
    let t = y.mul_vec(&ch_ad.t.to_array());
    Ok(AffineChannel::new(e, BlochVector::from_array(t)))
}

/// Signed singular decomposition `E = R_U · D · R_V`.
///
/// `R_U`, `R_V` are proper rotations (determinant +1) and
/// `D = diag(λ₁, λ₂, λ₃)` with `λ₁ ≥ λ₂ ≥ |λ₃|`: the `|λ_j|` are the
/// singular values of `E`, and any overall reflection sign is folded into
/// `λ₃`, so `λ₁·λ₂·λ₃ = det E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularData<T> {
    /// Diagonal of `D`, descending by absolute value; only the last entry
    /// may be negative.
    pub lambdas: [T; 3],
    /// Left rotation (determinant +1).
    pub r_u: Mat3<T>,
    /// Right rotation (determinant +1); note `E = R_U·D·R_V`, so this is
    /// the transpose of the conventional SVD's right factor.
    pub r_v: Mat3<T>,
}

impl<T: Real> SingularData<T> {
    /// Reassembles `R_U · D · R_V`.
    pub fn reconstruct(&self) -> Mat3<T> {
        self.r_u.mul(&Mat3::diagonal(self.lambdas)).mul(&self.r_v)
    }
}

/// Deterministic orthonormal completion: the unit vector obtained from the
/// coordinate axis with the largest residual after projecting out
/// `existing[..count]` (ties toward the smaller index).
fn completion_axis<T: Real>(existing: &[Vec3<T>; 3], count: usize) -> Vec3<T> {
    let mut best: Option<(T, Vec3<T>)> = None;
    for k in 0..3 {
        let mut r = v3_zero();
        r[k] = T::one();
        for u in existing.iter().take(count) {
            r = v3_sub(&r, &v3_scale(u, v3_dot(u, &r)));
        }
        let n = v3_norm(&r);
        let better = match &best {
            None => true,
            Some((bn, _)) => n > *bn,
        };
        if better {
            best = Some((n, r));
        }
    }
    let (n, r) = best.expect("three candidate axes were scanned");
    v3_scale(&r, T::one() / n)
}

/// Computes the signed singular decomposition of the channel's linear
/// block (see [`SingularData`]).
///
/// The decomposition always exists. Implementation: Jacobi
/// eigen-decomposition of `EᵀE` gives `R_V` and the singular values; left
/// vectors come from `E·v_j/σ_j` with Gram-Schmidt re-orthogonalization,
/// falling back to deterministic completion for (near-)zero singular
/// values; determinant signs of both rotations are folded into `λ₃`.
pub fn singular_decompose<T: Real>(ch: &AffineChannel<T>) -> SingularData<T> {
    let e = &ch.e;
    let gram = e.transpose().mul(e);
    let (evals, mut v) = crate::linalg::sym3_eigen(&gram);

    // Make the right factor a proper rotation before forming E·v_j.
    if v.det() < T::zero() {
        let flipped = v3_scale(&v.col(2), -T::one());
        v.set_col(2, &flipped);
    }

    let mut sigma = [T::zero(); 3];
    for i in 0..3 {
        sigma[i] = evals[i].max(T::zero()).sqrt();
    }

    // Left vectors: u_j = E·v_j/σ_j where well-conditioned, re-orthogonalized
    // against the previous columns (tiny σ amplifies rounding in E·v_j);
    // otherwise a deterministic completion.
    let floor = sigma[0].max(T::one()) * T::epsilon() * T::of(64.0);
    let mut u_cols: [Vec3<T>; 3] = [v3_zero(); 3];
    for j in 0..3 {
        let mut candidate = None;
        if sigma[j] > floor {
            let mut uj = v3_scale(&e.mul_vec(&v.col(j)), T::one() / sigma[j]);
            for prev in u_cols.iter().take(j) {
                uj = v3_sub(&uj, &v3_scale(prev, v3_dot(prev, &uj)));
            }
            let n = v3_norm(&uj);
            if n > T::of(0.5) {
                candidate = Some(v3_scale(&uj, T::one() / n));
            }
        }
        u_cols[j] = candidate.unwrap_or_else(|| completion_axis(&u_cols, j));
    }
    let mut u = Mat3::from_cols(&u_cols[0], &u_cols[1], &u_cols[2]);

    let mut lambdas = sigma;
    if u.det() < T::zero() {
        let flipped = v3_scale(&u.col(2), -T::one());
        u.set_col(2, &flipped);
        if sigma[2] > T::zero() {
            lambdas[2] = -sigma[2];
        }
    }

    SingularData {
        lambdas,
        r_u: u,
        r_v: v.transpose(),
    }
}
