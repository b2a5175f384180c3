//! Complete-positivity machinery.
//!
//! A qubit map in affine form is completely positive iff its Choi matrix
//! `Ω = (E ⊗ I)[P₊]` is positive semidefinite, and trace-preserving iff the
//! partial trace of `Ω` over the first subsystem equals `I/2`. This module
//! builds `Ω` from the affine form and back, certifies positivity (full
//! spectrum plus the Fujiwara–Algoet canonical-frame margins), extracts
//! Kraus operators, samples random CP channels, and provides the weighted
//! trace-distance compatibility screen for two transformation records.

use crate::bloch::{weighted_trace_distance, AffineChannel, BlochVector};
use crate::error::{Error, Result};
use crate::linalg::{cmat4_zeros, herm4_eigen, CMat4};
use crate::reconstruct::TransformationRecord;
use crate::scalar::Real;
use crate::tol;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

type C<T> = Complex<T>;
type Mat2<T> = [[Complex<T>; 2]; 2];

fn c0<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

fn cr<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

fn mat2_zeros<T: Real>() -> Mat2<T> {
    [[c0(); 2]; 2]
}

fn mat2_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut m = mat2_zeros();
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

fn mat2_adjoint<T: Real>(a: &Mat2<T>) -> Mat2<T> {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

/// Pauli matrix `σ_ν` for `ν ∈ {0 = I, 1 = x, 2 = y, 3 = z}`.
fn sigma<T: Real>(nu: usize) -> Mat2<T> {
    let one = T::one();
    match nu {
        0 => [[cr(one), c0()], [c0(), cr(one)]],
        1 => [[c0(), cr(one)], [cr(one), c0()]],
        2 => [
            [c0(), Complex::new(T::zero(), -one)],
            [Complex::new(T::zero(), one), c0()],
        ],
        3 => [[cr(one), c0()], [c0(), cr(-one)]],
        _ => unreachable!("Pauli index must be 0..=3"),
    }
}

/// `Tr[m · s]` for 2×2 complex matrices.
fn trace_product<T: Real>(m: &Mat2<T>, s: &Mat2<T>) -> C<T> {
    let mut acc = c0();
    for a in 0..2 {
        for c in 0..2 {
            acc += m[a][c] * s[c][a];
        }
    }
    acc
}

/// Choi matrix of a qubit map: `Ω = (E ⊗ I)[P₊]` with the channel acting
/// on the first tensor factor and `P₊` the maximally entangled projector.
///
/// Hermitian with unit trace for any affine input; positive semidefinite
/// exactly when the map is completely positive. Row/column index `2a + b`
/// combines the first-factor index `a` with the second-factor index `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChoiMatrix<T> {
    omega: CMat4<T>,
}

impl<T: Real> ChoiMatrix<T> {
    /// Wraps a caller-supplied 4×4 matrix, validating finiteness and
    /// Hermiticity (within the Hermiticity tolerance) and storing the
    /// Hermitized average `(Ω + Ω†)/2`.
    pub fn new(omega: CMat4<T>) -> Result<Self> {
        let mut residual = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                let z = omega[i][j];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::Invalid {
                        field: "choi".to_string(),
                        reason: "non-finite entry".to_string(),
                    });
                }
                residual = residual.max((z - omega[j][i].conj()).norm());
            }
        }
        let eps = tol::scaled::<T>(tol::HERM);
        if residual > eps {
            return Err(Error::NotHermitian {
                residual: residual.as_f64(),
                tolerance: eps.as_f64(),
            });
        }
        let mut h = cmat4_zeros();
        let half = cr(T::of(0.5));
        for i in 0..4 {
            for j in 0..4 {
                h[i][j] = (omega[i][j] + omega[j][i].conj()) * half;
            }
        }
        Ok(ChoiMatrix { omega: h })
    }

    /// Internal constructor for matrices that are Hermitian by
    /// construction.
    pub(crate) fn from_parts(omega: CMat4<T>) -> Self {
        ChoiMatrix { omega }
    }

    /// The underlying 4×4 matrix.
    pub fn matrix(&self) -> &CMat4<T> {
        &self.omega
    }

    /// `Tr Ω` (1 for trace-preserving maps).
    pub fn trace(&self) -> T {
        let mut s = T::zero();
        for i in 0..4 {
            s += self.omega[i][i].re;
        }
        s
    }

    /// Partial trace over the first subsystem (the channel leg):
    /// `(Tr₁Ω)[b][b'] = Σ_a Ω[2a+b][2a+b']`.
    pub fn partial_trace_first(&self) -> Mat2<T> {
        let mut m = mat2_zeros();
        for b in 0..2 {
            for bp in 0..2 {
                for a in 0..2 {
                    m[b][bp] += self.omega[2 * a + b][2 * a + bp];
                }
            }
        }
        m
    }

    /// Largest absolute deviation of `Tr₁Ω` from `I/2` — zero exactly when
    /// the underlying map is trace-preserving.
    pub fn trace_preserving_residual(&self) -> T {
        let pt = self.partial_trace_first();
        let half = T::of(0.5);
        let mut r = T::zero();
        for b in 0..2 {
            for bp in 0..2 {
                let expect = if b == bp { cr(half) } else { c0() };
                r = r.max((pt[b][bp] - expect).norm());
            }
        }
        r
    }

    /// Eigen-decomposition: eigenvalues descending with matching
    /// orthonormal eigenvector columns (deterministic phase convention).
    pub fn eigen(&self) -> ([T; 4], CMat4<T>) {
        herm4_eigen(&self.omega)
    }

    /// Smallest eigenvalue (negative for non-CP maps).
    pub fn min_eigenvalue(&self) -> T {
        self.eigen().0[3]
    }
}

/// Bloch expansion `e_bb' = ½(c₀·I + c⃗·σ⃗)` of the matrix unit
/// `|b⟩⟨b'|`; the coefficients are complex for the off-diagonal units.
fn matrix_unit_bloch<T: Real>(b: usize, bp: usize) -> (C<T>, [C<T>; 3]) {
    let one = T::one();
    match (b, bp) {
        (0, 0) => (cr(one), [c0(), c0(), cr(one)]),
        (0, 1) => (c0(), [cr(one), Complex::new(T::zero(), one), c0()]),
        (1, 0) => (c0(), [cr(one), Complex::new(T::zero(), -one), c0()]),
        (1, 1) => (cr(one), [c0(), c0(), cr(-one)]),
        _ => unreachable!("qubit indices are 0 or 1"),
    }
}

/// Builds the Choi matrix of an affine channel.
///
/// The channel is lifted to operators by linearity: a unit-trace-`c₀`
/// operator `½(c₀I + c⃗·σ⃗)` maps to `½(c₀I + (E·c⃗ + c₀·t⃗)·σ⃗)`. Then
/// `Ω[2a+b][2a'+b'] = ½·E[|b⟩⟨b'|][a][a']`. The result is Hermitian by
/// construction and satisfies `Tr₁Ω = I/2` structurally.
pub fn choi_from_affine<T: Real>(ch: &AffineChannel<T>) -> ChoiMatrix<T> {
    let half = cr(T::of(0.5));
    let t = ch.t.to_array();
    let mut omega = cmat4_zeros();
    for b in 0..2 {
        for bp in 0..2 {
            let (cc0, c) = matrix_unit_bloch::<T>(b, bp);
            // Image coefficients: d₀ = c₀, d = E·c + c₀·t (complex c).
            let mut d = [c0(); 3];
            for i in 0..3 {
                let mut acc = cc0 * cr(t[i]);
                for j in 0..3 {
                    acc += c[j] * cr(ch.e.0[i][j]);
                }
                d[i] = acc;
            }
            // A = ½(d₀I + d·σ) as an explicit 2×2.
            let i_unit = Complex::new(T::zero(), T::one());
            let a_op: Mat2<T> = [
                [(cc0 + d[2]) * half, (d[0] - i_unit * d[1]) * half],
                [(d[0] + i_unit * d[1]) * half, (cc0 - d[2]) * half],
            ];
            for a in 0..2 {
                for ap in 0..2 {
                    omega[2 * a + b][2 * ap + bp] = a_op[a][ap] * half;
                }
            }
        }
    }
    ChoiMatrix::from_parts(omega)
}

/// Recovers the affine form from a Choi matrix (inverse of
/// [`choi_from_affine`]).
///
/// Contracting the second leg with `σ_νᵀ` gives `M_ν = ½·E[σ_νᵀ]`; the
/// translation is `t_i = Re Tr[M₀σ_i]` and the columns of `E` follow from
/// `M_x, M_y, M_z` with a sign flip on the `y` column (`σ_yᵀ = −σ_y`).
///
/// Errors when `Tr₁Ω` deviates from `I/2` beyond the numerical tolerance
/// (the matrix does not describe a trace-preserving map).
pub fn affine_from_choi<T: Real>(omega: &ChoiMatrix<T>) -> Result<AffineChannel<T>> {
    let residual = omega.trace_preserving_residual();
    let eps = tol::scaled::<T>(tol::NUM);
    if residual > eps {
        return Err(Error::NotTracePreserving {
            residual: residual.as_f64(),
            tolerance: eps.as_f64(),
        });
    }
    // M_ν[a][a'] = Σ_{b,b'} Ω[2a+b][2a'+b'] · σ_ν[b'][b].
    let mut m_nu = [mat2_zeros::<T>(); 4];
    for (nu, m) in m_nu.iter_mut().enumerate() {
        let s = sigma::<T>(nu);
        for a in 0..2 {
            for ap in 0..2 {
                let mut acc = c0();
                for b in 0..2 {
                    for bp in 0..2 {
                        acc += omega.omega[2 * a + b][2 * ap + bp] * s[bp][b];
                    }
                }
                m[a][ap] = acc;
            }
        }
    }
    let mut t = [T::zero(); 3];
    let mut e = crate::linalg::Mat3::zeros();
    let col_sign = [T::one(), -T::one(), T::one()];
    for i in 0..3 {
        let si = sigma::<T>(i + 1);
        t[i] = trace_product(&m_nu[0], &si).re;
        for j in 0..3 {
            e.0[i][j] = col_sign[j] * trace_product(&m_nu[j + 1], &si).re;
        }
    }
    Ok(AffineChannel::new(e, BlochVector::from_array(t)))
}

/// Outcome of a complete-positivity check.
///
/// `is_cp` reflects the full Choi spectrum: it is true iff
/// `min_choi_eigenvalue ≥ −ε` at the CP tolerance used for the check. The
/// `fa_margins` are the four linear Fujiwara–Algoet factors evaluated in
/// the canonical (singular) frame — see [`certify_cp`] — and are reported
/// for diagnosis: they are necessary conditions, and for unital channels
/// their minimum is exactly four times the minimal Choi eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpCertificate<T> {
    /// True when the map is completely positive within tolerance.
    pub is_cp: bool,
    /// Smallest eigenvalue of the Choi matrix.
    pub min_choi_eigenvalue: T,
    /// Linear factors `[(1+λ₃)−h₊, (1−λ₃)−h₋, (1+λ₃)+h₊, (1−λ₃)+h₋]`
    /// with `h± = √((λ₁±λ₂)² + t₃²)`; products of the paired factors give
    /// the quadratic slacks `(1±λ₃)² − t₃² − (λ₁±λ₂)²`.
    pub fa_margins: [T; 4],
    /// Deviation of `Tr₁Ω` from `I/2` (zero by construction here).
    pub trace_preserving_residual: T,
}

/// Certifies complete positivity at the default CP tolerance (1e-9 at
/// `f64`).
pub fn certify_cp<T: Real>(ch: &AffineChannel<T>) -> CpCertificate<T> {
    certify_cp_with(ch, tol::scaled::<T>(tol::CP))
}

/// Certifies complete positivity: builds the Choi matrix, takes its full
/// spectrum, and evaluates the Fujiwara–Algoet margins in the canonical
/// frame (`λ`'s from the signed singular decomposition, `t₃` the third
/// component of `R_Uᵀ·t`).
///
/// `is_cp ⇔ min Choi eigenvalue ≥ −cp_epsilon`. The margins are reported
/// as the four linear factors (see [`CpCertificate::fa_margins`]); all
/// four are nonnegative for every CP map, and for unital channels their
/// sign determines CP exactly.
pub fn certify_cp_with<T: Real>(ch: &AffineChannel<T>, cp_epsilon: T) -> CpCertificate<T> {
    let omega = choi_from_affine(ch);
    let (evals, _) = omega.eigen();
    let min_eig = evals[3];

    let sd = crate::bloch::singular_decompose(ch);
    let l = sd.lambdas;
    let t_canon = sd.r_u.transpose().mul_vec(&ch.t.to_array());
    let t3 = t_canon[2];
    let h_plus = ((l[0] + l[1]) * (l[0] + l[1]) + t3 * t3).sqrt();
    let h_minus = ((l[0] - l[1]) * (l[0] - l[1]) + t3 * t3).sqrt();
    let one = T::one();
    let fa_margins = [
        (one + l[2]) - h_plus,
        (one - l[2]) - h_minus,
        (one + l[2]) + h_plus,
        (one - l[2]) + h_minus,
    ];

    CpCertificate {
        is_cp: min_eig >= -cp_epsilon,
        min_choi_eigenvalue: min_eig,
        fa_margins,
        trace_preserving_residual: omega.trace_preserving_residual(),
    }
}

/// A set of 1–4 Kraus operators `A_k` with `Σ A_k†A_k = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet<T> {
    ops: Vec<Mat2<T>>,
}

impl<T: Real> KrausSet<T> {
    /// Builds a Kraus set, validating the operator count (1–4),
    /// finiteness, and completeness `Σ A_k†A_k = I`.
    ///
    /// The completeness budget is a small multiple of the CP tolerance:
    /// spectral truncation of a boundary-CP Choi matrix can displace
    /// completeness by up to a few times that tolerance.
    pub fn new(ops: Vec<Mat2<T>>) -> Result<Self> {
        if ops.is_empty() || ops.len() > 4 {
            return Err(Error::Invalid {
                field: "kraus".to_string(),
                reason: format!("operator count {} outside 1..=4", ops.len()),
            });
        }
        for op in &ops {
            for row in op {
                for z in row {
                    if !(z.re.is_finite() && z.im.is_finite()) {
                        return Err(Error::Invalid {
                            field: "kraus".to_string(),
                            reason: "non-finite entry".to_string(),
                        });
                    }
                }
            }
        }
        let set = KrausSet { ops };
        let residual = set.completeness_residual();
        let budget = tol::scaled::<T>(tol::CP) * T::of(8.0);
        if residual > budget {
            return Err(Error::Invalid {
                field: "kraus".to_string(),
                reason: format!(
                    "completeness residual {} exceeds {}",
                    residual.as_f64(),
                    budget.as_f64()
                ),
            });
        }
        Ok(set)
    }

    /// The operators.
    pub fn operators(&self) -> &[Mat2<T>] {
        &self.ops
    }

    /// Number of operators.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    /// True when the set is empty (never for validated sets).
    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Largest absolute entry of `Σ A_k†A_k − I`.
    pub fn completeness_residual(&self) -> T {
        let mut acc: Mat2<T> = mat2_zeros();
        for a in &self.ops {
            let prod = mat2_mul(&mat2_adjoint(a), a);
            for i in 0..2 {
                for j in 0..2 {
                    acc[i][j] += prod[i][j];
                }
            }
        }
        let mut r = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { cr(T::one()) } else { c0() };
                r = r.max((acc[i][j] - expect).norm());
            }
        }
        r
    }

    /// The affine form of the induced channel `ρ → Σ A_k ρ A_k†`.
    ///
    /// The translation is read from the image of `I/2` and the columns of
    /// `E` from the images of the Pauli matrices:
    /// `t_j = ½·Re Tr[σ_j·Σ A A†]`, `E[i][j] = ½·Re Tr[σ_i·Σ A σ_j A†]`.
    pub fn to_affine(&self) -> AffineChannel<T> {
        let half = T::of(0.5);
        let mut t = [T::zero(); 3];
        let mut e = crate::linalg::Mat3::zeros();
        // Image of the identity: Σ A A†.
        let mut img_id = mat2_zeros();
        for a in &self.ops {
            let prod = mat2_mul(a, &mat2_adjoint(a));
            for i in 0..2 {
                for j in 0..2 {
                    img_id[i][j] += prod[i][j];
                }
            }
        }
        for i in 0..3 {
            let si = sigma::<T>(i + 1);
            t[i] = half * trace_product(&si, &img_id).re;
            for j in 0..3 {
                let sj = sigma::<T>(j + 1);
                let mut img = mat2_zeros();
                for a in &self.ops {
                    let prod = mat2_mul(&mat2_mul(a, &sj), &mat2_adjoint(a));
                    for p in 0..2 {
                        for q in 0..2 {
                            img[p][q] += prod[p][q];
                        }
                    }
                }
                e.0[i][j] = half * trace_product(&si, &img).re;
            }
        }
        AffineChannel::new(e, BlochVector::from_array(t))
    }
}

/// Extracts Kraus operators from a Choi matrix at the default CP
/// tolerance.
pub fn kraus_from_choi<T: Real>(omega: &ChoiMatrix<T>) -> Result<KrausSet<T>> {
    kraus_from_choi_with(omega, tol::scaled::<T>(tol::CP))
}

/// Extracts Kraus operators from a Choi matrix.
///
/// Each eigenpair `(μ_k, v_k)` with `μ_k > cp_epsilon` yields
/// `A_k[a][b] = √(2μ_k)·v_k[2a+b]` (row-major reshape; the factor 2 is the
/// qubit dimension). Requires the matrix to be positive semidefinite
/// within `cp_epsilon`; eigenvalues below `−cp_epsilon` are reported as a
/// complete-positivity failure.
pub fn kraus_from_choi_with<T: Real>(
    omega: &ChoiMatrix<T>,
    cp_epsilon: T,
) -> Result<KrausSet<T>> {
    let (evals, vecs) = omega.eigen();
    if evals[3] < -cp_epsilon {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: evals[3].as_f64(),
            tolerance: cp_epsilon.as_f64(),
        });
    }
    let mut ops = Vec::new();
    for (k, &mu) in evals.iter().enumerate() {
        if mu > cp_epsilon {
            let scale = cr((T::of(2.0) * mu).sqrt());
            let mut a = mat2_zeros();
            for row in 0..2 {
                for col in 0..2 {
                    a[row][col] = vecs[2 * row + col][k] * scale;
                }
            }
            ops.push(a);
        }
    }
    if ops.is_empty() {
        // A trace-one PSD matrix always has an eigenvalue ≥ 1/4; reaching
        // here means the input was not a valid Choi matrix.
        return Err(Error::Invalid {
            field: "choi".to_string(),
            reason: "no eigenvalue above the CP tolerance".to_string(),
        });
    }
    KrausSet::new(ops)
}

/// Result of the two-record compatibility screen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UhlmannOutcome<T> {
    /// True when no grid point violates the inequality beyond tolerance.
    pub compatible: bool,
    /// Smallest value of `D(ρ₁, t·ρ₂) − D(ρ₁′, t·ρ₂′)` over the grid
    /// (negative = violation).
    pub worst_margin: T,
    /// Grid point attaining the worst margin.
    pub worst_t: T,
}

/// Default weight grid for [`uhlmann_compatible`]: `points` log-spaced
/// values on `[1e-3, 1e3]` plus the exact weight 1 appended (the plain
/// contractivity case).
pub fn default_t_grid<T: Real>(points: usize) -> Vec<T> {
    let mut grid = Vec::with_capacity(points + 1);
    let denom = points.saturating_sub(1).max(1);
    for i in 0..points {
        let expo = -3.0 + 6.0 * (i as f64) / (denom as f64);
        grid.push(T::of(10f64.powf(expo)));
    }
    grid.push(T::one());
    grid
}

/// Screens two transformation records against the weighted-distance
/// compatibility condition `D(ρ₁, t·ρ₂) ≥ D(ρ₁′, t·ρ₂′)` for all `t > 0`,
/// evaluated on the supplied grid.
///
/// A CP map connecting both records must satisfy the inequality for every
/// positive weight, so any violation proves the records inconsistent; a
/// pass on a finite grid is a screen, not a proof. Errors on an empty grid
/// or nonpositive weights, and on invalid states.
pub fn uhlmann_compatible<T: Real>(
    records: &[TransformationRecord<T>; 2],
    t_grid: &[T],
) -> Result<UhlmannOutcome<T>> {
    if t_grid.is_empty() {
        return Err(Error::Invalid {
            field: "t_grid".to_string(),
            reason: "empty grid".to_string(),
        });
    }
    for &t in t_grid {
        if !(t > T::zero()) || !t.is_finite() {
            return Err(Error::Invalid {
                field: "t_grid".to_string(),
                reason: format!("nonpositive or non-finite weight {}", t.as_f64()),
            });
        }
    }
    for r in records {
        r.validate()?;
    }
    let (in1, in2) = (records[0].input, records[1].input);
    let (out1, out2) = (records[0].output, records[1].output);
    let mut worst_margin = T::infinity();
    let mut worst_t = t_grid[0];
    for &t in t_grid {
        let margin = weighted_trace_distance(in1, in2, t) - weighted_trace_distance(out1, out2, t);
        if margin < worst_margin {
            worst_margin = margin;
            worst_t = t;
        }
    }
    Ok(UhlmannOutcome {
        compatible: worst_margin >= -tol::scaled::<T>(tol::NUM),
        worst_margin,
        worst_t,
    })
}

/// Samples a random Kraus set with `k` operators (1–4).
///
/// Draws independent complex-Gaussian 2×2 matrices `B_i` and normalizes
/// them by the inverse square root of `S = Σ B_i†B_i` (closed form for
/// 2×2 positive matrices), so completeness holds by construction. The
/// induced channel is CP by construction.
pub fn random_kraus_set<T: Real, R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<KrausSet<T>> {
    if k == 0 || k > 4 {
        return Err(Error::Invalid {
            field: "kraus_count".to_string(),
            reason: format!("operator count {k} outside 1..=4"),
        });
    }
    let mut raw: Vec<Mat2<T>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut b = mat2_zeros();
        for row in b.iter_mut() {
            for z in row.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *z = Complex::new(T::of(re), T::of(im));
            }
        }
        raw.push(b);
    }
    // S = Σ B†B — Hermitian positive definite almost surely.
    let mut s: Mat2<T> = mat2_zeros();
    for b in &raw {
        let prod = mat2_mul(&mat2_adjoint(b), b);
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] += prod[i][j];
            }
        }
    }
    // Closed-form principal square root of a 2×2 positive matrix:
    // √S = (S + √(det S)·I) / √(tr S + 2√(det S)).
    let det = (s[0][0] * s[1][1] - s[0][1] * s[1][0]).re.max(T::zero());
    let tr = (s[0][0] + s[1][1]).re;
    let root_det = det.sqrt();
    let denom = (tr + T::of(2.0) * root_det).sqrt();
    if !(denom > T::zero()) {
        return Err(Error::Invalid {
            field: "kraus_normalization".to_string(),
            reason: "degenerate Gaussian draw".to_string(),
        });
    }
    let mut sqrt_s = s;
    sqrt_s[0][0] += cr(root_det);
    sqrt_s[1][1] += cr(root_det);
    let inv_denom = cr(T::one() / denom);
    for row in sqrt_s.iter_mut() {
        for z in row.iter_mut() {
            *z = *z * inv_denom;
        }
    }
    // Inverse via the 2×2 adjugate; det √S = √(det S).
    let sqrt_det = sqrt_s[0][0] * sqrt_s[1][1] - sqrt_s[0][1] * sqrt_s[1][0];
    let inv_sqrt = [
        [sqrt_s[1][1] / sqrt_det, -sqrt_s[0][1] / sqrt_det],
        [-sqrt_s[1][0] / sqrt_det, sqrt_s[0][0] / sqrt_det],
    ];
    let ops = raw.iter().map(|b| mat2_mul(b, &inv_sqrt)).collect();
    KrausSet::new(ops)
}

/// Samples a random CP trace-preserving channel in affine form: a random
/// Kraus set with a uniformly drawn operator count (1–4).
pub fn random_cp_channel<T: Real, R: Rng + ?Sized>(rng: &mut R) -> AffineChannel<T> {
    let k = rng.gen_range(1..=4usize);
    random_kraus_set(k, rng)
        .expect("count is in range and Gaussian draws are nondegenerate")
        .to_affine()
}
