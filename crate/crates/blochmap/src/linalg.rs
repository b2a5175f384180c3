//! Small fixed-size linear algebra: 3-vectors as `[T; 3]`, 3×3 real
//! matrices, and cyclic Jacobi eigensolvers for 3×3 real symmetric and 4×4
//! complex Hermitian matrices.
//!
//! Everything here is dimension-specific and allocation-free; the matrices
//! involved never exceed 4×4, so direct Jacobi iteration is both simple and
//! fully deterministic (fixed sweep order, fixed sign/phase normalization).

use crate::scalar::Real;
use crate::tol;
use num_complex::Complex;

/// Real 3-vector.
pub type Vec3<T> = [T; 3];

/// Zero vector.
#[inline]
pub fn v3_zero<T: Real>() -> Vec3<T> {
    [T::zero(); 3]
}

/// Componentwise sum.
#[inline]
pub fn v3_add<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Componentwise difference.
#[inline]
pub fn v3_sub<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Scalar multiple.
#[inline]
pub fn v3_scale<T: Real>(a: &Vec3<T>, s: T) -> Vec3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Euclidean inner product.
#[inline]
pub fn v3_dot<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Cross product `a × b`.
#[inline]
pub fn v3_cross<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Squared Euclidean norm.
#[inline]
pub fn v3_norm2<T: Real>(a: &Vec3<T>) -> T {
    v3_dot(a, a)
}

/// Euclidean norm.
#[inline]
pub fn v3_norm<T: Real>(a: &Vec3<T>) -> T {
    v3_norm2(a).sqrt()
}

/// Euclidean distance.
#[inline]
pub fn v3_dist<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    v3_norm(&v3_sub(a, b))
}

/// Unit vector along `a`, or `None` if `|a| ≤ floor`.
#[inline]
pub fn v3_normalize<T: Real>(a: &Vec3<T>, floor: T) -> Option<Vec3<T>> {
    let n = v3_norm(a);
    if n <= floor {
        None
    } else {
        Some(v3_scale(a, T::one() / n))
    }
}

/// Real 3×3 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Mat3<T> {
    /// Zero matrix.
    pub fn zeros() -> Self {
        Mat3([[T::zero(); 3]; 3])
    }

    /// Identity matrix.
    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][i] = T::one();
        }
        m
    }

    /// Diagonal matrix.
    pub fn diagonal(d: [T; 3]) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][i] = d[i];
        }
        m
    }

    /// Matrix with the given columns.
    pub fn from_cols(c0: &Vec3<T>, c1: &Vec3<T>, c2: &Vec3<T>) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][0] = c0[i];
            m.0[i][1] = c1[i];
            m.0[i][2] = c2[i];
        }
        m
    }

    /// Column `j`.
    pub fn col(&self, j: usize) -> Vec3<T> {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    /// Replaces column `j`.
    pub fn set_col(&mut self, j: usize, c: &Vec3<T>) {
        for i in 0..3 {
            self.0[i][j] = c[i];
        }
    }

    /// Transpose.
    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = T::zero();
                for k in 0..3 {
                    s += self.0[i][k] * rhs.0[k][j];
                }
                m.0[i][j] = s;
            }
        }
        m
    }

    /// Matrix–vector product.
    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        let mut out = v3_zero();
        for i in 0..3 {
            out[i] = self.0[i][0] * v[0] + self.0[i][1] * v[1] + self.0[i][2] * v[2];
        }
        out
    }

    /// Componentwise sum.
    pub fn add(&self, rhs: &Self) -> Self {
        let mut m = *self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += rhs.0[i][j];
            }
        }
        m
    }

    /// Componentwise difference.
    pub fn sub(&self, rhs: &Self) -> Self {
        let mut m = *self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] -= rhs.0[i][j];
            }
        }
        m
    }

    /// Scalar multiple.
    pub fn scale(&self, s: T) -> Self {
        let mut m = *self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] *= s;
            }
        }
        m
    }

    /// Outer product `u·vᵀ`.
    pub fn outer(u: &Vec3<T>, v: &Vec3<T>) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = u[i] * v[j];
            }
        }
        m
    }

    /// Determinant.
    pub fn det(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse via the adjugate, or `None` when `|det| ≤ floor`.
    pub fn inverse(&self, floor: T) -> Option<Self> {
        let d = self.det();
        if d.abs() <= floor {
            return None;
        }
        let m = &self.0;
        let inv_d = T::one() / d;
        let mut a = Self::zeros();
        a.0[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_d;
        a.0[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_d;
        a.0[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_d;
        a.0[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_d;
        a.0[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_d;
        a.0[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_d;
        a.0[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_d;
        a.0[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_d;
        a.0[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_d;
        Some(a)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for row in &self.0 {
            for &x in row {
                m = m.max(x.abs());
            }
        }
        m
    }

    /// Largest absolute entrywise difference to `rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        self.sub(rhs).max_abs()
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> T {
        let mut s = T::zero();
        for row in &self.0 {
            for &x in row {
                s += x * x;
            }
        }
        s.sqrt()
    }

    /// Rotation by `angle` about `axis` (Rodrigues formula). Returns `None`
    /// for a numerically zero axis.
    pub fn rotation_about(axis: &Vec3<T>, angle: T) -> Option<Self> {
        let u = v3_normalize(axis, tol::scaled::<T>(tol::FRAME))?;
        let (s, c) = angle.sin_cos();
        let k = Mat3([
            [T::zero(), -u[2], u[1]],
            [u[2], T::zero(), -u[0]],
            [-u[1], u[0], T::zero()],
        ]);
        let kk = k.mul(&k);
        Some(Self::identity().add(&k.scale(s)).add(&kk.scale(T::one() - c)))
    }
}

/// Largest absolute off-diagonal entry of a 3×3 matrix.
fn off3<T: Real>(a: &Mat3<T>) -> T {
    let mut m = T::zero();
    for p in 0..3 {
        for q in 0..3 {
            if p != q {
                m = m.max(a.0[p][q].abs());
            }
        }
    }
    m
}

/// Classical symmetric Jacobi rotation parameters `(c, s)` that annihilate
/// the off-diagonal entry of `[[app, apq], [apq, aqq]]`.
fn jacobi_cs<T: Real>(app: T, aqq: T, apq: T) -> (T, T) {
    let tau = (aqq - app) / (apq + apq);
    let sign = if tau >= T::zero() { T::one() } else { -T::one() };
    let t = sign / (tau.abs() + (T::one() + tau * tau).sqrt());
    let c = T::one() / (T::one() + t * t).sqrt();
    (c, t * c)
}

/// Eigen-decomposition of a real symmetric 3×3 matrix by cyclic Jacobi
/// sweeps.
///
/// Returns eigenvalues sorted descending and the orthogonal matrix whose
/// columns are the matching eigenvectors, each sign-normalized so its
/// largest-magnitude component is positive. `a` is symmetrized first, so
/// slight asymmetry from rounding is tolerated.
pub fn sym3_eigen<T: Real>(a: &Mat3<T>) -> ([T; 3], Mat3<T>) {
    let mut h = a.add(&a.transpose()).scale(T::of(0.5));
    let mut v = Mat3::identity();
    let scale = h.frobenius().max(T::one());
    let thresh = tol::scaled::<T>(tol::JACOBI_3) * scale;

    for _sweep in 0..64 {
        if off3(&h) <= thresh {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = h.0[p][q];
            if apq.abs() <= thresh * T::of(1e-3) {
                continue;
            }
            let (c, s) = jacobi_cs(h.0[p][p], h.0[q][q], apq);
            // h ← Jᵀ h J and v ← v J with J the (p,q) rotation.
            for k in 0..3 {
                let hkp = h.0[k][p];
                let hkq = h.0[k][q];
                h.0[k][p] = c * hkp - s * hkq;
                h.0[k][q] = s * hkp + c * hkq;
            }
            for k in 0..3 {
                let hpk = h.0[p][k];
                let hqk = h.0[q][k];
                h.0[p][k] = c * hpk - s * hqk;
                h.0[q][k] = s * hpk + c * hqk;
            }
            for k in 0..3 {
                let vkp = v.0[k][p];
                let vkq = v.0[k][q];
                v.0[k][p] = c * vkp - s * vkq;
                v.0[k][q] = s * vkp + c * vkq;
            }
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| {
        h.0[j][j]
            .partial_cmp(&h.0[i][i])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut vals = [T::zero(); 3];
    let mut vecs = Mat3::zeros();
    for (slot, &idx) in order.iter().enumerate() {
        vals[slot] = h.0[idx][idx];
        let mut col = v.col(idx);
        let mut imax = 0;
        for i in 1..3 {
            if col[i].abs() > col[imax].abs() {
                imax = i;
            }
        }
        if col[imax] < T::zero() {
            col = v3_scale(&col, -T::one());
        }
        vecs.set_col(slot, &col);
    }
    (vals, vecs)
}

/// 4×4 complex matrix type used for Choi matrices and their eigenvectors.
pub type CMat4<T> = [[Complex<T>; 4]; 4];

/// Zero 4×4 complex matrix.
pub fn cmat4_zeros<T: Real>() -> CMat4<T> {
    [[Complex::new(T::zero(), T::zero()); 4]; 4]
}

/// Largest absolute off-diagonal entry above the diagonal.
fn off4<T: Real>(a: &CMat4<T>) -> T {
    let mut m = T::zero();
    for p in 0..4 {
        for q in (p + 1)..4 {
            m = m.max(a[p][q].norm());
        }
    }
    m
}

/// Frobenius norm of a 4×4 complex matrix.
fn frob4<T: Real>(a: &CMat4<T>) -> T {
    let mut s = T::zero();
    for row in a {
        for x in row {
            s += x.norm_sqr();
        }
    }
    s.sqrt()
}

/// Eigen-decomposition of a complex Hermitian 4×4 matrix by cyclic Jacobi
/// sweeps with unitary two-plane rotations.
///
/// Returns the (real) eigenvalues sorted descending and a unitary matrix
/// whose columns are the matching eigenvectors. Each eigenvector's phase is
/// normalized so its largest-magnitude component is real and positive,
/// making the output deterministic. `a` is Hermitized first.
pub fn herm4_eigen<T: Real>(a: &CMat4<T>) -> ([T; 4], CMat4<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    let mut h = cmat4_zeros();
    for i in 0..4 {
        for j in 0..4 {
            h[i][j] = (a[i][j] + a[j][i].conj()) * Complex::new(T::of(0.5), T::zero());
        }
    }
    let mut v = cmat4_zeros();
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = Complex::new(T::one(), T::zero());
    }
    let scale = frob4(&h).max(T::one());
    let thresh = tol::scaled::<T>(tol::JACOBI_4) * scale;

    for _sweep in 0..96 {
        if off4(&h) <= thresh {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                let g = h[p][q];
                let gn = g.norm();
                if gn <= thresh * T::of(1e-3) {
                    continue;
                }
                // Unitary rotation u = diag(1, e^{-iφ}) · R(c, s) with
                // φ = arg g, which makes the (p,q) entry real before the
                // classical rotation annihilates it.
                let unit = g / Complex::new(gn, T::zero());
                let phase = unit.conj();
                let (c, s) = jacobi_cs(h[p][p].re, h[q][q].re, gn);
                let upp = Complex::new(c, T::zero());
                let upq = Complex::new(s, T::zero());
                let uqp = phase * Complex::new(-s, T::zero());
                let uqq = phase * Complex::new(c, T::zero());
                // h ← u† h u, applied as columns then rows.
                for k in 0..4 {
                    let hkp = h[k][p];
                    let hkq = h[k][q];
                    h[k][p] = hkp * upp + hkq * uqp;
                    h[k][q] = hkp * upq + hkq * uqq;
                }
                for k in 0..4 {
                    let hpk = h[p][k];
                    let hqk = h[q][k];
                    h[p][k] = upp.conj() * hpk + uqp.conj() * hqk;
                    h[q][k] = upq.conj() * hpk + uqq.conj() * hqk;
                }
                for k in 0..4 {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = vkp * upp + vkq * uqp;
                    v[k][q] = vkp * upq + vkq * uqq;
                }
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| {
        h[j][j]
            .re
            .partial_cmp(&h[i][i].re)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut vals = [T::zero(); 4];
    let mut vecs = cmat4_zeros();
    for (slot, &idx) in order.iter().enumerate() {
        vals[slot] = h[idx][idx].re;
        let mut col = [zero; 4];
        for i in 0..4 {
            col[i] = v[i][idx];
        }
        let mut imax = 0;
        for i in 1..4 {
            if col[i].norm_sqr() > col[imax].norm_sqr() {
                imax = i;
            }
        }
        let n = col[imax].norm();
        if n > T::zero() {
            let rot = col[imax].conj() / Complex::new(n, T::zero());
            for x in &mut col {
                *x = *x * rot;
            }
        }
        for i in 0..4 {
            vecs[i][slot] = col[i];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Closed-form eigenvalues of a symmetric 3×3 matrix via the
    /// trigonometric solution of the characteristic cubic — the independent
    /// oracle for the Jacobi solver.
    fn sym3_eigvals_oracle(a: &Mat3<f64>) -> [f64; 3] {
        let m = &a.0;
        let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        let b = Mat3([
            [m[0][0] - q, m[0][1], m[0][2]],
            [m[1][0], m[1][1] - q, m[1][2]],
            [m[2][0], m[2][1], m[2][2] - q],
        ]);
        let p2 = b.frobenius().powi(2) / 6.0;
        let p = p2.sqrt();
        if p < 1e-300 {
            return [q, q, q];
        }
        let det_b = b.det() / (p * p * p);
        let r = (det_b / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        let mut v = [e1, e2, e3];
        v.sort_by(|x, y| y.partial_cmp(x).unwrap());
        v
    }

    #[test]
    fn mat3_inverse_and_det() {
        let m = Mat3([[0.2, -0.1, 0.1], [0.2, 0.0, -0.3], [0.0, 0.3, 0.3]]);
        let inv = m.inverse(1e-300).unwrap();
        assert!(m.mul(&inv).max_abs_diff(&Mat3::identity()) < 1e-14);
        assert!(close(m.det(), 0.03, 1e-15));
    }

    #[test]
    fn rotation_is_orthogonal() {
        let r = Mat3::<f64>::rotation_about(&[1.0, 2.0, -0.5], 0.83).unwrap();
        assert!(r.mul(&r.transpose()).max_abs_diff(&Mat3::identity()) < 1e-14);
        assert!(close(r.det(), 1.0, 1e-14));
    }

    #[test]
    fn sym3_matches_cubic_oracle_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let mut m = Mat3::zeros();
            for i in 0..3 {
                for j in 0..=i {
                    let x: f64 = rng.gen_range(-2.0..2.0);
                    m.0[i][j] = x;
                    m.0[j][i] = x;
                }
            }
            let (vals, vecs) = sym3_eigen(&m);
            let oracle = sym3_eigvals_oracle(&m);
            for k in 0..3 {
                assert!(
                    close(vals[k], oracle[k], 1e-10),
                    "eigenvalue mismatch: {vals:?} vs {oracle:?}"
                );
            }
            // Reconstruction and orthogonality. The sweep threshold leaves
            // off-diagonal residue up to ~1e-11 on entries of magnitude 2.
            let d = Mat3::diagonal(vals);
            let rec = vecs.mul(&d).mul(&vecs.transpose());
            assert!(rec.max_abs_diff(&m) < 1e-10);
            assert!(vecs.mul(&vecs.transpose()).max_abs_diff(&Mat3::identity()) < 1e-12);
        }
    }

    #[test]
    fn sym3_specex_gram_eigenvalues_match_frozen_oracle() {
        // Frozen from an independent brute-force eigensolve of E·Eᵀ for the
        // running-example channel matrix.
        let e = Mat3::<f64>([[0.2, -0.1, 0.1], [0.2, 0.0, -0.3], [0.0, 0.3, 0.3]]);
        let g = e.mul(&e.transpose());
        let (vals, _) = sym3_eigen(&g);
        let sv = [vals[0].sqrt(), vals[1].sqrt(), vals[2].sqrt()];
        let frozen = [0.49860025234110994, 0.26211837569192115, 0.2295468263557796];
        for k in 0..3 {
            assert!(close(sv[k], frozen[k], 1e-12), "{sv:?} vs {frozen:?}");
        }
    }

    #[test]
    fn herm4_diagonalizes_random_hermitian_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let mut m = cmat4_zeros::<f64>();
            for i in 0..4 {
                m[i][i] = Complex::new(rng.gen_range(-2.0..2.0), 0.0);
                for j in (i + 1)..4 {
                    let z = Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                    m[i][j] = z;
                    m[j][i] = z.conj();
                }
            }
            let (vals, vecs) = herm4_eigen(&m);
            // Sorted descending.
            for k in 0..3 {
                assert!(vals[k] >= vals[k + 1]);
            }
            // m·v_k = λ_k·v_k and unitarity.
            for k in 0..4 {
                for i in 0..4 {
                    let mut mv = Complex::new(0.0, 0.0);
                    for j in 0..4 {
                        mv += m[i][j] * vecs[j][k];
                    }
                    let lv = vecs[i][k] * vals[k];
                    assert!((mv - lv).norm() < 1e-10);
                }
            }
            for a in 0..4 {
                for b in 0..4 {
                    let mut dot = Complex::new(0.0, 0.0);
                    for i in 0..4 {
                        dot += vecs[i][a].conj() * vecs[i][b];
                    }
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - Complex::new(expect, 0.0)).norm() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn herm4_known_spectrum() {
        // diag(3, -1, 2, 0) plus a conjugating rotation must keep the
        // spectrum {3, 2, 0, -1}.
        let mut m = cmat4_zeros::<f64>();
        m[0][0] = Complex::new(3.0, 0.0);
        m[1][1] = Complex::new(-1.0, 0.0);
        m[2][2] = Complex::new(2.0, 0.0);
        m[0][1] = Complex::new(0.0, 0.5);
        m[1][0] = Complex::new(0.0, -0.5);
        let (vals, _) = herm4_eigen(&m);
        // Oracle: the {0,1} block [[3, i/2], [-i/2, -1]] has eigenvalues
        // 1 ± √(4 + 1/4); the others are 2 and 0.
        let root = (4.0f64 + 0.25).sqrt();
        let expect = [1.0 + root, 2.0, 0.0, 1.0 - root];
        for k in 0..4 {
            assert!(close(vals[k], expect[k], 1e-12));
        }
    }
}
