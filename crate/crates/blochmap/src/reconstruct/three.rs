//! Three-record reconstruction: plane canonicalization and the
//! mixture-in-plane / general-position branches.

use crate::bloch::{
    complete_frame, AffineChannel, BlochVector, Frame, FrameSlot, Orientation,
};
use crate::cp::certify_cp_with;
use crate::error::{Error, Result};
use crate::linalg::{v3_add, v3_cross, v3_dist, v3_dot, v3_norm, v3_scale, v3_sub, Mat3, Vec3};
use crate::scalar::Real;
use crate::tol;

use super::search::{constrained_search, SearchConfig};
use super::{
    assemble, EstimateOptions, OptimizerTrace, OptimizerVariables, ReconstructionReport,
    StrategyBranch, TransformationRecord,
};

/// Three-record estimation.
///
/// The affinely independent inputs span a plane. An orthonormal basis
/// `(p1, p2)` of the plane's direction space (Gram–Schmidt on the input
/// differences) and its normal `n = p1 × p2` form the adaptable input frame;
/// the output frame stays σ. The records fix the images `q1`, `q2` of the
/// plane directions and the image `m'` of the in-plane point `xi0 = s0·n`
/// closest to the total mixture (`s0 = n·v1` is the plane's signed distance
/// from the mixture). Every affine map consistent with the records is then
///
/// ```text
/// E(c) = q1 p1ᵀ + q2 p2ᵀ + c nᵀ,   t(c) = m' − s0·c,
/// ```
///
/// with only the image `c` of the normal direction free.
///
/// * **Mixture in the plane** (`s0 ≈ 0`, [`StrategyBranch::ThreeWithMixture`]):
///   the translation is pinned to `t = m'`, and the conservative choice
///   minimizes `|c|` — equivalently, how far the two states straddling the
///   plane are kept apart.
/// * **General position** ([`StrategyBranch::ThreeGeneral`]): the
///   conservative choice minimizes the mixture shift `|t(c)|`.
///
/// Closed forms are snapped before searching: identical outputs give the
/// constant map; an isometric in-plane image gives the unique rotation
/// completion; in general position `c = m'/s0` cancels the shift entirely
/// when that completion is completely positive.
pub(crate) fn estimate_three<T: Real>(
    first: &TransformationRecord<T>,
    second: &TransformationRecord<T>,
    third: &TransformationRecord<T>,
    options: &EstimateOptions<T>,
) -> Result<ReconstructionReport<T>> {
    let eps = tol::scaled::<T>(tol::STATE);
    let one = T::one();

    let v1 = first.input.to_array();
    let v2 = second.input.to_array();
    let v3 = third.input.to_array();
    let w1 = first.output.to_array();
    let w2 = second.output.to_array();
    let w3 = third.output.to_array();

    let d21 = v3_sub(&v2, &v1);
    let l21 = v3_norm(&d21);
    if l21 <= eps {
        return Err(Error::DegenerateGeometry {
            reason: "the first two inputs coincide".into(),
        });
    }
    let p1 = v3_scale(&d21, one / l21);
    let d31 = v3_sub(&v3, &v1);
    let a3 = v3_dot(&d31, &p1);
    let residual = v3_sub(&d31, &v3_scale(&p1, a3));
    let b3 = v3_norm(&residual);
    if b3 <= eps {
        return Err(Error::DegenerateGeometry {
            reason: "the three inputs are collinear".into(),
        });
    }
    let p2 = v3_scale(&residual, one / b3);
    let normal = v3_cross(&p1, &p2);
    let s0 = v3_dot(&normal, &v1);

    let q1 = v3_scale(&v3_sub(&w2, &w1), one / l21);
    let q2 = v3_scale(&v3_sub(&v3_sub(&w3, &w1), &v3_scale(&q1, a3)), one / b3);

    // Image of the plane point closest to the mixture, by the affine
    // combination the inputs dictate.
    let xi0 = v3_scale(&normal, s0);
    let c1 = v3_dot(&v3_sub(&xi0, &v1), &p1);
    let c2 = v3_dot(&v3_sub(&xi0, &v1), &p2);
    let m_prime = v3_add(&w1, &v3_add(&v3_scale(&q1, c1), &v3_scale(&q2, c2)));

    let in_frame = Frame::new(
        BlochVector::from_array(p1),
        BlochVector::from_array(p2),
        BlochVector::from_array(normal),
    )?;

    // Adapted output frame: slot X along the image of the first plane
    // direction, slot Y along the across component of the second image,
    // falling back to deterministic completions (and ultimately to the
    // σ frame) as the images degenerate. In this frame the estimate has
    // its sparse canonical form and the free column reads (m, n, k); for
    // rotation data the frame rotates along, forcing (m, n, k) = (0, 0, 1).
    let frame_eps = tol::scaled::<T>(tol::FRAME);
    let q1_norm = v3_norm(&q1);
    let q2_norm = v3_norm(&q2);
    let out_frame = if q1_norm > frame_eps {
        let ex = v3_scale(&q1, one / q1_norm);
        let across = v3_sub(&q2, &v3_scale(&ex, v3_dot(&q2, &ex)));
        let across_norm = v3_norm(&across);
        if across_norm > frame_eps {
            let ey = v3_scale(&across, one / across_norm);
            let ez = v3_cross(&ex, &ey);
            Frame::new(
                BlochVector::from_array(ex),
                BlochVector::from_array(ey),
                BlochVector::from_array(ez),
            )?
        } else {
            complete_frame(
                BlochVector::from_array(ex),
                FrameSlot::X,
                Orientation::RightHanded,
            )?
        }
    } else if q2_norm > frame_eps {
        complete_frame(
            BlochVector::from_array(v3_scale(&q2, one / q2_norm)),
            FrameSlot::Y,
            Orientation::RightHanded,
        )?
    } else {
        Frame::sigma()
    };
    let case_mixture = s0.abs() <= eps;
    let branch = if case_mixture {
        StrategyBranch::ThreeWithMixture
    } else {
        StrategyBranch::ThreeGeneral
    };
    let records = [*first, *second, *third];

    let family = |c: &Vec3<T>, t: &Vec3<T>| {
        AffineChannel::new(Mat3::from_cols(&q1, &q2, c), BlochVector::from_array(*t))
    };
    let from_c = |c: &Vec3<T>| {
        let t = if case_mixture {
            m_prime
        } else {
            v3_sub(&m_prime, &v3_scale(c, s0))
        };
        family(c, &t)
    };
    // `family` expresses the output in σ coordinates; re-express it (and
    // the free column) in the adapted output frame before assembling.
    let finish = |channel: AffineChannel<T>, c: Vec3<T>, optimizer: OptimizerTrace<T>| {
        let y_t = out_frame.matrix().transpose();
        let adapted = AffineChannel::new(
            y_t.mul(&channel.e),
            BlochVector::from_array(y_t.mul_vec(&channel.t.to_array())),
        );
        let c_out = y_t.mul_vec(&c);
        let mut variables = OptimizerVariables::zero();
        variables.m = c_out[0];
        variables.n = c_out[1];
        variables.k = c_out[2];
        assemble(
            adapted, in_frame, out_frame, branch, variables, optimizer, &records, options,
        )
    };

    // Identical outputs are taken at face value: the records describe a
    // constant preparation, and the estimate is that constant map. This
    // precedes the shift-minimizing completion, which could otherwise
    // explain the same data by a unital map nobody observed.
    if v3_dist(&w1, &w2) <= frame_eps
        && v3_dist(&w1, &w3) <= frame_eps
        && v3_dist(&w2, &w3) <= frame_eps
    {
        let constant = AffineChannel::new(Mat3::zeros(), BlochVector::from_array(w1));
        return finish(constant, [T::zero(); 3], OptimizerTrace::closed_form());
    }

    // Isometric in-plane image: complete positivity then forces a unitary
    // rotation, whose normal column is q1 × q2 (the improper completion is
    // never completely positive). If the rotation candidate fails the
    // certificate — e.g. reflection data, or a residual translation in
    // general position — no member of the family passes it, and the search
    // below documents the violation.
    let g11 = v3_dot(&q1, &q1);
    let g22 = v3_dot(&q2, &q2);
    let g12 = v3_dot(&q1, &q2);
    if (g11 - one).abs() <= eps && (g22 - one).abs() <= eps && g12.abs() <= eps {
        let c_rot = v3_cross(&q1, &q2);
        let candidate = from_c(&c_rot);
        if certify_cp_with(&candidate, options.cp_epsilon).is_cp {
            return finish(candidate, c_rot, OptimizerTrace::closed_form());
        }
    }

    // General position: c = m'/s0 cancels the mixture shift exactly. When
    // completely positive it is the unique shift minimizer (the objective's
    // sublevel sets are balls in c, so the constrained minimizer is a metric
    // projection onto a convex set).
    if !case_mixture {
        let c0 = v3_scale(&m_prime, one / s0);
        let candidate = family(&c0, &[T::zero(); 3]);
        if certify_cp_with(&candidate, options.cp_epsilon).is_cp {
            return finish(candidate, c0, OptimizerTrace::closed_form());
        }
    }

    let config = SearchConfig {
        cp_epsilon: options.cp_epsilon,
        seed: options.seed,
        restarts: options.restarts,
    };
    let builder = |v: &[T]| from_c(&[v[0], v[1], v[2]]);
    let objective = |v: &[T]| {
        let c = [v[0], v[1], v[2]];
        if case_mixture {
            v3_norm(&c)
        } else {
            v3_norm(&v3_sub(&m_prime, &v3_scale(&c, s0)))
        }
    };
    let objectives: [&dyn Fn(&[T]) -> T; 1] = [&objective];
    let out = constrained_search(3, &builder, &objectives, &config)?;
    let c = [out.vars[0], out.vars[1], out.vars[2]];
    finish(
        from_c(&c),
        c,
        OptimizerTrace {
            iterations: out.iterations,
            restarts_used: out.restarts_used,
            final_objectives: out.objectives,
        },
    )
}
