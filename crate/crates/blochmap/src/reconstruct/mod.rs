//! Reconstruction of a best-estimate channel from known state transformations.
//!
//! Given 0–3 records `input ↦ output` (plus a 4-record exact solver), the
//! [`estimate`] entry point returns the most conservative completely positive
//! trace-preserving channel consistent with the data: the action the records
//! pin down is reproduced exactly, and every unconstrained degree of freedom
//! is chosen to move states as little as possible — first the total mixture,
//! then the remaining unknown directions — breaking ties toward the total
//! contraction.
//!
//! The estimate is reported twice: in the fixed σ-basis and in an *adaptable*
//! basis (an input and an output [`Frame`]) in which its structure is
//! sparse/diagonal.

mod search;
mod three;
mod two;

pub use search::{constrained_search, SearchConfig, SearchOutcome};
pub use two::{canonicalize_pair, CanonicalPair};

use crate::bloch::{
    complete_frame, rebase, trace_distance, AffineChannel, BlochVector, Frame, FrameSlot,
    Orientation,
};
use crate::cp::{certify_cp_with, CpCertificate};
use crate::error::{Error, Result};
use crate::linalg::{v3_cross, v3_norm, v3_sub, Mat3};
use crate::scalar::Real;
use crate::tol;

/// One observed transformation: a known input state and its image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformationRecord<T> {
    /// Bloch vector of the prepared input state.
    pub input: BlochVector<T>,
    /// Bloch vector of the measured output state.
    pub output: BlochVector<T>,
}

impl<T: Real> TransformationRecord<T> {
    /// Creates a record, validating that both ends are physical states.
    pub fn new(input: BlochVector<T>, output: BlochVector<T>) -> Result<Self> {
        let record = TransformationRecord { input, output };
        record.validate()?;
        Ok(record)
    }

    /// Checks that both Bloch vectors lie in the closed unit ball
    /// (within the state tolerance).
    pub fn validate(&self) -> Result<()> {
        self.input.validate_state()?;
        self.output.validate_state()
    }
}

/// Which intersection of the two-record line with the pure-state shell is
/// promoted to the canonical pure operator ξ₁.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootChoice {
    /// The intersection closer to the first input (smaller |line parameter|);
    /// ties resolve to the positive parameter. This is the default.
    Nearer,
    /// The opposite intersection.
    Farther,
}

/// Options controlling [`estimate`].
#[derive(Clone, Copy, Debug)]
pub struct EstimateOptions<T> {
    /// Seed for the deterministic optimizer restarts beyond the built-in
    /// seed table.
    pub seed: u64,
    /// Number of optimizer restarts (must be at least 1).
    pub restarts: usize,
    /// For the two-record non-unital branch, additionally search all six
    /// template variables and keep the lexicographically better solution.
    pub refine6: bool,
    /// Root selection for [`canonicalize_pair`].
    pub root_choice: RootChoice,
    /// Number of points in the weighted-distance compatibility grid used to
    /// screen two-record data.
    pub uhlmann_grid_points: usize,
    /// Complete-positivity slack: a candidate is accepted when its minimal
    /// Choi eigenvalue is at least `-cp_epsilon`.
    pub cp_epsilon: T,
}

impl<T: Real> Default for EstimateOptions<T> {
    fn default() -> Self {
        EstimateOptions {
            seed: 0,
            restarts: 8,
            refine6: false,
            root_choice: RootChoice::Nearer,
            uhlmann_grid_points: 200,
            cp_epsilon: tol::scaled(tol::CP),
        }
    }
}

/// Which reconstruction strategy produced the estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyBranch {
    /// No records: total contraction.
    None,
    /// Single record with the total mixture as input.
    SingleMixture,
    /// Single record with a pure input.
    SinglePure,
    /// Single mixed record whose output is farther from the mixture than the
    /// input (forces a non-unital shift).
    SingleMixedShift,
    /// Single mixed record explained without a shift.
    SingleMixedNoshift,
    /// Two records whose affine span contains the total mixture.
    TwoWithMixture,
    /// Two records admitting the closed-form unital completion.
    TwoUnital,
    /// Two records requiring the non-unital lexicographic search.
    TwoNonunital,
    /// Three records whose input plane contains the total mixture.
    ThreeWithMixture,
    /// Three records in general position (plane missing the mixture).
    ThreeGeneral,
    /// Four records: the channel is fully determined.
    Complete,
}

impl StrategyBranch {
    /// Stable snake_case name, as serialized in reports.
    pub fn name(self) -> &'static str {
        match self {
            StrategyBranch::None => "none",
            StrategyBranch::SingleMixture => "single_mixture",
            StrategyBranch::SinglePure => "single_pure",
            StrategyBranch::SingleMixedShift => "single_mixed_shift",
            StrategyBranch::SingleMixedNoshift => "single_mixed_noshift",
            StrategyBranch::TwoWithMixture => "two_with_mixture",
            StrategyBranch::TwoUnital => "two_unital",
            StrategyBranch::TwoNonunital => "two_nonunital",
            StrategyBranch::ThreeWithMixture => "three_with_mixture",
            StrategyBranch::ThreeGeneral => "three_general",
            StrategyBranch::Complete => "complete",
        }
    }
}

/// Free entries of the estimate in the adaptable basis.
///
/// The meaning is branch-specific (see the branch constructors); branches
/// with a closed form report zeros for the entries they do not use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerVariables<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub m: T,
    pub n: T,
    pub k: T,
}

impl<T: Real> OptimizerVariables<T> {
    /// All-zero variables (closed-form branches).
    pub fn zero() -> Self {
        let z = T::zero();
        OptimizerVariables {
            x: z,
            y: z,
            z,
            m: z,
            n: z,
            k: z,
        }
    }
}

/// Bookkeeping from the constrained search (zeros for closed-form branches).
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerTrace<T> {
    /// Total Nelder–Mead iterations across all restarts and stages.
    pub iterations: usize,
    /// Restarts performed.
    pub restarts_used: usize,
    /// Objective values of the accepted solution, in lexicographic order.
    pub final_objectives: Vec<T>,
}

impl<T: Real> OptimizerTrace<T> {
    /// Trace for a branch decided without running the optimizer.
    pub fn closed_form() -> Self {
        OptimizerTrace {
            iterations: 0,
            restarts_used: 0,
            final_objectives: Vec::new(),
        }
    }
}

/// The estimate expressed in its adaptable basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptableEstimate<T> {
    /// Affine form relative to the frames below: coordinates of the output
    /// are taken in `out_frame`, coordinates of the input in `in_frame`.
    pub channel: AffineChannel<T>,
    /// Input frame (generalized σ-axes adapted to the data).
    pub in_frame: Frame<T>,
    /// Output frame.
    pub out_frame: Frame<T>,
}

/// Result of a reconstruction: the conservative channel estimate plus
/// provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionReport<T> {
    /// The estimate in the fixed σ-basis.
    pub estimate: AffineChannel<T>,
    /// The same estimate in its adaptable basis.
    pub adaptable: AdaptableEstimate<T>,
    /// Strategy branch that produced it.
    pub branch: StrategyBranch,
    /// Free template entries chosen by the branch.
    pub variables: OptimizerVariables<T>,
    /// Complete-positivity certificate of the σ-basis estimate.
    pub certificate: CpCertificate<T>,
    /// Optimizer bookkeeping.
    pub optimizer: OptimizerTrace<T>,
    /// Largest trace distance between a record's output and the estimate's
    /// image of its input.
    pub max_record_residual: T,
}

/// Reconstructs the conservative channel estimate from 0–4 records.
///
/// Dispatch is on the number of records:
///
/// * **0** — the total contraction ([`estimate_none`]).
/// * **1** — closed-form single-record estimate ([`estimate_one`]).
/// * **2** — weighted-distance screen, canonicalization, then the
///   mixture-span / unital / non-unital two-record branches.
/// * **3** — plane canonicalization and the three-record branches.
/// * **4** — the records determine the affine map uniquely; it is returned
///   when completely positive and rejected as inconsistent otherwise.
///
/// Errors: invalid states or options ([`Error::Invalid`],
/// [`Error::StateOutsideBall`]), affinely dependent inputs
/// ([`Error::DegenerateGeometry`]), data no channel can produce
/// ([`Error::InconsistentRecords`]), and searches that end with no
/// completely positive candidate ([`Error::NoCpEstimate`]).
pub fn estimate<T: Real>(
    records: &[TransformationRecord<T>],
    options: &EstimateOptions<T>,
) -> Result<ReconstructionReport<T>> {
    validate_options(options)?;
    for record in records {
        record.validate()?;
    }
    let eps = tol::scaled::<T>(tol::STATE);
    match records {
        [] => estimate_none(options),
        [record] => estimate_one(record, options),
        [first, second] => {
            let gap = trace_distance(first.input, second.input);
            if gap <= eps {
                return Err(Error::DegenerateGeometry {
                    reason: format!(
                        "the two inputs coincide (separation {:.3e}); their affine span is a point",
                        gap.as_f64()
                    ),
                });
            }
            two::estimate_two(first, second, options)
        }
        [first, second, third] => {
            let d2 = v3_sub(&second.input.to_array(), &first.input.to_array());
            let d3 = v3_sub(&third.input.to_array(), &first.input.to_array());
            let area = v3_norm(&v3_cross(&d2, &d3));
            if area <= eps {
                return Err(Error::DegenerateGeometry {
                    reason: format!(
                        "the three inputs are affinely dependent (spanned area {:.3e}); \
                         they do not determine a plane",
                        area.as_f64()
                    ),
                });
            }
            three::estimate_three(first, second, third, options)
        }
        [a, b, c, d] => solve_complete(&[*a, *b, *c, *d], options),
        _ => Err(Error::Invalid {
            field: "records".into(),
            reason: format!(
                "at most 4 records determine a qubit channel; got {}",
                records.len()
            ),
        }),
    }
}

fn validate_options<T: Real>(options: &EstimateOptions<T>) -> Result<()> {
    if options.restarts == 0 {
        return Err(Error::Invalid {
            field: "restarts".into(),
            reason: "at least one optimizer restart is required".into(),
        });
    }
    if options.uhlmann_grid_points == 0 {
        return Err(Error::Invalid {
            field: "uhlmann_grid_points".into(),
            reason: "the compatibility grid needs at least one point".into(),
        });
    }
    if !(options.cp_epsilon > T::zero()) || !options.cp_epsilon.is_finite() {
        return Err(Error::Invalid {
            field: "cp_epsilon".into(),
            reason: "the complete-positivity slack must be finite and positive".into(),
        });
    }
    Ok(())
}

/// No records: the only defensible estimate is the total contraction, which
/// moves every state to the least-committal point, the total mixture.
pub fn estimate_none<T: Real>(options: &EstimateOptions<T>) -> Result<ReconstructionReport<T>> {
    validate_options(options)?;
    assemble(
        AffineChannel::total_contraction(),
        Frame::sigma(),
        Frame::sigma(),
        StrategyBranch::None,
        OptimizerVariables::zero(),
        OptimizerTrace::closed_form(),
        &[],
        options,
    )
}

/// Single record `r ↦ r′` (Bloch norms `r`, `r′`): closed-form conservative
/// estimate.
///
/// In the adaptable bases (input frame with slot X along the input, output
/// frame with slot X along the output) the estimate is
/// `E^ad = diag(d, 0, 0)`, `t^ad = (s, 0, 0)` with
///
/// * mixture input (`r ≈ 0`): `d = 0`, `s = r′` — the constant map to the
///   output;
/// * pure input (`r ≈ 1`): `d = r′`, `s = 0` — a unital line contraction;
/// * mixed input: `s = max((r′ − r)/(1 − r), 0)`, `d = min(r′/r, 1) − s`,
///   i.e. the smallest mixture shift that can explain an output farther from
///   the mixture than the input, with the rest explained by contraction.
///
/// The resulting channel is a convex split of "follow the known direction"
/// and "prepare the shifted mixture" (`s + d ≤ 1`, both nonnegative), hence
/// always completely positive.
pub fn estimate_one<T: Real>(
    record: &TransformationRecord<T>,
    options: &EstimateOptions<T>,
) -> Result<ReconstructionReport<T>> {
    validate_options(options)?;
    record.validate()?;
    let eps = tol::scaled::<T>(tol::STATE);
    let zero = T::zero();
    let one = T::one();
    let r = record.input.norm();
    let rp = record.output.norm();
    let out_frame = frame_along(record.output, eps)?;

    if r <= eps {
        // The input carries no direction: only the image of the mixture is
        // known, and the conservative completion prepares it for every input.
        let adaptable = AffineChannel::new(Mat3::zeros(), BlochVector::new(rp, zero, zero));
        return assemble(
            adaptable,
            Frame::sigma(),
            out_frame,
            StrategyBranch::SingleMixture,
            OptimizerVariables::zero(),
            OptimizerTrace::closed_form(),
            std::slice::from_ref(record),
            options,
        );
    }

    let in_frame = complete_frame(record.input, FrameSlot::X, Orientation::RightHanded)?;
    if r >= one - eps {
        // Pure input: the image of one pure state says nothing about the
        // mixture, so the estimate stays unital and contracts the sphere
        // onto the known output line.
        let adaptable = AffineChannel::new(Mat3::diagonal([rp, zero, zero]), BlochVector::zero());
        return assemble(
            adaptable,
            in_frame,
            out_frame,
            StrategyBranch::SinglePure,
            OptimizerVariables::zero(),
            OptimizerTrace::closed_form(),
            std::slice::from_ref(record),
            options,
        );
    }

    let s = ((rp - r) / (one - r)).max(zero);
    let d = (rp / r).min(one) - s;
    let adaptable = AffineChannel::new(
        Mat3::diagonal([d, zero, zero]),
        BlochVector::new(s, zero, zero),
    );
    let branch = if rp > r + tol::scaled::<T>(tol::FRAME) {
        StrategyBranch::SingleMixedShift
    } else {
        StrategyBranch::SingleMixedNoshift
    };
    assemble(
        adaptable,
        in_frame,
        out_frame,
        branch,
        OptimizerVariables::zero(),
        OptimizerTrace::closed_form(),
        std::slice::from_ref(record),
        options,
    )
}

/// Four records with affinely independent inputs determine the affine map
/// uniquely; no estimation freedom remains.
pub(crate) fn solve_complete<T: Real>(
    records: &[TransformationRecord<T>; 4],
    options: &EstimateOptions<T>,
) -> Result<ReconstructionReport<T>> {
    let v0 = records[0].input.to_array();
    let w0 = records[0].output.to_array();
    let m = Mat3::from_cols(
        &v3_sub(&records[1].input.to_array(), &v0),
        &v3_sub(&records[2].input.to_array(), &v0),
        &v3_sub(&records[3].input.to_array(), &v0),
    );
    let n = Mat3::from_cols(
        &v3_sub(&records[1].output.to_array(), &w0),
        &v3_sub(&records[2].output.to_array(), &w0),
        &v3_sub(&records[3].output.to_array(), &w0),
    );
    let inv = m.inverse(tol::scaled(tol::STATE)).ok_or_else(|| {
        Error::DegenerateGeometry {
            reason: format!(
                "the four inputs are affinely dependent (difference determinant {:.3e})",
                m.det().as_f64()
            ),
        }
    })?;
    let e = n.mul(&inv);
    let t = BlochVector::from_array(v3_sub(&w0, &e.mul_vec(&v0)));
    let channel = AffineChannel::new(e, t);
    let certificate = certify_cp_with(&channel, options.cp_epsilon);
    if !certificate.is_cp {
        return Err(Error::InconsistentRecords {
            reason: format!(
                "four records pin the map down uniquely, and that map is not completely \
                 positive (min Choi eigenvalue {:.6e})",
                certificate.min_choi_eigenvalue.as_f64()
            ),
        });
    }
    assemble(
        channel,
        Frame::sigma(),
        Frame::sigma(),
        StrategyBranch::Complete,
        OptimizerVariables::zero(),
        OptimizerTrace::closed_form(),
        records.as_slice(),
        options,
    )
}

/// Frame whose slot X tracks `v`, or the σ-frame when `v` has no direction.
fn frame_along<T: Real>(v: BlochVector<T>, eps: T) -> Result<Frame<T>> {
    if v.norm() <= eps {
        Ok(Frame::sigma())
    } else {
        complete_frame(v, FrameSlot::X, Orientation::RightHanded)
    }
}

/// Builds the report from an adaptable-basis channel: rebase to the σ-basis,
/// certify, and measure record residuals.
#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble<T: Real>(
    adaptable: AffineChannel<T>,
    in_frame: Frame<T>,
    out_frame: Frame<T>,
    branch: StrategyBranch,
    variables: OptimizerVariables<T>,
    optimizer: OptimizerTrace<T>,
    records: &[TransformationRecord<T>],
    options: &EstimateOptions<T>,
) -> Result<ReconstructionReport<T>> {
    let estimate = rebase(&adaptable, &in_frame, &out_frame)?;
    let certificate = certify_cp_with(&estimate, options.cp_epsilon);
    // Branch logic accepts candidates within cp_epsilon in the adaptable
    // basis; the rebased matrix has the same Choi spectrum up to roundoff,
    // so a doubled slack here can only catch genuine internal errors.
    if certificate.min_choi_eigenvalue < -(options.cp_epsilon + options.cp_epsilon) {
        return Err(Error::NoCpEstimate {
            violation: (-certificate.min_choi_eigenvalue).as_f64(),
        });
    }
    let mut max_record_residual = T::zero();
    for record in records {
        let residual = trace_distance(estimate.apply(record.input), record.output);
        max_record_residual = max_record_residual.max(residual);
    }
    Ok(ReconstructionReport {
        estimate,
        adaptable: AdaptableEstimate {
            channel: adaptable,
            in_frame,
            out_frame,
        },
        branch,
        variables,
        certificate,
        optimizer,
        max_record_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type R64 = TransformationRecord<f64>;

    fn bv(x: f64, y: f64, z: f64) -> BlochVector<f64> {
        BlochVector::new(x, y, z)
    }

    fn rec(input: [f64; 3], output: [f64; 3]) -> R64 {
        TransformationRecord::new(
            BlochVector::from_array(input),
            BlochVector::from_array(output),
        )
        .unwrap()
    }

    /// The worked-example channel used across the reconstruction tests:
    /// t = (0.5, 0, 0), E = [[0.2, -0.1, 0.1], [0.2, 0, -0.3], [0, 0.3, 0.3]].
    fn example_channel() -> AffineChannel<f64> {
        AffineChannel::new(
            Mat3([[0.2, -0.1, 0.1], [0.2, 0.0, -0.3], [0.0, 0.3, 0.3]]),
            bv(0.5, 0.0, 0.0),
        )
    }

    #[test]
    fn no_records_gives_the_total_contraction() {
        let report = estimate::<f64>(&[], &EstimateOptions::default()).unwrap();
        assert_eq!(report.branch, StrategyBranch::None);
        assert_eq!(report.branch.name(), "none");
        assert_eq!(report.estimate.e.max_abs(), 0.0);
        assert_eq!(report.estimate.t.norm(), 0.0);
        assert!(report.certificate.is_cp);
        assert!((report.certificate.min_choi_eigenvalue - 0.25).abs() < 1e-12);
        assert_eq!(report.max_record_residual, 0.0);
    }

    #[test]
    fn single_mixed_record_matches_the_shift_plus_contraction_form() {
        // Worked single-record example: 0.6 σ_x ↦ 0.62 σ_x + 0.12 σ_y.
        let record = rec([0.6, 0.0, 0.0], [0.62, 0.12, 0.0]);
        let report = estimate_one(&record, &EstimateOptions::default()).unwrap();
        assert_eq!(report.branch, StrategyBranch::SingleMixedShift);

        let rp = (0.62f64 * 0.62 + 0.12 * 0.12).sqrt();
        let s = (rp - 0.6) / 0.4;
        let d = 1.0 - s;
        let ad = &report.adaptable.channel;
        assert!((ad.t.x - s).abs() < 1e-15);
        assert!((ad.e.0[0][0] - d).abs() < 1e-15);
        // Published rounded values for the same example.
        assert!((s - 0.079).abs() < 1e-3);
        assert!((d - 0.921).abs() < 1e-3);

        // σ-basis form: t = s·(output direction), first column d·(output
        // direction), everything else zero.
        let est = &report.estimate;
        assert!((est.t.x - 0.0776).abs() < 1e-3);
        assert!((est.t.y - 0.015).abs() < 1e-3);
        assert_eq!(est.t.z, 0.0);
        assert!((est.e.0[0][0] - 0.904).abs() < 1e-3);
        assert!((est.e.0[1][0] - 0.175).abs() < 1e-3);
        for row in 0..3 {
            for col in 1..3 {
                assert!(
                    est.e.0[row][col].abs() < 1e-15,
                    "unknown directions must be annihilated"
                );
            }
        }
        assert!(report.certificate.is_cp);
        assert!(report.max_record_residual < 1e-12);
    }

    #[test]
    fn single_preserved_mixed_state_gives_the_exact_line_projector() {
        // A state that is not affected by the channel: the estimate keeps its
        // axis and kills the rest, exactly.
        let record = rec([0.0, 0.0, 0.7], [0.0, 0.0, 0.7]);
        let report = estimate_one(&record, &EstimateOptions::default()).unwrap();
        assert_eq!(report.branch, StrategyBranch::SingleMixedNoshift);
        let expected = Mat3([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(report.estimate.e.max_abs_diff(&expected), 0.0);
        assert_eq!(report.estimate.t.norm(), 0.0);
        assert_eq!(report.max_record_residual, 0.0);
    }

    #[test]
    fn single_mixed_to_pure_record_gives_the_exact_constant_map() {
        // Mixed input mapped to a pure output: only the constant map to that
        // output is conservative, and the arithmetic is exact.
        let record = rec([0.6, 0.0, 0.0], [0.0, 0.0, 1.0]);
        let report = estimate_one(&record, &EstimateOptions::default()).unwrap();
        assert_eq!(report.branch, StrategyBranch::SingleMixedShift);
        assert_eq!(report.estimate.e.max_abs(), 0.0);
        assert_eq!(report.estimate.t.to_array(), [0.0, 0.0, 1.0]);
        assert_eq!(report.adaptable.channel.t.x, 1.0);
        assert_eq!(report.adaptable.channel.e.max_abs(), 0.0);
        assert_eq!(report.max_record_residual, 0.0);
    }

    #[test]
    fn single_pure_record_contracts_onto_the_output_line() {
        let record = rec([0.0, 1.0, 0.0], [0.0, 0.8, 0.0]);
        let report = estimate_one(&record, &EstimateOptions::default()).unwrap();
        assert_eq!(report.branch, StrategyBranch::SinglePure);
        // Unital: the mixture stays put even though the output is mixed.
        assert_eq!(report.estimate.t.norm(), 0.0);
        let expected = Mat3([[0.0, 0.0, 0.0], [0.0, 0.8, 0.0], [0.0, 0.0, 0.0]]);
        assert!(report.estimate.e.max_abs_diff(&expected) < 1e-15);
        assert!(report.certificate.is_cp);
        assert!(report.max_record_residual < 1e-15);
    }

    #[test]
    fn single_mixture_record_prepares_the_output() {
        let record = rec([0.0, 0.0, 0.0], [0.3, -0.2, 0.1]);
        let report = estimate_one(&record, &EstimateOptions::default()).unwrap();
        assert_eq!(report.branch, StrategyBranch::SingleMixture);
        assert_eq!(report.estimate.e.max_abs(), 0.0);
        assert!(trace_distance(report.estimate.t, record.output) < 1e-15);
        assert!(report.max_record_residual < 1e-15);
        // Degenerate sub-case: mixture fixed -> total contraction.
        let fixed = rec([0.0, 0.0, 0.0], [0.0, 0.0, 0.0]);
        let report = estimate_one(&fixed, &EstimateOptions::default()).unwrap();
        assert_eq!(report.estimate.e.max_abs(), 0.0);
        assert_eq!(report.estimate.t.norm(), 0.0);
    }

    #[test]
    fn four_records_recover_the_generating_channel_exactly() {
        let channel = example_channel();
        let inputs = [
            [0.6, 0.0, 0.0],
            [0.4, 0.1, 0.8],
            [0.4, 0.3, 0.6],
            [0.0, 0.0, -0.5],
        ];
        let records: Vec<R64> = inputs
            .iter()
            .map(|&v| {
                let input = BlochVector::from_array(v);
                TransformationRecord::new(input, channel.apply(input)).unwrap()
            })
            .collect();
        let report = estimate(&records, &EstimateOptions::default()).unwrap();
        assert_eq!(report.branch, StrategyBranch::Complete);
        assert!(report.estimate.max_abs_diff(&channel) < 1e-12);
        assert!(report.certificate.is_cp);
        assert!(report.max_record_residual < 1e-12);
    }

    #[test]
    fn four_transpose_records_are_rejected_as_inconsistent() {
        // The transpose map diag(1, 1, -1) is positive but not completely
        // positive; four of its transformations pin it down uniquely.
        let inputs = [
            [0.6, 0.0, 0.0],
            [0.0, 0.6, 0.0],
            [0.0, 0.0, 0.6],
            [0.3, 0.3, 0.3],
        ];
        let records: Vec<R64> = inputs
            .iter()
            .map(|&[x, y, z]| rec([x, y, z], [x, y, -z]))
            .collect();
        let err = estimate(&records, &EstimateOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InconsistentRecords { .. }), "{err}");
    }

    #[test]
    fn degenerate_and_invalid_inputs_are_reported() {
        let options = EstimateOptions::default();
        // Coincident two-record inputs.
        let err = estimate(
            &[rec([0.1, 0.0, 0.0], [0.1, 0.0, 0.0]), rec([0.1, 0.0, 0.0], [0.2, 0.0, 0.0])],
            &options,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateGeometry { .. }), "{err}");
        // Collinear three-record inputs.
        let err = estimate(
            &[
                rec([0.1, 0.0, 0.0], [0.1, 0.0, 0.0]),
                rec([0.2, 0.0, 0.0], [0.2, 0.0, 0.0]),
                rec([0.3, 0.0, 0.0], [0.3, 0.0, 0.0]),
            ],
            &options,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateGeometry { .. }), "{err}");
        // Too many records.
        let five = vec![rec([0.0, 0.0, 0.1], [0.0, 0.0, 0.1]); 5];
        let err = estimate(&five, &options).unwrap_err();
        assert!(matches!(err, Error::Invalid { .. }), "{err}");
        // Unphysical state.
        let bad = TransformationRecord {
            input: bv(1.2, 0.0, 0.0),
            output: bv(0.0, 0.0, 0.0),
        };
        let err = estimate(&[bad], &options).unwrap_err();
        assert!(matches!(err, Error::StateOutsideBall { .. }), "{err}");
        // Bad options.
        let mut zero_restarts = EstimateOptions::<f64>::default();
        zero_restarts.restarts = 0;
        let err = estimate(&[], &zero_restarts).unwrap_err();
        assert!(matches!(err, Error::Invalid { .. }), "{err}");
    }

    #[test]
    fn branch_names_are_stable() {
        let pairs = [
            (StrategyBranch::SingleMixture, "single_mixture"),
            (StrategyBranch::SinglePure, "single_pure"),
            (StrategyBranch::SingleMixedShift, "single_mixed_shift"),
            (StrategyBranch::SingleMixedNoshift, "single_mixed_noshift"),
            (StrategyBranch::TwoWithMixture, "two_with_mixture"),
            (StrategyBranch::TwoUnital, "two_unital"),
            (StrategyBranch::TwoNonunital, "two_nonunital"),
            (StrategyBranch::ThreeWithMixture, "three_with_mixture"),
            (StrategyBranch::ThreeGeneral, "three_general"),
            (StrategyBranch::Complete, "complete"),
        ];
        for (branch, name) in pairs {
            assert_eq!(branch.name(), name);
        }
    }
}
