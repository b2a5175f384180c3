//! Cross-module properties: the guarantees the library makes as a whole,
//! exercised through the public API only. Module-local behavior is tested
//! next to each module; this suite checks the contracts that tie the
//! modules together (certified channels behave like channels, estimates are
//! certified and reproduce their data, the numeric search agrees with the
//! closed forms it generalizes, and everything is deterministic).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blochmap::bloch::{
    complete_frame, fidelity, rebase, singular_decompose, trace_distance, AffineChannel,
    BlochVector, FrameSlot, Orientation,
};
use blochmap::cp::{choi_from_affine, random_cp_channel, random_kraus_set};
use blochmap::linalg::Mat3;
use blochmap::metrics::{average_distance, Measure};
use blochmap::reconstruct::{
    canonicalize_pair, constrained_search, estimate, EstimateOptions, RootChoice, SearchConfig,
    SearchOutcome, StrategyBranch, TransformationRecord,
};

fn bv(a: [f64; 3]) -> BlochVector<f64> {
    BlochVector::from_array(a)
}

fn rec(input: [f64; 3], output: [f64; 3]) -> TransformationRecord<f64> {
    TransformationRecord::new(bv(input), bv(output)).unwrap()
}

fn random_state<R: Rng>(rng: &mut R, max_norm: f64) -> BlochVector<f64> {
    loop {
        let r = bv([
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ]);
        if r.norm() <= max_norm {
            return r;
        }
    }
}

/// Two records of the worked-example channel
/// (t = (0.5,0,0), E = [[0.2,-0.1,0.1],[0.2,0,-0.3],[0,0.3,0.3]]).
fn example_two_records() -> [TransformationRecord<f64>; 2] {
    [
        rec([0.6, 0.0, 0.0], [0.62, 0.12, 0.0]),
        rec([0.4, 0.1, 0.8], [0.65, -0.16, 0.27]),
    ]
}

/// Three records of the same channel.
fn example_three_records() -> [TransformationRecord<f64>; 3] {
    [
        rec([0.6, 0.0, 0.0], [0.62, 0.12, 0.0]),
        rec([0.4, 0.1, 0.8], [0.65, -0.16, 0.27]),
        rec([0.4, 0.3, 0.6], [0.61, -0.10, 0.27]),
    ]
}

#[test]
fn certified_channels_contract_distance_and_never_decrease_fidelity() {
    // A certified-CP channel must behave like a physical map on every state
    // pair: the trace distance may only shrink and the fidelity may only
    // grow. 125 random Kraus channels × 8 state pairs = 1000 pairs.
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..125 {
        let ch: AffineChannel<f64> = random_cp_channel(&mut rng);
        for _ in 0..8 {
            let r = random_state(&mut rng, 1.0);
            let s = random_state(&mut rng, 1.0);
            let (r2, s2) = (ch.apply(r), ch.apply(s));
            assert!(
                trace_distance(r2, s2) <= trace_distance(r, s) + 1e-9,
                "distance grew: {} -> {}",
                trace_distance(r, s),
                trace_distance(r2, s2)
            );
            let f_in = fidelity(r, s).unwrap();
            let f_out = fidelity(r2, s2).unwrap();
            assert!(f_out >= f_in - 1e-9, "fidelity fell: {f_in} -> {f_out}");
        }
    }
}

#[test]
fn rebase_preserves_the_singular_spectrum() {
    // Changing bases is an orthogonal conjugation, so the singular values
    // of the linear block are invariant.
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let slots = [FrameSlot::X, FrameSlot::Y, FrameSlot::Z];
    let orientations = [Orientation::RightHanded, Orientation::LeftHanded];
    for trial in 0..60 {
        let ch: AffineChannel<f64> = random_cp_channel(&mut rng);
        let axis_in = random_state(&mut rng, 1.0);
        let axis_out = random_state(&mut rng, 1.0);
        if axis_in.norm() < 1e-3 || axis_out.norm() < 1e-3 {
            continue;
        }
        let in_frame = complete_frame(axis_in, slots[trial % 3], orientations[trial % 2]).unwrap();
        let out_frame =
            complete_frame(axis_out, slots[(trial + 1) % 3], orientations[trial % 2]).unwrap();
        let moved = rebase(&ch, &in_frame, &out_frame).unwrap();

        let mut before: Vec<f64> = singular_decompose(&ch)
            .lambdas
            .iter()
            .map(|l| l.abs())
            .collect();
        let mut after: Vec<f64> = singular_decompose(&moved)
            .lambdas
            .iter()
            .map(|l| l.abs())
            .collect();
        before.sort_by(|a, b| a.partial_cmp(b).unwrap());
        after.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in before.iter().zip(after.iter()) {
            assert!((x - y).abs() < 1e-10, "{before:?} vs {after:?}");
        }
    }
}

#[test]
fn estimates_from_genuine_channels_are_certified_and_reproduce_the_records() {
    // Records produced by an actual channel are always consistent, so the
    // estimator must return a certified-CP channel that fits them to the
    // fit tolerance — for every record count and without ever reaching the
    // inconsistency or no-estimate errors.
    let inputs: [[[f64; 3]; 4]; 1] = [[
        [0.7, 0.0, 0.0],
        [0.0, 0.6, 0.1],
        [0.1, 0.2, -0.6],
        [0.0, 0.0, 0.0],
    ]];
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let options = EstimateOptions {
        restarts: 2,
        ..EstimateOptions::default()
    };
    for trial in 0..12 {
        let ch: AffineChannel<f64> = random_cp_channel(&mut rng);
        let points = inputs[0];
        let records: Vec<TransformationRecord<f64>> = points
            .iter()
            .map(|&p| TransformationRecord::new(bv(p), ch.apply(bv(p))).unwrap())
            .collect();
        for count in 1..=3usize {
            let report = estimate(&records[..count], &options).unwrap_or_else(|e| {
                panic!("trial {trial}, {count} records from a genuine channel failed: {e}")
            });
            assert!(report.certificate.is_cp, "trial {trial}, {count} records");
            assert!(
                report.max_record_residual < 1e-8,
                "trial {trial}, {count} records: residual {}",
                report.max_record_residual
            );
        }
    }
}

#[test]
fn four_spanning_records_recover_random_channels() {
    // With four affinely independent inputs the channel is determined
    // uniquely, so the estimator must return the generating channel itself.
    let points = [
        [0.0, 0.0, 0.0],
        [0.6, 0.0, 0.0],
        [0.0, 0.6, 0.0],
        [0.0, 0.0, 0.6],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..40 {
        let ch: AffineChannel<f64> = random_kraus_set(rng.gen_range(1..=4), &mut rng)
            .unwrap()
            .to_affine();
        let records: Vec<TransformationRecord<f64>> = points
            .iter()
            .map(|&p| TransformationRecord::new(bv(p), ch.apply(bv(p))).unwrap())
            .collect();
        let report = estimate(&records, &EstimateOptions::default()).unwrap();
        assert_eq!(report.branch, StrategyBranch::Complete);
        assert!(report.certificate.is_cp);
        assert!(report.estimate.max_abs_diff(&ch) < 1e-9);
        assert!(report.max_record_residual < 1e-9);
    }
}

#[test]
fn single_record_estimates_act_only_along_the_data() {
    // The single-record estimate is independent of how the completion fills
    // the unconstrained axes: its linear block kills every direction
    // orthogonal to the input, and its shift points along the output.
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for trial in 0..40 {
        let mut input = random_state(&mut rng, 0.95);
        if input.norm() < 0.05 {
            continue;
        }
        if trial % 3 == 0 {
            // Every third trial uses a pure input.
            let n = input.norm();
            input = bv([input.x / n, input.y / n, input.z / n]);
        }
        let output = random_state(&mut rng, 0.95);
        let record = TransformationRecord::new(input, output).unwrap();
        let report = estimate(&[record], &EstimateOptions::default()).unwrap();
        assert!(report.certificate.is_cp);
        assert!(trace_distance(report.estimate.apply(input), output) < 1e-10);

        // Two directions orthogonal to the input must map to zero.
        let axis = input.to_array();
        let frame = complete_frame(input, FrameSlot::X, Orientation::RightHanded).unwrap();
        for w in [frame.ey(), frame.ez()] {
            let image = report.estimate.e.mul_vec(&w.to_array());
            let norm = (image[0] * image[0] + image[1] * image[1] + image[2] * image[2]).sqrt();
            assert!(norm < 1e-12, "leaked {norm} along a free axis of {axis:?}");
        }
        // The shift is parallel to the output direction.
        let t = report.estimate.t.to_array();
        let cross = [
            t[1] * output.z - t[2] * output.y,
            t[2] * output.x - t[0] * output.z,
            t[0] * output.y - t[1] * output.x,
        ];
        let cross_norm = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        assert!(cross_norm < 1e-12, "shift not along the output: {cross_norm}");
    }
}

#[test]
fn two_record_shift_is_minimal_against_a_grid_oracle() {
    // Independent check of the lexicographic search's first stage: over the
    // record-fitting template with the same structural zeros, no completely
    // positive grid point may undercut the estimate's mixture shift, and
    // the best grid point must come close to it.
    let [r1, r2] = example_two_records();
    let report = estimate(&[r1, r2], &EstimateOptions::default()).unwrap();
    assert_eq!(report.branch, StrategyBranch::TwoNonunital);
    let est_shift = report.estimate.t.norm();

    let pair = canonicalize_pair(&r1, &r2, RootChoice::Nearer).unwrap();
    let beta_sin = pair.beta * pair.theta.sin();
    let beta_cos = pair.beta * pair.theta.cos();
    let template = |x: f64, y: f64, k: f64| -> AffineChannel<f64> {
        let e = Mat3([
            [pair.alpha - x, (beta_sin - x) / pair.b, 0.0],
            [-y, (beta_cos - y) / pair.b, 0.0],
            [0.0, 0.0, k],
        ]);
        AffineChannel::new(e, bv([x, y, 0.0]))
    };

    let mut best_feasible: Option<f64> = None;
    for i in 0..21 {
        let x = -0.1 + 0.02 * i as f64;
        for j in 0..21 {
            let y = -0.1 + 0.02 * j as f64;
            for l in 0..51 {
                let k = -1.0 + 0.04 * l as f64;
                let candidate = template(x, y, k);
                if choi_from_affine(&candidate).min_eigenvalue() < -1e-9 {
                    continue;
                }
                let shift = (x * x + y * y).sqrt();
                assert!(
                    shift >= est_shift - 1e-6,
                    "grid point (x={x}, y={y}, k={k}) undercuts the estimate: \
                     {shift} < {est_shift}"
                );
                let better = best_feasible.map(|b| shift < b).unwrap_or(true);
                if better {
                    best_feasible = Some(shift);
                }
            }
        }
    }
    let best = best_feasible.expect("the grid must contain feasible points");
    assert!(
        best - est_shift < 0.05,
        "the grid optimum {best} is far from the estimate {est_shift}"
    );
}

#[test]
fn numeric_search_reproduces_the_analytic_unital_contraction() {
    // At the boundary of the unital-completion condition the two Choi
    // constraints of the unital template pinch the free axis to a single
    // point with the closed-form value k* = α·cosθ·√((1−α²)/(1−α²cos²θ)).
    // The penalty search, which knows nothing of the closed form, must find
    // the same value from the Choi spectrum alone.
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let config = SearchConfig {
        cp_epsilon: 1e-9,
        seed: 0,
        restarts: 4,
    };
    for _ in 0..25 {
        let alpha: f64 = rng.gen_range(0.25..0.85);
        let theta: f64 = rng.gen_range(-1.1..1.1);
        let cos = theta.cos();
        let sin = theta.sin();
        let rhs = (1.0 - alpha * alpha) / (1.0 - alpha * alpha * cos * cos);
        let g = rhs.sqrt(); // Condition-3 equality.
        let k_star = alpha * cos * g;

        let builder = |v: &[f64]| {
            AffineChannel::new(
                Mat3([
                    [alpha, g * sin, 0.0],
                    [0.0, g * cos, 0.0],
                    [0.0, 0.0, v[0]],
                ]),
                BlochVector::zero(),
            )
        };
        let objective = |v: &[f64]| v[0].abs();
        let objectives: [&dyn Fn(&[f64]) -> f64; 1] = [&objective];
        let out: SearchOutcome<f64> = constrained_search(1, &builder, &objectives, &config)
            .unwrap_or_else(|e| panic!("search failed at alpha={alpha}, theta={theta}: {e}"));
        assert!(
            (out.vars[0] - k_star).abs() < 1e-6,
            "alpha={alpha}, theta={theta}: numeric {} vs analytic {k_star}",
            out.vars[0]
        );
    }
}

#[test]
fn synthesized_unital_pairs_take_the_predicted_branch() {
    // Pairs built directly from canonical parameters: inside the
    // unital-completion condition the closed-form unital branch must fire;
    // outside it the unital branch is forbidden.
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..20 {
        let alpha: f64 = rng.gen_range(0.5..0.8);
        let theta: f64 = rng.gen_range(0.2..0.9) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let b: f64 = rng.gen_range(0.4..0.9);
        let cos = theta.cos();
        let sin = theta.sin();
        let rhs = (1.0 - alpha * alpha) / (1.0 - alpha * alpha * cos * cos);

        for (factor, expect_unital) in [(0.8, true), (1.02, false)] {
            let g = rhs.sqrt() * factor;
            if g > 1.0 {
                continue;
            }
            let beta = g * b;
            let records = [
                rec([1.0, 0.0, 0.0], [alpha, 0.0, 0.0]),
                rec([0.0, b, 0.0], [beta * sin, beta * cos, 0.0]),
            ];
            match estimate(&records, &EstimateOptions::default()) {
                Ok(report) => {
                    if expect_unital {
                        assert_eq!(
                            report.branch,
                            StrategyBranch::TwoUnital,
                            "alpha={alpha}, theta={theta}, b={b}"
                        );
                        assert!(report.estimate.t.norm() < 1e-12);
                    } else {
                        assert_eq!(
                            report.branch,
                            StrategyBranch::TwoNonunital,
                            "alpha={alpha}, theta={theta}, b={b}"
                        );
                    }
                    assert!(report.certificate.is_cp);
                    assert!(report.max_record_residual < 1e-8);
                }
                Err(e) => {
                    // Past the unital boundary the data may have no
                    // completion at all; inside it they always do.
                    assert!(!expect_unital, "feasible pair rejected: {e}");
                }
            }
        }
    }
}

#[test]
fn average_distance_is_symmetric_and_respects_the_triangle_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let a: AffineChannel<f64> = random_cp_channel(&mut rng);
    let b: AffineChannel<f64> = random_cp_channel(&mut rng);
    let c: AffineChannel<f64> = random_cp_channel(&mut rng);
    let n = 20_000;

    let dab = average_distance(&a, &b, n, 5, Measure::Ball).unwrap();
    let dba = average_distance(&b, &a, n, 5, Measure::Ball).unwrap();
    assert_eq!(dab.mean, dba.mean, "symmetry must be exact (same samples)");

    // Common random numbers make the triangle inequality hold per sample,
    // so it survives averaging up to summation roundoff.
    let dac = average_distance(&a, &c, n, 5, Measure::Ball).unwrap();
    let dbc = average_distance(&b, &c, n, 5, Measure::Ball).unwrap();
    assert!(
        dac.mean <= dab.mean + dbc.mean + 1e-12,
        "{} > {} + {}",
        dac.mean,
        dab.mean,
        dbc.mean
    );
}

#[test]
fn reports_are_bitwise_reproducible() {
    // Searches, restarts, and refinement are all seeded: the same inputs
    // and options must give bit-identical reports.
    let two = example_two_records();
    let options = EstimateOptions {
        seed: 7,
        restarts: 9, // forces one draw beyond the fixed seed table
        refine6: true,
        ..EstimateOptions::default()
    };
    let first = estimate(&two, &options).unwrap();
    let second = estimate(&two, &options).unwrap();
    assert_eq!(first.estimate.e.0, second.estimate.e.0);
    assert_eq!(first.estimate.t.to_array(), second.estimate.t.to_array());
    assert_eq!(first.branch, second.branch);
    assert_eq!(first.optimizer, second.optimizer);

    let three = example_three_records();
    let a = estimate(&three, &EstimateOptions::default()).unwrap();
    let b = estimate(&three, &EstimateOptions::default()).unwrap();
    assert_eq!(a.estimate.e.0, b.estimate.e.0);
    assert_eq!(a.estimate.t.to_array(), b.estimate.t.to_array());
    assert_eq!(a.optimizer, b.optimizer);
}
