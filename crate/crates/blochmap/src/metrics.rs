//! Estimate-quality metrics: unital channel capacity, Monte-Carlo average
//! channel distance, reconstruction-hierarchy evaluation, and deterministic
//! Bloch-image sampling for visualization.
//!
//! All randomized quantities are driven by an explicit seed through a
//! counter-based generator with one stream per fixed-size shard of samples,
//! and are accumulated in a fixed order — results are bit-for-bit
//! reproducible for a given `(seed, samples, measure)` triple, and the
//! points drawn in one shard do not depend on how many shards follow.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bloch::{singular_decompose, AffineChannel, BlochVector};
use crate::error::{Error, Result};
use crate::linalg::v3_dist;
use crate::scalar::Real;
use crate::tol;

/// Samples per random stream; keeps every point reproducible independently
/// of the total sample count.
const SHARD_SIZE: usize = 65536;

/// Classical information capacity of a **unital** channel, in bits.
///
/// For a unital qubit channel the optimal signal states are the pure states
/// along the most-preserved axis, and the capacity reduces to
/// `1 − h((1 + μ)/2)` where `μ` is the largest singular value of the linear
/// block and `h` is the binary entropy. The identity has capacity exactly 1,
/// the total contraction exactly 0.
///
/// Channels with `|t|` beyond the numerical tolerance are rejected with
/// [`Error::NotUnital`]; their capacity is not captured by this formula.
pub fn unital_capacity<T: Real>(channel: &AffineChannel<T>) -> Result<T> {
    let shift = channel.t.norm();
    let tolerance = tol::scaled::<T>(tol::NUM);
    if shift > tolerance {
        return Err(Error::NotUnital {
            shift_norm: shift.as_f64(),
            tolerance: tolerance.as_f64(),
        });
    }
    let mu = singular_decompose(channel).lambdas[0];
    let one = T::one();
    Ok(one - binary_entropy(T::of(0.5) * (one + mu)))
}

/// Binary entropy in bits, with the exact boundary values `h(0) = h(1) = 0`.
fn binary_entropy<T: Real>(p: T) -> T {
    let zero = T::zero();
    let one = T::one();
    if p <= zero || p >= one {
        return zero;
    }
    -(p * p.log2()) - (one - p) * (one - p).log2()
}

/// Input distribution for the Monte-Carlo metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    /// Uniform over the closed unit ball (all states).
    Ball,
    /// Uniform over the unit sphere (pure states).
    Sphere,
}

impl Measure {
    /// Stable lowercase name, as serialized in reports.
    pub fn name(self) -> &'static str {
        match self {
            Measure::Ball => "ball",
            Measure::Sphere => "sphere",
        }
    }
}

/// A Monte-Carlo distance estimate with its sampling provenance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceEstimate<T> {
    /// Sample mean of the pointwise distance.
    pub mean: T,
    /// Standard error of the mean (`√(sample variance / n)`).
    pub std_error: T,
    /// Number of sampled input states.
    pub samples: usize,
    /// Input distribution.
    pub measure: Measure,
    /// Seed that drove the sampler.
    pub seed: u64,
}

/// Average distance between two channels: the mean Euclidean distance of
/// their output Bloch vectors (twice the trace distance of the outputs)
/// over inputs drawn from `measure`.
///
/// Sampling is deterministic in `(seed, samples, measure)`: sample `i` lives
/// in shard `i / 65536`, and shard `s` draws from a generator seeded with
/// `seed` on stream `s`. Identical inputs across calls (common random
/// numbers) make different channel pairs directly comparable at the same
/// seed.
pub fn average_distance<T: Real>(
    a: &AffineChannel<T>,
    b: &AffineChannel<T>,
    samples: usize,
    seed: u64,
    measure: Measure,
) -> Result<DistanceEstimate<T>> {
    if samples == 0 {
        return Err(Error::Invalid {
            field: "samples".into(),
            reason: "at least one sample is required".into(),
        });
    }
    let mut sum = T::zero();
    let mut sum_sq = T::zero();
    let mut drawn = 0usize;
    let mut shard = 0u64;
    while drawn < samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shard);
        let take = SHARD_SIZE.min(samples - drawn);
        for _ in 0..take {
            let point = sample_measure(&mut rng, measure);
            let r = BlochVector::new(T::of(point[0]), T::of(point[1]), T::of(point[2]));
            let d = v3_dist(&a.apply(r).to_array(), &b.apply(r).to_array());
            sum += d;
            sum_sq += d * d;
        }
        drawn += take;
        shard += 1;
    }
    let n = T::of_usize(samples);
    let mean = sum / n;
    let variance = if samples > 1 {
        ((sum_sq - n * mean * mean) / (n - T::one())).max(T::zero())
    } else {
        T::zero()
    };
    Ok(DistanceEstimate {
        mean,
        std_error: (variance / n).sqrt(),
        samples,
        measure,
        seed,
    })
}

/// One point of `measure`, drawn in `f64` regardless of the scalar type so
/// the stream is identical for `f32` and `f64` computations.
fn sample_measure<R: Rng>(rng: &mut R, measure: Measure) -> [f64; 3] {
    match measure {
        Measure::Ball => sample_ball(rng),
        Measure::Sphere => loop {
            let p = sample_ball(rng);
            let n2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            // Re-draw the (probability ~1e-36) points too close to the
            // origin to normalize stably.
            if n2 >= 1e-24 {
                let inv = 1.0 / n2.sqrt();
                return [p[0] * inv, p[1] * inv, p[2] * inv];
            }
        },
    }
}

/// Uniform point of the closed unit ball by rejection from the cube.
fn sample_ball<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let x: f64 = rng.gen_range(-1.0..1.0);
        let y: f64 = rng.gen_range(-1.0..1.0);
        let z: f64 = rng.gen_range(-1.0..1.0);
        if x * x + y * y + z * z <= 1.0 {
            return [x, y, z];
        }
    }
}

/// Result of [`hierarchy_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyOutcome<T> {
    /// Distance of each channel to the reference, in input order, all
    /// evaluated on the same sampled inputs.
    pub estimates: Vec<DistanceEstimate<T>>,
    /// Whether the sequence is non-increasing within noise: each mean may
    /// exceed its predecessor by at most three combined standard errors.
    pub monotone: bool,
}

/// Evaluates a sequence of channels (typically reconstructions from ever
/// larger record sets) against a reference channel with common random
/// numbers, and checks that the distances do not increase.
pub fn hierarchy_check<T: Real>(
    reference: &AffineChannel<T>,
    channels: &[AffineChannel<T>],
    samples: usize,
    seed: u64,
    measure: Measure,
) -> Result<HierarchyOutcome<T>> {
    if channels.is_empty() {
        return Err(Error::Invalid {
            field: "channels".into(),
            reason: "the hierarchy needs at least one channel".into(),
        });
    }
    let estimates = channels
        .iter()
        .map(|ch| average_distance(ch, reference, samples, seed, measure))
        .collect::<Result<Vec<_>>>()?;
    let three = T::of(3.0);
    let mut monotone = true;
    for pair in estimates.windows(2) {
        let allowance = three
            * (pair[0].std_error * pair[0].std_error + pair[1].std_error * pair[1].std_error)
                .sqrt();
        if pair[1].mean > pair[0].mean + allowance {
            monotone = false;
        }
    }
    Ok(HierarchyOutcome { estimates, monotone })
}

/// Images of `n` deterministic, near-uniform sphere points (a Fibonacci
/// lattice) under the channel — the output ellipsoid as a point cloud.
pub fn image_cloud<T: Real>(channel: &AffineChannel<T>, n: usize) -> Result<Vec<BlochVector<T>>> {
    if n == 0 {
        return Err(Error::Invalid {
            field: "n".into(),
            reason: "at least one point is required".into(),
        });
    }
    let one = T::one();
    let two = T::of(2.0);
    let golden = T::PI() * (T::of(3.0) - T::of(5.0).sqrt());
    let count = T::of_usize(n);
    let mut cloud = Vec::with_capacity(n);
    for i in 0..n {
        let index = T::of_usize(i);
        let z = one - (two * index + one) / count;
        let radius = (one - z * z).max(T::zero()).sqrt();
        let phi = index * golden;
        let point = BlochVector::new(radius * phi.cos(), radius * phi.sin(), z);
        cloud.push(channel.apply(point));
    }
    Ok(cloud)
}

/// Mean Bloch norm of the channel's output over inputs from `measure`:
/// the average distance to the total contraction.
pub fn mean_image_radius<T: Real>(
    channel: &AffineChannel<T>,
    samples: usize,
    seed: u64,
    measure: Measure,
) -> Result<DistanceEstimate<T>> {
    average_distance(
        channel,
        &AffineChannel::total_contraction(),
        samples,
        seed,
        measure,
    )
}
