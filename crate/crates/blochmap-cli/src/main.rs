//! `blochmap` — qubit channels in affine (Bloch) form from the command line.
//!
//! Subcommands:
//!
//! * `check` — certify complete positivity of a channel file.
//! * `reconstruct` — conservative channel estimate from recorded
//!   input → output state pairs.
//! * `distance` — Monte-Carlo average output distance between two channels.
//! * `capacity` — classical capacity of a unital channel.
//! * `ellipsoid` — deterministic point cloud of a channel's image of the
//!   Bloch sphere, as CSV.
//!
//! Machine-readable payloads go to stdout; diagnostics go to stderr. Equal
//! inputs produce byte-identical stdout. Exit codes: 0 success, 1 unreadable
//! or invalid input, 2 failed positivity or trace preservation, 3 records no
//! channel can produce, 4 degenerate geometry, 5 not unital.

mod io;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use blochmap::bloch::{singular_decompose, AffineChannel, Frame};
use blochmap::cp::{certify_cp_with, CpCertificate};
use blochmap::metrics::{average_distance, image_cloud, unital_capacity, Measure};
use blochmap::reconstruct::{estimate, EstimateOptions, ReconstructionReport};
use blochmap::{tol, Error};

use io::{
    channel_value, float17, parse_channel, parse_records, to_canonical_json, CliError, CliResult,
};

#[derive(Parser)]
#[command(
    name = "blochmap",
    version,
    about = "Qubit channels in affine (Bloch) form: certification, reconstruction, metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify complete positivity of a channel file.
    Check {
        /// Channel file ({"t", "E"} or {"matrix"}).
        channel: PathBuf,
        /// Eigenvalue tolerance of the certificate (default 1e-9).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Reconstruct the conservative channel estimate from recorded state pairs.
    Reconstruct {
        /// Record file ({"records": [{"input", "output"}, …]}, 0–4 records).
        records: PathBuf,
        /// Where to write the estimated channel file.
        #[arg(short, long, default_value = "estimate.json")]
        output: PathBuf,
        /// Seed for the optimizer restarts beyond the deterministic table.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optimizer restarts per penalty stage.
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Grid points of the two-record weighted-distance screen.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Complete-positivity tolerance (default 1e-9; a record file's
        /// metadata.tolerance is used when this flag is absent).
        #[arg(long)]
        tol: Option<f64>,
        /// Re-optimize over all six free entries after the reduced search.
        #[arg(long)]
        refine6: bool,
    },
    /// Estimate the average output distance between two channels.
    Distance {
        /// First channel file.
        a: PathBuf,
        /// Second channel file.
        b: PathBuf,
        /// Monte-Carlo sample count.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Sampler seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Input distribution: all states (ball) or pure states (sphere).
        #[arg(long, value_enum, default_value_t = MeasureArg::Ball)]
        measure: MeasureArg,
    },
    /// Classical capacity of a unital channel.
    Capacity {
        /// Channel file; must be unital (zero shift).
        channel: PathBuf,
    },
    /// Print the channel's image of the Bloch sphere as CSV points.
    Ellipsoid {
        /// Channel file.
        channel: PathBuf,
        /// Number of points on the sphere.
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Ball,
    Sphere,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Measure {
        match m {
            MeasureArg::Ball => Measure::Ball,
            MeasureArg::Sphere => Measure::Sphere,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Check { channel, tol } => cmd_check(&channel, tol),
        Command::Reconstruct {
            records,
            output,
            seed,
            restarts,
            samples,
            tol,
            refine6,
        } => cmd_reconstruct(&records, &output, seed, restarts, samples, tol, refine6),
        Command::Distance {
            a,
            b,
            samples,
            seed,
            measure,
        } => cmd_distance(&a, &b, samples, seed, measure.into()),
        Command::Capacity { channel } => cmd_capacity(&channel),
        Command::Ellipsoid { channel, n } => cmd_ellipsoid(&channel, n),
    }
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_channel(path: &Path) -> CliResult<AffineChannel<f64>> {
    parse_channel(&read_file(path)?, &path.display().to_string())
}

fn check_tolerance(tol: f64) -> CliResult<f64> {
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(CliError::Lib(Error::Invalid {
            field: "tol".into(),
            reason: "must be a positive finite number".into(),
        }))
    }
}

fn certificate_value(cert: &CpCertificate<f64>) -> Value {
    let mut map = Map::new();
    map.insert("is_cp".to_string(), Value::Bool(cert.is_cp));
    map.insert(
        "min_choi_eigenvalue".to_string(),
        Value::from(cert.min_choi_eigenvalue),
    );
    map.insert(
        "fa_margins".to_string(),
        Value::Array(cert.fa_margins.iter().map(|&m| Value::from(m)).collect()),
    );
    map.insert(
        "trace_preserving_residual".to_string(),
        Value::from(cert.trace_preserving_residual),
    );
    Value::Object(map)
}

fn frame_value(frame: &Frame<f64>) -> Value {
    let axis = |v: [f64; 3]| Value::Array(v.iter().map(|&x| Value::from(x)).collect());
    let mut map = Map::new();
    map.insert("ex".to_string(), axis(frame.ex().to_array()));
    map.insert("ey".to_string(), axis(frame.ey().to_array()));
    map.insert("ez".to_string(), axis(frame.ez().to_array()));
    Value::Object(map)
}

fn report_value(report: &ReconstructionReport<f64>) -> Value {
    let mut adaptable = Map::new();
    adaptable.insert(
        "channel".to_string(),
        channel_value(&report.adaptable.channel),
    );
    adaptable.insert(
        "in_frame".to_string(),
        frame_value(&report.adaptable.in_frame),
    );
    adaptable.insert(
        "out_frame".to_string(),
        frame_value(&report.adaptable.out_frame),
    );

    let v = &report.variables;
    let mut variables = Map::new();
    for (name, value) in [
        ("x", v.x),
        ("y", v.y),
        ("z", v.z),
        ("m", v.m),
        ("n", v.n),
        ("k", v.k),
    ] {
        variables.insert(name.to_string(), Value::from(value));
    }

    let mut optimizer = Map::new();
    optimizer.insert(
        "iterations".to_string(),
        Value::from(report.optimizer.iterations),
    );
    optimizer.insert(
        "restarts_used".to_string(),
        Value::from(report.optimizer.restarts_used),
    );
    optimizer.insert(
        "final_objectives".to_string(),
        Value::Array(
            report
                .optimizer
                .final_objectives
                .iter()
                .map(|&x| Value::from(x))
                .collect(),
        ),
    );

    let mut map = Map::new();
    map.insert(
        "branch".to_string(),
        Value::String(report.branch.name().to_string()),
    );
    map.insert("estimate".to_string(), channel_value(&report.estimate));
    map.insert("adaptable".to_string(), Value::Object(adaptable));
    map.insert("variables".to_string(), Value::Object(variables));
    map.insert(
        "certificate".to_string(),
        certificate_value(&report.certificate),
    );
    map.insert("optimizer".to_string(), Value::Object(optimizer));
    map.insert(
        "max_record_residual".to_string(),
        Value::from(report.max_record_residual),
    );
    Value::Object(map)
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_check(path: &Path, tol_flag: Option<f64>) -> CliResult<()> {
    let channel = load_channel(path)?;
    let eps = check_tolerance(tol_flag.unwrap_or_else(|| tol::scaled::<f64>(tol::CP)))?;
    let cert = certify_cp_with(&channel, eps);

    let mut payload = certificate_value(&cert)
        .as_object()
        .cloned()
        .expect("certificate_value builds an object");
    payload.insert("tolerance".to_string(), Value::from(eps));
    print!("{}", to_canonical_json(&Value::Object(payload)));

    if cert.is_cp {
        Ok(())
    } else {
        Err(CliError::Lib(Error::NotCompletelyPositive {
            min_eigenvalue: cert.min_choi_eigenvalue,
            tolerance: eps,
        }))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_reconstruct(
    records_path: &Path,
    output: &Path,
    seed: u64,
    restarts: usize,
    samples: usize,
    tol_flag: Option<f64>,
    refine6: bool,
) -> CliResult<()> {
    let parsed = parse_records(&read_file(records_path)?, &records_path.display().to_string())?;
    let cp_epsilon = check_tolerance(
        tol_flag
            .or(parsed.tolerance)
            .unwrap_or_else(|| tol::scaled::<f64>(tol::CP)),
    )?;
    let options = EstimateOptions {
        seed,
        restarts,
        refine6,
        uhlmann_grid_points: samples,
        cp_epsilon,
        ..EstimateOptions::default()
    };
    let report = estimate(&parsed.records, &options)?;

    let channel_text = to_canonical_json(&channel_value(&report.estimate));
    fs::write(output, channel_text)
        .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", output.display())))?;
    eprintln!("estimate written to {}", output.display());

    print!("{}", to_canonical_json(&report_value(&report)));
    Ok(())
}

fn cmd_distance(a: &Path, b: &Path, samples: usize, seed: u64, measure: Measure) -> CliResult<()> {
    let first = load_channel(a)?;
    let second = load_channel(b)?;
    let est = average_distance(&first, &second, samples, seed, measure)?;

    let mut map = Map::new();
    map.insert("mean".to_string(), Value::from(est.mean));
    map.insert("std_error".to_string(), Value::from(est.std_error));
    map.insert("samples".to_string(), Value::from(est.samples));
    map.insert(
        "measure".to_string(),
        Value::String(est.measure.name().to_string()),
    );
    map.insert("seed".to_string(), Value::from(est.seed));
    print!("{}", to_canonical_json(&Value::Object(map)));
    Ok(())
}

fn cmd_capacity(path: &Path) -> CliResult<()> {
    let channel = load_channel(path)?;
    let capacity = unital_capacity(&channel)?;
    let mu = singular_decompose(&channel).lambdas[0];

    let mut map = Map::new();
    map.insert("mu".to_string(), Value::from(mu));
    map.insert("capacity".to_string(), Value::from(capacity));
    print!("{}", to_canonical_json(&Value::Object(map)));
    Ok(())
}

fn cmd_ellipsoid(path: &Path, n: usize) -> CliResult<()> {
    let channel = load_channel(path)?;
    let points = image_cloud(&channel, n)?;

    let mut csv = String::with_capacity(points.len() * 72 + 8);
    csv.push_str("x,y,z\n");
    for p in &points {
        let [x, y, z] = p.to_array();
        csv.push_str(&float17(x));
        csv.push(',');
        csv.push_str(&float17(y));
        csv.push(',');
        csv.push_str(&float17(z));
        csv.push('\n');
    }
    print!("{csv}");
    Ok(())
}
