//! End-to-end tests of the `blochmap` binary: file parsing, exit codes,
//! payload shape, and byte-level determinism of stdout.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const CHANNEL: &str = r#"{"t": [0.5, 0.0, 0.0],
  "E": [[0.2, -0.1, 0.1], [0.2, 0.0, -0.3], [0.0, 0.3, 0.3]]}"#;

const TWO_RECORDS: &str = r#"{"records": [
  {"input": [0.6, 0.0, 0.0], "output": [0.62, 0.12, 0.0]},
  {"input": [0.4, 0.1, 0.8], "output": [0.65, -0.16, 0.27]}
]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blochmap"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().expect("binary runs");
    (
        status.code().expect("no signal"),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn json(stdout: &str) -> Value {
    serde_json::from_str(stdout).expect("stdout is valid JSON")
}

#[test]
fn check_certifies_a_cp_channel_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let chan = write(dir.path(), "chan.json", CHANNEL);

    let (code, out, _) = run(bin().arg("check").arg(&chan));
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["is_cp"], Value::Bool(true));
    assert!(v["min_choi_eigenvalue"].as_f64().unwrap() > 0.0);
    assert_eq!(v["fa_margins"].as_array().unwrap().len(), 4);
    assert_eq!(v["trace_preserving_residual"].as_f64().unwrap(), 0.0);
}

#[test]
fn check_rejects_the_transpose_map_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let chan = write(
        dir.path(),
        "transpose.json",
        r#"{"t": [0,0,0], "E": [[1,0,0],[0,1,0],[0,0,-1]]}"#,
    );

    let (code, out, err) = run(bin().arg("check").arg(&chan));
    assert_eq!(code, 2);
    let v = json(&out);
    assert_eq!(v["is_cp"], Value::Bool(false));
    let min = v["min_choi_eigenvalue"].as_f64().unwrap();
    assert!((min + 0.5).abs() < 1e-9, "transpose min eigenvalue {min}");
    assert!(err.contains("not completely positive"), "{err}");

    // A wide explicit tolerance turns the same file into a pass.
    let (code, out, _) = run(bin().arg("check").arg(&chan).args(["--tol", "1.0"]));
    assert_eq!(code, 0);
    assert_eq!(json(&out)["is_cp"], Value::Bool(true));
}

#[test]
fn malformed_files_exit_one_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"records": [{"input": [0,0,0], "output": [0, false, 0]}]}"#,
    );
    let (code, out, err) = run(bin().arg("reconstruct").arg(&bad));
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("records[0].output[1]"), "{err}");

    let bad = write(dir.path(), "short.json", r#"{"t": [0,0], "E": []}"#);
    let (code, _, err) = run(bin().arg("check").arg(&bad));
    assert_eq!(code, 1);
    assert!(err.contains("invalid t"), "{err}");

    let (code, _, err) = run(bin().arg("check").arg(dir.path().join("absent.json")));
    assert_eq!(code, 1);
    assert!(err.contains("absent.json"), "{err}");
}

#[test]
fn all_three_channel_file_forms_agree() {
    let dir = tempfile::tempdir().unwrap();
    let nested = write(dir.path(), "nested.json", CHANNEL);
    let flat = write(
        dir.path(),
        "flat.json",
        r#"{"t": [0.5, 0.0, 0.0], "E": [0.2, -0.1, 0.1, 0.2, 0.0, -0.3, 0.0, 0.3, 0.3]}"#,
    );
    let matrix = write(
        dir.path(),
        "matrix.json",
        r#"{"matrix": [[1, 0, 0, 0],
                       [0.5, 0.2, -0.1, 0.1],
                       [0.0, 0.2, 0.0, -0.3],
                       [0.0, 0.0, 0.3, 0.3]]}"#,
    );

    let (_, out_nested, _) = run(bin().arg("check").arg(&nested));
    let (_, out_flat, _) = run(bin().arg("check").arg(&flat));
    let (_, out_matrix, _) = run(bin().arg("check").arg(&matrix));
    assert_eq!(out_nested, out_flat);
    assert_eq!(out_nested, out_matrix);

    let bad_row = write(
        dir.path(),
        "badrow.json",
        r#"{"matrix": [[1, 0, 0.1, 0],
                       [0.5, 0.2, -0.1, 0.1],
                       [0.0, 0.2, 0.0, -0.3],
                       [0.0, 0.0, 0.3, 0.3]]}"#,
    );
    let (code, _, err) = run(bin().arg("check").arg(&bad_row));
    assert_eq!(code, 1);
    assert!(err.contains("first row"), "{err}");
}

#[test]
fn reconstruct_round_trips_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let recs = write(dir.path(), "recs.json", TWO_RECORDS);
    let est = dir.path().join("est.json");

    let (code, out, err) = run(bin()
        .arg("reconstruct")
        .arg(&recs)
        .arg("-o")
        .arg(&est)
        .args(["--restarts", "3"]));
    assert_eq!(code, 0, "stderr: {err}");

    let report = json(&out);
    assert_eq!(report["branch"], Value::String("two_nonunital".into()));
    assert_eq!(report["certificate"]["is_cp"], Value::Bool(true));
    assert!(report["max_record_residual"].as_f64().unwrap() < 1e-8);
    // Machine-readable stdout carries no file-system paths.
    assert!(!out.contains("est.json"), "stdout mentions the output path");
    assert!(err.contains("est.json"), "stderr should name the output file");

    // The written channel file equals the report's estimate and is certified.
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&est).unwrap()).unwrap();
    assert_eq!(written["E"], report["estimate"]["E"]);
    assert_eq!(written["t"], report["estimate"]["t"]);
    let (code, out, _) = run(bin().arg("check").arg(&est));
    assert_eq!(code, 0);
    assert_eq!(json(&out)["is_cp"], Value::Bool(true));
}

#[test]
fn reconstruct_handles_the_empty_record_list() {
    let dir = tempfile::tempdir().unwrap();
    let recs = write(dir.path(), "none.json", r#"{"records": []}"#);
    let est = dir.path().join("est.json");

    let (code, out, _) = run(bin().arg("reconstruct").arg(&recs).arg("-o").arg(&est));
    assert_eq!(code, 0);
    let report = json(&out);
    assert_eq!(report["branch"], Value::String("none".into()));
    for row in report["estimate"]["E"].as_array().unwrap() {
        for x in row.as_array().unwrap() {
            assert_eq!(x.as_f64().unwrap(), 0.0);
        }
    }
}

#[test]
fn data_errors_use_their_reserved_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    // No channel maps these two states this way (exit 3).
    let inconsistent = write(
        dir.path(),
        "inconsistent.json",
        r#"{"records": [
            {"input": [0.6, 0, 0], "output": [0.28, 0.63, 0]},
            {"input": [0, 0, 0], "output": [-0.2, 0.63, 0]}
        ]}"#,
    );
    let (code, _, err) = run(bin().arg("reconstruct").arg(&inconsistent));
    assert_eq!(code, 3, "{err}");

    // Coincident inputs span no direction (exit 4).
    let degenerate = write(
        dir.path(),
        "degenerate.json",
        r#"{"records": [
            {"input": [0.5, 0, 0], "output": [0.1, 0, 0]},
            {"input": [0.5, 0, 0], "output": [0.2, 0, 0]}
        ]}"#,
    );
    let (code, _, err) = run(bin().arg("reconstruct").arg(&degenerate));
    assert_eq!(code, 4, "{err}");

    // Capacity of a shifted channel (exit 5).
    let chan = write(dir.path(), "chan.json", CHANNEL);
    let (code, _, err) = run(bin().arg("capacity").arg(&chan));
    assert_eq!(code, 5, "{err}");
}

#[test]
fn capacity_and_distance_report_expected_values() {
    let dir = tempfile::tempdir().unwrap();
    let depol = write(
        dir.path(),
        "depol.json",
        r#"{"t": [0,0,0], "E": [[0.5,0,0],[0,0.5,0],[0,0,0.5]]}"#,
    );
    let id = write(
        dir.path(),
        "id.json",
        r#"{"t": [0,0,0], "E": [[1,0,0],[0,1,0],[0,0,1]]}"#,
    );

    let (code, out, _) = run(bin().arg("capacity").arg(&depol));
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["mu"].as_f64().unwrap(), 0.5);
    assert!((v["capacity"].as_f64().unwrap() - 0.18872187554086717).abs() < 1e-15);

    let (code, out, _) = run(bin()
        .arg("distance")
        .arg(&id)
        .arg(&depol)
        .args(["--samples", "40000", "--measure", "sphere"]));
    assert_eq!(code, 0);
    let v = json(&out);
    // On pure states the outputs differ by |r|/2 = 1/2 exactly.
    let mean = v["mean"].as_f64().unwrap();
    assert!((mean - 0.5).abs() < 1e-12, "sphere mean {mean}");
    assert_eq!(v["measure"], Value::String("sphere".into()));
    assert_eq!(v["samples"].as_u64().unwrap(), 40000);
}

#[test]
fn ellipsoid_prints_csv_points_inside_the_image() {
    let dir = tempfile::tempdir().unwrap();
    let chan = write(dir.path(), "chan.json", CHANNEL);

    let (code, out, _) = run(bin().arg("ellipsoid").arg(&chan).args(["--n", "64"]));
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x,y,z"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 64);
    for row in rows {
        let parts: Vec<f64> = row.split(',').map(|p| p.parse().unwrap()).collect();
        assert_eq!(parts.len(), 3);
        let norm = (parts[0].powi(2) + parts[1].powi(2) + parts[2].powi(2)).sqrt();
        assert!(norm <= 1.0 + 1e-12, "image point outside the ball: {row}");
    }
}

#[test]
fn stdout_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let recs = write(dir.path(), "recs.json", TWO_RECORDS);
    let chan = write(dir.path(), "chan.json", CHANNEL);
    let depol = write(
        dir.path(),
        "depol.json",
        r#"{"t": [0,0,0], "E": [[0.5,0,0],[0,0.5,0],[0,0,0.5]]}"#,
    );

    let reconstruct = |out: &Path| {
        run(bin()
            .arg("reconstruct")
            .arg(&recs)
            .arg("-o")
            .arg(out)
            .args(["--restarts", "3", "--seed", "11"]))
    };
    let (_, first, _) = reconstruct(&dir.path().join("a.json"));
    let (_, second, _) = reconstruct(&dir.path().join("b.json"));
    assert_eq!(first, second, "reconstruct stdout varies across runs");

    let distance = || {
        run(bin()
            .arg("distance")
            .arg(&chan)
            .arg(&depol)
            .args(["--samples", "30000", "--seed", "7"]))
    };
    assert_eq!(distance().1, distance().1, "distance stdout varies");

    let ellipsoid = || run(bin().arg("ellipsoid").arg(&chan).args(["--n", "200"]));
    assert_eq!(ellipsoid().1, ellipsoid().1, "ellipsoid stdout varies");

    let check = || run(bin().arg("check").arg(&chan));
    assert_eq!(check().1, check().1, "check stdout varies");
}
