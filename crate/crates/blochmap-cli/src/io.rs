//! File formats and serialization for the command-line front end.
//!
//! Two JSON input formats are understood:
//!
//! * **Channel file** — either `{"t": [3 reals], "E": [3×3 reals]}` (the
//!   linear block row-major, nested rows or a flat array of 9) or
//!   `{"matrix": [4×4 reals]}`, the full affine form whose first row must
//!   be `(1, 0, 0, 0)`.
//! * **Record file** — `{"records": [{"input": [x,y,z], "output":
//!   [x,y,z]}, …]}` with 0–4 entries, plus optional
//!   `{"metadata": {"label": …, "tolerance": …}}`.
//!
//! Parse errors name the offending field by its path (for example
//! `records[1].input[2]`). All output JSON is pretty-printed with floats at
//! 17 significant digits, so every double round-trips bit-exactly.

use std::io;

use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};

use blochmap::bloch::AffineChannel;
use blochmap::linalg::Mat3;
use blochmap::reconstruct::TransformationRecord;

/// CLI failure: what to print on stderr and which code to exit with.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input (exit 1). The string names the file
    /// or field at fault.
    Parse(String),
    /// A library error; the exit code depends on the variant.
    Lib(blochmap::Error),
}

impl From<blochmap::Error> for CliError {
    fn from(e: blochmap::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    /// Stable exit-code contract: 1 unreadable/invalid input, 2 failed
    /// positivity or trace preservation, 3 data no channel can produce,
    /// 4 degenerate geometry, 5 not unital.
    pub fn exit_code(&self) -> i32 {
        use blochmap::Error::*;
        match self {
            CliError::Parse(_) => 1,
            CliError::Lib(err) => match err {
                Invalid { .. } | StateOutsideBall { .. } => 1,
                NotHermitian { .. } | NotTracePreserving { .. } | NotCompletelyPositive { .. } => 2,
                InconsistentRecords { .. } | NoCpEstimate { .. } => 3,
                DegenerateGeometry { .. } | ZeroAxis { .. } => 4,
                NotUnital { .. } => 5,
            },
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Parse(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

fn parse_root(text: &str, file_label: &str) -> CliResult<Map<String, Value>> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Parse(format!("{file_label}: not valid JSON: {e}")))?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(CliError::Parse(format!(
            "{file_label}: the top level must be a JSON object"
        ))),
    }
}

fn field<'a>(map: &'a Map<String, Value>, key: &str, path: &str) -> CliResult<&'a Value> {
    map.get(key)
        .ok_or_else(|| CliError::Parse(format!("missing field {path}")))
}

fn as_array<'a>(v: &'a Value, path: &str) -> CliResult<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| CliError::Parse(format!("invalid {path}: expected an array")))
}

fn as_f64(v: &Value, path: &str) -> CliResult<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| CliError::Parse(format!("invalid {path}: expected a number")))?;
    if !x.is_finite() {
        return Err(CliError::Parse(format!("invalid {path}: must be finite")));
    }
    Ok(x)
}

fn vector3(v: &Value, path: &str) -> CliResult<[f64; 3]> {
    let arr = as_array(v, path)?;
    if arr.len() != 3 {
        return Err(CliError::Parse(format!(
            "invalid {path}: expected 3 components, got {}",
            arr.len()
        )));
    }
    let mut out = [0.0; 3];
    for (i, entry) in arr.iter().enumerate() {
        out[i] = as_f64(entry, &format!("{path}[{i}]"))?;
    }
    Ok(out)
}

/// Reads a channel file (either accepted form) into an affine channel.
pub fn parse_channel(text: &str, file_label: &str) -> CliResult<AffineChannel<f64>> {
    let map = parse_root(text, file_label)?;
    if map.contains_key("matrix") {
        let rows = as_array(field(&map, "matrix", "matrix")?, "matrix")?;
        if rows.len() != 4 {
            return Err(CliError::Parse(format!(
                "invalid matrix: expected 4 rows, got {}",
                rows.len()
            )));
        }
        let mut m = [[0.0; 4]; 4];
        for (i, row) in rows.iter().enumerate() {
            let path = format!("matrix[{i}]");
            let cols = as_array(row, &path)?;
            if cols.len() != 4 {
                return Err(CliError::Parse(format!(
                    "invalid {path}: expected 4 columns, got {}",
                    cols.len()
                )));
            }
            for (j, entry) in cols.iter().enumerate() {
                m[i][j] = as_f64(entry, &format!("{path}[{j}]"))?;
            }
        }
        return AffineChannel::from_affine4(&m).map_err(CliError::Lib);
    }

    let t = vector3(field(&map, "t", "t")?, "t")?;
    let e_value = field(&map, "E", "E")?;
    let e_rows = as_array(e_value, "E")?;
    let mut e = [[0.0; 3]; 3];
    match e_rows.len() {
        3 => {
            for (i, row) in e_rows.iter().enumerate() {
                let path = format!("E[{i}]");
                let cols = as_array(row, &path)?;
                if cols.len() != 3 {
                    return Err(CliError::Parse(format!(
                        "invalid {path}: expected 3 columns, got {}",
                        cols.len()
                    )));
                }
                for (j, entry) in cols.iter().enumerate() {
                    e[i][j] = as_f64(entry, &format!("{path}[{j}]"))?;
                }
            }
        }
        9 => {
            for (k, entry) in e_rows.iter().enumerate() {
                e[k / 3][k % 3] = as_f64(entry, &format!("E[{k}]"))?;
            }
        }
        n => {
            return Err(CliError::Parse(format!(
                "invalid E: expected 3 rows of 3 or a flat array of 9, got {n} elements"
            )));
        }
    }
    Ok(AffineChannel::new(
        Mat3(e),
        blochmap::bloch::BlochVector::new(t[0], t[1], t[2]),
    ))
}

/// Parsed record file: the records plus the optional metadata tolerance.
#[derive(Debug)]
pub struct ParsedRecords {
    pub records: Vec<TransformationRecord<f64>>,
    pub tolerance: Option<f64>,
}

/// Reads a record file (0–4 records, optional metadata).
pub fn parse_records(text: &str, file_label: &str) -> CliResult<ParsedRecords> {
    let map = parse_root(text, file_label)?;
    let entries = as_array(field(&map, "records", "records")?, "records")?;
    if entries.len() > 4 {
        return Err(CliError::Parse(format!(
            "invalid records: at most 4 records are supported, got {}",
            entries.len()
        )));
    }
    let mut records = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        let path = format!("records[{i}]");
        let obj = entry
            .as_object()
            .ok_or_else(|| CliError::Parse(format!("invalid {path}: expected an object")))?;
        let input = vector3(field(obj, "input", &format!("{path}.input"))?, &format!("{path}.input"))?;
        let output = vector3(
            field(obj, "output", &format!("{path}.output"))?,
            &format!("{path}.output"),
        )?;
        let record = TransformationRecord::new(
            blochmap::bloch::BlochVector::new(input[0], input[1], input[2]),
            blochmap::bloch::BlochVector::new(output[0], output[1], output[2]),
        )
        .map_err(|e| CliError::Parse(format!("invalid {path}: {e}")))?;
        records.push(record);
    }
    let mut tolerance = None;
    if let Some(meta) = map.get("metadata") {
        let obj = meta
            .as_object()
            .ok_or_else(|| CliError::Parse("invalid metadata: expected an object".to_string()))?;
        if let Some(tol) = obj.get("tolerance") {
            let x = as_f64(tol, "metadata.tolerance")?;
            if !(x > 0.0) {
                return Err(CliError::Parse(
                    "invalid metadata.tolerance: must be positive".to_string(),
                ));
            }
            tolerance = Some(x);
        }
    }
    Ok(ParsedRecords { records, tolerance })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Pretty JSON with every float at 17 significant digits (`{:.16e}`), the
/// shortest form that is guaranteed to round-trip any double bit-exactly.
struct Digits17<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serializes a JSON value in the CLI's canonical style (pretty, 17
/// significant digits, trailing newline). Object keys are emitted in
/// lexicographic order, so equal values always serialize to equal bytes.
pub fn to_canonical_json(value: &Value) -> String {
    let mut out = Vec::new();
    let formatter = Digits17 {
        inner: PrettyFormatter::new(),
    };
    let mut serializer = serde_json::Serializer::with_formatter(&mut out, formatter);
    serde::Serialize::serialize(value, &mut serializer)
        .expect("serializing an in-memory JSON value cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("the formatter writes UTF-8 only")
}

/// One float in the same 17-significant-digit form the JSON uses.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

fn vec3_value(v: [f64; 3]) -> Value {
    Value::Array(v.iter().map(|&x| Value::from(x)).collect())
}

/// `{"t": …, "E": …}` — the channel file form of an affine channel.
pub fn channel_value(ch: &AffineChannel<f64>) -> Value {
    let mut map = Map::new();
    map.insert("t".to_string(), vec3_value(ch.t.to_array()));
    map.insert(
        "E".to_string(),
        Value::Array(ch.e.0.iter().map(|row| vec3_value(*row)).collect()),
    );
    Value::Object(map)
}
