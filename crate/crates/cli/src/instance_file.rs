//! Instance files: a single JSON object
//!
//! ```json
//! {"M":9,"L":4,"N":4,"seed":42,"entries":[...]}
//! ```
//!
//! `entries` is the row-major list of the `L * N` signed entries in the
//! symmetric window of `M`. On load, a list of `L` rows of `N` entries is
//! accepted as well. `seed` is optional.

use std::io::{Read, Write};

use gbirthday_core::{Instance, Residue, RingContext};
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("instance file is not valid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("entry {value} at row {row}, column {col} is outside the symmetric window of M = {modulus}")]
    OutOfWindow { row: usize, col: usize, value: i64, modulus: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize)]
struct InstanceRecord<'a> {
    #[serde(rename = "M")]
    modulus: u64,
    #[serde(rename = "L")]
    rows: usize,
    #[serde(rename = "N")]
    cols: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    entries: &'a [i64],
}

/// Serialized form, terminated by a newline.
pub fn instance_to_string(inst: &Instance) -> String {
    let entries: Vec<i64> = inst.entries().iter().map(|r| r.value()).collect();
    let record = InstanceRecord {
        modulus: inst.ring().modulus(),
        rows: inst.rows(),
        cols: inst.cols(),
        seed: inst.seed(),
        entries: &entries,
    };
    let mut out = serde_json::to_string(&record).expect("instance record serializes");
    out.push('\n');
    out
}

pub fn store_instance<W: Write>(inst: &Instance, mut out: W) -> std::io::Result<()> {
    out.write_all(instance_to_string(inst).as_bytes())
}

pub fn load_instance<R: Read>(mut input: R) -> Result<Instance, FormatError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    parse_instance(&text)
}

fn header_u64(obj: &serde_json::Map<String, Value>, key: &str) -> Result<u64, FormatError> {
    obj.get(key)
        .ok_or_else(|| FormatError::MalformedHeader(format!("missing field \"{key}\"")))?
        .as_u64()
        .ok_or_else(|| FormatError::MalformedHeader(format!("field \"{key}\" is not a non-negative integer")))
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value.as_object().ok_or_else(|| FormatError::MalformedHeader("top level is not an object".into()))?;
    let modulus = header_u64(obj, "M")?;
    let rows = header_u64(obj, "L")? as usize;
    let cols = header_u64(obj, "N")? as usize;
    let seed = match obj.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| FormatError::MalformedHeader("field \"seed\" is not a u64".into()))?),
    };
    let ring = RingContext::new(modulus).map_err(|e| FormatError::MalformedHeader(e.to_string()))?;
    if rows < 2 || cols < 2 {
        return Err(FormatError::MalformedHeader(format!("L = {rows} and N = {cols} must both be >= 2")));
    }

    let raw = obj.get("entries").ok_or_else(|| FormatError::MalformedHeader("missing field \"entries\"".into()))?;
    let list = raw.as_array().ok_or_else(|| FormatError::MalformedHeader("\"entries\" is not a list".into()))?;
    let flat: Vec<&Value> = if list.iter().all(Value::is_array) && !list.is_empty() {
        if list.len() != rows {
            return Err(FormatError::DimensionMismatch(format!("{} rows, header says L = {rows}", list.len())));
        }
        let mut flat = Vec::with_capacity(rows * cols);
        for (i, row) in list.iter().enumerate() {
            let row = row.as_array().expect("checked above");
            if row.len() != cols {
                return Err(FormatError::DimensionMismatch(format!(
                    "row {} has {} columns, header says N = {cols}",
                    i + 1,
                    row.len()
                )));
            }
            flat.extend(row);
        }
        flat
    } else {
        if list.len() != rows * cols {
            return Err(FormatError::DimensionMismatch(format!(
                "{} entries, header says L x N = {}",
                list.len(),
                rows * cols
            )));
        }
        list.iter().collect()
    };

    let mut entries: Vec<Residue> = Vec::with_capacity(flat.len());
    for (k, v) in flat.into_iter().enumerate() {
        let (row, col) = (k / cols + 1, k % cols + 1);
        let value = v.as_i64().ok_or_else(|| {
            FormatError::MalformedHeader(format!("entry at row {row}, column {col} is not an integer"))
        })?;
        let r = ring.residue(value).map_err(|_| FormatError::OutOfWindow { row, col, value, modulus })?;
        entries.push(r);
    }
    let inst = Instance::new(rows, cols, ring, entries).map_err(|e| FormatError::DimensionMismatch(e.to_string()))?;
    Ok(inst.with_seed(seed))
}
