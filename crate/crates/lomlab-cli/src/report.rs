//! JSON encodings shared by all reports.

use lomlab::instance::MatrixSpec;
use lomlab::{RealMatrix, Vector};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn matrix(m: &RealMatrix) -> Value {
    serde_json::to_value(MatrixSpec::from_matrix(m)).expect("matrix is serializable")
}

pub fn matrices(ms: &[RealMatrix]) -> Value {
    Value::Array(ms.iter().map(matrix).collect())
}

pub fn vector(v: &Vector) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical serialization of a value.
pub fn value_hash(v: &Value) -> String {
    sha256_hex(serde_json::to_string(v).expect("value is serializable").as_bytes())
}
