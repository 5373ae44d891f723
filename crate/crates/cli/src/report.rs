//! Result documents. Every JSON result the CLI writes deserializes back into one of these.

use hida_core::{Complex64, FunctionElement};
use serde::{Deserialize, Serialize};

pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateReport {
    pub s: f64,
    pub k1: f64,
    pub k2: f64,
    pub singularity_order: f64,
}

/// A single transform value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueReport {
    pub command: String,
    pub transform: String,
    pub xi: FunctionElement,
    pub value: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_constant: Option<f64>,
    /// Uniform bound on the modulus, where one is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// λ-quadrature oracle value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableReport {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaReport {
    pub rho: [f64; 2],
    pub tau: [f64; 2],
    pub value: [f64; 2],
    pub truncation: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleReport {
    pub kind: String,
    pub seed: u64,
    pub re: f64,
    pub im: f64,
    pub stderr: f64,
    pub exact: [f64; 2],
    pub z_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub suite: String,
    pub trials: u64,
    pub seed: u64,
    pub cauchy_max_gap: f64,
    pub bound_violations: u64,
    pub verdict: bool,
}
