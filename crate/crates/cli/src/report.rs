//! The JSON object printed by every run.

use markoff_core::FareyFraction;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Effective settings of a run, echoed into its report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed_source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_fib: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub node_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fan_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub depth: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub window: Option<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub y0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ratio_sign: Option<i8>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ns: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub convergents: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threads: Option<usize>,
}

/// One region with its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionValue {
    pub p: i64,
    pub q: i64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub fib: u64,
}

impl RegionValue {
    pub fn new(r: FareyFraction, v: Complex64) -> Self {
        RegionValue {
            p: r.p(),
            q: r.q(),
            re: v.re,
            im: v.im,
            abs: v.norm(),
            fib: r.fib(),
        }
    }
}

/// One running average of the asymptotic scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragePoint {
    pub n: u64,
    pub re: f64,
    pub im: f64,
    pub re_over_n: f64,
    pub residue: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tail_bound: Option<f64>,
    pub converged: bool,
}

/// One local identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub ok: bool,
    pub value_re: f64,
    pub value_im: f64,
    pub target_re: f64,
    pub target_im: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<[String; 3]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub abs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fib: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tail_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub levels: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub regions: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub complete: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub classification: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witnesses: Option<Vec<RegionValue>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub region_values: Option<Vec<RegionValue>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub points: Option<Vec<AveragePoint>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub checks: Option<Vec<CheckRow>>,
    pub config: RunConfig,
}

/// JSON has no infinities; an unbounded estimate is reported as absent.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
