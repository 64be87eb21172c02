//! Inequality reports shared by every check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Margin tolerance used when a check does not override it.
pub const DEFAULT_TOL: f64 = 1e-9;

/// One verified inequality `measured ≤ bound`.
///
/// `measured` and `bound` belong to the worst case seen over all samples;
/// `margin = (bound − measured)/bound`, and `pass ⇔ margin ≥ −tol` where
/// `tol` is stored in `params`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub params: BTreeMap<String, Value>,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
    pub solver_gap: f64,
    pub quad_err: f64,
    pub ms: f64,
}

/// Relative slack of `measured ≤ bound`. A zero bound only admits a
/// nonpositive measurement.
pub fn margin(measured: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        (bound - measured) / bound
    } else if measured <= bound {
        0.0
    } else {
        -1.0
    }
}

impl VerificationReport {
    pub fn tol(&self) -> f64 {
        self.params.get("tol").and_then(Value::as_f64).unwrap_or(DEFAULT_TOL)
    }

    /// The pass flag implied by `measured`, `bound` and `tol`.
    pub fn recomputed_pass(&self) -> bool {
        margin(self.measured, self.bound) >= -self.tol()
    }

    /// Parameters as a compact, key-sorted `k=v;k=v` string.
    pub fn params_key(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Running worst case of an inequality checked on many samples.
#[derive(Debug, Clone, Copy)]
pub struct Tally {
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub solver_gap: f64,
    pub quad_err: f64,
    seen: bool,
}

impl Default for Tally {
    fn default() -> Self {
        Self {
            measured: 0.0,
            bound: 0.0,
            margin: f64::INFINITY,
            solver_gap: 0.0,
            quad_err: 0.0,
            seen: false,
        }
    }
}

impl Tally {
    pub fn observe(&mut self, measured: f64, bound: f64) {
        // Kept finite so the report still serializes to JSON.
        let m = if measured.is_nan() || bound.is_nan() {
            f64::MIN
        } else {
            margin(measured, bound)
        };
        if !self.seen || m < self.margin {
            self.measured = measured;
            self.bound = bound;
            self.margin = m;
            self.seen = true;
        }
    }

    pub fn note_gap(&mut self, gap: f64) {
        self.solver_gap = self.solver_gap.max(gap);
    }

    pub fn note_quad_err(&mut self, err: f64) {
        self.quad_err = self.quad_err.max(err);
    }

    pub fn merge(&mut self, other: &Tally) {
        if other.seen && (!self.seen || other.margin < self.margin) {
            self.measured = other.measured;
            self.bound = other.bound;
            self.margin = other.margin;
            self.seen = true;
        }
        self.note_gap(other.solver_gap);
        self.note_quad_err(other.quad_err);
    }

    /// Builds the report. An empty tally reports the vacuous `0 ≤ 0`.
    pub fn finish(self, check: &str, mut params: BTreeMap<String, Value>, tol: f64) -> VerificationReport {
        params.insert("tol".into(), serde_json::json!(tol));
        let margin = if self.seen { self.margin } else { 0.0 };
        VerificationReport {
            check: check.to_string(),
            params,
            measured: self.measured,
            bound: self.bound,
            margin,
            pass: margin >= -tol,
            solver_gap: self.solver_gap,
            quad_err: self.quad_err,
            ms: 0.0,
        }
    }
}
