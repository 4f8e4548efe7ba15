//! JSON verification reports shared by every identity checker.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub identity: String,
    pub parameters: BTreeMap<String, String>,
    pub points_checked: usize,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<serde_json::Value>,
    pub passed: bool,
}

impl Report {
    pub fn new(identity: impl Into<String>) -> Self {
        Report {
            identity: identity.into(),
            parameters: BTreeMap::new(),
            points_checked: 0,
            max_residual: 0.0,
            witness: None,
            passed: true,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    /// Records one checked point. The first failing point becomes the witness.
    pub fn record(&mut self, residual: f64, ok: bool, witness: impl FnOnce() -> serde_json::Value) {
        self.points_checked += 1;
        if residual > self.max_residual || residual.is_nan() {
            self.max_residual = residual;
        }
        if !ok && self.passed {
            self.passed = false;
            self.witness = Some(witness());
        }
    }

    /// Folds another report's points into this one.
    pub fn absorb(&mut self, other: Report) {
        self.points_checked += other.points_checked;
        if other.max_residual > self.max_residual || other.max_residual.is_nan() {
            self.max_residual = other.max_residual;
        }
        if !other.passed && self.passed {
            self.passed = false;
            self.witness = other.witness;
        }
    }

    /// `Ok(self)` when every point passed, [`Error::VerificationFailed`] otherwise.
    pub fn into_result(self) -> Result<Report> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::VerificationFailed(Box::new(self)))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
