use serde::Serialize;

use super::config::{Solver, Tolerances};
use crate::gkg::{InstabilityPolicy, SignConvention};

/// One predicted-vs-measured check. The pass flag is derived from the
/// deviation and tolerance on construction and cannot be set directly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    quantity: String,
    predicted: f64,
    measured: f64,
    rel_dev: f64,
    tolerance: f64,
    pass: bool,
}

impl Comparison {
    /// `rel_dev = |measured − predicted| / |predicted|`, or the absolute
    /// difference when `predicted` is zero.
    pub fn new(quantity: impl Into<String>, predicted: f64, measured: f64, tolerance: f64) -> Self {
        let diff = (measured - predicted).abs();
        let rel_dev = if predicted == 0.0 { diff } else { diff / predicted.abs() };
        Self::with_deviation(quantity, predicted, measured, rel_dev, tolerance)
    }

    /// For checks whose deviation is not a plain ratio of the two values,
    /// e.g. a maximum over many samples.
    pub fn with_deviation(
        quantity: impl Into<String>,
        predicted: f64,
        measured: f64,
        rel_dev: f64,
        tolerance: f64,
    ) -> Self {
        Comparison {
            quantity: quantity.into(),
            predicted,
            measured,
            rel_dev,
            tolerance,
            pass: rel_dev <= tolerance,
        }
    }

    pub fn quantity(&self) -> &str {
        &self.quantity
    }
    pub fn predicted(&self) -> f64 {
        self.predicted
    }
    pub fn measured(&self) -> f64 {
        self.measured
    }
    pub fn rel_dev(&self) -> f64 {
        self.rel_dev
    }
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
    pub fn pass(&self) -> bool {
        self.pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Conventions {
    pub sign_convention: SignConvention,
    pub instability_policy: InstabilityPolicy,
    pub gkg_solver: Option<Solver>,
    /// How σ_k relates to the Gaussian exponent α.
    pub sigma_k: &'static str,
    pub width_prediction: &'static str,
}

/// Identifies the build that produced a report. No clock or host name, so
/// reruns stay byte-identical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fingerprint {
    pub package: &'static str,
    pub version: &'static str,
    pub os: &'static str,
    pub arch: &'static str,
    pub float: &'static str,
}

impl Fingerprint {
    pub fn current() -> Self {
        Fingerprint {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            float: "ieee754-binary64",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub experiment_id: String,
    pub seed: u64,
    all_pass: bool,
    comparisons: Vec<Comparison>,
    pub conventions: Conventions,
    pub tolerances: Tolerances,
    pub environment: Fingerprint,
}

impl ComparisonReport {
    pub fn new(
        experiment_id: impl Into<String>,
        seed: u64,
        comparisons: Vec<Comparison>,
        conventions: Conventions,
        tolerances: Tolerances,
    ) -> Self {
        ComparisonReport {
            experiment_id: experiment_id.into(),
            seed,
            all_pass: comparisons.iter().all(Comparison::pass),
            comparisons,
            conventions,
            tolerances,
            environment: Fingerprint::current(),
        }
    }

    pub fn comparisons(&self) -> &[Comparison] {
        &self.comparisons
    }

    pub fn all_pass(&self) -> bool {
        self.all_pass
    }

    pub fn get(&self, quantity: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.quantity == quantity)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Comparison> {
        self.comparisons.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
