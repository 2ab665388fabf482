//! Machine-readable check reports with stable serialization.
//!
//! Reports are fully deterministic for a fixed (config, seed): field
//! order follows struct order, record order follows sample order, and
//! wall-clock timing is intentionally excluded from the serialized
//! payload (the `duration_ms` field is always 0) so that repeated runs
//! are byte-identical.

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

pub const REPORT_VERSION: &str = "report_v1";

/// One verified statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    /// Human-readable description of the mathematical statement.
    pub anchor: String,
    /// Measured residual; `None` when the computation itself failed.
    pub residual: Option<f64>,
    pub tol: f64,
    pub pass: bool,
    /// Where/how the check was sampled.
    pub sample: String,
}

impl CheckRecord {
    pub fn measured(id: &str, anchor: &str, residual: f64, tol: f64, sample: String) -> Self {
        Self {
            id: id.into(),
            anchor: anchor.into(),
            residual: Some(residual),
            tol,
            pass: residual.is_finite() && residual <= tol,
            sample,
        }
    }

    pub fn failed(id: &str, anchor: &str, tol: f64, error: &CoreError) -> Self {
        Self {
            id: id.into(),
            anchor: anchor.into(),
            residual: None,
            tol,
            pass: false,
            sample: format!("error: {error}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
}

/// Runtime configuration shared by all suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Random-sample count for the algebraic identity sweeps.
    pub samples: usize,
    pub tol_algebraic: f64,
    pub tol_derivative: f64,
    /// Grid resolution per axis for chart sweeps.
    pub grid: usize,
    /// Chart ids to include in `all` runs.
    pub charts: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            samples: 1000,
            tol_algebraic: 1e-12,
            tol_derivative: 1e-5,
            grid: 5,
            charts: crate::catalog::CHART_IDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(CoreError::InvalidConfig("samples must be >= 1".into()));
        }
        if self.grid == 0 {
            return Err(CoreError::InvalidConfig("grid must be >= 1".into()));
        }
        if !(self.tol_algebraic > 0.0) || !(self.tol_derivative > 0.0) {
            return Err(CoreError::InvalidConfig(
                "tolerances must be strictly positive".into(),
            ));
        }
        for id in &self.charts {
            crate::catalog::get_chart(id)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub version: String,
    pub suite: String,
    pub seed: u64,
    pub config: RunConfig,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    /// Always 0 in the serialized report; real timing goes to stderr.
    pub duration_ms: u64,
}

impl CheckReport {
    pub fn new(suite: &str, config: &RunConfig, checks: Vec<CheckRecord>) -> Self {
        let pass = checks.iter().filter(|c| c.pass).count();
        let fail = checks.len() - pass;
        Self {
            version: REPORT_VERSION.into(),
            suite: suite.into(),
            seed: config.seed,
            config: config.clone(),
            checks,
            summary: Summary { pass, fail },
            duration_ms: 0,
        }
    }

    /// Merge several suite reports into one.
    pub fn merged(suite: &str, config: &RunConfig, parts: Vec<CheckReport>) -> Self {
        let mut checks = Vec::new();
        for part in parts {
            let prefix = part.suite.clone();
            for mut c in part.checks {
                c.id = format!("{prefix}.{}", c.id);
                checks.push(c);
            }
        }
        Self::new(suite, config, checks)
    }

    pub fn all_passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "suite: {}  (seed {}, {} checks: {} pass / {} fail)\n",
            self.suite,
            self.seed,
            self.checks.len(),
            self.summary.pass,
            self.summary.fail
        ));
        out.push_str(&format!(
            "{:<44} {:>12} {:>9}  {:<6} {}\n",
            "check", "residual", "tol", "status", "sample"
        ));
        for c in &self.checks {
            let residual = match c.residual {
                Some(r) => format!("{r:.3e}"),
                None => "n/a".into(),
            };
            out.push_str(&format!(
                "{:<44} {:>12} {:>9.1e}  {:<6} {}\n",
                c.id,
                residual,
                c.tol,
                if c.pass { "ok" } else { "FAIL" },
                c.sample
            ));
        }
        out
    }
}
