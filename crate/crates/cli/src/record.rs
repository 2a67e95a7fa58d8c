//! Serializable run records and invocation metadata.

use std::time::Duration;

use entbound::gilbert::MultiRun;
use entbound::{GilbertConfig, OracleConfig, StepDirection};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::spec::{direction_name, parse_direction};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats a number for CSV output: scientific notation with 17 significant
/// digits, enough to recover the exact double.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Every solver knob, flattened into a serializable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub max_iterations: usize,
    pub findmin_sections: usize,
    pub findmin_rounds: usize,
    pub descent_window: usize,
    pub descent_threshold: f64,
    pub runs: usize,
    pub time_budget_seconds: Option<f64>,
    pub direction: String,
    pub oracle_restarts: usize,
    pub oracle_max_sweeps: usize,
    pub oracle_sweep_tol: f64,
}

impl SolverSettings {
    pub fn new(cfg: &GilbertConfig, oracle: &OracleConfig) -> Self {
        Self {
            max_iterations: cfg.max_iterations,
            findmin_sections: cfg.findmin_sections,
            findmin_rounds: cfg.findmin_rounds,
            descent_window: cfg.descent_window,
            descent_threshold: cfg.descent_threshold,
            runs: cfg.runs,
            time_budget_seconds: cfg.time_budget.map(|d| d.as_secs_f64()),
            direction: direction_name(cfg.direction).to_string(),
            oracle_restarts: oracle.restarts,
            oracle_max_sweeps: oracle.max_sweeps,
            oracle_sweep_tol: oracle.sweep_tol,
        }
    }

    pub fn gilbert_config(&self) -> Result<GilbertConfig, CliError> {
        let direction: StepDirection = parse_direction(&self.direction)?;
        let time_budget = match self.time_budget_seconds {
            None => None,
            Some(s) if s.is_finite() && s > 0.0 => Some(Duration::from_secs_f64(s)),
            Some(s) => {
                return Err(CliError::Input(format!(
                    "time budget must be a positive number of seconds, got {s}"
                )))
            }
        };
        let cfg = GilbertConfig {
            max_iterations: self.max_iterations,
            findmin_sections: self.findmin_sections,
            findmin_rounds: self.findmin_rounds,
            descent_window: self.descent_window,
            descent_threshold: self.descent_threshold,
            runs: self.runs,
            time_budget,
            record_ensemble: false,
            direction,
        };
        cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(cfg)
    }

    pub fn oracle_config(&self) -> Result<OracleConfig, CliError> {
        let cfg = OracleConfig {
            restarts: self.oracle_restarts,
            max_sweeps: self.oracle_max_sweeps,
            sweep_tol: self.oracle_sweep_tol,
        };
        cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(cfg)
    }
}

/// Result of one `measure` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub state: String,
    pub noise_p: Option<f64>,
    pub local_dims: Vec<usize>,
    pub measure: String,
    pub class: String,
    pub seed: u64,
    pub best_value: f64,
    pub iterations: usize,
    pub status: String,
    pub wall_seconds: f64,
    /// Seed, bound, iteration count and status of every independent run.
    pub runs: Vec<RunSummary>,
    pub settings: SolverSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub best_value: f64,
    pub iterations: usize,
    pub status: String,
    pub wall_seconds: f64,
}

impl RunSummary {
    pub fn of(multi: &MultiRun) -> Vec<Self> {
        multi
            .runs
            .iter()
            .map(|r| Self {
                seed: r.seed,
                best_value: r.best_value,
                iterations: r.iterations(),
                status: r.status.as_str().to_string(),
                wall_seconds: r.elapsed.as_secs_f64(),
            })
            .collect()
    }
}

/// Sidecar written next to CSV outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvocationMetadata {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_seconds: f64,
    pub settings: SolverSettings,
    /// Command-specific parameters (ranges, sample counts, output paths).
    pub parameters: serde_json::Value,
    /// Rows that failed, with the error that stopped them.
    pub failures: Vec<RowFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFailure {
    pub row: usize,
    pub message: String,
}
