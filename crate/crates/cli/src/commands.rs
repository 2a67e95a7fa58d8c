//! The subcommands, independent of argument parsing and file output.

use std::path::Path;
use std::time::Instant;

use entbound::gilbert::{gilbert_best_of, upper_bound_certificate, MultiRun};
use entbound::rng::{derive_seed, rng_from_seed};
use entbound::states::{self, sample_chessboard_params, HorodeckiParam, NoiseParam};
use entbound::{DensityMatrix, GilbertConfig, MeasureKind, OracleConfig, PartitionClass};
use rayon::prelude::*;

use crate::error::CliError;
use crate::record::{fmt_num, RowFailure, RunRecord, RunSummary, SolverSettings, VERSION};
use crate::spec::StateSpec;
use crate::statefile::write_state_file;

/// Measure, solver configuration and master seed shared by every command.
#[derive(Debug, Clone)]
pub struct Solver {
    pub measure: MeasureKind,
    pub gilbert: GilbertConfig,
    pub oracle: OracleConfig,
    pub seed: u64,
}

impl Solver {
    pub fn new(
        measure: MeasureKind,
        settings: &SolverSettings,
        seed: u64,
    ) -> Result<Self, CliError> {
        Ok(Self {
            measure,
            gilbert: settings.gilbert_config()?,
            oracle: settings.oracle_config()?,
            seed,
        })
    }

    pub fn settings(&self) -> SolverSettings {
        SolverSettings::new(&self.gilbert, &self.oracle)
    }

    pub fn solve(
        &self,
        rho: &DensityMatrix,
        class: &PartitionClass,
        seed: u64,
    ) -> entbound::Result<MultiRun> {
        gilbert_best_of(rho, self.measure, class, &self.gilbert, &self.oracle, seed)
    }
}

fn class_check(class: &PartitionClass, rho: &DensityMatrix) -> Result<(), CliError> {
    class
        .validate(rho.n_parties())
        .map_err(|e| CliError::Input(e.to_string()))
}

/// Runs the solver on one state. With `certificate`, the closest separable
/// state found is re-checked and written there as a matrix file.
pub fn cmd_measure(
    state: &StateSpec,
    noise_p: Option<f64>,
    class: &PartitionClass,
    solver: &Solver,
    certificate: Option<&Path>,
) -> Result<RunRecord, CliError> {
    let started = Instant::now();
    let rho = state.build_noisy(noise_p)?;
    class_check(class, &rho)?;
    let multi = solver.solve(&rho, class, solver.seed)?;
    let best = multi.best_run();
    if let Some(path) = certificate {
        let cert = upper_bound_certificate(best)?;
        write_state_file(path, &cert.closest_state)?;
    }
    Ok(RunRecord {
        version: VERSION.to_string(),
        state: state.to_string(),
        noise_p,
        local_dims: rho.local_dims().to_vec(),
        measure: solver.measure.as_str().to_string(),
        class: class.to_string(),
        seed: solver.seed,
        best_value: best.best_value,
        iterations: best.iterations(),
        status: best.status.as_str().to_string(),
        wall_seconds: started.elapsed().as_secs_f64(),
        runs: RunSummary::of(&multi),
        settings: solver.settings(),
    })
}

/// Outcome of one CSV row's solve.
#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Solved {
        value: f64,
        iterations: usize,
        status: String,
    },
    Failed {
        iterations: Option<usize>,
        message: String,
    },
}

impl RowOutcome {
    fn from_result(result: entbound::Result<MultiRun>) -> Self {
        match result {
            Ok(multi) => {
                let best = multi.best_run();
                RowOutcome::Solved {
                    value: best.best_value,
                    iterations: best.iterations(),
                    status: best.status.as_str().to_string(),
                }
            }
            Err(e) => {
                let iterations = match &e {
                    entbound::Error::Aborted { partial, .. } => Some(partial.iterations()),
                    _ => None,
                };
                RowOutcome::Failed {
                    iterations,
                    message: e.to_string(),
                }
            }
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            RowOutcome::Solved { value, .. } => Some(*value),
            RowOutcome::Failed { .. } => None,
        }
    }

    /// `value, iterations, status` CSV cells; failed rows leave the value empty.
    fn cells(&self) -> [String; 3] {
        match self {
            RowOutcome::Solved {
                value,
                iterations,
                status,
            } => [fmt_num(*value), iterations.to_string(), status.clone()],
            RowOutcome::Failed { iterations, .. } => [
                String::new(),
                iterations.map(|i| i.to_string()).unwrap_or_default(),
                "failed".to_string(),
            ],
        }
    }
}

/// A table ready to be written as CSV, plus the failures behind empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub failures: Vec<RowFailure>,
}

impl Table {
    pub fn any_succeeded(&self) -> bool {
        self.rows.len() > self.failures.len()
    }

    /// Errors with exit code 3 when every row failed.
    pub fn require_success(&self) -> Result<(), CliError> {
        if self.any_succeeded() {
            return Ok(());
        }
        let detail = self
            .failures
            .first()
            .map(|f| f.message.clone())
            .unwrap_or_else(|| "no rows".into());
        Err(CliError::Output(format!(
            "every row failed; first error: {detail}"
        )))
    }
}

fn failures_of(outcomes: &[RowOutcome]) -> Vec<RowFailure> {
    outcomes
        .iter()
        .enumerate()
        .filter_map(|(row, o)| match o {
            RowOutcome::Failed { message, .. } => Some(RowFailure {
                row,
                message: message.clone(),
            }),
            RowOutcome::Solved { .. } => None,
        })
        .collect()
}

/// `steps` equispaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

fn check_range(name: &str, lo: f64, hi: f64, min: f64, max: f64) -> Result<(), CliError> {
    let ok = lo.is_finite() && hi.is_finite() && min <= lo && lo <= hi && hi <= max;
    if ok {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "{name} range [{lo}, {hi}] must be ordered and lie in [{min}, {max}]"
        )))
    }
}

#[derive(Debug, Clone)]
pub struct SweepNoise {
    pub state: StateSpec,
    pub p_min: f64,
    pub p_max: f64,
    pub steps: usize,
    pub classes: Vec<PartitionClass>,
}

/// Seed of the sweep row at noise index `i` and class index `c`.
pub fn sweep_row_seed(master: u64, i: usize, c: usize) -> u64 {
    derive_seed(master, &[i as u64, c as u64])
}

/// Rows `p,class,measure,value,iterations,status,seed`, ascending in `p`,
/// classes in the order given.
pub fn cmd_sweep_noise(args: &SweepNoise, solver: &Solver) -> Result<Table, CliError> {
    check_range("p", args.p_min, args.p_max, 0.0, 1.0)?;
    if args.steps == 0 {
        return Err(CliError::Input("steps must be at least 1".into()));
    }
    if args.classes.is_empty() {
        return Err(CliError::Input("at least one class is required".into()));
    }
    let base = args.state.build()?;
    for class in &args.classes {
        class_check(class, &base)?;
    }
    let ps = linspace(args.p_min, args.p_max, args.steps);
    let mut jobs = Vec::new();
    for (i, &p) in ps.iter().enumerate() {
        let noisy = states::mix_white_noise(&base, NoiseParam::new(p)?)?;
        for (c, class) in args.classes.iter().enumerate() {
            jobs.push((p, class, noisy.clone(), sweep_row_seed(solver.seed, i, c)));
        }
    }
    let outcomes: Vec<RowOutcome> = jobs
        .par_iter()
        .map(|(_, class, rho, seed)| RowOutcome::from_result(solver.solve(rho, class, *seed)))
        .collect();
    let rows = jobs
        .iter()
        .zip(&outcomes)
        .map(|((p, class, _, seed), o)| {
            let [value, iterations, status] = o.cells();
            vec![
                fmt_num(*p),
                class.to_string(),
                solver.measure.as_str().to_string(),
                value,
                iterations,
                status,
                seed.to_string(),
            ]
        })
        .collect();
    Ok(Table {
        header: vec![
            "p",
            "class",
            "measure",
            "value",
            "iterations",
            "status",
            "seed",
        ],
        rows,
        failures: failures_of(&outcomes),
    })
}

#[derive(Debug, Clone)]
pub struct GridHorodecki {
    pub a_min: f64,
    pub a_max: f64,
    pub a_steps: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub p_steps: usize,
    pub class: PartitionClass,
}

/// Rows `a,p,measure,value,iterations,status,seed`, ordered by `a` then `p`.
pub fn cmd_grid_horodecki(args: &GridHorodecki, solver: &Solver) -> Result<Table, CliError> {
    if !(args.a_min > 0.0 && args.a_max < 1.0) {
        return Err(CliError::Input(format!(
            "a range [{}, {}] must lie strictly inside (0, 1)",
            args.a_min, args.a_max
        )));
    }
    check_range("a", args.a_min, args.a_max, 0.0, 1.0)?;
    check_range("p", args.p_min, args.p_max, 0.0, 1.0)?;
    if args.a_steps < 2 || args.p_steps < 2 {
        return Err(CliError::Input(
            "a-steps and p-steps must be at least 2".into(),
        ));
    }
    let mut jobs = Vec::new();
    for (i, &a) in linspace(args.a_min, args.a_max, args.a_steps)
        .iter()
        .enumerate()
    {
        let base = states::horodecki(HorodeckiParam::new(a)?)?;
        class_check(&args.class, &base)?;
        for (j, &p) in linspace(args.p_min, args.p_max, args.p_steps)
            .iter()
            .enumerate()
        {
            let rho = states::mix_white_noise(&base, NoiseParam::new(p)?)?;
            jobs.push((a, p, rho, derive_seed(solver.seed, &[i as u64, j as u64])));
        }
    }
    let outcomes: Vec<RowOutcome> = jobs
        .par_iter()
        .map(|(_, _, rho, seed)| RowOutcome::from_result(solver.solve(rho, &args.class, *seed)))
        .collect();
    let rows = jobs
        .iter()
        .zip(&outcomes)
        .map(|((a, p, _, seed), o)| {
            let [value, iterations, status] = o.cells();
            vec![
                fmt_num(*a),
                fmt_num(*p),
                solver.measure.as_str().to_string(),
                value,
                iterations,
                status,
                seed.to_string(),
            ]
        })
        .collect();
    Ok(Table {
        header: vec!["a", "p", "measure", "value", "iterations", "status", "seed"],
        rows,
        failures: failures_of(&outcomes),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
    /// Denominator of the `fraction` column.
    pub total: usize,
    /// Values at or above `hi`, not counted in any bin.
    pub overflow: usize,
}

impl Histogram {
    /// Bins `[lo + kw, lo + (k+1)w)`; values below `lo` land in the first bin.
    pub fn new(values: &[f64], lo: f64, hi: f64, bins: usize, total: usize) -> Self {
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0; bins];
        let mut overflow = 0;
        for &v in values {
            if v >= hi {
                overflow += 1;
                continue;
            }
            let k = ((v - lo) / width).floor().max(0.0) as usize;
            counts[k.min(bins - 1)] += 1;
        }
        Self {
            lo,
            hi,
            counts,
            total,
            overflow,
        }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn edges(&self, k: usize) -> (f64, f64) {
        let w = self.width();
        let hi = if k + 1 == self.counts.len() {
            self.hi
        } else {
            self.lo + w * (k + 1) as f64
        };
        (self.lo + w * k as f64, hi)
    }

    /// Lowest bin with the largest count.
    pub fn mode(&self) -> (f64, f64) {
        let mut best = 0;
        for (k, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = k;
            }
        }
        self.edges(best)
    }

    pub fn table(&self) -> Table {
        let rows = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let (lo, hi) = self.edges(k);
                let fraction = if self.total == 0 {
                    0.0
                } else {
                    c as f64 / self.total as f64
                };
                vec![fmt_num(lo), fmt_num(hi), c.to_string(), fmt_num(fraction)]
            })
            .collect();
        Table {
            header: vec!["bin_lo", "bin_hi", "count", "fraction"],
            rows,
            failures: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChessboardHist {
    pub samples: usize,
    pub bins: usize,
    pub hist_max: f64,
    /// Upper edge of the fine histogram over small values.
    pub sub_hist_max: f64,
    pub class: PartitionClass,
}

#[derive(Debug, Clone)]
pub struct ChessboardOutput {
    /// Rows `id,a,b,c,d,m,n,value,seed`.
    pub samples: Table,
    pub histogram: Histogram,
    /// Same bin count over `[0, sub_hist_max)`.
    pub sub_histogram: Histogram,
    /// Parameter draws redrawn because `m` or `n` was too small.
    pub rejected_draws: usize,
}

/// Seed of chessboard sample `id`; parameters come from a separate stream.
pub fn chessboard_sample_seed(master: u64, id: usize) -> u64 {
    derive_seed(master, &[1, id as u64])
}

pub fn cmd_chessboard_hist(
    args: &ChessboardHist,
    solver: &Solver,
) -> Result<ChessboardOutput, CliError> {
    if args.samples == 0 || args.bins == 0 {
        return Err(CliError::Input(
            "samples and bins must be at least 1".into(),
        ));
    }
    let positive = |x: f64| x.is_finite() && x > 0.0;
    if !positive(args.hist_max) || !positive(args.sub_hist_max) {
        return Err(CliError::Input(
            "histogram upper edges must be positive".into(),
        ));
    }
    let mut param_rng = rng_from_seed(derive_seed(solver.seed, &[0]));
    let mut rejected_draws = 0;
    let mut jobs = Vec::with_capacity(args.samples);
    for id in 0..args.samples {
        let (params, rejected) = sample_chessboard_params(&mut param_rng);
        rejected_draws += rejected;
        jobs.push((id, params, chessboard_sample_seed(solver.seed, id)));
    }
    let outcomes: Vec<RowOutcome> = jobs
        .par_iter()
        .map(|(_, params, seed)| {
            let result =
                states::chessboard(params).and_then(|rho| solver.solve(&rho, &args.class, *seed));
            RowOutcome::from_result(result)
        })
        .collect();
    let rows = jobs
        .iter()
        .zip(&outcomes)
        .map(|((id, p, seed), o)| {
            let mut row = vec![id.to_string()];
            row.extend([p.a, p.b, p.c, p.d, p.m, p.n].iter().map(|z| fmt_num(z.re)));
            row.push(o.value().map(fmt_num).unwrap_or_default());
            row.push(seed.to_string());
            row
        })
        .collect();
    let values: Vec<f64> = outcomes.iter().filter_map(RowOutcome::value).collect();
    let small: Vec<f64> = values
        .iter()
        .copied()
        .filter(|&v| v < args.sub_hist_max)
        .collect();
    let samples = Table {
        header: vec!["id", "a", "b", "c", "d", "m", "n", "value", "seed"],
        rows,
        failures: failures_of(&outcomes),
    };
    Ok(ChessboardOutput {
        samples,
        histogram: Histogram::new(&values, 0.0, args.hist_max, args.bins, values.len()),
        sub_histogram: Histogram::new(&small, 0.0, args.sub_hist_max, args.bins, values.len()),
        rejected_draws,
    })
}

/// Summary of a validated matrix file.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ValidationReport {
    pub path: String,
    pub local_dims: Vec<usize>,
    pub dim: usize,
    pub trace: f64,
    pub purity: f64,
    pub min_eigenvalue: f64,
}

pub fn cmd_validate(path: &Path) -> Result<ValidationReport, CliError> {
    let rho = crate::statefile::parse_state_file(path)?;
    Ok(ValidationReport {
        path: path.display().to_string(),
        local_dims: rho.local_dims().to_vec(),
        dim: rho.dim(),
        trace: rho.trace(),
        purity: rho.purity(),
        min_eigenvalue: rho.min_eigenvalue()?,
    })
}
