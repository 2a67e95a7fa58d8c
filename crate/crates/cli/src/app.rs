//! Argument parsing and output files.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use entbound::{GilbertConfig, OracleConfig, PartitionClass};
use serde_json::json;

use crate::commands::{
    cmd_chessboard_hist, cmd_grid_horodecki, cmd_measure, cmd_sweep_noise, cmd_validate,
    ChessboardHist, GridHorodecki, Solver, SweepNoise, Table,
};
use crate::error::CliError;
use crate::record::{InvocationMetadata, SolverSettings, VERSION};
use crate::spec::{parse_class, parse_direction, parse_measure, StateSpec};

#[derive(Debug, Parser)]
#[command(
    name = "entbound",
    version,
    about = "Upper bounds on distance-based entanglement measures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound the measure of a single state and print the run record as JSON.
    Measure(MeasureArgs),
    /// Sweep white-noise visibility p for one state family.
    SweepNoise(SweepNoiseArgs),
    /// Grid over the Horodecki parameter a and noise visibility p.
    GridHorodecki(GridArgs),
    /// Random chessboard states: per-sample values and histograms.
    ChessboardHist(ChessboardArgs),
    /// Check a matrix file against the density-matrix invariants.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// bures2 or relent.
    #[arg(long, default_value = "bures2")]
    pub measure: String,
    #[arg(long = "max-iter", default_value_t = GilbertConfig::default().max_iterations)]
    pub max_iter: usize,
    #[arg(long, default_value_t = GilbertConfig::default().runs)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// hs, gradient or hs-then-gradient.
    #[arg(long, default_value = "hs")]
    pub direction: String,
    /// Wall-clock limit per run, in seconds.
    #[arg(long = "time-budget")]
    pub time_budget: Option<f64>,
    #[arg(long, default_value_t = GilbertConfig::default().descent_window)]
    pub window: usize,
    #[arg(long, default_value_t = GilbertConfig::default().descent_threshold)]
    pub threshold: f64,
    #[arg(long, default_value_t = GilbertConfig::default().findmin_sections)]
    pub sections: usize,
    #[arg(long, default_value_t = GilbertConfig::default().findmin_rounds)]
    pub rounds: usize,
    #[arg(long, default_value_t = OracleConfig::default().restarts)]
    pub restarts: usize,
    #[arg(long, default_value_t = OracleConfig::default().max_sweeps)]
    pub sweeps: usize,
    #[arg(long = "sweep-tol", default_value_t = OracleConfig::default().sweep_tol)]
    pub sweep_tol: f64,
}

impl SolverArgs {
    pub fn settings(&self) -> Result<SolverSettings, CliError> {
        let direction = parse_direction(&self.direction)?;
        let settings = SolverSettings {
            max_iterations: self.max_iter,
            findmin_sections: self.sections,
            findmin_rounds: self.rounds,
            descent_window: self.window,
            descent_threshold: self.threshold,
            runs: self.runs,
            time_budget_seconds: self.time_budget,
            direction: crate::spec::direction_name(direction).to_string(),
            oracle_restarts: self.restarts,
            oracle_max_sweeps: self.sweeps,
            oracle_sweep_tol: self.sweep_tol,
        };
        Ok(settings)
    }

    pub fn solver(&self) -> Result<Solver, CliError> {
        Solver::new(parse_measure(&self.measure)?, &self.settings()?, self.seed)
    }
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// ghz:N, w:N, horodecki:A, chessboard:A,B,C,D,M,N, file:PATH or a bare path.
    #[arg(long)]
    pub state: String,
    /// Mix in white noise: p·ρ + (1 - p)·𝟙/d.
    #[arg(long = "noise-p")]
    pub noise_p: Option<f64>,
    /// full, bisep or partition:SPEC (e.g. partition:12|3).
    #[arg(long, default_value = "full")]
    pub class: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the JSON record here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the closest separable state found as a matrix file.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepNoiseArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long = "p-min", default_value_t = 0.0)]
    pub p_min: f64,
    #[arg(long = "p-max", default_value_t = 1.0)]
    pub p_max: f64,
    /// Number of sweep points, ends included.
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    /// Repeat for several classes; defaults to full and bisep.
    #[arg(long = "class")]
    pub classes: Vec<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Metadata sidecar; defaults to OUT with extension meta.json.
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long = "a-min", default_value_t = 0.1)]
    pub a_min: f64,
    #[arg(long = "a-max", default_value_t = 0.9)]
    pub a_max: f64,
    #[arg(long = "a-steps", default_value_t = 5)]
    pub a_steps: usize,
    #[arg(long = "p-min", default_value_t = 0.0)]
    pub p_min: f64,
    #[arg(long = "p-max", default_value_t = 1.0)]
    pub p_max: f64,
    #[arg(long = "p-steps", default_value_t = 5)]
    pub p_steps: usize,
    #[arg(long, default_value = "full")]
    pub class: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChessboardArgs {
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Upper edge of the main histogram; larger values are counted as overflow.
    #[arg(long = "hist-max", default_value_t = 0.2)]
    pub hist_max: f64,
    /// Upper edge of the fine histogram.
    #[arg(long = "sub-hist-max", default_value_t = 0.01)]
    pub sub_hist_max: f64,
    #[arg(long, default_value = "full")]
    pub class: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Per-sample CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to OUT with extension hist.csv.
    #[arg(long = "hist-out")]
    pub hist_out: Option<PathBuf>,
    /// Defaults to OUT with extension sub.csv.
    #[arg(long = "sub-hist-out")]
    pub sub_hist_out: Option<PathBuf>,
    /// Defaults to OUT with extension meta.json.
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Matrix file to check.
    pub path: PathBuf,
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

/// Writes `table` as CSV to `path`, or stdout when `None`.
pub fn write_table(table: &Table, path: Option<&Path>) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| output_error(p, e))?),
        None => Box::new(io::stdout().lock()),
    };
    let label = path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf);
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&table.header)
        .map_err(|e| output_error(&label, e))?;
    for row in &table.rows {
        w.write_record(row).map_err(|e| output_error(&label, e))?;
    }
    w.flush().map_err(|e| output_error(&label, e))
}

fn write_json(value: &impl serde::Serialize, path: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    match path {
        Some(p) => fs::write(p, text + "\n").map_err(|e| output_error(p, e)),
        None => writeln!(io::stdout().lock(), "{text}")
            .map_err(|e| CliError::Output(format!("<stdout>: {e}"))),
    }
}

fn configure_threads(threads: usize) -> Result<(), CliError> {
    if threads == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot configure {threads} threads: {e}")))
}

fn meta_path(explicit: &Option<PathBuf>, out: Option<&Path>) -> Option<PathBuf> {
    explicit
        .clone()
        .or_else(|| out.map(|o| o.with_extension("meta.json")))
}

fn metadata(
    command: &str,
    solver: &Solver,
    started: Instant,
    parameters: serde_json::Value,
    table: &Table,
) -> InvocationMetadata {
    InvocationMetadata {
        version: VERSION.to_string(),
        command: command.to_string(),
        seed: solver.seed,
        threads: rayon::current_num_threads(),
        wall_seconds: started.elapsed().as_secs_f64(),
        settings: solver.settings(),
        parameters,
        failures: table.failures.clone(),
    }
}

fn classes_or_default(classes: &[String]) -> Result<Vec<PartitionClass>, CliError> {
    if classes.is_empty() {
        return Ok(vec![
            PartitionClass::FullySeparable,
            PartitionClass::BiSeparable,
        ]);
    }
    classes.iter().map(|c| parse_class(c)).collect()
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    match cli.command {
        Command::Measure(args) => {
            let state: StateSpec = args.state.parse()?;
            let class = parse_class(&args.class)?;
            let solver = args.solver.solver()?;
            configure_threads(args.solver.threads)?;
            let record = cmd_measure(
                &state,
                args.noise_p,
                &class,
                &solver,
                args.certificate.as_deref(),
            )?;
            write_json(&record, args.out.as_deref())
        }
        Command::SweepNoise(args) => {
            let sweep = SweepNoise {
                state: args.state.parse()?,
                p_min: args.p_min,
                p_max: args.p_max,
                steps: args.steps,
                classes: classes_or_default(&args.classes)?,
            };
            let solver = args.solver.solver()?;
            configure_threads(args.solver.threads)?;
            let table = cmd_sweep_noise(&sweep, &solver)?;
            write_table(&table, args.out.as_deref())?;
            if let Some(meta) = meta_path(&args.meta, args.out.as_deref()) {
                let classes: Vec<String> = sweep.classes.iter().map(|c| c.to_string()).collect();
                let params = json!({
                    "state": sweep.state.to_string(),
                    "p_min": sweep.p_min,
                    "p_max": sweep.p_max,
                    "steps": sweep.steps,
                    "classes": classes,
                    "measure": solver.measure.as_str(),
                });
                write_json(
                    &metadata("sweep-noise", &solver, started, params, &table),
                    Some(&meta),
                )?;
            }
            table.require_success()
        }
        Command::GridHorodecki(args) => {
            let grid = GridHorodecki {
                a_min: args.a_min,
                a_max: args.a_max,
                a_steps: args.a_steps,
                p_min: args.p_min,
                p_max: args.p_max,
                p_steps: args.p_steps,
                class: parse_class(&args.class)?,
            };
            let solver = args.solver.solver()?;
            configure_threads(args.solver.threads)?;
            let table = cmd_grid_horodecki(&grid, &solver)?;
            write_table(&table, args.out.as_deref())?;
            if let Some(meta) = meta_path(&args.meta, args.out.as_deref()) {
                let params = json!({
                    "a_min": grid.a_min,
                    "a_max": grid.a_max,
                    "a_steps": grid.a_steps,
                    "p_min": grid.p_min,
                    "p_max": grid.p_max,
                    "p_steps": grid.p_steps,
                    "class": grid.class.to_string(),
                    "measure": solver.measure.as_str(),
                });
                write_json(
                    &metadata("grid-horodecki", &solver, started, params, &table),
                    Some(&meta),
                )?;
            }
            table.require_success()
        }
        Command::ChessboardHist(args) => {
            let hist = ChessboardHist {
                samples: args.samples,
                bins: args.bins,
                hist_max: args.hist_max,
                sub_hist_max: args.sub_hist_max,
                class: parse_class(&args.class)?,
            };
            let solver = args.solver.solver()?;
            configure_threads(args.solver.threads)?;
            let out = cmd_chessboard_hist(&hist, &solver)?;
            let hist_out = args
                .hist_out
                .clone()
                .unwrap_or_else(|| args.out.with_extension("hist.csv"));
            let sub_out = args
                .sub_hist_out
                .clone()
                .unwrap_or_else(|| args.out.with_extension("sub.csv"));
            write_table(&out.samples, Some(&args.out))?;
            write_table(&out.histogram.table(), Some(&hist_out))?;
            write_table(&out.sub_histogram.table(), Some(&sub_out))?;
            let meta = meta_path(&args.meta, Some(&args.out)).expect("out is always set");
            let params = json!({
                "samples": hist.samples,
                "bins": hist.bins,
                "hist_max": hist.hist_max,
                "sub_hist_max": hist.sub_hist_max,
                "class": hist.class.to_string(),
                "measure": solver.measure.as_str(),
                "rejected_draws": out.rejected_draws,
                "overflow": out.histogram.overflow,
                "histogram": hist_out.display().to_string(),
                "sub_histogram": sub_out.display().to_string(),
            });
            write_json(
                &metadata("chessboard-hist", &solver, started, params, &out.samples),
                Some(&meta),
            )?;
            out.samples.require_success()
        }
        Command::Validate(args) => write_json(&cmd_validate(&args.path)?, None),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
