//! Gilbert iteration for distance-based entanglement measures.
//!
//! Starting from `𝟙/d`, which lies in every separability class, each step
//! asks the extreme-point oracle for the pure product state `σ_k` maximizing
//! `tr((ρ - ρ_k) σ)`, then moves to the point of the segment
//! `x ρ_k + (1 - x) σ_k` closest to `ρ` under the chosen measure. Every
//! iterate is a mixture of states in the class, so `D(ρ, ρ_k)` is an upper
//! bound on `inf_{σ ∈ C} D(ρ, σ)` at every step.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::extremal::{best_extreme_point, OracleConfig, PartitionClass, ProductState, WarmStarts};
use crate::qmatrix::{convex_combination, CMatrix, DensityMatrix, MeasureKind, TargetState};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq)]
pub struct GilbertConfig {
    pub max_iterations: usize,
    /// Grid sections `N` per line-search round.
    pub findmin_sections: usize,
    /// Line-search rounds `K`; the final bracket has width `(2/N)^K`.
    pub findmin_rounds: usize,
    pub descent_window: usize,
    /// Stop once the mean per-iteration decrease over the window drops below this.
    pub descent_threshold: f64,
    /// Independent runs; the best one is reported.
    pub runs: usize,
    pub time_budget: Option<Duration>,
    /// Keep the `(x_m, σ_k)` sequence so the iterate can be rebuilt as an
    /// explicit mixture of product states.
    pub record_ensemble: bool,
    pub direction: StepDirection,
}

/// Linear functional handed to the extreme-point oracle each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepDirection {
    /// `σ ↦ tr((ρ - ρ_k) σ)`.
    HilbertSchmidt,
    /// `σ ↦ -tr(∇D(ρ_k) σ)`, the conditional-gradient direction of the measure.
    Gradient,
    /// Hilbert–Schmidt first; if the line search cannot improve on `ρ_k`,
    /// retry the iteration with the gradient direction.
    HilbertSchmidtThenGradient,
}

impl Default for GilbertConfig {
    fn default() -> Self {
        Self {
            max_iterations: 70_000,
            findmin_sections: 20,
            findmin_rounds: 8,
            descent_window: 500,
            descent_threshold: 1e-7,
            runs: 3,
            time_budget: None,
            record_ensemble: false,
            direction: StepDirection::HilbertSchmidt,
        }
    }
}

impl GilbertConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || self.findmin_rounds == 0 || self.descent_window == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations, findmin_rounds and descent_window must be positive".into(),
            ));
        }
        if self.findmin_sections < 2 {
            return Err(Error::InvalidParameter(format!(
                "findmin_sections must be at least 2, got {}",
                self.findmin_sections
            )));
        }
        if self.runs == 0 {
            return Err(Error::InvalidParameter("runs must be at least 1".into()));
        }
        if self.descent_threshold.is_nan() || self.descent_threshold < 0.0 {
            return Err(Error::InvalidParameter(
                "descent_threshold must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxIterations,
    TimeBudget,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIterations => "max_iterations",
            RunStatus::TimeBudget => "time_budget",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `D(ρ, ρ_{k+1})` after the update.
    pub value: f64,
    pub x: f64,
    /// `tr((ρ - ρ_k) σ_k)` reported by the oracle.
    pub oracle_value: f64,
}

#[derive(Debug, Clone)]
pub struct GilbertRun {
    pub target: DensityMatrix,
    pub measure: MeasureKind,
    pub class: PartitionClass,
    pub current: DensityMatrix,
    pub initial_value: f64,
    pub best_value: f64,
    pub history: Vec<IterationRecord>,
    pub status: RunStatus,
    pub seed: u64,
    pub elapsed: Duration,
    /// `(x_m, σ_k)` per iteration when `record_ensemble` is set.
    pub ensemble: Option<Vec<(f64, ProductState)>>,
}

impl GilbertRun {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    /// Rebuilds `ρ_k` from the recorded mixture, starting at `𝟙/d`.
    pub fn reconstruct_from_ensemble(&self) -> Option<CMatrix> {
        let steps = self.ensemble.as_ref()?;
        let d = self.target.dim();
        let mut m = CMatrix::identity(d, d).unscale(d as f64);
        for (x, sigma) in steps {
            m = convex_combination(*x, &m, &sigma.projector());
        }
        Some(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FindMinResult {
    pub x: f64,
    pub value: f64,
    /// Final bracket `[x_min, x_max]` around `x`.
    pub bracket: (f64, f64),
}

fn nan_as_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Bracketed grid refinement of `f` on `[0, 1]`.
///
/// Each of `rounds` rounds evaluates `f` at `sections + 1` equispaced points
/// of the current bracket, picks the smallest value (lowest index on ties,
/// infinite values after every finite one) and shrinks the bracket to the
/// two neighbouring grid points, clamped at the bracket ends.
pub fn find_min_by<F>(mut f: F, sections: usize, rounds: usize) -> Result<FindMinResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if sections < 2 || rounds == 0 {
        return Err(Error::InvalidParameter(format!(
            "find_min needs sections >= 2 and rounds >= 1, got {sections} and {rounds}"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x_best = 1.0;
    let mut v_best = f64::INFINITY;
    let mut grid = vec![0.0; sections + 1];
    let mut values = vec![0.0; sections + 1];
    for round in 0..rounds {
        let step = (hi - lo) / sections as f64;
        for i in 0..=sections {
            grid[i] = if i == sections {
                hi
            } else {
                lo + i as f64 * step
            };
            values[i] = nan_as_inf(f(grid[i])?);
        }
        let mut best = 0;
        for i in 1..=sections {
            if values[i] < values[best] {
                best = i;
            }
        }
        if values[best].is_infinite() {
            if round == 0 {
                // nothing finite on the segment: keep the x = 1 endpoint
                return Ok(FindMinResult {
                    x: 1.0,
                    value: values[sections],
                    bracket: (1.0, 1.0),
                });
            }
            break;
        }
        x_best = grid[best];
        v_best = values[best];
        lo = grid[best.saturating_sub(1)];
        hi = grid[(best + 1).min(sections)];
    }
    Ok(FindMinResult {
        x: x_best,
        value: v_best,
        bracket: (lo, hi),
    })
}

/// Minimizes `D(ρ, x ρ_k + (1 - x) σ_k)` over `x ∈ [0, 1]`.
pub fn find_min_on_segment(
    target: &TargetState,
    rho_k: &CMatrix,
    sigma_k: &CMatrix,
    measure: MeasureKind,
    sections: usize,
    rounds: usize,
) -> Result<FindMinResult> {
    let d = target.dim();
    for m in [rho_k, sigma_k] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: d,
            });
        }
    }
    find_min_by(
        |x| target.distance(measure, &convex_combination(x, rho_k, sigma_k)),
        sections,
        rounds,
    )
}

fn aborted(iteration: usize, cause: Error, partial: GilbertRun) -> Error {
    Error::Aborted {
        iteration,
        cause: Box::new(cause),
        partial: Box::new(partial),
    }
}

/// Values at or below this are rounding noise around zero; the run cannot improve.
const ZERO_VALUE: f64 = 1e-12;

/// One run of the Gilbert iteration with a fixed seed.
pub fn gilbert_run(
    rho: &DensityMatrix,
    measure: MeasureKind,
    class: &PartitionClass,
    cfg: &GilbertConfig,
    oracle_cfg: &OracleConfig,
    seed: u64,
) -> Result<GilbertRun> {
    cfg.validate()?;
    oracle_cfg.validate()?;
    class.validate(rho.n_parties())?;
    let started = Instant::now();
    let target = TargetState::new(rho.clone())?;
    let local_dims = rho.local_dims().to_vec();
    let start = DensityMatrix::maximally_mixed(local_dims.clone())?;
    let initial_value = target.distance(measure, start.matrix())?;

    let mut run = GilbertRun {
        target: rho.clone(),
        measure,
        class: class.clone(),
        current: start,
        initial_value,
        best_value: initial_value,
        history: Vec::new(),
        status: RunStatus::MaxIterations,
        seed,
        elapsed: Duration::ZERO,
        ensemble: cfg.record_ensemble.then(Vec::new),
    };

    let mut rng = rng_from_seed(seed);
    let mut warm = WarmStarts::default();
    let mut grad_warm = WarmStarts::default();
    for iteration in 1..=cfg.max_iterations {
        let attempt = |use_gradient: bool,
                       warm: &mut WarmStarts,
                       rng: &mut crate::rng::StateRng|
         -> Result<(ProductState, CMatrix, FindMinResult)> {
            let functional = if use_gradient {
                target.descent_direction(measure, run.current.matrix())?
            } else {
                rho.matrix() - run.current.matrix()
            };
            let sigma = best_extreme_point(&functional, &local_dims, class, oracle_cfg, warm, rng)?;
            let sigma_matrix = sigma.projector();
            let step = find_min_on_segment(
                &target,
                run.current.matrix(),
                &sigma_matrix,
                measure,
                cfg.findmin_sections,
                cfg.findmin_rounds,
            )?;
            Ok((sigma, sigma_matrix, step))
        };
        let outcome = match cfg.direction {
            StepDirection::HilbertSchmidt => attempt(false, &mut warm, &mut rng),
            StepDirection::Gradient => attempt(true, &mut grad_warm, &mut rng),
            StepDirection::HilbertSchmidtThenGradient => {
                match attempt(false, &mut warm, &mut rng) {
                    Ok((_, _, step)) if step.value >= run.best_value => {
                        attempt(true, &mut grad_warm, &mut rng)
                    }
                    other => other,
                }
            }
        };
        let (sigma, sigma_matrix, step) = match outcome {
            Ok(o) => o,
            Err(e) => {
                run.elapsed = started.elapsed();
                return Err(aborted(iteration, e, run));
            }
        };
        let next = convex_combination(step.x, run.current.matrix(), &sigma_matrix);
        run.current = DensityMatrix::new_unchecked(next, local_dims.clone());
        run.best_value = step.value;
        run.history.push(IterationRecord {
            iteration,
            value: step.value,
            x: step.x,
            oracle_value: sigma.value,
        });
        if let Some(ensemble) = run.ensemble.as_mut() {
            ensemble.push((step.x, sigma));
        }

        if step.value <= ZERO_VALUE || window_converged(&run, cfg) {
            run.status = RunStatus::Converged;
            break;
        }
        if cfg.time_budget.is_some_and(|b| started.elapsed() >= b) {
            run.status = RunStatus::TimeBudget;
            break;
        }
    }
    run.elapsed = started.elapsed();
    Ok(run)
}

fn window_converged(run: &GilbertRun, cfg: &GilbertConfig) -> bool {
    let w = cfg.descent_window;
    let k = run.history.len();
    if k < w {
        return false;
    }
    let earlier = if k == w {
        run.initial_value
    } else {
        run.history[k - w - 1].value
    };
    let latest = run.history[k - 1].value;
    (earlier - latest) / (w as f64) < cfg.descent_threshold
}

/// All independent runs of one problem; `best` indexes the smallest bound.
#[derive(Debug, Clone)]
pub struct MultiRun {
    pub runs: Vec<GilbertRun>,
    pub best: usize,
}

impl MultiRun {
    pub fn best_run(&self) -> &GilbertRun {
        &self.runs[self.best]
    }

    pub fn into_best(mut self) -> GilbertRun {
        self.runs.swap_remove(self.best)
    }
}

/// Seed of run `r` under `master_seed`.
pub fn run_seed(master_seed: u64, r: usize) -> u64 {
    derive_seed(master_seed, &[r as u64])
}

/// `cfg.runs` independent runs with seeds derived from `master_seed`; the
/// run with the smallest bound wins (earliest on ties).
pub fn gilbert_best_of(
    rho: &DensityMatrix,
    measure: MeasureKind,
    class: &PartitionClass,
    cfg: &GilbertConfig,
    oracle_cfg: &OracleConfig,
    master_seed: u64,
) -> Result<MultiRun> {
    cfg.validate()?;
    let runs = (0..cfg.runs)
        .map(|r| {
            gilbert_run(
                rho,
                measure,
                class,
                cfg,
                oracle_cfg,
                run_seed(master_seed, r),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.best_value < runs[best].best_value {
            best = k;
        }
    }
    Ok(MultiRun { runs, best })
}

/// Certified output of a run: the bound and the separable state attaining it.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub value: f64,
    pub closest_state: DensityMatrix,
}

/// Largest accepted gap between a run's stored bound and a fresh evaluation.
pub const CERTIFICATE_TOL: f64 = 1e-9;

/// Re-evaluates `D(ρ, ρ_k)` from scratch and checks it against the stored bound.
pub fn upper_bound_certificate(run: &GilbertRun) -> Result<Certificate> {
    let target = TargetState::new(run.target.clone())?;
    let recomputed = target.distance(run.measure, run.current.matrix())?;
    let agrees =
        recomputed == run.best_value || (recomputed - run.best_value).abs() <= CERTIFICATE_TOL;
    if !agrees {
        return Err(Error::CertificateMismatch {
            stored: run.best_value,
            recomputed,
        });
    }
    Ok(Certificate {
        value: run.best_value,
        closest_state: run.current.clone(),
    })
}
