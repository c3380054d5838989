//! Monte Carlo estimation of `E f(Y_T)` with reproducible parallelism.
//!
//! Trajectories are split into fixed-size blocks. Each block is
//! summed sequentially (compensated), blocks are processed in parallel
//! and merged in block order, so the estimate is bit-identical for
//! every thread count. Trajectory `i` always draws from the stream
//! address `(seed, i)` regardless of which worker runs it.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::integrator::{integrate_path, EvaluationPlan, IntegratorError, NewtonConfig};
use crate::problems::{Functional, SdeProblem};
use crate::randvars::{RandomVariableMode, RngStream};
use crate::tableau::ExtendedButcherTableau;
use crate::util::csv_float;

/// Trajectories per reduction block. Fixed so the grouping (and hence
/// the floating-point reduction order) never depends on thread count.
const BLOCK: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("(T - t0)/h = {ratio} is not integral to within 1e-9")]
    StepCountMismatch { ratio: f64 },
    #[error("need at least 2 trajectories, got {0}")]
    TooFewTrajectories(u64),
    #[error("trajectory {trajectory}: {source}")]
    Integrator { trajectory: u64, source: IntegratorError },
    #[error("no exact moment is catalogued for functional '{0}' on this problem")]
    MissingExactMoment(String),
    #[error("step sizes must be positive and strictly decreasing")]
    InvalidStepSizes,
    #[error("all {0} error points are dominated by Monte Carlo noise; increase the trajectory budget")]
    AllPointsNoiseDominated(usize),
}

/// Compensated (Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    #[inline]
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BlockStats {
    sum: KahanSum,
    sum_sq: KahanSum,
    count: u64,
}

/// Result of one Monte Carlo functional estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub mean: f64,
    pub std_error: f64,
    pub trajectories: u64,
    /// Diffusion-domain clamp events over all trajectories (zero for
    /// problems without a clamping guard).
    pub clamp_events: u64,
    pub wall_clock: f64,
}

/// Resolve the uniform step count for a step size, requiring
/// `(T - t0)/h` integral to within 1e-9.
pub fn step_count(prob: &SdeProblem, h: f64) -> Result<usize, McError> {
    let ratio = (prob.t_end - prob.t0) / h;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 {
        return Err(McError::StepCountMismatch { ratio });
    }
    Ok(n as usize)
}

/// Estimate `E f(Y_T)` over `trajectories` independent paths of the
/// scheme at step size `h`.
///
/// Deterministic for fixed `(seed, trajectories)`: the mean is
/// bit-identical under any rayon thread count.
pub fn estimate_functional(
    tableau: &ExtendedButcherTableau,
    prob: &SdeProblem,
    functional: &Functional,
    h: f64,
    trajectories: u64,
    seed: u64,
    mode: RandomVariableMode,
    cfg: NewtonConfig,
) -> Result<EstimateResult, McError> {
    let started = Instant::now();
    let n_steps = step_count(prob, h)?;
    if trajectories < 2 {
        return Err(McError::TooFewTrajectories(trajectories));
    }
    prob.reset_clamp_events();

    let n_blocks = trajectories.div_ceil(BLOCK);
    let block_results: Vec<Result<BlockStats, McError>> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let lo = block * BLOCK;
            let hi = (lo + BLOCK).min(trajectories);
            let mut stats = BlockStats::default();
            for trajectory in lo..hi {
                let stream = RngStream::new(seed, trajectory);
                let terminal = integrate_path(tableau, prob, n_steps, stream, mode, cfg)
                    .map_err(|source| McError::Integrator { trajectory, source })?;
                let value = functional.eval(&terminal);
                stats.sum.add(value);
                stats.sum_sq.add(value * value);
                stats.count += 1;
            }
            Ok(stats)
        })
        .collect();

    let mut sum = KahanSum::default();
    let mut sum_sq = KahanSum::default();
    for result in block_results {
        let stats = result?;
        sum.add(stats.sum.value());
        sum_sq.add(stats.sum_sq.value());
    }

    let m = trajectories as f64;
    let mean = sum.value() / m;
    let variance = ((sum_sq.value() - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(EstimateResult {
        mean,
        std_error: (variance / m).sqrt(),
        trajectories,
        clamp_events: prob.clamp_events(),
        wall_clock: started.elapsed().as_secs_f64(),
    })
}

/// A weak-order convergence study over a decreasing step-size ladder.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub step_sizes: Vec<f64>,
    pub estimates: Vec<EstimateResult>,
    /// |estimate − exact| per step size.
    pub errors: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Whether each point's error exceeds 3 standard errors; only
    /// resolved points enter the fit.
    pub resolved: Vec<bool>,
    /// Least-squares slope of log2(error) against log2(h) over the
    /// resolved points.
    pub fitted_order: f64,
    /// RMS residual of that fit.
    pub fit_residual: f64,
    pub exact: f64,
}

/// Unweighted least-squares line through `(x_i, y_i)`; returns
/// `(slope, intercept, rms_residual)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points for a line");
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rss: f64 =
        xs.iter().zip(ys).map(|(x, y)| (y - (intercept + slope * x)).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Estimate the weak convergence order of a scheme against the
/// problem's exact moment: per-h errors, noise filtering, log-log fit.
#[allow(clippy::too_many_arguments)]
pub fn weak_order_study(
    tableau: &ExtendedButcherTableau,
    prob: &SdeProblem,
    functional: &Functional,
    step_sizes: &[f64],
    trajectories: u64,
    seed: u64,
    mode: RandomVariableMode,
    cfg: NewtonConfig,
) -> Result<ConvergenceStudy, McError> {
    let exact = prob
        .exact_moment(&functional.id, prob.t_end)
        .ok_or_else(|| McError::MissingExactMoment(functional.id.clone()))?;
    if step_sizes.len() < 2
        || step_sizes.iter().any(|&h| !(h > 0.0))
        || step_sizes.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(McError::InvalidStepSizes);
    }

    let mut estimates = Vec::with_capacity(step_sizes.len());
    for &h in step_sizes {
        estimates.push(estimate_functional(
            tableau, prob, functional, h, trajectories, seed, mode, cfg,
        )?);
    }
    let errors: Vec<f64> = estimates.iter().map(|e| (e.mean - exact).abs()).collect();
    let std_errors: Vec<f64> = estimates.iter().map(|e| e.std_error).collect();
    let resolved: Vec<bool> =
        errors.iter().zip(&std_errors).map(|(err, se)| *err > 3.0 * se).collect();

    let xs: Vec<f64> = step_sizes
        .iter()
        .zip(&resolved)
        .filter(|(_, &r)| r)
        .map(|(h, _)| h.log2())
        .collect();
    let ys: Vec<f64> = errors
        .iter()
        .zip(&resolved)
        .filter(|(_, &r)| r)
        .map(|(e, _)| e.log2())
        .collect();
    if xs.len() < 2 {
        return Err(McError::AllPointsNoiseDominated(step_sizes.len()));
    }
    let (fitted_order, _intercept, fit_residual) = fit_line(&xs, &ys);

    Ok(ConvergenceStudy {
        step_sizes: step_sizes.to_vec(),
        estimates,
        errors,
        std_errors,
        resolved,
        fitted_order,
        fit_residual,
        exact,
    })
}

/// Analytic per-step cost of a scheme on an `m`-noise problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EffortReport {
    /// Drift evaluations per step (each Newton iteration adds one more
    /// per implicit stage, plus one Jacobian evaluation per stage).
    pub drift_evals: usize,
    /// Diffusion-column evaluations per step, over all m columns.
    pub diffusion_evals: usize,
    /// Independent random draws per step: 2m − 1.
    pub random_draws: usize,
    /// Stages solved by simplified Newton each step.
    pub implicit_stages: usize,
}

/// Count per-step work from the tableau's sparsity pattern. Matches
/// what the integrator actually evaluates.
pub fn effort_report(tableau: &ExtendedButcherTableau, wiener_dim: usize) -> EffortReport {
    let plan = EvaluationPlan::new(tableau, wiener_dim);
    EffortReport {
        drift_evals: plan.drift_evals(),
        diffusion_evals: plan.diffusion_evals(),
        random_draws: 2 * wiener_dim - 1,
        implicit_stages: plan.implicit_stages(tableau),
    }
}

/// Header shared by the estimate and convergence CSV emitters.
pub const CSV_HEADER: &str =
    "h,estimate,exact,abs_error,std_error,trajectories,drift_evals,diff_evals,rand_draws";

/// One estimate as a CSV row; `exact`/`abs_error` stay empty when no
/// reference moment is available.
pub fn estimate_csv_row(
    h: f64,
    result: &EstimateResult,
    exact: Option<f64>,
    effort: &EffortReport,
) -> String {
    let (exact_s, err_s) = match exact {
        Some(x) => (csv_float(x), csv_float((result.mean - x).abs())),
        None => (String::new(), String::new()),
    };
    format!(
        "{},{},{},{},{},{},{},{},{}",
        csv_float(h),
        csv_float(result.mean),
        exact_s,
        err_s,
        csv_float(result.std_error),
        result.trajectories,
        effort.drift_evals,
        effort.diffusion_evals,
        effort.random_draws
    )
}

/// Full convergence study as CSV: one row per step size plus a
/// trailing comment row with the fitted order.
pub fn study_csv(study: &ConvergenceStudy, effort: &EffortReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (i, &h) in study.step_sizes.iter().enumerate() {
        out.push_str(&estimate_csv_row(h, &study.estimates[i], Some(study.exact), effort));
        out.push('\n');
    }
    let excluded: Vec<String> = study
        .resolved
        .iter()
        .enumerate()
        .filter(|(_, &r)| !r)
        .map(|(i, _)| csv_float(study.step_sizes[i]))
        .collect();
    out.push_str(&format!(
        "# fitted_order = {}, fit_residual = {}, noise_dominated_h = [{}]\n",
        csv_float(study.fitted_order),
        csv_float(study.fit_residual),
        excluded.join(" ")
    ));
    out
}
