//! One step of the general SRK method and whole-trajectory integration.
//!
//! A step advances
//!
//! ```text
//! Y_{n+1} = Y_n + Σ_i α_i a(t+c0_i h, H0_i) h
//!         + Σ_{i,k} (β1_i Î_k + β2_i Î_(k,k)/√h) b^k(t+c1_i h, H1_{i,k})
//!         + Σ_{i,k} (β3_i Î_k + β4_i √h)         b^k(t+c2_i h, H2_{i,k})
//! ```
//!
//! with drift stages `H0`, diffusion stages `H1` and mixed stages `H2`.
//! Stages are evaluated in index order, which is valid because the
//! drift coupling `A(0)` is lower triangular and all stochastic blocks
//! are strictly lower triangular. A stage with a nonzero `A(0)`
//! diagonal entry is solved by simplified Newton: the iteration matrix
//! `I − A0_ii h J` with `J = ∂a/∂x(t+c0_i h, Y_n)` is factored once and
//! reused across iterations.
//!
//! Only stage evaluations that actually feed the output (directly or
//! through later stages) are performed; the same reachability analysis
//! backs the per-step effort accounting in the Monte Carlo layer.

use thiserror::Error;

use crate::linalg::LuFactors;
use crate::problems::SdeProblem;
use crate::randvars::{RandomVariableMode, RngStream, WienerIncrements};
use crate::tableau::ExtendedButcherTableau;

/// Conditioning threshold above which a stage system counts as
/// singular to working precision.
const STAGE_COND_LIMIT: f64 = 1e14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegratorError {
    #[error("stage {stage} system I - A0[{stage}][{stage}] h J is singular to working precision")]
    SingularStageSystem { stage: usize },
    #[error("Newton iteration on stage {stage} did not converge within {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { stage: usize, iterations: usize, residual: f64 },
    #[error("state became non-finite")]
    NonFiniteState,
    #[error("increments were built for m = {increments} noises but the problem has m = {problem}")]
    IncrementMismatch { increments: usize, problem: usize },
}

/// Simplified-Newton controls for implicit drift stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Residual bound, relative to `1 + ||Y_n||`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub jacobian_mode: JacobianMode,
}

/// Jacobian source for the stage iteration matrix. `UserSupplied`
/// falls back to finite differences when the problem carries no
/// analytic Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    UserSupplied,
    FiniteDifference,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 25, jacobian_mode: JacobianMode::UserSupplied }
    }
}

/// Which stage evaluations a tableau actually consumes, for a given
/// noise dimension.
///
/// `reuse_b2[i] = Some(j)` marks an H2 stage whose evaluation point is
/// structurally identical to the H1 stage `j` evaluation (both reduce
/// to `Y_n` at the same abscissa), so no new diffusion calls are spent
/// on it.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationPlan {
    pub need_a: Vec<bool>,
    pub need_b1: Vec<bool>,
    pub need_b2: Vec<bool>,
    pub reuse_b2: Vec<Option<usize>>,
    pub wiener_dim: usize,
}

impl EvaluationPlan {
    pub fn new(t: &ExtendedButcherTableau, wiener_dim: usize) -> Self {
        let s = t.s;
        let m = wiener_dim;
        let mut need_a: Vec<bool> = (0..s).map(|i| t.alpha[i] != 0.0).collect();
        let mut need_b1: Vec<bool> =
            (0..s).map(|i| t.beta1[i] != 0.0 || t.beta2[i] != 0.0).collect();
        let need_b2: Vec<bool> = (0..s).map(|i| t.beta3[i] != 0.0 || t.beta4[i] != 0.0).collect();

        // Propagate consumers through the coupling matrices until the
        // masks stabilize (s is tiny, so a plain fixpoint loop is fine).
        loop {
            let mut changed = false;
            for j in 0..s {
                if !need_a[j] {
                    let used = (0..s).any(|i| {
                        (i != j && t.a0[i][j] != 0.0 && need_a[i])
                            || (t.a1[i][j] != 0.0 && need_b1[i])
                            || (t.a2[i][j] != 0.0 && need_b2[i])
                    });
                    if used {
                        need_a[j] = true;
                        changed = true;
                    }
                }
                if !need_b1[j] {
                    let used = (0..s).any(|i| {
                        (t.b0[i][j] != 0.0 && need_a[i])
                            || (t.b1[i][j] != 0.0 && need_b1[i])
                            || (t.b2[i][j] != 0.0 && need_b2[i] && m >= 2)
                    });
                    if used {
                        need_b1[j] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let row_zero = |mat: &Vec<Vec<f64>>, i: usize| mat[i].iter().all(|&x| x == 0.0);
        let reuse_b2 = (0..s)
            .map(|i| {
                if !need_b2[i] {
                    return None;
                }
                let trivial = row_zero(&t.a2, i) && (m == 1 || row_zero(&t.b2, i));
                if !trivial {
                    return None;
                }
                (0..s).find(|&j| {
                    need_b1[j] && row_zero(&t.a1, j) && row_zero(&t.b1, j) && t.c1[j] == t.c2[i]
                })
            })
            .collect();

        Self { need_a, need_b1, need_b2, reuse_b2, wiener_dim }
    }

    /// Structural drift evaluations per step (Newton iterations add
    /// one evaluation each on top, per implicit stage).
    pub fn drift_evals(&self) -> usize {
        self.need_a.iter().filter(|&&b| b).count()
    }

    /// Diffusion-column evaluations per step, summed over all noises.
    pub fn diffusion_evals(&self) -> usize {
        let h1: usize = self.need_b1.iter().filter(|&&b| b).count();
        let h2: usize = self
            .need_b2
            .iter()
            .zip(&self.reuse_b2)
            .filter(|(&needed, reuse)| needed && reuse.is_none())
            .count();
        (h1 + h2) * self.wiener_dim
    }

    /// Stages solved by Newton iteration each step.
    pub fn implicit_stages(&self, t: &ExtendedButcherTableau) -> usize {
        (0..t.s).filter(|&i| self.need_a[i] && t.a0[i][i] != 0.0).count()
    }
}

/// Reusable stepping engine for one (tableau, problem-shape) pair.
pub struct SrkIntegrator<'a> {
    tableau: &'a ExtendedButcherTableau,
    plan: EvaluationPlan,
    cfg: NewtonConfig,
    dim: usize,
    // workspace, reused across steps
    a_evals: Vec<f64>,  // s × d
    b1_evals: Vec<f64>, // s × m × d
    b2_evals: Vec<f64>, // s × m × d
    stage: Vec<f64>,
    rhs: Vec<f64>,
    newton_x: Vec<f64>,
    newton_ax: Vec<f64>,
    residual: Vec<f64>,
    jac: Vec<f64>,
    iter_matrix: Vec<f64>,
    fd_base: Vec<f64>,
    fd_pert: Vec<f64>,
}

impl<'a> SrkIntegrator<'a> {
    pub fn new(
        tableau: &'a ExtendedButcherTableau,
        dim: usize,
        wiener_dim: usize,
        cfg: NewtonConfig,
    ) -> Self {
        let s = tableau.s;
        let (d, m) = (dim, wiener_dim);
        Self {
            tableau,
            plan: EvaluationPlan::new(tableau, m),
            cfg,
            dim: d,
            a_evals: vec![0.0; s * d],
            b1_evals: vec![0.0; s * m * d],
            b2_evals: vec![0.0; s * m * d],
            stage: vec![0.0; d],
            rhs: vec![0.0; d],
            newton_x: vec![0.0; d],
            newton_ax: vec![0.0; d],
            residual: vec![0.0; d],
            jac: vec![0.0; d * d],
            iter_matrix: vec![0.0; d * d],
            fd_base: vec![0.0; d],
            fd_pert: vec![0.0; d],
        }
    }

    pub fn plan(&self) -> &EvaluationPlan {
        &self.plan
    }

    /// Advance one step from `(tn, yn)` with the given increments,
    /// writing `Y_{n+1}` into `out`.
    pub fn step(
        &mut self,
        prob: &SdeProblem,
        tn: f64,
        yn: &[f64],
        h: f64,
        inc: &WienerIncrements,
        out: &mut [f64],
    ) -> Result<(), IntegratorError> {
        let t = self.tableau;
        let (s, d, m) = (t.s, self.dim, self.plan.wiener_dim);
        if inc.wiener_dim() != m {
            return Err(IntegratorError::IncrementMismatch {
                increments: inc.wiener_dim(),
                problem: m,
            });
        }
        let sqrt_h = h.sqrt();

        for i in 0..s {
            // H1 stages and their diffusion evaluations, one per noise.
            if self.plan.need_b1[i] {
                for k in 0..m {
                    self.stage.copy_from_slice(yn);
                    for j in 0..i {
                        let w = t.a1[i][j] * h;
                        if w != 0.0 {
                            for c in 0..d {
                                self.stage[c] += w * self.a_evals[j * d + c];
                            }
                        }
                        let w = t.b1[i][j] * sqrt_h;
                        if w != 0.0 {
                            for c in 0..d {
                                self.stage[c] += w * self.b1_evals[(j * m + k) * d + c];
                            }
                        }
                    }
                    let ts = tn + t.c1[i] * h;
                    let slot = (i * m + k) * d;
                    prob.diffusion_col(k, ts, &self.stage, &mut self.b1_evals[slot..slot + d]);
                }
            }

            // H0 stage and its drift evaluation.
            if self.plan.need_a[i] {
                self.rhs.copy_from_slice(yn);
                for j in 0..i {
                    let w = t.a0[i][j] * h;
                    if w != 0.0 {
                        for c in 0..d {
                            self.rhs[c] += w * self.a_evals[j * d + c];
                        }
                    }
                    if t.b0[i][j] != 0.0 {
                        for k in 0..m {
                            let w = t.b0[i][j] * inc.ihat[k];
                            for c in 0..d {
                                self.rhs[c] += w * self.b1_evals[(j * m + k) * d + c];
                            }
                        }
                    }
                }
                let ts = tn + t.c0[i] * h;
                if t.a0[i][i] == 0.0 {
                    let slot = i * d;
                    prob.drift(ts, &self.rhs, &mut self.a_evals[slot..slot + d]);
                } else {
                    self.solve_drift_stage(prob, i, ts, yn, t.a0[i][i] * h)?;
                }
            }

            // H2 stages; structurally trivial ones reuse an H1
            // evaluation instead of new diffusion calls.
            if self.plan.need_b2[i] {
                if let Some(j) = self.plan.reuse_b2[i] {
                    let src = &self.b1_evals[j * m * d..(j + 1) * m * d];
                    self.b2_evals[i * m * d..(i + 1) * m * d].copy_from_slice(src);
                } else {
                    for k in 0..m {
                        self.stage.copy_from_slice(yn);
                        for j in 0..i {
                            let w = t.a2[i][j] * h;
                            if w != 0.0 {
                                for c in 0..d {
                                    self.stage[c] += w * self.a_evals[j * d + c];
                                }
                            }
                            if t.b2[i][j] != 0.0 {
                                for l in 0..m {
                                    if l == k {
                                        continue;
                                    }
                                    let w = t.b2[i][j] * inc.mixed(k, l) / sqrt_h;
                                    for c in 0..d {
                                        self.stage[c] += w * self.b1_evals[(j * m + l) * d + c];
                                    }
                                }
                            }
                        }
                        let ts = tn + t.c2[i] * h;
                        let slot = (i * m + k) * d;
                        prob.diffusion_col(k, ts, &self.stage, &mut self.b2_evals[slot..slot + d]);
                    }
                }
            }
        }

        // Output sum.
        out.copy_from_slice(yn);
        for i in 0..s {
            let w = t.alpha[i] * h;
            if w != 0.0 {
                for c in 0..d {
                    out[c] += w * self.a_evals[i * d + c];
                }
            }
            if t.beta1[i] != 0.0 || t.beta2[i] != 0.0 {
                for k in 0..m {
                    let w = t.beta1[i] * inc.ihat[k] + t.beta2[i] * inc.mixed(k, k) / sqrt_h;
                    if w != 0.0 {
                        for c in 0..d {
                            out[c] += w * self.b1_evals[(i * m + k) * d + c];
                        }
                    }
                }
            }
            if t.beta3[i] != 0.0 || t.beta4[i] != 0.0 {
                for k in 0..m {
                    let w = t.beta3[i] * inc.ihat[k] + t.beta4[i] * sqrt_h;
                    if w != 0.0 {
                        for c in 0..d {
                            out[c] += w * self.b2_evals[(i * m + k) * d + c];
                        }
                    }
                }
            }
        }
        if out.iter().any(|x| !x.is_finite()) {
            return Err(IntegratorError::NonFiniteState);
        }
        Ok(())
    }

    /// Solve the implicit stage `H = rhs + gamma a(ts, H)` by
    /// simplified Newton with the iteration matrix factored once.
    /// On success the converged drift value is stored in `a_evals`.
    fn solve_drift_stage(
        &mut self,
        prob: &SdeProblem,
        stage: usize,
        ts: f64,
        yn: &[f64],
        gamma: f64,
    ) -> Result<(), IntegratorError> {
        let d = self.dim;

        let use_analytic = self.cfg.jacobian_mode == JacobianMode::UserSupplied
            && prob.has_drift_jacobian();
        if use_analytic {
            prob.drift_jacobian(ts, yn, &mut self.jac);
        } else {
            // Forward differences with perturbation √ε (1 + |x_j|).
            prob.drift(ts, yn, &mut self.fd_base);
            let mut x = yn.to_vec();
            for j in 0..d {
                let delta = f64::EPSILON.sqrt() * (1.0 + x[j].abs());
                let keep = x[j];
                x[j] += delta;
                prob.drift(ts, &x, &mut self.fd_pert);
                x[j] = keep;
                for r in 0..d {
                    self.jac[r * d + j] = (self.fd_pert[r] - self.fd_base[r]) / delta;
                }
            }
        }
        for r in 0..d {
            for c in 0..d {
                let id = if r == c { 1.0 } else { 0.0 };
                self.iter_matrix[r * d + c] = id - gamma * self.jac[r * d + c];
            }
        }
        let lu = LuFactors::factor(&self.iter_matrix, d);
        if lu.is_singular(STAGE_COND_LIMIT) {
            return Err(IntegratorError::SingularStageSystem { stage });
        }

        let yn_norm = yn.iter().map(|x| x * x).sum::<f64>().sqrt();
        let bound = self.cfg.tolerance * (1.0 + yn_norm);
        self.newton_x.copy_from_slice(yn);
        let mut last_residual = f64::INFINITY;
        for iteration in 0..=self.cfg.max_iterations {
            prob.drift(ts, &self.newton_x, &mut self.newton_ax);
            let mut norm2 = 0.0;
            for c in 0..d {
                self.residual[c] = self.newton_x[c] - gamma * self.newton_ax[c] - self.rhs[c];
                norm2 += self.residual[c] * self.residual[c];
            }
            last_residual = norm2.sqrt();
            if !last_residual.is_finite() {
                return Err(IntegratorError::NonFiniteState);
            }
            if last_residual <= bound {
                let base = stage * d;
                self.a_evals[base..base + d].copy_from_slice(&self.newton_ax);
                return Ok(());
            }
            if iteration == self.cfg.max_iterations {
                break;
            }
            lu.solve(&mut self.residual);
            for c in 0..d {
                self.newton_x[c] -= self.residual[c];
            }
        }
        Err(IntegratorError::NewtonDivergence {
            stage,
            iterations: self.cfg.max_iterations,
            residual: last_residual,
        })
    }
}

/// One-shot step without a persistent workspace.
pub fn srk_step(
    tableau: &ExtendedButcherTableau,
    prob: &SdeProblem,
    tn: f64,
    yn: &[f64],
    h: f64,
    inc: &WienerIncrements,
    cfg: NewtonConfig,
) -> Result<Vec<f64>, IntegratorError> {
    let mut integrator = SrkIntegrator::new(tableau, prob.dim, prob.wiener_dim, cfg);
    let mut out = vec![0.0; prob.dim];
    integrator.step(prob, tn, yn, h, inc, &mut out)?;
    Ok(out)
}

/// Integrate one trajectory over the uniform grid `t_n = t0 + n h`,
/// `h = (T − t0)/n_steps`, drawing the step-`n` increments from the
/// stream address `(stream, n)`. Returns the terminal state.
pub fn integrate_path(
    tableau: &ExtendedButcherTableau,
    prob: &SdeProblem,
    n_steps: usize,
    stream: RngStream,
    mode: RandomVariableMode,
    cfg: NewtonConfig,
) -> Result<Vec<f64>, IntegratorError> {
    integrate_path_observed(tableau, prob, n_steps, stream, mode, cfg, |_, _, _| {})
}

/// [`integrate_path`] with a per-step observer called after every
/// accepted step as `observer(step_index, t_{n+1}, y_{n+1})`.
pub fn integrate_path_observed(
    tableau: &ExtendedButcherTableau,
    prob: &SdeProblem,
    n_steps: usize,
    stream: RngStream,
    mode: RandomVariableMode,
    cfg: NewtonConfig,
    mut observer: impl FnMut(usize, f64, &[f64]),
) -> Result<Vec<f64>, IntegratorError> {
    assert!(n_steps >= 1, "need at least one step");
    let h = (prob.t_end - prob.t0) / n_steps as f64;
    let mut integrator = SrkIntegrator::new(tableau, prob.dim, prob.wiener_dim, cfg);
    let mut y = prob.x0.clone();
    let mut next = vec![0.0; prob.dim];
    let mut inc = WienerIncrements::from_draws(
        h,
        vec![0.0; prob.wiener_dim],
        vec![0.0; prob.wiener_dim.saturating_sub(1)],
    )
    .expect("shape-only construction");
    for n in 0..n_steps {
        let tn = prob.t0 + n as f64 * h;
        inc.resample(h, mode, &stream.at_step(n as u64)).expect("h > 0");
        integrator.step(prob, tn, &y, h, &inc, &mut next)?;
        std::mem::swap(&mut y, &mut next);
        observer(n, prob.t0 + (n + 1) as f64 * h, &y);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{linear_test_problem, SdeProblem};
    use crate::randvars::build_increments;
    use crate::tableau::{named_scheme, NamedScheme};

    fn zero_problem(x0: f64) -> SdeProblem {
        SdeProblem::new(
            "zero",
            1,
            1,
            vec![x0],
            0.0,
            1.0,
            |_t, _x, out| out[0] = 0.0,
            |_j, _t, _x, out| out[0] = 0.0,
        )
    }

    #[test]
    fn euler_maruyama_linear_step_closed_form() {
        let t = named_scheme("EulerMaruyama", None, None).unwrap();
        let (lambda, mu, x0, h) = (-1.4, 0.6, 2.0, 0.25f64);
        let prob = linear_test_problem(lambda, mu, x0).unwrap();
        for w in [-(3.0 * h).sqrt(), 0.0, (3.0 * h).sqrt()] {
            let inc = WienerIncrements::from_draws(h, vec![w], vec![]).unwrap();
            let y =
                srk_step(&t, &prob, 0.0, &[x0], h, &inc, NewtonConfig::default()).unwrap();
            let expect = x0 * (1.0 + lambda * h) + mu * w * x0;
            assert!((y[0] - expect).abs() < 1e-14 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn zero_fields_leave_the_state_unchanged() {
        let prob = zero_problem(3.25);
        for scheme in NamedScheme::all() {
            let t = scheme.tableau();
            let inc = build_increments(
                0.5,
                1,
                RandomVariableMode::ThreePoint,
                &RngStream::new(4, 2).at_step(7),
            )
            .unwrap();
            let y = srk_step(&t, &prob, 0.0, &[3.25], 0.5, &inc, NewtonConfig::default())
                .unwrap();
            assert_eq!(y[0], 3.25, "{}", t.label);
        }
    }

    /// DDIRDI1 on the linear test equation: one step multiplies the
    /// state by (1+ĥ/2)/(1−ĥ/2) + k Î/√h.
    #[test]
    fn ddirdi1_linear_step_matches_stability_function() {
        let t = named_scheme("DDIRDI1", None, None).unwrap();
        let (lambda, mu, x0, h) = (-3.0, 0.9, 1.5, 0.125);
        let prob = linear_test_problem(lambda, mu, x0).unwrap();
        let hhat = lambda * h;
        let k = mu * h.sqrt();
        let gamma = (1.0 + 0.5 * hhat) / (1.0 - 0.5 * hhat);
        for w in [-(3.0 * h).sqrt(), 0.0, (3.0 * h).sqrt()] {
            let inc = WienerIncrements::from_draws(h, vec![w], vec![]).unwrap();
            let y =
                srk_step(&t, &prob, 0.0, &[x0], h, &inc, NewtonConfig::default()).unwrap();
            let r = gamma + k * (w / h.sqrt());
            assert!((y[0] - r * x0).abs() < 1e-13 * (r * x0).abs().max(1.0));
        }
    }

    /// Affine drift converges in a single Newton update.
    #[test]
    fn implicit_stage_is_exact_for_affine_drift() {
        let t = named_scheme("DDIRDI1", None, None).unwrap();
        let (lambda, h) = (-2.0, 0.5);
        let prob = linear_test_problem(lambda, 0.0, 1.0).unwrap();
        let cfg = NewtonConfig { max_iterations: 1, ..NewtonConfig::default() };
        let inc = WienerIncrements::from_draws(h, vec![0.0], vec![]).unwrap();
        let y = srk_step(&t, &prob, 0.0, &[1.0], h, &inc, cfg).unwrap();
        // Midpoint rule on x' = λx.
        let expect = (1.0 + 0.5 * lambda * h) / (1.0 - 0.5 * lambda * h);
        assert!((y[0] - expect).abs() < 1e-14);
    }

    #[test]
    fn singular_stage_system_is_reported() {
        let t = named_scheme("DDIRDI1", None, None).unwrap();
        // A0[0][0] h λ = 1 makes the stage matrix exactly singular.
        let (lambda, h) = (4.0, 0.5);
        let prob = linear_test_problem(lambda, 0.0, 1.0).unwrap();
        let inc = WienerIncrements::from_draws(h, vec![0.0], vec![]).unwrap();
        let err = srk_step(&t, &prob, 0.0, &[1.0], h, &inc, NewtonConfig::default())
            .unwrap_err();
        assert_eq!(err, IntegratorError::SingularStageSystem { stage: 0 });
    }

    #[test]
    fn newton_divergence_is_reported_for_too_few_iterations() {
        let t = named_scheme("DDIRDI1", None, None).unwrap();
        // Strongly nonlinear drift, one permitted iteration.
        let prob = SdeProblem::new(
            "cubic",
            1,
            1,
            vec![1.0],
            0.0,
            1.0,
            |_t, x, out| out[0] = x[0] * x[0] * x[0] - 4.0 * x[0],
            |_j, _t, _x, out| out[0] = 0.0,
        );
        let cfg = NewtonConfig { max_iterations: 1, tolerance: 1e-14, ..NewtonConfig::default() };
        let inc = WienerIncrements::from_draws(0.9, vec![0.0], vec![]).unwrap();
        let err = srk_step(&t, &prob, 0.0, &[1.0], 0.9, &inc, cfg).unwrap_err();
        assert!(matches!(err, IntegratorError::NewtonDivergence { stage: 0, .. }), "{err:?}");
    }

    #[test]
    fn zero_drift_implicit_stage_still_works() {
        // a ≡ 0 keeps A0[i][i] ≠ 0 formally explicitable; the Newton
        // path must converge immediately.
        let t = named_scheme("DDIRDI5", None, None).unwrap();
        let prob = zero_problem(2.0);
        let inc = build_increments(
            0.25,
            1,
            RandomVariableMode::ThreePoint,
            &RngStream::new(9, 0).at_step(0),
        )
        .unwrap();
        let y = srk_step(&t, &prob, 0.0, &[2.0], 0.25, &inc, NewtonConfig::default()).unwrap();
        assert_eq!(y[0], 2.0);
    }

    #[test]
    fn non_finite_states_are_caught() {
        let t = named_scheme("EulerMaruyama", None, None).unwrap();
        let prob = SdeProblem::new(
            "explode",
            1,
            1,
            vec![1e200],
            0.0,
            1.0,
            |_t, x, out| out[0] = x[0] * x[0],
            |_j, _t, _x, out| out[0] = 0.0,
        );
        let inc = WienerIncrements::from_draws(1.0, vec![0.0], vec![]).unwrap();
        let err = srk_step(&t, &prob, 0.0, &[1e200], 1.0, &inc, NewtonConfig::default())
            .unwrap_err();
        assert_eq!(err, IntegratorError::NonFiniteState);
    }

    #[test]
    fn increment_dimension_mismatch_is_rejected() {
        let t = named_scheme("EulerMaruyama", None, None).unwrap();
        let prob = zero_problem(1.0);
        let inc = build_increments(
            0.5,
            3,
            RandomVariableMode::ThreePoint,
            &RngStream::new(0, 0).at_step(0),
        )
        .unwrap();
        let err = srk_step(&t, &prob, 0.0, &[1.0], 0.5, &inc, NewtonConfig::default())
            .unwrap_err();
        assert_eq!(err, IntegratorError::IncrementMismatch { increments: 3, problem: 1 });
    }

    #[test]
    fn single_step_path_equals_srk_step() {
        let t = named_scheme("RI6", None, None).unwrap();
        let prob = linear_test_problem(-1.0, 0.5, 1.0).unwrap();
        let stream = RngStream::new(77, 3);
        let terminal = integrate_path(
            &t,
            &prob,
            1,
            stream,
            RandomVariableMode::ThreePoint,
            NewtonConfig::default(),
        )
        .unwrap();
        let h = prob.t_end - prob.t0;
        let inc = build_increments(h, 1, RandomVariableMode::ThreePoint, &stream.at_step(0))
            .unwrap();
        let single =
            srk_step(&t, &prob, prob.t0, &prob.x0, h, &inc, NewtonConfig::default()).unwrap();
        assert_eq!(terminal, single);
    }

    /// The step is linear in the state for linear test problems.
    #[test]
    fn superposition_on_the_linear_problem() {
        let prob = linear_test_problem(-2.0, 1.1, 1.0).unwrap();
        let h = 0.2;
        for scheme in NamedScheme::all() {
            let t = scheme.tableau();
            let inc = build_increments(
                h,
                1,
                RandomVariableMode::ThreePoint,
                &RngStream::new(15, 8).at_step(2),
            )
            .unwrap();
            let cfg = NewtonConfig::default();
            let ya = srk_step(&t, &prob, 0.0, &[1.25], h, &inc, cfg).unwrap();
            let yb = srk_step(&t, &prob, 0.0, &[-0.5], h, &inc, cfg).unwrap();
            let ysum = srk_step(&t, &prob, 0.0, &[0.75], h, &inc, cfg).unwrap();
            assert!(
                (ya[0] + yb[0] - ysum[0]).abs() < 1e-12 * (1.0 + ysum[0].abs()),
                "{}",
                t.label
            );
        }
    }

    #[test]
    fn evaluation_plan_counts_for_catalogued_schemes() {
        let em = named_scheme("EulerMaruyama", None, None).unwrap();
        let plan = EvaluationPlan::new(&em, 1);
        assert_eq!(plan.drift_evals(), 1);
        assert_eq!(plan.diffusion_evals(), 1);
        assert_eq!(plan.implicit_stages(&em), 0);

        let ri6 = named_scheme("RI6", None, None).unwrap();
        let plan = EvaluationPlan::new(&ri6, 1);
        assert_eq!(plan.drift_evals(), 2);
        // The three H1 stages; all H2 evaluations reuse b(t_n, Y_n).
        assert_eq!(plan.diffusion_evals(), 3);
        assert_eq!(plan.reuse_b2, vec![Some(0), Some(0), Some(0)]);

        let plan10 = EvaluationPlan::new(&ri6, 10);
        // 3 H1 stages × 10 noises + 2 non-trivial H2 stages × 10.
        assert_eq!(plan10.diffusion_evals(), 50);
        assert_eq!(plan10.reuse_b2, vec![Some(0), None, None]);

        let d5 = named_scheme("DDIRDI5", None, None).unwrap();
        let plan = EvaluationPlan::new(&d5, 1);
        assert_eq!(plan.drift_evals(), 2);
        assert_eq!(plan.implicit_stages(&d5), 2);
    }

    /// Finite-difference and analytic Jacobians give matching steps on
    /// a smooth nonlinear problem.
    #[test]
    fn jacobian_modes_agree() {
        let t = named_scheme("DDIRDI5", None, None).unwrap();
        let (prob, _f) = crate::problems::sinh_problem();
        let h = 0.25;
        let inc = build_increments(
            h,
            1,
            RandomVariableMode::ThreePoint,
            &RngStream::new(5, 5).at_step(1),
        )
        .unwrap();
        let user = srk_step(&t, &prob, 0.0, &[0.4], h, &inc, NewtonConfig::default()).unwrap();
        let fd_cfg = NewtonConfig {
            jacobian_mode: JacobianMode::FiniteDifference,
            ..NewtonConfig::default()
        };
        let fd = srk_step(&t, &prob, 0.0, &[0.4], h, &inc, fd_cfg).unwrap();
        // Same fixed point, different iteration matrices.
        assert!((user[0] - fd[0]).abs() < 1e-9);
    }
}
