//! SDE problem model and the built-in test problems with exact
//! reference moments.
//!
//! A problem bundles the drift `a(t,x)`, the diffusion columns
//! `b^j(t,x)`, dimensions, the (nonrandom) initial value, the horizon
//! and optional exact moments `E f(X_t)` keyed by functional id.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProblemError {
    #[error("the linear test problem requires a nonzero initial value")]
    ZeroInitialValue,
}

type VectorField = Box<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
type ColumnField = Box<dyn Fn(usize, f64, &[f64], &mut [f64]) + Send + Sync>;
type MomentFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar observable of the terminal state.
pub struct Functional {
    pub id: String,
    map: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl Functional {
    pub fn new(id: impl Into<String>, map: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { id: id.into(), map: Box::new(map) }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.map)(x)
    }
}

impl std::fmt::Debug for Functional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Functional").field("id", &self.id).finish()
    }
}

/// An Itô SDE `dX = a dt + Σ_j b^j dW^j` on a fixed horizon.
pub struct SdeProblem {
    /// State dimension d.
    pub dim: usize,
    /// Wiener dimension m.
    pub wiener_dim: usize,
    pub x0: Vec<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub label: String,
    drift: VectorField,
    diffusion: ColumnField,
    drift_jacobian: Option<VectorField>,
    exact_moments: HashMap<String, MomentFn>,
    clamp_counter: Option<Arc<AtomicU64>>,
}

impl std::fmt::Debug for SdeProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SdeProblem")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("wiener_dim", &self.wiener_dim)
            .field("t0", &self.t0)
            .field("t_end", &self.t_end)
            .finish()
    }
}

impl SdeProblem {
    /// Assemble a problem from callbacks. The horizon must be
    /// nondegenerate and dimensions at least one.
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        wiener_dim: usize,
        x0: Vec<f64>,
        t0: f64,
        t_end: f64,
        drift: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(usize, f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        assert!(dim >= 1 && wiener_dim >= 1, "dimensions must be at least 1");
        assert!(t0 < t_end, "horizon must satisfy t0 < T");
        assert_eq!(x0.len(), dim);
        Self {
            dim,
            wiener_dim,
            x0,
            t0,
            t_end,
            label: label.into(),
            drift: Box::new(drift),
            diffusion: Box::new(diffusion),
            drift_jacobian: None,
            exact_moments: HashMap::new(),
            clamp_counter: None,
        }
    }

    pub fn with_drift_jacobian(
        mut self,
        jac: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.drift_jacobian = Some(Box::new(jac));
        self
    }

    pub fn with_exact_moment(
        mut self,
        functional_id: impl Into<String>,
        moment: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.exact_moments.insert(functional_id.into(), Box::new(moment));
        self
    }

    pub fn with_horizon(mut self, t0: f64, t_end: f64) -> Self {
        assert!(t0 < t_end, "horizon must satisfy t0 < T");
        self.t0 = t0;
        self.t_end = t_end;
        self
    }

    #[inline]
    pub fn drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.drift)(t, x, out);
    }

    /// The j-th diffusion column b^j (0-based), written into `out`.
    #[inline]
    pub fn diffusion_col(&self, j: usize, t: f64, x: &[f64], out: &mut [f64]) {
        (self.diffusion)(j, t, x, out);
    }

    /// Analytic drift Jacobian ∂a/∂x (row-major d×d) when supplied.
    pub fn drift_jacobian(&self, t: f64, x: &[f64], out: &mut [f64]) -> bool {
        match &self.drift_jacobian {
            Some(jac) => {
                jac(t, x, out);
                true
            }
            None => false,
        }
    }

    pub fn has_drift_jacobian(&self) -> bool {
        self.drift_jacobian.is_some()
    }

    /// `E f(X_t)` for a catalogued functional id, when known in closed
    /// form.
    pub fn exact_moment(&self, functional_id: &str, t: f64) -> Option<f64> {
        self.exact_moments.get(functional_id).map(|m| m(t))
    }

    /// Total diffusion-domain clamp events since the last reset
    /// (problems without a guard always report zero).
    pub fn clamp_events(&self) -> u64 {
        self.clamp_counter.as_ref().map_or(0, |c| c.load(Ordering::Relaxed))
    }

    pub fn reset_clamp_events(&self) {
        if let Some(c) = &self.clamp_counter {
            c.store(0, Ordering::Relaxed);
        }
    }
}

/// The linear test equation `dX = λX dt + μX dW` with nonrandom
/// `x0 ≠ 0` on the default horizon [0, 1].
///
/// Exact moments are attached for the identity (`x`) and second-moment
/// (`x2`) functionals: `E X_t = x0 e^{λ(t-t0)}` and
/// `E X_t² = x0² e^{(2λ+μ²)(t-t0)}`.
pub fn linear_test_problem(lambda: f64, mu: f64, x0: f64) -> Result<SdeProblem, ProblemError> {
    if x0 == 0.0 || !x0.is_finite() {
        return Err(ProblemError::ZeroInitialValue);
    }
    let t0 = 0.0;
    let problem = SdeProblem::new(
        format!("linear(lambda={lambda}, mu={mu})"),
        1,
        1,
        vec![x0],
        t0,
        1.0,
        move |_t, x, out| out[0] = lambda * x[0],
        move |_j, _t, x, out| out[0] = mu * x[0],
    )
    .with_drift_jacobian(move |_t, _x, out| out[0] = lambda)
    .with_exact_moment("x", move |t| x0 * (lambda * (t - t0)).exp())
    .with_exact_moment("x2", move |t| x0 * x0 * ((2.0 * lambda + mu * mu) * (t - t0)).exp());
    Ok(problem)
}

/// Identity and second-moment functionals for scalar problems.
pub fn identity_functional() -> Functional {
    Functional::new("x", |x| x[0])
}

pub fn second_moment_functional() -> Functional {
    Functional::new("x2", |x| x[0] * x[0])
}

/// The scalar SDE `dX = (X/2 + √(X²+1)) dt + √(X²+1) dW`, `X_0 = 0`,
/// on [0, 2], whose solution is `sinh(t + W_t)`.
///
/// The paired functional is `f(x) = p(arsinh x)` with
/// `p(z) = z³ − 6z² + 8z`, giving `E f(X_t) = t³ − 3t² + 2t`.
pub fn sinh_problem() -> (SdeProblem, Functional) {
    let problem = SdeProblem::new(
        "sinh",
        1,
        1,
        vec![0.0],
        0.0,
        2.0,
        |_t, x, out| out[0] = 0.5 * x[0] + (x[0] * x[0] + 1.0).sqrt(),
        |_j, _t, x, out| out[0] = (x[0] * x[0] + 1.0).sqrt(),
    )
    .with_drift_jacobian(|_t, x, out| out[0] = 0.5 + x[0] / (x[0] * x[0] + 1.0).sqrt())
    .with_exact_moment("f", |t| t * t * t - 3.0 * t * t + 2.0 * t);
    let functional = Functional::new("f", |x| {
        let z = x[0].asinh();
        z * z * z - 6.0 * z * z + 8.0 * z
    });
    (problem, functional)
}

/// Diffusion coefficients and shifts of the ten-noise problem, column
/// by column: b^j(x) = coef_j √(x + shift_j).
pub const WIENER10_COLUMNS: [(f64, f64); 10] = [
    (1.0 / 10.0, 1.0 / 2.0),
    (1.0 / 15.0, 1.0 / 4.0),
    (1.0 / 20.0, 1.0 / 5.0),
    (1.0 / 25.0, 1.0 / 10.0),
    (1.0 / 40.0, 1.0 / 20.0),
    (1.0 / 25.0, 1.0 / 2.0),
    (1.0 / 20.0, 1.0 / 4.0),
    (1.0 / 15.0, 1.0 / 5.0),
    (1.0 / 20.0, 1.0 / 10.0),
    (1.0 / 25.0, 1.0 / 20.0),
];

/// The scalar SDE with ten driving Wiener processes,
/// `dX = X dt + Σ_j coef_j √(X + shift_j) dW^j`, `X_0 = 1`, on [0, 1],
/// paired with the second-moment functional and its closed-form
/// reference `E X_t² = −q + (q+1) e^{(731453/360000) t}`,
/// q = 68013/14629060.
///
/// Radicands are clamped at zero if a trajectory exits the domain; the
/// clamp counter records how often the guard fires.
pub fn wiener10_problem() -> (SdeProblem, Functional) {
    let counter = Arc::new(AtomicU64::new(0));
    let diff_counter = Arc::clone(&counter);
    let q = 68013.0 / 14629060.0;
    let rate = 731453.0 / 360000.0;
    let mut problem = SdeProblem::new(
        "wiener10",
        1,
        10,
        vec![1.0],
        0.0,
        1.0,
        |_t, x, out| out[0] = x[0],
        move |j, _t, x, out| {
            let (coef, shift) = WIENER10_COLUMNS[j];
            let radicand = x[0] + shift;
            if radicand < 0.0 {
                diff_counter.fetch_add(1, Ordering::Relaxed);
                out[0] = 0.0;
            } else {
                out[0] = coef * radicand.sqrt();
            }
        },
    )
    .with_drift_jacobian(|_t, _x, out| out[0] = 1.0)
    .with_exact_moment("x2", move |t| -q + (q + 1.0) * (rate * t).exp());
    problem.clamp_counter = Some(counter);
    (problem, second_moment_functional())
}
