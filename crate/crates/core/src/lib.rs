//! Weak-approximation stochastic Runge-Kutta (SRK) methods for Itô SDEs
//! with m-dimensional Wiener noise, together with the machinery needed to
//! study them: diagonally drift-implicit coefficient families, discrete
//! per-step random variables, Monte Carlo moment estimation with
//! reproducible parallel streams, and closed-form asymptotic / mean-square
//! stability analysis of the linear multiplicative-noise test equation.
//!
//! The crate is organised around a small set of modules:
//!
//! - [`tableau`] — extended Butcher arrays and the catalogued DDISRK
//!   coefficient families of weak order one and two.
//! - [`randvars`] — the three-point / two-point increment variables and
//!   the mixed-area matrix, driven by counter-based reproducible streams.
//! - [`integrator`] — one SRK step (with simplified-Newton drift stages)
//!   and whole-trajectory integration.
//! - [`problems`] — the SDE problem model plus built-in test problems
//!   with exact reference moments.
//! - [`montecarlo`] — functional estimation over many trajectories,
//!   weak-order regression, and per-step effort accounting.
//! - [`stability`] — Γ/Σ/Λ stability functions, asymptotic and MS
//!   indicators, and exact stability domains of the test equation.
//! - [`raster`] — classified stability-region grids over the real
//!   (ĥ, k²) plane with CSV and PGM emission.

pub mod integrator;
pub mod linalg;
pub mod montecarlo;
pub mod problems;
pub mod randvars;
pub mod raster;
pub mod stability;
pub mod tableau;
mod util;

pub use util::csv_float;

pub use integrator::{integrate_path, srk_step, IntegratorError, NewtonConfig, SrkIntegrator};
pub use montecarlo::{
    estimate_functional, weak_order_study, ConvergenceStudy, EffortReport, EstimateResult,
    McError,
};
pub use problems::{
    linear_test_problem, sinh_problem, wiener10_problem, Functional, ProblemError, SdeProblem,
};
pub use randvars::{
    build_increments, RandVarError, RandomVariableMode, RngStream, StepRng, WienerIncrements,
};
pub use raster::{rasterize, CellClass, RegionRaster};
pub use stability::{
    as_stable, coefficients_order1, coefficients_order2, exact_regions, ms_stable,
    stability_check, AsStability, ExactRegionFlags, MsStability, StabilityCoefficients,
    StabilityError, StabilityPoint, StabilityReport,
};
pub use tableau::{
    build_order1_tableau, build_order2_tableau, named_scheme, validate_tableau,
    ExtendedButcherTableau, FamilyParams, NamedScheme, Order1FamilyParams, Order2FamilyParams,
    TableauError, ValidationReport,
};
