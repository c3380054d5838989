//! Closed-form stability analysis on the linear multiplicative-noise
//! test equation `dX = λX dt + μX dW`.
//!
//! With the parametrization `ĥ = λh`, `k = μ√h` a scheme's one-step map
//! is `Y_{n+1} = R_n(ĥ,k) Y_n`. For the order-one family
//! `R_n = Γ + h^{-1/2} Σ Î` and for the order-two family
//! `R_n = Γ − Λ + h^{-1/2} Σ Î + h^{-1} Λ Î²`, so the point evaluation
//! is fully described by the coefficient triple (Γ, Σ, Λ).
//!
//! Asymptotic stability (|Y_n| → 0 a.s.) holds iff `E log|R_n| < 0`;
//! mean-square stability (E|Y_n|² → 0) iff `R̂ = E|R_n|² < 1`. Both are
//! evaluated through the closed-form indicators; the brute-force
//! expectations over the discrete support live in the test suites as
//! independent oracles.

use num_complex::Complex64;
use thiserror::Error;

use crate::randvars::RandomVariableMode;
use crate::tableau::{FamilyParams, Order1FamilyParams};

/// Relative denominator magnitude below which a point counts as sitting
/// on a pole of Γ or Σ.
pub const POLE_TOL: f64 = 1e-12;

/// Indicator distance to 1 inside which a point is treated as exactly
/// on the stability boundary (strict inequalities cannot resolve it).
pub const BOUNDARY_BAND: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("stability function has a pole at the requested point (1 - c h-hat = 0)")]
    PoleAtPoint,
    #[error("two-point mode is defined for order-one schemes only (Lambda must vanish)")]
    TwoPointModeUnsupported,
    #[error("invalid raster range: {0}")]
    InvalidRange(String),
}

/// A point of the stability plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityPoint {
    /// ĥ = λh
    pub hhat: Complex64,
    /// k = μ√h
    pub k: Complex64,
}

impl StabilityPoint {
    pub fn new(hhat: Complex64, k: Complex64) -> Self {
        Self { hhat, k }
    }

    pub fn real(hhat: f64, k: f64) -> Self {
        Self { hhat: Complex64::new(hhat, 0.0), k: Complex64::new(k, 0.0) }
    }

    /// Map test-equation parameters and a step size to the plane.
    pub fn from_parameters(lambda: Complex64, mu: Complex64, h: f64) -> Self {
        Self { hhat: lambda * h, k: mu * h.sqrt() }
    }
}

/// Values of the one-step stability function at a point; `lambda_coef`
/// is zero for every order-one scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCoefficients {
    pub gamma: Complex64,
    pub sigma: Complex64,
    pub lambda_coef: Complex64,
}

impl StabilityCoefficients {
    pub fn order1(gamma: Complex64, sigma: Complex64) -> Self {
        Self { gamma, sigma, lambda_coef: Complex64::new(0.0, 0.0) }
    }

    /// The one-step amplification for a normalized increment outcome
    /// `z = Î/√h`: `R = Γ − Λ + Σ z + Λ z²`.
    pub fn amplification(&self, z: f64) -> Complex64 {
        self.gamma - self.lambda_coef + self.sigma * z + self.lambda_coef * (z * z)
    }
}

fn check_pole(denom: Complex64, scale: f64) -> Result<(), StabilityError> {
    if denom.norm() <= POLE_TOL * scale.max(1.0) {
        return Err(StabilityError::PoleAtPoint);
    }
    Ok(())
}

/// Γ and Σ of the order-one family:
///
/// Γ = 1 + (ĥ − c₃ĥ² + c₅(c₂+c₃−c₁)ĥ²) / ((1−c₁ĥ)(1−c₃ĥ)),
/// Σ = c₄c₅ĥ/(1−c₃ĥ) · k + k.
pub fn coefficients_order1(
    p: &Order1FamilyParams,
    pt: StabilityPoint,
) -> Result<StabilityCoefficients, StabilityError> {
    let hh = pt.hhat;
    let one = Complex64::new(1.0, 0.0);
    let d1 = one - p.c1 * hh;
    let d3 = one - p.c3 * hh;
    check_pole(d1, (p.c1 * hh).norm())?;
    check_pole(d3, (p.c3 * hh).norm())?;
    let numer = hh - p.c3 * hh * hh + p.c5 * (p.c2 + p.c3 - p.c1) * hh * hh;
    let gamma = one + numer / (d1 * d3);
    let sigma = (p.c4 * p.c5) * hh / d3 * pt.k + pt.k;
    Ok(StabilityCoefficients::order1(gamma, sigma))
}

/// Γ, Σ and Λ of the order-two family (only c₁ and c₂ enter):
///
/// Γ = 1 + (ĥ + (½−c₁−c₂)ĥ²) / ((1−c₁ĥ)(1−c₂ĥ)),
/// Σ = (ĥ − ½(c₁+c₂)ĥ²) / ((1−c₁ĥ)(1−c₂ĥ)) · k + k,
/// Λ = ½k².
pub fn coefficients_order2(
    c1: f64,
    c2: f64,
    pt: StabilityPoint,
) -> Result<StabilityCoefficients, StabilityError> {
    let hh = pt.hhat;
    let one = Complex64::new(1.0, 0.0);
    let d1 = one - c1 * hh;
    let d2 = one - c2 * hh;
    check_pole(d1, (c1 * hh).norm())?;
    check_pole(d2, (c2 * hh).norm())?;
    let denom = d1 * d2;
    let gamma = one + (hh + (0.5 - c1 - c2) * hh * hh) / denom;
    let sigma = (hh - 0.5 * (c1 + c2) * hh * hh) / denom * pt.k + pt.k;
    let lambda_coef = 0.5 * pt.k * pt.k;
    Ok(StabilityCoefficients { gamma, sigma, lambda_coef })
}

/// Evaluate the stability coefficients of any family member.
pub fn coefficients(
    family: &FamilyParams,
    pt: StabilityPoint,
) -> Result<StabilityCoefficients, StabilityError> {
    match family {
        FamilyParams::Order1(p) => coefficients_order1(p, pt),
        FamilyParams::Order2(p) => coefficients_order2(p.c1, p.c2, pt),
    }
}

/// ĥ poles of Γ/Σ for a family (real axis locations `1/c`).
pub fn pole_locations(family: &FamilyParams) -> Vec<f64> {
    let cs = match family {
        FamilyParams::Order1(p) => vec![p.c1, p.c3],
        FamilyParams::Order2(p) => vec![p.c1, p.c2],
    };
    let mut poles: Vec<f64> = cs.into_iter().filter(|&c| c != 0.0).map(|c| 1.0 / c).collect();
    poles.dedup();
    poles
}

/// Asymptotic-stability verdict at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsStability {
    pub stable: bool,
    /// Left-hand side of the printed strict inequality; stable iff < 1.
    pub indicator: f64,
    /// E log|R| over the discrete support; −∞ when an outcome absorbs
    /// at zero (which implies stability).
    pub mean_log_gain: f64,
}

/// Mean-square-stability verdict at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsStability {
    pub stable: bool,
    /// R̂ = |Γ|² + |Σ|² + 2|Λ|²; stable iff < 1.
    pub r_hat: f64,
}

/// Numerical asymptotic stability via the closed-form indicators:
///
/// three-point: |(Γ+2Λ)² − 3Σ²| |Γ−Λ|⁴ < 1 (Λ = 0 recovers the
/// order-one condition |Γ² − 3Σ²||Γ|⁴ < 1);
/// two-point (order one only): |Γ² − Σ²| < 1.
///
/// Boundary points (indicator exactly 1) are not stable: the printed
/// inequalities are strict.
pub fn as_stable(
    coef: &StabilityCoefficients,
    mode: RandomVariableMode,
) -> Result<AsStability, StabilityError> {
    match mode {
        RandomVariableMode::ThreePoint => {
            let g2l = coef.gamma + 2.0 * coef.lambda_coef;
            let indicator = (g2l * g2l - 3.0 * coef.sigma * coef.sigma).norm()
                * (coef.gamma - coef.lambda_coef).norm().powi(4);
            let sqrt3 = 3f64.sqrt();
            let mean_log_gain = (1.0 / 6.0) * coef.amplification(sqrt3).norm().ln()
                + (2.0 / 3.0) * coef.amplification(0.0).norm().ln()
                + (1.0 / 6.0) * coef.amplification(-sqrt3).norm().ln();
            Ok(AsStability { stable: indicator < 1.0, indicator, mean_log_gain })
        }
        RandomVariableMode::TwoPoint => {
            if coef.lambda_coef.norm() != 0.0 {
                return Err(StabilityError::TwoPointModeUnsupported);
            }
            let indicator =
                (coef.gamma * coef.gamma - coef.sigma * coef.sigma).norm();
            let mean_log_gain = 0.5 * coef.amplification(1.0).norm().ln()
                + 0.5 * coef.amplification(-1.0).norm().ln();
            Ok(AsStability { stable: indicator < 1.0, indicator, mean_log_gain })
        }
    }
}

/// Numerical MS-stability: R̂ = |Γ|² + |Σ|² + 2|Λ|² < 1.
///
/// The mean-square gain is identical for the three-point variables and
/// the order-one two-point substitution, so no mode enters.
pub fn ms_stable(coef: &StabilityCoefficients) -> MsStability {
    let r_hat = coef.gamma.norm_sqr() + coef.sigma.norm_sqr() + 2.0 * coef.lambda_coef.norm_sqr();
    MsStability { stable: r_hat < 1.0, r_hat }
}

/// Exact stability of the test equation itself at (λ, μ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactRegionFlags {
    /// Stochastically asymptotically stable in the large:
    /// Re(λ − ½μ²) < 0.
    pub asymptotic: bool,
    /// p-th mean stable: 2Re λ − Re μ² + p(Re μ)² < 0.
    pub pth_mean: bool,
    /// Asymptotically MS-stable: 2Re λ + |μ|² < 0.
    pub mean_square: bool,
}

/// Evaluate the exact stability domains of the test equation.
pub fn exact_regions(lambda: Complex64, mu: Complex64, p: f64) -> ExactRegionFlags {
    assert!(p > 0.0, "moment order must be positive");
    let asymptotic = (lambda - 0.5 * mu * mu).re < 0.0;
    let pth_mean = 2.0 * lambda.re - (mu * mu).re + p * mu.re * mu.re < 0.0;
    let mean_square = 2.0 * lambda.re + mu.norm_sqr() < 0.0;
    ExactRegionFlags { asymptotic, pth_mean, mean_square }
}

/// Exact regions restricted to the real (ĥ, k²) plane: asymptotic iff
/// k² > 2ĥ, mean-square iff k² < −2ĥ.
pub fn exact_region_real(hhat: f64, k2: f64) -> (bool, bool) {
    (k2 > 2.0 * hhat, k2 < -2.0 * hhat)
}

/// Full indicator report for a scheme at concrete (λ, μ, h).
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub point: StabilityPoint,
    pub coefficients: StabilityCoefficients,
    pub as_three_point: AsStability,
    /// Defined for order-one schemes only.
    pub as_two_point: Option<AsStability>,
    pub ms: MsStability,
    pub exact: ExactRegionFlags,
}

/// Map (λ, μ, h) to the stability plane and evaluate every indicator
/// defined for the scheme's family.
pub fn stability_check(
    family: &FamilyParams,
    lambda: f64,
    mu: f64,
    h: f64,
) -> Result<StabilityReport, StabilityError> {
    let lambda_c = Complex64::new(lambda, 0.0);
    let mu_c = Complex64::new(mu, 0.0);
    let point = StabilityPoint::from_parameters(lambda_c, mu_c, h);
    let coefficients = self::coefficients(family, point)?;
    let as_three_point = as_stable(&coefficients, RandomVariableMode::ThreePoint)?;
    let as_two_point = match family {
        FamilyParams::Order1(_) => Some(as_stable(&coefficients, RandomVariableMode::TwoPoint)?),
        FamilyParams::Order2(_) => None,
    };
    let ms = ms_stable(&coefficients);
    let exact = exact_regions(lambda_c, mu_c, 2.0);
    Ok(StabilityReport { point, coefficients, as_three_point, as_two_point, ms, exact })
}
