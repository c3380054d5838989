//! Per-step discrete random variables for the weak SRK step.
//!
//! Each step of an `m`-noise method consumes exactly `2m-1` independent
//! draws: `m` increment variables Î and `m-1` auxiliary variables Ĩ.
//! The mixed areas Î_(k,l) are assembled from those draws and never
//! sampled directly.
//!
//! Draws come from a counter-based generator addressed by
//! `(seed, trajectory, step, variable)`, so any draw can be produced
//! independently of all others. Parallel Monte Carlo therefore yields
//! bit-identical results for any thread schedule.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RandVarError {
    #[error("step size must be positive")]
    NonpositiveStepSize,
    #[error("Wiener dimension must be at least 1")]
    ZeroDimension,
}

/// Distribution used for the increment variables Î.
///
/// Three-point is the standard weak-order-two choice
/// (±√(3h) w.p. 1/6, 0 w.p. 2/3); two-point (±√h w.p. 1/2) is the
/// substitution admissible for weak order one schemes. The auxiliary
/// variables Ĩ are two-point in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomVariableMode {
    ThreePoint,
    TwoPoint,
}

impl std::fmt::Display for RandomVariableMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RandomVariableMode::ThreePoint => write!(f, "3pt"),
            RandomVariableMode::TwoPoint => write!(f, "2pt"),
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer; a bijective avalanche mix on 64 bits.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream address for one trajectory of one experiment.
///
/// The generator is pure: the draw for a given
/// `(seed, trajectory, step, variable)` tuple is a fixed function of the
/// tuple, so identical addresses give identical draws on every thread
/// schedule and thread count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub trajectory: u64,
}

impl RngStream {
    pub fn new(seed: u64, trajectory: u64) -> Self {
        Self { seed, trajectory }
    }

    /// The per-step generator for step index `step`.
    pub fn at_step(&self, step: u64) -> StepRng {
        let mut z = mix64(self.seed ^ 0x8E9D_5A8F_6A09_E667);
        z = mix64(z ^ self.trajectory);
        z = mix64(z ^ step);
        StepRng { base: z }
    }
}

/// Counter-based generator for the draws of a single step.
///
/// Variable `v` maps to the `v`-th output of a splitmix64 sequence
/// seeded from the hashed `(seed, trajectory, step)` address.
#[derive(Debug, Clone, Copy)]
pub struct StepRng {
    base: u64,
}

impl StepRng {
    #[inline]
    pub fn draw_u64(&self, variable: u64) -> u64 {
        mix64(self.base.wrapping_add(variable.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// Uniform draw in [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&self, variable: u64) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.draw_u64(variable) >> 11) as f64 * SCALE
    }
}

/// One step's random variables: the Î and Ĩ draws plus the assembled
/// mixed-area matrix Î_(k,l) (row-major m×m).
#[derive(Debug, Clone, PartialEq)]
pub struct WienerIncrements {
    pub h: f64,
    pub ihat: Vec<f64>,
    pub itilde: Vec<f64>,
    pub ihat_kl: Vec<f64>,
}

impl WienerIncrements {
    pub fn wiener_dim(&self) -> usize {
        self.ihat.len()
    }

    #[inline]
    pub fn mixed(&self, k: usize, l: usize) -> f64 {
        self.ihat_kl[k * self.ihat.len() + l]
    }

    /// Assemble the mixed areas from given draws:
    /// Î_(k,l) = ½(Î_k Î_l − √h Ĩ_k) for k < l,
    ///           ½(Î_k Î_l + √h Ĩ_l) for l < k,
    ///           ½(Î_k² − h)          for k = l.
    ///
    /// `ihat` must have length m ≥ 1 and `itilde` length m − 1; the
    /// draws are taken as-is (tests use this to enumerate the support).
    pub fn from_draws(h: f64, ihat: Vec<f64>, itilde: Vec<f64>) -> Result<Self, RandVarError> {
        if !(h > 0.0) {
            return Err(RandVarError::NonpositiveStepSize);
        }
        let m = ihat.len();
        if m == 0 {
            return Err(RandVarError::ZeroDimension);
        }
        debug_assert_eq!(itilde.len(), m - 1);
        let mut inc = Self { h, ihat, itilde, ihat_kl: vec![0.0; m * m] };
        inc.fill_mixed();
        Ok(inc)
    }

    fn fill_mixed(&mut self) {
        let m = self.ihat.len();
        let sqrt_h = self.h.sqrt();
        for k in 0..m {
            for l in 0..m {
                self.ihat_kl[k * m + l] = if k < l {
                    0.5 * (self.ihat[k] * self.ihat[l] - sqrt_h * self.itilde[k])
                } else if l < k {
                    0.5 * (self.ihat[k] * self.ihat[l] + sqrt_h * self.itilde[l])
                } else {
                    0.5 * (self.ihat[k] * self.ihat[k] - self.h)
                };
            }
        }
    }
}

/// Map one uniform draw to the increment distribution.
///
/// Three-point: u < 1/6 ↦ −√(3h), u ∈ [1/6, 5/6) ↦ 0, u ≥ 5/6 ↦ +√(3h).
/// Two-point:   u < 1/2 ↦ −√h, else +√h.
pub fn sample_ihat(
    h: f64,
    mode: RandomVariableMode,
    rng: &StepRng,
    variable: u64,
) -> Result<f64, RandVarError> {
    if !(h > 0.0) {
        return Err(RandVarError::NonpositiveStepSize);
    }
    let u = rng.uniform(variable);
    Ok(match mode {
        RandomVariableMode::ThreePoint => {
            let v = (3.0 * h).sqrt();
            if u < 1.0 / 6.0 {
                -v
            } else if u < 5.0 / 6.0 {
                0.0
            } else {
                v
            }
        }
        RandomVariableMode::TwoPoint => {
            if u < 0.5 {
                -h.sqrt()
            } else {
                h.sqrt()
            }
        }
    })
}

fn sample_itilde(h: f64, rng: &StepRng, variable: u64) -> f64 {
    if rng.uniform(variable) < 0.5 {
        -h.sqrt()
    } else {
        h.sqrt()
    }
}

/// Draw the `2m-1` step variables and assemble the mixed areas.
///
/// Variables 0..m-1 address the Î draws, m..2m-2 the Ĩ draws.
pub fn build_increments(
    h: f64,
    wiener_dim: usize,
    mode: RandomVariableMode,
    rng: &StepRng,
) -> Result<WienerIncrements, RandVarError> {
    if !(h > 0.0) {
        return Err(RandVarError::NonpositiveStepSize);
    }
    if wiener_dim == 0 {
        return Err(RandVarError::ZeroDimension);
    }
    let m = wiener_dim;
    let mut inc = WienerIncrements {
        h,
        ihat: vec![0.0; m],
        itilde: vec![0.0; m - 1],
        ihat_kl: vec![0.0; m * m],
    };
    inc.resample(h, mode, rng)?;
    Ok(inc)
}

impl WienerIncrements {
    /// Redraw all variables in place for a new step, keeping the
    /// allocation. Equivalent to [`build_increments`] with the same
    /// dimension.
    pub fn resample(
        &mut self,
        h: f64,
        mode: RandomVariableMode,
        rng: &StepRng,
    ) -> Result<(), RandVarError> {
        if !(h > 0.0) {
            return Err(RandVarError::NonpositiveStepSize);
        }
        let m = self.ihat.len();
        self.h = h;
        for k in 0..m {
            self.ihat[k] = sample_ihat(h, mode, rng, k as u64)?;
        }
        for k in 0..m - 1 {
            self.itilde[k] = sample_itilde(h, rng, (m + k) as u64);
        }
        self.fill_mixed();
        Ok(())
    }
}
