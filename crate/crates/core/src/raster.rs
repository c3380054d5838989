//! Stability-region rasters over the real (ĥ, k²) plane.
//!
//! Each cell center is classified by the numerical indicators of the
//! chosen scheme (asymptotic and mean-square) and by the exact test
//! equation regions (asymptotic iff k² > 2ĥ, mean-square iff
//! k² < −2ĥ). Cell centers within 1e-9 of a real pole of Γ/Σ are
//! flagged and left unclassified.
//!
//! Emission formats:
//! - CSV rows `hhat,k2,numAS,numMS,exactAS,exactMS,pole` (flags 0/1),
//!   cells in k²-ascending row order with ĥ ascending within a row;
//! - portable graymap (P5 binary or P2 ASCII), top row = largest k²,
//!   with the five-level shade encoding
//!   0 = numerically MS-stable, 64 = numerically AS-stable only,
//!   128 = exact MS region only, 192 = exact AS region only,
//!   255 = unstable everywhere (pole cells also render 255).

use rayon::prelude::*;

use crate::randvars::RandomVariableMode;
use crate::stability::{
    as_stable, coefficients, exact_region_real, ms_stable, pole_locations, StabilityError,
    StabilityPoint,
};
use crate::tableau::FamilyParams;
use crate::util::csv_float;

/// Distance in ĥ from a pole below which a cell is flagged instead of
/// classified.
pub const POLE_BAND: f64 = 1e-9;

/// Classification flags of one raster cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CellClass {
    pub num_as: bool,
    pub num_ms: bool,
    pub exact_as: bool,
    pub exact_ms: bool,
    pub pole: bool,
}

/// A classified grid over the real (ĥ, k²) plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRaster {
    pub hhat_range: (f64, f64),
    pub k2_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `iy * nx + ix`, with `iy` indexing k² ascending.
    pub cells: Vec<CellClass>,
    /// Cells where the numerical MS region escapes the numerical AS
    /// region. Reported, not asserted: the containment is a
    /// figure-level observation, not a theorem.
    pub inclusion_violations: usize,
    pub pole_cells: usize,
}

impl RegionRaster {
    pub fn cell(&self, ix: usize, iy: usize) -> CellClass {
        self.cells[iy * self.nx + ix]
    }

    /// Center coordinates of cell `(ix, iy)`.
    pub fn center(&self, ix: usize, iy: usize) -> (f64, f64) {
        let dx = (self.hhat_range.1 - self.hhat_range.0) / self.nx as f64;
        let dy = (self.k2_range.1 - self.k2_range.0) / self.ny as f64;
        (
            self.hhat_range.0 + (ix as f64 + 0.5) * dx,
            self.k2_range.0 + (iy as f64 + 0.5) * dy,
        )
    }
}

/// Rasterize the stability regions of a scheme family over a window of
/// the real (ĥ, k²) plane. `k2_range` must lie in [0, ∞) and the
/// resolution must be at least 2×2.
pub fn rasterize(
    family: &FamilyParams,
    mode: RandomVariableMode,
    hhat_range: (f64, f64),
    k2_range: (f64, f64),
    nx: usize,
    ny: usize,
) -> Result<RegionRaster, StabilityError> {
    if !(hhat_range.0 < hhat_range.1) || !(k2_range.0 < k2_range.1) {
        return Err(StabilityError::InvalidRange(format!(
            "window [{}, {}] x [{}, {}] is empty",
            hhat_range.0, hhat_range.1, k2_range.0, k2_range.1
        )));
    }
    if k2_range.0 < 0.0 {
        return Err(StabilityError::InvalidRange(format!(
            "k^2 range must lie in [0, inf), got min {}",
            k2_range.0
        )));
    }
    if nx < 2 || ny < 2 {
        return Err(StabilityError::InvalidRange(format!(
            "resolution must be at least 2x2, got {nx}x{ny}"
        )));
    }
    if mode == RandomVariableMode::TwoPoint && matches!(family, FamilyParams::Order2(_)) {
        return Err(StabilityError::TwoPointModeUnsupported);
    }

    let poles = pole_locations(family);
    let dx = (hhat_range.1 - hhat_range.0) / nx as f64;
    let dy = (k2_range.1 - k2_range.0) / ny as f64;

    let rows: Vec<Vec<CellClass>> = (0..ny)
        .into_par_iter()
        .map(|iy| {
            let k2 = k2_range.0 + (iy as f64 + 0.5) * dy;
            let k = k2.sqrt();
            (0..nx)
                .map(|ix| {
                    let hhat = hhat_range.0 + (ix as f64 + 0.5) * dx;
                    let (exact_as, exact_ms) = exact_region_real(hhat, k2);
                    // MS-stability of the test equation implies
                    // asymptotic stability; the reduction preserves it.
                    debug_assert!(!exact_ms || exact_as);
                    if poles.iter().any(|p| (hhat - p).abs() < POLE_BAND) {
                        return CellClass { exact_as, exact_ms, pole: true, ..CellClass::default() };
                    }
                    match coefficients(family, StabilityPoint::real(hhat, k)) {
                        Ok(coef) => {
                            let num_as =
                                as_stable(&coef, mode).map(|r| r.stable).unwrap_or(false);
                            let num_ms = ms_stable(&coef).stable;
                            CellClass { num_as, num_ms, exact_as, exact_ms, pole: false }
                        }
                        // The relative pole guard can fire slightly
                        // outside the distance band; flag those too.
                        Err(_) => {
                            CellClass { exact_as, exact_ms, pole: true, ..CellClass::default() }
                        }
                    }
                })
                .collect()
        })
        .collect();

    let cells: Vec<CellClass> = rows.into_iter().flatten().collect();
    let inclusion_violations = cells.iter().filter(|c| c.num_ms && !c.num_as).count();
    let pole_cells = cells.iter().filter(|c| c.pole).count();
    Ok(RegionRaster {
        hhat_range,
        k2_range,
        nx,
        ny,
        cells,
        inclusion_violations,
        pole_cells,
    })
}

/// CSV emission: header plus one row per cell.
pub fn raster_csv(raster: &RegionRaster) -> String {
    let mut out = String::with_capacity(raster.cells.len() * 48);
    out.push_str("hhat,k2,numAS,numMS,exactAS,exactMS,pole\n");
    let flag = |b: bool| if b { '1' } else { '0' };
    for iy in 0..raster.ny {
        for ix in 0..raster.nx {
            let (hhat, k2) = raster.center(ix, iy);
            let c = raster.cell(ix, iy);
            out.push_str(&csv_float(hhat));
            out.push(',');
            out.push_str(&csv_float(k2));
            for b in [c.num_as, c.num_ms, c.exact_as, c.exact_ms, c.pole] {
                out.push(',');
                out.push(flag(b));
            }
            out.push('\n');
        }
    }
    out
}

/// Shade of one cell under the five-level encoding.
pub fn cell_shade(c: CellClass) -> u8 {
    if c.pole {
        255
    } else if c.num_ms {
        0
    } else if c.num_as {
        64
    } else if c.exact_ms {
        128
    } else if c.exact_as {
        192
    } else {
        255
    }
}

/// Portable graymap emission (binary P5, or ASCII P2 when `ascii`).
pub fn raster_pgm(raster: &RegionRaster, ascii: bool) -> Vec<u8> {
    let (nx, ny) = (raster.nx, raster.ny);
    let mut out = Vec::with_capacity(nx * ny + 64);
    let magic = if ascii { "P2" } else { "P5" };
    out.extend_from_slice(
        format!(
            "{magic}\n# hhat [{} {}] k2 [{} {}]\n{nx} {ny}\n255\n",
            csv_float(raster.hhat_range.0),
            csv_float(raster.hhat_range.1),
            csv_float(raster.k2_range.0),
            csv_float(raster.k2_range.1),
        )
        .as_bytes(),
    );
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            let shade = cell_shade(raster.cell(ix, iy));
            if ascii {
                let sep = if ix + 1 == nx { '\n' } else { ' ' };
                out.extend_from_slice(format!("{shade}{sep}").as_bytes());
            } else {
                out.push(shade);
            }
        }
    }
    out
}
