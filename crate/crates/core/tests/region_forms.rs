//! The scheme-specific stability-domain closed forms, written out
//! display by display, against the generic coefficient pipeline.
//!
//! Each oracle below evaluates the published region inequality for one
//! scheme directly in (ĥ, k); the generic path goes through the family
//! coefficients and the indicator functions. Booleans must agree at
//! every sampled complex point except inside a thin boundary band.

use ddisrk::{
    as_stable, coefficients_order1, coefficients_order2, ms_stable, FamilyParams, NamedScheme,
    RandomVariableMode, RngStream, StabilityPoint,
};
use num_complex::Complex64;

const BAND: f64 = 1e-9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sample_points(seed: u64, n: usize) -> Vec<(Complex64, Complex64)> {
    let stream = RngStream::new(seed, 0);
    (0..n)
        .map(|i| {
            let rng = stream.at_step(i as u64);
            let hhat = c(8.0 * rng.uniform(0) - 6.0, 4.0 * rng.uniform(1) - 2.0);
            let k = c(4.0 * rng.uniform(2) - 2.0, 2.0 * rng.uniform(3) - 1.0);
            (hhat, k)
        })
        .collect()
}

/// Compare a published indicator (LHS of `… < 1`, scaled so the bound
/// is 1) with the generic pipeline's boolean at the same point.
fn assert_agrees(published_lhs: f64, published_rhs: f64, generic: bool, what: &str) {
    let ratio = published_lhs / published_rhs;
    if (ratio - 1.0).abs() <= BAND {
        return;
    }
    assert_eq!(published_lhs < published_rhs, generic, "{what}: lhs {published_lhs}, rhs {published_rhs}");
}

#[test]
fn ddirdi1_published_domains() {
    let params = match NamedScheme::Ddirdi1.family_params() {
        FamilyParams::Order1(p) => p,
        _ => unreachable!(),
    };
    let one = c(1.0, 0.0);
    for (hhat, k) in sample_points(7001, 10_000) {
        if (one - 0.5 * hhat).norm() < 1e-3 {
            continue;
        }
        let coef = coefficients_order1(&params, StabilityPoint::new(hhat, k)).unwrap();
        let plus = one + 0.5 * hhat;
        let minus = one - 0.5 * hhat;

        // Two-point: |(1+ĥ/2)² − (1−ĥ/2)² k²| < |1−ĥ/2|².
        let two = as_stable(&coef, RandomVariableMode::TwoPoint).unwrap();
        assert_agrees(
            (plus * plus - minus * minus * k * k).norm(),
            minus.norm_sqr(),
            two.stable,
            "DDIRDI1 2pt",
        );

        // Three-point, denominators cleared:
        // |(1+ĥ/2)² − 3k²(1−ĥ/2)²| |1+ĥ/2|⁴ < |1−ĥ/2|⁶.
        let three = as_stable(&coef, RandomVariableMode::ThreePoint).unwrap();
        assert_agrees(
            (plus * plus - 3.0 * k * k * minus * minus).norm() * plus.norm().powi(4),
            minus.norm().powi(6),
            three.stable,
            "DDIRDI1 3pt",
        );

        // MS: 2Re(ĥ) + ((1−Re(ĥ)/2)² + Im(ĥ)²/4)|k|² < 0.
        let ms = ms_stable(&coef);
        let lhs = 2.0 * hhat.re
            + ((1.0 - 0.5 * hhat.re).powi(2) + 0.25 * hhat.im * hhat.im) * k.norm_sqr();
        // Rescale to the shared `lhs < rhs` shape: lhs + |1−ĥ/2|² < |1−ĥ/2|²·1 shifted.
        let shift = minus.norm_sqr();
        assert_agrees(lhs + shift, shift, ms.stable, "DDIRDI1 MS");
    }
}

#[test]
fn ddirdi2_half_published_domains() {
    let params = match (NamedScheme::Ddirdi2 { theta: 0.5 }).family_params() {
        FamilyParams::Order1(p) => p,
        _ => unreachable!(),
    };
    let one = c(1.0, 0.0);
    for (hhat, k) in sample_points(7002, 10_000) {
        if (one - 0.5 * hhat).norm() < 1e-3 {
            continue;
        }
        let coef = coefficients_order1(&params, StabilityPoint::new(hhat, k)).unwrap();
        let plus = one + 0.5 * hhat;
        let minus = one - 0.5 * hhat;

        // Two-point: |(1+ĥ/2)² − k²| < |1−ĥ/2|².
        let two = as_stable(&coef, RandomVariableMode::TwoPoint).unwrap();
        assert_agrees((plus * plus - k * k).norm(), minus.norm_sqr(), two.stable, "DDIRDI2 2pt");

        // Three-point: |(1−ĥ/2)²((1+ĥ/2)² − 3k²)| |1+ĥ/2|⁴ < |1−ĥ/2|⁴.
        let three = as_stable(&coef, RandomVariableMode::ThreePoint).unwrap();
        assert_agrees(
            (minus * minus * (plus * plus - 3.0 * k * k)).norm() * plus.norm().powi(4),
            minus.norm().powi(4) * minus.norm().powi(4),
            three.stable,
            "DDIRDI2 3pt",
        );

        // MS: 2Re(ĥ) + |k|² < 0 — the A-stability statement.
        let ms = ms_stable(&coef);
        let lhs = 2.0 * hhat.re + k.norm_sqr();
        let shift = minus.norm_sqr();
        assert_agrees(lhs + shift, shift, ms.stable, "DDIRDI2 MS");
    }
}

#[test]
fn ri6_published_domains() {
    let one = c(1.0, 0.0);
    for (hhat, k) in sample_points(7003, 10_000) {
        let coef = coefficients_order2(0.0, 0.0, StabilityPoint::new(hhat, k)).unwrap();
        let poly = one + hhat + 0.5 * hhat * hhat;

        // AS: |(1+ĥ+ĥ²/2+k²)² − 3(1+ĥ)²k²| |1+ĥ+ĥ²/2 − k²/2|⁴ < 1.
        let three = as_stable(&coef, RandomVariableMode::ThreePoint).unwrap();
        let lhs = ((poly + k * k) * (poly + k * k) - 3.0 * (one + hhat) * (one + hhat) * k * k)
            .norm()
            * (poly - 0.5 * k * k).norm().powi(4);
        assert_agrees(lhs, 1.0, three.stable, "RI6 AS");

        // MS: |1+ĥ+ĥ²/2|² + |1+ĥ|²|k|² + |k|⁴/2 < 1.
        let ms = ms_stable(&coef);
        let lhs =
            poly.norm_sqr() + (one + hhat).norm_sqr() * k.norm_sqr() + 0.5 * k.norm_sqr().powi(2);
        assert_agrees(lhs, 1.0, ms.stable, "RI6 MS");
    }
}

#[test]
fn ddirdi4_published_domains() {
    let one = c(1.0, 0.0);
    for (hhat, k) in sample_points(7004, 10_000) {
        if (one - 0.5 * hhat).norm() < 1e-3 {
            continue;
        }
        let coef = coefficients_order2(0.0, 0.5, StabilityPoint::new(hhat, k)).unwrap();
        let gamma = one + hhat / (one - 0.5 * hhat);
        let sig = one + (hhat - 0.25 * hhat * hhat) / (one - 0.5 * hhat);

        // AS: |(Γ+k²)² − 3 σ² k²| |Γ − k²/2|⁴ < 1 with the printed Γ, σ.
        let three = as_stable(&coef, RandomVariableMode::ThreePoint).unwrap();
        let lhs = ((gamma + k * k) * (gamma + k * k) - 3.0 * sig * sig * k * k).norm()
            * (gamma - 0.5 * k * k).norm().powi(4);
        assert_agrees(lhs, 1.0, three.stable, "DDIRDI4 AS");

        // MS: |Γ|² + |σ|²|k|² + |k|⁴/2 < 1.
        let ms = ms_stable(&coef);
        let lhs = gamma.norm_sqr() + sig.norm_sqr() * k.norm_sqr() + 0.5 * k.norm_sqr().powi(2);
        assert_agrees(lhs, 1.0, ms.stable, "DDIRDI4 MS");
    }
}

/// The singly-diagonal family (c1 = c2) at several parameter values,
/// including the DDIRDI5 default.
#[test]
fn singly_diagonal_family_published_domains() {
    let one = c(1.0, 0.0);
    for (pi, c1) in [0.25, 0.5, ddisrk::tableau::SDIRK3_GAMMA, 1.0, 1.5, 3.0]
        .into_iter()
        .enumerate()
    {
        for (hhat, k) in sample_points(7100 + pi as u64, 2000) {
            if (one - c1 * hhat).norm() < 1e-3 {
                continue;
            }
            let coef = coefficients_order2(c1, c1, StabilityPoint::new(hhat, k)).unwrap();
            let denom = (one - c1 * hhat) * (one - c1 * hhat);
            let gamma = one + (hhat + (0.5 - 2.0 * c1) * hhat * hhat) / denom;
            let sig = one + (hhat - c1 * hhat * hhat) / denom;

            let three = as_stable(&coef, RandomVariableMode::ThreePoint).unwrap();
            let lhs = ((gamma + k * k) * (gamma + k * k) - 3.0 * sig * sig * k * k).norm()
                * (gamma - 0.5 * k * k).norm().powi(4);
            assert_agrees(lhs, 1.0, three.stable, "c1=c2 AS");

            let ms = ms_stable(&coef);
            let lhs =
                gamma.norm_sqr() + sig.norm_sqr() * k.norm_sqr() + 0.5 * k.norm_sqr().powi(2);
            assert_agrees(lhs, 1.0, ms.stable, "c1=c2 MS");
        }
    }
}
