//! Extended Butcher arrays for the SRK class and the catalogued
//! diagonally drift-implicit (DDISRK) coefficient families.
//!
//! A scheme of the class is described by the block table
//!
//! ```text
//!     c(0) | A(0) | B(0) |
//!     c(1) | A(1) | B(1) |
//!     c(2) | A(2) | B(2) |
//!     -----+------+------+------
//!          | α^T  | β1^T | β2^T
//!          |      | β3^T | β4^T
//! ```
//!
//! All tableaux produced here have a lower-triangular drift coupling
//! `A(0)` (nonzero diagonal entries make a stage drift-implicit) and
//! strictly lower-triangular stochastic blocks, so stages can be
//! evaluated in index order.

use std::fmt::Write as _;

use thiserror::Error;

/// `(3 + √3) / 6`, the diagonal entry of the A-stable third-order
/// SDIRK core shared by DDIRDI3 and DDIRDI5.
pub const SDIRK3_GAMMA: f64 = 0.7886751345948128; // (3.0 + 3f64.sqrt()) / 6.0, bit-exact

const CATALOGUE_MATCH_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableauError {
    /// `c3` or `c4` of the order-two family vanished; the weights β1..β4
    /// divide by them.
    #[error("degenerate family parameter: {0}")]
    DegenerateFamilyParameter(String),
    #[error("unknown scheme name: {0}")]
    UnknownScheme(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
}

/// Free coefficients of the weak order one family (two stages).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order1FamilyParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl Order1FamilyParams {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64, c5: f64) -> Self {
        Self { c1, c2, c3, c4, c5 }
    }
}

/// Free coefficients of the weak order two family (three stages);
/// `c3` and `c4` must be nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order2FamilyParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl Order2FamilyParams {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64) -> Result<Self, TableauError> {
        if c3 == 0.0 || !c3.is_finite() {
            return Err(TableauError::DegenerateFamilyParameter(format!(
                "c3 = {c3}, must be finite and nonzero"
            )));
        }
        if c4 == 0.0 || !c4.is_finite() {
            return Err(TableauError::DegenerateFamilyParameter(format!(
                "c4 = {c4}, must be finite and nonzero"
            )));
        }
        Ok(Self { c1, c2, c3, c4 })
    }
}

/// Family coefficients a tableau was generated from. The stability
/// functions of the linear test equation are closed forms in these,
/// not in the raw tableau blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyParams {
    Order1(Order1FamilyParams),
    Order2(Order2FamilyParams),
}

/// The full coefficient set of one SRK scheme, plus catalogue metadata.
///
/// Matrices are stored row-major as `s` rows of length `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedButcherTableau {
    pub s: usize,
    pub alpha: Vec<f64>,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub beta3: Vec<f64>,
    pub beta4: Vec<f64>,
    pub a0: Vec<Vec<f64>>,
    pub a1: Vec<Vec<f64>>,
    pub a2: Vec<Vec<f64>>,
    pub b0: Vec<Vec<f64>>,
    pub b1: Vec<Vec<f64>>,
    pub b2: Vec<Vec<f64>>,
    pub c0: Vec<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub label: String,
    /// Deterministic order p_D when applied to an ODE; `None` when the
    /// catalogue does not state it for these parameters.
    pub order_det: Option<u32>,
    /// Weak order p_S when applied to an SDE.
    pub order_stoch: u32,
    /// The family coefficients this tableau was built from.
    pub family: FamilyParams,
}

impl ExtendedButcherTableau {
    /// True when some diagonal entry of `A(0)` is nonzero, i.e. at least
    /// one drift stage needs an implicit solve.
    pub fn is_drift_implicit(&self) -> bool {
        (0..self.s).any(|i| self.a0[i][i] != 0.0)
    }

    /// `(p_D, p_S)` formatted like the catalogue, with `.` for an
    /// unstated deterministic order.
    pub fn order_pair(&self) -> String {
        match self.order_det {
            Some(pd) => format!("({},{})", pd, self.order_stoch),
            None => format!("(.,{})", self.order_stoch),
        }
    }

    /// Plain-text rendering of the extended Butcher array, block row by
    /// block row, weights at the bottom.
    pub fn format_block_table(&self) -> String {
        let mut out = String::new();
        let row = |c: &[f64], a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>, i: usize| {
            let fmt =
                |v: &[f64]| v.iter().map(|x| format!("{x:>10.6}")).collect::<Vec<_>>().join(" ");
            format!("{:>10.6} | {} | {}", c[i], fmt(&a[i]), fmt(&b[i]))
        };
        let _ = writeln!(out, "{} {}", self.label, self.order_pair());
        for i in 0..self.s {
            let _ = writeln!(out, "{}", row(&self.c0, &self.a0, &self.b0, i));
        }
        let _ = writeln!(out, "{}", "-".repeat(12 + 22 * self.s));
        for i in 0..self.s {
            let _ = writeln!(out, "{}", row(&self.c1, &self.a1, &self.b1, i));
        }
        let _ = writeln!(out, "{}", "-".repeat(12 + 22 * self.s));
        for i in 0..self.s {
            let _ = writeln!(out, "{}", row(&self.c2, &self.a2, &self.b2, i));
        }
        let _ = writeln!(out, "{}", "=".repeat(12 + 22 * self.s));
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:>10.6}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "alpha | {}", fmt(&self.alpha));
        let _ = writeln!(out, "beta1 | {}", fmt(&self.beta1));
        let _ = writeln!(out, "beta2 | {}", fmt(&self.beta2));
        let _ = writeln!(out, "beta3 | {}", fmt(&self.beta3));
        let _ = writeln!(out, "beta4 | {}", fmt(&self.beta4));
        out
    }
}

fn zeros(s: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; s]; s]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= CATALOGUE_MATCH_TOL
}

/// Build a tableau of the weak order one family.
///
/// The family has two drift stages and one effective diffusion stage;
/// orders are taken from the catalogue when the parameters match a
/// listed scheme and default to the guaranteed floor (1,1) otherwise.
pub fn build_order1_tableau(p: Order1FamilyParams) -> ExtendedButcherTableau {
    let Order1FamilyParams { c1, c2, c3, c4, c5 } = p;
    let s = 2;

    let mut a0 = zeros(s);
    a0[0][0] = c1;
    a0[1][0] = c2;
    a0[1][1] = c3;
    let mut b0 = zeros(s);
    b0[1][0] = c4;

    let (label, order_det, order_stoch) = classify_order1(&p);

    ExtendedButcherTableau {
        s,
        alpha: vec![1.0 - c5, c5],
        beta1: vec![1.0, 0.0],
        beta2: vec![0.0; s],
        beta3: vec![0.0; s],
        beta4: vec![0.0; s],
        a0,
        a1: zeros(s),
        a2: zeros(s),
        b0,
        b1: zeros(s),
        b2: zeros(s),
        c0: vec![c1, c2 + c3],
        c1: vec![0.0; s],
        c2: vec![0.0; s],
        label,
        order_det,
        order_stoch,
        family: FamilyParams::Order1(p),
    }
}

fn classify_order1(p: &Order1FamilyParams) -> (String, Option<u32>, u32) {
    let Order1FamilyParams { c1, c2, c3, c4, c5 } = *p;
    if [c1, c2, c3, c4, c5].iter().all(|&c| c == 0.0) {
        return ("EulerMaruyama".into(), Some(1), 1);
    }
    if close(c1, 0.5) && c2 == 0.0 && c3 == 0.0 && c4 == 0.0 && c5 == 0.0 {
        return ("DDIRDI1".into(), Some(2), 1);
    }
    // Stochastic theta method line: c1=0, c2=1-θ, c3=θ, c4=1, c5=θ.
    if c1 == 0.0 && close(c3, c5) && close(c2, 1.0 - c3) && close(c4, 1.0) && (0.0..=1.0).contains(&c3)
    {
        return (format!("DDIRDI2(theta={c3})"), Some(2), 1);
    }
    // A-stable order (3,1) line: c1=c3=(3+√3)/6, c2=-1/√3, c5=1/2, any c4.
    let inv_sqrt3 = 1.0 / 3f64.sqrt();
    if close(c1, SDIRK3_GAMMA) && close(c3, SDIRK3_GAMMA) && close(c2, -inv_sqrt3) && close(c5, 0.5)
    {
        if close(c4, 1.5) {
            return ("DDIRDI3".into(), Some(3), 1);
        }
        return (format!("DDISRK31(c4={c4})"), Some(3), 1);
    }
    (format!("Order1({c1},{c2},{c3},{c4},{c5})"), Some(1), 1)
}

/// Build a tableau of the weak order two family.
pub fn build_order2_tableau(p: Order2FamilyParams) -> Result<ExtendedButcherTableau, TableauError> {
    // Re-validate so tableaux cannot be built from a struct-literal with
    // degenerate entries.
    let p = Order2FamilyParams::new(p.c1, p.c2, p.c3, p.c4)?;
    let Order2FamilyParams { c1, c2, c3, c4 } = p;
    let s = 3;

    let mut a0 = zeros(s);
    a0[0][0] = c1;
    a0[1][0] = 1.0 - c1 - c2;
    a0[1][1] = c2;
    let mut b0 = zeros(s);
    b0[1][0] = 1.0;

    let mut a1 = zeros(s);
    a1[1][0] = c3 * c3;
    a1[2][0] = c3 * c3;
    let mut b1 = zeros(s);
    b1[1][0] = c3;
    b1[2][0] = -c3;

    let a2 = zeros(s);
    let mut b2 = zeros(s);
    b2[1][0] = c4;
    b2[2][0] = -c4;

    let (label, order_det) = classify_order2(&p);

    Ok(ExtendedButcherTableau {
        s,
        alpha: vec![0.5, 0.5, 0.0],
        beta1: vec![1.0 - 1.0 / (2.0 * c3 * c3), 1.0 / (4.0 * c3 * c3), 1.0 / (4.0 * c3 * c3)],
        beta2: vec![0.0, 1.0 / (2.0 * c3), -1.0 / (2.0 * c3)],
        beta3: vec![-1.0 / (2.0 * c4 * c4), 1.0 / (4.0 * c4 * c4), 1.0 / (4.0 * c4 * c4)],
        beta4: vec![0.0, 1.0 / (2.0 * c4), -1.0 / (2.0 * c4)],
        a0,
        a1,
        a2,
        b0,
        b1,
        b2,
        c0: vec![c1, 1.0 - c1, 0.0],
        c1: vec![0.0, c3 * c3, c3 * c3],
        c2: vec![0.0; s],
        label,
        order_det,
        order_stoch: 2,
        family: FamilyParams::Order2(p),
    })
}

fn classify_order2(p: &Order2FamilyParams) -> (String, Option<u32>) {
    let Order2FamilyParams { c1, c2, c3, c4 } = *p;
    if c1 == 0.0 && c2 == 0.0 && close(c3, 1.0) && close(c4, 1.0) {
        return ("RI6".into(), None);
    }
    if c1 == 0.0 && close(c2, 0.5) && close(c3, 1.0) && close(c4, 1.0) {
        return ("DDIRDI4".into(), None);
    }
    if close(c1, c2) && close(c3, 1.0) && close(c4, 1.0) {
        if close(c1, SDIRK3_GAMMA) {
            return ("DDIRDI5".into(), Some(3));
        }
        return (format!("DDIRDI5(c1={c1})"), None);
    }
    if close(c1, c2) && close(c1, SDIRK3_GAMMA) {
        // The (3,2) deterministic order holds for any nonzero c3, c4.
        return (format!("Order2({c1},{c2},{c3},{c4})"), Some(3));
    }
    (format!("Order2({c1},{c2},{c3},{c4})"), None)
}

/// A scheme name from the catalogue, with its free parameter where one
/// exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedScheme {
    EulerMaruyama,
    Ddirdi1,
    Ddirdi2 { theta: f64 },
    Ddirdi3,
    Ri6,
    Ddirdi4,
    Ddirdi5 { c1: f64 },
}

impl NamedScheme {
    /// All catalogued schemes at their default parameters.
    pub fn all() -> Vec<NamedScheme> {
        vec![
            NamedScheme::EulerMaruyama,
            NamedScheme::Ddirdi1,
            NamedScheme::Ddirdi2 { theta: 0.5 },
            NamedScheme::Ddirdi3,
            NamedScheme::Ri6,
            NamedScheme::Ddirdi4,
            NamedScheme::Ddirdi5 { c1: SDIRK3_GAMMA },
        ]
    }

    /// Parse a scheme name. `theta` applies to DDIRDI2 (required range
    /// [0,1], default 1/2), `c1` to DDIRDI5 (default `(3+√3)/6`).
    pub fn parse(name: &str, theta: Option<f64>, c1: Option<f64>) -> Result<Self, TableauError> {
        let scheme = match name {
            "EulerMaruyama" | "euler-maruyama" | "EM" => NamedScheme::EulerMaruyama,
            "DDIRDI1" => NamedScheme::Ddirdi1,
            "DDIRDI2" => {
                let theta = theta.unwrap_or(0.5);
                if !(0.0..=1.0).contains(&theta) {
                    return Err(TableauError::ParameterOutOfRange(format!(
                        "theta = {theta}, DDIRDI2 requires theta in [0,1]"
                    )));
                }
                NamedScheme::Ddirdi2 { theta }
            }
            "DDIRDI3" => NamedScheme::Ddirdi3,
            "RI6" => NamedScheme::Ri6,
            "DDIRDI4" => NamedScheme::Ddirdi4,
            "DDIRDI5" => {
                let c1 = c1.unwrap_or(SDIRK3_GAMMA);
                if !c1.is_finite() {
                    return Err(TableauError::ParameterOutOfRange(format!(
                        "c1 = {c1}, DDIRDI5 requires a finite c1"
                    )));
                }
                NamedScheme::Ddirdi5 { c1 }
            }
            other => return Err(TableauError::UnknownScheme(other.to_string())),
        };
        Ok(scheme)
    }

    /// The family coefficients behind the catalogue entry.
    pub fn family_params(&self) -> FamilyParams {
        match *self {
            NamedScheme::EulerMaruyama => {
                FamilyParams::Order1(Order1FamilyParams::new(0.0, 0.0, 0.0, 0.0, 0.0))
            }
            NamedScheme::Ddirdi1 => {
                FamilyParams::Order1(Order1FamilyParams::new(0.5, 0.0, 0.0, 0.0, 0.0))
            }
            NamedScheme::Ddirdi2 { theta } => {
                FamilyParams::Order1(Order1FamilyParams::new(0.0, 1.0 - theta, theta, 1.0, theta))
            }
            NamedScheme::Ddirdi3 => FamilyParams::Order1(Order1FamilyParams::new(
                SDIRK3_GAMMA,
                -1.0 / 3f64.sqrt(),
                SDIRK3_GAMMA,
                1.5,
                0.5,
            )),
            NamedScheme::Ri6 => {
                FamilyParams::Order2(Order2FamilyParams { c1: 0.0, c2: 0.0, c3: 1.0, c4: 1.0 })
            }
            NamedScheme::Ddirdi4 => {
                FamilyParams::Order2(Order2FamilyParams { c1: 0.0, c2: 0.5, c3: 1.0, c4: 1.0 })
            }
            NamedScheme::Ddirdi5 { c1 } => {
                FamilyParams::Order2(Order2FamilyParams { c1, c2: c1, c3: 1.0, c4: 1.0 })
            }
        }
    }

    pub fn tableau(&self) -> ExtendedButcherTableau {
        match self.family_params() {
            FamilyParams::Order1(p) => build_order1_tableau(p),
            // Named order-2 schemes always carry nonzero c3, c4.
            FamilyParams::Order2(p) => build_order2_tableau(p).expect("catalogued parameters"),
        }
    }
}

/// Build the tableau for a catalogued scheme name.
pub fn named_scheme(
    name: &str,
    theta: Option<f64>,
    c1: Option<f64>,
) -> Result<ExtendedButcherTableau, TableauError> {
    Ok(NamedScheme::parse(name, theta, c1)?.tableau())
}

/// Triangularity classification of the drift coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangularityClass {
    Explicit,
    DiagonallyDriftImplicit,
    Other,
}

impl std::fmt::Display for TriangularityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TriangularityClass::Explicit => write!(f, "explicit"),
            TriangularityClass::DiagonallyDriftImplicit => write!(f, "diagonally drift-implicit"),
            TriangularityClass::Other => write!(f, "other"),
        }
    }
}

/// Result of [`validate_tableau`]: structural checks with a violation
/// list rather than a hard error.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub class: TriangularityClass,
    pub violations: Vec<String>,
    /// `α^T A(0) e` — must equal 1/2 for the order-two family.
    pub alpha_a0_rowsum: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

const VALIDATE_TOL: f64 = 1e-12;

/// Check block shapes, the `c = A e` row-sum consistency, triangularity
/// and (for the order-two family) the `α^T A(0) e = 1/2` constraint.
pub fn validate_tableau(t: &ExtendedButcherTableau) -> ValidationReport {
    let s = t.s;
    let mut violations = Vec::new();

    let weights: [(&str, &Vec<f64>); 5] = [
        ("alpha", &t.alpha),
        ("beta1", &t.beta1),
        ("beta2", &t.beta2),
        ("beta3", &t.beta3),
        ("beta4", &t.beta4),
    ];
    for (name, v) in weights {
        if v.len() != s {
            violations.push(format!("{name} has length {}, expected {s}", v.len()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            violations.push(format!("{name} contains a non-finite entry"));
        }
    }
    let matrices: [(&str, &Vec<Vec<f64>>); 6] = [
        ("A0", &t.a0),
        ("A1", &t.a1),
        ("A2", &t.a2),
        ("B0", &t.b0),
        ("B1", &t.b1),
        ("B2", &t.b2),
    ];
    for (name, m) in matrices {
        if m.len() != s || m.iter().any(|row| row.len() != s) {
            violations.push(format!("{name} is not {s}x{s}"));
        }
        if m.iter().flatten().any(|x| !x.is_finite()) {
            violations.push(format!("{name} contains a non-finite entry"));
        }
    }

    // c(j) must equal the row sums of A(j).
    let abscissae: [(&str, &Vec<f64>, &Vec<Vec<f64>>); 3] =
        [("c0", &t.c0, &t.a0), ("c1", &t.c1, &t.a1), ("c2", &t.c2, &t.a2)];
    for (name, c, a) in abscissae {
        if c.len() != s {
            violations.push(format!("{name} has length {}, expected {s}", c.len()));
            continue;
        }
        for i in 0..s.min(a.len()) {
            let rowsum: f64 = a[i].iter().sum();
            if (c[i] - rowsum).abs() > VALIDATE_TOL {
                violations.push(format!(
                    "{name}[{i}] = {} but row sum of the coupling matrix is {rowsum}",
                    c[i]
                ));
            }
        }
    }

    // Stochastic blocks must be strictly lower triangular, A0 lower.
    let strict: [(&str, &Vec<Vec<f64>>); 5] =
        [("A1", &t.a1), ("A2", &t.a2), ("B0", &t.b0), ("B1", &t.b1), ("B2", &t.b2)];
    let mut strictly_lower_ok = true;
    for (name, m) in strict {
        for i in 0..s {
            for j in i..s {
                if m[i][j] != 0.0 {
                    violations.push(format!("{name}[{i}][{j}] = {} breaks strict lower triangularity", m[i][j]));
                    strictly_lower_ok = false;
                }
            }
        }
    }
    let mut a0_lower = true;
    for i in 0..s {
        for j in (i + 1)..s {
            if t.a0[i][j] != 0.0 {
                violations.push(format!("A0[{i}][{j}] = {} above the diagonal", t.a0[i][j]));
                a0_lower = false;
            }
        }
    }
    let a0_diag_nonzero = (0..s).any(|i| t.a0[i][i] != 0.0);
    let class = if !a0_lower || !strictly_lower_ok {
        TriangularityClass::Other
    } else if a0_diag_nonzero {
        TriangularityClass::DiagonallyDriftImplicit
    } else {
        TriangularityClass::Explicit
    };

    let alpha_a0_rowsum: f64 =
        (0..s).map(|i| t.alpha[i] * t.a0[i].iter().sum::<f64>()).sum();
    if matches!(t.family, FamilyParams::Order2(_)) {
        if (alpha_a0_rowsum - 0.5).abs() > VALIDATE_TOL {
            violations.push(format!("alpha^T A0 e = {alpha_a0_rowsum}, expected 1/2"));
        }
        let expect = [0.5, 0.5, 0.0];
        for i in 0..s.min(3) {
            if (t.alpha[i] - expect[i]).abs() > VALIDATE_TOL {
                violations.push(format!("alpha[{i}] = {}, expected {}", t.alpha[i], expect[i]));
            }
        }
    }

    ValidationReport { class, violations, alpha_a0_rowsum }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_constant_matches_closed_form() {
        assert!((SDIRK3_GAMMA - (3.0 + 3f64.sqrt()) / 6.0).abs() < 1e-16);
    }

    #[test]
    fn euler_maruyama_is_all_zero_family_member() {
        let t = named_scheme("EulerMaruyama", None, None).unwrap();
        let direct = build_order1_tableau(Order1FamilyParams::new(0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(t, direct);
        assert_eq!(t.order_pair(), "(1,1)");
        assert_eq!(t.alpha, vec![1.0, 0.0]);
        assert!(!t.is_drift_implicit());
    }

    #[test]
    fn ddirdi1_catalogue_entry() {
        let t = named_scheme("DDIRDI1", None, None).unwrap();
        assert_eq!(t.order_pair(), "(2,1)");
        assert_eq!(t.a0[0][0], 0.5);
        assert!(t.is_drift_implicit());
    }

    #[test]
    fn ddirdi2_half_has_symmetric_weights() {
        let t = named_scheme("DDIRDI2", Some(0.5), None).unwrap();
        assert_eq!(t.alpha, vec![0.5, 0.5]);
        assert_eq!(t.a0[1][1], 0.5);
        assert_eq!(t.b0[1][0], 1.0);
    }

    #[test]
    fn ddirdi2_rejects_theta_outside_unit_interval() {
        let err = named_scheme("DDIRDI2", Some(1.5), None).unwrap_err();
        assert!(matches!(err, TableauError::ParameterOutOfRange(_)));
    }

    #[test]
    fn ddirdi3_is_order_31() {
        let t = named_scheme("DDIRDI3", None, None).unwrap();
        assert_eq!(t.order_pair(), "(3,1)");
        assert!((t.a0[0][0] - SDIRK3_GAMMA).abs() < 1e-15);
        assert!((t.a0[1][0] + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.b0[1][0], 1.5);
        assert!((t.c0[1] - (3.0 - 3f64.sqrt()) / 6.0).abs() < 1e-15);
    }

    #[test]
    fn ddirdi5_default_matches_family_build() {
        let t = named_scheme("DDIRDI5", None, None).unwrap();
        let direct = build_order2_tableau(
            Order2FamilyParams::new(SDIRK3_GAMMA, SDIRK3_GAMMA, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(t, direct);
        assert_eq!(t.order_pair(), "(3,2)");
    }

    #[test]
    fn ri6_blocks_match_printed_family_table() {
        let t = named_scheme("RI6", None, None).unwrap();
        assert_eq!(t.s, 3);
        assert_eq!(t.alpha, vec![0.5, 0.5, 0.0]);
        assert_eq!(t.a0, vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]);
        assert_eq!(t.b0[1][0], 1.0);
        assert_eq!(t.a1[1][0], 1.0);
        assert_eq!(t.b1[1][0], 1.0);
        assert_eq!(t.b1[2][0], -1.0);
        assert_eq!(t.b2[1][0], 1.0);
        assert_eq!(t.b2[2][0], -1.0);
        // c3 = c4 = 1 weights.
        assert_eq!(t.beta1, vec![0.5, 0.25, 0.25]);
        assert_eq!(t.beta2, vec![0.0, 0.5, -0.5]);
        assert_eq!(t.beta3, vec![-0.5, 0.25, 0.25]);
        assert_eq!(t.beta4, vec![0.0, 0.5, -0.5]);
        assert_eq!(t.order_pair(), "(.,2)");
    }

    #[test]
    fn order2_family_rejects_zero_c3_or_c4() {
        assert!(matches!(
            Order2FamilyParams::new(0.0, 0.0, 0.0, 1.0),
            Err(TableauError::DegenerateFamilyParameter(_))
        ));
        assert!(matches!(
            Order2FamilyParams::new(0.0, 0.0, 1.0, 0.0),
            Err(TableauError::DegenerateFamilyParameter(_))
        ));
    }

    #[test]
    fn unknown_scheme_is_reported() {
        let err = named_scheme("DIPL1WM", None, None).unwrap_err();
        assert!(matches!(err, TableauError::UnknownScheme(_)));
    }

    #[test]
    fn every_named_scheme_validates_cleanly() {
        for scheme in NamedScheme::all() {
            let t = scheme.tableau();
            let report = validate_tableau(&t);
            assert!(report.is_valid(), "{}: {:?}", t.label, report.violations);
        }
    }

    #[test]
    fn ri6_validates_as_explicit_with_half_rowsum() {
        let report = validate_tableau(&named_scheme("RI6", None, None).unwrap());
        assert!(report.is_valid());
        assert_eq!(report.class, TriangularityClass::Explicit);
        assert!((report.alpha_a0_rowsum - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ddirdi5_validates_as_diagonally_drift_implicit() {
        let report = validate_tableau(&named_scheme("DDIRDI5", None, None).unwrap());
        assert!(report.is_valid());
        assert_eq!(report.class, TriangularityClass::DiagonallyDriftImplicit);
    }

    #[test]
    fn broken_abscissa_is_flagged() {
        let mut t = named_scheme("RI6", None, None).unwrap();
        t.c0[1] += 0.25;
        let report = validate_tableau(&t);
        assert!(!report.is_valid());
        assert!(report.violations.iter().any(|v| v.contains("c0[1]")));
    }

    #[test]
    fn family_constructors_are_deterministic() {
        let p = Order1FamilyParams::new(0.3, -0.2, 0.7, 1.1, 0.4);
        assert_eq!(build_order1_tableau(p), build_order1_tableau(p));
        let q = Order2FamilyParams::new(0.1, 0.2, 0.5, -2.0).unwrap();
        assert_eq!(build_order2_tableau(q).unwrap(), build_order2_tableau(q).unwrap());
    }

    #[test]
    fn block_table_rendering_names_the_scheme() {
        let t = named_scheme("DDIRDI4", None, None).unwrap();
        let text = t.format_block_table();
        assert!(text.contains("DDIRDI4"));
        assert!(text.contains("alpha"));
    }
}
