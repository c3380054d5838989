//! Shared output formatting.

/// Format a float for CSV output: 17 significant digits, '.' decimal,
/// scientific notation. Round-trips exactly through `str::parse`.
/// Non-finite values format as `inf`/`-inf`/`NaN`.
pub fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}
