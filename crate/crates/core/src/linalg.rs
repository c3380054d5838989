//! Minimal dense linear algebra for the implicit stage systems.
//!
//! Stage dimensions equal the SDE state dimension, which is tiny for
//! every problem in this crate, so a plain LU factorization with
//! partial pivoting is all that is needed. The factorization keeps a
//! cheap conditioning proxy (pivot magnitude against the matrix scale)
//! so callers can reject effectively singular stage systems.

/// LU factorization with partial pivoting of a row-major n×n matrix.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    /// max |row sum| of the input, used as the conditioning scale.
    scale: f64,
    min_pivot: f64,
}

impl LuFactors {
    /// Factor `a` (row-major, length n²). Never fails; inspect
    /// [`LuFactors::is_singular`] before solving.
    pub fn factor(a: &[f64], n: usize) -> Self {
        debug_assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = (0..n)
            .map(|i| a[i * n..(i + 1) * n].iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        let mut min_pivot = f64::INFINITY;
        for col in 0..n {
            let (mut pivot_row, mut pivot_abs) = (col, lu[col * n + col].abs());
            for row in col + 1..n {
                let v = lu[row * n + col].abs();
                if v > pivot_abs {
                    pivot_row = row;
                    pivot_abs = v;
                }
            }
            if pivot_row != col {
                for j in 0..n {
                    lu.swap(col * n + j, pivot_row * n + j);
                }
                perm.swap(col, pivot_row);
            }
            min_pivot = min_pivot.min(pivot_abs);
            if pivot_abs == 0.0 {
                continue;
            }
            let inv = 1.0 / lu[col * n + col];
            for row in col + 1..n {
                let factor = lu[row * n + col] * inv;
                lu[row * n + col] = factor;
                for j in col + 1..n {
                    lu[row * n + j] -= factor * lu[col * n + j];
                }
            }
        }
        Self { n, lu, perm, scale, min_pivot }
    }

    /// Conditioning proxy: smallest pivot below `scale / threshold`
    /// means the matrix is singular to working precision at that
    /// threshold (e.g. 1e14).
    pub fn is_singular(&self, cond_threshold: f64) -> bool {
        let reference = self.scale.max(1.0);
        !self.min_pivot.is_finite() || self.min_pivot * cond_threshold < reference
    }

    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        b.copy_from_slice(&x);
    }
}
