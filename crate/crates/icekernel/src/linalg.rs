//! Minimal dense complex linear algebra: LU factorization with partial
//! pivoting, log-scale determinants, and inverses.
//!
//! Matrices here are square, dense, complex, and at most a few thousand on
//! a side. The routines are hand-rolled because the determinant bookkeeping
//! must stay in (log-magnitude, unit-phase) form — determinants of the
//! operators in this crate grow exponentially with the torus area and
//! overflow binary64 long before the sizes stop being practical.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A dense square complex matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.n {
            self.data.swap(a * self.n + j, b * self.n + j);
        }
    }

    /// Naive matrix product, used by identity checks in tests and the
    /// verification suite.
    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Largest entry magnitude of the difference with another matrix.
    pub fn max_abs_diff(&self, rhs: &CMatrix) -> f64 {
        assert_eq!(self.n, rhs.n);
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// The result of an LU factorization with partial pivoting: PA = LU with L
/// unit-diagonal, stored packed in `lu`.
pub(crate) struct LuFactors {
    lu: CMatrix,
    /// `piv[i]` is the original row now sitting at position i.
    piv: Vec<usize>,
    swaps: usize,
    /// First column with no usable pivot, if elimination stalled.
    singular_at: Option<usize>,
}

/// Factorizes PA = LU, choosing the largest-magnitude pivot per column.
///
/// A zero pivot column is recorded rather than reported: the determinant of
/// a singular matrix is a legitimate result (zero), while solves and
/// inverses fail explicitly.
pub(crate) fn lu_factor(mut a: CMatrix) -> LuFactors {
    let n = a.dim();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut swaps = 0usize;
    let mut singular_at = None;
    for col in 0..n {
        let mut best = col;
        let mut best_mag = a[(col, col)].norm();
        for row in col + 1..n {
            let mag = a[(row, col)].norm();
            if mag > best_mag {
                best = row;
                best_mag = mag;
            }
        }
        if best_mag == 0.0 {
            singular_at = singular_at.or(Some(col));
            continue;
        }
        if best != col {
            a.swap_rows(best, col);
            piv.swap(best, col);
            swaps += 1;
        }
        let pivot = a[(col, col)];
        for row in col + 1..n {
            let factor = a[(row, col)] / pivot;
            a[(row, col)] = factor;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in col + 1..n {
                let upd = a[(col, j)];
                a[(row, j)] -= factor * upd;
            }
        }
    }
    LuFactors { lu: a, piv, swaps, singular_at }
}

impl LuFactors {
    /// The determinant as (log-magnitude, unit phase); singular matrices
    /// report (−∞, 1).
    pub fn log_det(&self) -> (f64, Complex64) {
        let n = self.lu.dim();
        let mut log_mag = 0.0f64;
        let mut phase =
            Complex64::new(if self.swaps % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        if self.singular_at.is_some() {
            return (f64::NEG_INFINITY, Complex64::new(1.0, 0.0));
        }
        for i in 0..n {
            let d = self.lu[(i, i)];
            let mag = d.norm();
            if mag == 0.0 {
                return (f64::NEG_INFINITY, Complex64::new(1.0, 0.0));
            }
            log_mag += mag.ln();
            phase *= d / mag;
        }
        (log_mag, phase / phase.norm())
    }

    /// The inverse matrix; fails on singular input.
    pub fn inverse(&self) -> Result<CMatrix> {
        if let Some(pivot) = self.singular_at {
            return Err(Error::SingularMatrix { pivot });
        }
        let n = self.lu.dim();
        let mut inv = CMatrix::zeros(n);
        let mut work = vec![Complex64::new(0.0, 0.0); n];
        for col in 0..n {
            for i in 0..n {
                let mut s = if self.piv[i] == col {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                for k in 0..i {
                    s -= self.lu[(i, k)] * work[k];
                }
                work[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = work[i];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * work[k];
                }
                work[i] = s / self.lu[(i, i)];
            }
            for i in 0..n {
                inv[(i, col)] = work[i];
            }
        }
        Ok(inv)
    }
}

/// The determinant in linear scale, for the small matrices of correlation
/// assembly. Sizes 0–2 use closed forms (the 2×2 form makes the
/// column-swap antisymmetry exact in floating point); larger sizes go
/// through LU.
pub(crate) fn det_direct(a: &CMatrix) -> Complex64 {
    match a.dim() {
        0 => Complex64::new(1.0, 0.0),
        1 => a[(0, 0)],
        2 => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
        _ => {
            let (log_mag, phase) = lu_factor(a.clone()).log_det();
            if log_mag == f64::NEG_INFINITY {
                Complex64::new(0.0, 0.0)
            } else {
                phase * log_mag.exp()
            }
        }
    }
}

/// O(n!) cofactor expansion along the first row. Test oracle only — kept
/// outside `#[cfg(test)]` so other modules' tests can call it.
#[allow(dead_code)]
pub(crate) fn det_cofactor(a: &CMatrix) -> Complex64 {
    let n = a.dim();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if n == 1 {
        return a[(0, 0)];
    }
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let mut minor = CMatrix::zeros(n - 1);
        for r in 1..n {
            let mut cc = 0;
            for c in 0..n {
                if c == j {
                    continue;
                }
                minor[(r - 1, cc)] = a[(r, c)];
                cc += 1;
            }
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * a[(0, j)] * det_cofactor(&minor);
    }
    total
}
