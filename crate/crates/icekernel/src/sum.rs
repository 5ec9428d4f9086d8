//! Compensated summation used by the enumeration oracle, sector sums, and
//! quadrature accumulators.
//!
//! Neumaier's variant of Kahan summation keeps the accumulated rounding
//! error O(1) in the number of terms and, being sequential, makes every sum
//! in the crate reproducible bit for bit.

use num_complex::Complex64;

/// Neumaier-compensated accumulator for `f64` terms.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Componentwise compensated accumulator for complex terms.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.total(), self.im.total())
    }
}
