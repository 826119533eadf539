//! Log-magnitude / phase arithmetic.
//!
//! All quantities that can leave the f64 exponent range (weight powers,
//! kernel values, entire-function values, series terms) are carried as
//! `exp(log_mag) * exp(i*phase)` pairs. Sums are accumulated through
//! [`LogSum`], which keeps a running rescale so that doubly exponential
//! dynamic ranges never overflow and cancellation stays measurable.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex number stored as `exp(log_mag + i*phase)`.
///
/// `log_mag = -inf` encodes exact zero; `phase` is kept in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_mag: f64,
    pub phase: f64,
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_phase(p: f64) -> f64 {
    if !p.is_finite() {
        return 0.0;
    }
    let mut x = p.rem_euclid(2.0 * std::f64::consts::PI);
    if x > std::f64::consts::PI {
        x -= 2.0 * std::f64::consts::PI;
    }
    x
}

impl LogComplex {
    pub fn new(log_mag: f64, phase: f64) -> Self {
        LogComplex { log_mag, phase: wrap_phase(phase) }
    }

    pub fn zero() -> Self {
        LogComplex { log_mag: f64::NEG_INFINITY, phase: 0.0 }
    }

    pub fn one() -> Self {
        LogComplex { log_mag: 0.0, phase: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        LogComplex { log_mag: z.norm().ln(), phase: z.arg() }
    }

    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            Self::zero()
        } else if x > 0.0 {
            LogComplex { log_mag: x.ln(), phase: 0.0 }
        } else {
            LogComplex { log_mag: (-x).ln(), phase: std::f64::consts::PI }
        }
    }

    /// Exponent of the stored value; overflows to +-inf outside f64 range.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_mag.exp(), self.phase)
    }

    /// exp(log_mag - shift) * e^{i phase}: the value divided by e^shift.
    pub fn to_complex_shifted(&self, shift: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar((self.log_mag - shift).exp(), self.phase)
    }

    pub fn mul(&self, other: &LogComplex) -> LogComplex {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        LogComplex::new(self.log_mag + other.log_mag, self.phase + other.phase)
    }

    pub fn div(&self, other: &LogComplex) -> LogComplex {
        LogComplex::new(self.log_mag - other.log_mag, self.phase - other.phase)
    }

    pub fn scale_log(&self, dlog: f64) -> LogComplex {
        if self.is_zero() {
            return *self;
        }
        LogComplex { log_mag: self.log_mag + dlog, phase: self.phase }
    }

    pub fn conj(&self) -> LogComplex {
        LogComplex { log_mag: self.log_mag, phase: -self.phase }
    }

    /// Real part of the represented value, via shifted exponentiation.
    pub fn re_shifted(&self, shift: f64) -> f64 {
        self.to_complex_shifted(shift).re
    }
}

/// Streaming compensated sum of [`LogComplex`] terms.
///
/// Keeps the accumulator scaled by the largest term seen so far, so the sum
/// of terms spanning thousands of orders of magnitude is exact to f64 in the
/// scaled frame. `max_term_log` feeds cancellation/roundoff diagnostics.
#[derive(Debug, Clone)]
pub struct LogSum {
    scale: f64,
    acc: Complex64,
    max_term_log: f64,
    n_terms: usize,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        LogSum {
            scale: f64::NEG_INFINITY,
            acc: Complex64::new(0.0, 0.0),
            max_term_log: f64::NEG_INFINITY,
            n_terms: 0,
        }
    }

    pub fn add(&mut self, term: LogComplex) {
        if term.is_zero() {
            return;
        }
        self.n_terms += 1;
        if term.log_mag > self.max_term_log {
            self.max_term_log = term.log_mag;
        }
        if self.scale == f64::NEG_INFINITY {
            self.scale = term.log_mag;
            self.acc = Complex64::from_polar(1.0, term.phase);
            return;
        }
        if term.log_mag > self.scale + 1.0 {
            // Rescale so the new dominant term sits at O(1).
            let f = (self.scale - term.log_mag).exp();
            self.acc *= f;
            self.scale = term.log_mag;
            self.acc += Complex64::from_polar(1.0, term.phase);
        } else {
            self.acc += Complex64::from_polar((term.log_mag - self.scale).exp(), term.phase);
        }
    }

    pub fn add_complex_scaled(&mut self, v: Complex64, log_scale: f64) {
        if v == Complex64::new(0.0, 0.0) {
            return;
        }
        self.add(LogComplex::new(v.norm().ln() + log_scale, v.arg()));
    }

    pub fn value(&self) -> LogComplex {
        if self.scale == f64::NEG_INFINITY || self.acc.norm() == 0.0 {
            return LogComplex::zero();
        }
        LogComplex::new(self.scale + self.acc.norm().ln(), self.acc.arg())
    }

    /// Largest single term that entered the sum (log magnitude).
    pub fn max_term_log(&self) -> f64 {
        self.max_term_log
    }

    /// log of the absolute roundoff floor: eps * (largest term) * n. Phase
    /// errors of nearby terms are correlated, so accumulation is linear in
    /// the worst case, not square-root.
    pub fn roundoff_log(&self) -> f64 {
        if self.n_terms == 0 {
            return f64::NEG_INFINITY;
        }
        self.max_term_log + f64::EPSILON.ln() + (self.n_terms as f64).ln()
    }

    /// How many e-folds of cancellation occurred (0 = none).
    pub fn cancellation_log(&self) -> f64 {
        let v = self.value();
        if v.is_zero() {
            return f64::INFINITY;
        }
        (self.max_term_log - v.log_mag).max(0.0)
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_plain_numbers() {
        let mut s = LogSum::new();
        s.add(LogComplex::from_real(1.0));
        s.add(LogComplex::from_real(1.0));
        let v = s.value();
        assert!((v.to_complex().re - 2.0).abs() < 1e-14);
        assert!(v.to_complex().im.abs() < 1e-14);
    }

    #[test]
    fn huge_cancellation_is_tracked() {
        let mut s = LogSum::new();
        s.add(LogComplex::new(10.0, 0.0)); // e^10
        s.add(LogComplex::new(10.0, std::f64::consts::PI)); // -e^10
        s.add(LogComplex::from_real(1.0));
        let v = s.value();
        assert!((v.to_complex().re - 1.0).abs() < 1e-10);
        assert!(s.cancellation_log() > 9.0);
    }

    #[test]
    fn geometric_series() {
        let mut s = LogSum::new();
        for n in 0..200 {
            s.add(LogComplex::new((n as f64) * 0.5f64.ln(), 0.0));
        }
        assert!((s.value().to_complex().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dynamic_range_rescale() {
        // Terms climb from e^0 to e^5000: the largest must dominate exactly.
        let mut s = LogSum::new();
        for k in 0..=50 {
            s.add(LogComplex::new(100.0 * k as f64, 0.0));
        }
        let v = s.value();
        // sum = e^5000 * (1 + e^-100 + ...) ~ e^5000
        assert!((v.log_mag - 5000.0).abs() < 1e-10);
    }

    #[test]
    fn phase_wrapping() {
        let a = LogComplex::new(0.0, 3.0 * std::f64::consts::PI);
        assert!((a.phase - std::f64::consts::PI).abs() < 1e-12);
        let b = LogComplex::from_real(-2.0);
        assert!((b.to_complex().re + 2.0).abs() < 1e-14);
    }
}
