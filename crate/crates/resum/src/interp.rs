//! Monotone cubic (Fritsch–Carlson) interpolation on sorted grids.
//!
//! Used for the memoized dual-weight table, kernel caches and the boundary
//! height profile, all of which are smooth monotone-ish curves sampled on
//! log-spaced grids where overshoot-free interpolation matters.

/// Hermite interpolant with Fritsch–Carlson limited slopes.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` must be strictly increasing and have at least 2 entries.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Option<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return None;
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return None;
        }
        let n = xs.len();
        let mut delta = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            delta.push((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]));
        }
        let mut ds = vec![0.0; n];
        ds[0] = delta[0];
        ds[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                ds[i] = 0.0;
            } else {
                // Weighted harmonic mean keeps the interpolant monotone.
                let w1 = 2.0 * (xs[i + 1] - xs[i]) + (xs[i] - xs[i - 1]);
                let w2 = (xs[i + 1] - xs[i]) + 2.0 * (xs[i] - xs[i - 1]);
                ds[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        // Clamp endpoint slopes (Fritsch–Carlson condition).
        for i in [0usize, n - 1] {
            let d = if i == 0 { delta[0] } else { delta[n - 2] };
            if ds[i] * d <= 0.0 {
                ds[i] = 0.0;
            } else if ds[i].abs() > 3.0 * d.abs() {
                ds[i] = 3.0 * d;
            }
        }
        Some(MonotoneCubic { xs, ys, ds })
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// None outside the grid range.
    pub fn eval(&self, x: f64) -> Option<f64> {
        if x < self.x_min() || x > self.x_max() {
            return None;
        }
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(h00 * self.ys[i] + h10 * h * self.ds[i] + h01 * self.ys[i + 1] + h11 * h * self.ds[i + 1])
    }

    /// Evaluate, clamping the argument into the grid range.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        self.eval(x.clamp(self.x_min(), self.x_max())).unwrap()
    }

    /// Derivative dy/dx at x (same Hermite segment differentiated).
    pub fn derivative(&self, x: f64) -> Option<f64> {
        if x < self.x_min() || x > self.x_max() {
            return None;
        }
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let dh00 = (6.0 * t * t - 6.0 * t) / h;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = (-6.0 * t * t + 6.0 * t) / h;
        let dh11 = 3.0 * t * t - 2.0 * t;
        Some(dh00 * self.ys[i] + dh10 * self.ds[i] + dh01 * self.ys[i + 1] + dh11 * self.ds[i + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_linear_data() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        for x in [0.0, 0.37, 4.99, 9.0] {
            assert!((c.eval(x).unwrap() - (3.0 * x - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn stays_monotone_on_step_like_data() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![0.0, 0.0, 1.0, 1.0, 1.0];
        let c = MonotoneCubic::new(xs, ys).unwrap();
        let mut prev = -1e-9;
        for k in 0..=400 {
            let v = c.eval(4.0 * k as f64 / 400.0).unwrap();
            assert!(v >= prev - 1e-12, "overshoot at {k}");
            prev = v;
        }
    }

    #[test]
    fn accurate_on_smooth_function() {
        let xs: Vec<f64> = (0..=64).map(|i| i as f64 / 8.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (0.7 * x).sin() + 2.0 * x).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        for k in 1..100 {
            let x = 8.0 * k as f64 / 100.0;
            let exact = (0.7 * x).sin() + 2.0 * x;
            assert!((c.eval(x).unwrap() - exact).abs() < 2e-4);
        }
    }

    #[test]
    fn out_of_range_is_none() {
        let c = MonotoneCubic::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(c.eval(-0.1).is_none());
        assert!(c.eval(1.1).is_none());
    }
}
