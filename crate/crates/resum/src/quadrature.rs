//! Adaptive quadrature and Clenshaw–Curtis rules.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tolerances and densities for the numerical integrators.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Relative tolerance for adaptive bisection (Richardson stopping rule).
    pub rel_tol: f64,
    /// Absolute floor below which contributions are accepted unconditionally.
    pub abs_floor: f64,
    /// Maximum bisection depth per panel.
    pub max_depth: u32,
    /// Node density for log-spaced grids (caches, contours).
    pub pts_per_decade: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rel_tol: 1e-8, abs_floor: 1e-300, max_depth: 40, pts_per_decade: 32 }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_err: f64,
    pub evals: usize,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    s: Complex64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive Simpson integration of a complex integrand over [a, b].
///
/// The stopping rule compares each panel's bisected estimate against the
/// unbisected one (Richardson difference / 15) relative to the running
/// magnitude of the whole integral.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> QuadResult
where
    F: FnMut(f64) -> Complex64,
{
    let mut evals = 0usize;
    let mut eval = |x: f64, evals: &mut usize| -> Complex64 {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    };

    let fa = eval(a, &mut evals);
    let m0 = 0.5 * (a + b);
    let fm = eval(m0, &mut evals);
    let fb = eval(b, &mut evals);
    let s0 = simpson(a, b, fa, fm, fb);

    let mut stack = vec![Panel { a, b, fa, fm, fb, s: s0, depth: 0 }];
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0f64;
    // Running magnitude estimate for the relative test; refined as panels land.
    let mut mag_est = s0.norm();
    let mut converged = true;

    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let ml = 0.5 * (p.a + m);
        let mr = 0.5 * (m + p.b);
        let fml = eval(ml, &mut evals);
        let fmr = eval(mr, &mut evals);
        let sl = simpson(p.a, m, p.fa, fml, p.fm);
        let sr = simpson(m, p.b, p.fm, fmr, p.fb);
        let s2 = sl + sr;
        let diff = (s2 - p.s).norm();
        let tol = (spec.rel_tol * mag_est).max(spec.abs_floor);
        // Panel tolerance shrinks with the square root of the panel count
        // implied by depth; plain proportional split is fine in practice.
        let scale = ((p.b - p.a) / (b - a)).max(1e-12);
        if diff <= 15.0 * tol * scale || p.depth >= spec.max_depth {
            if p.depth >= spec.max_depth && diff > 15.0 * tol * scale {
                converged = false;
            }
            let refined = s2 + (s2 - p.s) / 15.0;
            total += refined;
            err += diff / 15.0;
            mag_est = mag_est.max(total.norm());
        } else {
            stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: fml, fb: p.fm, s: sl, depth: p.depth + 1 });
            stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: fmr, fb: p.fb, s: sr, depth: p.depth + 1 });
        }
    }

    QuadResult { value: total, abs_err: err, evals, converged }
}

/// Clenshaw–Curtis nodes and weights with n+1 points on [-1, 1] (n even).
///
/// Exact for polynomials of degree <= n; nodes are cos(pi j / n), endpoints
/// included, ordered from +1 down to -1.
pub fn clenshaw_curtis(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2 && n % 2 == 0, "clenshaw_curtis needs even n >= 2");
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let theta = std::f64::consts::PI * j as f64 / nf;
        nodes.push(theta.cos());
        let mut sum = 1.0;
        for k in 1..=n / 2 {
            let beta = if k == n / 2 { 1.0 } else { 2.0 };
            sum -= beta * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
        }
        let c = if j == 0 || j == n { 1.0 } else { 2.0 };
        weights.push(c * sum / nf);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_on_cubics() {
        let spec = QuadratureSpec::default();
        let r = adaptive_simpson(|x| Complex64::new(x * x * x - 2.0 * x + 1.0, 0.0), -1.0, 3.0, &spec);
        // integral of x^3-2x+1 over [-1,3] = [x^4/4 - x^2 + x] = (81/4-9+3) - (1/4-1-1) = 16
        assert!((r.value.re - 16.0).abs() < 1e-10);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let spec = QuadratureSpec::default().with_rel_tol(1e-10);
        // integral of exp(-100 (x-0.3)^2) over R ~ sqrt(pi/100)
        let r = adaptive_simpson(
            |x| Complex64::new((-100.0 * (x - 0.3) * (x - 0.3)).exp(), 0.0),
            -20.0,
            20.0,
            &spec,
        );
        let exact = (std::f64::consts::PI / 100.0).sqrt();
        assert!((r.value.re - exact).abs() < 1e-10 * exact, "{} vs {exact}", r.value.re);
        assert!(r.converged);
    }

    #[test]
    fn complex_oscillatory() {
        let spec = QuadratureSpec::default().with_rel_tol(1e-10);
        // integral of exp(i w x) over [0, 1] = (exp(i w) - 1)/(i w)
        let w = 37.0;
        let r = adaptive_simpson(|x| Complex64::new(0.0, w * x).exp(), 0.0, 1.0, &spec);
        let exact = (Complex64::new(0.0, w).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((r.value - exact).norm() < 1e-9);
    }

    #[test]
    fn clenshaw_curtis_matches_simpson_small() {
        let (x, w) = clenshaw_curtis(2);
        assert_eq!(x.len(), 3);
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!((w[1] - 4.0 / 3.0).abs() < 1e-14);
        assert!((w[2] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn clenshaw_curtis_exact_for_polynomials() {
        let n = 16;
        let (x, w) = clenshaw_curtis(n);
        for deg in 0..=n {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-12, "deg {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn clenshaw_curtis_transcendental() {
        let (x, w) = clenshaw_curtis(32);
        let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.exp()).sum();
        let exact = std::f64::consts::E - 1.0 / std::f64::consts::E;
        assert!((q - exact).abs() < 1e-13);
    }
}
