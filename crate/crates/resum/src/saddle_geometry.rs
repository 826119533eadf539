//! Saddle points, growth profiles, and integration contours.
//!
//! The saddle equation G'(s) = log z (with G = log gamma) controls every
//! asymptotic statement in the crate: kernel decay rates, entire-function
//! growth, and the geometry of the summation sector. This module hosts
//!
//!   * a two-stage saddle solver (bisection on the positive ray, then damped
//!     Newton in the complex plane) with the public validity gate rho >= rho0;
//!   * the Legendre growth profile Lambda(r) = sup_{x>=1} x log(r/(x L(x)))
//!     and its discrete (integer-index) counterpart;
//!   * the boundary modulus profile H(psi) of the natural summation domain,
//!     tabulated on the solved branch and extended by the documented
//!     extrapolation/blend rules;
//!   * complex integration contours (rays, arcs, boundary arcs) carrying
//!     precomputed quadrature weights, with CSV export.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quadrature::clenshaw_curtis;
use crate::weights::Weight;

/// A solved saddle point of G'(s) = log z.
#[derive(Debug, Clone)]
pub struct SaddlePoint {
    pub s: Complex64,
    /// Principal log of the target point z.
    pub log_z: Complex64,
    /// G''(s) at the saddle (curvature; sets the Gaussian width 1/sqrt(G'')).
    pub g_second: Complex64,
    /// |G'(s) - log z| at exit.
    pub residual: f64,
    pub iterations: u32,
}

/// Solve G'(s) = log z and enforce the asymptotic-validity gate |s| >= rho0.
pub fn solve_saddle(weight: &Weight, z: Complex64) -> Result<SaddlePoint> {
    let sp = solve_saddle_relaxed(weight, z)?;
    let rho0 = weight.rho0();
    if sp.s.norm() < rho0 {
        return Err(Error::BelowThreshold(format!(
            "saddle |s| = {:.6e} below the validity threshold rho0 = {rho0:.1e}",
            sp.s.norm()
        )));
    }
    Ok(sp)
}

/// G'(e^w) evaluated through the overflow-proof log-argument path.
fn g_prime_log_arg(weight: &Weight, w: Complex64) -> Result<Complex64> {
    Ok(weight.log_l_log_arg(w)? + weight.epsilon_log_arg(w)?)
}

/// Saddle solve without the rho0 gate (internal evaluators clamp instead).
pub fn solve_saddle_relaxed(weight: &Weight, z: Complex64) -> Result<SaddlePoint> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("saddle target z = 0".into()));
    }
    let log_z = Complex64::new(z.norm().ln(), z.arg());

    // Stage 1: bracket the modulus equation Re G'(rho) = ln|z| on the ray,
    // working in t = ln rho so arguments up to e^700 stay representable.
    let g_real = |t: f64| -> Result<f64> {
        let v = g_prime_log_arg(weight, Complex64::new(t, 0.0))?.re;
        if !v.is_finite() {
            return Err(Error::Precondition(format!(
                "weight derivative not finite at ln rho = {t}"
            )));
        }
        Ok(v - log_z.re)
    };
    let mut lo = -30.0_f64;
    let mut hi = 700.0_f64;
    if g_real(lo)? > 0.0 {
        return Err(Error::BelowThreshold(format!(
            "|z| = {:.3e} puts the saddle below e^-30",
            z.norm()
        )));
    }
    if g_real(hi)? < 0.0 {
        return Err(Error::SaddleFailure(format!(
            "|z| = {:.3e} puts the saddle beyond e^700",
            z.norm()
        )));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if g_real(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_ray = 0.5 * (lo + hi);

    // Stage 2: damped Newton in the plane. Moduli beyond e^250 use log
    // coordinates throughout (the direct formulas overflow f64 up there).
    let theta_max = 0.95 * weight.sector_half_angle();
    if t_ray <= 250.0 {
        newton_plane(weight, t_ray.exp(), log_z, theta_max, z)
    } else {
        newton_log_arg(weight, t_ray, log_z, theta_max, z)
    }
}

/// Newton iteration on phi(s) = G'(s) - log z with step halving.
fn newton_plane(
    weight: &Weight,
    rho: f64,
    log_z: Complex64,
    theta_max: f64,
    z: Complex64,
) -> Result<SaddlePoint> {
    // Initial angle from d Im G'(rho e^{i theta})/d theta = Re(s G''(s)).
    let s_real = Complex64::new(rho, 0.0);
    let curve = (s_real * weight.g_second(s_real)?).re;
    let theta0 = if curve.abs() > 1e-12 {
        (log_z.im / curve).clamp(-theta_max, theta_max)
    } else {
        0.0
    };
    let mut s = Complex64::from_polar(rho, theta0);
    let mut phi = weight.g_prime(s)? - log_z;
    let tol = 1e-12 * (1.0 + log_z.norm());
    let mut iterations = 0u32;
    while phi.norm() > tol && iterations < 200 {
        iterations += 1;
        let step = phi / weight.g_second(s)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-8 {
            let mut cand = s - lambda * step;
            // Keep the iterate inside the sector (rotate back onto the rim).
            if cand.arg().abs() > theta_max {
                cand = Complex64::from_polar(cand.norm(), theta_max.copysign(cand.arg()));
            }
            if let Ok(gp) = weight.g_prime(cand) {
                let cand_phi = gp - log_z;
                if cand_phi.norm() < phi.norm() {
                    s = cand;
                    phi = cand_phi;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    finish_saddle(phi.norm(), iterations, s, log_z, weight.g_second(s)?, z)
}

/// Newton iteration in w = log s for saddles with huge modulus. The Jacobian
/// d G'(e^w)/dw = s G''(s) is taken by central differences of the log-arg
/// evaluation, which stays finite at any scale.
fn newton_log_arg(
    weight: &Weight,
    t_ray: f64,
    log_z: Complex64,
    theta_max: f64,
    z: Complex64,
) -> Result<SaddlePoint> {
    let eps0 = weight.epsilon_log_arg(Complex64::new(t_ray, 0.0))?.re;
    let theta0 = if eps0.abs() > 1e-12 {
        (log_z.im / eps0).clamp(-theta_max, theta_max)
    } else {
        0.0
    };
    let mut w = Complex64::new(t_ray, theta0);
    let mut phi = g_prime_log_arg(weight, w)? - log_z;
    let tol = 1e-12 * (1.0 + log_z.norm());
    let h = 1e-5;
    let mut iterations = 0u32;
    while phi.norm() > tol && iterations < 200 {
        iterations += 1;
        let d_re = (g_prime_log_arg(weight, w + h)? - g_prime_log_arg(weight, w - h)?) / (2.0 * h);
        if d_re.norm() < 1e-300 {
            break;
        }
        let step = phi / d_re;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-8 {
            let mut cand = w - lambda * step;
            cand.im = cand.im.clamp(-theta_max, theta_max);
            if let Ok(gp) = g_prime_log_arg(weight, cand) {
                let cand_phi = gp - log_z;
                if cand_phi.norm() < phi.norm() {
                    w = cand;
                    phi = cand_phi;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let s = w.exp();
    // s G''(s) by the same central difference; G'' itself may underflow to 0
    // at these scales, which downstream users treat as "flat".
    let sg2 = (g_prime_log_arg(weight, w + h)? - g_prime_log_arg(weight, w - h)?) / (2.0 * h);
    finish_saddle(phi.norm(), iterations, s, log_z, sg2 / s, z)
}

fn finish_saddle(
    residual: f64,
    iterations: u32,
    s: Complex64,
    log_z: Complex64,
    g_second: Complex64,
    z: Complex64,
) -> Result<SaddlePoint> {
    // NaN-safe: any non-finite residual must fail this comparison.
    if !(residual <= 1e-6 * (1.0 + log_z.norm())) {
        return Err(Error::SaddleFailure(format!(
            "Newton stalled at residual {residual:.3e} after {iterations} iterations (z = {z})"
        )));
    }
    Ok(SaddlePoint { s, log_z, g_second, residual, iterations })
}

// ----------------------------------------------------------------------
// growth profiles
// ----------------------------------------------------------------------

/// Value and maximizer of the Legendre growth profile.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LegendreProfile {
    /// Lambda(r) = max(0, sup_{x >= 1} x log(r / (x L(x)))).
    pub value: f64,
    /// The maximizing x (1 when the supremum sits on the boundary).
    pub maximizer: f64,
}

/// Legendre growth profile of the weight at radius r.
pub fn legendre_profile(weight: &Weight, r: f64) -> Result<LegendreProfile> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("profile radius r = {r}")));
    }
    legendre_profile_ln(weight, r.ln())
}

/// Same profile with the radius supplied as ln r (usable for huge radii).
pub fn legendre_profile_ln(weight: &Weight, ln_r: f64) -> Result<LegendreProfile> {
    // Objective f(x) = x ln r - x ln x - x log L(x); stationarity reads
    // psi(x) = ln r - ln x - 1 - log L(x) - eps(x) = 0 with psi decreasing.
    let psi = |t: f64| -> Result<f64> {
        let x = t.exp();
        let s = Complex64::new(x, 0.0);
        Ok(ln_r - t - 1.0 - weight.log_l_real(x)? - weight.epsilon(s)?.re)
    };
    if psi(0.0)? <= 0.0 {
        let value = (ln_r - weight.log_l_real(1.0)?).max(0.0);
        return Ok(LegendreProfile { value, maximizer: 1.0 });
    }
    let mut lo = 0.0_f64;
    let mut hi = 700.0_f64;
    if psi(hi)? > 0.0 {
        return Err(Error::Domain(format!(
            "radius exp({ln_r:.3e}) beyond the supported profile range"
        )));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if psi(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let x = t.exp();
    let value = x * (ln_r - t - weight.log_l_real(x)?);
    Ok(LegendreProfile { value: value.max(0.0), maximizer: x })
}

/// Integer-grid counterpart of the Legendre profile: the same objective
/// n log(r / (n L(n))) maximized over integers n >= 1 (clamped at zero),
/// returned with the maximizing index (as f64; indices can exceed u64).
pub fn discrete_log_mu(weight: &Weight, r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("envelope radius r = {r}")));
    }
    let ln_r = r.ln();
    let f = |n: f64| -> Result<f64> {
        Ok(n * (ln_r - n.ln() - weight.log_l_real(n)?))
    };
    // The objective is concave; bracket its continuous maximizer and compare
    // the two neighbouring integers.
    let cont = legendre_profile(weight, r)?;
    let n_lo = cont.maximizer.floor().max(1.0);
    let mut best = (0.0_f64, 1.0_f64); // the empty-term value: clamp at zero
    for n in [n_lo, n_lo + 1.0] {
        let v = f(n)?;
        if v > best.0 {
            best = (v, n);
        }
    }
    Ok(best)
}

// ----------------------------------------------------------------------
// boundary modulus profile H(psi)
// ----------------------------------------------------------------------

/// Boundary modulus of the natural summation domain as a function of the
/// phase psi in (0, pi), symmetric about pi/2, returned on the log log scale
/// (the modulus itself overflows f64 near the real axis).
#[derive(Debug, Clone)]
pub struct HProfile {
    /// Ascending-psi table on the solved branch [psi(rho_hi), psi(rho0)].
    table: MonotoneCubic,
    psi_lo: f64,
    psi_hi: f64,
    /// loglog H = c / psi extrapolation constant below the table.
    c_lo: f64,
    /// Hermite blend on [psi_hi, pi/2]: value/slope at both ends.
    blend: (f64, f64, f64, f64),
}

impl HProfile {
    /// Tabulate Im G'(i rho) against Re G'(i rho) over rho in [rho0, 1e12].
    pub fn build(weight: &Weight) -> Result<HProfile> {
        let rho_lo = weight.rho0();
        let rho_hi: f64 = 1.0e12;
        let n = 240;
        let mut psis = Vec::with_capacity(n + 1);
        let mut llh = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let rho = rho_lo * (rho_hi / rho_lo).powf(i as f64 / n as f64);
            let gp = weight.g_prime(Complex64::new(0.0, rho))?;
            if gp.re <= 1.0 {
                return Err(Error::Precondition(format!(
                    "boundary modulus too small at rho = {rho:.3e} (ln H = {:.3})",
                    gp.re
                )));
            }
            if gp.im <= 0.0 {
                return Err(Error::Precondition(format!(
                    "boundary phase not positive at rho = {rho:.3e}"
                )));
            }
            psis.push(gp.im);
            llh.push(gp.re.ln());
        }
        // psi decreases along rho; flip to ascending for interpolation.
        psis.reverse();
        llh.reverse();
        for w in psis.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Precondition(
                    "boundary phase is not monotone along the imaginary ray".into(),
                ));
            }
        }
        let psi_lo = psis[0];
        let psi_hi = *psis.last().unwrap();
        let c_lo = psi_lo * llh[0];
        let table = MonotoneCubic::new(psis, llh.clone())
            .ok_or_else(|| Error::Precondition("degenerate boundary table".into()))?;
        // Blend toward pi/2 where the modulus settles at H(psi_hi)/e.
        let y0 = *llh.last().unwrap();
        let ln_h_mid = y0.exp() - 1.0;
        if ln_h_mid <= 1.0 {
            return Err(Error::Precondition("boundary modulus too small for the blend".into()));
        }
        let y1 = ln_h_mid.ln();
        // Clamp the inherited slope so the Hermite segment stays monotone
        // (|m0| <= 3 |secant|, same sign), preventing overshoot.
        let h = std::f64::consts::FRAC_PI_2 - psi_hi;
        let secant = (y1 - y0) / h;
        let m0 = table.derivative(psi_hi * (1.0 - 1e-9)).unwrap_or(0.0);
        let m0 = if secant < 0.0 {
            m0.clamp(3.0 * secant, 0.0)
        } else {
            m0.clamp(0.0, 3.0 * secant)
        };
        let blend = (y0, m0, y1, 0.0);
        Ok(HProfile { table, psi_lo, psi_hi, c_lo, blend })
    }

    /// log log H(psi); folds psi about pi/2.
    pub fn log_log_h(&self, psi: f64) -> Result<f64> {
        if !(psi > 0.0 && psi < std::f64::consts::PI) {
            return Err(Error::Domain(format!("phase psi = {psi} outside (0, pi)")));
        }
        let p = psi.min(std::f64::consts::PI - psi);
        if p < self.psi_lo {
            return Ok(self.c_lo / p);
        }
        if p <= self.psi_hi {
            return Ok(self.table.eval_clamped(p));
        }
        // Cubic Hermite on [psi_hi, pi/2] with a flat landing.
        let (y0, m0, y1, m1) = self.blend;
        let h = std::f64::consts::FRAC_PI_2 - self.psi_hi;
        let u = ((p - self.psi_hi) / h).clamp(0.0, 1.0);
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        Ok(h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1)
    }

    /// Edge of the tabulated branch (largest reliable psi before the blend).
    pub fn tabulated_range(&self) -> (f64, f64) {
        (self.psi_lo, self.psi_hi)
    }

    /// CSV rows "psi,loglog_h" over a default export grid.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("psi,loglog_h\n");
        let n = 200;
        for i in 1..n {
            let psi = std::f64::consts::PI * i as f64 / n as f64;
            if let Ok(v) = self.log_log_h(psi) {
                out.push_str(&format!("{psi:.8},{v:.10e}\n"));
            }
        }
        out
    }
}

// ----------------------------------------------------------------------
// contours
// ----------------------------------------------------------------------

/// A quadrature-ready contour: nodes with complex weights absorbing dz.
#[derive(Debug, Clone, Default)]
pub struct Contour {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    pub segment_ids: Vec<u32>,
}

impl Contour {
    /// Integral of f along the contour.
    pub fn integrate<F: FnMut(Complex64) -> Complex64>(&self, mut f: F) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (z, w) in self.nodes.iter().zip(self.weights.iter()) {
            acc += *w * f(*z);
        }
        acc
    }

    /// Append another contour as a new run of segments.
    pub fn extend_with(&mut self, other: Contour) {
        let offset = self.segment_ids.iter().copied().max().map_or(0, |m| m + 1);
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
        self.segment_ids.extend(other.segment_ids.into_iter().map(|i| i + offset));
    }

    /// CSV rows "re,im,weight_re,weight_im,segment_id".
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,weight_re,weight_im,segment_id\n");
        for ((z, w), id) in self.nodes.iter().zip(self.weights.iter()).zip(&self.segment_ids) {
            out.push_str(&format!("{:.12e},{:.12e},{:.12e},{:.12e},{id}\n", z.re, z.im, w.re, w.im));
        }
        out
    }
}

/// Ray from (near) the origin to r_max * e^{i angle}, log-spaced with
/// per-decade Clenshaw-Curtis panels. The innermost decade starts at
/// r_max * 10^-decades.
pub fn ray_contour(angle: f64, r_max: f64, decades: u32, pts_per_decade: usize) -> Contour {
    let dir = Complex64::from_polar(1.0, angle);
    let (nodes, wts) = clenshaw_curtis(pts_per_decade.max(4));
    let mut c = Contour::default();
    let ln10 = std::f64::consts::LN_10;
    for d in 0..decades {
        let ln_hi = r_max.ln() - ln10 * d as f64;
        let ln_lo = ln_hi - ln10;
        let mid = 0.5 * (ln_lo + ln_hi);
        let half = 0.5 * (ln_hi - ln_lo);
        for (x, w) in nodes.iter().zip(wts.iter()) {
            let r = (mid + half * x).exp();
            let z = r * dir;
            // dz = z d(ln r) along the ray.
            c.nodes.push(z);
            c.weights.push(z * (w * half));
            c.segment_ids.push(d);
        }
    }
    c
}

/// Circular arc z = R e^{i theta}, theta from lo to hi.
pub fn arc_contour(radius: f64, theta_lo: f64, theta_hi: f64, n: usize) -> Contour {
    let (nodes, wts) = clenshaw_curtis(n.max(4));
    let mid = 0.5 * (theta_lo + theta_hi);
    let half = 0.5 * (theta_hi - theta_lo);
    let mut c = Contour::default();
    for (x, w) in nodes.iter().zip(wts.iter()) {
        let th = mid + half * x;
        let z = Complex64::from_polar(radius, th);
        // dz = i z d(theta)
        c.nodes.push(z);
        c.weights.push(Complex64::new(0.0, 1.0) * z * (w * half));
        c.segment_ids.push(0);
    }
    c
}

/// Straight segment from a to b.
pub fn segment_contour(a: Complex64, b: Complex64, n: usize) -> Contour {
    let (nodes, wts) = clenshaw_curtis(n.max(4));
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut c = Contour::default();
    for (x, w) in nodes.iter().zip(wts.iter()) {
        c.nodes.push(mid + half * x);
        c.weights.push(half * *w);
        c.segment_ids.push(0);
    }
    c
}

/// Upper/lower boundary arcs of the natural summation domain: the curves
/// z(rho) = exp(G'(i rho)) and their conjugates, for rho in [rho_lo, rho_hi],
/// with dz = z * i rho G''(i rho) d(ln rho).
pub fn boundary_arcs(
    weight: &Weight,
    rho_lo: f64,
    rho_hi: f64,
    pts_per_decade: usize,
) -> Result<(Contour, Contour)> {
    let decades = (rho_hi / rho_lo).log10().ceil().max(1.0) as u32;
    let (nodes, wts) = clenshaw_curtis(pts_per_decade.max(4));
    let mut upper = Contour::default();
    let ln10 = (rho_hi / rho_lo).ln() / decades as f64;
    for d in 0..decades {
        let ln_lo = rho_lo.ln() + ln10 * d as f64;
        let mid = ln_lo + 0.5 * ln10;
        let half = 0.5 * ln10;
        for (x, w) in nodes.iter().zip(wts.iter()) {
            let rho = (mid + half * x).exp();
            let irho = Complex64::new(0.0, rho);
            let z = weight.g_prime(irho)?.exp();
            let dz = z * Complex64::new(0.0, 1.0) * irho * weight.g_second(irho)?;
            upper.nodes.push(z);
            upper.weights.push(dz * (w * half));
            upper.segment_ids.push(d);
        }
    }
    let lower = Contour {
        nodes: upper.nodes.iter().map(|z| z.conj()).collect(),
        weights: upper.weights.iter().map(|w| w.conj()).collect(),
        segment_ids: upper.segment_ids.clone(),
    };
    Ok((upper, lower))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_weight() -> Weight {
        Weight::denjoy(0.0, &[(1, 1.0)]).unwrap()
    }

    #[test]
    fn factorial_saddle_matches_digamma_inverse() {
        // digamma(s) = 1 has its root near s = 3.203; frozen by bisection on
        // the digamma itself (independent of the Newton path under test).
        let w = Weight::factorial();
        let z = Complex64::new(std::f64::consts::E, 0.0);
        let sp = solve_saddle_relaxed(&w, z).unwrap();
        assert!(sp.residual < 1e-10);
        let mut lo = 2.0;
        let mut hi = 5.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if crate::gammafn::digamma_real(mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((sp.s.re - 0.5 * (lo + hi)).abs() < 1e-9);
        assert!(sp.s.im.abs() < 1e-12);
        // The public gate rejects this small saddle.
        assert!(matches!(solve_saddle(&w, z), Err(Error::BelowThreshold(_))));
    }

    #[test]
    fn log_weight_saddle_is_deep_and_accurate() {
        let w = log_weight();
        let z = Complex64::new(20.0, 0.0);
        let sp = solve_saddle(&w, z).unwrap();
        // G'(rho) ~ lnln rho = ln 20 => rho ~ exp(exp(3 - eps)).
        assert!(sp.s.re > 1e6, "saddle at {:?}", sp.s);
        assert!(sp.residual < 1e-10);
    }

    #[test]
    fn complex_saddles_conjugate_symmetrically() {
        // Factorial weight: the saddle tracks the digamma inverse and any
        // phase in the sector is reachable.
        let w = Weight::factorial();
        let z = Complex64::new(8.0, 5.0);
        let a = solve_saddle_relaxed(&w, z).unwrap();
        let b = solve_saddle_relaxed(&w, z.conj()).unwrap();
        assert!((a.s - b.s.conj()).norm() < 1e-8 * a.s.norm());
        assert!(a.residual < 1e-9 && b.residual < 1e-9);
        assert!(a.s.im.abs() > 0.1);
        // Slowly varying weight: small phases map to O(1) saddle angles
        // (theta ~ arg z / eps); stay well inside the sector.
        let w = log_weight();
        let z = Complex64::from_polar(12.0, 0.1);
        let a = solve_saddle(&w, z).unwrap();
        let b = solve_saddle(&w, z.conj()).unwrap();
        assert!((a.s - b.s.conj()).norm() < 1e-8 * a.s.norm());
        assert!(a.residual < 1e-9);
        assert!(a.s.arg() > 0.5, "saddle angle {:.3}", a.s.arg());
    }

    #[test]
    fn deep_saddles_solved_in_log_coordinates() {
        // |z| = 300 puts the saddle near e^299 for the log weight; the direct
        // formulas overflow there, the log-argument branch must not.
        let w = log_weight();
        let sp = solve_saddle(&w, Complex64::new(300.0, 0.0)).unwrap();
        let t = sp.s.re.ln();
        assert!((290.0..320.0).contains(&t), "ln rho = {t}");
        assert!(sp.residual < 1e-9);
        // Same with a small phase.
        let sp = solve_saddle(&w, Complex64::from_polar(300.0, 3e-3)).unwrap();
        assert!(sp.residual < 1e-9);
        assert!(sp.s.im > 0.0);
        let back = g_prime_log_arg(&w, sp.s.ln()).unwrap();
        assert!((back - sp.log_z).norm() < 1e-9);
    }

    #[test]
    fn saddle_out_of_range_reports() {
        let w = log_weight();
        assert!(matches!(
            solve_saddle_relaxed(&w, Complex64::new(1e-9, 0.0)),
            Err(Error::BelowThreshold(_))
        ));
        // ln ln rho would have to reach ln 4000, i.e. rho ~ e^3600.
        assert!(matches!(
            solve_saddle_relaxed(&w, Complex64::new(4000.0, 0.0)),
            Err(Error::SaddleFailure(_))
        ));
        // A phase outside the natural domain has no saddle in the sector.
        assert!(solve_saddle_relaxed(&w, Complex64::new(8.0, 5.0)).is_err());
    }

    #[test]
    fn profile_of_constant_weight_is_linear() {
        // L == c: Lambda(r) = r/(c e), maximizer r/(c e).
        let w = Weight::constant_level(2.0).unwrap();
        let r = 100.0;
        let p = legendre_profile(&w, r).unwrap();
        let expect = r / (2.0 * std::f64::consts::E);
        assert!((p.value / expect - 1.0).abs() < 1e-10, "{p:?}");
        assert!((p.maximizer / expect - 1.0).abs() < 1e-8);
    }

    #[test]
    fn profile_clamps_at_small_radius() {
        let w = log_weight();
        let p = legendre_profile(&w, 1.0).unwrap();
        assert_eq!(p.value, 0.0);
        assert_eq!(p.maximizer, 1.0);
        let p = legendre_profile(&w, 0.5).unwrap();
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn profile_tracks_radius_over_slowly_varying_factor() {
        let w = log_weight();
        let a = legendre_profile(&w, 1e3).unwrap();
        let b = legendre_profile(&w, 1e6).unwrap();
        assert!(a.value > 0.0);
        // Lambda(r) ~ r/(e ln r) up to slowly varying corrections: a 1000x
        // radius step scales the value by a bit less than 1000, but far more
        // than any power r^c with c < 1 would allow over this range.
        let ratio = b.value / a.value;
        assert!(ratio > 100.0 && ratio < 1000.0, "{} {}", a.value, b.value);
        assert!(b.maximizer > a.maximizer);
    }

    #[test]
    fn discrete_envelope_brackets_continuous_profile() {
        let w = log_weight();
        for r in [5.0, 1e2, 1e5] {
            let cont = legendre_profile(&w, r).unwrap();
            let (disc, n_star) = discrete_log_mu(&w, r).unwrap();
            // Restricting the same objective to integers costs at most a
            // slowly varying additive gap.
            let gap = 2.0 * w.log_l_real(cont.maximizer.max(1.0)).unwrap() + 2.0;
            assert!(disc <= cont.value + 1e-9, "r={r}: {disc} vs {cont:?}");
            assert!(disc >= cont.value - gap, "r={r}: {disc} vs {cont:?}");
            assert!(n_star >= 1.0);
        }
    }

    #[test]
    fn h_profile_is_monotone_and_symmetric() {
        let w = log_weight();
        let h = HProfile::build(&w).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..40 {
            let psi = std::f64::consts::FRAC_PI_2 * i as f64 / 40.0;
            let v = h.log_log_h(psi).unwrap();
            assert!(v < prev + 1e-12, "not decreasing at psi = {psi}: {v} vs {prev}");
            prev = v;
        }
        for psi in [0.3, 1.0, 1.5] {
            let a = h.log_log_h(psi).unwrap();
            let b = h.log_log_h(std::f64::consts::PI - psi).unwrap();
            // pi - (pi - psi) differs from psi in the last bit; fold-exactness
            // up to that rounding is all we can ask.
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
        }
        assert!(h.log_log_h(0.0).is_err());
        assert!(h.log_log_h(std::f64::consts::PI).is_err());
    }

    #[test]
    fn h_profile_extrapolation_continuous_at_edges() {
        let w = log_weight();
        let h = HProfile::build(&w).unwrap();
        let (lo, hi) = h.tabulated_range();
        let below = h.log_log_h(lo * (1.0 - 1e-6)).unwrap();
        let at = h.log_log_h(lo * (1.0 + 1e-6)).unwrap();
        assert!((below - at).abs() < 1e-3 * at.abs());
        let a = h.log_log_h(hi * (1.0 - 1e-6)).unwrap();
        let b = h.log_log_h(hi * (1.0 + 1e-6)).unwrap();
        assert!((a - b).abs() < 1e-3 * a.abs());
    }

    #[test]
    fn ray_contour_integrates_exponential() {
        // int_0^inf e^-z dz = 1 along the positive ray...
        let ray = ray_contour(0.0, 60.0, 16, 24);
        let v = ray.integrate(|z| (-z).exp());
        assert!((v.re - 1.0).abs() < 1e-9, "{v}");
        assert!(v.im.abs() < 1e-12);
        // ...and along a rotated ray inside the decay sector (Cauchy).
        let ray = ray_contour(0.4, 60.0, 16, 24);
        let v = ray.integrate(|z| (-z).exp());
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-8, "{v}");
    }

    #[test]
    fn arc_and_segment_close_a_cauchy_loop() {
        // Integrate an entire function around ray-up / arc / ray-down: zero.
        let r = 3.0;
        let f = |z: Complex64| (z * z + 1.0).exp();
        let up = segment_contour(Complex64::new(0.0, 0.0), Complex64::from_polar(r, 0.5), 64);
        let arc = arc_contour(r, 0.5, 0.0, 64);
        let back = segment_contour(Complex64::new(r, 0.0), Complex64::new(0.0, 0.0), 64);
        let total = up.integrate(f) + arc.integrate(f) + back.integrate(f);
        assert!(total.norm() < 1e-8, "{total}");
    }

    #[test]
    fn boundary_arcs_conjugate_and_export() {
        let w = log_weight();
        let (up, down) = boundary_arcs(&w, 1e3, 1e6, 16).unwrap();
        assert_eq!(up.nodes.len(), down.nodes.len());
        for (a, b) in up.nodes.iter().zip(down.nodes.iter()) {
            assert!((a.conj() - b).norm() < 1e-12 * a.norm());
            assert!(a.im > 0.0);
        }
        let csv = up.to_csv();
        assert!(csv.starts_with("re,im,weight_re,weight_im,segment_id\n"));
        assert!(csv.lines().count() == up.nodes.len() + 1);
    }

    #[test]
    fn contour_extension_renumbers_segments() {
        let mut a = segment_contour(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), 8);
        let b = segment_contour(Complex64::new(1.0, 0.0), Complex64::new(1.0, 1.0), 8);
        a.extend_with(b);
        assert_eq!(*a.segment_ids.iter().max().unwrap(), 1);
        let v = a.integrate(|_| Complex64::new(1.0, 0.0));
        assert!((v - Complex64::new(1.0, 1.0)).norm() < 1e-12);
    }
}
