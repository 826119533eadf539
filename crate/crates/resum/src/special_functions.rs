//! Kernel and entire-function evaluators.
//!
//! Two function families anchor the summation pipeline:
//!
//!   * the kernel K(t), recovered from the weight by an inverse Mellin
//!     integral so that its n-th moment equals gamma(n+1) exactly;
//!   * entire functions built from reciprocal weight coefficients
//!     (four kinds, see [`SeriesKind`]), evaluated by whichever route can
//!     actually promise the requested accuracy: plain series on the
//!     positive ray, direct complex summation while cancellation is
//!     affordable, a line-integral resummation everywhere else, and a
//!     flagged saddle asymptotic for very large arguments.
//!
//! Everything is carried in log-magnitude/phase form ([`LogComplex`]), so
//! values like exp(-1e6) or exp(1e8) remain first-class citizens.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gammafn::{digamma_complex, lgamma_complex, lgamma_real, trigamma_complex};
use crate::interp::MonotoneCubic;
use crate::logspace::{wrap_phase, LogComplex, LogSum};
use crate::quadrature::clenshaw_curtis;
use crate::saddle_geometry::solve_saddle_relaxed;
use crate::weights::Weight;

/// Stable log of sin(pi s) for any imaginary part (principal branch up to
/// the 2*pi*i ambiguity, which cancels in ratios of the kind we form).
fn log_sin_pi(s: Complex64) -> Complex64 {
    let ipi = Complex64::new(0.0, std::f64::consts::PI);
    if s.im >= 0.0 {
        // sin(pi s) = -e^{-i pi s}(1 - e^{2 i pi s}) / (2i); the factored-out
        // exponential is the dominant one in the upper half-plane, so the
        // correction term has |e^{2 i pi s}| = e^{-2 pi Im s} <= 1.
        -ipi * s + (1.0 - (2.0 * ipi * s).exp()).ln()
            + Complex64::new(-std::f64::consts::LN_2, std::f64::consts::FRAC_PI_2)
    } else {
        log_sin_pi(s.conj()).conj()
    }
}

/// log Gamma valid in the whole plane (reflection for Re z < 0.5).
fn lgamma_any(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        lgamma_complex(z)
    } else {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z)
        Complex64::new(std::f64::consts::PI.ln(), 0.0) - log_sin_pi(z) - lgamma_complex(1.0 - z)
    }
}

// ====================================================================
// kernel
// ====================================================================

/// Evaluates the kernel K(t) whose moments reproduce the weight:
/// integral of t^n K(t) dt over (0, inf) equals gamma(n+1).
///
/// K(t) is computed as the inverse Mellin integral of gamma(s) t^{-s} along
/// a vertical line through max(saddle(t), 1/2). The vertical direction is a
/// descent direction for every weight family in this crate (the integrand
/// decays subexponentially in height), so no contour bending is needed.
pub struct KernelEvaluator {
    weight: Weight,
    accuracy: f64,
    /// (ln t -> ln K) table; None in direct mode.
    table: Option<MonotoneCubic>,
    t_lo: f64,
    t_hi: f64,
}

impl KernelEvaluator {
    /// Build an evaluator. Accuracies of 1e-6 and coarser are served from a
    /// precomputed saddle-parameterized table; finer requests integrate on
    /// every call.
    pub fn new(weight: &Weight, accuracy: f64) -> Result<Self> {
        if !(accuracy > 0.0 && accuracy < 0.5) {
            return Err(Error::Config(format!("kernel accuracy {accuracy} out of range")));
        }
        let mut ev = KernelEvaluator {
            weight: weight.clone(),
            accuracy,
            table: None,
            t_lo: f64::NAN,
            t_hi: f64::NAN,
        };
        if accuracy >= 1e-6 {
            ev.build_table()?;
        }
        Ok(ev)
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    /// Direct inverse-Mellin evaluation at one point (log form).
    pub fn eval_direct(&self, t: f64) -> Result<LogComplex> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("kernel argument t = {t}")));
        }
        let ln_t = t.ln();
        // Line abscissa: the decay saddle when it exists and is not tiny.
        let c = match solve_saddle_relaxed(&self.weight, Complex64::new(t, 0.0)) {
            Ok(sp) => sp.s.re.max(0.5),
            Err(Error::BelowThreshold(_)) => 0.5,
            // A saddle beyond e^700 means the decay exponent s*eps(s) is far
            // past any representable scale: the kernel is an exact zero here.
            Err(Error::SaddleFailure(_)) => return Ok(LogComplex::zero()),
            Err(e) => return Err(e),
        };
        if c * (1.0 + ln_t.abs()) > 1e13 {
            // The exponent scale c*ln t exceeds what f64 quadrature can
            // resolve (the ~46 e-folds of decay we must observe drown in
            // roundoff of the huge phase function). The saddle main term is
            // essentially exact out here: its corrections are O(1/(s eps)).
            return self.asymptotic_log(t);
        }
        let phi = |y: f64| -> Result<Complex64> {
            let s = Complex64::new(c, y);
            Ok(self.weight.log_gamma(s)? - s * ln_t)
        };
        let peak = phi(0.0)?.re;
        // Gaussian half-width at the line; also the first window size.
        let g2 = self.weight.g_second(Complex64::new(c, 0.0))?.re.max(1e-300);
        let sigma = (1.0 / g2).sqrt();
        let (nodes, wts) = clenshaw_curtis(24);
        let mut acc = LogSum::new();
        let mut y0 = 0.0_f64;
        let mut width = sigma / 2.0;
        let mut calm = 0u32;
        let floor = peak + (self.accuracy.min(1e-9)).ln() - 12.0;
        for _ in 0..1200 {
            // Keep a few nodes per radian of local oscillation: the phase
            // derivative along the line is exactly Re G'(c + iy) - ln t.
            // Near the peak it is small on the sigma scale by construction,
            // so never shrink windows below a fraction of sigma.
            let rate =
                (self.weight.g_prime(Complex64::new(c, y0 + width))?.re - ln_t).abs();
            let w_here = width.min((6.0 / rate).max(0.125 * sigma));
            let y1 = y0 + w_here;
            let mid = 0.5 * (y0 + y1);
            let half = 0.5 * (y1 - y0);
            let mut window_max = f64::NEG_INFINITY;
            for (x, w) in nodes.iter().zip(wts.iter()) {
                let y = mid + half * x;
                let p = phi(y)?;
                if p.re > window_max {
                    window_max = p.re;
                }
                // ds = i dy: phase + pi/2.
                acc.add(LogComplex::new(
                    p.re + (w * half).ln(),
                    p.im + std::f64::consts::FRAC_PI_2,
                ));
            }
            y0 = y1;
            width = (width * 1.6).min(4.0 * sigma.max(2.0));
            if window_max < floor {
                calm += 1;
                if calm >= 2 {
                    break;
                }
            } else {
                calm = 0;
            }
        }
        if calm < 2 {
            return Err(Error::TruncationFailure(format!(
                "kernel line integral did not decay for t = {t:.6e}"
            )));
        }
        // Fold: K = Im(upper-half integral) / pi.
        let up = acc.value();
        if up.is_zero() {
            return Ok(LogComplex::zero());
        }
        let shifted = up.to_complex_shifted(up.log_mag);
        let im = shifted.im;
        if im <= 0.0 {
            // Numerically indistinguishable from zero after cancellation.
            return Ok(LogComplex::zero());
        }
        Ok(LogComplex::new(up.log_mag + im.ln() - std::f64::consts::PI.ln(), 0.0))
    }

    /// Kernel value in log form (table-interpolated when available).
    pub fn eval_log(&self, t: f64) -> Result<LogComplex> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("kernel argument t = {t}")));
        }
        match &self.table {
            None => self.eval_direct(t),
            Some(tab) => {
                let x = t.ln();
                if x < tab.x_min() || x > tab.x_max() {
                    return self.eval_direct(t);
                }
                Ok(LogComplex::new(tab.eval_clamped(x), 0.0))
            }
        }
    }

    /// Kernel value as f64 (underflows to 0 naturally).
    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.eval_log(t)?.to_complex().re)
    }

    /// Leading decay term exp(-s eps(s)) / sqrt(2 pi G''(s)) at the saddle
    /// s = s(t); the reference for asymptotic-ratio diagnostics.
    pub fn asymptotic_log(&self, t: f64) -> Result<LogComplex> {
        let sp = solve_saddle_relaxed(&self.weight, Complex64::new(t, 0.0))?;
        let rho = sp.s.re;
        let s = Complex64::new(rho, 0.0);
        // The log-argument path stays finite for astronomically large rho.
        let eps = self.weight.epsilon_log_arg(Complex64::new(rho.ln(), 0.0))?.re;
        if !(eps > 0.0) {
            return Err(Error::Precondition(format!("non-positive decay rate at rho = {rho:.3e}")));
        }
        let g2 = self.weight.g_second(s)?.re;
        let ln_g2 = if g2 > 0.0 && g2.is_finite() {
            g2.ln()
        } else {
            // At astronomical saddles the curvature eps/s + eps' underflows;
            // take its leading part in log space.
            eps.ln() - rho.ln()
        };
        Ok(LogComplex::new(
            -rho * eps - 0.5 * ((2.0 * std::f64::consts::PI).ln() + ln_g2),
            0.0,
        ))
    }

    /// Analytic continuation of the kernel to complex arguments off the
    /// positive ray: the leading saddle term exp(G(s) - s log z) / sqrt(2 pi
    /// G''(s)) at the complex saddle G'(s) = log z. Relative accuracy is
    /// O(1/(s eps(s))), so callers should only lean on this where the kernel
    /// is already exponentially small (or accept the stated error scale).
    /// Positive real arguments fall back to the exact line integral.
    pub fn continued_log(&self, z: Complex64) -> Result<LogComplex> {
        if z.im == 0.0 && z.re > 0.0 {
            return self.eval_log(z.re);
        }
        let sp = solve_saddle_relaxed(&self.weight, z)?;
        let g = self.weight.log_gamma(sp.s)?;
        let g2 = sp.g_second;
        if !(g2.norm() > 0.0) || !g2.is_finite() {
            return Err(Error::Precondition(format!(
                "degenerate curvature at continued saddle s = {:?}",
                sp.s
            )));
        }
        let expo = g - sp.s * sp.log_z;
        let half = 0.5 * (2.0 * std::f64::consts::PI * g2).ln();
        Ok(LogComplex::new(expo.re - half.re, wrap_phase(expo.im - half.im)))
    }

    /// Identifier for trace records: weight fingerprint plus the accuracy
    /// the evaluator was built with.
    pub fn cache_id(&self) -> String {
        format!("K[{}]@{:.0e}", self.weight.canonical(), self.accuracy)
    }

    /// Relative accuracy the evaluator was built for.
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    /// n-th moment: integral of t^n K(t) dt, by direct kernel quadrature in
    /// ln t centered on the moment's own saddle. Log form.
    pub fn moment(&self, n: u32) -> Result<LogComplex> {
        let sigma = n as f64 + 1.0;
        let center = self.weight.g_prime(Complex64::new(sigma, 0.0))?.re;
        // Integrand in u = ln t: K(t) t^{n+1}; since d(log K)/du = -s*(u)
        // with ds*/du = 1/G''(s*), its log-curvature at the peak is
        // 1/G''(n+1) and the Gaussian width is sqrt(G'').
        let g2 = self.weight.g_second(Complex64::new(sigma, 0.0))?.re.max(1e-12);
        let w0 = g2.sqrt().clamp(1e-3, 8.0);
        let mut acc = LogSum::new();
        let (nodes, wts) = clenshaw_curtis(24);
        let peak = self.eval_direct(center.exp())?.log_mag + sigma * center;
        for dir in [-1.0, 1.0] {
            let mut a = 0.0_f64;
            let mut width = w0;
            let mut calm = 0u32;
            for _ in 0..200 {
                let b = a + width;
                let mid = center + dir * 0.5 * (a + b);
                let half = 0.5 * (b - a);
                let mut window_max = f64::NEG_INFINITY;
                for (x, w) in nodes.iter().zip(wts.iter()) {
                    let u = mid + dir * half * x;
                    let t = u.exp();
                    if t == 0.0 || !t.is_finite() {
                        continue;
                    }
                    let k = self.eval_direct(t)?;
                    if k.is_zero() {
                        continue;
                    }
                    let lg = k.log_mag + sigma * u;
                    if lg > window_max {
                        window_max = lg;
                    }
                    acc.add(LogComplex::new(lg + (w * half).ln(), k.phase));
                }
                a = b;
                width = (width * 1.4).min(8.0);
                if window_max < peak - 42.0 {
                    calm += 1;
                    if calm >= 2 {
                        break;
                    }
                } else {
                    calm = 0;
                }
            }
            if calm < 2 {
                return Err(Error::TruncationFailure(format!(
                    "moment {n} integral did not localize"
                )));
            }
        }
        Ok(acc.value())
    }

    /// Relative deviation of each moment from gamma(n+1), n = 0..=n_max.
    pub fn moment_check(&self, n_max: u32) -> Result<Vec<(u32, f64)>> {
        let mut out = Vec::with_capacity(n_max as usize + 1);
        for n in 0..=n_max {
            let measured = self.moment(n)?;
            let target = self.weight.log_gamma_n(n + 1)?;
            let rel = (measured.log_mag - target).exp() * measured.phase.cos() - 1.0;
            out.push((n, rel));
        }
        Ok(out)
    }

    /// Table coverage (direct mode reports NaN bounds).
    pub fn support_hint(&self) -> (f64, f64) {
        (self.t_lo, self.t_hi)
    }

    /// CSV rows "t,log_k" with identifying comment headers.
    pub fn to_csv(&self, t_lo: f64, t_hi: f64, per_decade: usize) -> Result<String> {
        if !(t_lo > 0.0 && t_hi > t_lo) {
            return Err(Error::Config(format!("bad kernel export range [{t_lo}, {t_hi}]")));
        }
        let mut out = String::new();
        out.push_str(&format!("# weight={}\n", self.weight.canonical()));
        out.push_str("# kind=K\n");
        out.push_str(&format!("# accuracy={:.1e}\n", self.accuracy));
        out.push_str("t,log_k\n");
        let n = ((t_hi / t_lo).log10() * per_decade as f64).ceil().max(1.0) as usize;
        for i in 0..=n {
            let t = t_lo * (t_hi / t_lo).powf(i as f64 / n as f64);
            let k = self.eval_log(t)?;
            let lk = if k.is_zero() { f64::NEG_INFINITY } else { k.log_mag };
            out.push_str(&format!("{t:.10e},{lk:.10e}\n"));
        }
        Ok(out)
    }

    /// Regularity advisories for kernel work: the shape conditions that the
    /// decay analysis leans on. Empty when everything passes.
    pub fn regularity_warnings(&self) -> Result<Vec<String>> {
        let report = self.weight.check_regularity()?;
        let mut warns = Vec::new();
        for name in ["R3", "R8"] {
            match report.verdict(name) {
                Some(crate::weights::Verdict::Pass) => {}
                Some(v) => warns.push(format!("{name}: {v:?}")),
                None => warns.push(format!("{name}: not evaluated")),
            }
        }
        Ok(warns)
    }

    fn build_table(&mut self) -> Result<()> {
        // Saddle-parameterized branch: walking rho directly places ln t
        // nodes densely exactly where ln K bends hardest (spacing eps*h).
        let rho_lo = 0.5_f64;
        let rho_hi = 1.0e13_f64;
        let per_decade = 48usize;
        let n_saddle = ((rho_hi / rho_lo).log10() * per_decade as f64).ceil() as usize;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        // Small-t branch below the clamped line: ln K is smooth in ln t.
        let t_join = self.weight.g_prime(Complex64::new(rho_lo, 0.0))?.re;
        let t_floor = t_join - 14.0 * std::f64::consts::LN_10;
        let n_small = 14 * 16;
        for i in 0..n_small {
            let x = t_floor + (t_join - 1e-6 - t_floor) * i as f64 / n_small as f64;
            let k = self.eval_direct(x.exp())?;
            if !k.is_zero() {
                xs.push(x);
                ys.push(k.log_mag);
            }
        }
        for i in 0..=n_saddle {
            let rho = rho_lo * (rho_hi / rho_lo).powf(i as f64 / n_saddle as f64);
            let x = self.weight.g_prime(Complex64::new(rho, 0.0))?.re;
            if let Some(last) = xs.last() {
                if x <= *last + 1e-12 {
                    continue;
                }
            }
            let k = self.eval_direct(x.exp())?;
            if k.is_zero() {
                break;
            }
            xs.push(x);
            ys.push(k.log_mag);
        }
        if xs.len() < 8 {
            return Err(Error::Precondition("kernel table degenerate".into()));
        }
        self.t_lo = xs[0].exp();
        self.t_hi = xs[xs.len() - 1].exp();
        self.table =
            Some(MonotoneCubic::new(xs, ys).ok_or_else(|| {
                Error::Precondition("kernel table interpolation failed".into())
            })?);
        Ok(())
    }
}

// ====================================================================
// entire-function series
// ====================================================================

/// Coefficient families for the entire functions attached to a weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// a_n = 1/gamma(n+1): the weight's principal entire function.
    E,
    /// a_n = 1/(n! gamma(n+1)): its formal Borel transform.
    E1,
    /// a_n = eps(n+1)^(n+1): the decay-rate companion.
    ETilde,
    /// a_n = 1/gamma_Q(n+1), gamma_Q from the quotient-derived weight.
    EStar,
}

/// Which evaluation path produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    PositiveSeries,
    DirectSeries,
    Lindelof,
    BorelLine,
    Asymptotic,
}

/// An evaluated entire-function value with provenance and an honest error
/// estimate (relative, from cancellation/roundoff bookkeeping).
#[derive(Debug, Clone)]
pub struct SeriesValue {
    pub value: LogComplex,
    pub route: Route,
    pub terms: usize,
    pub cancellation_log: f64,
    pub rel_error_bound: f64,
}

pub struct SeriesEvaluator {
    weight: Weight,
    kind: SeriesKind,
    /// Quotient-derived weight for the EStar coefficients.
    quotient: Option<Weight>,
}

const TERM_BUDGET: usize = 5_000_000;

impl SeriesEvaluator {
    pub fn new(weight: &Weight, kind: SeriesKind) -> Result<Self> {
        let quotient = if kind == SeriesKind::EStar {
            Some(Weight::derived(weight, crate::weights::Derivation::Quotient)?)
        } else {
            None
        };
        Ok(SeriesEvaluator { weight: weight.clone(), kind, quotient })
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    /// log a_n (all coefficient families are positive).
    pub fn coefficient_log(&self, n: u32) -> Result<f64> {
        match self.kind {
            SeriesKind::E => Ok(-self.weight.log_gamma_n(n + 1)?),
            SeriesKind::E1 => {
                Ok(-lgamma_real(n as f64 + 1.0) - self.weight.log_gamma_n(n + 1)?)
            }
            SeriesKind::ETilde => {
                let eps = self.weight.epsilon(Complex64::new(n as f64 + 1.0, 0.0))?.re;
                if !(eps > 0.0) {
                    return Err(Error::Precondition(format!(
                        "eps({}) = {eps} not positive",
                        n + 1
                    )));
                }
                Ok((n as f64 + 1.0) * eps.ln())
            }
            SeriesKind::EStar => Ok(-self.quotient.as_ref().unwrap().log_gamma_n(n + 1)?),
        }
    }

    /// log a(s) continued to complex index (used by the line integral).
    fn coefficient_log_at(&self, s: Complex64) -> Result<Complex64> {
        let sigma = s + 1.0;
        match self.kind {
            SeriesKind::E => Ok(-self.weight.log_gamma(sigma)?),
            SeriesKind::E1 => Ok(-lgamma_any(sigma) - self.weight.log_gamma(sigma)?),
            SeriesKind::ETilde => {
                let eps = self.weight.epsilon(sigma)?;
                Ok(sigma * eps.ln())
            }
            SeriesKind::EStar => Ok(-self.quotient.as_ref().unwrap().log_gamma(sigma)?),
        }
    }

    /// Evaluate at z with the default tolerance (1e-9), exact routes only.
    pub fn eval(&self, z: Complex64) -> Result<SeriesValue> {
        self.eval_with(z, 1e-9, false)
    }

    /// Evaluate at z. Routes are tried in order of strength: positive-ray
    /// series, direct complex series (while cancellation is affordable),
    /// line-integral resummation, and - only if `allow_asymptotic` - the
    /// saddle main term with a flagged o(1) error.
    pub fn eval_with(&self, z: Complex64, tol: f64, allow_asymptotic: bool) -> Result<SeriesValue> {
        if z == Complex64::new(0.0, 0.0) {
            return Ok(SeriesValue {
                value: LogComplex::new(self.coefficient_log(0)?, 0.0),
                route: Route::PositiveSeries,
                terms: 1,
                cancellation_log: 0.0,
                rel_error_bound: 0.0,
            });
        }
        if z.im == 0.0 && z.re > 0.0 {
            match self.positive_series(z.re) {
                Ok(v) => return Ok(v),
                Err(e) => {
                    if allow_asymptotic {
                        if let Ok(v) = self.asymptotic(z) {
                            return Ok(v);
                        }
                    }
                    return Err(e);
                }
            }
        }
        // Off the positive ray the terms oscillate; try the direct sum and
        // keep it only if the cancellation bookkeeping clears the bar.
        let direct = self.direct_series(z);
        if let Ok(v) = &direct {
            if v.rel_error_bound <= tol {
                return Ok(direct.unwrap());
            }
        }
        // Borel line: exponentially small values of the factorial-weight E
        // in the left half-plane need the saddle-centered Mellin line.
        if self.kind == SeriesKind::E
            && self.weight.is_factorial()
            && z.re < 0.0
            && (-z).arg().abs() < std::f64::consts::FRAC_PI_2 - 0.2
        {
            return self.borel_line(z);
        }
        match self.lindelof(z, tol) {
            Ok(v) if v.rel_error_bound <= tol => Ok(v),
            other => {
                if allow_asymptotic {
                    if let Ok(v) = self.asymptotic(z) {
                        return Ok(v);
                    }
                }
                match other {
                    Ok(v) => {
                        // The best value we have, but below requested quality.
                        if let Ok(d) = direct {
                            if d.rel_error_bound < v.rel_error_bound {
                                return Ok(d);
                            }
                        }
                        Ok(v)
                    }
                    Err(e) => direct.or(Err(e)),
                }
            }
        }
    }

    /// Plain series on the positive ray: every term is positive, so the
    /// log-space sum is exact to roundoff at any magnitude.
    fn positive_series(&self, x: f64) -> Result<SeriesValue> {
        let ln_x = x.ln();
        let mut acc = LogSum::new();
        let mut best = f64::NEG_INFINITY;
        let mut n = 0u32;
        loop {
            let lt = self.coefficient_log(n)? + n as f64 * ln_x;
            acc.add(LogComplex::new(lt, 0.0));
            if lt > best {
                best = lt;
            }
            // Terms unimodal in n: once 46 e-folds under the peak, stop.
            if n > 8 && lt < best - 46.0 {
                break;
            }
            n += 1;
            if n as usize >= TERM_BUDGET {
                return Err(Error::TruncationFailure(format!(
                    "series needs more than {TERM_BUDGET} terms at x = {x:.3e}"
                )));
            }
        }
        let value = acc.value();
        Ok(SeriesValue {
            value,
            route: Route::PositiveSeries,
            terms: n as usize + 1,
            cancellation_log: 0.0,
            rel_error_bound: (acc.roundoff_log() - value.log_mag).exp(),
        })
    }

    /// Direct complex summation with cancellation bookkeeping.
    fn direct_series(&self, z: Complex64) -> Result<SeriesValue> {
        let ln_r = z.norm().ln();
        let arg = z.arg();
        let mut acc = LogSum::new();
        let mut best = f64::NEG_INFINITY;
        let mut n = 0u32;
        loop {
            let lt = self.coefficient_log(n)? + n as f64 * ln_r;
            acc.add(LogComplex::new(lt, n as f64 * arg));
            if lt > best {
                best = lt;
            }
            if n > 8 && lt < best - 46.0 {
                break;
            }
            n += 1;
            if n as usize >= TERM_BUDGET {
                return Err(Error::TruncationFailure(format!(
                    "series needs more than {TERM_BUDGET} terms at z = {z}"
                )));
            }
        }
        let value = acc.value();
        if value.is_zero() {
            return Err(Error::TruncationFailure("complete cancellation in direct series".into()));
        }
        Ok(SeriesValue {
            value,
            route: Route::DirectSeries,
            terms: n as usize + 1,
            cancellation_log: acc.cancellation_log(),
            rel_error_bound: (acc.roundoff_log() - value.log_mag).exp(),
        })
    }

    /// Line-integral resummation: the sum equals
    ///   -(1/2 pi i) * integral of pi/sin(pi s) a(s) (-z)^s ds
    /// along Re s = -1/2 (poles at the nonnegative integers reproduce the
    /// series). Valid off the positive real axis; the integrand decays like
    /// exp(-(pi - |arg(-z)| - o(1)) |Im s|).
    fn lindelof(&self, z: Complex64, _tol: f64) -> Result<SeriesValue> {
        let log_neg_z = LogComplex::from_complex(-z);
        if log_neg_z.is_zero() {
            return Err(Error::Domain("line integral at z = 0".into()));
        }
        let lam = Complex64::new(log_neg_z.log_mag, log_neg_z.phase);
        if log_neg_z.phase.abs() > std::f64::consts::PI - 0.35 {
            return Err(Error::Domain(format!(
                "line integral needs |arg(-z)| < pi - 0.35 (got {:.3})",
                log_neg_z.phase
            )));
        }
        let c = -0.5_f64;
        let integrand = |y: f64| -> Result<LogComplex> {
            let s = Complex64::new(c, y);
            let lg = Complex64::new(std::f64::consts::PI.ln(), 0.0) - log_sin_pi(s)
                + self.coefficient_log_at(s)?
                + s * lam;
            Ok(LogComplex::new(lg.re, lg.im))
        };
        let (nodes, wts) = clenshaw_curtis(24);
        let mut acc = LogSum::new();
        let peak = integrand(0.0)?.log_mag;
        // Fixed-order windows need a few nodes per radian; the phase rate is
        // at most pi (sine factor) plus ln|-z| plus a slowly varying part
        // from the coefficient continuation.
        let w_cap = 6.0 / (std::f64::consts::PI + lam.re.abs() + 2.0);
        let mut converged = true;
        for dir in [1.0_f64, -1.0] {
            let mut a = 0.0_f64;
            let mut width = w_cap.min(1.0);
            let mut calm = 0u32;
            let mut ok = false;
            for _ in 0..1500 {
                let b = a + width;
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                let mut wmax = f64::NEG_INFINITY;
                for (x, w) in nodes.iter().zip(wts.iter()) {
                    let y = dir * (mid + half * x);
                    let t = integrand(y)?;
                    if t.log_mag > wmax {
                        wmax = t.log_mag;
                    }
                    // ds = i dy on both half-lines: substituting y -> -y on
                    // the lower one flips both the measure and the limits,
                    // so the +i factor survives unchanged.
                    acc.add(LogComplex::new(
                        t.log_mag + (w * half).ln(),
                        t.phase + std::f64::consts::FRAC_PI_2,
                    ));
                }
                a = b;
                width = (width * 1.6).min(w_cap);
                if wmax < peak - 48.0 {
                    calm += 1;
                    if calm >= 2 {
                        ok = true;
                        break;
                    }
                } else {
                    calm = 0;
                }
            }
            converged &= ok;
        }
        if !converged {
            return Err(Error::TruncationFailure("line integral did not decay".into()));
        }
        // E(z) = -(1/2 pi i) * I = I * (i / 2 pi).
        let total = acc.value();
        if total.is_zero() {
            return Err(Error::TruncationFailure("line integral fully cancelled".into()));
        }
        let value = LogComplex::new(
            total.log_mag - (2.0 * std::f64::consts::PI).ln(),
            total.phase + std::f64::consts::FRAC_PI_2,
        );
        Ok(SeriesValue {
            value,
            route: Route::Lindelof,
            terms: acc.n_terms(),
            cancellation_log: acc.cancellation_log(),
            rel_error_bound: (acc.roundoff_log() - total.log_mag).exp(),
        })
    }

    /// Saddle-centered Mellin line for the factorial-weight E in the left
    /// half-plane: E(z) = (1/2 pi i) * integral of Gamma(u) (-z)^{-u} du
    /// along the vertical line through the complex saddle u* solving
    /// digamma(u) = log(-z). Passing through the saddle puts the integrand
    /// peak at the answer's own scale, so exponentially small values come
    /// out with full relative accuracy instead of dying in cancellation.
    fn borel_line(&self, z: Complex64) -> Result<SeriesValue> {
        let log_neg_z = LogComplex::from_complex(-z);
        let lam = Complex64::new(log_neg_z.log_mag, log_neg_z.phase);
        if lam.im.abs() > std::f64::consts::FRAC_PI_2 - 0.2 {
            return Err(Error::Domain(format!(
                "Mellin line needs |arg(-z)| < pi/2 - 0.2 (got {:.3})",
                lam.im
            )));
        }
        // Newton for digamma(u) = lam from the real-axis guess u = |{-z}|.
        let mut u = Complex64::new(lam.re.exp().max(1.5), 0.0);
        for _ in 0..100 {
            let phi = digamma_complex(u) - lam;
            if phi.norm() < 1e-13 * (1.0 + lam.norm()) {
                break;
            }
            let mut step = phi / trigamma_complex(u);
            while (u - step).re < 0.3 && step.norm() > 1e-14 {
                step *= 0.5;
            }
            u -= step;
        }
        let c = u.re;
        let y_star = u.im;
        let sigma = trigamma_complex(u).norm().recip().sqrt();
        let peak = (lgamma_complex(u) - u * lam).re;
        // Node density vs oscillation: away from the saddle the phase rate
        // approaches |Im log(-z)| (the |ln(y/c)| part only matters past the
        // Gaussian falloff, where windows merely certify decay).
        let w_cap = (4.0 * sigma).min(6.0 / (lam.im.abs() + 0.5));
        let (nodes, wts) = clenshaw_curtis(24);
        let mut acc = LogSum::new();
        for dir in [1.0_f64, -1.0] {
            let mut a = 0.0_f64;
            let mut width = (sigma / 2.0).min(w_cap);
            let mut calm = 0u32;
            let mut ok = false;
            for _ in 0..400 {
                let b = a + width;
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                let mut wmax = f64::NEG_INFINITY;
                for (x, w) in nodes.iter().zip(wts.iter()) {
                    let s = Complex64::new(c, y_star + dir * (mid + half * x));
                    let lg = lgamma_complex(s) - s * lam;
                    if lg.re > wmax {
                        wmax = lg.re;
                    }
                    // du = i dy on both half-lines (the sign flip of the
                    // measure under y -> -y cancels the limit swap).
                    acc.add(LogComplex::new(
                        lg.re + (w * half).ln(),
                        lg.im + std::f64::consts::FRAC_PI_2,
                    ));
                }
                a = b;
                width = (width * 2.0).min(w_cap);
                if wmax < peak - 48.0 {
                    calm += 1;
                    if calm >= 2 {
                        ok = true;
                        break;
                    }
                } else {
                    calm = 0;
                }
            }
            if !ok {
                return Err(Error::TruncationFailure("Mellin line integral did not decay".into()));
            }
        }
        let total = acc.value();
        if total.is_zero() {
            return Err(Error::TruncationFailure("Mellin line integral fully cancelled".into()));
        }
        // E(z) = I / (2 pi i) = I * (-i) / (2 pi).
        let value = LogComplex::new(
            total.log_mag - (2.0 * std::f64::consts::PI).ln(),
            total.phase - std::f64::consts::FRAC_PI_2,
        );
        Ok(SeriesValue {
            value,
            route: Route::BorelLine,
            terms: acc.n_terms(),
            cancellation_log: acc.cancellation_log(),
            rel_error_bound: (acc.roundoff_log() - total.log_mag).exp(),
        })
    }

    /// Saddle main term: E(z) ~ exp(-l(n*) + n* log z) sqrt(2 pi / l''(n*))
    /// where l(n) = -log a_n and l'(n*) = log z. The o(1) accuracy is
    /// reported through `rel_error_bound` (a heuristic scale, not a bound).
    pub fn asymptotic(&self, z: Complex64) -> Result<SeriesValue> {
        let log_z = Complex64::new(z.norm().ln(), z.arg());
        let (n_star, l, l2) = self.exponent_saddle(log_z)?;
        let rho = n_star + 1.0;
        if rho.norm() < self.weight.rho0() {
            return Err(Error::BelowThreshold(format!(
                "series saddle |n| = {:.3e} below rho0 = {:.1e}",
                rho.norm(),
                self.weight.rho0()
            )));
        }
        let lg = -l + n_star * log_z
            + 0.5 * ((2.0 * std::f64::consts::PI / l2).ln());
        Ok(SeriesValue {
            value: LogComplex::new(lg.re, lg.im),
            route: Route::Asymptotic,
            terms: 0,
            cancellation_log: 0.0,
            rel_error_bound: 1.0 / rho.norm().sqrt().max(2.0),
        })
    }

    /// Solve l'(n) = log z for the term-exponent l of this series kind.
    /// Returns (n*, l(n*), l''(n*)).
    fn exponent_saddle(&self, log_z: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        let l = |n: Complex64| -> Result<Complex64> { Ok(-self.coefficient_log_at(n)?) };
        let l1 = |n: Complex64| -> Result<Complex64> {
            let sigma = n + 1.0;
            match self.kind {
                SeriesKind::E => self.weight.g_prime(sigma),
                SeriesKind::E1 => Ok(digamma_complex(sigma) + self.weight.g_prime(sigma)?),
                SeriesKind::EStar => self.quotient.as_ref().unwrap().g_prime(sigma),
                SeriesKind::ETilde => Err(Error::Unsupported(
                    "no asymptotic branch for the decay-rate series".into(),
                )),
            }
        };
        let l2 = |n: Complex64| -> Result<Complex64> {
            let sigma = n + 1.0;
            match self.kind {
                SeriesKind::E => self.weight.g_second(sigma),
                SeriesKind::E1 => Ok(trigamma_complex(sigma) + self.weight.g_second(sigma)?),
                SeriesKind::EStar => self.quotient.as_ref().unwrap().g_second(sigma),
                SeriesKind::ETilde => unreachable!(),
            }
        };
        // Ray bisection for |n|, then damped Newton (same pattern as the
        // weight saddle, but on the composite exponent).
        let target = log_z.re;
        let f_ray = |t: f64| -> Result<f64> { Ok(l1(Complex64::new(t.exp(), 0.0))?.re - target) };
        let mut lo = -20.0_f64;
        let mut hi = 230.0_f64;
        if f_ray(lo)? > 0.0 {
            return Err(Error::BelowThreshold("series saddle below e^-20".into()));
        }
        if f_ray(hi)? < 0.0 {
            return Err(Error::SaddleFailure("series saddle beyond e^230".into()));
        }
        for _ in 0..70 {
            let mid = 0.5 * (lo + hi);
            if f_ray(mid)? <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut n = Complex64::new((0.5 * (lo + hi)).exp(), 0.0);
        let mut phi = l1(n)? - log_z;
        let mut iters = 0;
        while phi.norm() > 1e-12 * (1.0 + log_z.norm()) && iters < 100 {
            iters += 1;
            let step = phi / l2(n)?;
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda > 1e-8 {
                let cand = n - lambda * step;
                if let Ok(p) = l1(cand) {
                    if (p - log_z).norm() < phi.norm() {
                        n = cand;
                        phi = p - log_z;
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
        if !(phi.norm() <= 1e-6 * (1.0 + log_z.norm())) {
            return Err(Error::SaddleFailure(format!(
                "series saddle stalled at residual {:.3e}",
                phi.norm()
            )));
        }
        Ok((n, l(n)?, l2(n)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_weight() -> Weight {
        Weight::denjoy(0.0, &[(1, 1.0)]).unwrap()
    }

    fn log2_weight() -> Weight {
        Weight::denjoy(0.0, &[(1, 2.0)]).unwrap()
    }

    #[test]
    fn factorial_kernel_is_exponential() {
        // Moments Gamma(n+1) pin K(t) = exp(-t).
        let k = KernelEvaluator::new(&Weight::factorial(), 1e-7).unwrap();
        for t in [0.3, 1.0, 3.0, 10.0, 50.0] {
            let v = k.eval_direct(t).unwrap();
            let rel = (v.log_mag - (-t)).abs();
            assert!(rel < 1e-7, "t={t}: log K = {} vs {}", v.log_mag, -t);
        }
        // Table interpolation stays within its promise.
        for t in [0.7, 2.3, 17.0, 120.0] {
            let v = k.eval_log(t).unwrap();
            assert!((v.log_mag + t).abs() < 2e-5 * (1.0 + t), "t={t}: {}", v.log_mag);
        }
    }

    #[test]
    fn half_order_kernel_matches_closed_form() {
        // gamma(n+1) = Gamma(2n+2) corresponds to K(t) = exp(-sqrt(t))/2.
        let w = Weight::mittag_leffler(2.0).unwrap();
        let k = KernelEvaluator::new(&w, 1e-7).unwrap();
        for t in [0.5, 4.0, 25.0, 400.0] {
            let v = k.eval_direct(t).unwrap();
            let target = -t.sqrt() - std::f64::consts::LN_2;
            assert!(
                (v.log_mag - target).abs() < 1e-6 * (1.0 + t.sqrt()),
                "t={t}: {} vs {target}",
                v.log_mag
            );
        }
    }

    #[test]
    fn kernel_moments_recover_weight() {
        let k = KernelEvaluator::new(&log_weight(), 1e-7).unwrap();
        for (n, rel) in k.moment_check(4).unwrap() {
            assert!(rel.abs() < 1e-6, "moment {n} off by {rel:.3e}");
        }
    }

    #[test]
    fn kernel_asymptotic_ratio_near_one() {
        let k = KernelEvaluator::new(&Weight::factorial(), 1e-7).unwrap();
        let t = 200.0;
        let num = k.eval_direct(t).unwrap();
        let asym = k.asymptotic_log(t).unwrap();
        // Laplace correction at rho = 200 is O(1/rho).
        assert!((num.log_mag - asym.log_mag).abs() < 0.01, "{} vs {}", num.log_mag, asym.log_mag);
    }

    #[test]
    fn continued_kernel_matches_exact_exponential() {
        // For the factorial weight the kernel is exactly exp(-z) in the whole
        // right half-plane; the continued saddle formula must reproduce it
        // with the advertised O(1/s) Stirling-scale error.
        let k = KernelEvaluator::new(&Weight::factorial(), 1e-7).unwrap();
        for z in [Complex64::new(20.0, 6.0), Complex64::new(35.0, -9.0), Complex64::new(50.0, 15.0)]
        {
            let got = k.continued_log(z).unwrap();
            let s = solve_saddle_relaxed(&Weight::factorial(), z).unwrap().s.norm();
            let budget = 1.0 / (4.0 * s);
            assert!(
                (got.log_mag + z.re).abs() < budget,
                "z = {z}: log-mag miss {:.3e} vs budget {budget:.3e}",
                (got.log_mag + z.re).abs()
            );
            assert!(
                crate::logspace::wrap_phase(got.phase + z.im).abs() < budget,
                "z = {z}: phase miss {:.3e}",
                crate::logspace::wrap_phase(got.phase + z.im).abs()
            );
        }
        // On the positive ray it is the exact line integral.
        let on_axis = k.continued_log(Complex64::new(3.0, 0.0)).unwrap();
        let direct = k.eval_log(3.0).unwrap();
        assert_eq!(on_axis.log_mag, direct.log_mag);
        let id = k.cache_id();
        assert!(id.contains(k.weight().canonical()));
    }

    #[test]
    fn kernel_csv_headers() {
        let k = KernelEvaluator::new(&log_weight(), 1e-5).unwrap();
        let csv = k.to_csv(0.1, 10.0, 4).unwrap();
        assert!(csv.starts_with(&format!("# weight={}\n# kind=K\n", k.weight().canonical())));
        assert!(csv.contains("t,log_k"));
        assert!(csv.lines().count() > 8);
    }

    #[test]
    fn series_positive_ray_matches_closed_forms() {
        // gamma(n+1) = Gamma(2n+2): E(x) = sinh(sqrt x)/sqrt x.
        let w = Weight::mittag_leffler(2.0).unwrap();
        let e = SeriesEvaluator::new(&w, SeriesKind::E).unwrap();
        let v = e.eval(Complex64::new(4.0, 0.0)).unwrap();
        assert_eq!(v.route, Route::PositiveSeries);
        let target = (2.0_f64.sinh() / 2.0).ln();
        assert!((v.value.log_mag - target).abs() < 1e-12);
        // Factorial: E = exp.
        let e = SeriesEvaluator::new(&Weight::factorial(), SeriesKind::E).unwrap();
        let v = e.eval(Complex64::new(2.0, 0.0)).unwrap();
        assert!((v.value.log_mag - 2.0).abs() < 1e-12);
    }

    #[test]
    fn series_direct_route_handles_mild_cancellation() {
        // E(-4) = sin(2)/2 for the half-order weight.
        let w = Weight::mittag_leffler(2.0).unwrap();
        let e = SeriesEvaluator::new(&w, SeriesKind::E).unwrap();
        let v = e.eval(Complex64::new(-4.0, 0.0)).unwrap();
        assert_eq!(v.route, Route::DirectSeries);
        let target = 0.5 * (2.0_f64).sin();
        let got = v.value.to_complex().re;
        assert!((got - target).abs() < 1e-9 * target.abs(), "{got} vs {target}");
    }

    #[test]
    fn line_integral_matches_direct_where_both_work() {
        // Factorial weight: E(-6) = exp(-6), forced through the line
        // integral (the dispatcher would normally route this elsewhere).
        let e = SeriesEvaluator::new(&Weight::factorial(), SeriesKind::E).unwrap();
        let li = e.lindelof(Complex64::new(-6.0, 0.0), 1e-9).unwrap();
        let target = (-6.0_f64).exp();
        let got = li.value.to_complex().re;
        assert!((got - target).abs() < 1e-8 * target, "{got} vs {target}");
        assert!(li.value.to_complex().im.abs() < 1e-10 * target);
        // Slowly varying weight against a 60-digit reference:
        //   sum (-5)^n / ln(n+1+e)^(n+1) = 0.17461980445188876526...
        let e = SeriesEvaluator::new(&log_weight(), SeriesKind::E).unwrap();
        let z = Complex64::new(-5.0, 0.0);
        let target = 0.174_619_804_451_888_77_f64;
        let li = e.lindelof(z, 1e-9).unwrap();
        let got = li.value.to_complex().re;
        assert!((got - target).abs() < 1e-9 * target, "{got} vs {target}");
        // The direct sum lands within its own (cancellation-aware) bound.
        let d = e.direct_series(z).unwrap();
        let miss = (d.value.log_mag - target.ln()).abs();
        assert!(miss < d.rel_error_bound, "miss {miss} vs bound {:.3e}", d.rel_error_bound);
        assert!(d.rel_error_bound < 1e-6);
    }

    #[test]
    fn borel_values_exponentially_small() {
        // E(-30) = exp(-30) for the factorial weight: 13 decades below the
        // largest series term, far beyond direct f64 summation.
        let e = SeriesEvaluator::new(&Weight::factorial(), SeriesKind::E).unwrap();
        let v = e.eval(Complex64::new(-30.0, 0.0)).unwrap();
        assert_eq!(v.route, Route::BorelLine);
        assert!((v.value.log_mag + 30.0).abs() < 1e-8, "log = {}", v.value.log_mag);
        assert!(v.value.phase.abs() < 1e-12);
        assert!(v.rel_error_bound < 1e-8);
    }

    #[test]
    fn direct_route_reports_its_own_inadequacy() {
        let e = SeriesEvaluator::new(&Weight::factorial(), SeriesKind::E).unwrap();
        let d = e.direct_series(Complex64::new(-30.0, 0.0)).unwrap();
        // max term e^27-ish vs value e^-30: the sum bottoms out at the f64
        // roundoff floor (~37 e-folds down) and the error bound must say so.
        assert!(d.cancellation_log > 30.0);
        assert!(d.rel_error_bound > 1e-3);
    }

    #[test]
    fn series_asymptotic_tracks_positive_series() {
        // Slowly varying weight at a large argument: saddle near e^13.5.
        let w = log_weight();
        let e = SeriesEvaluator::new(&w, SeriesKind::E).unwrap();
        let z = Complex64::new(15.0, 0.0);
        let exact = e.eval(z).unwrap();
        assert_eq!(exact.route, Route::PositiveSeries);
        let asym = e.asymptotic(z).unwrap();
        let dl = exact.value.log_mag - asym.value.log_mag;
        assert!(dl.abs() < 0.05, "log-ratio {dl}");
    }

    #[test]
    fn decay_rate_series_consistent_with_coefficients() {
        let w = log_weight();
        let e = SeriesEvaluator::new(&w, SeriesKind::ETilde).unwrap();
        // Hand-rolled partial sum at x = 0.5.
        let mut sum = 0.0;
        for n in 0..400u32 {
            let eps = w.epsilon(Complex64::new(n as f64 + 1.0, 0.0)).unwrap().re;
            sum += eps.powi(n as i32 + 1) * 0.5_f64.powi(n as i32);
        }
        let v = e.eval(Complex64::new(0.5, 0.0)).unwrap();
        assert!((v.value.log_mag - sum.ln()).abs() < 1e-10);
    }

    #[test]
    fn quotient_series_requires_convergent_dual() {
        // The iterated-log weight is on the quasianalytic side: no quotient.
        assert!(SeriesEvaluator::new(&log_weight(), SeriesKind::EStar).is_err());
        // The squared-log weight has a convergent dual: evaluator works and
        // agrees with a hand partial sum.
        let w = log2_weight();
        let e = SeriesEvaluator::new(&w, SeriesKind::EStar).unwrap();
        let q = Weight::derived(&w, crate::weights::Derivation::Quotient).unwrap();
        let mut sum = 0.0;
        for n in 0..400u32 {
            sum += (-q.log_gamma_n(n + 1).unwrap()).exp() * 0.5_f64.powi(n as i32);
        }
        let v = e.eval(Complex64::new(0.5, 0.0)).unwrap();
        assert!((v.value.log_mag - sum.ln()).abs() < 1e-9);
    }

    #[test]
    fn borel_transform_series_grows_slowly() {
        // E1 coefficients carry an extra 1/n!: at moderate arguments the
        // function stays polynomially sized even for the factorial weight.
        let e = SeriesEvaluator::new(&Weight::factorial(), SeriesKind::E1).unwrap();
        // E1(x) = sum x^n/(n!)^2 = I_0(2 sqrt x): check against the n-fold
        // direct sum in plain f64.
        let x = 9.0;
        let mut sum = 0.0_f64;
        let mut term = 1.0_f64;
        for n in 0..200 {
            if n > 0 {
                term *= x / ((n as f64) * (n as f64));
            }
            sum += term;
        }
        let v = e.eval(Complex64::new(x, 0.0)).unwrap();
        assert!((v.value.log_mag - sum.ln()).abs() < 1e-12);
    }

    #[test]
    fn lindelof_handles_imaginary_axis() {
        // sum (6i)^n / ln(n+1+e)^(n+1) to 60 digits:
        //   log|E(6i)| = -1.7398498316302007...,  arg = 1.4992563336938606...
        // The direct sum carries ~27 e-folds of cancellation here, so the
        // line integral is the only full-precision route.
        let e = SeriesEvaluator::new(&log_weight(), SeriesKind::E).unwrap();
        let z = Complex64::new(0.0, 6.0);
        let li = e.lindelof(z, 1e-9).unwrap();
        let diff = (li.value.log_mag + 1.739_849_831_630_200_7).abs();
        let dphase =
            crate::logspace::wrap_phase(li.value.phase - 1.499_256_333_693_860_6).abs();
        assert!(diff < 1e-9 && dphase < 1e-9, "diff {diff}, dphase {dphase}");
        // And the direct route's own error bound honestly covers its miss.
        let d = e.direct_series(z).unwrap();
        let miss = (d.value.log_mag + 1.739_849_831_630_200_7).abs();
        assert!(miss < d.rel_error_bound, "miss {miss} vs bound {:.3e}", d.rel_error_bound);
    }

    #[test]
    fn eval_routes_fall_through_in_order() {
        let e = SeriesEvaluator::new(&Weight::factorial(), SeriesKind::E).unwrap();
        // Mild cancellation: direct suffices.
        let v = e.eval(Complex64::new(-3.0, 0.0)).unwrap();
        assert_eq!(v.route, Route::DirectSeries);
        assert!((v.value.log_mag + 3.0).abs() < 1e-9);
        // Deep cancellation: Borel line takes over.
        let v = e.eval(Complex64::new(-25.0, 0.0)).unwrap();
        assert_eq!(v.route, Route::BorelLine);
        assert!((v.value.log_mag + 25.0).abs() < 1e-8);
        // Complex argument with serious cancellation: the Mellin line runs
        // through the complex saddle and keeps full relative accuracy.
        let z = Complex64::new(-40.0, 8.0);
        let v = e.eval(z).unwrap();
        assert_eq!(v.route, Route::BorelLine);
        // Oracle: E = exp.
        assert!((v.value.log_mag - z.re).abs() < 1e-7);
        assert!(crate::logspace::wrap_phase(v.value.phase - z.im).abs() < 1e-7);
    }
}


