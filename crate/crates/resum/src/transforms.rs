//! Rescaling transforms between jets and their entire representatives, and
//! the moment-kernel summation method built on top of them.
//!
//! The pipeline has three rungs:
//!
//!   1. the singular transform divides jet coefficients by gamma(n+1),
//!      producing a series whose radius of convergence is (for admissible
//!      growth) infinite;
//!   2. that entire function is evaluated along the positive ray or along a
//!      half-plane contour;
//!   3. the regular transform integrates it against the moment kernel K,
//!      whose n-th moment is exactly gamma(n+1), so the integral restores
//!      a_n x^n term by term — and assigns a finite value to divergent
//!      series whenever the integral converges.
//!
//! Truncation of the integral to a finite window is decided empirically:
//! the scan watches the product |F(xt) K(t)| on a log-spaced grid and cuts
//! off once it has decayed well below its peak, or once the stored
//! coefficients stop being able to represent F. Where the product refuses
//! to decay the summation reports a divergent integrand instead of a
//! number; for arguments past the summable range that error is the correct
//! answer, not a failure of the machinery.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{LogComplex, LogSum};
use crate::quadrature::{adaptive_simpson, clenshaw_curtis, QuadratureSpec};
use crate::saddle_geometry::Contour;
use crate::special_functions::KernelEvaluator;
use crate::weights::Weight;

// ----------------------------------------------------------------------
// jets
// ----------------------------------------------------------------------

/// Where a jet's coefficients came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Extracted from samples of a function (e.g. via a Chebyshev fit).
    Sampled,
    /// Computed from a closed form.
    Analytic,
    /// Constructed coefficient by coefficient for an experiment.
    Synthetic,
}

/// Taylor coefficients a_n at the origin, n = 0..=N, stored as
/// log-magnitude/phase pairs so that factorially large or tiny entries are
/// exact. The base point is always 0; jets at other points are out of
/// scope.
///
/// A jet is either a *truncated* view of an unknown smooth function (the
/// default) or *complete*: the coefficients are the whole function, i.e. a
/// polynomial. The distinction matters when the summation machinery decides
/// how far along the ray the partial sums can be trusted.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<LogComplex>,
    provenance: Provenance,
    complete: bool,
}

fn validate_coeffs(coeffs: &[LogComplex]) -> Result<()> {
    if coeffs.is_empty() {
        return Err(Error::Precondition("a jet needs at least the constant term".into()));
    }
    for (n, c) in coeffs.iter().enumerate() {
        if c.log_mag.is_nan() || c.log_mag == f64::INFINITY || !c.phase.is_finite() {
            return Err(Error::Precondition(format!(
                "coefficient {n} is not finite: log|a| = {}, phase = {}",
                c.log_mag, c.phase
            )));
        }
    }
    Ok(())
}

impl Jet {
    /// Jet from log-space coefficients, treated as a truncated series.
    pub fn new(coeffs: Vec<LogComplex>, provenance: Provenance) -> Result<Jet> {
        validate_coeffs(&coeffs)?;
        Ok(Jet { coeffs, provenance, complete: false })
    }

    /// Jet from plain complex coefficients, treated as a truncated series.
    pub fn from_values(values: &[Complex64], provenance: Provenance) -> Result<Jet> {
        let coeffs: Vec<LogComplex> = values.iter().map(|v| LogComplex::from_complex(*v)).collect();
        validate_coeffs(&coeffs)?;
        Ok(Jet { coeffs, provenance, complete: false })
    }

    /// Jet that IS the whole function: a polynomial with these coefficients.
    pub fn polynomial(values: &[Complex64]) -> Result<Jet> {
        let mut jet = Jet::from_values(values, Provenance::Analytic)?;
        jet.complete = true;
        Ok(jet)
    }

    /// Highest stored order N.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // validated non-empty at construction
    }

    pub fn coeff(&self, n: usize) -> LogComplex {
        self.coeffs.get(n).copied().unwrap_or_else(LogComplex::zero)
    }

    pub fn coeffs(&self) -> &[LogComplex] {
        &self.coeffs
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// True when the coefficients are the whole function (a polynomial).
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// JSON form: {"coeffs":[{"log_mag":…,"phase":…},…],"provenance":"…"}.
    /// A null log_mag encodes an exactly-zero coefficient.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&JetJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Jet> {
        let raw: JetJson = serde_json::from_str(text)?;
        raw.into_jet()
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    /// None encodes an exactly-zero coefficient (log-magnitude -inf).
    log_mag: Option<f64>,
    phase: f64,
}

#[derive(Serialize, Deserialize)]
struct JetJson {
    coeffs: Vec<CoeffJson>,
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "is_false")]
    complete: bool,
}

impl From<&Jet> for JetJson {
    fn from(jet: &Jet) -> JetJson {
        JetJson {
            coeffs: jet
                .coeffs
                .iter()
                .map(|c| CoeffJson {
                    log_mag: if c.is_zero() { None } else { Some(c.log_mag) },
                    phase: c.phase,
                })
                .collect(),
            provenance: jet.provenance,
            complete: jet.complete,
        }
    }
}

impl JetJson {
    fn into_jet(self) -> Result<Jet> {
        let coeffs: Vec<LogComplex> = self
            .coeffs
            .iter()
            .map(|c| match c.log_mag {
                Some(m) => LogComplex::new(m, c.phase),
                None => LogComplex::zero(),
            })
            .collect();
        validate_coeffs(&coeffs)?;
        Ok(Jet { coeffs, provenance: self.provenance, complete: self.complete })
    }
}

// ----------------------------------------------------------------------
// entire representatives
// ----------------------------------------------------------------------

/// Verdict on the rescaled series read off the trend of |b_n|^{1/n}.
///
/// A finite truncation can only exhibit a trend, not prove a limit, so this
/// is a diagnostic: a clearly decreasing trend is reported as entire, a
/// leveled-off trend as a finite radius estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Convergence {
    /// |b_n|^{1/n} trends downward: the series describes an entire function.
    Entire,
    /// |b_n|^{1/n} has leveled off near 1/R: radius of convergence about R.
    FiniteRadius(f64),
}

/// A jet divided by gamma(n+1): the series F(z) = sum b_n z^n, together
/// with the weight it was rescaled by and a convergence diagnostic.
///
/// Evaluation is by the stored series only. Sampled functions enter as
/// jets (via Chebyshev recomposition upstream) before rescaling, so no
/// second evaluation path lives here.
#[derive(Debug, Clone)]
pub struct EntireRep {
    weight: Weight,
    coeffs: Vec<LogComplex>,
    provenance: Provenance,
    complete: bool,
    convergence: Convergence,
}

/// One evaluation of the rescaled series, with the context needed to judge
/// how much to trust it.
#[derive(Debug, Clone, Copy)]
pub struct SeriesProbe {
    /// The partial sum, in log form.
    pub value: LogComplex,
    /// Largest single term (log magnitude).
    pub max_term_log: f64,
    /// Index of the largest term.
    pub argmax: usize,
    /// Roundoff floor of the summation (log magnitude).
    pub noise_log: f64,
    /// False when the terms at the stored truncation order are no longer
    /// negligible, i.e. the partial sum has stopped representing its
    /// source series.
    pub in_reach: bool,
}

/// E-folds the final stored term must sit below the largest term for the
/// partial sum to be trusted. Forty e-folds puts the omitted tail below
/// the f64 cancellation floor (about 36 e-folds) that the noise model
/// already charges for.
const REACH_HEADROOM: f64 = 40.0;

fn diagnose(coeffs: &[LogComplex]) -> Convergence {
    // q_n = |b_n|^{1/n}; read the per-e-fold slope of ln q across the top
    // half of the stored range. Polynomial-length data defaults to entire.
    let pts: Vec<(f64, f64)> = coeffs
        .iter()
        .enumerate()
        .skip(2)
        .filter(|(_, c)| !c.is_zero() && c.log_mag.is_finite())
        .map(|(n, c)| ((n as f64).ln(), c.log_mag / n as f64))
        .collect();
    if pts.len() < 6 {
        return Convergence::Entire;
    }
    let half = pts.len() / 2;
    let tail = &pts[half..];
    let quarter = tail.len() / 2;
    let (lo, hi) = tail.split_at(quarter);
    let mean = |s: &[(f64, f64)]| {
        let n = s.len() as f64;
        (s.iter().map(|p| p.0).sum::<f64>() / n, s.iter().map(|p| p.1).sum::<f64>() / n)
    };
    let (x1, y1) = mean(lo);
    let (x2, y2) = mean(hi);
    let slope = (y2 - y1) / (x2 - x1).max(1e-12);
    if slope < -0.04 {
        Convergence::Entire
    } else {
        Convergence::FiniteRadius((-y2).exp())
    }
}

impl EntireRep {
    /// Build from explicit rescaled coefficients b_n.
    pub fn new(
        weight: Weight,
        coeffs: Vec<LogComplex>,
        provenance: Provenance,
        complete: bool,
    ) -> Result<EntireRep> {
        validate_coeffs(&coeffs)?;
        let convergence = diagnose(&coeffs);
        Ok(EntireRep { weight, coeffs, provenance, complete, convergence })
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> LogComplex {
        self.coeffs.get(n).copied().unwrap_or_else(LogComplex::zero)
    }

    pub fn coeffs(&self) -> &[LogComplex] {
        &self.coeffs
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn convergence(&self) -> Convergence {
        self.convergence
    }

    fn is_zero_series(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Partial sum of the series at z, with trust diagnostics.
    pub fn probe(&self, z: Complex64) -> SeriesProbe {
        if z == Complex64::new(0.0, 0.0) {
            let c0 = self.coeffs[0];
            return SeriesProbe {
                value: c0,
                max_term_log: c0.log_mag,
                argmax: 0,
                noise_log: c0.log_mag + f64::EPSILON.ln(),
                in_reach: true,
            };
        }
        let lz = z.norm().ln();
        let az = z.arg();
        let mut sum = LogSum::new();
        let mut max_log = f64::NEG_INFINITY;
        let mut argmax = 0usize;
        let mut last_log = f64::NEG_INFINITY;
        let mut any = false;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            any = true;
            let nf = n as f64;
            let term = LogComplex::new(c.log_mag + nf * lz, c.phase + nf * az);
            if term.log_mag > max_log {
                max_log = term.log_mag;
                argmax = n;
            }
            last_log = term.log_mag;
            sum.add(term);
        }
        if !any {
            // The zero series is exact everywhere.
            return SeriesProbe {
                value: LogComplex::zero(),
                max_term_log: f64::NEG_INFINITY,
                argmax: 0,
                noise_log: f64::NEG_INFINITY,
                in_reach: true,
            };
        }
        // Reach check: the term at the truncation order must already be
        // deep below the dominant term, otherwise the omitted tail is
        // comparable to what was kept and the partial sum no longer
        // represents the series it was cut from. Complete jets carry no
        // omitted tail.
        let in_reach = self.complete || max_log - last_log >= REACH_HEADROOM;
        SeriesProbe {
            value: sum.value(),
            max_term_log: max_log,
            argmax,
            noise_log: sum.roundoff_log(),
            in_reach,
        }
    }

    /// Series value at z; errors when z is past the numerical reach of the
    /// stored truncation.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let p = self.probe(z);
        if !p.in_reach {
            return Err(Error::TruncationFailure(format!(
                "series truncated at n = {} no longer converges at |z| = {:.3e}",
                self.degree(),
                z.norm()
            )));
        }
        Ok(p.value.to_complex())
    }
}

// ----------------------------------------------------------------------
// singular transform and its inverse
// ----------------------------------------------------------------------

/// Divide jet coefficients by gamma(n+1): b_n = a_n / gamma(n+1), computed
/// additively in log space, and diagnose the convergence of the result.
pub fn singular_transform(jet: &Jet, weight: &Weight) -> Result<EntireRep> {
    let mut coeffs = Vec::with_capacity(jet.len());
    for (n, a) in jet.coeffs().iter().enumerate() {
        let g = weight.log_gamma_n(n as u32 + 1)?;
        coeffs.push(a.scale_log(-g));
    }
    EntireRep::new(weight.clone(), coeffs, jet.provenance(), jet.is_complete())
}

/// Multiply the rescaled coefficients back: a_n = b_n * gamma(n+1). Exact
/// inverse of [`singular_transform`] up to f64 addition roundoff in
/// log-magnitude (bit-exact when the subtraction was exact).
pub fn inverse_singular(rep: &EntireRep) -> Result<Jet> {
    let mut coeffs = Vec::with_capacity(rep.coeffs.len());
    for (n, b) in rep.coeffs.iter().enumerate() {
        let g = rep.weight.log_gamma_n(n as u32 + 1)?;
        coeffs.push(b.scale_log(g));
    }
    validate_coeffs(&coeffs)?;
    Ok(Jet { coeffs, provenance: rep.provenance, complete: rep.complete })
}

// ----------------------------------------------------------------------
// summation results
// ----------------------------------------------------------------------

/// How a summation integral was carried out.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummationTrace {
    /// Kernel fingerprint the result was computed against.
    pub kernel_id: String,
    /// Integration window: innermost and outermost |t| (or |z| on contours).
    pub t_lower: f64,
    pub t_upper: f64,
    /// True when the window was capped by the series' numerical reach
    /// rather than by certified decay of the integrand.
    pub reach_limited: bool,
    /// Peak log-magnitude of the integrand over the window (in the u = ln t
    /// frame on the axis; per-node product on contours).
    pub peak_log: f64,
    /// Total integrand evaluations (scan plus quadrature).
    pub n_evals: usize,
    /// Absolute error estimate: quadrature + truncated tail + series noise
    /// + kernel accuracy.
    pub error_estimate: f64,
    /// "axis", "contour-psi-plus" or "contour-psi-minus".
    pub route: String,
}

/// A summed value with its full provenance trace.
#[derive(Debug, Clone)]
pub struct SummationResult {
    pub value: Complex64,
    pub trace: SummationTrace,
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SummationJson {
    value: ComplexJson,
    trace: SummationTrace,
}

impl SummationResult {
    pub fn to_json(&self) -> Result<String> {
        let shadow = SummationJson {
            value: ComplexJson { re: self.value.re, im: self.value.im },
            trace: self.trace.clone(),
        };
        Ok(serde_json::to_string(&shadow)?)
    }

    pub fn from_json(text: &str) -> Result<SummationResult> {
        let shadow: SummationJson = serde_json::from_str(text)?;
        Ok(SummationResult {
            value: Complex64::new(shadow.value.re, shadow.value.im),
            trace: shadow.trace,
        })
    }
}

fn zero_result(ke: &KernelEvaluator, route: &str) -> SummationResult {
    SummationResult {
        value: Complex64::new(0.0, 0.0),
        trace: SummationTrace {
            kernel_id: ke.cache_id(),
            t_lower: 0.0,
            t_upper: 0.0,
            reach_limited: false,
            peak_log: -745.0, // below any representable magnitude
            n_evals: 0,
            error_estimate: 0.0,
            route: route.to_string(),
        },
    }
}

fn check_same_weight(rep: &EntireRep, ke: &KernelEvaluator) -> Result<()> {
    if rep.weight().canonical() != ke.weight().canonical() {
        return Err(Error::Precondition(format!(
            "kernel built for weight {} but the series was rescaled by {}",
            ke.weight().canonical(),
            rep.weight().canonical()
        )));
    }
    Ok(())
}

/// Stop threshold for the empirical decay scan, relative to the running
/// peak of the integrand.
fn stop_tolerance_log(quad: &QuadratureSpec) -> f64 {
    (quad.rel_tol * 1e-2).max(1e-13).ln()
}

// ----------------------------------------------------------------------
// regular transform along the positive ray
// ----------------------------------------------------------------------

/// Integral of F(x t) K(t) dt over (0, infinity), truncated where the
/// integrand has verifiably died. Real scaling point x.
pub fn regular_transform(
    rep: &EntireRep,
    ke: &KernelEvaluator,
    x: f64,
    quad: &QuadratureSpec,
) -> Result<SummationResult> {
    regular_transform_at(rep, ke, Complex64::new(x, 0.0), quad)
}

/// [`regular_transform`] at a complex scaling point z: the integrand is
/// F(z t) K(t) along the positive ray in t.
pub fn regular_transform_at(
    rep: &EntireRep,
    ke: &KernelEvaluator,
    z: Complex64,
    quad: &QuadratureSpec,
) -> Result<SummationResult> {
    check_same_weight(rep, ke)?;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("scaling point {z} is not finite")));
    }
    if rep.is_zero_series() {
        return Ok(zero_result(ke, "axis"));
    }

    let ppd = quad.pts_per_decade.max(4) as usize;
    let h = std::f64::consts::LN_10 / ppd as f64;
    let ln_tol = stop_tolerance_log(quad);
    let needed = 2 * ppd; // two sustained decades under tolerance

    // Decay scan: march the product log |F(z t) K(t) t| outward from t = 1 on
    // a log grid.  Rightward it ends when the tail is certified dead or the
    // series reach ends; leftward it ends when the head is certified dead.
    // Both directions matter: some kernels vanish at the origin, so starting
    // the scan at tiny t would read the rising head as an already-passed peak.
    let mut peak = f64::NEG_INFINITY;
    let mut peak_seen = false;
    let mut reach_limited = false;

    let mut trail_r: Vec<(f64, f64)> = Vec::new();
    {
        let mut below = 0usize;
        let mut u = 0.0f64;
        loop {
            let t = u.exp();
            let p = rep.probe(z * t);
            if !p.in_reach {
                reach_limited = true;
                break;
            }
            let k = ke.eval_log(t)?;
            let obs = if k.is_zero() {
                f64::NEG_INFINITY
            } else {
                p.value.log_mag.max(p.noise_log) + k.log_mag + u
            };
            trail_r.push((u, obs));
            if obs.is_finite() && obs > peak {
                peak = obs;
                peak_seen = true;
                below = 0;
            } else if peak_seen && obs < peak + ln_tol {
                below += 1;
                // Certified stop: a sustained sub-tolerance run, or a single
                // point so far down that the remaining ratio underflows f64.
                if below >= needed || obs < peak - 746.0 {
                    break;
                }
            } else if peak_seen {
                below = 0;
            }
            if u > 690.0 {
                // Kernel decay beats any admissible series long before here.
                break;
            }
            u += h;
        }
        if reach_limited && !trail_r.is_empty() {
            // The grid overshoots the reach edge by up to one step, and the
            // integrand can drop tens of e-folds across that step.  Bisect to
            // the actual edge so the acceptance test sees the full headroom
            // this truncation really has.
            let mut lo = trail_r.last().expect("non-empty").0;
            let mut hi = u;
            for _ in 0..48 {
                let mid = 0.5 * (lo + hi);
                if rep.probe(z * mid.exp()).in_reach {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if lo > trail_r.last().expect("non-empty").0 {
                let p = rep.probe(z * lo.exp());
                let k = ke.eval_log(lo.exp())?;
                let obs = if k.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    p.value.log_mag.max(p.noise_log) + k.log_mag + lo
                };
                trail_r.push((lo, obs));
                if obs.is_finite() && obs > peak {
                    peak = obs;
                    peak_seen = true;
                }
            }
        }
    }

    let mut trail_l: Vec<(f64, f64)> = Vec::new();
    {
        let mut below = 0usize;
        let mut u = -h;
        while u > (1e-12f64).ln() {
            let t = u.exp();
            let p = rep.probe(z * t);
            if !p.in_reach {
                reach_limited = true;
                break;
            }
            // A kernel that has died (or cannot be evaluated) this close to
            // the origin ends the usable window; the edge density is charged
            // to the error budget below.
            let Ok(k) = ke.eval_log(t) else { break };
            if k.is_zero() {
                break;
            }
            let obs = p.value.log_mag.max(p.noise_log) + k.log_mag + u;
            trail_l.push((u, obs));
            if obs.is_finite() && obs > peak {
                peak = obs;
                peak_seen = true;
                below = 0;
            } else if peak_seen && obs < peak + ln_tol {
                below += 1;
                if below >= needed || obs < peak - 746.0 {
                    break;
                }
            } else if peak_seen {
                below = 0;
            }
            u -= h;
        }
    }

    if trail_l.len() + trail_r.len() < 3 || !peak_seen {
        return Err(Error::DivergentIntegrand(
            "no numerically usable window: the integrand never rises above zero".into(),
        ));
    }
    let (u_hi, obs_last) = match trail_r.last() {
        Some(&(u, o)) => (u, o),
        None => {
            return Err(Error::DivergentIntegrand(
                "no numerically usable window: the series reach ends at t < 1".into(),
            ))
        }
    };
    if reach_limited && !(obs_last <= peak + ln_tol) {
        return Err(Error::DivergentIntegrand(format!(
            "integrand at the series reach limit t = {:.3e} is within e^{:.1} of its peak; \
             not summable at this truncation",
            u_hi.exp(),
            obs_last - peak
        )));
    }

    // Geometric extrapolation of the observed decay rate, one per end: the
    // omitted mass beyond the window is bounded by edge density / rate.
    let geom_bound = |edge: (f64, f64), reference: (f64, f64)| -> f64 {
        if edge.1 == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let lambda = if reference.1.is_finite() {
            ((reference.1 - edge.1) / (reference.0 - edge.0).abs().max(1e-9)).max(0.3)
        } else {
            0.3
        };
        edge.1 - lambda.ln()
    };
    let tail_log = {
        let reference = trail_r
            .iter()
            .rev()
            .find(|(ur, _)| u_hi - ur >= std::f64::consts::LN_10)
            .copied()
            .unwrap_or(trail_r[0]);
        geom_bound((u_hi, obs_last), reference)
    };
    let (u_lo, head_log) = match trail_l.last() {
        Some(&(u, o)) => {
            let reference = trail_l
                .iter()
                .rev()
                .find(|(ur, _)| ur - u >= std::f64::consts::LN_10)
                .copied()
                .unwrap_or(trail_r[0]);
            (u, geom_bound((u, o), reference))
        }
        None => (0.0, trail_r[0].1),
    };

    // Quadrature of the shifted integrand, decade by decade so the peak
    // cannot hide between the probe points of one huge interval.
    let shift = peak;
    let mut worst_noise = f64::NEG_INFINITY;
    let mut kernel_err: Option<Error> = None;
    let mut integrand = |u: f64| -> Complex64 {
        let t = u.exp();
        let k = match ke.eval_log(t) {
            Ok(k) => k,
            Err(e) => {
                if kernel_err.is_none() {
                    kernel_err = Some(e);
                }
                return Complex64::new(0.0, 0.0);
            }
        };
        if k.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let p = rep.probe(z * t);
        let noise = p.noise_log + k.log_mag + u;
        if noise > worst_noise {
            worst_noise = noise;
        }
        // Near and below the cancellation floor the partial sum is rounding noise
        // with no point-to-point coherence, and refining the quadrature on it only
        // chases randomness.  Zero it out and charge the full magnitude of what was
        // dropped to the error budget instead.
        if p.value.log_mag <= p.noise_log + 3.0 {
            let dropped = p.value.log_mag + k.log_mag + u;
            if dropped > worst_noise {
                worst_noise = dropped;
            }
            return Complex64::new(0.0, 0.0);
        }
        p.value.mul(&k).scale_log(u).to_complex_shifted(shift)
    };
    // The shifted integrand peaks at magnitude ~1, so in shifted units an absolute
    // floor of rel_tol / 100 cuts off refinement of sub-tolerance structure (noise
    // plateaus, clamp steps) without eating into the requested accuracy.  Without
    // it, tail decades whose own integral is tiny drive the relative test against
    // their own magnitude and the bisection chases jitter to full depth.
    let qspec = QuadratureSpec { abs_floor: quad.abs_floor.max(0.01 * quad.rel_tol), ..*quad };
    let mut total = Complex64::new(0.0, 0.0);
    let mut quad_err = 0.0;
    let mut evals = 0usize;
    let mut a = u_lo;
    while a < u_hi {
        let b = (a + std::f64::consts::LN_10).min(u_hi);
        let q = adaptive_simpson(&mut integrand, a, b, &qspec);
        total += q.value;
        quad_err += q.abs_err;
        evals += q.evals;
        a = b;
    }
    if let Some(e) = kernel_err {
        return Err(e);
    }

    let value = LogComplex::from_complex(total).scale_log(shift).to_complex();
    let err_shifted = quad_err
        + (head_log - shift).exp()
        + (tail_log - shift).exp()
        + (worst_noise - shift).exp() * (u_hi - u_lo);
    let mut err = err_shifted * shift.exp() + value.norm() * ke.accuracy();
    if !err.is_finite() {
        err = f64::MAX;
    }

    Ok(SummationResult {
        value,
        trace: SummationTrace {
            kernel_id: ke.cache_id(),
            t_lower: u_lo.exp(),
            t_upper: u_hi.exp(),
            reach_limited,
            peak_log: peak,
            n_evals: evals + trail_l.len() + trail_r.len(),
            error_estimate: err,
            route: "axis".to_string(),
        },
    })
}

// ----------------------------------------------------------------------
// regular transform along half-plane contours
// ----------------------------------------------------------------------

/// Which half plane a summation contour runs through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourRole {
    PsiPlus,
    PsiMinus,
}

/// Standard summation contour: the positive ray out to the radius where
/// the kernel has decayed to numerical irrelevance, then a bridge and an
/// outward arc along the image of the 45-degree ray s = sigma e^{±i pi/4}
/// under exp(G'(s)) — safely inside the sector where the continued kernel
/// formula applies, and far enough out that its O(1/(s eps)) relative error
/// multiplies an exponentially dead factor.
pub fn psi_contour(weight: &Weight, role: ContourRole, quad: &QuadratureSpec) -> Result<Contour> {
    let n_panel = (quad.pts_per_decade.max(8) as usize).max(16);
    let (nodes, wts) = clenshaw_curtis(n_panel);
    let s0 = decay_abscissa(weight, 50.0)?;
    let s1 = decay_abscissa(weight, 220.0)?.max(s0 * 1.5);
    let r0 = weight.g_prime(Complex64::new(s0, 0.0))?.re.exp();

    // Axis part: spectral panels on twelve log decades up to r0; weights
    // absorb dz = r d(ln r).
    let mut c = Contour::default();
    let decades = 12u32;
    let half = 0.5 * std::f64::consts::LN_10;
    for d in 0..decades {
        let mid = r0.ln() - (decades as f64 - d as f64 - 0.5) * std::f64::consts::LN_10;
        for (xn, wn) in nodes.iter().zip(wts.iter()) {
            let r = (mid + half * xn).exp();
            c.nodes.push(Complex64::new(r, 0.0));
            c.weights.push(Complex64::new(r * wn * half, 0.0));
            c.segment_ids.push(d);
        }
    }

    // Bridge from the axis to the start of the inclined arc. The kernel is
    // already dead by e^{-45} here, so panel accuracy is immaterial.
    let theta = match role {
        ContourRole::PsiPlus => std::f64::consts::FRAC_PI_4,
        ContourRole::PsiMinus => -std::f64::consts::FRAC_PI_4,
    };
    let dir = Complex64::from_polar(1.0, theta);
    let z_start = weight.g_prime(s0 * dir)?.exp();
    let a = Complex64::new(r0, 0.0);
    let mut bridge = Contour::default();
    for (xn, wn) in nodes.iter().zip(wts.iter()) {
        let zc = a + (z_start - a) * (0.5 * (xn + 1.0));
        bridge.nodes.push(zc);
        bridge.weights.push((z_start - a) * (0.5 * wn));
        bridge.segment_ids.push(decades);
    }
    c.extend_with(bridge);

    // Outward arc: the image of the ray s = sigma e^{i theta} under
    // exp(G'(s)), parameterized by ln sigma; dz = z G''(s) s d(ln sigma).
    let arc_decades = ((s1 / s0).log10().ceil() as u32).max(1);
    let step = (s1 / s0).ln() / arc_decades as f64;
    let mut arc = Contour::default();
    for d in 0..arc_decades {
        let mid = s0.ln() + step * (d as f64 + 0.5);
        let ah = 0.5 * step;
        for (xn, wn) in nodes.iter().zip(wts.iter()) {
            let s = (mid + ah * xn).exp() * dir;
            let zc = weight.g_prime(s)?.exp();
            let dz = zc * weight.g_second(s)? * s;
            arc.nodes.push(zc);
            arc.weights.push(dz * (wn * ah));
            arc.segment_ids.push(decades + 1 + d);
        }
    }
    c.extend_with(arc);
    Ok(c)
}

/// Smallest real abscissa where the kernel's decay exponent s*eps(s)
/// reaches the given number of e-folds.
fn decay_abscissa(weight: &Weight, target: f64) -> Result<f64> {
    let mut s = 4.0f64;
    for _ in 0..4000 {
        let eps = weight.epsilon(Complex64::new(s, 0.0))?.re;
        if eps > 0.0 && s * eps >= target {
            return Ok(s);
        }
        s *= 1.25;
    }
    Err(Error::SaddleFailure(format!(
        "no abscissa with s*eps(s) >= {target} at reachable scales"
    )))
}

/// Contour version of the regular transform: integral of F(t z) K(z) dz
/// along a half-plane contour. The kernel is the cached line-integral value
/// on the positive ray and the continued saddle formula off it.
///
/// Sign convention: the plus-role contour is the principal choice for
/// t >= 0 and the minus-role contour for t < 0; swapping roles computes the
/// mirrored operator. Both are admissible for polynomials and for entire
/// representatives that stay small on the contour, which is what the
/// decay/reach checks enforce.
pub fn regular_transform_pm(
    rep: &EntireRep,
    ke: &KernelEvaluator,
    contour: &Contour,
    role: ContourRole,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<SummationResult> {
    check_same_weight(rep, ke)?;
    if !t.is_finite() {
        return Err(Error::Domain(format!("scaling point {t} is not finite")));
    }
    if contour.nodes.is_empty() {
        return Err(Error::Precondition("empty contour".into()));
    }
    for zn in &contour.nodes {
        let ok = match role {
            ContourRole::PsiPlus => zn.im >= -1e-9 * (1.0 + zn.norm()),
            ContourRole::PsiMinus => zn.im <= 1e-9 * (1.0 + zn.norm()),
        };
        if !ok {
            return Err(Error::Precondition(format!(
                "contour node {zn} lies outside the half plane of its declared role"
            )));
        }
    }
    let route = match role {
        ContourRole::PsiPlus => "contour-psi-plus",
        ContourRole::PsiMinus => "contour-psi-minus",
    };
    if rep.is_zero_series() {
        return Ok(zero_result(ke, route));
    }

    let ln_tol = stop_tolerance_log(quad);
    let mut sum = LogSum::new();
    let mut err_sum = LogSum::new();
    let mut peak = f64::NEG_INFINITY;
    let mut peak_seen = false;
    let mut far_r = f64::NEG_INFINITY;
    let mut far_prod = f64::NEG_INFINITY;
    let mut worst_violation = f64::NEG_INFINITY;
    let mut any_out_of_reach = false;
    let mut r_min = f64::INFINITY;
    let mut r_max: f64 = 0.0;

    for (zn, wn) in contour.nodes.iter().zip(contour.weights.iter()) {
        let r = zn.norm();
        r_min = r_min.min(r);
        r_max = r_max.max(r);
        let on_axis = zn.im.abs() <= 1e-14 * (1.0 + zn.re.abs()) && zn.re > 0.0;
        let k = if on_axis { ke.eval_log(zn.re)? } else { ke.continued_log(*zn)? };
        let p = rep.probe(zn * t);
        let prod = if k.is_zero() {
            f64::NEG_INFINITY
        } else {
            p.value.log_mag.max(p.noise_log) + k.log_mag
        };
        if !p.in_reach {
            // Series reach exhausted at this node; only admissible if the
            // kernel has already made the neighborhood irrelevant.
            any_out_of_reach = true;
            let bound = p.max_term_log + if k.is_zero() { f64::NEG_INFINITY } else { k.log_mag };
            if bound > worst_violation {
                worst_violation = bound;
            }
            continue;
        }
        let term = p.value.mul(&k).mul(&LogComplex::from_complex(*wn));
        sum.add(term);
        let wlog = wn.norm().ln();
        err_sum.add(LogComplex::new(p.noise_log + k.log_mag + wlog, 0.0));
        if !on_axis && !term.is_zero() {
            // Continued-formula uncertainty: leading correction is
            // O(1/(s eps)) ~ O(1/|log K|) relative.
            let rel = 1.0 / (-k.log_mag).max(1.0);
            err_sum.add(LogComplex::new(term.log_mag + rel.ln(), 0.0));
        }
        if prod.is_finite() && prod > peak {
            peak = prod;
            peak_seen = true;
        }
        if r >= far_r {
            far_r = r;
            far_prod = prod;
        }
    }

    if !peak_seen {
        return Ok(zero_result(ke, route));
    }
    if any_out_of_reach && worst_violation > peak - 46.0 {
        return Err(Error::DivergentIntegrand(format!(
            "series reach exhausted on the contour where the kernel is still live \
             (bound within e^{:.1} of the peak)",
            worst_violation - peak
        )));
    }
    if !(far_prod <= peak + ln_tol) {
        return Err(Error::DivergentIntegrand(format!(
            "integrand at the contour end |z| = {far_r:.3e} is within e^{:.1} of its peak",
            far_prod - peak
        )));
    }

    let value = sum.value().to_complex();
    let mut err = err_sum.value().to_complex().norm()
        + LogComplex::new(sum.roundoff_log(), 0.0).to_complex().norm()
        + value.norm() * ke.accuracy();
    if !err.is_finite() {
        err = f64::MAX;
    }

    Ok(SummationResult {
        value,
        trace: SummationTrace {
            kernel_id: ke.cache_id(),
            t_lower: r_min,
            t_upper: r_max,
            reach_limited: any_out_of_reach,
            peak_log: peak,
            n_evals: contour.nodes.len(),
            error_estimate: err,
            route: route.to_string(),
        },
    })
}

// ----------------------------------------------------------------------
// moment summation
// ----------------------------------------------------------------------

/// Sum the series with coefficients a_n against the weight's moment
/// sequence: rescale to A(t) = sum a_n t^n / gamma(n+1) and integrate
/// A(t) K(t) dt. Equals [`regular_transform`] of the rescaled jet at x = 1.
pub fn moment_sum(
    series_terms: &Jet,
    ke: &KernelEvaluator,
    quad: &QuadratureSpec,
) -> Result<SummationResult> {
    let rep = singular_transform(series_terms, ke.weight())?;
    regular_transform(&rep, ke, 1.0, quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn log_weight() -> Weight {
        Weight::denjoy(0.0, &[(1, 1.0)]).unwrap()
    }

    fn unit_jet(n: usize) -> Jet {
        Jet::from_values(&vec![Complex64::new(1.0, 0.0); n], Provenance::Synthetic).unwrap()
    }

    fn geometric_jet(ratio: f64, n: usize) -> Jet {
        let values: Vec<Complex64> =
            (0..n).map(|k| Complex64::new(ratio.powi(k as i32), 0.0)).collect();
        Jet::from_values(&values, Provenance::Analytic).unwrap()
    }

    #[test]
    fn delta_jet_rescales_to_inverse_weight_level() {
        // Only the constant term: b0 = a0 / gamma(1) = 1 / L(1).
        let w = log_weight();
        let jet = Jet::from_values(&[Complex64::new(1.0, 0.0)], Provenance::Synthetic).unwrap();
        let rep = singular_transform(&jet, &w).unwrap();
        let l1 = (1.0 + std::f64::consts::E).ln();
        assert!((rep.coeff(0).to_complex().re - 1.0 / l1).abs() < 1e-15);
        assert!((rep.coeff(0).log_mag + w.log_gamma_n(1).unwrap()).abs() < 1e-15);
        assert!(rep.coeff(3).is_zero());
    }

    #[test]
    fn geometric_jet_becomes_entire() {
        let w = log_weight();
        let rep = singular_transform(&unit_jet(96), &w).unwrap();
        assert_eq!(rep.convergence(), Convergence::Entire);
        // And the rescaled series indeed keeps shrinking in the n-th-root sense.
        let q = |n: usize| (rep.coeff(n).log_mag / n as f64).exp();
        assert!(q(90) < q(45) && q(45) < q(20));
    }

    #[test]
    fn coefficients_at_weight_growth_flag_finite_radius() {
        // a_n = gamma(n+1) rescales to b_n = 1: radius diagnostic 1.
        let w = log_weight();
        let coeffs: Vec<LogComplex> =
            (0..64).map(|n| LogComplex::new(w.log_gamma_n(n + 1).unwrap(), 0.0)).collect();
        let jet = Jet::new(coeffs, Provenance::Synthetic).unwrap();
        let rep = singular_transform(&jet, &w).unwrap();
        match rep.convergence() {
            Convergence::FiniteRadius(r) => {
                assert!((r - 1.0).abs() < 0.15, "radius estimate {r}")
            }
            Convergence::Entire => panic!("unit rescaled coefficients flagged as entire"),
        }
    }

    #[test]
    fn rescale_roundtrip_is_exact() {
        let w = log_weight();
        // a_n = 1: the subtraction 0 - g and addition back are exact in IEEE.
        let jet = unit_jet(40);
        let back = inverse_singular(&singular_transform(&jet, &w).unwrap()).unwrap();
        for n in 0..40 {
            assert_eq!(back.coeff(n).log_mag, 0.0, "log-magnitude not restored at n = {n}");
            assert_eq!(back.coeff(n).phase, jet.coeff(n).phase);
        }
        // Random magnitudes/phases: restored to a few ulps of the gamma scale.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let coeffs: Vec<LogComplex> = (0..40)
            .map(|_| {
                LogComplex::new(rng.random_range(-20.0..20.0), rng.random_range(-3.0..3.0))
            })
            .collect();
        let jet = Jet::new(coeffs, Provenance::Synthetic).unwrap();
        let back = inverse_singular(&singular_transform(&jet, &w).unwrap()).unwrap();
        for n in 0..40 {
            let g_scale = w.log_gamma_n(n as u32 + 1).unwrap().abs().max(1.0);
            let diff = (back.coeff(n).log_mag - jet.coeff(n).log_mag).abs();
            assert!(diff <= 4.0 * f64::EPSILON * g_scale, "n = {n}: diff {diff:.3e}");
        }
    }

    #[test]
    fn unit_reciprocal_rep_inverts_to_unit_jet() {
        let w = log_weight();
        let coeffs: Vec<LogComplex> =
            (0..24).map(|n| LogComplex::new(-w.log_gamma_n(n + 1).unwrap(), 0.0)).collect();
        let rep = EntireRep::new(w.clone(), coeffs, Provenance::Synthetic, false).unwrap();
        let jet = inverse_singular(&rep).unwrap();
        for n in 0..24 {
            assert!(jet.coeff(n).log_mag.abs() < 1e-12);
        }
        // Single-coefficient rep: a0 = c * gamma(1).
        let c = 2.5;
        let rep = EntireRep::new(
            w.clone(),
            vec![LogComplex::from_real(c)],
            Provenance::Synthetic,
            false,
        )
        .unwrap();
        let jet = inverse_singular(&rep).unwrap();
        let expect = c * (1.0 + std::f64::consts::E).ln();
        assert!((jet.coeff(0).to_complex().re - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn axis_transform_recovers_geometric_value_at_minus_one() {
        let w = log_weight();
        let ke = KernelEvaluator::new(&w, 1e-7).unwrap();
        let rep = singular_transform(&unit_jet(448), &w).unwrap();
        let quad = QuadratureSpec::default().with_rel_tol(1e-6);
        let r = regular_transform(&rep, &ke, -1.0, &quad).unwrap();
        assert!(
            (r.value.re - 0.5).abs() < 1e-3,
            "sum of (-1)^n = {} (want 0.5), err est {:.2e}",
            r.value.re,
            r.trace.error_estimate
        );
        assert!(r.value.im.abs() < 1e-6);
        assert!(r.trace.error_estimate.is_finite());
    }

    #[test]
    fn axis_transform_recovers_analytic_function() {
        // Jet of 1/(2-x): a_n = 2^{-(n+1)}.
        let w = log_weight();
        let ke = KernelEvaluator::new(&w, 1e-12).unwrap();
        let values: Vec<Complex64> =
            (0..128).map(|n| Complex64::new(0.5f64.powi(n as i32 + 1), 0.0)).collect();
        let jet = Jet::from_values(&values, Provenance::Analytic).unwrap();
        let rep = singular_transform(&jet, &w).unwrap();
        let quad = QuadratureSpec::default().with_rel_tol(1e-11);
        for x in [-0.9, 0.0, 0.9] {
            let r = regular_transform(&rep, &ke, x, &quad).unwrap();
            let want = 1.0 / (2.0 - x);
            let tol = if x == 0.0 { 1e-10 } else { 1e-4 };
            assert!(
                (r.value.re - want).abs() < tol,
                "x = {x}: got {}, want {want}",
                r.value.re
            );
        }
    }

    #[test]
    fn summation_handles_complex_arguments_off_the_cut() {
        let w = log_weight();
        let ke = KernelEvaluator::new(&w, 1e-7).unwrap();
        let rep = singular_transform(&unit_jet(448), &w).unwrap();
        let quad = QuadratureSpec::default().with_rel_tol(1e-6);
        // 1/(1-i) = 0.5 + 0.5 i, well off the cut [1, infinity).
        let r = regular_transform_at(&rep, &ke, Complex64::new(0.0, 1.0), &quad).unwrap();
        assert!(
            (r.value - Complex64::new(0.5, 0.5)).norm() < 1e-3,
            "sum of i^n = {}",
            r.value
        );
        // On the cut the integrand refuses to decay.
        match regular_transform(&rep, &ke, 1.0, &quad) {
            Err(Error::DivergentIntegrand(_)) => {}
            other => panic!("expected a divergent integrand at x = 1, got {other:?}"),
        }
        match regular_transform(&rep, &ke, 1.2, &quad) {
            Err(Error::DivergentIntegrand(_)) => {}
            other => panic!("expected a divergent integrand at x = 1.2, got {other:?}"),
        }
    }

    #[test]
    fn grandi_series_sums_to_one_half() {
        // a_n = (-1)^n against factorial moments: A(t) = e^{-t}, and the
        // summed value is the integral of e^{-2t}, exactly 1/2.
        let w = Weight::factorial();
        let ke = KernelEvaluator::new(&w, 1e-9).unwrap();
        let values: Vec<Complex64> =
            (0..80).map(|n| Complex64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        let jet = Jet::from_values(&values, Provenance::Synthetic).unwrap();
        let quad = QuadratureSpec::default().with_rel_tol(1e-9);
        let r = moment_sum(&jet, &ke, &quad).unwrap();
        assert!(
            (r.value.re - 0.5).abs() < 1e-8,
            "Grandi sum = {} (err est {:.2e})",
            r.value.re,
            r.trace.error_estimate
        );
        assert!(r.value.im.abs() < 1e-10);
    }

    #[test]
    fn convergent_series_sums_to_its_value() {
        // a_n = 1/n! is summable and already convergent: the method must
        // reproduce e (regularity on a convergent input).
        let w = Weight::factorial();
        let ke = KernelEvaluator::new(&w, 1e-8).unwrap();
        let coeffs: Vec<LogComplex> =
            (0..80).map(|n| LogComplex::new(-crate::gammafn::lgamma_real(n as f64 + 1.0), 0.0)).collect();
        let jet = Jet::new(coeffs, Provenance::Analytic).unwrap();
        let quad = QuadratureSpec::default().with_rel_tol(1e-8);
        let r = moment_sum(&jet, &ke, &quad).unwrap();
        assert!(
            (r.value.re - std::f64::consts::E).abs() < 1e-6,
            "sum of 1/n! = {}",
            r.value.re
        );
    }

    #[test]
    fn zero_jet_sums_to_zero() {
        let w = Weight::factorial();
        let ke = KernelEvaluator::new(&w, 1e-7).unwrap();
        let jet = Jet::from_values(&[Complex64::new(0.0, 0.0); 8], Provenance::Synthetic).unwrap();
        let r = moment_sum(&jet, &ke, &QuadratureSpec::default()).unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
        assert_eq!(r.trace.error_estimate, 0.0);
    }

    #[test]
    fn summation_is_linear() {
        let w = Weight::factorial();
        let ke = KernelEvaluator::new(&w, 1e-8).unwrap();
        let quad = QuadratureSpec::default().with_rel_tol(1e-12);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Complex64> {
            (0..48)
                .map(|n| {
                    let scale = 3.0f64.powi(-(n as i32));
                    Complex64::new(
                        rng.random_range(-1.0..1.0) * scale,
                        rng.random_range(-1.0..1.0) * scale,
                    )
                })
                .collect()
        };
        let (alpha, beta) = (Complex64::new(1.7, -0.3), Complex64::new(-0.8, 0.45));
        for _ in 0..2 {
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            let combo: Vec<Complex64> =
                a.iter().zip(&b).map(|(u, v)| alpha * u + beta * v).collect();
            let ja = Jet::from_values(&a, Provenance::Synthetic).unwrap();
            let jb = Jet::from_values(&b, Provenance::Synthetic).unwrap();
            let jc = Jet::from_values(&combo, Provenance::Synthetic).unwrap();
            let x = -0.6;
            let ra = regular_transform(&singular_transform(&ja, &w).unwrap(), &ke, x, &quad)
                .unwrap()
                .value;
            let rb = regular_transform(&singular_transform(&jb, &w).unwrap(), &ke, x, &quad)
                .unwrap()
                .value;
            let rc = regular_transform(&singular_transform(&jc, &w).unwrap(), &ke, x, &quad)
                .unwrap()
                .value;
            let scale = ra.norm().max(rb.norm()).max(1e-3);
            assert!(
                (rc - (alpha * ra + beta * rb)).norm() < 1e-10 * scale,
                "linearity defect {:.3e}",
                (rc - (alpha * ra + beta * rb)).norm() / scale
            );
        }
    }

    #[test]
    fn unit_series_integral_diverges() {
        // The rescaled unit series integrated against its own kernel is the
        // term-by-term sum of 1: the stability integral must not converge.
        for w in [log_weight(), Weight::factorial()] {
            let ke = KernelEvaluator::new(&w, 1e-6).unwrap();
            let rep = singular_transform(&unit_jet(128), &w).unwrap();
            match regular_transform(&rep, &ke, 1.0, &QuadratureSpec::default()) {
                Err(Error::DivergentIntegrand(_)) => {}
                other => panic!("stability probe must diverge for {}, got {other:?}", w.canonical()),
            }
        }
    }

    #[test]
    fn regularity_on_geometric_points() {
        // Integral of E(x t) K(t) dt = sum of x^n = 1/(1-x), inside the disk.
        let w = log_weight();
        let ke = KernelEvaluator::new(&w, 1e-7).unwrap();
        let rep = singular_transform(&unit_jet(256), &w).unwrap();
        let quad = QuadratureSpec::default().with_rel_tol(1e-6);
        for x in [0.0, 0.3, 0.7] {
            let r = regular_transform(&rep, &ke, x, &quad).unwrap();
            let want = 1.0 / (1.0 - x);
            assert!(
                (r.value.re - want).abs() < 1e-3 * want,
                "x = {x}: got {}, want {want}",
                r.value.re
            );
        }
    }

    #[test]
    fn polynomial_contour_transforms_agree() {
        // The moment identity makes rescale-then-transform exact on
        // polynomials: every route must reproduce p(t) itself.
        let w = log_weight();
        let ke = KernelEvaluator::new(&w, 1e-7).unwrap();
        let p: Vec<Complex64> = (0..=6).map(|n| Complex64::new(1.0 + n as f64, 0.0)).collect();
        let jet = Jet::polynomial(&p).unwrap();
        let rep = singular_transform(&jet, &w).unwrap();
        let quad = QuadratureSpec::default().with_rel_tol(1e-9);
        let t = 0.5f64;
        let mut want = Complex64::new(0.0, 0.0);
        for (n, pn) in p.iter().enumerate() {
            want += pn * t.powi(n as i32);
        }
        let axis = regular_transform(&rep, &ke, t, &quad).unwrap().value;
        let plus = psi_contour(&w, ContourRole::PsiPlus, &quad).unwrap();
        let minus = psi_contour(&w, ContourRole::PsiMinus, &quad).unwrap();
        let rp = regular_transform_pm(&rep, &ke, &plus, ContourRole::PsiPlus, t, &quad)
            .unwrap()
            .value;
        let rm = regular_transform_pm(&rep, &ke, &minus, ContourRole::PsiMinus, t, &quad)
            .unwrap()
            .value;
        let scale = want.norm();
        assert!((axis - want).norm() < 1e-6 * scale, "axis {axis} vs {want}");
        assert!((rp - want).norm() < 1e-6 * scale, "psi+ {rp} vs {want}");
        assert!((rm - want).norm() < 1e-6 * scale, "psi- {rm} vs {want}");
        assert!((rp - rm).norm() < 1e-6 * scale);
    }

    #[test]
    fn contour_matches_axis_for_analytic_rep() {
        let w = log_weight();
        let ke = KernelEvaluator::new(&w, 1e-7).unwrap();
        let values: Vec<Complex64> =
            (0..96).map(|n| Complex64::new(0.5f64.powi(n as i32 + 1), 0.0)).collect();
        let jet = Jet::from_values(&values, Provenance::Analytic).unwrap();
        let rep = singular_transform(&jet, &w).unwrap();
        let quad = QuadratureSpec::default().with_rel_tol(1e-7);
        let t = 0.5;
        let axis = regular_transform(&rep, &ke, t, &quad).unwrap().value;
        let plus = psi_contour(&w, ContourRole::PsiPlus, &quad).unwrap();
        let rp = regular_transform_pm(&rep, &ke, &plus, ContourRole::PsiPlus, t, &quad)
            .unwrap()
            .value;
        assert!(
            (rp - axis).norm() < 1e-3 * axis.norm(),
            "contour {rp} vs axis {axis}"
        );
    }

    #[test]
    fn contour_transform_at_zero_returns_first_coefficient() {
        // t = 0 freezes F at b0, so the contour integral is b0 times the
        // zeroth contour moment of K, i.e. a0.
        let w = log_weight();
        let ke = KernelEvaluator::new(&w, 1e-7).unwrap();
        let a0 = 1.7;
        let mut values = vec![Complex64::new(0.0, 0.0); 24];
        values[0] = Complex64::new(a0, 0.0);
        values[5] = Complex64::new(-0.4, 0.2);
        let jet = Jet::from_values(&values, Provenance::Synthetic).unwrap();
        let rep = singular_transform(&jet, &w).unwrap();
        let quad = QuadratureSpec::default().with_rel_tol(1e-9);
        let plus = psi_contour(&w, ContourRole::PsiPlus, &quad).unwrap();
        let r = regular_transform_pm(&rep, &ke, &plus, ContourRole::PsiPlus, 0.0, &quad).unwrap();
        assert!((r.value.re - a0).abs() < 1e-6, "a0 recovered as {}", r.value.re);
        assert!(r.value.im.abs() < 1e-6);
    }

    #[test]
    fn contour_role_must_match_half_plane() {
        let w = log_weight();
        let ke = KernelEvaluator::new(&w, 1e-6).unwrap();
        let rep = singular_transform(&unit_jet(16), &w).unwrap();
        let quad = QuadratureSpec::default();
        let plus = psi_contour(&w, ContourRole::PsiPlus, &quad).unwrap();
        match regular_transform_pm(&rep, &ke, &plus, ContourRole::PsiMinus, 0.5, &quad) {
            Err(Error::Precondition(_)) => {}
            other => panic!("mislabeled contour must be rejected, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_weight_rejected() {
        let ke = KernelEvaluator::new(&Weight::factorial(), 1e-6).unwrap();
        let rep = singular_transform(&unit_jet(8), &log_weight()).unwrap();
        match regular_transform(&rep, &ke, 0.5, &QuadratureSpec::default()) {
            Err(Error::Precondition(_)) => {}
            other => panic!("weight mismatch must be rejected, got {other:?}"),
        }
    }

    #[test]
    fn periodic_jet_coefficients_lie_in_decay_class() {
        // sin z: a_{2k+1} = (-1)^k/(2k+1)!. The n-th root of |a_n|, divided
        // by L(n), must trend to zero.
        let w = log_weight();
        let rat = |n: u32| {
            let ln_a = -crate::gammafn::lgamma_real(n as f64 + 1.0);
            (ln_a / n as f64).exp() / w.l_real(n as f64).unwrap()
        };
        let r9 = rat(9);
        let r19 = rat(19);
        let r39 = rat(39);
        assert!(r19 < r9 && r39 < r19, "{r9} {r19} {r39}");
        assert!(r39 < 0.2 * r9, "n-th root over L(n) not vanishing: {r39} vs {r9}");
    }

    #[test]
    fn jet_json_round_trip() {
        let mut values = vec![Complex64::new(1.5, 0.0), Complex64::new(0.0, 0.0)];
        values.push(Complex64::new(-2.0, 0.25));
        let jet = Jet::from_values(&values, Provenance::Sampled).unwrap();
        let text = jet.to_json().unwrap();
        assert!(text.contains("\"coeffs\""));
        assert!(text.contains("\"provenance\":\"sampled\""));
        assert!(text.contains("\"log_mag\":null"), "zero coefficient must encode as null");
        let back = Jet::from_json(&text).unwrap();
        assert_eq!(back, jet);
        // Complete flag survives the trip and stays out of the default form.
        let poly = Jet::polynomial(&values).unwrap();
        let text = poly.to_json().unwrap();
        assert!(text.contains("\"complete\":true"));
        assert!(Jet::from_json(&text).unwrap().is_complete());
    }

    #[test]
    fn summation_result_json_carries_trace() {
        let w = Weight::factorial();
        let ke = KernelEvaluator::new(&w, 1e-7).unwrap();
        let jet = geometric_jet(0.5, 96);
        let r = moment_sum(&jet, &ke, &QuadratureSpec::default()).unwrap();
        let text = r.to_json().unwrap();
        let back = SummationResult::from_json(&text).unwrap();
        assert_eq!(back.value, r.value);
        assert_eq!(back.trace.kernel_id, r.trace.kernel_id);
        assert!(back.trace.error_estimate.is_finite());
        assert!(back.trace.kernel_id.contains(w.canonical()));
        assert!(back.trace.t_upper > back.trace.t_lower);
    }

    #[test]
    fn jet_validation_rejects_bad_input() {
        assert!(Jet::from_values(&[], Provenance::Synthetic).is_err());
        let bad = vec![LogComplex::new(f64::NAN, 0.0)];
        assert!(Jet::new(bad, Provenance::Synthetic).is_err());
        let bad = vec![LogComplex::new(f64::INFINITY, 0.0)];
        assert!(Jet::new(bad, Provenance::Synthetic).is_err());
    }

    #[test]
    fn series_eval_reports_truncation() {
        let w = log_weight();
        let rep = singular_transform(&unit_jet(32), &w).unwrap();
        // Well inside reach: matches a long partial sum.
        let z = Complex64::new(0.5, 0.0);
        let direct: Complex64 = (0..32)
            .map(|n| {
                Complex64::new(
                    (-w.log_gamma_n(n + 1).unwrap()).exp() * 0.5f64.powi(n as i32),
                    0.0,
                )
            })
            .sum();
        assert!((rep.eval(z).unwrap() - direct).norm() < 1e-12);
        // Far out: truncation must be reported, not silently evaluated.
        match rep.eval(Complex64::new(40.0, 0.0)) {
            Err(Error::TruncationFailure(_)) => {}
            other => panic!("expected truncation failure, got {other:?}"),
        }
    }
}
