//! Numerical certificates for `b_{2k+1} ≤ 0`.
//!
//! On `[1, ∞)` the analytic extension `h₊` of `h` has real part
//! `h₁(x) = ∫ √(1 - x⁻² sin²t)` and imaginary part
//! `h₂(x) = m ∫ sin²t / √(1 - m sin²t)` with `m = 1 - x⁻²` (both over
//! `[0, π/2]`). For `α > 1`,
//!
//! ```text
//! b_{2k+1} = 2/(π(2k+1)) ∫_1^α Im(h₊(x)^-(2k+1)) dx + r_k(α),
//! |r_k(α)| ≤ α/(2k+1) · h₂(α)^-(2k+1),
//! ```
//!
//! and [`bk_integral`] evaluates the integral with `α = 4`, split at the zeros
//! of `sin((2k+1)θ(x))`, `θ = Arg h₊`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GkError, Result};
use crate::quad::{self, Quadrature};
use crate::series;

/// Upper limit of the contour integral.
pub const ALPHA: f64 = 4.0;

/// Tolerance of the inner quadratures for `h₁`, `h₂` and their derivatives.
const INNER_TOL: f64 = 1e-14;

/// Tolerance of each panel of the outer integral.
const OUTER_TOL: f64 = 1e-14;

/// Safety factor on the accumulated quadrature error estimate.
const ERROR_SAFETY: f64 = 10.0;

/// Coefficients up to this `k` are decided from the series alone.
pub const SERIES_ONLY_KMAX: usize = 8;

/// `|h₊(x)|² - 7π/4` at `x = α` must be negative for the monotonicity step.
pub const MONOTONICITY_MARGIN_TARGET: f64 = -0.1187;

fn check_domain(x: f64, open: bool) -> Result<()> {
    let ok = if open { x > 1.0 } else { x >= 1.0 };
    if !ok || !x.is_finite() {
        return Err(GkError::Domain {
            value: x,
            domain: if open { "(1, inf)" } else { "[1, inf)" },
        });
    }
    Ok(())
}

fn integrate_half_pi<F: Fn(f64) -> f64>(f: F) -> Quadrature {
    quad::integrate(f, 0.0, FRAC_PI_2, INNER_TOL)
}

/// `E(y) = ∫_0^{π/2} √(1 - y² sin²t) dt` for `|y| ≤ 1`.
pub fn elliptic_e(y: f64) -> Result<f64> {
    if !(y.abs() <= 1.0) {
        return Err(GkError::Domain { value: y, domain: "[-1, 1]" });
    }
    let y2 = y * y;
    Ok(integrate_half_pi(|t| {
        let s = t.sin();
        (1.0 - y2 * s * s).max(0.0).sqrt()
    })
    .value)
}

/// `K(y) = ∫_0^{π/2} (1 - y² sin²t)^{-1/2} dt` for `|y| < 1`.
pub fn elliptic_k(y: f64) -> Result<f64> {
    if !(y.abs() < 1.0) {
        return Err(GkError::Domain { value: y, domain: "(-1, 1)" });
    }
    let y2 = y * y;
    Ok(integrate_half_pi(|t| {
        let s = t.sin();
        1.0 / (1.0 - y2 * s * s).sqrt()
    })
    .value)
}

/// `h₁(x) = ∫_0^{π/2} √(1 - x⁻² sin²t) dt = E(1/x)`.
pub fn h1(x: f64) -> Result<f64> {
    check_domain(x, false)?;
    elliptic_e(1.0 / x)
}

/// `h₂(x) = m ∫_0^{π/2} sin²t / √(1 - m sin²t) dt`, `m = 1 - x⁻²`.
///
/// For `x > 2` the integrand peaks sharply at `t = π/2`. There the part near
/// `π/2` is rewritten with `cos t = sinh(w) / √(x² - 1)`, which turns
/// `sin²t / √(1 - m sin²t) dt` into `sin t / √m dw`.
pub fn h2(x: f64) -> Result<f64> {
    check_domain(x, false)?;
    if x == 1.0 {
        return Ok(0.0);
    }
    let m = 1.0 - 1.0 / (x * x);
    let t_form = |t: f64| {
        let s = t.sin();
        s * s / (1.0 - m * s * s).sqrt()
    };
    if x <= 2.0 {
        return Ok(m * integrate_half_pi(t_form).value);
    }
    let g = (x * x - 1.0).sqrt();
    let w_max = g.asinh();
    let w_split = 0.5 * w_max;
    let near = quad::integrate(
        |w: f64| {
            let c = w.sinh() / g;
            (1.0 - c * c).max(0.0).sqrt() / m.sqrt()
        },
        0.0,
        w_split,
        INNER_TOL,
    );
    let t_split = (w_split.sinh() / g).acos();
    let far = quad::integrate(t_form, 0.0, t_split, INNER_TOL);
    Ok(m * (near.value + far.value))
}

/// `h₁'(x) = x⁻² ∫_0^{π/2} sin²t / √(x² - sin²t) dt`.
pub fn h1_prime(x: f64) -> Result<f64> {
    check_domain(x, true)?;
    let x2 = x * x;
    Ok(integrate_half_pi(|t| {
        let s = t.sin();
        s * s / (x2 - s * s).sqrt()
    })
    .value
        / x2)
}

/// `h₂'(x) = x⁻¹ ∫_0^{π/2} √(1 - (1 - x⁻²) sin²t) dt = E(√(1 - x⁻²)) / x`.
pub fn h2_prime(x: f64) -> Result<f64> {
    check_domain(x, false)?;
    Ok(elliptic_e((1.0 - 1.0 / (x * x)).sqrt())? / x)
}

/// `(2k)! / (4^k (k!)²)` for `k = 0..terms`.
fn central_ratios(terms: usize) -> impl Iterator<Item = (usize, f64)> {
    (0..terms).scan(1.0_f64, |r, k| {
        if k > 0 {
            *r *= (2 * k - 1) as f64 / (2 * k) as f64;
        }
        Some((k, *r))
    })
}

/// Taylor series of `h₁` in `x⁻²`, summed to `terms` terms.
pub fn h1_series(x: f64, terms: usize) -> Result<f64> {
    check_domain(x, false)?;
    let u = 1.0 / (x * x);
    let mut pow = 1.0;
    let mut sum = 0.0;
    for (k, r) in central_ratios(terms) {
        sum += r * r / (1.0 - 2.0 * k as f64) * pow;
        pow *= u;
    }
    Ok(FRAC_PI_2 * sum)
}

/// Taylor series of `h₂` in `1 - x⁻²`, summed to `terms` terms.
pub fn h2_series(x: f64, terms: usize) -> Result<f64> {
    check_domain(x, false)?;
    let m = 1.0 - 1.0 / (x * x);
    let mut pow = 1.0;
    let mut sum = 0.0;
    for (k, r) in central_ratios(terms) {
        let kf = k as f64;
        sum += r * r * (2.0 * kf / (2.0 * kf - 1.0)) * pow;
        pow *= m;
    }
    Ok(FRAC_PI_2 * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaagerupCurvePoint {
    pub x: f64,
    pub h1: f64,
    pub h2: f64,
    /// `Arg(h₁ + i h₂)`.
    pub theta: f64,
    /// `|h₊(x)|`.
    pub modulus: f64,
}

pub fn curve_eval(x: f64) -> Result<HaagerupCurvePoint> {
    let a = h1(x)?;
    let b = h2(x)?;
    Ok(HaagerupCurvePoint {
        x,
        h1: a,
        h2: b,
        theta: b.atan2(a),
        modulus: a.hypot(b),
    })
}

pub fn theta(x: f64) -> Result<f64> {
    Ok(curve_eval(x)?.theta)
}

/// `ω₁(x) = x (h₁ h₂' - h₁' h₂)`, identically `π/2`.
pub fn omega1(x: f64) -> Result<f64> {
    check_domain(x, true)?;
    Ok(x * (h1(x)? * h2_prime(x)? - h1_prime(x)? * h2(x)?))
}

/// `ω₂(x) = x (h₁ h₁' + h₂ h₂')`.
pub fn omega2(x: f64) -> Result<f64> {
    check_domain(x, true)?;
    Ok(x * (h1(x)? * h1_prime(x)? + h2(x)? * h2_prime(x)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Omega2Report {
    /// `2 h₁(√2) h₂(√2)`.
    pub bound: f64,
    pub exceeds_pi_over_4: bool,
    /// Smallest `ω₂` on the grid over `[1.001, √2]`.
    pub grid_min: f64,
    pub grid_min_at: f64,
    pub grid_points: usize,
    pub ok: bool,
}

/// `2 h₁(√2) h₂(√2)` and a grid check that `ω₂` stays above it on
/// `[1.001, √2]`.
pub fn omega2_lower_bound(grid_points: usize) -> Result<Omega2Report> {
    let p = curve_eval(SQRT_2)?;
    let bound = 2.0 * p.h1 * p.h2;
    let (lo, hi) = (1.001, SQRT_2);
    let points = grid_points.max(2);
    let values: Vec<(f64, f64)> = (0..points)
        .into_par_iter()
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            omega2(x).map(|w| (x, w))
        })
        .collect::<Result<_>>()?;
    let (grid_min_at, grid_min) = values
        .iter()
        .copied()
        .fold((lo, f64::INFINITY), |acc, (x, w)| if w < acc.1 { (x, w) } else { acc });
    // the bound is attained at √2, so allow quadrature noise there
    let ok = bound > PI / 4.0 && grid_min >= bound - 1e-10;
    Ok(Omega2Report {
        bound,
        exceeds_pi_over_4: bound > PI / 4.0,
        grid_min,
        grid_min_at,
        grid_points: points,
        ok,
    })
}

/// Solves `θ(x) = target` on `[1, α]` by bisection.
fn theta_inverse(target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1.0_f64, ALPHA);
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if theta(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Integrand `Im(h₊(x)^-n) = -|h₊|^-n sin(nθ)`.
fn im_inverse_power(x: f64, n: i32) -> f64 {
    match curve_eval(x) {
        Ok(p) => -p.modulus.powi(-n) * (n as f64 * p.theta).sin(),
        Err(_) => f64::NAN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedNegative,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BkCertificate {
    pub k: usize,
    pub alpha: f64,
    /// `2/(π(2k+1)) ∫_1^α Im(h₊^-(2k+1))`.
    pub integral_value: f64,
    /// Ten times the accumulated panel error estimate.
    pub quadrature_error: f64,
    /// `α/(2k+1) · h₂(α)^-(2k+1)`.
    pub remainder_bound: f64,
    pub series_value: f64,
    pub series_error: f64,
    pub verdict: Verdict,
    /// `|integral_value - series_value| ≤ quadrature_error + remainder_bound + 1e-9`.
    pub agrees_with_series: bool,
    /// Zeros of `sin((2k+1)θ)` in `(1, α)`.
    pub breakpoints: Vec<f64>,
    /// Unsigned panel integrals `I_1..I_p` followed by `J`, each scaled by
    /// `2/(π(2k+1))`.
    pub panels: Vec<f64>,
}

impl BkCertificate {
    pub fn p(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn i_values(&self) -> &[f64] {
        &self.panels[..self.p()]
    }

    pub fn j_value(&self) -> f64 {
        self.panels[self.p()]
    }
}

/// Integral certificate for `b_{2k+1}` with `α = 4`.
pub fn bk_integral(k: usize) -> Result<BkCertificate> {
    let inverse = series::h_inverse_with_order((k + 1).max(series::INVERSE_ORDER));
    bk_integral_with(k, &inverse)
}

fn bk_integral_with(k: usize, inverse: &series::Inversion) -> Result<BkCertificate> {
    if k == 0 {
        return Err(GkError::InvalidArgument("k must be at least 1".into()));
    }
    let n = 2 * k + 1;
    let nf = n as f64;
    let theta_alpha = theta(ALPHA)?;
    let p = (nf * theta_alpha / PI).floor() as usize;
    let breakpoints: Vec<f64> = (1..=p)
        .map(|r| theta_inverse(r as f64 * PI / nf))
        .collect::<Result<_>>()?;
    let mut edges = vec![1.0];
    edges.extend(&breakpoints);
    edges.push(ALPHA);
    let scale = 2.0 / (PI * nf);
    let pieces: Vec<Quadrature> = edges
        .windows(2)
        .map(|w| quad::integrate(|x| im_inverse_power(x, n as i32), w[0], w[1], OUTER_TOL))
        .collect();
    if pieces.iter().any(|q| !q.value.is_finite()) {
        return Err(GkError::Numerical(format!("non-finite panel integral for k = {k}")));
    }
    let integral_value = scale * pieces.iter().map(|q| q.value).sum::<f64>();
    let panels: Vec<f64> = pieces.iter().map(|q| scale * q.value.abs()).collect();
    // inner h₁/h₂ errors of ~INNER_TOL perturb |h₊|^-n by ~n·INNER_TOL relatively
    let inner = nf * INNER_TOL * panels.iter().sum::<f64>();
    let quadrature_error = ERROR_SAFETY * (scale * pieces.iter().map(|q| q.error).sum::<f64>() + inner);
    let remainder_bound = ALPHA / nf * h2(ALPHA)?.powi(-(n as i32));
    let series_value = inverse.series.coeff(k);
    let series_error = inverse.error_bounds[k];
    let verdict = if integral_value + quadrature_error + remainder_bound < 0.0 {
        Verdict::CertifiedNegative
    } else {
        Verdict::Inconclusive
    };
    let agrees_with_series =
        (integral_value - series_value).abs() <= quadrature_error + remainder_bound + series_error + 1e-9;
    Ok(BkCertificate {
        k,
        alpha: ALPHA,
        integral_value,
        quadrature_error,
        remainder_bound,
        series_value,
        series_error,
        verdict,
        agrees_with_series,
        breakpoints,
        panels,
    })
}

/// `c = |h₊(√2)| e^{-θ(√2)/2}`.
pub fn lemma53_c() -> Result<f64> {
    let p = curve_eval(SQRT_2)?;
    Ok(p.modulus * (-0.5 * p.theta).exp())
}

/// `|h₊(α)|² - 7π/4`.
pub fn monotonicity_margin() -> Result<f64> {
    let p = curve_eval(ALPHA)?;
    Ok(p.modulus * p.modulus - 7.0 * PI / 4.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma53Report {
    pub k: usize,
    pub p: usize,
    pub i_values: Vec<f64>,
    pub j_value: f64,
    pub c: f64,
    /// `0.57 c^-(2k+1) / (2k+1)²`.
    pub i1_lower_bound: f64,
    pub p_at_least_2: bool,
    /// `I_1 > I_2 > ... > I_p > J`.
    pub strictly_decreasing: bool,
    /// `I_2 < 0.85 I_1`.
    pub i2_ratio: f64,
    pub i2_ratio_ok: bool,
    pub i1_bound_ok: bool,
    /// `x |h₊(x)|^-(2k-1)` strictly decreasing on the grid over `[1, α]`.
    pub driver_decreasing: bool,
    /// `x |h₊(x)|^-(2k+1)` strictly decreasing on the same grid.
    pub driver_decreasing_2k_plus_1: bool,
    pub ok: bool,
}

/// Panel decomposition checks for `k ≥ 4`.
pub fn lemma53_checks(k: usize) -> Result<Lemma53Report> {
    lemma53_for(&bk_integral(k)?, lemma53_c()?)
}

fn driver_grid() -> Result<Vec<HaagerupCurvePoint>> {
    let points = 301;
    (0..points)
        .into_par_iter()
        .map(|i| curve_eval(1.0 + (ALPHA - 1.0) * i as f64 / (points - 1) as f64))
        .collect()
}

fn driver_decreasing(grid: &[HaagerupCurvePoint], exponent: i32) -> bool {
    grid.windows(2)
        .all(|w| w[1].x * w[1].modulus.powi(-exponent) < w[0].x * w[0].modulus.powi(-exponent))
}

/// Same checks on an existing certificate, with `c` from [`lemma53_c`].
pub fn lemma53_for(cert: &BkCertificate, c: f64) -> Result<Lemma53Report> {
    let k = cert.k;
    if k < 4 {
        return Err(GkError::InvalidArgument(format!("panel checks need k >= 4, got {k}")));
    }
    let n = 2 * k + 1;
    let i_values = cert.i_values().to_vec();
    let j_value = cert.j_value();
    let p = cert.p();
    let strictly_decreasing = cert.panels.windows(2).all(|w| w[0] > w[1]);
    let i2_ratio = if p >= 2 { i_values[1] / i_values[0] } else { f64::NAN };
    let i1_lower_bound = 0.57 * c.powi(-(n as i32)) / (n * n) as f64;
    let grid = driver_grid()?;
    let driver = driver_decreasing(&grid, 2 * k as i32 - 1);
    let driver_2k1 = driver_decreasing(&grid, n as i32);
    let p_at_least_2 = p >= 2;
    let i2_ratio_ok = i2_ratio < 0.85;
    let i1_bound_ok = i_values.first().is_some_and(|&i1| i1 > i1_lower_bound);
    Ok(Lemma53Report {
        k,
        p,
        i_values,
        j_value,
        c,
        i1_lower_bound,
        p_at_least_2,
        strictly_decreasing,
        i2_ratio,
        i2_ratio_ok,
        i1_bound_ok,
        driver_decreasing: driver,
        driver_decreasing_2k_plus_1: driver_2k1,
        ok: p_at_least_2 && strictly_decreasing && i2_ratio_ok && i1_bound_ok && driver && driver_2k1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecidedBy {
    /// `k ≤ 8`: series value `≤ 1e-12`.
    Series,
    /// Integral certificate is negative.
    Integral,
    /// Series value below `-10×` its error estimate.
    SeriesMargin,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonpositivityEntry {
    pub k: usize,
    pub series_value: f64,
    pub series_error: f64,
    pub certificate: Option<BkCertificate>,
    pub decided_by: DecidedBy,
    pub nonpositive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonpositivityReport {
    pub kmax: usize,
    pub entries: Vec<NonpositivityEntry>,
    pub all_nonpositive: bool,
}

/// Decides `b_{2k+1} ≤ 0` for `k = 1..=kmax`: series values for `k ≤ 8`,
/// then the integral certificate, falling back to a series value that is
/// negative by more than ten times its error estimate.
pub fn certify_nonpositivity(kmax: usize) -> Result<NonpositivityReport> {
    if kmax == 0 {
        return Err(GkError::InvalidArgument("kmax must be at least 1".into()));
    }
    let inverse = series::h_inverse_with_order((kmax + 1).max(series::INVERSE_ORDER));
    let entries = (1..=kmax)
        .into_par_iter()
        .map(|k| {
            let series_value = inverse.series.coeff(k);
            let series_error = inverse.error_bounds[k];
            if k <= SERIES_ONLY_KMAX {
                let nonpositive = series_value <= series::SIGN_TOL;
                return Ok(NonpositivityEntry {
                    k,
                    series_value,
                    series_error,
                    certificate: None,
                    decided_by: if nonpositive { DecidedBy::Series } else { DecidedBy::Undecided },
                    nonpositive,
                });
            }
            let cert = bk_integral_with(k, &inverse)?;
            let decided_by = if cert.verdict == Verdict::CertifiedNegative {
                DecidedBy::Integral
            } else if series_value < -ERROR_SAFETY * series_error {
                DecidedBy::SeriesMargin
            } else {
                DecidedBy::Undecided
            };
            Ok(NonpositivityEntry {
                k,
                series_value,
                series_error,
                certificate: Some(cert),
                nonpositive: decided_by != DecidedBy::Undecided,
                decided_by,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NonpositivityReport {
        kmax,
        all_nonpositive: entries.iter().all(|e| e.nonpositive),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn endpoint_values() {
        let p = curve_eval(1.0).unwrap();
        assert_abs_diff_eq!(p.h1, 1.0, epsilon = 1e-14);
        assert_eq!(p.h2, 0.0);
        assert_eq!(p.theta, 0.0);
        assert!(curve_eval(0.99).is_err());
    }

    #[test]
    fn tabulated_values() {
        let a = curve_eval(SQRT_2).unwrap();
        assert_abs_diff_eq!(a.h1, 1.3506438, epsilon = 1e-7);
        assert_abs_diff_eq!(a.h2, 0.5034307, epsilon = 1e-7);
        let b = curve_eval(4.0).unwrap();
        assert_abs_diff_eq!(b.h1, 1.5459572, epsilon = 1e-7);
        assert_abs_diff_eq!(b.h2, 1.7289033, epsilon = 1e-7);
        assert_abs_diff_eq!(b.theta, 0.8412, epsilon = 1e-4);
        assert!(a.theta > PI / 9.0);
    }

    #[test]
    fn h2_forms_agree_across_the_switch() {
        // t-form only, with a tight tolerance, as the oracle
        for &x in &[2.0 + 1e-9, 3.0, 10.0] {
            let m: f64 = 1.0 - 1.0 / (x * x);
            let direct = m
                * quad::integrate(
                    |t: f64| {
                        let s = t.sin();
                        s * s / (1.0 - m * s * s).sqrt()
                    },
                    0.0,
                    FRAC_PI_2,
                    1e-15,
                )
                .value;
            assert_abs_diff_eq!(h2(x).unwrap(), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn h2_matches_k_minus_e() {
        for &x in &[1.1f64, 1.5, 3.0, 8.0] {
            let y = (1.0 - 1.0 / (x * x)).sqrt();
            let oracle = elliptic_k(y).unwrap() - elliptic_e(y).unwrap();
            assert_abs_diff_eq!(h2(x).unwrap(), oracle, epsilon = 1e-11);
        }
    }

    #[test]
    fn series_cross_checks() {
        for i in 0..20 {
            let x = 1.05 + 0.25 * i as f64;
            assert_abs_diff_eq!(h1(x).unwrap(), h1_series(x, 4000).unwrap(), epsilon = 1e-9);
        }
        for &x in &[SQRT_2, 1.2, 1.6] {
            assert_abs_diff_eq!(h2(x).unwrap(), h2_series(x, 400).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn omega1_is_constant() {
        for &x in &[1.01, 1.5, 10.0, 50.0] {
            assert_abs_diff_eq!(omega1(x).unwrap(), FRAC_PI_2, epsilon = 1e-9);
        }
        assert!(omega1(1.0).is_err());
    }

    #[test]
    fn h1_prime_by_finite_difference() {
        let h = 1e-5;
        let fd = (h1(2.0 + h).unwrap() - h1(2.0 - h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(h1_prime(2.0).unwrap(), fd, epsilon = 1e-6);
        let fd = (h2(2.5 + h).unwrap() - h2(2.5 - h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(h2_prime(2.5).unwrap(), fd, epsilon = 1e-6);
    }

    #[test]
    fn h1_prime_bound() {
        for i in 1..50 {
            let x = 1.0 + i as f64;
            let d = h1_prime(x).unwrap();
            assert!(d > 0.0 && d <= PI / (4.0 * x * x * (x * x - 1.0).sqrt()));
        }
    }

    #[test]
    fn elliptic_derivative_identities() {
        let h = 1e-5;
        for &y in &[0.3, 0.6, 0.9] {
            let (e, k) = (elliptic_e(y).unwrap(), elliptic_k(y).unwrap());
            let de = (elliptic_e(y + h).unwrap() - elliptic_e(y - h).unwrap()) / (2.0 * h);
            let dk = (elliptic_k(y + h).unwrap() - elliptic_k(y - h).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(de, (e - k) / y, epsilon = 1e-6);
            assert_abs_diff_eq!(dk, (e - (1.0 - y * y) * k) / (y * (1.0 - y * y)), epsilon = 1e-6);
        }
    }

    #[test]
    fn omega2_bound() {
        let r = omega2_lower_bound(41).unwrap();
        assert_abs_diff_eq!(r.bound, 2.0 * 1.35064 * 0.50343, epsilon = 1e-4);
        assert!(r.ok, "{r:?}");
        assert!(omega2(1.2).unwrap() >= r.bound);
    }

    #[test]
    fn lemma53_constants() {
        assert_abs_diff_eq!(lemma53_c().unwrap(), 1.2059, epsilon = 1e-3);
        assert_abs_diff_eq!(monotonicity_margin().unwrap(), -0.1187, epsilon = 1e-3);
    }

    #[test]
    fn k4_decomposition() {
        let r = lemma53_checks(4).unwrap();
        assert_eq!(r.p, 2);
        assert!(r.ok, "{r:?}");
        assert!(lemma53_checks(3).is_err());
    }

    #[test]
    fn certificates_agree_with_series() {
        for k in [4, 6, 12] {
            let c = bk_integral(k).unwrap();
            assert!(c.agrees_with_series, "{c:?}");
            assert!(c.integral_value < 0.0);
        }
        let c12 = bk_integral(12).unwrap();
        assert_eq!(c12.verdict, Verdict::CertifiedNegative);
        assert!(c12.remainder_bound < 1e-3 * c12.integral_value.abs());
    }

    #[test]
    fn k4_remainder_dominates_at_alpha_four() {
        let c = bk_integral(4).unwrap();
        // the integral is about -2.65e-3 but the remainder bound is 3.2e-3
        assert!(c.remainder_bound > c.integral_value.abs());
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn small_k_certificate_is_inconclusive_but_series_decides() {
        let c = bk_integral(1).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(c.series_value < 0.0);
    }

    #[test]
    fn nonpositivity_to_17() {
        let r = certify_nonpositivity(17).unwrap();
        assert!(r.all_nonpositive);
        assert_eq!(r.entries[1].decided_by, DecidedBy::Series);
        assert!(r.entries[8..].iter().all(|e| e.decided_by == DecidedBy::Integral));
        assert!(certify_nonpositivity(0).is_err());
    }

    #[test]
    fn theta_monotone_towards_half_pi() {
        let xs: Vec<f64> = (0..=60).map(|i| 100f64.powf(i as f64 / 60.0)).collect();
        let ts: Vec<f64> = xs.iter().map(|&x| theta(x).unwrap()).collect();
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert!(ts.last().unwrap() < &FRAC_PI_2);
        assert!(ts.last().unwrap() > &1.2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn modulus_consistent(x in 1.0f64..60.0) {
            let p = curve_eval(x).unwrap();
            prop_assert!((p.modulus * p.modulus - (p.h1 * p.h1 + p.h2 * p.h2)).abs() < 1e-12 * p.modulus * p.modulus);
            prop_assert!(p.h1 >= 1.0 && p.h1 < FRAC_PI_2);
            prop_assert!(p.h2 >= 0.0);
            prop_assert!(p.theta >= 0.0 && p.theta < FRAC_PI_2);
        }

        #[test]
        fn omega1_on_random_points(x in 1.01f64..50.0) {
            prop_assert!((omega1(x).unwrap() - FRAC_PI_2).abs() < 1e-9);
        }
    }
}
