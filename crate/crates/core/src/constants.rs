//! Named constants: `K^ℝ`, `arcsinh(1)`, `x0`, `c0`, `K^ℂ` and Davie's lower
//! bounds, plus quadrature evaluators for `h` and `H`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GkError, Result};
use crate::quad;
use crate::series;

/// Absolute tolerance for every quadrature in this module.
pub const QUAD_TOL: f64 = 1e-12;

const DAVIE_GRID_STEP: f64 = 1e-4;
const DAVIE_X_TOL: f64 = 1e-10;

/// `π / (2 ln(1 + √2))`.
pub fn krivine_constant() -> f64 {
    PI / (2.0 * arcsinh1())
}

/// `arcsinh(1) = ln(1 + √2)`.
pub fn arcsinh1() -> f64 {
    1.0_f64.asinh()
}

/// `h(x) = x ∫_0^{π/2} cos²t / √(1 - x² sin²t) dt` on `[-1, 1]`.
pub fn haagerup_h(x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(GkError::Domain {
            value: x,
            domain: "[-1, 1]",
        });
    }
    if x.abs() == 1.0 {
        return Ok(x);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let x2 = x * x;
    let q = quad::integrate(
        |t: f64| {
            let (s, c) = t.sin_cos();
            c * c / (1.0 - x2 * s * s).sqrt()
        },
        0.0,
        FRAC_PI_2,
        QUAD_TOL,
    );
    Ok(x * q.value)
}

/// `H(z) = sign(z) h(|z|)` on the closed unit disk.
#[allow(non_snake_case)]
pub fn haagerup_H(z: Complex64) -> Result<Complex64> {
    let r = z.norm();
    if !(r <= 1.0) {
        return Err(GkError::Domain {
            value: r,
            domain: "|z| <= 1",
        });
    }
    if r == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(z / r * haagerup_h(r)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct X0Solution {
    pub x0: f64,
    pub c0: f64,
    /// `|h(x0) - π(x0 + 1)/8|`.
    pub residual: f64,
    /// `φ(c0)`, which should be 1.
    pub phi_c0: f64,
}

fn x0_gap(x: f64) -> Result<f64> {
    Ok(haagerup_h(x)? - PI * (x + 1.0) / 8.0)
}

/// Bisection for the root of `h(x) = π(x + 1)/8` in `[0, 1]`.
pub fn solve_x0(tol: f64) -> Result<X0Solution> {
    if !(tol > 0.0 && tol <= 1e-10) {
        return Err(GkError::InvalidArgument(format!(
            "tolerance must lie in (0, 1e-10], got {tol}"
        )));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let (g_lo, g_hi) = (x0_gap(lo)?, x0_gap(hi)?);
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(GkError::Numerical(format!(
            "no sign change for x0: g(0) = {g_lo}, g(1) = {g_hi}"
        )));
    }
    let mut mid = 0.5;
    let mut g_mid = x0_gap(mid)?;
    while hi - lo > 4.0 * f64::EPSILON && g_mid.abs() >= tol / 16.0 {
        if g_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        g_mid = x0_gap(mid)?;
    }
    if g_mid.abs() >= tol {
        return Err(GkError::Numerical(format!(
            "x0 bisection stalled with residual {:e}",
            g_mid.abs()
        )));
    }
    let c0 = PI * (mid + 1.0) / 8.0;
    let phi = series::abs_series(&series::h_inverse().series);
    Ok(X0Solution {
        x0: mid,
        c0,
        residual: g_mid.abs(),
        phi_c0: phi.eval(c0)?,
    })
}

fn x0_cached() -> Result<X0Solution> {
    static CELL: OnceLock<Result<X0Solution>> = OnceLock::new();
    CELL.get_or_init(|| solve_x0(1e-12)).clone()
}

/// `K^ℂ = 1/c0 = 8 / (π (x0 + 1))`.
pub fn haagerup_constant() -> Result<f64> {
    Ok(1.0 / x0_cached()?.c0)
}

/// `x0` and `c0` at residual below `1e-12`, computed once per process.
pub fn haagerup_x0() -> Result<X0Solution> {
    x0_cached()
}

/// Supremum of a one-dimensional ratio found by grid scan plus golden section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DavieBound {
    pub value: f64,
    pub argmax: f64,
    /// The grid samples increase up to the argmax and decrease after it.
    pub unimodal: bool,
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn scan_supremum<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> DavieBound {
    let steps = ((hi - lo) / DAVIE_GRID_STEP).round() as usize;
    let xs: Vec<f64> = (1..=steps).map(|i| lo + i as f64 * DAVIE_GRID_STEP).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let best = ys
        .iter()
        .enumerate()
        .fold(0, |best, (i, &y)| if y > ys[best] { i } else { best });
    // noise allowance well above quadrature error
    let slack = 1e-11;
    let unimodal = ys[..=best].windows(2).all(|w| w[1] >= w[0] - slack)
        && ys[best..].windows(2).all(|w| w[1] <= w[0] + slack);
    let a = if best == 0 { lo } else { xs[best - 1] };
    let b = xs.get(best + 1).copied().unwrap_or(hi);
    let x = golden_max(&f, a, b, DAVIE_X_TOL);
    let (value, argmax) = if f(x) >= ys[best] { (f(x), x) } else { (ys[best], xs[best]) };
    DavieBound {
        value,
        argmax,
        unimodal,
    }
}

/// `∫_x^∞ e^{-t²/2} dt`.
pub fn gaussian_tail_half(x: f64) -> f64 {
    quad::integrate_to_infinity(|t| (-0.5 * t * t).exp(), x, QUAD_TOL).value
}

/// `∫_x^∞ e^{-t²} dt`.
pub fn gaussian_tail(x: f64) -> f64 {
    quad::integrate_to_infinity(|t| (-t * t).exp(), x, QUAD_TOL).value
}

/// Davie's `ρ(x) = √(2/π) x e^{-x²/2}`.
pub fn davie_rho(x: f64) -> f64 {
    (2.0 / PI).sqrt() * x * (-0.5 * x * x).exp()
}

/// Davie's `f(x) = (2/π) e^{-x²} + ρ(x) [1 - √(8/π) ∫_x^∞ e^{-t²/2} dt]`.
pub fn davie_f(x: f64) -> f64 {
    2.0 / PI * (-x * x).exp() + davie_rho(x) * (1.0 - (8.0 / PI).sqrt() * gaussian_tail_half(x))
}

/// `(1 - ρ(x)) / max(ρ(x), f(x))`.
pub fn davie_real_ratio(x: f64) -> f64 {
    let rho = davie_rho(x);
    (1.0 - rho) / rho.max(davie_f(x))
}

/// Davie's `θ(x) = ½ [1 - e^{-x²} + x ∫_x^∞ e^{-t²} dt]`.
pub fn davie_theta(x: f64) -> f64 {
    0.5 * (-(-x * x).exp_m1() + x * gaussian_tail(x))
}

/// Davie's `g(x) = [(1 - e^{-x²})/x + ∫_x^∞ e^{-t²}]² + θ(x) [1 - 2(1 - e^{-x²})/x²]`.
pub fn davie_g(x: f64) -> f64 {
    let one_minus = -(-x * x).exp_m1();
    let first = one_minus / x + gaussian_tail(x);
    first * first + davie_theta(x) * (1.0 - 2.0 * one_minus / (x * x))
}

/// `(1 - θ(x)) / g(x)`.
pub fn davie_complex_ratio(x: f64) -> f64 {
    (1.0 - davie_theta(x)) / davie_g(x)
}

/// `sup_{x ∈ (0,1)} (1 - ρ) / max(ρ, f)`, computed once per process.
pub fn davie_real_bound() -> DavieBound {
    static CELL: OnceLock<DavieBound> = OnceLock::new();
    *CELL.get_or_init(|| scan_supremum(davie_real_ratio, 0.0, 1.0 - DAVIE_GRID_STEP))
}

/// `sup_{x ∈ (0,10]} (1 - θ) / g`, computed once per process.
pub fn davie_complex_bound() -> DavieBound {
    static CELL: OnceLock<DavieBound> = OnceLock::new();
    *CELL.get_or_init(|| scan_supremum(davie_complex_ratio, 0.0, 10.0))
}

/// Largest `|h_quadrature - h_series|` on a uniform grid of `|x| ≤ 0.95`.
pub fn h_series_discrepancy(order: usize, points: usize) -> Result<f64> {
    let s = series::h_coefficients(order)?;
    let mut worst = 0.0_f64;
    for i in 0..=points {
        let x = -0.95 + 1.9 * i as f64 / points as f64;
        worst = worst.max((haagerup_h(x)? - s.eval(x)?).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub k_real: f64,
    pub c_arcsinh1: f64,
    pub x0: f64,
    pub c0: f64,
    pub k_complex: f64,
    pub davie_real: f64,
    pub davie_real_argmax: f64,
    pub davie_real_unimodal: bool,
    pub davie_complex: f64,
    pub davie_complex_argmax: f64,
    pub davie_complex_unimodal: bool,
    pub tolerances: BTreeMap<String, f64>,
    /// `1 < davie_complex < k_complex < davie_real < k_real`.
    pub ordering_ok: bool,
}

impl ConstantsReport {
    pub fn compute(series_order: usize) -> Result<Self> {
        let k_real = krivine_constant();
        let c = arcsinh1();
        let sol = x0_cached()?;
        let k_complex = 1.0 / sol.c0;
        let dr = davie_real_bound();
        let dc = davie_complex_bound();
        let mut tolerances = BTreeMap::new();
        tolerances.insert("x0_residual".to_string(), sol.residual);
        tolerances.insert("phi_c0".to_string(), (sol.phi_c0 - 1.0).abs());
        tolerances.insert(
            "arcsinh1_log_form".to_string(),
            (c - (1.0 + 2.0_f64.sqrt()).ln()).abs(),
        );
        tolerances.insert(
            "h_series_vs_quadrature".to_string(),
            h_series_discrepancy(series_order, 190)?,
        );
        tolerances.insert("davie_argmax_x".to_string(), DAVIE_X_TOL);
        let ordering_ok = 1.0 < dc.value && dc.value < k_complex && k_complex < dr.value && dr.value < k_real;
        Ok(Self {
            k_real,
            c_arcsinh1: c,
            x0: sol.x0,
            c0: sol.c0,
            k_complex,
            davie_real: dr.value,
            davie_real_argmax: dr.argmax,
            davie_real_unimodal: dr.unimodal,
            davie_complex: dc.value,
            davie_complex_argmax: dc.argmax,
            davie_complex_unimodal: dc.unimodal,
            tolerances,
            ordering_ok,
        })
    }
}
