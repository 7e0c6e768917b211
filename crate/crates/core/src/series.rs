//! Truncated odd power series `Σ c_k x^(2k+1)`.
//!
//! Houses the Taylor data of the real Haagerup function `h`, its
//! compositional inverse (coefficients `b_{2k+1}`), and the absolute series
//! `φ(x) = Σ |b_{2k+1}| x^(2k+1)`.
//!
//! Inversion is done by coefficient matching. The recurrence is
//! ill-conditioned: rounding errors in the computed `b_{2k+1}` grow roughly
//! like `(4/π)^(2k)`, so in plain `f64` only the first ~30 coefficients are
//! good to `1e-12`. [`invert_with_error`] therefore runs it in double-double
//! arithmetic and returns an error estimate for every coefficient;
//! [`Inversion::reliable_order`] tells callers how far they can be trusted.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{GkError, Result};

/// Default truncation of the `h` series.
pub const DEFAULT_ORDER: usize = 256;

/// Sign tolerance that absorbs rounding at the exactly-zero coefficient `b_5`.
pub const SIGN_TOL: f64 = 1e-12;

/// Number of inverse coefficients computed for the `h⁻¹`/`φ` kernels. The
/// truncation tail at `|x| ≤ 0.72` is below `1e-16` here.
pub const INVERSE_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddPowerSeries {
    coeffs: Vec<f64>,
}

impl OddPowerSeries {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(GkError::InvalidArgument("series order must be at least 1".into()));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(GkError::InvalidArgument(format!("non-finite coefficient {bad}")));
        }
        Ok(Self { coeffs })
    }

    /// The identity series `x`, padded with zeros to `order` coefficients.
    pub fn identity(order: usize) -> Result<Self> {
        let mut coeffs = vec![0.0; order];
        if let Some(first) = coeffs.first_mut() {
            *first = 1.0;
        }
        Self::new(coeffs)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `x^(2k+1)`.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return Err(GkError::InsufficientOrder {
                requested: order,
                available: self.order(),
            });
        }
        Self::new(self.coeffs[..order].to_vec())
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        eval_odd_series(self, x)
    }

    /// Running sums `Σ_{j≤k} |c_j|`.
    pub fn partial_abs_sums(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c.abs();
                Some(*acc)
            })
            .collect()
    }
}

/// First `order` coefficients of `h(x) = Σ π/(4(k+1)) ((2k-1)!!/(2k)!!)² x^(2k+1)`.
pub fn h_coefficients(order: usize) -> Result<OddPowerSeries> {
    if order == 0 {
        return Err(GkError::InvalidArgument("series order must be at least 1".into()));
    }
    let mut ratio = 1.0_f64;
    let coeffs = (0..order)
        .map(|k| {
            if k > 0 {
                ratio *= (2 * k - 1) as f64 / (2 * k) as f64;
            }
            PI / (4.0 * (k + 1) as f64) * ratio * ratio
        })
        .collect();
    OddPowerSeries::new(coeffs)
}

/// Horner evaluation in `x²`; exactly odd in `x`.
pub fn eval_odd_series(s: &OddPowerSeries, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(GkError::Domain {
            value: x,
            domain: "[-1, 1]",
        });
    }
    let x2 = x * x;
    let acc = s.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x2 + c);
    Ok(acc * x)
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2` (double-double).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: err }
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let v = Dd::quick_two_sum(s.hi, s.lo + t.hi);
        Dd::quick_two_sum(v.hi, v.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let err = self.hi.mul_add(o.hi, -p);
        Dd::quick_two_sum(p, err + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::from_f64(q1)).neg());
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::from_f64(q2)).neg());
        let q3 = r.hi / o.hi;
        Dd::quick_two_sum(q1, q2).add(Dd::from_f64(q3))
    }
}

/// Arithmetic used by the coefficient-matching recurrence.
trait Scalar: Copy {
    const ZERO: Self;
    const ONE: Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for Dd {
    const ZERO: Self = Dd { hi: 0.0, lo: 0.0 };
    const ONE: Self = Dd { hi: 1.0, lo: 0.0 };
    fn add(self, o: Self) -> Self {
        Dd::add(self, o)
    }
    fn sub(self, o: Self) -> Self {
        Dd::add(self, o.neg())
    }
    fn mul(self, o: Self) -> Self {
        Dd::mul(self, o)
    }
    fn div(self, o: Self) -> Self {
        Dd::div(self, o)
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Product of two series in `x²`, truncated to `len` coefficients.
fn mul_trunc<T: Scalar>(a: &[T], b: &[T], len: usize) -> Vec<T> {
    let mut out = vec![T::ZERO; len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] = out[i + j].add(ai.mul(bj));
        }
    }
    out
}

/// `powers[j][i]` is the coefficient of `x^(2(i+j)+1)` in `s(x)^(2j+1)`.
fn odd_powers<T: Scalar>(a: &[T], order: usize) -> Vec<Vec<T>> {
    let sq = mul_trunc(a, a, order);
    let mut powers = Vec::with_capacity(order);
    let mut cur = a[..order].to_vec();
    for j in 0..order {
        let next = (j + 1 < order).then(|| mul_trunc(&cur, &sq, order - j - 1));
        powers.push(cur);
        match next {
            Some(n) => cur = n,
            None => break,
        }
    }
    powers
}

/// Coefficient matching: with `g = Σ b_j y^(2j+1)`, the `x^(2N+1)` coefficient
/// of `g(s(x))` is `Σ_{j≤N} b_j [x^(2N+1)] s^(2j+1)`, and the `j = N` term is
/// `b_N a_0^(2N+1)`, so each `b_N` follows from the earlier ones.
fn match_coefficients<T: Scalar>(a: &[T], order: usize) -> Vec<T> {
    let powers = odd_powers(a, order);
    let mut b: Vec<T> = Vec::with_capacity(order);
    for n in 0..order {
        let mut acc = if n == 0 { T::ONE } else { T::ZERO };
        for j in 0..n {
            acc = acc.sub(b[j].mul(powers[j][n - j]));
        }
        b.push(acc.div(powers[n][0]));
    }
    b
}

/// Compositional inverse plus an estimate of the numerical error in every
/// coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub series: OddPowerSeries,
    pub error_bounds: Vec<f64>,
}

impl Inversion {
    /// Longest prefix whose coefficient error estimates all stay below `abs_tol`.
    pub fn reliable_order(&self, abs_tol: f64) -> usize {
        self.error_bounds.iter().take_while(|&&e| e <= abs_tol).count()
    }
}

/// Compositional inverse of `s` to `order` coefficients. See
/// [`invert_with_error`] for the error estimates.
pub fn invert_odd_series(s: &OddPowerSeries, order: usize) -> Result<OddPowerSeries> {
    invert_with_error(s, order).map(|inv| inv.series)
}

/// Runs the recurrence in double-double arithmetic and rounds to `f64`.
///
/// The recurrence amplifies rounding errors by a coefficient-dependent factor
/// (about `1.6^k` for `h`). Running it once in `f64` and once in double-double
/// measures that factor: the `f64` run has error `≈ κ_k · 2^-53`, the
/// double-double run `≈ κ_k · 2^-106`. The estimate returned is
/// `2^-48 · |b_f64 - b_dd|` (a safety factor of 32) plus the final rounding.
///
/// The coefficients of `s` are taken as exact. Perturbing them by one ulp
/// moves the result by about `κ_k · 2^-53`, so for a series whose stored
/// coefficients are themselves rounded (like `h`), see [`h_inverse`].
pub fn invert_with_error(s: &OddPowerSeries, order: usize) -> Result<Inversion> {
    check_invertible(s, order)?;
    let wide: Vec<Dd> = s.coeffs[..order].iter().map(|&c| Dd::from_f64(c)).collect();
    Ok(finish_inversion(&wide, &s.coeffs[..order]))
}

fn check_invertible(s: &OddPowerSeries, order: usize) -> Result<()> {
    if order == 0 {
        return Err(GkError::InvalidArgument("inverse order must be at least 1".into()));
    }
    if order > s.order() {
        return Err(GkError::InsufficientOrder {
            requested: order,
            available: s.order(),
        });
    }
    if s.coeffs[0] == 0.0 {
        return Err(GkError::InvalidArgument(
            "leading coefficient is zero; series is not invertible".into(),
        ));
    }
    Ok(())
}

fn finish_inversion(wide: &[Dd], narrow: &[f64]) -> Inversion {
    let order = narrow.len();
    let wide = match_coefficients::<Dd>(wide, order);
    let narrow = match_coefficients::<f64>(narrow, order);
    let u = f64::EPSILON / 2.0;
    // double-double cancellation floor, relevant only for exact zeros
    let floor = 8.0 * u * u * wide[0].to_f64().abs();
    let mut coeffs = Vec::with_capacity(order);
    let mut bounds = Vec::with_capacity(order);
    for (w, &n) in wide.iter().zip(&narrow) {
        let b = w.to_f64();
        let spread = (n - w.hi - w.lo).abs();
        let bound = if spread.is_finite() && b.is_finite() {
            spread * (32.0 * u) + u * b.abs() + floor
        } else {
            f64::INFINITY
        };
        coeffs.push(if b.is_finite() { b } else { 0.0 });
        bounds.push(bound);
    }
    Inversion {
        series: OddPowerSeries { coeffs },
        error_bounds: bounds,
    }
}

/// `h` coefficients in double-double, from `π` to 32 digits.
fn h_coefficients_wide(order: usize) -> Vec<Dd> {
    let pi = Dd {
        hi: PI,
        lo: 1.224_646_799_147_353_2e-16,
    };
    let mut ratio = Dd::ONE;
    (0..order)
        .map(|k| {
            if k > 0 {
                ratio = ratio.mul(Dd::from_f64((2 * k - 1) as f64).div(Dd::from_f64((2 * k) as f64)));
            }
            pi.div(Dd::from_f64(4.0 * (k + 1) as f64)).mul(ratio).mul(ratio)
        })
        .collect()
}

/// `h⁻¹` to [`INVERSE_ORDER`] coefficients, with error estimates against the
/// exact `b_{2k+1}`.
pub fn h_inverse() -> Inversion {
    h_inverse_with_order(INVERSE_ORDER)
}

pub fn h_inverse_with_order(order: usize) -> Inversion {
    let order = order.max(1);
    let narrow = h_coefficients(order).expect("order >= 1");
    finish_inversion(&h_coefficients_wide(order), narrow.coeffs())
}

/// Coefficients of `outer(inner(x))` up to `order` terms.
pub fn compose(outer: &OddPowerSeries, inner: &OddPowerSeries, order: usize) -> Result<Vec<f64>> {
    if order > outer.order() || order > inner.order() {
        return Err(GkError::InsufficientOrder {
            requested: order,
            available: outer.order().min(inner.order()),
        });
    }
    let powers = odd_powers(&inner.coeffs, order);
    Ok((0..order)
        .map(|n| (0..=n).map(|j| outer.coeffs[j] * powers[j][n - j]).sum())
        .collect())
}

/// Coefficient-wise absolute value; applied to `h⁻¹` this gives `φ`.
pub fn abs_series(s: &OddPowerSeries) -> OddPowerSeries {
    OddPowerSeries {
        coeffs: s.coeffs.iter().map(|c| c.abs()).collect(),
    }
}

/// Entry `k` holds when `b_1 > 0` (k = 0) or `b_{2k+1} ≤ SIGN_TOL` (k ≥ 1).
pub fn check_sign_pattern(b: &OddPowerSeries) -> Vec<bool> {
    b.coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| if k == 0 { c > 0.0 } else { c <= SIGN_TOL })
        .collect()
}
