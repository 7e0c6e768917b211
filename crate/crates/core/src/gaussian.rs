//! Sign function, Gaussian sampling and Monte Carlo checks of the
//! sign-product identity `E[sign⟨u,z⟩ sign⟨z,v⟩] = (2/π) arcsin⟨u,v⟩` (real)
//! or `H(⟨u,v⟩)` (complex).
//!
//! Sampling is split into fixed-size chunks. Chunk `i` draws from a ChaCha8
//! stream seeded with `seed` and stream id `i`, so results depend only on
//! `(seed, samples)` and not on the number of worker threads.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{GkError, Result};

/// Samples per RNG stream.
pub const CHUNK_SIZE: usize = 8192;

/// Tolerance on `‖u‖ = 1`.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl std::str::FromStr for Field {
    type Err = GkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" | "R" => Ok(Field::Real),
            "complex" | "C" => Ok(Field::Complex),
            other => Err(GkError::InvalidArgument(format!("unknown field {other:?}"))),
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

pub fn sign_real(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `z / |z|`, and `0` at the origin.
pub fn sign_complex(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z / r
    }
}

/// Sign in the given field; for [`Field::Real`] only the real part counts.
pub fn sign_f(z: Complex64, field: Field) -> Complex64 {
    match field {
        Field::Real => Complex64::new(sign_real(z.re), 0.0),
        Field::Complex => sign_complex(z),
    }
}

/// `⟨x, y⟩ = Σ x_k conj(y_k)`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Fills `z` with a standard Gaussian vector of the field: i.i.d. `N(0,1)`
/// for real, and real/imaginary parts `N(0,1/2)` for complex.
pub fn fill_gaussian<R: rand::Rng + ?Sized>(rng: &mut R, field: Field, z: &mut [Complex64]) {
    for zk in z.iter_mut() {
        *zk = match field {
            Field::Real => Complex64::new(StandardNormal.sample(rng), 0.0),
            Field::Complex => {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
            }
        };
    }
}

/// Runs `work(rng, count)` on consecutive chunks of `samples` and returns the
/// per-chunk results in chunk order.
pub fn run_chunks<T, F>(samples: usize, seed: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let count = CHUNK_SIZE.min(samples - i * CHUNK_SIZE);
            work(&mut rng, count)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: Complex64,
    /// Sample standard deviation over `√samples`.
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Sum and sum of squared moduli of a chunk of samples.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    pub sum: Complex64,
    pub sum_sq: f64,
    pub count: usize,
}

impl Moments {
    pub fn push(&mut self, x: Complex64) {
        self.sum += x;
        self.sum_sq += x.norm_sqr();
        self.count += 1;
    }

    pub fn merge(mut self, other: &Moments) -> Moments {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.count += other.count;
        self
    }

    pub fn estimate(&self, seed: u64) -> MonteCarloEstimate {
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq - n * mean.norm_sqr()) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        MonteCarloEstimate {
            mean,
            std_error: (var / n).sqrt(),
            samples: self.count,
            seed,
        }
    }
}

pub(crate) fn check_unit(x: &[Complex64], name: &str) -> Result<()> {
    let r = norm(x);
    if (r - 1.0).abs() > UNIT_TOL {
        return Err(GkError::InvalidArgument(format!("{name} is not a unit vector (norm {r})")));
    }
    Ok(())
}

pub(crate) fn check_field(x: &[Complex64], field: Field, name: &str) -> Result<()> {
    if field == Field::Real && x.iter().any(|a| a.im != 0.0) {
        return Err(GkError::InvalidArgument(format!("{name} has imaginary parts in a real problem")));
    }
    Ok(())
}

/// Monte Carlo estimate of `E[sign⟨u,z⟩ sign⟨z,v⟩]` over the standard
/// Gaussian `z` of the field.
pub fn mc_pair_identity(
    u: &[Complex64],
    v: &[Complex64],
    field: Field,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if u.len() != v.len() || u.is_empty() {
        return Err(GkError::DimensionMismatch(format!(
            "u has dimension {}, v has {}",
            u.len(),
            v.len()
        )));
    }
    if samples == 0 {
        return Err(GkError::InvalidArgument("samples must be positive".into()));
    }
    check_unit(u, "u")?;
    check_unit(v, "v")?;
    check_field(u, field, "u")?;
    check_field(v, field, "v")?;
    let dim = u.len();
    let chunks = run_chunks(samples, seed, |rng, count| {
        let mut z = vec![Complex64::new(0.0, 0.0); dim];
        let mut m = Moments::default();
        for _ in 0..count {
            fill_gaussian(rng, field, &mut z);
            m.push(sign_f(inner(u, &z), field) * sign_f(inner(&z, v), field));
        }
        m
    });
    let total = chunks.iter().fold(Moments::default(), |acc, c| acc.merge(c));
    Ok(total.estimate(seed))
}

/// `(2/π) arcsin(q)` for real, `H(q)` for complex.
pub fn analytic_pair_value(q: Complex64, field: Field) -> Result<Complex64> {
    match field {
        Field::Real => {
            if q.im != 0.0 || !(q.re.abs() <= 1.0) {
                return Err(GkError::Domain {
                    value: q.norm(),
                    domain: "real q in [-1, 1]",
                });
            }
            Ok(Complex64::new(2.0 / PI * q.re.asin(), 0.0))
        }
        Field::Complex => constants::haagerup_H(q),
    }
}

/// Midpoint rule for `(1/4) ∫_0^{2π} sign(Re(e^{-iθ} z)) e^{iθ} dθ`, which
/// equals `sign(z)`. Panels are aligned to the jumps at `arg z ± π/2`.
pub fn verify_phase_identity(z: Complex64, panels: usize) -> Result<Complex64> {
    if panels < 16 {
        return Err(GkError::InvalidArgument(format!("need at least 16 panels, got {panels}")));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Ok(z);
    }
    let start = z.arg() - PI / 2.0;
    let per_half = panels.div_ceil(2);
    let h = PI / per_half as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for half in 0..2 {
        let a = start + half as f64 * PI;
        let s = sign_real((Complex64::from_polar(1.0, -(a + 0.5 * PI)) * z).re);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..per_half {
            let theta = a + (j as f64 + 0.5) * h;
            acc += Complex64::from_polar(1.0, theta);
        }
        total += acc * (s * h);
    }
    Ok(total / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_vec(x: &[f64]) -> Vec<Complex64> {
        x.iter().map(|&a| c(a, 0.0)).collect()
    }

    #[test]
    fn signs() {
        assert_eq!(sign_real(-3.2), -1.0);
        assert_eq!(sign_real(0.0), 0.0);
        assert_eq!(sign_complex(c(0.0, 0.0)), c(0.0, 0.0));
        let s = sign_complex(c(3.0, 4.0));
        assert_abs_diff_eq!(s.re, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(s.im, 0.8, epsilon = 1e-15);
    }

    #[test]
    fn field_parsing() {
        assert_eq!("real".parse::<Field>().unwrap(), Field::Real);
        assert_eq!("complex".parse::<Field>().unwrap(), Field::Complex);
        assert!("quaternion".parse::<Field>().is_err());
        assert_eq!(serde_json::to_string(&Field::Complex).unwrap(), "\"complex\"");
    }

    #[test]
    fn complex_gaussian_has_half_variance_per_part() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut z = vec![c(0.0, 0.0); 1];
        let n = 200_000;
        let (mut re2, mut im2) = (0.0, 0.0);
        for _ in 0..n {
            fill_gaussian(&mut rng, Field::Complex, &mut z);
            re2 += z[0].re * z[0].re;
            im2 += z[0].im * z[0].im;
        }
        assert_abs_diff_eq!(re2 / n as f64, 0.5, epsilon = 0.01);
        assert_abs_diff_eq!(im2 / n as f64, 0.5, epsilon = 0.01);
    }

    #[test]
    fn real_pair_examples() {
        let e1 = real_vec(&[1.0, 0.0]);
        let e2 = real_vec(&[0.0, 1.0]);
        let half = real_vec(&[0.5, 0.75_f64.sqrt()]);
        let cases = [(&e1, &e2, 0.0), (&e1, &e1, 1.0), (&e1, &half, 1.0 / 3.0)];
        for (u, v, expected) in cases {
            let est = mc_pair_identity(u, v, Field::Real, 100_000, 42).unwrap();
            assert!((est.mean.re - expected).abs() <= 4.0 * est.std_error.max(1e-12), "{est:?}");
        }
    }

    #[test]
    fn complex_pair_against_haagerup() {
        let u = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let q = Complex64::from_polar(0.6, 1.0);
        let v = vec![q.conj(), Complex64::new((1.0 - 0.36_f64).sqrt(), 0.0)];
        let target = analytic_pair_value(inner(&u, &v), Field::Complex).unwrap();
        let est = mc_pair_identity(&u, &v, Field::Complex, 100_000, 3).unwrap();
        assert!((est.mean - target).norm() <= 4.0 * est.std_error, "{est:?} vs {target}");
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let u = real_vec(&[0.6, 0.8]);
        let v = real_vec(&[0.8, 0.6]);
        let a = mc_pair_identity(&u, &v, Field::Real, 50_000, 11).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mc_pair_identity(&u, &v, Field::Real, 50_000, 11).unwrap());
        assert_eq!(a, b);
        let other = mc_pair_identity(&u, &v, Field::Real, 50_000, 12).unwrap();
        assert_ne!(a.mean, other.mean);
    }

    #[test]
    fn input_validation() {
        let u = real_vec(&[1.0, 0.0]);
        assert!(mc_pair_identity(&u, &real_vec(&[1.0]), Field::Real, 10, 0).is_err());
        assert!(mc_pair_identity(&u, &real_vec(&[2.0, 0.0]), Field::Real, 10, 0).is_err());
        assert!(mc_pair_identity(&u, &u, Field::Real, 0, 0).is_err());
        assert!(mc_pair_identity(&u, &[c(0.0, 1.0), c(0.0, 0.0)], Field::Real, 10, 0).is_err());
    }

    #[test]
    fn analytic_values() {
        assert_abs_diff_eq!(analytic_pair_value(c(1.0, 0.0), Field::Real).unwrap().re, 1.0);
        assert_abs_diff_eq!(analytic_pair_value(c(1.0, 0.0), Field::Complex).unwrap().re, 1.0);
        assert_abs_diff_eq!(
            analytic_pair_value(c(0.5, 0.0), Field::Real).unwrap().re,
            1.0 / 3.0,
            epsilon = 1e-15
        );
        let z = analytic_pair_value(c(0.0, 0.7), Field::Complex).unwrap();
        assert_abs_diff_eq!(z.re, 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(z.im, constants::haagerup_h(0.7).unwrap(), epsilon = 1e-15);
        assert!(analytic_pair_value(c(1.5, 0.0), Field::Real).is_err());
    }

    #[test]
    fn phase_identity_examples() {
        let one = verify_phase_identity(c(1.0, 0.0), 1 << 18).unwrap();
        assert!((one - c(1.0, 0.0)).norm() < 1e-10);
        assert_eq!(verify_phase_identity(c(0.0, 0.0), 16).unwrap(), c(0.0, 0.0));
        let z = Complex64::from_polar(2.0, PI / 4.0);
        let s = verify_phase_identity(z, 1 << 18).unwrap();
        assert!((s - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-10);
        assert!(verify_phase_identity(z, 8).is_err());
    }

    #[test]
    fn coarse_phase_identity_converges_quadratically() {
        let z = c(0.3, -0.4);
        let e1 = (verify_phase_identity(z, 64).unwrap() - sign_complex(z)).norm();
        let e2 = (verify_phase_identity(z, 128).unwrap() - sign_complex(z)).norm();
        assert_abs_diff_eq!(e1 / e2, 4.0, epsilon = 0.05);
    }

    #[test]
    fn swapped_pair_conjugates_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut raw = vec![c(0.0, 0.0); 3];
        fill_gaussian(&mut rng, Field::Complex, &mut raw);
        let n = norm(&raw);
        let u: Vec<_> = raw.iter().map(|a| a / n).collect();
        fill_gaussian(&mut rng, Field::Complex, &mut raw);
        let n = norm(&raw);
        let v: Vec<_> = raw.iter().map(|a| a / n).collect();
        let est = mc_pair_identity(&v, &u, Field::Complex, 100_000, 9).unwrap();
        let target = analytic_pair_value(inner(&u, &v).conj(), Field::Complex).unwrap();
        assert!((est.mean - target).norm() <= 4.0 * est.std_error);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn real_monte_carlo_within_five_sigma(a in 0.0f64..std::f64::consts::TAU, b in 0.0f64..std::f64::consts::TAU, seed in 0u64..1000) {
            let u = real_vec(&[a.cos(), a.sin(), 0.0]);
            let v = real_vec(&[b.cos() * 0.8, b.sin() * 0.8, 0.6]);
            let est = mc_pair_identity(&u, &v, Field::Real, 20_000, seed).unwrap();
            let target = analytic_pair_value(inner(&u, &v), Field::Real).unwrap();
            // 5 sigma keeps the false-failure rate of this property negligible
            prop_assert!((est.mean - target).norm() <= 5.0 * est.std_error);
        }

        #[test]
        fn phase_identity_any_z(r in 0.01f64..10.0, phase in -3.1f64..3.1) {
            let z = Complex64::from_polar(r, phase);
            let s = verify_phase_identity(z, 1 << 18).unwrap();
            prop_assert!((s - sign_complex(z)).norm() < 1e-10);
        }
    }
}
