//! The `gk` command line: configuration, report types and the verification
//! suites.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 a check failed.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::constants::{self, ConstantsReport};
use crate::error::GkError;
use crate::gaussian::{self, Field};
use crate::haagerup_verify as hv;
use crate::rounding::{self, RoundingReport, Scheme};
use crate::schema::{self, SchemaKind};
use crate::series;
use crate::solver::{self, ProblemInstance, SignAssignment, UnitVectorAssignment};
use crate::Complex64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_KMAX: usize = 30;
pub const THREADS_ENV: &str = "GK_THREADS";

/// `k` range of the integral certificates in the `section5` suite.
pub const SECTION5_KS: std::ops::RangeInclusive<usize> = 4..=20;

const LEMMA21_PAIRS: usize = 100;
const LEMMA21_DIM: usize = 3;
const COROLLARY_INSTANCES: usize = 100;
const PHASE_PANELS: usize = 1 << 18;
const OMEGA1_POINTS: usize = 200;

// reference values of h₁, h₂ at √2 and 4, to 7 decimals
const H1_SQRT2: f64 = 1.3506438;
const H2_SQRT2: f64 = 0.5034307;
const H1_FOUR: f64 = 1.5459572;
const H2_FOUR: f64 = 1.7289033;
const MONOTONICITY_MARGIN: f64 = -0.1187;
const LEMMA53_C: f64 = 1.2059;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    pub starts: usize,
    pub series_order: usize,
    pub kmax: usize,
    pub tolerances: BTreeMap<String, f64>,
    /// 0 = rayon's default. Not part of reports: results do not depend on it.
    #[serde(skip)]
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tolerances = [
            ("lemma21_sigmas", 4.0),
            ("lemma21_max_reseeds", 2.0),
            ("rounding_sigmas", 5.0),
            ("phase", 1e-10),
            ("corollary", 1e-9),
            ("sandwich_lower", 1e-9),
            ("sandwich_upper", 1e-6),
            ("omega1", 1e-9),
            ("published_values", 1e-6),
            ("lemma53_constants", 1e-3),
            ("series_cross_check", 1e-9),
            ("elliptic_fd", 1e-6),
            ("coefficient", 1e-12),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            starts: solver::DEFAULT_STARTS,
            series_order: series::DEFAULT_ORDER,
            kmax: DEFAULT_KMAX,
            tolerances,
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            RunConfig::default().tolerances.get(name).copied().unwrap_or(0.0)
        })
    }

    pub fn validate(&self) -> crate::Result<()> {
        for (name, v) in [
            ("samples", self.samples),
            ("starts", self.starts),
            ("series-order", self.series_order),
            ("kmax", self.kmax),
        ] {
            if v == 0 {
                return Err(GkError::InvalidArgument(format!("--{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Envelope shared by all JSON reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report<T> {
    pub command: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
    pub config: RunConfig,
    pub ok: bool,
    pub result: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `|value - reference| ≤ tolerance`
    Approx,
    /// `value ≤ reference + tolerance`
    Le,
    /// `value ≥ reference - tolerance`
    Ge,
    /// boolean stored as 1/0
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub relation: Relation,
    /// Distance to failing; negative when the check fails.
    pub margin: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, reference: f64, tolerance: f64, relation: Relation) -> Self {
        let margin = match relation {
            Relation::Approx => tolerance - (value - reference).abs(),
            Relation::Le => reference + tolerance - value,
            Relation::Ge | Relation::Holds => value - (reference - tolerance),
        };
        Check {
            name: name.into(),
            value,
            reference,
            tolerance,
            relation,
            margin,
            pass: margin >= 0.0,
        }
    }

    pub fn approx(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        Self::new(name, value, reference, tolerance, Relation::Approx)
    }

    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(name, value, bound, tolerance, Relation::Le)
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(name, value, bound, tolerance, Relation::Ge)
    }

    pub fn holds(name: impl Into<String>, cond: bool) -> Self {
        Self::new(name, if cond { 1.0 } else { 0.0 }, 1.0, 0.0, Relation::Holds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub name: String,
    pub ok: bool,
    pub checks: Vec<Check>,
    pub details: Value,
}

impl Suite {
    fn new(name: &str, checks: Vec<Check>, details: Value) -> Self {
        Suite {
            name: name.into(),
            ok: checks.iter().all(|c| c.pass),
            checks,
            details,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub target: Target,
    pub suites: Vec<Suite>,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Lemma21,
    Phase,
    Corollary,
    Section5,
    Coeffs,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Discrete,
    Relaxation,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteResult {
    #[serde(flatten)]
    pub assignment: SignAssignment,
    /// `enumeration`, `phase_grid` or `multistart`.
    pub method: String,
    /// Whether `value` is the true optimum rather than a lower bound.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub m: usize,
    pub n: usize,
    pub field: Field,
    pub mode: Mode,
    pub discrete: Option<DiscreteResult>,
    pub relaxation: Option<UnitVectorAssignment>,
    pub grothendieck_constant: f64,
    /// `relaxation / discrete`.
    pub ratio: Option<f64>,
    /// `discrete ≤ relaxation + 1e-9` and `relaxation ≤ K discrete + 1e-6`.
    pub ratio_ok: Option<bool>,
}

/// Upper bound on the Grothendieck constant proved by the rounding scheme
/// for `field`.
pub fn grothendieck_bound(field: Field) -> crate::Result<f64> {
    match field {
        Field::Real => Ok(constants::krivine_constant()),
        Field::Complex => constants::haagerup_constant(),
    }
}

fn discrete_with_method(mtx: &ProblemInstance, cfg: &RunConfig) -> crate::Result<DiscreteResult> {
    let (method, exact) = match mtx.field() {
        Field::Real => ("enumeration", true),
        Field::Complex if mtx.n() <= solver::GRID_ORACLE_LIMIT => ("phase_grid", false),
        Field::Complex => ("multistart", false),
    };
    Ok(DiscreteResult {
        assignment: solver::discrete_opt(mtx, cfg.starts, cfg.seed)?,
        method: method.into(),
        exact,
    })
}

pub fn solve(mtx: &ProblemInstance, mode: Mode, cfg: &RunConfig) -> crate::Result<SolveReport> {
    let discrete = match mode {
        Mode::Discrete | Mode::Both => Some(discrete_with_method(mtx, cfg)?),
        Mode::Relaxation => None,
    };
    let relaxation = match mode {
        Mode::Relaxation | Mode::Both => Some(solver::relaxation_opt(mtx, solver::DEFAULT_ITERS, cfg.starts, cfg.seed)?),
        Mode::Discrete => None,
    };
    let k = grothendieck_bound(mtx.field())?;
    let (ratio, ratio_ok) = match (&discrete, &relaxation) {
        (Some(d), Some(r)) if d.assignment.value > 0.0 => {
            let d = d.assignment.value;
            let ok = d <= r.value + cfg.tol("sandwich_lower") && r.value <= k * d + cfg.tol("sandwich_upper");
            (Some(r.value / d), Some(ok))
        }
        _ => (None, None),
    };
    Ok(SolveReport {
        m: mtx.m(),
        n: mtx.n(),
        field: mtx.field(),
        mode,
        discrete,
        relaxation,
        grothendieck_constant: k,
        ratio,
        ratio_ok,
    })
}

fn random_unit(rng: &mut ChaCha8Rng, field: Field, dim: usize) -> Vec<Complex64> {
    let mut z = vec![Complex64::new(0.0, 0.0); dim];
    gaussian::fill_gaussian(rng, field, &mut z);
    let r = gaussian::norm(&z);
    z.iter().map(|a| a / r).collect()
}

/// Seed for item `index` of stream `tag`, distinct across tags and indices.
fn derive_seed(seed: u64, tag: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng.set_word_pos(2 * index as u128);
    rng.random()
}

fn field_index(field: Field) -> u64 {
    match field {
        Field::Real => 0,
        Field::Complex => 1,
    }
}

/// Monte Carlo check of the sign-product identity on seeded random unit
/// pairs; a failing pair gets one rerun with a fresh seed, at most
/// `lemma21_max_reseeds` times per field.
pub fn verify_lemma21(cfg: &RunConfig) -> crate::Result<Suite> {
    let sigmas = cfg.tol("lemma21_sigmas");
    let max_reseeds = cfg.tol("lemma21_max_reseeds");
    let mut checks = Vec::new();
    for field in [Field::Real, Field::Complex] {
        let fi = field_index(field);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(0x1e21 + fi);
        let mut reseeds = 0usize;
        for p in 0..LEMMA21_PAIRS {
            let u = random_unit(&mut rng, field, LEMMA21_DIM);
            let w = random_unit(&mut rng, field, LEMMA21_DIM);
            // pull half the pairs towards u so that |q| near 1 is covered
            let v = if p % 2 == 0 {
                w
            } else {
                let a: f64 = rng.random_range(0.0..4.0);
                let mix: Vec<Complex64> = u.iter().zip(&w).map(|(x, y)| x * a + y).collect();
                let r = gaussian::norm(&mix);
                mix.iter().map(|x| x / r).collect()
            };
            let q = gaussian::inner(&u, &v);
            let expected = gaussian::analytic_pair_value(q, field)?;
            let seed = derive_seed(cfg.seed, 0x1e21_0000 + fi, p);
            let mut est = gaussian::mc_pair_identity(&u, &v, field, cfg.samples, seed)?;
            let mut name = format!("{field} pair {p}");
            if (est.mean - expected).norm() > sigmas * est.std_error {
                reseeds += 1;
                est = gaussian::mc_pair_identity(&u, &v, field, cfg.samples, derive_seed(cfg.seed, 0x5eed_0000 + fi, p))?;
                name.push_str(" (reseeded)");
            }
            checks.push(Check::at_most(name, (est.mean - expected).norm(), sigmas * est.std_error, 0.0));
        }
        checks.push(Check::at_most(format!("{field} reseeded pairs"), reseeds as f64, max_reseeds, 0.0));
    }
    Ok(Suite::new("lemma21", checks, Value::Null))
}

/// `(1/4) ∫ sign(Re(e^{-iθ} z)) e^{iθ} dθ = sign(z)`.
pub fn verify_phase(cfg: &RunConfig) -> crate::Result<Suite> {
    let tol = cfg.tol("phase");
    let mut checks = Vec::new();
    for &r in &[0.25, 1.0, 3.5] {
        for &arg in &[0.0, 0.7, FRAC_PI_2, 2.4, PI, -1.1, -FRAC_PI_2, -2.9] {
            let z = Complex64::from_polar(r, arg);
            let got = gaussian::verify_phase_identity(z, PHASE_PANELS)?;
            let err = (got - gaussian::sign_complex(z)).norm();
            checks.push(Check::at_most(format!("z = {r}·exp({arg}i)"), err, 0.0, tol));
        }
    }
    let zero = gaussian::verify_phase_identity(Complex64::new(0.0, 0.0), PHASE_PANELS)?;
    checks.push(Check::at_most("z = 0", zero.norm(), 0.0, tol));
    Ok(Suite::new("phase", checks, Value::Null))
}

#[derive(Debug, Clone, Serialize)]
struct CorollaryRow {
    field: Field,
    m: usize,
    n: usize,
    seed: u64,
    discrete: f64,
    relaxation: f64,
    normalized_sum: f64,
}

/// The normalized bound `|Σ M̃ arcsin⟨x,y⟩| ≤ π/2` (real) and `|Σ M̃ H(⟨x,y⟩)| ≤ 1`
/// (complex) at the relaxation optimum, plus the sandwich
/// `discrete ≤ relaxation ≤ K discrete`, on seeded 3×3 and 4×4 instances.
pub fn verify_corollary(cfg: &RunConfig) -> crate::Result<Suite> {
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for field in [Field::Real, Field::Complex] {
        let k = grothendieck_bound(field)?;
        let bound = match field {
            Field::Real => FRAC_PI_2,
            Field::Complex => 1.0,
        };
        let fi = field_index(field);
        let results: Vec<CorollaryRow> = (0..COROLLARY_INSTANCES)
            .into_par_iter()
            .map(|i| {
                let size = if i % 2 == 0 { 3 } else { 4 };
                let seed = derive_seed(cfg.seed, 0xc0c0_0000 + fi, i);
                let mtx = ProblemInstance::random(size, size, field, seed)?;
                let relax = solver::relaxation_opt(&mtx, solver::DEFAULT_ITERS, cfg.starts, seed)?;
                let disc = solver::discrete_opt(&mtx, cfg.starts, seed)?;
                Ok(CorollaryRow {
                    field,
                    m: size,
                    n: size,
                    seed,
                    discrete: disc.value,
                    relaxation: relax.value,
                    normalized_sum: solver::verify_corollary_with(&mtx, &relax, disc.value)?,
                })
            })
            .collect::<crate::Result<_>>()?;
        for (i, r) in results.iter().enumerate() {
            let tag = format!("{field} {}x{} #{i}", r.m, r.n);
            checks.push(Check::at_most(format!("{tag} corollary"), r.normalized_sum, bound, cfg.tol("corollary")));
            checks.push(Check::at_most(
                format!("{tag} discrete <= relaxation"),
                r.discrete,
                r.relaxation,
                cfg.tol("sandwich_lower"),
            ));
            checks.push(Check::at_most(
                format!("{tag} relaxation <= K discrete"),
                r.relaxation,
                k * r.discrete,
                cfg.tol("sandwich_upper"),
            ));
        }
        rows.extend(results);
    }
    Ok(Suite::new("corollary", checks, serde_json::to_value(rows).unwrap_or(Value::Null)))
}

#[derive(Debug, Clone, Serialize)]
struct Section5Details {
    omega1_max_deviation: f64,
    omega2: hv::Omega2Report,
    sqrt2: hv::HaagerupCurvePoint,
    four: hv::HaagerupCurvePoint,
    c: f64,
    monotonicity_margin: f64,
    certificates: Vec<hv::BkCertificate>,
    lemma53: Vec<hv::Lemma53Report>,
}

/// Quadrature checks on `h₁`, `h₂`, `ω₁`, `ω₂` and the elliptic identities,
/// then the panel decomposition and integral certificate for each `k` in
/// [`SECTION5_KS`].
pub fn verify_section5(cfg: &RunConfig) -> crate::Result<Suite> {
    let mut checks = Vec::new();

    let omega_tol = cfg.tol("omega1");
    let devs: Vec<f64> = (0..OMEGA1_POINTS)
        .into_par_iter()
        .map(|i| {
            let x = 1.05 + (20.0 - 1.05) * i as f64 / (OMEGA1_POINTS - 1) as f64;
            hv::omega1(x).map(|w| (w - FRAC_PI_2).abs())
        })
        .collect::<crate::Result<_>>()?;
    let omega1_max_deviation = devs.iter().copied().fold(0.0, f64::max);
    checks.push(Check::at_most(
        format!("omega1 = pi/2 on {OMEGA1_POINTS} points of [1.05, 20]"),
        omega1_max_deviation,
        0.0,
        omega_tol,
    ));

    let pub_tol = cfg.tol("published_values");
    let sqrt2 = hv::curve_eval(SQRT_2)?;
    let four = hv::curve_eval(4.0)?;
    checks.push(Check::approx("h1(sqrt 2)", sqrt2.h1, H1_SQRT2, pub_tol));
    checks.push(Check::approx("h2(sqrt 2)", sqrt2.h2, H2_SQRT2, pub_tol));
    checks.push(Check::approx("h1(4)", four.h1, H1_FOUR, pub_tol));
    checks.push(Check::approx("h2(4)", four.h2, H2_FOUR, pub_tol));
    checks.push(Check::at_least("theta(sqrt 2) > pi/9", sqrt2.theta, PI / 9.0, 0.0));

    let sc_tol = cfg.tol("series_cross_check");
    let mut h1_dev: f64 = 0.0;
    for i in 0..40 {
        let x = 1.05 + 0.1 * i as f64;
        h1_dev = h1_dev.max((hv::h1(x)? - hv::h1_series(x, 4000)?).abs());
    }
    checks.push(Check::at_most("h1 series vs quadrature on [1.05, 5]", h1_dev, 0.0, sc_tol));
    let mut h2_dev: f64 = 0.0;
    for i in 0..20 {
        let x = 1.0 + (SQRT_2 - 1.0) * i as f64 / 19.0;
        h2_dev = h2_dev.max((hv::h2(x)? - hv::h2_series(x, 400)?).abs());
    }
    checks.push(Check::at_most("h2 series vs quadrature on [1, sqrt 2]", h2_dev, 0.0, sc_tol));

    let fd_tol = cfg.tol("elliptic_fd");
    let h = 1e-5;
    for &y in &[0.3, 0.6, 0.9] {
        let (e, k) = (hv::elliptic_e(y)?, hv::elliptic_k(y)?);
        let de = (hv::elliptic_e(y + h)? - hv::elliptic_e(y - h)?) / (2.0 * h);
        let dk = (hv::elliptic_k(y + h)? - hv::elliptic_k(y - h)?) / (2.0 * h);
        checks.push(Check::approx(format!("E'({y}) = (E - K)/y"), de, (e - k) / y, fd_tol));
        checks.push(Check::approx(
            format!("K'({y}) = (E - (1-y^2)K)/(y(1-y^2))"),
            dk,
            (e - (1.0 - y * y) * k) / (y * (1.0 - y * y)),
            fd_tol,
        ));
    }

    let omega2 = hv::omega2_lower_bound(100)?;
    checks.push(Check::at_least("2 h1(sqrt 2) h2(sqrt 2) > pi/4", omega2.bound, PI / 4.0, 0.0));
    checks.push(Check::at_least("omega2 >= bound on [1.001, sqrt 2]", omega2.grid_min, omega2.bound, 1e-10));

    let c_tol = cfg.tol("lemma53_constants");
    let c = hv::lemma53_c()?;
    let margin = hv::monotonicity_margin()?;
    checks.push(Check::approx("|h+(4)|^2 - 7pi/4", margin, MONOTONICITY_MARGIN, c_tol));
    checks.push(Check::at_most("|h+(4)|^2 - 7pi/4 < 0", margin, 0.0, 0.0));
    checks.push(Check::approx("c = |h+(sqrt 2)| exp(-theta(sqrt 2)/2)", c, LEMMA53_C, c_tol));

    let certificates: Vec<hv::BkCertificate> =
        SECTION5_KS.into_par_iter().map(hv::bk_integral).collect::<crate::Result<_>>()?;
    let lemma53: Vec<hv::Lemma53Report> = certificates
        .par_iter()
        .map(|cert| hv::lemma53_for(cert, c))
        .collect::<crate::Result<_>>()?;
    for (cert, l) in certificates.iter().zip(&lemma53) {
        let k = cert.k;
        checks.push(Check::at_least(format!("k={k} p >= 2"), l.p as f64, 2.0, 0.0));
        checks.push(Check::holds(format!("k={k} I_1 > ... > I_p > J"), l.strictly_decreasing));
        checks.push(Check::at_most(format!("k={k} I_2 / I_1 < 0.85"), l.i2_ratio, 0.85, 0.0));
        checks.push(Check::at_least(
            format!("k={k} I_1 > 0.57 c^-(2k+1) / (2k+1)^2"),
            l.i_values.first().copied().unwrap_or(f64::NAN),
            l.i1_lower_bound,
            0.0,
        ));
        checks.push(Check::holds(format!("k={k} x|h+|^-(2k-1) decreasing"), l.driver_decreasing));
        checks.push(Check::holds(format!("k={k} x|h+|^-(2k+1) decreasing"), l.driver_decreasing_2k_plus_1));
        checks.push(Check::at_most(
            format!("k={k} integral + error + remainder < 0"),
            cert.integral_value + cert.quadrature_error + cert.remainder_bound,
            0.0,
            0.0,
        ));
        checks.push(Check::at_most(
            format!("k={k} |integral - series| within budget"),
            (cert.integral_value - cert.series_value).abs(),
            cert.quadrature_error + cert.remainder_bound + cert.series_error,
            1e-9,
        ));
    }

    let details = Section5Details {
        omega1_max_deviation,
        omega2,
        sqrt2,
        four,
        c,
        monotonicity_margin: margin,
        certificates,
        lemma53,
    };
    Ok(Suite::new("section5", checks, serde_json::to_value(details).unwrap_or(Value::Null)))
}

/// Closed forms of the first inverse coefficients, `b_{2k+1} ≤ 0` for
/// `k = 1..=kmax`, the partial sums of `|b|`, and the nonpositivity
/// certificates.
pub fn verify_coeffs(cfg: &RunConfig) -> crate::Result<Suite> {
    let tol = cfg.tol("coefficient");
    let inv = series::h_inverse_with_order((cfg.kmax + 1).max(series::INVERSE_ORDER));
    let b = &inv.series;
    let a = 4.0 / PI;
    let mut checks = vec![
        Check::approx("b1 = 4/pi", b.coeff(0), a, tol),
        Check::approx("b3 = -(4/pi)^3 / 8", b.coeff(1), -a.powi(3) / 8.0, tol),
        Check::approx("b5 = 0", b.coeff(2), 0.0, tol),
        Check::approx("b7 = -(4/pi)^7 / 1024", b.coeff(3), -a.powi(7) / 1024.0, tol),
    ];
    for k in 1..=cfg.kmax {
        checks.push(Check::at_most(format!("b{} <= 0", 2 * k + 1), b.coeff(k), 0.0, series::SIGN_TOL));
    }
    let reliable = inv.reliable_order(tol);
    let sums = b.truncate(reliable)?.partial_abs_sums();
    let monotone = sums.windows(2).all(|w| w[1] >= w[0]);
    checks.push(Check::holds(format!("partial sums of |b| monotone up to k={}", reliable - 1), monotone));
    checks.push(Check::at_most(
        format!("partial sums of |b| <= 8/pi - 1 up to k={}", reliable - 1),
        sums.last().copied().unwrap_or(0.0),
        8.0 / PI - 1.0,
        tol,
    ));
    let cert = hv::certify_nonpositivity(cfg.kmax)?;
    for e in &cert.entries {
        checks.push(Check::holds(
            format!("b{} nonpositive ({:?})", 2 * e.k + 1, e.decided_by).to_lowercase(),
            e.nonpositive,
        ));
    }
    Ok(Suite::new("coeffs", checks, serde_json::to_value(cert).unwrap_or(Value::Null)))
}

pub fn run_verify(target: Target, cfg: &RunConfig) -> crate::Result<VerifyReport> {
    let targets = match target {
        Target::All => vec![Target::Lemma21, Target::Phase, Target::Corollary, Target::Section5, Target::Coeffs],
        t => vec![t],
    };
    let suites = targets
        .iter()
        .map(|t| match t {
            Target::Lemma21 => verify_lemma21(cfg),
            Target::Phase => verify_phase(cfg),
            Target::Corollary => verify_corollary(cfg),
            Target::Section5 => verify_section5(cfg),
            Target::Coeffs | Target::All => verify_coeffs(cfg),
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(VerifyReport {
        target,
        ok: suites.iter().all(|s| s.ok),
        suites,
    })
}

/// `a:b:n`, `n` equally spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.end - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

impl FromStr for GridSpec {
    type Err = GkError;

    fn from_str(s: &str) -> crate::Result<Self> {
        let bad = || GkError::InvalidArgument(format!("grid {s:?} is not of the form start:end:count"));
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad());
        };
        let start: f64 = a.trim().parse().map_err(|_| bad())?;
        let end: f64 = b.trim().parse().map_err(|_| bad())?;
        let count: usize = n.trim().parse().map_err(|_| bad())?;
        if !start.is_finite() || !end.is_finite() {
            return Err(bad());
        }
        Ok(GridSpec { start, end, count })
    }
}

pub const CURVES_HEADER: &str = "x,h,h_inv,h1,h2,theta";

/// `h⁻¹(y)` for `|y| ≤ 1` by bisection on `h`.
fn h_inverse_value(y: f64) -> crate::Result<f64> {
    if !(y.abs() <= 1.0) {
        return Err(GkError::Domain { value: y, domain: "[-1, 1]" });
    }
    if y.abs() == 1.0 || y == 0.0 {
        return Ok(y);
    }
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if constants::haagerup_h(mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.11e}"))
}

/// CSV of `h`, `h⁻¹` (on `[-1, 1]`) and `h₁`, `h₂`, `θ` (on `[1, ∞)`); cells
/// outside a column's domain are empty.
pub fn curves_csv(xs: &[f64]) -> crate::Result<String> {
    let rows: Vec<String> = xs
        .par_iter()
        .map(|&x| {
            if !x.is_finite() {
                return Err(GkError::InvalidArgument(format!("grid point {x} is not finite")));
            }
            let inner = x.abs() <= 1.0;
            let (h, h_inv) = if inner {
                (Some(constants::haagerup_h(x)?), Some(h_inverse_value(x)?))
            } else {
                (None, None)
            };
            let p = if x >= 1.0 { Some(hv::curve_eval(x)?) } else { None };
            Ok(format!(
                "{},{},{},{},{},{}",
                cell(Some(x)),
                cell(h),
                cell(h_inv),
                cell(p.map(|p| p.h1)),
                cell(p.map(|p| p.h2)),
                cell(p.map(|p| p.theta))
            ))
        })
        .collect::<crate::Result<_>>()?;
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Parser)]
#[command(name = "gk", version, about = "Grothendieck constants, solvers, rounding and certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, global = true, default_value_t = solver::DEFAULT_STARTS)]
    pub starts: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_KMAX)]
    pub kmax: usize,
    #[arg(long = "series-order", global = true, default_value_t = series::DEFAULT_ORDER)]
    pub series_order: usize,
    /// Worker threads, 0 for all cores. GK_THREADS takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Omit `generated_unix` so reports are byte-reproducible.
    #[arg(long = "no-timestamp", global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Krivine/Haagerup constants, x0, c0 and Davie's lower bounds.
    Constants,
    /// Discrete optimum and/or unit-vector relaxation of an instance.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Override the instance field (real instances can be promoted).
        #[arg(long)]
        field: Option<Field>,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
    },
    /// Relaxation, embedding and Gaussian sign rounding.
    Round {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        field: Option<Field>,
        /// Must match the field: krivine (real) or haagerup (complex).
        #[arg(long)]
        scheme: Option<Scheme>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        target: Target,
    },
    /// Tabulate h, h^-1, h1, h2 and theta as CSV.
    Curves {
        /// start:end:count
        #[arg(long, conflicts_with = "points")]
        grid: Option<GridSpec>,
        /// Comma-separated abscissae.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        points: Option<Vec<f64>>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] GkError),
    #[error("{0}")]
    Usage(String),
}

/// What a command produced: the text to write and whether all checks passed.
pub struct Outcome {
    pub text: String,
    pub pass: bool,
}

impl GlobalOpts {
    pub fn config(&self) -> RunConfig {
        RunConfig {
            seed: self.seed,
            samples: self.samples,
            starts: self.starts,
            series_order: self.series_order,
            kmax: self.kmax,
            threads: self.threads,
            ..RunConfig::default()
        }
    }
}

fn timestamp(opts: &GlobalOpts) -> Option<u64> {
    if opts.no_timestamp {
        None
    } else {
        SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
    }
}

fn envelope<T: Serialize>(command: &str, opts: &GlobalOpts, cfg: &RunConfig, ok: bool, result: T) -> Result<Outcome, CliError> {
    let report = Report {
        command: command.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        generated_unix: timestamp(opts),
        config: cfg.clone(),
        ok,
        result,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?;
    text.push('\n');
    Ok(Outcome { text, pass: ok })
}

/// Reads, schema-checks and parses an instance, then applies `--field`.
pub fn load_instance(path: &Path, field: Option<Field>) -> Result<ProblemInstance, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    let input_err = |message: String| CliError::Input {
        path: path.into(),
        message,
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| input_err(e.to_string()))?;
    schema::validate(SchemaKind::Instance, &value).map_err(|e| input_err(e.to_string()))?;
    let mtx = ProblemInstance::from_json(value).map_err(|e| input_err(e.to_string()))?;
    match field {
        Some(f) if f != mtx.field() => mtx.with_field(f).map_err(|e| input_err(e.to_string())),
        _ => Ok(mtx),
    }
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let opts = &cli.opts;
    let cfg = opts.config();
    cfg.validate()?;
    match &cli.command {
        Command::Constants => {
            let r = ConstantsReport::compute(cfg.series_order)?;
            let ok = r.ordering_ok
                && r.tolerances.get("x0_residual").is_some_and(|&v| v < 1e-10)
                && r.tolerances.get("phi_c0").is_some_and(|&v| v < 1e-8);
            envelope("constants", opts, &cfg, ok, r)
        }
        Command::Solve { input, field, mode } => {
            let mtx = load_instance(input, *field)?;
            let r = solve(&mtx, *mode, &cfg)?;
            let ok = r.ratio_ok.unwrap_or(true);
            envelope("solve", opts, &cfg, ok, r)
        }
        Command::Round { input, field, scheme } => {
            let mtx = load_instance(input, *field)?;
            let expected = Scheme::for_field(mtx.field());
            if let Some(s) = scheme {
                if *s != expected {
                    return Err(CliError::Usage(format!(
                        "scheme {s:?} does not apply to a {} instance (use {expected:?})",
                        mtx.field()
                    )
                    .to_lowercase()));
                }
            }
            let r: RoundingReport = rounding::rounding_certificate(&mtx, cfg.samples, cfg.starts, cfg.seed)?;
            let ok = r.ok;
            envelope("round", opts, &cfg, ok, r)
        }
        Command::Verify { target } => {
            let r = run_verify(*target, &cfg)?;
            let ok = r.ok;
            envelope("verify", opts, &cfg, ok, r)
        }
        Command::Curves { grid, points } => {
            let xs = match (grid, points) {
                (Some(g), _) => g.points(),
                (None, Some(p)) => p.clone(),
                (None, None) => GridSpec { start: 0.0, end: 4.0, count: 81 }.points(),
            };
            Ok(Outcome {
                text: curves_csv(&xs)?,
                pass: true,
            })
        }
    }
}

fn thread_count(opts: &GlobalOpts) -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        _ => Ok(opts.threads),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.into(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn run_parsed(cli: &Cli) -> Result<bool, CliError> {
    let threads = thread_count(&cli.opts)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let outcome = pool.install(|| execute(cli))?;
    write_output(cli.opts.out.as_deref(), &outcome.text)?;
    Ok(outcome.pass)
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run_parsed(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY,
        Err(e) => {
            eprintln!("gk: {e}");
            EXIT_USAGE
        }
    }
}
