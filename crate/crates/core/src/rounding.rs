//! Krivine (real) and Haagerup (complex) rounding of a vector solution.
//!
//! The nonlinear embeddings `S`, `T` live in an infinite-dimensional tensor
//! space, but rounding only needs their Gram matrix, which has closed forms:
//!
//! | pair      | Krivine        | Haagerup                          |
//! |-----------|----------------|-----------------------------------|
//! | `S`, `S`  | `sinh(c q)`    | `sign(q) φ(c0 |q|)`               |
//! | `S`, `T`  | `sin(c q)`     | `sign(q) Σ b_{2k+1} |c0 q|^(2k+1)` |
//! | `T`, `T`  | `sinh(c q)`    | `sign(q) φ(c0 |q|)`               |
//!
//! with `q` the inner product of the underlying unit vectors. The Gram
//! matrix is factored into `m + n` vectors `u_i`, `v_j` and rounded with
//! `ε_i = sign⟨u_i, z⟩`, `δ_j = sign⟨z, v_j⟩` for a standard Gaussian `z`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{GkError, Result};
use crate::gaussian::{self, inner, run_chunks, Field, MonteCarloEstimate, Moments};
use crate::series::{self, OddPowerSeries};
use crate::solver::{self, ProblemInstance, SignAssignment, UnitVectorAssignment};

/// Largest negative-eigenvalue mass accepted by the PSD repair.
pub const MAX_CLIP: f64 = 1e-6;

/// Largest entrywise `|W W* - G|` accepted after factoring.
pub const FACTOR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Krivine,
    Haagerup,
}

impl Scheme {
    /// The scheme that proves the bound for `field`.
    pub fn for_field(field: Field) -> Self {
        match field {
            Field::Real => Scheme::Krivine,
            Field::Complex => Scheme::Haagerup,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = GkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "krivine" => Ok(Scheme::Krivine),
            "haagerup" => Ok(Scheme::Haagerup),
            other => Err(GkError::InvalidArgument(format!("unknown scheme {other:?}"))),
        }
    }
}

/// `h⁻¹` and `φ` coefficients together with `c0`.
#[derive(Debug, Clone)]
pub struct HaagerupKernel {
    pub b: OddPowerSeries,
    pub phi: OddPowerSeries,
    pub c0: f64,
}

impl HaagerupKernel {
    pub fn new() -> Result<Self> {
        let b = series::h_inverse().series;
        Ok(Self {
            phi: series::abs_series(&b),
            b,
            c0: constants::haagerup_x0()?.c0,
        })
    }

    /// `H⁻¹(c0 q) = sign(q) Σ b_{2k+1} |c0 q|^(2k+1)`.
    pub fn cross(&self, q: Complex64) -> Result<Complex64> {
        let r = q.norm().min(1.0);
        Ok(gaussian::sign_complex(q) * self.b.eval(self.c0 * r)?)
    }

    /// `sign(q) φ(c0 |q|)`.
    pub fn same(&self, q: Complex64) -> Result<Complex64> {
        let r = q.norm().min(1.0);
        Ok(gaussian::sign_complex(q) * self.phi.eval(self.c0 * r)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramEmbedding {
    /// Row-major `(m+n) × (m+n)` Hermitian matrix.
    pub gram: Vec<Vec<Complex64>>,
    pub u: Vec<Vec<Complex64>>,
    pub v: Vec<Vec<Complex64>>,
    pub scheme: Scheme,
    pub field: Field,
    /// Total mass of the negative eigenvalues set to zero.
    pub clip_magnitude: f64,
    /// Largest entrywise `|⟨w_a, w_b⟩ - G_ab|` of the factors.
    pub factor_error: f64,
}

impl GramEmbedding {
    pub fn m(&self) -> usize {
        self.u.len()
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }
}

fn gram_from<F, G>(a: &UnitVectorAssignment, same: F, cross: G) -> Result<Vec<Vec<Complex64>>>
where
    F: Fn(Complex64) -> Result<Complex64>,
    G: Fn(Complex64) -> Result<Complex64>,
{
    let vectors: Vec<&Vec<Complex64>> = a.xs.iter().chain(&a.ys).collect();
    let m = a.xs.len();
    let size = vectors.len();
    let mut g = vec![vec![Complex64::new(0.0, 0.0); size]; size];
    for p in 0..size {
        for r in p..size {
            let q = inner(vectors[p], vectors[r]);
            let entry = if (p < m) == (r < m) { same(q)? } else { cross(q)? };
            g[p][r] = entry;
            g[r][p] = entry.conj();
        }
    }
    // q = |x|² on the diagonal, so drop the rounding-level imaginary part
    for (p, row) in g.iter_mut().enumerate() {
        row[p] = Complex64::new(row[p].re, 0.0);
    }
    Ok(g)
}

/// Eigen-clips `g` and returns factors `w_a` with `⟨w_a, w_b⟩ ≈ g_ab`,
/// the clipped mass, and the reconstruction error.
fn factor(g: &[Vec<Complex64>], field: Field) -> (Vec<Vec<Complex64>>, f64, f64) {
    let size = g.len();
    let (values, vectors): (Vec<f64>, DMatrix<Complex64>) = match field {
        Field::Real => {
            let mat = DMatrix::from_fn(size, size, |i, j| g[i][j].re);
            let eig = mat.symmetric_eigen();
            (
                eig.eigenvalues.iter().copied().collect(),
                eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
            )
        }
        Field::Complex => {
            let mat = DMatrix::from_fn(size, size, |i, j| g[i][j]);
            let eig = mat.symmetric_eigen();
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        }
    };
    let clip: f64 = values.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let roots: Vec<f64> = values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let w: Vec<Vec<Complex64>> = (0..size)
        .map(|a| (0..size).map(|k| vectors[(a, k)] * roots[k]).collect())
        .collect();
    let mut err: f64 = 0.0;
    for a in 0..size {
        for b in 0..size {
            err = err.max((inner(&w[a], &w[b]) - g[a][b]).norm());
        }
    }
    (w, clip, err)
}

fn embed(a: &UnitVectorAssignment, field: Field, scheme: Scheme, gram: Vec<Vec<Complex64>>) -> Result<GramEmbedding> {
    let (mut w, clip, err) = factor(&gram, field);
    if clip > MAX_CLIP {
        return Err(GkError::Numerical(format!(
            "Gram matrix has negative eigenvalue mass {clip:e}; inputs are not unit vectors?"
        )));
    }
    if err > FACTOR_TOL {
        return Err(GkError::Numerical(format!("Gram factorization error {err:e}")));
    }
    let v = w.split_off(a.xs.len());
    Ok(GramEmbedding {
        gram,
        u: w,
        v,
        scheme,
        field,
        clip_magnitude: clip,
        factor_error: err,
    })
}

fn check_assignment(a: &UnitVectorAssignment, field: Field) -> Result<()> {
    for (k, x) in a.xs.iter().chain(&a.ys).enumerate() {
        gaussian::check_unit(x, &format!("vector {k}"))?;
        gaussian::check_field(x, field, &format!("vector {k}"))?;
    }
    Ok(())
}

/// Krivine embedding of a real vector solution, `c = arcsinh(1)`.
pub fn krivine_transform(a: &UnitVectorAssignment) -> Result<GramEmbedding> {
    check_assignment(a, Field::Real)?;
    let c = constants::arcsinh1();
    let gram = gram_from(
        a,
        |q| Ok(Complex64::new((c * q.re).sinh(), 0.0)),
        |q| Ok(Complex64::new((c * q.re).sin(), 0.0)),
    )?;
    embed(a, Field::Real, Scheme::Krivine, gram)
}

/// Haagerup embedding of a complex vector solution.
pub fn haagerup_transform(a: &UnitVectorAssignment) -> Result<GramEmbedding> {
    haagerup_transform_with(a, &HaagerupKernel::new()?)
}

pub fn haagerup_transform_with(a: &UnitVectorAssignment, kernel: &HaagerupKernel) -> Result<GramEmbedding> {
    check_assignment(a, Field::Complex)?;
    let gram = gram_from(a, |q| kernel.same(q), |q| kernel.cross(q))?;
    embed(a, Field::Complex, Scheme::Haagerup, gram)
}

pub fn transform(a: &UnitVectorAssignment, field: Field) -> Result<GramEmbedding> {
    match field {
        Field::Real => krivine_transform(a),
        Field::Complex => haagerup_transform(a),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingResult {
    /// Best sample by `|Σ M_ij ε_i δ_j|`; first one wins ties.
    pub best: SignAssignment,
    /// Mean of `Re Σ M_ij ε_i δ_j` over samples.
    pub mean_value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    /// `max_ij |mean(ε_i δ_j) - target_ij|`.
    pub per_pair_check: f64,
    /// `max_ij |mean(ε_i δ_j) - target_ij| / std_error_ij`.
    pub per_pair_max_sigma: f64,
}

/// Rounding `ε_i = sign⟨u_i, z⟩`, `δ_j = sign⟨z, v_j⟩` (sign 0 → 1).
/// In the real case `δ_j = sign⟨v_j, z⟩` is the same thing.
fn round_sample(e: &GramEmbedding, z: &[Complex64], eps: &mut [Complex64], delta: &mut [Complex64]) {
    let one = Complex64::new(1.0, 0.0);
    let s = |w: Complex64| {
        let s = gaussian::sign_f(w, e.field);
        if s == Complex64::new(0.0, 0.0) {
            one
        } else {
            s
        }
    };
    for (ei, ui) in eps.iter_mut().zip(&e.u) {
        *ei = s(inner(ui, z));
    }
    for (dj, vj) in delta.iter_mut().zip(&e.v) {
        *dj = s(inner(z, vj));
    }
}

struct ChunkStats {
    track: Moments,
    pairs: Vec<Moments>,
    best: Option<SignAssignment>,
}

/// Gaussian sign rounding of an embedding for the matrix `mtx`.
pub fn gaussian_sign_round(e: &GramEmbedding, mtx: &ProblemInstance, samples: usize, seed: u64) -> Result<RoundingResult> {
    if samples == 0 {
        return Err(GkError::InvalidArgument("samples must be positive".into()));
    }
    if e.m() != mtx.m() || e.n() != mtx.n() {
        return Err(GkError::DimensionMismatch(format!(
            "embedding is {}x{}, matrix is {}x{}",
            e.m(),
            e.n(),
            mtx.m(),
            mtx.n()
        )));
    }
    let (m, n) = (mtx.m(), mtx.n());
    let dim = e.u.first().or(e.v.first()).map_or(0, Vec::len);
    let targets: Vec<Complex64> = e
        .u
        .iter()
        .flat_map(|u| e.v.iter().map(move |v| inner(u, v)))
        .map(|q| pair_target(q, e.field))
        .collect::<Result<_>>()?;
    let chunks = run_chunks(samples, seed, |rng, count| {
        let zero = Complex64::new(0.0, 0.0);
        let mut z = vec![zero; dim];
        let mut eps = vec![zero; m];
        let mut delta = vec![zero; n];
        let mut stats = ChunkStats {
            track: Moments::default(),
            pairs: vec![Moments::default(); m * n],
            best: None,
        };
        for _ in 0..count {
            gaussian::fill_gaussian(rng, e.field, &mut z);
            round_sample(e, &z, &mut eps, &mut delta);
            let mut total = zero;
            for i in 0..m {
                for j in 0..n {
                    let p = eps[i] * delta[j];
                    stats.pairs[i * n + j].push(p);
                    total += mtx.get(i, j) * p;
                }
            }
            stats.track.push(Complex64::new(total.re, 0.0));
            let value = total.norm();
            if stats.best.as_ref().is_none_or(|b| value > b.value) {
                stats.best = Some(SignAssignment {
                    eps: eps.clone(),
                    delta: delta.clone(),
                    value,
                });
            }
        }
        stats
    });
    let mut track = Moments::default();
    let mut pairs = vec![Moments::default(); m * n];
    let mut best: Option<SignAssignment> = None;
    for c in chunks {
        track = track.merge(&c.track);
        for (p, q) in pairs.iter_mut().zip(&c.pairs) {
            *p = p.merge(q);
        }
        if let Some(b) = c.best {
            if best.as_ref().is_none_or(|cur| b.value > cur.value) {
                best = Some(b);
            }
        }
    }
    let est = track.estimate(seed);
    let mut per_pair_check: f64 = 0.0;
    let mut per_pair_max_sigma: f64 = 0.0;
    for (p, t) in pairs.iter().zip(&targets) {
        let pe = p.estimate(seed);
        let dev = (pe.mean - t).norm();
        per_pair_check = per_pair_check.max(dev);
        if pe.std_error > 0.0 {
            per_pair_max_sigma = per_pair_max_sigma.max(dev / pe.std_error);
        } else if dev > 1e-12 {
            per_pair_max_sigma = f64::INFINITY;
        }
    }
    Ok(RoundingResult {
        best: best.expect("samples >= 1"),
        mean_value: est.mean.re,
        std_error: est.std_error,
        samples,
        seed,
        per_pair_check,
        per_pair_max_sigma,
    })
}

/// `E[sign⟨u,z⟩ sign⟨z,v⟩]` for `q = ⟨u,v⟩`.
fn pair_target(q: Complex64, field: Field) -> Result<Complex64> {
    let q = match field {
        Field::Real => Complex64::new(q.re.clamp(-1.0, 1.0), 0.0),
        Field::Complex if q.norm() > 1.0 => q / q.norm(),
        Field::Complex => q,
    };
    gaussian::analytic_pair_value(q, field)
}

/// Single-pair estimate of `E[sign⟨u,z⟩ sign⟨z,v⟩]` through the embedding.
pub fn pair_estimate(e: &GramEmbedding, i: usize, j: usize, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    gaussian::mc_pair_identity(&e.u[i], &e.v[j], e.field, samples, seed)
}

/// End-to-end report: relaxation, embedding, rounding, and the checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingReport {
    pub field: Field,
    pub scheme: Scheme,
    pub m: usize,
    pub n: usize,
    pub relaxation_value: f64,
    pub relaxation_sweeps: usize,
    pub starts: usize,
    /// Exact discrete optimum (real instances with `n ≤ 20` only).
    pub discrete_value: Option<f64>,
    pub grothendieck_constant: f64,
    /// `relaxation_value / K`.
    pub expected_mean: f64,
    pub mean_value: f64,
    pub std_error: f64,
    pub mean_ratio: f64,
    pub best: SignAssignment,
    pub clip_magnitude: f64,
    pub factor_error: f64,
    pub per_pair_check: f64,
    pub per_pair_max_sigma: f64,
    pub samples: usize,
    pub seed: u64,
    /// `mean_value ≥ relaxation_value / K - 5 std_error`.
    pub mean_ok: bool,
    /// `best.value ≤ discrete_value + 1e-9` (true when no oracle).
    pub best_ok: bool,
    pub ok: bool,
    /// How the two tracks orient `δ`.
    pub conventions: String,
}

/// Indices of rows and columns that are not identically zero.
fn support(mtx: &ProblemInstance) -> (Vec<usize>, Vec<usize>) {
    let zero = Complex64::new(0.0, 0.0);
    let rows = (0..mtx.m()).filter(|&i| (0..mtx.n()).any(|j| mtx.get(i, j) != zero)).collect();
    let cols = (0..mtx.n()).filter(|&j| (0..mtx.m()).any(|i| mtx.get(i, j) != zero)).collect();
    (rows, cols)
}

fn restrict(mtx: &ProblemInstance, rows: &[usize], cols: &[usize]) -> Result<ProblemInstance> {
    let entries = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| mtx.get(i, j)).collect())
        .collect();
    ProblemInstance::new(entries, mtx.field())
}

/// Relaxation, embedding and rounding for `mtx`. Zero rows and columns are
/// dropped before solving and get sign `+1` in the reported assignment.
pub fn rounding_certificate(
    mtx: &ProblemInstance,
    samples: usize,
    starts: usize,
    seed: u64,
) -> Result<RoundingReport> {
    let (rows, cols) = support(mtx);
    if rows.is_empty() {
        return Err(GkError::InvalidArgument("matrix is zero".into()));
    }
    let core = restrict(mtx, &rows, &cols)?;
    let field = core.field();
    let relax = solver::relaxation_opt(&core, solver::DEFAULT_ITERS, starts, seed)?;
    let emb = transform(&relax, field)?;
    let rounded = gaussian_sign_round(&emb, &core, samples, seed)?;
    let k = match field {
        Field::Real => constants::krivine_constant(),
        Field::Complex => constants::haagerup_constant()?,
    };
    let discrete_value = match field {
        Field::Real if core.n() <= 20 => Some(solver::discrete_opt_real(&core)?.value),
        _ => None,
    };
    let one = Complex64::new(1.0, 0.0);
    let mut eps = vec![one; mtx.m()];
    let mut delta = vec![one; mtx.n()];
    for (k, &i) in rows.iter().enumerate() {
        eps[i] = rounded.best.eps[k];
    }
    for (k, &j) in cols.iter().enumerate() {
        delta[j] = rounded.best.delta[k];
    }
    let best = SignAssignment {
        value: mtx.sign_value(&eps, &delta)?,
        eps,
        delta,
    };
    let expected_mean = relax.value / k;
    let mean_ok = rounded.mean_value >= expected_mean - 5.0 * rounded.std_error;
    let best_ok = discrete_value.is_none_or(|d| best.value <= d + 1e-9);
    Ok(RoundingReport {
        field,
        scheme: Scheme::for_field(field),
        m: mtx.m(),
        n: mtx.n(),
        relaxation_value: relax.value,
        relaxation_sweeps: relax.sweeps,
        starts,
        discrete_value,
        grothendieck_constant: k,
        expected_mean,
        mean_value: rounded.mean_value,
        std_error: rounded.std_error,
        mean_ratio: rounded.mean_value / relax.value,
        best,
        clip_magnitude: emb.clip_magnitude,
        factor_error: emb.factor_error,
        per_pair_check: rounded.per_pair_check,
        per_pair_max_sigma: rounded.per_pair_max_sigma,
        samples,
        seed,
        mean_ok,
        best_ok,
        ok: mean_ok && best_ok,
        conventions: "mean: Re sum M_ij sign<u_i,z> sign<z,v_j>; best: |sum M_ij eps_i delta_j| with delta_j = conj(sign<v_j,z>)"
            .into(),
    })
}

/// `2c/π` for Krivine, `c0` for Haagerup: the factor `E[ε_i δ_j] / ⟨x_i, y_j⟩`.
pub fn rounding_factor(scheme: Scheme) -> Result<f64> {
    match scheme {
        Scheme::Krivine => Ok(2.0 * constants::arcsinh1() / PI),
        Scheme::Haagerup => Ok(constants::haagerup_x0()?.c0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::relaxation_opt;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assignment(xs: Vec<Vec<Complex64>>, ys: Vec<Vec<Complex64>>) -> UnitVectorAssignment {
        let l = xs[0].len();
        UnitVectorAssignment {
            xs,
            ys,
            l,
            value: 0.0,
            sweeps: 0,
            starts: 1,
        }
    }

    /// `h⁻¹(y)` by bisection on the quadrature `h`.
    fn h_inverse_by_bisection(y: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if constants::haagerup_h(mid).unwrap() < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn krivine_entries() {
        let e = [c(1.0, 0.0), c(0.0, 0.0)];
        let f = [c(0.0, 0.0), c(1.0, 0.0)];
        let a = assignment(vec![e.to_vec(), e.to_vec()], vec![e.to_vec(), f.to_vec()]);
        let g = krivine_transform(&a).unwrap();
        for p in 0..4 {
            assert_abs_diff_eq!(g.gram[p][p].re, 1.0, epsilon = 1e-15);
        }
        let cst = constants::arcsinh1();
        assert_abs_diff_eq!(g.gram[0][2].re, cst.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(g.gram[0][2].re, 0.7716133, epsilon = 1e-7);
        assert_eq!(g.gram[0][3].re, 0.0);
        assert!(g.clip_magnitude < 1e-8);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(inner(&g.u[i], &g.v[j]).re, g.gram[i][2 + j].re, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn haagerup_entries() {
        let k = HaagerupKernel::new().unwrap();
        assert_abs_diff_eq!(k.same(c(1.0, 0.0)).unwrap().re, 1.0, epsilon = 1e-8);
        assert_eq!(k.cross(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        for &q in &[0.1, 0.5, -0.8, 1.0] {
            let cross = k.cross(c(q, 0.0)).unwrap().re;
            let oracle = q.signum() * h_inverse_by_bisection(k.c0 * q.abs());
            assert_abs_diff_eq!(cross, oracle, epsilon = 1e-10);
        }
        let q = Complex64::from_polar(0.6, 2.0);
        let cross = k.cross(q).unwrap();
        assert_abs_diff_eq!(cross.arg(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(cross.norm(), h_inverse_by_bisection(k.c0 * 0.6), epsilon = 1e-10);
    }

    #[test]
    fn transforms_reject_wrong_field_or_nonunit() {
        let a = assignment(vec![vec![c(0.0, 1.0)]], vec![vec![c(1.0, 0.0)]]);
        assert!(krivine_transform(&a).is_err());
        let b = assignment(vec![vec![c(2.0, 0.0)]], vec![vec![c(1.0, 0.0)]]);
        assert!(haagerup_transform(&b).is_err());
    }

    #[test]
    fn gram_validity_on_random_assignments() {
        let kernel = HaagerupKernel::new().unwrap();
        for seed in 0..100 {
            let r = ProblemInstance::random(3, 3, Field::Real, seed).unwrap();
            let a = relaxation_opt(&r, 50, 1, seed).unwrap();
            let g = krivine_transform(&a).unwrap();
            assert!(g.clip_magnitude < 1e-8, "{}", g.clip_magnitude);
            let cmat = ProblemInstance::random(3, 3, Field::Complex, seed).unwrap();
            let a = relaxation_opt(&cmat, 50, 1, seed).unwrap();
            let g = haagerup_transform_with(&a, &kernel).unwrap();
            assert!(g.clip_magnitude < 1e-8, "{}", g.clip_magnitude);
            assert!(g.factor_error < 1e-8);
            for (i, x) in a.xs.iter().enumerate() {
                for (j, y) in a.ys.iter().enumerate() {
                    let want = kernel.cross(inner(x, y)).unwrap();
                    assert!((inner(&g.u[i], &g.v[j]) - want).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn real_per_pair_expectation_is_linear() {
        let r = ProblemInstance::random(2, 3, Field::Real, 1).unwrap();
        let a = relaxation_opt(&r, 500, 2, 1).unwrap();
        let g = krivine_transform(&a).unwrap();
        let factor = rounding_factor(Scheme::Krivine).unwrap();
        let est = pair_estimate(&g, 0, 1, 100_000, 5).unwrap();
        let t = inner(&a.xs[0], &a.ys[1]).re;
        assert!((est.mean.re - factor * t).abs() <= 4.0 * est.std_error);
    }

    #[test]
    fn single_sample_best_is_that_sample() {
        let r = ProblemInstance::random(2, 2, Field::Real, 3).unwrap();
        let a = relaxation_opt(&r, 500, 2, 3).unwrap();
        let g = krivine_transform(&a).unwrap();
        let res = gaussian_sign_round(&g, &r, 1, 17).unwrap();
        assert_abs_diff_eq!(res.best.value, res.mean_value.abs(), epsilon = 1e-12);
        assert_eq!(res.std_error, 0.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let r = ProblemInstance::random(2, 2, Field::Real, 3).unwrap();
        let a = relaxation_opt(&r, 10, 1, 3).unwrap();
        let g = krivine_transform(&a).unwrap();
        let other = ProblemInstance::random(3, 2, Field::Real, 3).unwrap();
        assert!(gaussian_sign_round(&g, &other, 10, 0).is_err());
    }

    #[test]
    fn one_by_one_real() {
        let r = ProblemInstance::from_real(&[vec![1.0]]).unwrap();
        let rep = rounding_certificate(&r, 100_000, 2, 42).unwrap();
        assert_abs_diff_eq!(rep.relaxation_value, 1.0, epsilon = 1e-12);
        assert!((rep.mean_value - 2.0 * constants::arcsinh1() / PI).abs() <= 4.0 * rep.std_error);
        assert_eq!(rep.best.value, 1.0);
        assert!(rep.ok);
    }

    #[test]
    fn identity_complex_ratio_is_c0() {
        let id = ProblemInstance::new(
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
            Field::Complex,
        )
        .unwrap();
        let rep = rounding_certificate(&id, 100_000, 4, 42).unwrap();
        let c0 = constants::haagerup_x0().unwrap().c0;
        assert!((rep.mean_value - c0 * rep.relaxation_value).abs() <= 4.0 * rep.std_error);
        assert!(rep.per_pair_max_sigma <= 4.0);
        assert!(rep.ok);
    }

    #[test]
    fn zero_padding_is_inert() {
        let small = ProblemInstance::from_real(&[vec![1.0, 2.0], vec![-0.5, 1.0]]).unwrap();
        let padded = ProblemInstance::from_real(&[
            vec![1.0, 0.0, 2.0],
            vec![0.0, 0.0, 0.0],
            vec![-0.5, 0.0, 1.0],
        ])
        .unwrap();
        let a = rounding_certificate(&small, 20_000, 2, 7).unwrap();
        let b = rounding_certificate(&padded, 20_000, 2, 7).unwrap();
        assert_eq!(a.mean_value, b.mean_value);
        assert_eq!(a.relaxation_value, b.relaxation_value);
        assert_eq!(a.best.value, b.best.value);
        assert_eq!(b.best.eps.len(), 3);
        assert_eq!(b.best.delta[1], c(1.0, 0.0));
        assert!(rounding_certificate(&small.scaled(0.0), 10, 1, 0).is_err());
    }

    #[test]
    fn feasibility_against_exact_discrete() {
        for seed in 0..5 {
            let r = ProblemInstance::random(3, 4, Field::Real, seed).unwrap();
            let rep = rounding_certificate(&r, 5_000, 2, seed).unwrap();
            assert!(rep.best_ok);
            for s in rep.best.eps.iter().chain(&rep.best.delta) {
                assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
            }
        }
    }
}
