//! Both sides of Grothendieck's inequality for a matrix `M`.
//!
//! * discrete: `max |Σ M_ij ε_i δ_j|` over unit-modulus signs. Exact
//!   enumeration in the real case, alternating phase alignment in the complex
//!   case.
//! * relaxation: `max |Σ M_ij ⟨x_i, y_j⟩|` over unit vectors in `F^(m+n)`,
//!   by block-coordinate ascent with multistart.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GkError, Result};
use crate::gaussian::{self, inner, sign_complex, Field};

/// Largest `n` for exact real enumeration.
pub const ENUMERATION_LIMIT: usize = 30;

/// Largest `n` for the complex phase-grid oracle.
pub const GRID_ORACLE_LIMIT: usize = 2;

pub const DEFAULT_STARTS: usize = 16;
pub const DEFAULT_ITERS: usize = 5000;

const ALIGN_MAX_ITERS: usize = 10_000;
const REL_IMPROVEMENT: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct ProblemInstance {
    m: usize,
    n: usize,
    field: Field,
    entries: Vec<Complex64>,
}

/// A matrix entry on disk: a number, `[re, im]`, or (for nested input) a row.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Cell {
    Num(f64),
    List(Vec<Cell>),
}

impl Cell {
    fn scalar(&self) -> Result<Complex64> {
        match self {
            Cell::Num(x) => Ok(Complex64::new(*x, 0.0)),
            Cell::List(v) => match v.as_slice() {
                [Cell::Num(re), Cell::Num(im)] => Ok(Complex64::new(*re, *im)),
                _ => Err(GkError::InvalidArgument(
                    "entry must be a number or an [re, im] pair".into(),
                )),
            },
        }
    }

    fn is_row_of(&self, n: usize) -> bool {
        matches!(self, Cell::List(v) if v.len() == n && v.iter().all(|c| c.scalar().is_ok()))
    }
}

/// On-disk form: `entries` is either a flat row-major array (with `m` and
/// `n`) or an array of rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    field: Field,
    entries: Vec<Cell>,
}

fn nested_rows(entries: &[Cell]) -> Result<Vec<Vec<Complex64>>> {
    entries
        .iter()
        .map(|row| match row {
            Cell::List(cells) => cells.iter().map(Cell::scalar).collect(),
            Cell::Num(_) => Err(GkError::InvalidArgument(
                "flat entries need both \"m\" and \"n\"".into(),
            )),
        })
        .collect()
}

impl TryFrom<InstanceFile> for ProblemInstance {
    type Error = GkError;

    fn try_from(f: InstanceFile) -> Result<Self> {
        let (m, n) = match (f.m, f.n) {
            (Some(m), Some(n)) => (m, n),
            (None, None) => return ProblemInstance::new(nested_rows(&f.entries)?, f.field),
            _ => return Err(GkError::InvalidArgument("give both \"m\" and \"n\" or neither".into())),
        };
        let len = f.entries.len();
        let nested = len == m && f.entries.iter().all(|c| c.is_row_of(n));
        let rows = if nested {
            nested_rows(&f.entries)?
        } else if len == m * n && n > 0 {
            let flat: Vec<Complex64> = f.entries.iter().map(Cell::scalar).collect::<Result<_>>()?;
            flat.chunks(n).map(<[Complex64]>::to_vec).collect()
        } else {
            return Err(GkError::DimensionMismatch(format!(
                "{len} entries do not form a {m}x{n} matrix"
            )));
        };
        ProblemInstance::new(rows, f.field)
    }
}

impl From<ProblemInstance> for InstanceFile {
    fn from(p: ProblemInstance) -> Self {
        let entries = p
            .entries
            .iter()
            .map(|z| match p.field {
                Field::Real => Cell::Num(z.re),
                Field::Complex => Cell::List(vec![Cell::Num(z.re), Cell::Num(z.im)]),
            })
            .collect();
        InstanceFile {
            m: Some(p.m),
            n: Some(p.n),
            field: p.field,
            entries,
        }
    }
}

impl ProblemInstance {
    pub fn new(rows: Vec<Vec<Complex64>>, field: Field) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(GkError::InvalidArgument("matrix must be at least 1x1".into()));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return Err(GkError::DimensionMismatch(format!(
                "row {i} has {} entries, expected {n}",
                rows[i].len()
            )));
        }
        let entries: Vec<Complex64> = rows.into_iter().flatten().collect();
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GkError::InvalidArgument("matrix entries must be finite".into()));
        }
        if field == Field::Real && entries.iter().any(|z| z.im != 0.0) {
            return Err(GkError::InvalidArgument(
                "real instance has entries with nonzero imaginary part".into(),
            ));
        }
        Ok(Self { m, n, field, entries })
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::new(rows, Field::Real)
    }

    /// Entries i.i.d. standard Gaussian of the field.
    pub fn random(m: usize, n: usize, field: Field, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..m)
            .map(|_| {
                let mut row = vec![ZERO; n];
                gaussian::fill_gaussian(&mut rng, field, &mut row);
                row
            })
            .collect();
        Self::new(rows, field)
    }

    /// Parses the JSON instance format, keeping the typed error.
    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_value(value).map_err(|e| GkError::InvalidArgument(e.to_string()))?;
        Self::try_from(file)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.chunks(self.n)
    }

    /// The same matrix viewed over `field` (real to complex only).
    pub fn with_field(&self, field: Field) -> Result<Self> {
        let rows = self.rows().map(<[Complex64]>::to_vec).collect();
        Self::new(rows, field)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * c).collect(),
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> Self {
        let entries = (0..self.n)
            .flat_map(|j| (0..self.m).map(move |i| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        Self {
            m: self.n,
            n: self.m,
            field: self.field,
            entries,
        }
    }

    /// `|Σ M_ij ε_i δ_j|`.
    pub fn sign_value(&self, eps: &[Complex64], delta: &[Complex64]) -> Result<f64> {
        if eps.len() != self.m || delta.len() != self.n {
            return Err(GkError::DimensionMismatch(format!(
                "signs have lengths {}/{}, matrix is {}x{}",
                eps.len(),
                delta.len(),
                self.m,
                self.n
            )));
        }
        Ok(self
            .rows()
            .zip(eps)
            .map(|(row, e)| e * row.iter().zip(delta).map(|(a, d)| a * d).sum::<Complex64>())
            .sum::<Complex64>()
            .norm())
    }

    /// `Σ M_ij ⟨x_i, y_j⟩`.
    pub fn vector_objective(&self, xs: &[Vec<Complex64>], ys: &[Vec<Complex64>]) -> Complex64 {
        let mut total = ZERO;
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                total += self.get(i, j) * inner(x, y);
            }
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignAssignment {
    pub eps: Vec<Complex64>,
    pub delta: Vec<Complex64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitVectorAssignment {
    pub xs: Vec<Vec<Complex64>>,
    pub ys: Vec<Vec<Complex64>>,
    pub l: usize,
    pub value: f64,
    /// Ascent sweeps used by the winning start.
    pub sweeps: usize,
    pub starts: usize,
}

/// `sign(z)`, with the origin sent to `+1`.
fn unit_sign(z: Complex64) -> Complex64 {
    if z == ZERO {
        ONE
    } else {
        sign_complex(z)
    }
}

fn real_sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Exact real optimum by enumerating `δ ∈ {±1}^n` with `δ_0 = +1` (the value
/// is invariant under `δ → -δ`). Among equal values the lexicographically
/// first `δ` (with `+1 < -1`) wins.
pub fn discrete_opt_real(mtx: &ProblemInstance) -> Result<SignAssignment> {
    if mtx.field != Field::Real {
        return Err(GkError::InvalidArgument("discrete_opt_real needs a real instance".into()));
    }
    let n = mtx.n;
    if n > ENUMERATION_LIMIT {
        return Err(GkError::Budget {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let a: Vec<f64> = mtx.entries.iter().map(|z| z.re).collect();
    let m = mtx.m;
    // δ_j = -1 iff bit (n-1-j) of the pattern is set, so pattern order is
    // lexicographic order; patterns < 2^(n-1) have δ_0 = +1.
    let free = n - 1;
    let outer_bits = free.min(10);
    let inner_bits = free - outer_bits;
    let best = (0..1u64 << outer_bits)
        .into_par_iter()
        .map(|hi| {
            let base = hi << inner_bits;
            let delta_of = |p: u64| -> Vec<f64> {
                (0..n)
                    .map(|j| if (p >> (n - 1 - j)) & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            };
            let mut delta = delta_of(base);
            let mut rows: Vec<f64> = (0..m)
                .map(|i| (0..n).map(|j| a[i * n + j] * delta[j]).sum())
                .collect();
            let mut best_val = rows.iter().map(|r| r.abs()).sum::<f64>();
            let mut best_pat = base;
            let mut gray = 0u64;
            for step in 1u64..1 << inner_bits {
                let bit = step.trailing_zeros() as usize;
                gray ^= 1 << bit;
                let j = n - 1 - bit;
                delta[j] = -delta[j];
                for (i, r) in rows.iter_mut().enumerate() {
                    *r += 2.0 * a[i * n + j] * delta[j];
                }
                let val: f64 = rows.iter().map(|r| r.abs()).sum();
                let pat = base | gray;
                if val > best_val || (val == best_val && pat < best_pat) {
                    best_val = val;
                    best_pat = pat;
                }
            }
            (best_val, best_pat)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::NEG_INFINITY, u64::MAX), |acc, c| {
            if c.0 > acc.0 || (c.0 == acc.0 && c.1 < acc.1) {
                c
            } else {
                acc
            }
        });
    let delta: Vec<f64> = (0..n)
        .map(|j| if (best.1 >> (n - 1 - j)) & 1 == 1 { -1.0 } else { 1.0 })
        .collect();
    Ok(real_assignment(mtx, &delta))
}

fn real_assignment(mtx: &ProblemInstance, delta: &[f64]) -> SignAssignment {
    let eps: Vec<Complex64> = mtx
        .rows()
        .map(|row| {
            let r: f64 = row.iter().zip(delta).map(|(a, d)| a.re * d).sum();
            Complex64::new(real_sign(r), 0.0)
        })
        .collect();
    let delta: Vec<Complex64> = delta.iter().map(|&d| Complex64::new(d, 0.0)).collect();
    let value = mtx.sign_value(&eps, &delta).expect("dimensions match");
    SignAssignment { eps, delta, value }
}

/// Best `ε` for fixed `δ`: `ε_i = conj(sign(Σ_j M_ij δ_j))`.
fn align_eps(mtx: &ProblemInstance, delta: &[Complex64]) -> Vec<Complex64> {
    mtx.rows()
        .map(|row| unit_sign(row.iter().zip(delta).map(|(a, d)| a * d).sum()).conj())
        .collect()
}

/// Best `δ` for fixed `ε`: `δ_j = conj(sign(Σ_i M_ij ε_i))`.
fn align_delta(mtx: &ProblemInstance, eps: &[Complex64]) -> Vec<Complex64> {
    (0..mtx.n)
        .map(|j| unit_sign((0..mtx.m).map(|i| mtx.get(i, j) * eps[i]).sum()).conj())
        .collect()
}

fn alternate_from(mtx: &ProblemInstance, mut delta: Vec<Complex64>) -> SignAssignment {
    let mut eps = align_eps(mtx, &delta);
    let mut value = mtx.sign_value(&eps, &delta).expect("dimensions match");
    for _ in 0..ALIGN_MAX_ITERS {
        let new_delta = align_delta(mtx, &eps);
        let new_eps = align_eps(mtx, &new_delta);
        let new_value = mtx.sign_value(&new_eps, &new_delta).expect("dimensions match");
        if new_value <= value * (1.0 + REL_IMPROVEMENT) {
            if new_value > value {
                (eps, delta, value) = (new_eps, new_delta, new_value);
            }
            break;
        }
        (eps, delta, value) = (new_eps, new_delta, new_value);
    }
    SignAssignment { eps, delta, value }
}

fn pick_best<T, F: Fn(&T) -> f64>(items: Vec<T>, value: F) -> T {
    // first maximum in start order
    let mut iter = items.into_iter();
    let mut best = iter.next().expect("at least one candidate");
    for item in iter {
        if value(&item) > value(&best) {
            best = item;
        }
    }
    best
}

/// Alternating phase alignment from `starts` starting points. Start 0 is
/// `δ = 1`; the rest are uniform random phases from stream `k` of `seed`.
/// For real-valued matrices with `n ≤ 20` the exact real optimum is added as
/// one more start, so the result is never below the real discrete value.
pub fn discrete_opt_complex(mtx: &ProblemInstance, starts: usize, seed: u64) -> Result<SignAssignment> {
    if starts == 0 {
        return Err(GkError::InvalidArgument("starts must be at least 1".into()));
    }
    let mut runs: Vec<SignAssignment> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let delta = if k == 0 {
                vec![ONE; mtx.n]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                (0..mtx.n)
                    .map(|_| {
                        let u: f64 = rand::Rng::random(&mut rng);
                        Complex64::from_polar(1.0, 2.0 * PI * u)
                    })
                    .collect()
            };
            alternate_from(mtx, delta)
        })
        .collect();
    if mtx.n <= 20 && mtx.entries.iter().all(|z| z.im == 0.0) {
        let real = discrete_opt_real(&mtx.with_field(Field::Real)?)?;
        runs.push(alternate_from(mtx, real.delta));
    }
    Ok(pick_best(runs, |r| r.value))
}

/// Phase-grid oracle for `n ≤ 2`: `δ_0 = 1`, `δ_1` on a grid of `resolution`
/// angles, `ε` in closed form.
pub fn discrete_opt_complex_grid(mtx: &ProblemInstance, resolution: usize) -> Result<SignAssignment> {
    if mtx.n > GRID_ORACLE_LIMIT {
        return Err(GkError::Budget {
            n: mtx.n,
            limit: GRID_ORACLE_LIMIT,
        });
    }
    if resolution == 0 {
        return Err(GkError::InvalidArgument("resolution must be positive".into()));
    }
    let candidates: Vec<Vec<Complex64>> = if mtx.n == 1 {
        vec![vec![ONE]]
    } else {
        (0..resolution)
            .map(|k| vec![ONE, Complex64::from_polar(1.0, 2.0 * PI * k as f64 / resolution as f64)])
            .collect()
    };
    let runs = candidates
        .into_iter()
        .map(|delta| {
            let eps = align_eps(mtx, &delta);
            let value = mtx.sign_value(&eps, &delta).expect("dimensions match");
            SignAssignment { eps, delta, value }
        })
        .collect();
    Ok(pick_best(runs, |r| r.value))
}

/// The discrete optimum used for normalization: exact in the real case, the
/// grid oracle for complex `n ≤ 2`, otherwise alternating alignment.
pub fn discrete_opt(mtx: &ProblemInstance, starts: usize, seed: u64) -> Result<SignAssignment> {
    match mtx.field {
        Field::Real => discrete_opt_real(mtx),
        Field::Complex if mtx.n <= GRID_ORACLE_LIMIT => {
            let grid = discrete_opt_complex_grid(mtx, 720)?;
            // polish the grid optimum off the grid
            let polished = alternate_from(mtx, grid.delta.clone());
            Ok(if polished.value > grid.value { polished } else { grid })
        }
        Field::Complex => discrete_opt_complex(mtx, starts, seed),
    }
}

fn normalize(v: &mut [Complex64]) -> bool {
    let r = gaussian::norm(v);
    if r == 0.0 || !r.is_finite() {
        return false;
    }
    for a in v.iter_mut() {
        *a /= r;
    }
    true
}

fn random_unit(rng: &mut ChaCha8Rng, field: Field, l: usize) -> Vec<Complex64> {
    loop {
        let mut v = vec![ZERO; l];
        for a in v.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = match field {
                Field::Real => 0.0,
                Field::Complex => StandardNormal.sample(rng),
            };
            *a = Complex64::new(re, im);
        }
        if normalize(&mut v) {
            return v;
        }
    }
}

/// One ascent run from random `y`s drawn from stream `stream` of `seed`.
/// Returns the assignment and `Re Σ M_ij ⟨x_i, y_j⟩` after every sweep.
pub fn relaxation_run(
    mtx: &ProblemInstance,
    iters: usize,
    seed: u64,
    stream: u64,
) -> Result<(UnitVectorAssignment, Vec<f64>)> {
    if iters == 0 {
        return Err(GkError::InvalidArgument("iters must be at least 1".into()));
    }
    let (m, n, l) = (mtx.m, mtx.n, mtx.m + mtx.n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut ys: Vec<Vec<Complex64>> = (0..n).map(|_| random_unit(&mut rng, mtx.field, l)).collect();
    let mut xs: Vec<Vec<Complex64>> = (0..m).map(|_| random_unit(&mut rng, mtx.field, l)).collect();
    let mut history = Vec::new();
    let mut sweeps = 0;
    for _ in 0..iters {
        for (i, x) in xs.iter_mut().enumerate() {
            let mut w = vec![ZERO; l];
            for (j, y) in ys.iter().enumerate() {
                let c = mtx.get(i, j).conj();
                for (wk, yk) in w.iter_mut().zip(y) {
                    *wk += c * yk;
                }
            }
            if normalize(&mut w) {
                *x = w;
            }
        }
        for (j, y) in ys.iter_mut().enumerate() {
            let mut w = vec![ZERO; l];
            for (i, x) in xs.iter().enumerate() {
                let c = mtx.get(i, j);
                for (wk, xk) in w.iter_mut().zip(x) {
                    *wk += c * xk;
                }
            }
            if normalize(&mut w) {
                *y = w;
            }
        }
        sweeps += 1;
        let value = mtx.vector_objective(&xs, &ys).re;
        let stop = history
            .last()
            .is_some_and(|&prev: &f64| value - prev <= REL_IMPROVEMENT * prev.abs());
        history.push(value);
        if stop {
            break;
        }
    }
    // rotate the x's so the objective is real and nonnegative
    let total = mtx.vector_objective(&xs, &ys);
    let phase = unit_sign(total).conj();
    for x in xs.iter_mut() {
        for a in x.iter_mut() {
            *a *= phase;
        }
    }
    let value = mtx.vector_objective(&xs, &ys).re.max(0.0);
    Ok((
        UnitVectorAssignment {
            xs,
            ys,
            l,
            value,
            sweeps,
            starts: 1,
        },
        history,
    ))
}

/// Multistart block-coordinate ascent for the vector relaxation with
/// `l = m + n`.
pub fn relaxation_opt(mtx: &ProblemInstance, iters: usize, starts: usize, seed: u64) -> Result<UnitVectorAssignment> {
    if starts == 0 {
        return Err(GkError::InvalidArgument("starts must be at least 1".into()));
    }
    let runs = (0..starts as u64)
        .into_par_iter()
        .map(|k| relaxation_run(mtx, iters, seed, k).map(|(a, _)| a))
        .collect::<Result<Vec<_>>>()?;
    let mut best = pick_best(runs, |a| a.value);
    best.starts = starts;
    Ok(best)
}

/// `|Σ M̃_ij arcsin⟨x_i,y_j⟩|` (real) or `|Σ M̃_ij H(⟨x_i,y_j⟩)|` (complex),
/// where `M̃ = M / discrete`. Bounded by `π/2` and `1` respectively.
pub fn verify_corollary_with(mtx: &ProblemInstance, a: &UnitVectorAssignment, discrete: f64) -> Result<f64> {
    if !(discrete > 0.0) {
        return Err(GkError::InvalidArgument(
            "discrete optimum must be positive (zero matrix?)".into(),
        ));
    }
    if a.xs.len() != mtx.m || a.ys.len() != mtx.n {
        return Err(GkError::DimensionMismatch("assignment does not match matrix".into()));
    }
    let mut total = ZERO;
    for (i, x) in a.xs.iter().enumerate() {
        for (j, y) in a.ys.iter().enumerate() {
            let q = inner(x, y);
            let term = match mtx.field {
                Field::Real => Complex64::new(q.re.clamp(-1.0, 1.0).asin(), 0.0),
                Field::Complex => {
                    let r = q.norm();
                    let q = if r > 1.0 { q / r } else { q };
                    crate::constants::haagerup_H(q)?
                }
            };
            total += mtx.get(i, j) * term;
        }
    }
    Ok(total.norm() / discrete)
}

pub fn verify_corollary(mtx: &ProblemInstance, a: &UnitVectorAssignment) -> Result<f64> {
    let d = discrete_opt(mtx, DEFAULT_STARTS, 0)?;
    verify_corollary_with(mtx, a, d.value)
}

/// Pushes each interior coordinate of `delta` to whichever of `±1` gives the
/// larger `Σ_i |Σ_j M_ij δ_j|` (convex in each coordinate). Returns the
/// vertex and the objective before and after.
pub fn vertex_improvement(mtx: &ProblemInstance, delta: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    if delta.len() != mtx.n {
        return Err(GkError::DimensionMismatch("delta length".into()));
    }
    let objective = |d: &[f64]| -> f64 {
        mtx.rows()
            .map(|row| row.iter().zip(d).map(|(a, x)| a * x).sum::<Complex64>().norm())
            .sum()
    };
    let before = objective(delta);
    let mut d = delta.to_vec();
    for j in 0..d.len() {
        d[j] = 1.0;
        let plus = objective(&d);
        d[j] = -1.0;
        let minus = objective(&d);
        d[j] = if plus >= minus { 1.0 } else { -1.0 };
    }
    let after = objective(&d);
    Ok((d, before, after))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn hadamard() -> ProblemInstance {
        ProblemInstance::from_real(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap()
    }

    fn brute_force_real(mtx: &ProblemInstance) -> f64 {
        let (m, n) = (mtx.m(), mtx.n());
        let mut best: f64 = 0.0;
        for e in 0..1u32 << m {
            for d in 0..1u32 << n {
                let mut s = 0.0;
                for i in 0..m {
                    for j in 0..n {
                        let ei = if e >> i & 1 == 1 { -1.0 } else { 1.0 };
                        let dj = if d >> j & 1 == 1 { -1.0 } else { 1.0 };
                        s += mtx.get(i, j).re * ei * dj;
                    }
                }
                best = best.max(s.abs());
            }
        }
        best
    }

    #[test]
    fn instance_validation() {
        assert!(ProblemInstance::from_real(&[]).is_err());
        assert!(ProblemInstance::from_real(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(ProblemInstance::from_real(&[vec![f64::NAN]]).is_err());
        assert!(ProblemInstance::new(vec![vec![Complex64::new(0.0, 1.0)]], Field::Real).is_err());
    }

    #[test]
    fn instance_json_round_trip() {
        let json = r#"{"field":"complex","entries":[[1,[0,2]],[[3,-1],4.5]]}"#;
        let p: ProblemInstance = serde_json::from_str(json).unwrap();
        assert_eq!(p.get(0, 1), Complex64::new(0.0, 2.0));
        assert_eq!(p.get(1, 0), Complex64::new(3.0, -1.0));
        let back: ProblemInstance = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(p, back);
        let flat = r#"{"m":2,"n":2,"field":"complex","entries":[1,[0,2],[3,-1],4.5]}"#;
        assert_eq!(serde_json::from_str::<ProblemInstance>(flat).unwrap(), p);
        let col = r#"{"m":2,"n":1,"field":"complex","entries":[[1,2],[3,4]]}"#;
        let c: ProblemInstance = serde_json::from_str(col).unwrap();
        assert_eq!(c.get(1, 0), Complex64::new(3.0, 4.0));
        let rows = r#"{"m":2,"n":1,"field":"real","entries":[[1],[3]]}"#;
        assert_eq!(serde_json::from_str::<ProblemInstance>(rows).unwrap().get(1, 0).re, 3.0);
        let short = r#"{"m":2,"n":2,"field":"real","entries":[1,2,3]}"#;
        assert!(serde_json::from_str::<ProblemInstance>(short).is_err());
        let half = r#"{"m":1,"field":"real","entries":[[1]]}"#;
        assert!(serde_json::from_str::<ProblemInstance>(half).is_err());
        let bad = r#"{"field":"real","entries":[[[0,1]]]}"#;
        assert!(serde_json::from_str::<ProblemInstance>(bad).is_err());
    }

    #[test]
    fn real_examples() {
        let one = ProblemInstance::from_real(&[vec![1.0]]).unwrap();
        assert_eq!(discrete_opt_real(&one).unwrap().value, 1.0);
        assert_eq!(discrete_opt_real(&hadamard()).unwrap().value, 2.0);
        let id = ProblemInstance::from_real(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let a = discrete_opt_real(&id).unwrap();
        assert_eq!(a.value, 2.0);
        assert_eq!(a.delta, vec![ONE, ONE]);
    }

    #[test]
    fn real_enumeration_matches_brute_force() {
        for seed in 0..20 {
            let mtx = ProblemInstance::random(4, 5, Field::Real, seed).unwrap();
            assert_abs_diff_eq!(discrete_opt_real(&mtx).unwrap().value, brute_force_real(&mtx), epsilon = 1e-12);
        }
    }

    #[test]
    fn enumeration_with_split_chunks() {
        // n - 1 > 10 exercises the outer/inner split
        let mtx = ProblemInstance::random(3, 13, Field::Real, 4).unwrap();
        let a = discrete_opt_real(&mtx).unwrap();
        assert_abs_diff_eq!(a.value, brute_force_real(&mtx), epsilon = 1e-10);
        assert_abs_diff_eq!(a.value, mtx.sign_value(&a.eps, &a.delta).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn zero_rows_map_to_plus_one() {
        let mtx = ProblemInstance::from_real(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let a = discrete_opt_real(&mtx).unwrap();
        assert_eq!(a.eps[0], ONE);
        assert_eq!(a.value, 2.0);
    }

    #[test]
    fn budget_and_field_errors() {
        let wide = ProblemInstance::from_real(&[vec![1.0; 31]]).unwrap();
        assert_eq!(discrete_opt_real(&wide), Err(GkError::Budget { n: 31, limit: 30 }));
        let c = hadamard().with_field(Field::Complex).unwrap();
        assert!(discrete_opt_real(&c).is_err());
    }

    #[test]
    fn complex_examples() {
        let one = ProblemInstance::new(vec![vec![ONE]], Field::Complex).unwrap();
        assert_abs_diff_eq!(discrete_opt_complex(&one, 4, 1).unwrap().value, 1.0, epsilon = 1e-15);
        let h = hadamard().with_field(Field::Complex).unwrap();
        let heuristic = discrete_opt_complex(&h, 16, 1).unwrap();
        let grid = discrete_opt_complex_grid(&h, 720).unwrap();
        // δ = (1, i) gives row sums 1 ± i, so complex signs reach 2√2 here
        assert_abs_diff_eq!(grid.value, 2.0 * 2.0_f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(heuristic.value, grid.value, epsilon = 1e-12);
        assert!(heuristic.value > discrete_opt_real(&hadamard()).unwrap().value);
    }

    #[test]
    fn complex_at_least_real() {
        for seed in 0..10 {
            let real = ProblemInstance::random(3, 4, Field::Real, seed).unwrap();
            let r = discrete_opt_real(&real).unwrap().value;
            let c = discrete_opt_complex(&real.with_field(Field::Complex).unwrap(), 8, seed).unwrap();
            assert!(c.value >= r - 1e-12);
            for e in c.eps.iter().chain(&c.delta) {
                assert_abs_diff_eq!(e.norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn complex_heuristic_matches_grid_oracle_for_two_columns() {
        for seed in 0..10 {
            let mtx = ProblemInstance::random(3, 2, Field::Complex, seed).unwrap();
            let h = discrete_opt_complex(&mtx, 16, seed).unwrap();
            let g = discrete_opt_complex_grid(&mtx, 720).unwrap();
            // grid spacing 2π/720 costs at most a relative (1 - cos(π/720))
            assert!(h.value >= g.value * (1.0 - 1e-4), "seed {seed}: {} < {}", h.value, g.value);
        }
    }

    #[test]
    fn relaxation_examples() {
        let one = ProblemInstance::from_real(&[vec![1.0]]).unwrap();
        assert_abs_diff_eq!(relaxation_opt(&one, 100, 2, 0).unwrap().value, 1.0, epsilon = 1e-12);
        let a = relaxation_opt(&hadamard(), DEFAULT_ITERS, 4, 0).unwrap();
        assert_abs_diff_eq!(a.value, 2.0 * 2.0_f64.sqrt(), epsilon = 1e-7);
        let id = ProblemInstance::from_real(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(relaxation_opt(&id, DEFAULT_ITERS, 4, 0).unwrap().value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn hadamard_relaxation_against_rank_two_grid() {
        // x_i = (cos a_i, sin a_i), y_j = (cos b_j, sin b_j) with b fixed at 0 and π/2
        let mut best: f64 = 0.0;
        for i in 0..720 {
            for k in 0..720 {
                let a1 = 2.0 * PI * i as f64 / 720.0;
                let a2 = 2.0 * PI * k as f64 / 720.0;
                let v = a1.cos() + a1.sin() + a2.cos() - a2.sin();
                best = best.max(v.abs());
            }
        }
        let a = relaxation_opt(&hadamard(), DEFAULT_ITERS, 4, 3).unwrap();
        assert!((a.value - best).abs() < 1e-4);
    }

    #[test]
    fn relaxation_assignment_invariants() {
        let mtx = ProblemInstance::random(3, 4, Field::Complex, 8).unwrap();
        let a = relaxation_opt(&mtx, DEFAULT_ITERS, 4, 8).unwrap();
        assert_eq!(a.l, 7);
        for v in a.xs.iter().chain(&a.ys) {
            assert_eq!(v.len(), 7);
            assert_abs_diff_eq!(gaussian::norm(v), 1.0, epsilon = 1e-12);
        }
        let obj = mtx.vector_objective(&a.xs, &a.ys);
        assert_abs_diff_eq!(obj.re, a.value, epsilon = 1e-10);
        assert!(obj.im.abs() < 1e-10);
    }

    #[test]
    fn ascent_is_monotone() {
        for seed in 0..10 {
            let mtx = ProblemInstance::random(4, 3, Field::Complex, seed).unwrap();
            let (_, history) = relaxation_run(&mtx, 500, seed, 0).unwrap();
            assert!(history.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs()));
        }
    }

    #[test]
    fn sandwich_real_and_complex() {
        let k_real = constants::krivine_constant();
        let k_complex = constants::haagerup_constant().unwrap();
        for seed in 0..10 {
            for &(m, n) in &[(3, 3), (4, 4)] {
                let r = ProblemInstance::random(m, n, Field::Real, seed).unwrap();
                let d = discrete_opt_real(&r).unwrap().value;
                let v = relaxation_opt(&r, DEFAULT_ITERS, 8, seed).unwrap().value;
                assert!(d <= v + 1e-9 && v <= k_real * d + 1e-6);
                let c = ProblemInstance::random(m, n, Field::Complex, seed).unwrap();
                let d = discrete_opt(&c, 16, seed).unwrap().value;
                let v = relaxation_opt(&c, DEFAULT_ITERS, 8, seed).unwrap().value;
                assert!(d <= v + 1e-9 && v <= k_complex * d + 1e-6);
            }
        }
    }

    #[test]
    fn corollary_examples() {
        let one = ProblemInstance::from_real(&[vec![1.0]]).unwrap();
        let a = relaxation_opt(&one, 10, 1, 0).unwrap();
        assert_abs_diff_eq!(verify_corollary(&one, &a).unwrap(), FRAC_PI_2, epsilon = 1e-12);
        let c = one.with_field(Field::Complex).unwrap();
        let a = relaxation_opt(&c, 10, 1, 0).unwrap();
        assert_abs_diff_eq!(verify_corollary(&c, &a).unwrap(), 1.0, epsilon = 1e-12);
        assert!(verify_corollary_with(&one, &a, 0.0).is_err());
    }

    #[test]
    fn corollary_bound_on_random_instances() {
        for seed in 0..30 {
            let r = ProblemInstance::random(3, 3, Field::Real, seed).unwrap();
            let a = relaxation_opt(&r, 1000, 4, seed).unwrap();
            assert!(verify_corollary(&r, &a).unwrap() <= FRAC_PI_2 + 1e-9);
        }
    }

    #[test]
    fn boundary_attainment() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..100 {
            let mtx = ProblemInstance::random(3, 4, Field::Real, seed).unwrap();
            let delta: Vec<f64> = (0..4).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
            let (vertex, before, after) = vertex_improvement(&mtx, &delta).unwrap();
            assert!(after >= before - 1e-12);
            assert!(vertex.iter().all(|d| d.abs() == 1.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn scale_equivariance(seed in 0u64..1000, c in 0.1f64..10.0) {
            let r = ProblemInstance::random(3, 3, Field::Real, seed).unwrap();
            let a = discrete_opt_real(&r).unwrap();
            let b = discrete_opt_real(&r.scaled(c)).unwrap();
            prop_assert!((b.value - c * a.value).abs() <= 1e-12 * b.value);
            prop_assert_eq!(a.delta, b.delta);
            let x = discrete_opt_complex(&r.with_field(Field::Complex).unwrap(), 4, seed).unwrap();
            let y = discrete_opt_complex(&r.scaled(c).with_field(Field::Complex).unwrap(), 4, seed).unwrap();
            prop_assert!((y.value - c * x.value).abs() <= 1e-9 * y.value);
            let u = relaxation_opt(&r, 2000, 2, seed).unwrap();
            let v = relaxation_opt(&r.scaled(c), 2000, 2, seed).unwrap();
            prop_assert!((v.value - c * u.value).abs() <= 1e-6 * v.value);
        }

        #[test]
        fn transpose_preserves_discrete_value(seed in 0u64..1000) {
            let r = ProblemInstance::random(3, 5, Field::Real, seed).unwrap();
            let a = discrete_opt_real(&r).unwrap().value;
            let b = discrete_opt_real(&r.transpose()).unwrap().value;
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
