//! Acceptance criteria, one line each. Runs as a plain binary so every line
//! is printed; exits nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::Command;
use std::time::{Duration, Instant};

use gk_core::cli::{self, RunConfig};
use gk_core::constants::{self, ConstantsReport};
use gk_core::rounding;
use gk_core::series;
use gk_core::solver::{self, ProblemInstance};
use gk_core::Field;

struct Verdict {
    pass: bool,
    detail: String,
    /// Extra lines printed under a failing criterion.
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict {
            pass,
            detail,
            notes: Vec::new(),
        }
    }
}

fn gk_bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gk"));
    cmd.env_remove("GK_THREADS");
    cmd
}

fn constants_reproduction() -> Verdict {
    let t = Instant::now();
    let out = gk_bin().args(["constants", "--no-timestamp"]).output().expect("gk runs");
    let elapsed = t.elapsed();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json report");
    let r = &v["result"];
    let get = |k: &str| r[k].as_f64().unwrap_or(f64::NAN);
    let (kr, kc, dr, dc) = (get("k_real"), get("k_complex"), get("davie_real"), get("davie_complex"));
    let pass = (kr - 1.78221).abs() <= 1e-5
        && (kc - 1.40491).abs() <= 1e-5
        && (dr - 1.67696).abs() <= 1e-4
        && (dc - 1.33807).abs() <= 1e-4
        && elapsed < Duration::from_secs(5)
        && out.status.success();
    Verdict::new(
        pass,
        format!(
            "K_R={kr:.7} K_C={kc:.7} davie_R={dr:.7} davie_C={dc:.7} in {:.2}s (limit 5s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn coefficient_reproduction() -> Verdict {
    let inv = series::h_inverse_with_order(series::INVERSE_ORDER);
    let b = &inv.series;
    let a = 4.0 / PI;
    let e1 = (b.coeff(0) - a).abs();
    let e3 = (b.coeff(1) + a.powi(3) / 8.0).abs();
    let e5 = b.coeff(2).abs();
    let e7 = (b.coeff(3) + a.powi(7) / 1024.0).abs();
    let worst_sign = (1..=30).map(|k| b.coeff(k)).fold(f64::NEG_INFINITY, f64::max);
    let reliable = inv.reliable_order(1e-12);
    let sums = b.truncate(reliable).expect("order").partial_abs_sums();
    let monotone = sums.windows(2).all(|w| w[1] >= w[0]);
    let last = *sums.last().unwrap();
    let pass = e1 < 1e-12
        && e3 < 1e-12
        && e5 < 1e-12
        && e7 < 1e-12
        && worst_sign <= 1e-12
        && monotone
        && last <= 8.0 / PI - 1.0 + 1e-12;
    Verdict::new(
        pass,
        format!(
            "|db1|={e1:.1e} |db3|={e3:.1e} |b5|={e5:.1e} |db7|={e7:.1e} max b(k=1..30)={worst_sign:.3e} \
             sum|b| to k={}: {last:.12} <= {:.12}",
            reliable - 1,
            8.0 / PI - 1.0
        ),
    )
}

fn x0_certificate() -> Verdict {
    let s = constants::solve_x0(1e-12).expect("x0");
    let h = constants::haagerup_h(s.x0).expect("h");
    let resid = (h - PI * (s.x0 + 1.0) / 8.0).abs();
    let phi = (s.phi_c0 - 1.0).abs();
    let pass = resid < 1e-10 && s.x0 > 0.0 && s.x0 < 1.0 && phi < 1e-8;
    Verdict::new(
        pass,
        format!("x0={:.13} c0={:.13} |h(x0)-pi(x0+1)/8|={resid:.1e} |phi(c0)-1|={phi:.1e}", s.x0, s.c0),
    )
}

fn lemma21_monte_carlo() -> Verdict {
    let cfg = RunConfig::default();
    let t = Instant::now();
    let suite = cli::verify_lemma21(&cfg).expect("suite");
    let elapsed = t.elapsed();
    let sigmas = cfg.tol("lemma21_sigmas");
    let reseeded = suite.checks.iter().filter(|c| c.name.contains("reseeded)")).count();
    let worst = suite
        .checks
        .iter()
        .filter(|c| c.name.contains(" pair "))
        .map(|c| c.value / c.reference.max(f64::MIN_POSITIVE) * sigmas)
        .fold(0.0, f64::max);
    let mut v = Verdict::new(
        suite.ok && elapsed < Duration::from_secs(60),
        format!(
            "200 pairs at {} samples, worst {worst:.2} sigma, {reseeded} reseeded, {:.1}s (limit 60s)",
            cfg.samples,
            elapsed.as_secs_f64()
        ),
    );
    v.notes = suite.failures().map(|c| format!("{}: {:.3e} > {:.3e}", c.name, c.value, c.reference)).collect();
    v
}

fn rounding_ratio_law() -> Verdict {
    let t = Instant::now();
    let samples = 1_000_000;
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    let mut count = 0;
    for field in [Field::Real, Field::Complex] {
        let target = 1.0 / cli::grothendieck_bound(field).expect("K");
        let chsh = ProblemInstance::from_real(&[vec![1.0, 1.0], vec![1.0, -1.0]])
            .and_then(|p| p.with_field(field))
            .expect("chsh");
        let mut instances = vec![("chsh".to_string(), chsh)];
        for i in 0..20 {
            let seed = 1000 + i;
            instances.push((format!("4x4 seed {seed}"), ProblemInstance::random(4, 4, field, seed).expect("random")));
        }
        for (name, mtx) in instances {
            let r = rounding::rounding_certificate(&mtx, samples, solver::DEFAULT_STARTS, 7).expect("round");
            let sigma = r.std_error / r.relaxation_value;
            let z = (r.mean_ratio - target).abs() / sigma;
            worst = worst.max(z);
            count += 1;
            if z > 5.0 {
                notes.push(format!("{field} {name}: ratio {:.6} vs {target:.6}, {z:.2} sigma", r.mean_ratio));
            }
        }
    }
    let elapsed = t.elapsed();
    let mut v = Verdict::new(
        notes.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "{count} instances at {samples} samples, worst |ratio - 1/K| = {worst:.2} sigma (limit 5), {:.1}s (limit 300s)",
            elapsed.as_secs_f64()
        ),
    );
    v.notes = notes;
    v
}

fn sandwich_property() -> Verdict {
    let mut notes = Vec::new();
    let mut worst_upper = f64::NEG_INFINITY;
    let mut count = 0;
    for field in [Field::Real, Field::Complex] {
        let k = cli::grothendieck_bound(field).expect("K");
        for size in [3, 4] {
            for i in 0..50u64 {
                let seed = 5000 + 100 * size as u64 + i;
                let mtx = ProblemInstance::random(size, size, field, seed).expect("random");
                let d = solver::discrete_opt(&mtx, solver::DEFAULT_STARTS, seed).expect("discrete").value;
                let r = solver::relaxation_opt(&mtx, solver::DEFAULT_ITERS, solver::DEFAULT_STARTS, seed)
                    .expect("relaxation")
                    .value;
                worst_upper = worst_upper.max(r / d);
                count += 1;
                if d > r + 1e-9 || r > k * d + 1e-6 {
                    notes.push(format!("{field} {size}x{size} seed {seed}: discrete {d:.9} relaxation {r:.9}"));
                }
            }
        }
    }
    let mut v = Verdict::new(
        notes.is_empty(),
        format!("{count} instances, max relaxation/discrete = {worst_upper:.5}"),
    );
    v.notes = notes;
    v
}

fn section5_suite() -> Verdict {
    let suite = cli::verify_section5(&RunConfig::default()).expect("suite");
    let failed: Vec<_> = suite.failures().collect();
    let mut v = Verdict::new(
        suite.ok,
        format!("{} checks, {} failed", suite.checks.len(), failed.len()),
    );
    v.notes = failed
        .iter()
        .map(|c| format!("{}: value {:.6e}, bound {:.6e}, margin {:.3e}", c.name, c.value, c.reference, c.margin))
        .collect();
    let certs = suite.details["certificates"].as_array().cloned().unwrap_or_default();
    if let Some(c4) = certs.iter().find(|c| c["k"] == 4) {
        let f = |k: &str| c4[k].as_f64().unwrap_or(f64::NAN);
        if c4["verdict"] != "certified_negative" {
            v.notes.push(format!(
                "analysis: k=4 integral {:.4e} (series b9 {:.4e}), quadrature error {:.1e}, remainder bound \
                 4/9*h2(4)^-9 = {:.4e} > |integral|; with alpha = 4 the remainder bound alone exceeds |b9|, so no \
                 quadrature accuracy can certify k=4. k=4..8 are settled by the series (verify coeffs), and the \
                 integral route is only claimed for k >= 9; k=5..20 certify here.",
                f("integral_value"),
                f("series_value"),
                f("quadrature_error"),
                f("remainder_bound")
            ));
        }
    }
    v
}

fn corollary_property() -> Verdict {
    let mut notes = Vec::new();
    let mut worst = [0.0f64; 2];
    for (fi, field) in [Field::Real, Field::Complex].into_iter().enumerate() {
        let bound = if field == Field::Real { FRAC_PI_2 } else { 1.0 };
        for i in 0..100u64 {
            let size = 3 + (i % 2) as usize;
            let seed = 9000 + i;
            let mtx = ProblemInstance::random(size, size, field, seed).expect("random");
            let d = solver::discrete_opt(&mtx, solver::DEFAULT_STARTS, seed).expect("discrete").value;
            let a = solver::relaxation_opt(&mtx, solver::DEFAULT_ITERS, solver::DEFAULT_STARTS, seed).expect("relax");
            let s = solver::verify_corollary_with(&mtx, &a, d).expect("corollary");
            worst[fi] = worst[fi].max(s);
            if s > bound + 1e-9 {
                notes.push(format!("{field} seed {seed}: {s:.12} > {bound:.12}"));
            }
        }
    }
    let mut v = Verdict::new(
        notes.is_empty(),
        format!(
            "real max |sum M~ arcsin<x,y>| = {:.6} <= pi/2, complex max |sum M~ H(<x,y>)| = {:.6} <= 1 (100 each)",
            worst[0], worst[1]
        ),
    );
    v.notes = notes;
    v
}

fn determinism() -> Verdict {
    let run = |threads: &str| {
        let out = gk_bin()
            .env("GK_THREADS", threads)
            .args(["verify", "all", "--no-timestamp", "--seed", "42"])
            .output()
            .expect("gk runs");
        (out.status.code(), out.stdout)
    };
    let t = Instant::now();
    let (ca, a) = run("1");
    let (cb, b) = run("0");
    let same = a == b && ca == cb && !a.is_empty();
    Verdict::new(
        same,
        format!(
            "two `verify all` runs (1 thread vs all cores): {} bytes, identical = {same}, exit {:?}, {:.1}s",
            a.len(),
            ca,
            t.elapsed().as_secs_f64()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("constants reproduction", constants_reproduction),
        ("coefficient reproduction", coefficient_reproduction),
        ("x0 certificate", x0_certificate),
        ("sign-product Monte Carlo", lemma21_monte_carlo),
        ("rounding-ratio law", rounding_ratio_law),
        ("sandwich property", sandwich_property),
        ("section-5 suite", section5_suite),
        ("normalized arcsin / H bound", corollary_property),
        ("determinism", determinism),
    ];
    // warm the constant caches outside the timed criteria except the first,
    // which runs in its own process
    let _ = ConstantsReport::compute(series::DEFAULT_ORDER);
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = f();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {} {tag} {name}: {} [{:.1}s]", i + 1, v.detail, t.elapsed().as_secs_f64());
        if !v.pass {
            failed += 1;
            for n in &v.notes {
                println!("    {n}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
