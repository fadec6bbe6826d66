//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Criterion 15 needs the HB/mcfe matrix; point `GMRES_FORGE_MCFE` at the
//! Matrix Market file or place it at `tests/data/mcfe.mtx`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use gmres_forge_core::analysis::{
    extract_link, ipsen_leading_entry, ipsen_residual_norm, lookahead_bounds, necessary_conditions,
    residual_sandwich,
};
use gmres_forge_core::curves::{curve_deviation, curve_to_g, g_to_curve, ConvergenceCurve, ResidualDecreaseVector};
use gmres_forge_core::forge::{
    gps_system, left_right_pair, link_for_curves, link_with_singular_values, simultaneous_system,
    split_preconditioner, swap_left_right, two_by_two_link, weight_for_curve, LinkMatrix, TwoByTwo,
};
use gmres_forge_core::krylov::{mgmres, preconditioned_gmres, GmresOptions, GmresTrace, WeightMatrix};
use gmres_forge_core::numkernel::{
    c, diag_real, general_eig, haar_unitary_with, singular_values, spectrum_distance, Matrix, Vector, C64,
};
use gmres_forge_lab::experiments::{run_experiment, ExperimentConfig};
use gmres_forge_lab::mtx::read_matrix_market;
use gmres_forge_lab::precond::{build_preconditioner, precond_study, PreconditionerKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type BoxError = Box<dyn std::error::Error>;

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(passed: bool, detail: String) -> Self {
        Outcome {
            status: if passed { Status::Pass } else { Status::Fail },
            detail,
        }
    }
}

type Criterion = fn() -> Result<Outcome, BoxError>;

// ---------------------------------------------------------------- helpers

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..=hi.log10()))
}

fn random_decrease(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> ResidualDecreaseVector {
    ResidualDecreaseVector::new((0..n).map(|_| log_uniform(rng, lo, hi)).collect()).unwrap()
}

/// Moduli log-uniform in [0.1, 10]; real spectra get random signs.
fn random_spectrum(rng: &mut ChaCha8Rng, n: usize, real: bool) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let r = log_uniform(rng, 0.1, 10.0);
            if real {
                c(if rng.random_bool(0.5) { r } else { -r })
            } else {
                C64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
            }
        })
        .collect()
}

fn uniform_matrix(rng: &mut ChaCha8Rng, n: usize, real: bool) -> Matrix {
    Matrix::from_fn(n, n, |_, _| {
        let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
        C64::new(rng.random_range(-1.0..1.0), im)
    })
}

fn uniform_vector(rng: &mut ChaCha8Rng, n: usize, real: bool) -> Vector {
    Vector::from_fn(n, |_, _| {
        let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
        C64::new(rng.random_range(-1.0..1.0), im)
    })
}

/// Spectrum contains 1 and `kappa`, the rest log-uniform between them.
fn random_weight(rng: &mut ChaCha8Rng, n: usize, kappa: f64, real: bool) -> WeightMatrix {
    let mut mu: Vec<f64> = (0..n).map(|_| log_uniform(rng, 1.0, kappa)).collect();
    mu[0] = 1.0;
    if n > 1 {
        mu[1] = kappa;
    }
    let q = haar_unitary_with(n, rng, real);
    WeightMatrix::from_eigen(&q, &mu).unwrap()
}

/// `U diag(s) V*` with `s` spanning exactly [1, kappa].
fn random_conditioned(rng: &mut ChaCha8Rng, n: usize, kappa: f64, real: bool) -> Matrix {
    let mut s: Vec<f64> = (0..n).map(|_| log_uniform(rng, 1.0, kappa)).collect();
    s[0] = 1.0;
    if n > 1 {
        s[1] = kappa;
    }
    let u = haar_unitary_with(n, rng, real);
    let v = haar_unitary_with(n, rng, real);
    u * diag_real(&s) * v.adjoint()
}

fn full() -> GmresOptions {
    GmresOptions::full()
}

fn identity_trace(a: &Matrix, b: &Vector) -> Result<GmresTrace, BoxError> {
    Ok(mgmres(a, b, &WeightMatrix::identity(b.len()), &GmresOptions::default())?)
}

fn curve_of(g: &ResidualDecreaseVector) -> Vec<f64> {
    g_to_curve(g).unwrap().values().to_vec()
}

fn eigenvalues_of(a: &Matrix) -> Result<Vec<C64>, BoxError> {
    Ok(general_eig(a)?)
}

fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

// ------------------------------------------------------------- criteria

fn curve_round_trip() -> Result<Outcome, BoxError> {
    let start = Instant::now();
    let mut rng = rng(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = rng.random_range(1..=200);
        let mut r = Vec::with_capacity(m + 1);
        let mut v = log_uniform(&mut rng, 1e-3, 1e3);
        r.push(v);
        for _ in 1..m {
            if !rng.random_bool(0.2) {
                v *= log_uniform(&mut rng, 0.1, 1.0);
            }
            r.push(v);
        }
        r.push(0.0);
        let curve = ConvergenceCurve::new(r)?;
        let back = g_to_curve(&curve_to_g(&curve))?;
        worst = worst.max(curve_deviation(back.values(), curve.values()));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome::check(
        worst <= 1e-14 && secs < 1.0,
        format!("1000 curves, max relative deviation {} (tol 1e-14), {secs:.3} s (limit 1 s)", sci(worst)),
    ))
}

fn prescribed_system() -> Result<Outcome, BoxError> {
    let start = Instant::now();
    let mut rng = rng(102);
    let n = 20;
    let (mut worst_curve, mut worst_eig) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let g = random_decrease(&mut rng, n, 1e-2, 1.0);
        let lambda = random_spectrum(&mut rng, n, i % 2 == 0);
        let inst = gps_system(&g, &lambda, None, i)?;
        let trace = identity_trace(&inst.a, &inst.b)?;
        worst_curve = worst_curve.max(curve_deviation(&trace.residual_norms, &curve_of(&g)));
        worst_eig = worst_eig.max(spectrum_distance(&eigenvalues_of(&inst.a)?, &lambda));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome::check(
        worst_curve <= 1e-8 && worst_eig <= 1e-8 && secs < 10.0,
        format!(
            "50 systems at n = 20, curve deviation {} (tol 1e-8), eigenvalue distance {} (tol 1e-8), {secs:.2} s (limit 10 s)",
            sci(worst_curve),
            sci(worst_eig)
        ),
    ))
}

fn weight_for_prescribed_curve() -> Result<Outcome, BoxError> {
    let start = Instant::now();
    let mut rng = rng(103);
    let n = 20;
    let mut worst = 0.0f64;
    let mut worst_kappa = 0.0f64;
    let mut accepted = 0;
    let mut seed = 0;
    while accepted < 50 {
        seed += 1;
        let g = random_decrease(&mut rng, n, 1e-2, 1.0);
        let g_tilde = ResidualDecreaseVector::new(
            g.values().iter().map(|v| v * log_uniform(&mut rng, 1e-2, 1e2)).collect(),
        )?;
        if link_for_curves(&g, &g_tilde)?.condition().powi(2) > 1e8 {
            continue;
        }
        let lambda = random_spectrum(&mut rng, n, seed % 2 == 0);
        let inst = gps_system(&g, &lambda, None, seed)?;
        let wc = weight_for_curve(&inst.a, &inst.b, &g_tilde)?;
        worst_kappa = worst_kappa.max(wc.weight.condition());
        let trace = mgmres(&inst.a, &inst.b, &wc.weight, &GmresOptions::default())?;
        worst = worst.max(curve_deviation(&trace.residual_norms, &curve_of(&g_tilde)));
        accepted += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome::check(
        worst <= 1e-7 && worst_kappa <= 1e8 * (1.0 + 1e-6) && secs < 20.0,
        format!(
            "50 targets, max kappa(M) {}, curve deviation {} (tol 1e-7), {secs:.2} s (limit 20 s)",
            sci(worst_kappa),
            sci(worst)
        ),
    ))
}

/// Trace condition `a² + b² + d² − σ₁² − σ₂²` of the upper triangular 2×2
/// link with `det = σ₁σ₂` and `g = Tğ`.
fn trace_gap(g: [f64; 2], h: [f64; 2], s1: f64, s2: f64) -> f64 {
    let d = g[1] / h[1];
    let a = s1 * s2 / d;
    let b = (g[0] - a * h[0]) / h[1];
    a * a + b * b + d * d - s1 * s1 - s2 * s2
}

/// Scan on a log grid for the first sign change of the trace gap in `σ₁`,
/// then bisect to machine precision.
fn scan_sigma1(g: [f64; 2], h: [f64; 2], s2: f64) -> Option<f64> {
    let lo = (g[1] / h[1]).abs();
    let grid: Vec<f64> = (0..=400).map(|i| lo * 10f64.powf(i as f64 * 0.02)).collect();
    let f = |s: f64| trace_gap(g, h, s, s2);
    let (mut a, mut b) = grid.windows(2).map(|w| (w[0], w[1])).find(|&(x, y)| f(x) >= 0.0 && f(y) < 0.0)?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) >= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some(if f(a).abs() <= f(b).abs() { a } else { b })
}

fn two_by_two_simultaneous() -> Result<Outcome, BoxError> {
    let mut rng = rng(104);
    let (mut worst_curve, mut worst_sigma) = (0.0f64, 0.0f64);
    let mut found = 0;
    let mut attempts = 0;
    while found < 200 {
        attempts += 1;
        if attempts > 10_000 {
            return Ok(Outcome::check(false, format!("scan found only {found} feasible triples")));
        }
        let g = [log_uniform(&mut rng, 0.1, 1.0), log_uniform(&mut rng, 0.1, 1.0)];
        let h = [log_uniform(&mut rng, 0.1, 1.0), log_uniform(&mut rng, 0.1, 1.0)];
        let s2 = g[1] / h[0].hypot(h[1]) * rng.random_range(0.05..0.95);
        let Some(s1) = scan_sigma1(g, h, s2) else { continue };
        let TwoByTwo::Feasible(_) = two_by_two_link(g, h, [s1, s2])? else { continue };
        found += 1;

        let mu = [1.0 / (s1 * s1), 1.0 / (s2 * s2)];
        let real = found % 2 == 0;
        let q = haar_unitary_with(2, &mut rng, real);
        let weight = WeightMatrix::from_eigen(&q, &mu)?;
        let gv = ResidualDecreaseVector::new(g.to_vec())?;
        let hv = ResidualDecreaseVector::new(h.to_vec())?;
        let lambda = random_spectrum(&mut rng, 2, real);
        let inst = simultaneous_system(&gv, &hv, &weight, &lambda, None, found)?;
        let ti = identity_trace(&inst.a, &inst.b)?;
        let tm = mgmres(&inst.a, &inst.b, &weight, &GmresOptions::default())?;
        worst_curve = worst_curve
            .max(curve_deviation(&ti.residual_norms, &curve_of(&gv)))
            .max(curve_deviation(&tm.residual_norms, &curve_of(&hv)));

        let link = link_with_singular_values(&[s1, s2], Some(&gv), Some(&hv), found)?;
        let sv = singular_values(link.matrix())?;
        let mut expect: Vec<f64> = mu.iter().map(|m| 1.0 / m.sqrt()).collect();
        expect.sort_by(|a, b| b.total_cmp(a));
        for (x, y) in sv.iter().zip(&expect) {
            worst_sigma = worst_sigma.max((x - y).abs() / y);
        }
    }
    Ok(Outcome::check(
        worst_curve <= 1e-8 && worst_sigma <= 1e-10,
        format!(
            "200 feasible triples ({attempts} draws), curve deviation {} (tol 1e-8), singular value deviation {} (tol 1e-10)",
            sci(worst_curve),
            sci(worst_sigma)
        ),
    ))
}

struct WeightedInstance {
    weight: WeightMatrix,
    trace_i: GmresTrace,
    trace_m: GmresTrace,
}

fn weighted_instances() -> Result<Vec<WeightedInstance>, BoxError> {
    let mut rng = rng(105);
    let mut out = Vec::with_capacity(100);
    for i in 0..100 {
        let n = rng.random_range(2..=30);
        let real = i % 2 == 0;
        let kappa = log_uniform(&mut rng, 1.0, 1e6);
        let a = uniform_matrix(&mut rng, n, real);
        let b = uniform_vector(&mut rng, n, real);
        let weight = random_weight(&mut rng, n, kappa, real);
        let trace_i = mgmres(&a, &b, &WeightMatrix::identity(n), &full())?;
        let trace_m = mgmres(&a, &b, &weight, &full())?;
        out.push(WeightedInstance {
            weight,
            trace_i,
            trace_m,
        });
    }
    Ok(out)
}

fn lookahead() -> Result<Outcome, BoxError> {
    let (mut steps, mut bound_fail, mut interlace_fail) = (0, 0, 0);
    for inst in weighted_instances()? {
        let t = extract_link(&inst.trace_i, &inst.trace_m)?;
        let report = lookahead_bounds(&t, &inst.trace_i, &inst.trace_m)?;
        steps += report.satisfied.len();
        bound_fail += report.satisfied.iter().filter(|s| !**s).count();
        // Containment of the trailing-block singular values, 1e-12 slack.
        let sv = t.singular_values();
        let (smax, smin) = (sv[0], sv[sv.len() - 1]);
        for (lo, hi) in report.block_sigma_min.iter().zip(&report.block_sigma_max) {
            if *lo < smin - 1e-12 * smax || *hi > smax + 1e-12 * smax {
                interlace_fail += 1;
            }
        }
    }
    Ok(Outcome::check(
        bound_fail == 0 && interlace_fail == 0,
        format!("100 instances, {steps} iterations, {bound_fail} bound violations, {interlace_fail} interlacing violations"),
    ))
}

fn sandwich() -> Result<Outcome, BoxError> {
    let (mut steps, mut chain_fail, mut norm_fail) = (0, 0, 0);
    for inst in weighted_instances()? {
        let report = residual_sandwich(&inst.trace_i, &inst.trace_m, &inst.weight)?;
        steps += report.chain_holds.len();
        chain_fail += report.chain_holds.iter().filter(|h| !**h).count();
        norm_fail += report.normalized_holds.iter().filter(|h| !**h).count();
    }
    Ok(Outcome::check(
        chain_fail == 0 && norm_fail == 0,
        format!("100 instances, {steps} iterations, {chain_fail} sandwich violations, {norm_fail} normalized-residual violations"),
    ))
}

fn ipsen() -> Result<Outcome, BoxError> {
    let mut rng = rng(107);
    let (mut worst_norm, mut worst_entry) = (0.0f64, 0.0f64);
    let mut count = 0;
    for i in 0..40 {
        let n = rng.random_range(5..=25);
        let real = i % 2 == 0;
        let a = uniform_matrix(&mut rng, n, real) + Matrix::identity(n, n).scale(2.0);
        let b = uniform_vector(&mut rng, n, real);
        let kappa = log_uniform(&mut rng, 1.0, 1e4);
        let weight = random_weight(&mut rng, n, kappa, real);
        let ti = mgmres(&a, &b, &WeightMatrix::identity(n), &GmresOptions::default())?;
        let tm = mgmres(&a, &b, &weight, &GmresOptions::default())?;
        let m = ti.length();
        for k in 1..m.min(21) {
            let basis = ti.basis.columns(0, k).clone_owned();
            let expect = tm.residual_norms[k];
            let norm = ipsen_residual_norm(&basis, &b, &weight)?;
            let entry = ipsen_leading_entry(&basis, &b, &weight)?;
            worst_norm = worst_norm.max((norm - expect).abs() / expect);
            worst_entry = worst_entry.max((entry - expect).abs() / expect);
            count += 1;
        }
    }
    Ok(Outcome::check(
        worst_norm <= 1e-8 && worst_entry <= 1e-8,
        format!(
            "{count} (instance, k ≤ 20) pairs, residual formula {} and (1,1)-entry {} relative (tol 1e-8)",
            sci(worst_norm),
            sci(worst_entry)
        ),
    ))
}

fn necessary() -> Result<Outcome, BoxError> {
    let mut rng = rng(108);
    let mut links: Vec<(LinkMatrix, ResidualDecreaseVector, ResidualDecreaseVector)> = Vec::new();
    for _ in 0..40 {
        let n = rng.random_range(2..=20);
        let g = random_decrease(&mut rng, n, 1e-2, 1.0);
        let mut h = random_decrease(&mut rng, n, 1e-2, 1.0).values().to_vec();
        // Some stagnating steps exercise the zero-entry cases.
        for (i, v) in h.iter_mut().enumerate().take(n - 1) {
            if i % 3 == 1 {
                *v = 0.0;
            }
        }
        let h = ResidualDecreaseVector::new(h)?;
        links.push((link_for_curves(&g, &h)?, g, h));
    }
    for seed in 0..40 {
        let n = rng.random_range(2..=20);
        let sigma: Vec<f64> = {
            let mut s: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-2, 1e2)).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            s
        };
        let t = link_with_singular_values(&sigma, None, None, seed)?;
        let h = random_decrease(&mut rng, n, 1e-2, 1.0);
        let tg = t.apply(&h);
        // Absorb signs so that g = |Tğ| is a valid decrease vector.
        let signs: Vec<C64> = tg.iter().map(|z| if z.re < 0.0 { c(-1.0) } else { c(1.0) }).collect();
        let d = Matrix::from_diagonal(&Vector::from_vec(signs));
        let g = ResidualDecreaseVector::new(tg.iter().map(|z| z.re.abs()).collect())?;
        links.push((LinkMatrix::new(d * t.matrix(), n)?, g, h));
    }
    let mut found = 0;
    while found < 40 {
        let g = [log_uniform(&mut rng, 0.1, 1.0), log_uniform(&mut rng, 0.1, 1.0)];
        let h = [log_uniform(&mut rng, 0.1, 1.0), log_uniform(&mut rng, 0.1, 1.0)];
        let s2 = g[1] / h[0].hypot(h[1]) * rng.random_range(0.05..0.95);
        let Some(s1) = scan_sigma1(g, h, s2) else { continue };
        if let TwoByTwo::Feasible(t) = two_by_two_link(g, h, [s1, s2])? {
            links.push((t, ResidualDecreaseVector::new(g.to_vec())?, ResidualDecreaseVector::new(h.to_vec())?));
            found += 1;
        }
    }

    let (mut failures, mut worst, mut worst_weyl) = (0, 0.0f64, 0.0f64);
    for (t, g, h) in &links {
        let sigma = singular_values(t.matrix())?;
        let report = necessary_conditions(t, g, h, &sigma)?;
        if !report.all_passed() {
            failures += 1;
        }
        worst = report.checks.iter().map(|c| c.residual).fold(worst, f64::max);
        // |det T| from the block form against the product of singular values.
        let log_xi: f64 = report.eigenvalues.iter().map(|z| z.norm().ln()).sum();
        let log_sigma: f64 = sigma.iter().map(|s| s.ln()).sum();
        worst_weyl = worst_weyl.max((log_xi - log_sigma).abs());
    }
    Ok(Outcome::check(
        failures == 0 && worst <= 1e-9 && worst_weyl <= 1e-9,
        format!(
            "{} links, {failures} failing, worst check residual {} (tol 1e-9), Weyl equality gap {} (tol 1e-9)",
            links.len(),
            sci(worst),
            sci(worst_weyl)
        ),
    ))
}

fn experiment_one() -> Result<Outcome, BoxError> {
    let start = Instant::now();
    let (mut at_k, mut above, mut within) = (0, 0, 0);
    let mut largest = 0.0f64;
    for seed in 0..100 {
        let mut cfg = ExperimentConfig::new(1);
        cfg.seed = seed;
        cfg.samples = 1;
        let out = run_experiment(&cfg)?;
        let s = &out.report.samples[0];
        if s.jump_locations == [cfg.k] {
            at_k += 1;
        }
        if s.jump_magnitude <= 1e6 {
            within += 1;
        }
        if s.jump_magnitude >= 1e5 {
            above += 1;
        }
        largest = largest.max(s.jump_magnitude);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome::check(
        at_k >= 95 && within == 100 && above >= 90 && secs < 5.0,
        format!(
            "jump at 8 in {at_k}/100 (need 95), magnitude ≤ 1e6 in {within}/100 (max {}), ≥ 1e5 in {above}/100 (need 90), {secs:.2} s (limit 5 s)",
            sci(largest)
        ),
    ))
}

fn experiment_two() -> Result<Outcome, BoxError> {
    let (mut located, mut within) = (0, 0);
    let mut largest = 0.0f64;
    for seed in 0..100 {
        let mut cfg = ExperimentConfig::new(2);
        cfg.seed = seed;
        cfg.samples = 1;
        let out = run_experiment(&cfg)?;
        let s = &out.report.samples[0];
        if s.jump_locations == [4, 11] {
            located += 1;
        }
        if s.jump_magnitude <= 1e10 {
            within += 1;
        }
        largest = largest.max(s.jump_magnitude);
    }
    Ok(Outcome::check(
        located >= 95 && within == 100,
        format!(
            "jumps at {{4, 11}} in {located}/100 (need 95), magnitude ≤ 1e10 in {within}/100 (max {})",
            sci(largest)
        ),
    ))
}

fn experiment_four() -> Result<Outcome, BoxError> {
    let cfg = ExperimentConfig::new(4);
    let n = cfg.n;
    let out = run_experiment(&cfg)?;
    let mut wrong = Vec::new();
    for k in 0..=n / 2 {
        let col = out.table.column(&format!("mu_low_{k}")).ok_or("missing column")?;
        let len = (1..col.len()).take_while(|&i| 1.0 - col[i] / col[i - 1] < 1e-6).count();
        if len != k {
            wrong.push((k, len));
        }
    }
    let high0 = out.table.column("mu_high_0").ok_or("missing column")?;
    let low_half = out.table.column(&format!("mu_low_{}", n / 2)).ok_or("missing column")?;
    let bitwise = high0.len() == low_half.len() && high0.iter().zip(low_half).all(|(a, b)| a.to_bits() == b.to_bits());
    Ok(Outcome::check(
        wrong.is_empty() && bitwise,
        format!("stagnation mismatches (k, length) {wrong:?}, upper k = 0 and lower k = n/2 bitwise equal: {bitwise}"),
    ))
}

fn experiment_five() -> Result<Outcome, BoxError> {
    let cfg = ExperimentConfig::new(5);
    let (n, eps) = (cfg.n, cfg.epsilon);
    let p = n / 2;
    let out = run_experiment(&cfg)?;
    // ‖r̃_i‖²_M = 1 − (β/n)·Σ_{j≤i} μ_j with β = n/S and S = Σμ, summed as the
    // remaining mass (Σ_{j>i} μ_j)/S so that the last entry is an exact zero.
    let closed = |first: f64, second: f64| -> Vec<f64> {
        let s = p as f64 * first + (n - p) as f64 * second;
        (0..=n)
            .map(|i| {
                let rest = if i <= p {
                    (p - i) as f64 * first + (n - p) as f64 * second
                } else {
                    (n - i) as f64 * second
                };
                (rest / s).sqrt()
            })
            .collect()
    };
    let mut worst = 0.0f64;
    for (label, expect) in [("mu1", closed(1.0, eps)), ("mu2", closed(eps, 1.0))] {
        let col = out.table.column(label).ok_or("missing column")?;
        if col.len() != expect.len() {
            return Ok(Outcome::check(false, format!("{label} has {} entries", col.len())));
        }
        worst = col.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    Ok(Outcome::check(
        worst <= 1e-12,
        format!("n = {n}, eps = {eps:e}, p = {p}, max absolute deviation {} (tol 1e-12)", sci(worst)),
    ))
}

/// Relative per-iteration deviation between two residual histories, ignoring
/// the final breakdown entry when both are at rounding level.
fn history_deviation(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let floor = 1e-13 * a[0].max(b[0]);
    a.iter()
        .zip(b)
        .filter(|(x, y)| x.max(**y) > floor)
        .map(|(x, y)| (x - y).abs() / x.max(*y))
        .fold(0.0, f64::max)
}

fn equivalences() -> Result<Outcome, BoxError> {
    let mut rng = rng(113);
    let (mut left_dev, mut right_dev, mut split_dev) = (0.0f64, 0.0f64, 0.0f64);
    let opts = GmresOptions::default();
    for i in 0..50 {
        let n = rng.random_range(2..=25);
        let real = i % 2 == 0;
        let a = uniform_matrix(&mut rng, n, real);
        let b = uniform_vector(&mut rng, n, real);
        let kappa = log_uniform(&mut rng, 1.0, 1e4);
        let h = random_conditioned(&mut rng, n, kappa, real);
        let ah = &a * &h;

        let left = preconditioned_gmres(&a, &b, Some(&h), None, &opts)?;
        let hh = h.adjoint() * &h;
        let weight = WeightMatrix::new((&hh + hh.adjoint()).scale(0.5))?;
        let reference = mgmres(&ah, &b, &weight, &opts)?;
        left_dev = left_dev.max(history_deviation(left.minimized_norms(), &reference.residual_norms));

        let right = preconditioned_gmres(&a, &b, None, Some(&h), &opts)?;
        let reference = identity_trace(&ah, &b)?;
        right_dev = right_dev.max(history_deviation(right.minimized_norms(), &reference.residual_norms));

        let m = random_weight(&mut rng, n, kappa, real);
        let (p_star, p_inv_star) = split_preconditioner(&m)?;
        let split = preconditioned_gmres(&a, &b, Some(&p_star), Some(&p_inv_star), &opts)?;
        let reference = mgmres(&a, &b, &m, &opts)?;
        split_dev = split_dev.max(history_deviation(split.minimized_norms(), &reference.residual_norms));
    }
    Ok(Outcome::check(
        left_dev <= 1e-9 && right_dev <= 1e-9 && split_dev <= 1e-9,
        format!(
            "50 instances, left {}, right {}, split {} relative (tol 1e-9)",
            sci(left_dev),
            sci(right_dev),
            sci(split_dev)
        ),
    ))
}

fn left_right() -> Result<Outcome, BoxError> {
    let mut rng = rng(114);
    let n = 15;
    let opts = GmresOptions::default();
    let (mut pair_curve, mut pair_eig, mut swap_curve, mut swap_eig) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for seed in 0..20 {
        let g_right = random_decrease(&mut rng, n, 1e-2, 1.0);
        let g_left = random_decrease(&mut rng, n, 1e-2, 1.0);
        let lambda = random_spectrum(&mut rng, n, seed % 2 == 0);
        let inst = left_right_pair(&g_right, &g_left, &lambda, seed)?;
        let h = inst.preconditioner.clone().ok_or("pair without preconditioner")?;
        let right = preconditioned_gmres(&inst.a, &inst.b, None, Some(&h), &opts)?;
        let left = preconditioned_gmres(&inst.a, &inst.b, Some(&h), None, &opts)?;
        pair_curve = pair_curve
            .max(curve_deviation(right.minimized_norms(), &curve_of(&g_right)))
            .max(curve_deviation(left.minimized_norms(), &curve_of(&g_left)));
        pair_eig = pair_eig.max(spectrum_distance(&eigenvalues_of(&(&inst.a * &h))?, &lambda));

        let swapped = swap_left_right(&inst.a, &inst.b, &h, seed + 1000)?;
        let hs = swapped.preconditioner.clone().ok_or("swap without preconditioner")?;
        let right_s = preconditioned_gmres(&swapped.a, &swapped.b, None, Some(&hs), &opts)?;
        let left_s = preconditioned_gmres(&swapped.a, &swapped.b, Some(&hs), None, &opts)?;
        swap_curve = swap_curve
            .max(curve_deviation(left_s.minimized_norms(), &curve_of(&g_right)))
            .max(curve_deviation(right_s.minimized_norms(), &curve_of(&g_left)));
        swap_eig = swap_eig.max(spectrum_distance(&eigenvalues_of(&(&swapped.a * &hs))?, &lambda));
    }
    Ok(Outcome::check(
        pair_curve <= 1e-7 && pair_eig <= 1e-8 && swap_curve <= 1e-7 && swap_eig <= 1e-8,
        format!(
            "20 prescriptions at n = 15, pair curves {} eig {}, swapped curves {} eig {} (tol 1e-7 / 1e-8)",
            sci(pair_curve),
            sci(pair_eig),
            sci(swap_curve),
            sci(swap_eig)
        ),
    ))
}

fn mcfe_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("GMRES_FORGE_MCFE") {
        return Some(PathBuf::from(p));
    }
    let local = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/mcfe.mtx");
    local.exists().then_some(local)
}

fn mcfe_study() -> Result<Outcome, BoxError> {
    let Some(path) = mcfe_path() else {
        return Ok(Outcome {
            status: Status::Skip,
            detail: "HB/mcfe not present (set GMRES_FORGE_MCFE)".into(),
        });
    };
    let a = read_matrix_market(&path)?;
    let h = build_preconditioner(&a, PreconditionerKind::SymPart, None)?;
    let study = precond_study(&a, &h, PreconditionerKind::SymPart, 0)?;
    let r = &study.report;
    let stalls = r.unpreconditioned_residual_at_n_minus_1 > 1e-8;
    let left = r.left_iterations_to_1e8.unwrap_or(usize::MAX);
    let right = r.right_iterations_to_1e8.unwrap_or(usize::MAX);
    let faster = left < right;
    let kappa_ha = (r.kappa_ha / 1e7).log10().abs() <= 1.0;
    let kappa_ah = (r.kappa_ah / 1e6).log10().abs() <= 1.0;
    let h_ilu = build_preconditioner(&a, PreconditionerKind::Ilu0, None)?;
    let ilu = precond_study(&a, &h_ilu, PreconditionerKind::Ilu0, 0)?;
    let ilu_fast = [ilu.report.left_iterations_to_1e8, ilu.report.right_iterations_to_1e8]
        .iter()
        .all(|it| it.is_some_and(|k| k <= 30));
    Ok(Outcome::check(
        stalls && faster && kappa_ha && kappa_ah && ilu_fast,
        format!(
            "n = {}, unpreconditioned at n-1 {}, left/right to 1e-8 {:?}/{:?}, kappa(HA) {}, kappa(AH) {}, ilu0 left/right {:?}/{:?}",
            r.n,
            sci(r.unpreconditioned_residual_at_n_minus_1),
            r.left_iterations_to_1e8,
            r.right_iterations_to_1e8,
            sci(r.kappa_ha),
            sci(r.kappa_ah),
            ilu.report.left_iterations_to_1e8,
            ilu.report.right_iterations_to_1e8
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 15] = [
        ("curve round trip", curve_round_trip),
        ("prescribed curve and spectrum", prescribed_system),
        ("weight for a prescribed curve", weight_for_prescribed_curve),
        ("simultaneous curves at n = 2", two_by_two_simultaneous),
        ("look-ahead bounds and interlacing", lookahead),
        ("residual sandwich and normalized residuals", sandwich),
        ("Ipsen identities", ipsen),
        ("necessary conditions on links", necessary),
        ("experiment 1 jumps", experiment_one),
        ("experiment 2 jumps", experiment_two),
        ("experiment 4 stagnation", experiment_four),
        ("experiment 5 closed forms", experiment_five),
        ("preconditioning equivalences", equivalences),
        ("left/right pair and swap", left_right),
        ("HB/mcfe study", mcfe_study),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome::check(false, format!("error: {e}")));
        let label = match outcome.status {
            Status::Pass => "PASS",
            Status::Skip => "SKIP",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
        };
        println!(
            "criterion {:>2} {label}: {name}: {} [{:.2} s]",
            i + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        println!("acceptance: all criteria passed or skipped");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
