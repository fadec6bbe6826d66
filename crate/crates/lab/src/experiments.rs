//! Curve-arithmetic experiments on how the spectrum of the weight shapes
//! weighted GMRES convergence.

use gmres_forge_core::curves::{curve_to_g, g_to_curve, normalize_curve, ConvergenceCurve, ResidualDecreaseVector};
use gmres_forge_core::forge::triangular_with_singular_values;
use gmres_forge_core::numkernel::real_vector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::table::CurveTable;

/// Decades per iteration of the log-linear reference curve.
pub const LOGLINEAR_RATE: f64 = 0.25;
/// Relative drop below which an iteration counts as stagnating.
pub const STAGNATION_DROP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Stagnation,
    Loglinear,
    Irregular,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSpec {
    Clusters { values: Vec<f64>, multiplicities: Vec<usize> },
    /// `n` values equally spaced in log scale between the bounds.
    LogUniform { low: f64, high: f64 },
}

impl SpectrumSpec {
    pub fn values(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            SpectrumSpec::Clusters { values, multiplicities } => {
                if values.len() != multiplicities.len() {
                    return Err(LabError::Config("one multiplicity per eigenvalue".into()));
                }
                if multiplicities.iter().sum::<usize>() != n {
                    return Err(LabError::Config(format!("multiplicities must sum to n = {n}")));
                }
                if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    return Err(LabError::Config("weight eigenvalues must be positive".into()));
                }
                Ok(values
                    .iter()
                    .zip(multiplicities)
                    .flat_map(|(&v, &k)| std::iter::repeat_n(v, k))
                    .collect())
            }
            SpectrumSpec::LogUniform { low, high } => {
                if !(*low > 0.0 && *high >= *low && high.is_finite()) {
                    return Err(LabError::Config("log-uniform bounds must satisfy 0 < low ≤ high".into()));
                }
                let (a, b) = (low.log10(), high.log10());
                Ok((0..n)
                    .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
                    .collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: u8,
    pub n: usize,
    /// Multiplicity of the large eigenvalue (experiment 1).
    pub k: usize,
    pub seed: u64,
    pub samples: usize,
    pub curve: CurveKind,
    pub spectrum: Option<SpectrumSpec>,
    pub epsilon: f64,
    pub p: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: u8) -> Self {
        let n = if experiment == 5 { 60 } else { 20 };
        ExperimentConfig {
            experiment,
            n,
            k: 8,
            seed: 0,
            samples: 5,
            curve: if experiment == 4 { CurveKind::Loglinear } else { CurveKind::Stagnation },
            spectrum: None,
            epsilon: 1e-2,
            p: None,
        }
    }

    /// Spectrum of the weight for experiments 1 to 3.
    pub fn weight_spectrum(&self) -> Result<Vec<f64>> {
        if let Some(spec) = &self.spectrum {
            return spec.values(self.n);
        }
        let n = self.n;
        let spec = match self.experiment {
            1 => {
                if self.k > n {
                    return Err(LabError::Config(format!("k = {} exceeds n = {n}", self.k)));
                }
                SpectrumSpec::Clusters {
                    values: vec![1.0, 1e12],
                    multiplicities: vec![n - self.k, self.k],
                }
            }
            2 => {
                if n < 11 {
                    return Err(LabError::Config("experiment 2 needs n ≥ 11".into()));
                }
                SpectrumSpec::Clusters {
                    values: vec![1.0, 1e10, 1e20],
                    multiplicities: vec![n - 11, 7, 4],
                }
            }
            3 => SpectrumSpec::LogUniform { low: 1.0, high: 1e12 },
            e => return Err(LabError::Config(format!("experiment {e} has no weight spectrum"))),
        };
        spec.values(n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.experiment) {
            return Err(LabError::Config(format!("unknown experiment {}", self.experiment)));
        }
        if self.n < 2 {
            return Err(LabError::Config("n must be at least 2".into()));
        }
        if self.samples == 0 {
            return Err(LabError::Config("sample count must be at least 1".into()));
        }
        match self.experiment {
            4 if !self.n.is_multiple_of(2) => Err(LabError::Config("experiment 4 needs an even n".into())),
            5 => {
                if !(self.epsilon > 0.0) {
                    return Err(LabError::Config("epsilon must be positive".into()));
                }
                if self.p.unwrap_or(self.n / 2) > self.n {
                    return Err(LabError::Config("p exceeds n".into()));
                }
                Ok(())
            }
            4 => Ok(()),
            _ => self.weight_spectrum().map(|_| ()),
        }
    }
}

/// Reference I-GMRES curve of length n.
pub fn reference_curve(kind: CurveKind, n: usize, seed: u64) -> Result<ConvergenceCurve> {
    let mut r: Vec<f64> = match kind {
        CurveKind::Stagnation => vec![1.0; n],
        CurveKind::Loglinear => (0..n).map(|k| 10f64.powf(-LOGLINEAR_RATE * k as f64)).collect(),
        CurveKind::Irregular => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::MAX);
            let mut log_r = 0.0;
            let mut r = vec![1.0];
            for _ in 1..n {
                log_r -= 10f64.powf(rng.random_range(-3.0..0.0));
                r.push(10f64.powf(log_r));
            }
            r
        }
    };
    r.push(0.0);
    Ok(ConvergenceCurve::new(r)?)
}

fn sample_rng(seed: u64, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample as u64);
    rng
}

fn weighted_curve(g_tilde: Vec<f64>) -> Result<Vec<f64>> {
    let gt = ResidualDecreaseVector::new(g_tilde.into_iter().map(f64::abs).collect())?;
    Ok(normalize_curve(&g_to_curve(&gt)?)?.values().to_vec())
}

/// Per-iteration drop of the weighted curve relative to the reference,
/// `(r̃_{i−1}/r̃_i)/(r_{i−1}/r_i)` for `i = 1, …, n−1`.
pub fn excess_drops(reference: &[f64], weighted: &[f64]) -> Vec<f64> {
    let n = reference.len().min(weighted.len()) - 1;
    (1..n)
        .map(|i| (weighted[i - 1] / weighted[i]) / (reference[i - 1] / reference[i]))
        .collect()
}

/// Iterations (1-based, ascending) of the `count` largest excess drops.
pub fn jump_locations(reference: &[f64], weighted: &[f64], count: usize) -> Vec<usize> {
    let drops = excess_drops(reference, weighted);
    let mut idx: Vec<usize> = (0..drops.len()).collect();
    idx.sort_by(|&a, &b| drops[b].total_cmp(&drops[a]).then(a.cmp(&b)));
    let mut out: Vec<usize> = idx.into_iter().take(count).map(|i| i + 1).collect();
    out.sort_unstable();
    out
}

/// Largest ratio between the normalized reference and weighted curves,
/// `max_k (r_k/r_0)/(r̃_k/r̃_0)` over iterations before breakdown.
pub fn jump_magnitude(reference: &[f64], weighted: &[f64]) -> f64 {
    let n = reference.len().min(weighted.len()) - 1;
    (0..n)
        .map(|k| (reference[k] / reference[0]) / (weighted[k] / weighted[0]))
        .fold(0.0, f64::max)
}

/// Leading iterations whose relative drop is below [`STAGNATION_DROP`].
pub fn stagnation_length(curve: &[f64]) -> usize {
    (1..curve.len())
        .take_while(|&i| 1.0 - curve[i] / curve[i - 1] < STAGNATION_DROP)
        .count()
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleSummary {
    pub label: String,
    pub jump_locations: Vec<usize>,
    pub jump_magnitude: f64,
    pub stagnation_length: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub weight_condition: Option<f64>,
    pub samples: Vec<SampleSummary>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub table: CurveTable,
    pub report: ExperimentReport,
}

fn summarize(table: &CurveTable, jumps: usize) -> Vec<SampleSummary> {
    let reference = &table.columns[0];
    table
        .labels
        .iter()
        .zip(&table.columns)
        .skip(1)
        .map(|(label, col)| SampleSummary {
            label: label.clone(),
            jump_locations: jump_locations(reference, col, jumps),
            jump_magnitude: jump_magnitude(reference, col),
            stagnation_length: stagnation_length(col),
        })
        .collect()
}

/// Experiments 1 to 3: random triangular `T⁻¹` with singular values `√μ`
/// applied to the reference decreases.
pub fn run_experiment_123(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if !(1..=3).contains(&cfg.experiment) {
        return Err(LabError::Config("expected experiment 1, 2 or 3".into()));
    }
    let mu = cfg.weight_spectrum()?;
    let sqrt_mu: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
    let reference = reference_curve(cfg.curve, cfg.n, cfg.seed)?;
    let g = real_vector(curve_to_g(&reference).values());
    let mut table = CurveTable::new();
    table.push("i_gmres", reference.values().to_vec());
    for s in 0..cfg.samples {
        let mut rng = sample_rng(cfg.seed, s);
        let t_inv = triangular_with_singular_values(&sqrt_mu, &mut rng)?;
        let g_tilde: Vec<f64> = (t_inv * &g).iter().map(|z| z.re).collect();
        table.push(format!("sample_{s}"), weighted_curve(g_tilde)?);
    }
    let jumps = if cfg.experiment == 2 { 2 } else { 1 };
    let (lo, hi) = mu.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &m| (a.min(m), b.max(m)));
    Ok(ExperimentOutput {
        report: ExperimentReport {
            config: cfg.clone(),
            weight_condition: Some(hi / lo),
            samples: summarize(&table, jumps),
        },
        table,
    })
}

/// `μ̲^k = [1 (k), 10¹² (n/2), 1 (n/2−k)]`
pub fn mu_low(n: usize, k: usize) -> Vec<f64> {
    let h = n / 2;
    (0..n).map(|i| if i >= k && i < k + h { 1e12 } else { 1.0 }).collect()
}

/// `μ̄^k = [10¹² (k), 1 (n/2), 10¹² (n/2−k)]`
pub fn mu_high(n: usize, k: usize) -> Vec<f64> {
    let h = n / 2;
    (0..n).map(|i| if i >= k && i < k + h { 1.0 } else { 1e12 }).collect()
}

/// Experiment 4: diagonal `T⁻¹ = diag(√μ)` for every `μ̲^k` and `μ̄^k`.
pub fn run_experiment_4(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if cfg.experiment != 4 {
        return Err(LabError::Config("expected experiment 4".into()));
    }
    let n = cfg.n;
    let reference = reference_curve(cfg.curve, n, cfg.seed)?;
    let g = curve_to_g(&reference);
    let mut table = CurveTable::new();
    table.push("i_gmres", reference.values().to_vec());
    let apply = |mu: &[f64]| -> Result<Vec<f64>> {
        weighted_curve(g.values().iter().zip(mu).map(|(gi, m)| gi * m.sqrt()).collect())
    };
    for k in 0..=n / 2 {
        table.push(format!("mu_low_{k}"), apply(&mu_low(n, k))?);
    }
    for k in 0..=n / 2 {
        table.push(format!("mu_high_{k}"), apply(&mu_high(n, k))?);
    }
    Ok(ExperimentOutput {
        report: ExperimentReport {
            config: cfg.clone(),
            weight_condition: Some(1e12),
            samples: summarize(&table, 1),
        },
        table,
    })
}

/// The three weight spectra of experiment 5: `μ¹`, `μ²` and a seeded
/// shuffle `μ³` of `μ¹`.
pub fn experiment5_spectra(n: usize, p: usize, epsilon: f64, seed: u64) -> [Vec<f64>; 3] {
    let mu1: Vec<f64> = (0..n).map(|i| if i < p { 1.0 } else { epsilon }).collect();
    let mu2: Vec<f64> = (0..n).map(|i| if i < p { epsilon } else { 1.0 }).collect();
    let mut mu3 = mu1.clone();
    mu3.shuffle(&mut sample_rng(seed, 0));
    [mu1, mu2, mu3]
}

/// Experiment 5: residuals from the decreases `g_i = 1/√n` and
/// `g̃_i = √(βμ_i/n)` with `β = n/Σμ`.
pub fn run_experiment_5(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if cfg.experiment != 5 {
        return Err(LabError::Config("expected experiment 5".into()));
    }
    let n = cfg.n;
    let p = cfg.p.unwrap_or(n / 2);
    let nf = n as f64;
    let mut table = CurveTable::new();
    let g = ResidualDecreaseVector::new(vec![1.0 / nf.sqrt(); n])?;
    table.push("i_gmres", g_to_curve(&g)?.values().to_vec());
    for (label, mu) in ["mu1", "mu2", "mu3"].iter().zip(experiment5_spectra(n, p, cfg.epsilon, cfg.seed)) {
        let beta = nf / mu.iter().sum::<f64>();
        let gt: Vec<f64> = mu.iter().map(|m| (beta * m / nf).sqrt()).collect();
        table.push(*label, g_to_curve(&ResidualDecreaseVector::new(gt)?)?.values().to_vec());
    }
    Ok(ExperimentOutput {
        report: ExperimentReport {
            config: cfg.clone(),
            weight_condition: Some(1.0 / cfg.epsilon),
            samples: summarize(&table, 1),
        },
        table,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.experiment {
        1..=3 => run_experiment_123(cfg),
        4 => run_experiment_4(cfg),
        5 => run_experiment_5(cfg),
        e => Err(LabError::Config(format!("unknown experiment {e}"))),
    }
}
