//! JSON prescriptions for the forge constructions and their outputs.

use std::path::{Path, PathBuf};

use gmres_forge_core::analysis::{verify_instance, InstanceReport};
use gmres_forge_core::curves::{curve_to_g, ConvergenceCurve, ResidualDecreaseVector};
use gmres_forge_core::forge::{
    gps_system, left_right_pair, swap_left_right, weight_for_curve, Construction, ForgedInstance,
};
use gmres_forge_core::numkernel::{Matrix, C64};
use serde::Deserialize;

use crate::error::{LabError, Result};
use crate::table::CurveTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ForgeKind {
    System,
    Weight,
    Pair,
    Swap,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
enum Eigenvalue {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Eigenvalue> for C64 {
    fn from(e: Eigenvalue) -> C64 {
        match e {
            Eigenvalue::Real(re) => C64::new(re, 0.0),
            Eigenvalue::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSpec {
    g: Option<Vec<f64>>,
    curve: Option<Vec<f64>>,
    lambda: Vec<Eigenvalue>,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightSpec {
    g: Option<Vec<f64>>,
    curve: Option<Vec<f64>>,
    g_tilde: Option<Vec<f64>>,
    curve_tilde: Option<Vec<f64>>,
    lambda: Vec<Eigenvalue>,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairSpec {
    g_right: Option<Vec<f64>>,
    curve_right: Option<Vec<f64>>,
    g_left: Option<Vec<f64>>,
    curve_left: Option<Vec<f64>>,
    lambda: Vec<Eigenvalue>,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SwapSpec {
    bundle: PathBuf,
    #[serde(default)]
    seed: u64,
}

/// Decrease vector of dimension `n` from either a `g` or a curve field.
fn decrease(g: Option<Vec<f64>>, curve: Option<Vec<f64>>, n: usize, what: &str) -> Result<ResidualDecreaseVector> {
    let g = match (g, curve) {
        (Some(g), None) => ResidualDecreaseVector::new(g)?,
        (None, Some(r)) => curve_to_g(&ConvergenceCurve::new(r)?),
        _ => {
            return Err(LabError::Config(format!(
                "give exactly one of `g{what}` and `curve{what}`"
            )))
        }
    };
    Ok(g.with_dim(n)?)
}

fn spectrum(lambda: Vec<Eigenvalue>) -> Result<Vec<C64>> {
    if lambda.is_empty() {
        return Err(LabError::Config("`lambda` must not be empty".into()));
    }
    Ok(lambda.into_iter().map(C64::from).collect())
}

pub struct ForgeOutput {
    pub instance: ForgedInstance,
    pub report: InstanceReport,
    pub table: CurveTable,
}

fn finish(instance: ForgedInstance) -> Result<ForgeOutput> {
    let report = verify_instance(&instance)?;
    let table = report_table(&report);
    Ok(ForgeOutput {
        instance,
        report,
        table,
    })
}

pub fn report_table(report: &InstanceReport) -> CurveTable {
    let mut table = CurveTable::new();
    for c in &report.curves {
        table.push(format!("{}_prescribed", c.name), c.prescribed.clone());
        table.push(format!("{}_realized", c.name), c.realized.clone());
    }
    table
}

pub fn load_bundle(path: &Path) -> Result<ForgedInstance> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Builds the instance described by `spec`; relative bundle paths are
/// resolved against `base`.
pub fn run_forge(kind: ForgeKind, spec: &str, base: &Path) -> Result<ForgeOutput> {
    let instance = match kind {
        ForgeKind::System => {
            let s: SystemSpec = serde_json::from_str(spec)?;
            let lambda = spectrum(s.lambda)?;
            let g = decrease(s.g, s.curve, lambda.len(), "")?;
            gps_system(&g, &lambda, None, s.seed)?
        }
        ForgeKind::Weight => {
            let s: WeightSpec = serde_json::from_str(spec)?;
            let lambda = spectrum(s.lambda)?;
            let n = lambda.len();
            let g = decrease(s.g, s.curve, n, "")?;
            let gt = decrease(s.g_tilde, s.curve_tilde, n, "_tilde")?;
            let mut inst = gps_system(&g, &lambda, None, s.seed)?;
            let wc = weight_for_curve(&inst.a, &inst.b, &gt)?;
            inst.construction = Construction::WeightForCurve;
            inst.weight = Some(wc.weight.matrix().clone());
            inst.prescription.g_tilde = Some(gt);
            inst
        }
        ForgeKind::Pair => {
            let s: PairSpec = serde_json::from_str(spec)?;
            let lambda = spectrum(s.lambda)?;
            let n = lambda.len();
            let gr = decrease(s.g_right, s.curve_right, n, "_right")?;
            let gl = decrease(s.g_left, s.curve_left, n, "_left")?;
            left_right_pair(&gr, &gl, &lambda, s.seed)?
        }
        ForgeKind::Swap => {
            let s: SwapSpec = serde_json::from_str(spec)?;
            let path = if s.bundle.is_absolute() { s.bundle } else { base.join(s.bundle) };
            let source = load_bundle(&path)?;
            let n = source.dim();
            let h = source.preconditioner.clone().unwrap_or_else(|| Matrix::identity(n, n));
            swap_left_right(&source.a, &source.b, &h, s.seed)?
        }
    };
    finish(instance)
}

/// Writes `bundle.json`, `report.json` and `curves.csv` into `out`.
pub fn write_outputs(output: &ForgeOutput, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("bundle.json"), serde_json::to_string_pretty(&output.instance)?)?;
    std::fs::write(out.join("report.json"), serde_json::to_string_pretty(&output.report)?)?;
    output.table.save(&out.join("curves.csv"))
}

/// Fresh verification of a saved bundle.
pub fn check_bundle(path: &Path) -> Result<InstanceReport> {
    Ok(verify_instance(&load_bundle(path)?)?)
}
