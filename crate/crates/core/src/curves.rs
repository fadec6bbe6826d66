//! Convergence curves and their residual decrease vectors.
//!
//! A curve `r_0 ≥ r_1 ≥ … ≥ r_m = 0` and the vector of decreases
//! `g_i = sqrt(r_{i-1}² − r_i²)` carry the same information; these functions
//! convert between the two without losing relative accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::WeightMatrix;
use crate::numkernel::Vector;

/// Relative size below which a trailing residual counts as zero when a raw
/// residual history is turned into a curve.
pub const STAGNATION_THRESHOLD: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ResidualDecreaseVector {
    values: Vec<f64>,
}

impl ResidualDecreaseVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDecrease("empty vector".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidDecrease(format!("entry {i} is not finite")));
            }
            if v < 0.0 {
                return Err(Error::InvalidDecrease(format!("entry {i} is negative")));
            }
        }
        Ok(ResidualDecreaseVector { values })
    }

    /// Full stagnation until the last step: `(0, …, 0, norm)`.
    pub fn stagnation(n: usize, norm: f64) -> Self {
        let mut values = vec![0.0; n];
        values[n - 1] = norm;
        ResidualDecreaseVector { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Index of the last nonzero entry (1-based); zero for the zero vector.
    pub fn length(&self) -> usize {
        self.values.iter().rposition(|&v| v > 0.0).map_or(0, |i| i + 1)
    }

    pub fn norm(&self) -> f64 {
        compensated_sum(self.values.iter().map(|v| v * v)).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.length() == 0
    }

    /// Zero-pads (or trims trailing zeros) to ambient dimension `n`.
    pub fn with_dim(&self, n: usize) -> Result<Self> {
        let m = self.length();
        if m > n {
            return Err(Error::LengthExceedsDimension { length: m, n });
        }
        let mut values = self.values[..m].to_vec();
        values.resize(n, 0.0);
        Ok(ResidualDecreaseVector { values })
    }

    pub fn scaled(&self, s: f64) -> Self {
        ResidualDecreaseVector {
            values: self.values.iter().map(|v| v * s.abs()).collect(),
        }
    }

    pub fn to_vector(&self) -> Vector {
        crate::numkernel::real_vector(&self.values)
    }
}

impl TryFrom<Vec<f64>> for ResidualDecreaseVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ResidualDecreaseVector> for Vec<f64> {
    fn from(g: ResidualDecreaseVector) -> Self {
        g.values
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ConvergenceCurve {
    r: Vec<f64>,
}

impl ConvergenceCurve {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.len() < 2 {
            return Err(Error::InvalidCurve("a curve needs at least r_0 and r_m".into()));
        }
        for (i, &v) in r.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidCurve(format!("entry {i} is {v}")));
            }
        }
        if r[0] == 0.0 {
            return Err(Error::ZeroInitialResidual);
        }
        if let Some(i) = (1..r.len()).find(|&i| r[i] > r[i - 1]) {
            return Err(Error::NotMonotone { index: i });
        }
        let m = r.len() - 1;
        if r[m] != 0.0 {
            return Err(Error::InvalidCurve("final residual must be zero".into()));
        }
        if r[m - 1] == 0.0 {
            return Err(Error::InvalidCurve("residual reaches zero before the last entry".into()));
        }
        Ok(ConvergenceCurve { r })
    }

    /// Curve from a raw residual history, cut at the first residual below
    /// `STAGNATION_THRESHOLD · r_0` which is then taken as exactly zero.
    pub fn from_history(history: &[f64]) -> Result<Self> {
        let r0 = *history.first().ok_or(Error::ZeroInitialResidual)?;
        if r0 == 0.0 {
            return Err(Error::ZeroInitialResidual);
        }
        let cut = history
            .iter()
            .position(|&v| v <= STAGNATION_THRESHOLD * r0)
            .ok_or_else(|| Error::InvalidCurve("history never reaches zero".into()))?;
        let mut r = history[..cut].to_vec();
        r.push(0.0);
        Self::new(r)
    }

    pub fn values(&self) -> &[f64] {
        &self.r
    }

    /// Breakdown index m.
    pub fn length(&self) -> usize {
        self.r.len() - 1
    }

    pub fn initial(&self) -> f64 {
        self.r[0]
    }
}

impl TryFrom<Vec<f64>> for ConvergenceCurve {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ConvergenceCurve> for Vec<f64> {
    fn from(c: ConvergenceCurve) -> Self {
        c.r
    }
}

/// Neumaier summation.
fn compensated_sum<I: Iterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Decreases of a curve; `r_{i-1}² − r_i²` is formed as a product of sum and
/// difference so that small decreases keep their relative accuracy.
pub fn curve_to_g(c: &ConvergenceCurve) -> ResidualDecreaseVector {
    let r = c.values();
    let values = r
        .windows(2)
        .map(|w| ((w[0] - w[1]) * (w[0] + w[1])).sqrt())
        .collect();
    ResidualDecreaseVector { values }
}

/// Validates raw residual norms before conversion.
pub fn norms_to_g(r: &[f64]) -> Result<ResidualDecreaseVector> {
    Ok(curve_to_g(&ConvergenceCurve::new(r.to_vec())?))
}

pub fn g_to_curve(g: &ResidualDecreaseVector) -> Result<ConvergenceCurve> {
    let m = g.length();
    if m == 0 {
        return Err(Error::ZeroInitialResidual);
    }
    let sq: Vec<f64> = g.values[..m].iter().map(|v| v * v).collect();
    let mut r = vec![0.0; m + 1];
    // Suffix sums with compensation, accumulated from the small end.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in (0..m).rev() {
        let x = sq[i];
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        r[i] = (sum + comp).sqrt();
    }
    Ok(ConvergenceCurve { r })
}

pub fn normalize_curve(c: &ConvergenceCurve) -> Result<ConvergenceCurve> {
    let r0 = c.initial();
    if r0 == 0.0 {
        return Err(Error::ZeroInitialResidual);
    }
    Ok(ConvergenceCurve {
        r: c.r.iter().map(|v| v / r0).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub sum_g_squared: f64,
    pub norm_b_squared: f64,
    /// Σ g_i² / ‖b‖².
    pub ratio: f64,
    pub norms_compatible: bool,
    pub length: usize,
    pub dimension: usize,
    pub length_admissible: bool,
}

impl CompatibilityReport {
    pub fn passed(&self) -> bool {
        self.norms_compatible && self.length_admissible
    }
}

/// Compatibility of a decrease vector with a right-hand side: Σ g_i² must
/// equal ‖b‖²_M and the length must not exceed the dimension.
pub fn check_compatibility(
    g: &ResidualDecreaseVector,
    b: &Vector,
    m: Option<&WeightMatrix>,
) -> CompatibilityReport {
    let sum_g_squared = compensated_sum(g.values.iter().map(|v| v * v));
    let norm_b = match m {
        Some(w) if w.dim() == b.len() => w.norm(b),
        Some(_) => f64::NAN,
        None => b.norm(),
    };
    let norm_b_squared = norm_b * norm_b;
    let ratio = sum_g_squared / norm_b_squared;
    CompatibilityReport {
        sum_g_squared,
        norm_b_squared,
        ratio,
        norms_compatible: (ratio - 1.0).abs() <= 1e-10,
        length: g.length(),
        dimension: b.len(),
        length_admissible: g.length() <= b.len(),
    }
}

/// Largest per-entry relative deviation between two curves; infinite when
/// their lengths differ.
pub fn curve_deviation(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let s = x.abs().max(y.abs());
            if s == 0.0 {
                0.0
            } else {
                (x - y).abs() / s
            }
        })
        .fold(0.0, f64::max)
}
