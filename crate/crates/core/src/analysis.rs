//! Identities, bounds, characterizations and necessary conditions relating
//! I-GMRES and weighted GMRES, evaluated as checkable reports.

use serde::Serialize;

use crate::curves::{curve_deviation, g_to_curve, ResidualDecreaseVector};
use crate::error::{Error, Result};
use crate::forge::{Construction, ForgedInstance, LinkMatrix};
use crate::krylov::{mgmres, preconditioned_gmres, GmresOptions, GmresTrace, WeightMatrix};
use crate::numkernel::{
    c, general_eig, qr, relative_spectrum_distance, singular_values, triangular_solve, Matrix, Triangle, Vector,
    C64,
};

/// Relative tolerance of the bound and necessary-condition checks.
pub const REPORT_TOL: f64 = 1e-9;

/// `B (B*MB)⁻¹ e₁` for `B = (b W_k)`, equal to `r̃_k / ‖r̃_k‖²_M`, and the
/// entry `((B*MB)⁻¹)₁₁`. With `M = PP*` and `P*B = QR` the Gram matrix is
/// never formed: `(B*MB)⁻¹e₁ = R⁻¹R⁻*e₁`.
fn scaled_residual(basis: &Matrix, b: &Vector, m: &WeightMatrix) -> Result<(Vector, f64)> {
    let n = b.len();
    if basis.nrows() != n || m.dim() != n {
        return Err(Error::DimensionMismatch("basis, right-hand side and weight".into()));
    }
    let k = basis.ncols();
    if k + 1 > n {
        return Err(Error::RankDeficientBasis);
    }
    let mut big_b = Matrix::zeros(n, k + 1);
    big_b.set_column(0, b);
    big_b.view_mut((0, 1), (n, k)).copy_from(basis);
    let pb = m.factor().adjoint() * &big_b;
    let r = match qr(&pb, true) {
        Ok(f) => f.r,
        Err(Error::RankDeficient { .. }) => return Err(Error::RankDeficientBasis),
        Err(e) => return Err(e),
    };
    let dmax = (0..=k).map(|i| r[(i, i)].re).fold(0.0, f64::max);
    if (0..=k).any(|i| !(r[(i, i)].re > 1e-14 * dmax)) {
        return Err(Error::RankDeficientBasis);
    }
    let mut e1 = Matrix::zeros(k + 1, 1);
    e1[(0, 0)] = c(1.0);
    let z = triangular_solve(&r.adjoint(), &e1, Triangle::Lower)?;
    let y = triangular_solve(&r, &z, Triangle::Upper)?;
    let x = &big_b * y.column(0);
    Ok((x, z.norm_squared()))
}

/// ‖r̃_k‖_M from a basis `W_k` of `A𝒦_k(A,b)` without running the solver.
pub fn ipsen_residual_norm(basis: &Matrix, b: &Vector, m: &WeightMatrix) -> Result<f64> {
    let (x, _) = scaled_residual(basis, b, m)?;
    Ok(1.0 / m.norm(&x))
}

/// The same norm read from the (1,1) entry of `(B*MB)⁻¹`.
pub fn ipsen_leading_entry(basis: &Matrix, b: &Vector, m: &WeightMatrix) -> Result<f64> {
    let (_, entry) = scaled_residual(basis, b, m)?;
    Ok(1.0 / entry.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioKind {
    /// ‖r̃_k‖_I / ‖r̃_k‖_M
    WeightedResidualIOverM,
    /// ‖r_k‖_M / ‖r_k‖_I
    ResidualMOverI,
    /// ‖r_k‖_I / ‖r̃_k‖_M
    NaturalNorms,
    /// ‖r̃_k‖_I / ‖r_k‖_I
    EuclideanNorms,
    /// ‖r̃_k‖_N / ‖r_k‖_N
    ThirdNorm,
}

/// Ratios between I-GMRES residuals `r_k` and M-GMRES residuals `r̃_k`
/// computed from `x̃ = B(B*MB)⁻¹e₁` and `x = B(B*B)⁻¹e₁`.
pub fn norm_ratio(
    basis: &Matrix,
    b: &Vector,
    m: &WeightMatrix,
    n_weight: Option<&WeightMatrix>,
    kind: RatioKind,
) -> Result<f64> {
    let id = WeightMatrix::identity(b.len());
    let (xt, _) = scaled_residual(basis, b, m)?;
    let (x, _) = scaled_residual(basis, b, &id)?;
    Ok(match kind {
        RatioKind::WeightedResidualIOverM => xt.norm() / m.norm(&xt),
        RatioKind::ResidualMOverI => m.norm(&x) / x.norm(),
        RatioKind::NaturalNorms => m.norm(&xt) / x.norm(),
        RatioKind::EuclideanNorms => xt.norm() * x.norm() / m.norm(&xt).powi(2),
        RatioKind::ThirdNorm => {
            let nw = n_weight.ok_or_else(|| Error::InvalidArgument("third-norm ratio needs N".into()))?;
            nw.norm(&xt) * x.norm().powi(2) / (m.norm(&xt).powi(2) * nw.norm(&x))
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub observed: Vec<f64>,
    pub satisfied: Vec<bool>,
    pub slack: Vec<f64>,
    pub block_sigma_min: Vec<f64>,
    pub block_sigma_max: Vec<f64>,
    pub interlacing: Vec<bool>,
}

impl BoundReport {
    pub fn all_satisfied(&self) -> bool {
        self.satisfied.iter().all(|&s| s)
    }

    pub fn interlacing_holds(&self) -> bool {
        self.interlacing.iter().all(|&s| s)
    }
}

fn link_residual(t: &LinkMatrix, g: &ResidualDecreaseVector, g_tilde: &ResidualDecreaseVector) -> f64 {
    (g.to_vector() - t.apply(g_tilde)).norm() / g.norm()
}

/// Bounds `σ_min(T_{k+1:m})‖r̃_k‖_M ≤ ‖r_k‖_I ≤ σ_max(T_{k+1:m})‖r̃_k‖_M`
/// for `k = 0, …, m−1`, with the trailing-block interlacing.
pub fn lookahead_bounds(t: &LinkMatrix, trace_i: &GmresTrace, trace_m: &GmresTrace) -> Result<BoundReport> {
    let m = trace_i.length();
    if trace_m.length() != m {
        return Err(Error::LengthMismatch {
            left: m,
            right: trace_m.length(),
        });
    }
    if t.dim() != trace_i.g_realized.dim() {
        return Err(Error::DimensionMismatch("link and traces".into()));
    }
    let residual = link_residual(t, &trace_i.g_realized, &trace_m.g_realized);
    if residual > 1e-8 {
        return Err(Error::LinkMismatch(residual));
    }
    let sv = t.singular_values();
    let (smax, smin) = (sv[0], sv[sv.len() - 1]);
    let slack_tol = 1e-12 * smax;
    let mut report = BoundReport {
        lower: Vec::with_capacity(m),
        upper: Vec::with_capacity(m),
        observed: Vec::with_capacity(m),
        satisfied: Vec::with_capacity(m),
        slack: Vec::with_capacity(m),
        block_sigma_min: Vec::with_capacity(m),
        block_sigma_max: Vec::with_capacity(m),
        interlacing: Vec::with_capacity(m),
    };
    for k in 0..m {
        let block = t.matrix().view((k, k), (m - k, m - k)).clone_owned();
        let s = singular_values(&block)?;
        let (bmax, bmin) = (s[0], s[s.len() - 1]);
        let observed = trace_i.residual_norms[k];
        let weighted = trace_m.residual_norms[k];
        let (lower, upper) = (bmin * weighted, bmax * weighted);
        let tol = 1e-10 * observed;
        report.satisfied.push(lower - tol <= observed && observed <= upper + tol);
        report.slack.push((observed - lower).min(upper - observed));
        report.lower.push(lower);
        report.upper.push(upper);
        report.observed.push(observed);
        report.interlacing.push(bmin >= smin - slack_tol && bmax <= smax + slack_tol);
        report.block_sigma_min.push(bmin);
        report.block_sigma_max.push(bmax);
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    /// Rows `(μ_min‖r_k‖²_I, μ_min‖r̃_k‖²_I, ‖r̃_k‖²_M, ‖r_k‖²_M, μ_max‖r_k‖²_I)`.
    pub chain: Vec<[f64; 5]>,
    pub chain_holds: Vec<bool>,
    /// Normalized squared residuals `(‖r_k‖²_I/‖r_0‖²_I, ‖r̃_k‖²_M/‖r̃_0‖²_M)`.
    pub normalized: Vec<[f64; 2]>,
    pub normalized_holds: Vec<bool>,
    pub condition: f64,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.chain_holds.iter().chain(&self.normalized_holds).all(|&h| h)
    }
}

fn stored_residuals(trace: &GmresTrace) -> Result<&[Vector]> {
    trace
        .residual_vectors
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("trace was run without residual vectors".into()))
}

/// Spectral sandwich between I-GMRES and M-GMRES residuals and the
/// `κ(M)` bracket on normalized residuals.
pub fn residual_sandwich(trace_i: &GmresTrace, trace_m: &GmresTrace, weight: &WeightMatrix) -> Result<SandwichReport> {
    let ri = stored_residuals(trace_i)?;
    let rm = stored_residuals(trace_m)?;
    let mu = weight.eigenvalues();
    let (mu_min, mu_max) = (mu[0], mu[mu.len() - 1]);
    let kappa = mu_max / mu_min;
    let steps = ri.len().min(rm.len());
    let (r0_i, r0_m) = (ri[0].norm_squared(), weight.norm(&rm[0]).powi(2));
    let mut report = SandwichReport {
        chain: Vec::with_capacity(steps),
        chain_holds: Vec::with_capacity(steps),
        normalized: Vec::with_capacity(steps),
        normalized_holds: Vec::with_capacity(steps),
        condition: kappa,
    };
    for k in 0..steps {
        let r_i = ri[k].norm_squared();
        let rt_i = rm[k].norm_squared();
        let rt_m = weight.norm(&rm[k]).powi(2);
        let r_m = weight.norm(&ri[k]).powi(2);
        let row = [mu_min * r_i, mu_min * rt_i, rt_m, r_m, mu_max * r_i];
        let tol = 1e-10 * row[4] + 1e-20 * mu_max * r0_i;
        report.chain_holds.push(row.windows(2).all(|w| w[0] <= w[1] + tol));
        report.chain.push(row);
        let (a, b) = (r_i / r0_i, rt_m / r0_m);
        let tol = 1e-10 * a.max(b) + 1e-20 * kappa;
        report.normalized_holds.push(b / kappa <= a + tol && a <= kappa * b + tol);
        report.normalized.push([a, b]);
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub passed: bool,
    pub residual: f64,
}

/// Both readings of the eigenvalue window `σ_n ≤ ratio ≤ σ_1`.
#[derive(Clone, Debug, Serialize)]
pub struct WindowOrientation {
    /// `ğ_m / g_m`
    pub stated_ratio: f64,
    pub stated_in_window: bool,
    pub stated_is_eigenvalue: bool,
    /// `g_m / ğ_m`
    pub reciprocal_ratio: f64,
    pub reciprocal_in_window: bool,
    pub reciprocal_is_eigenvalue: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NecessaryConditionsReport {
    pub checks: Vec<ConditionCheck>,
    /// Sorted by decreasing modulus.
    pub eigenvalues: Vec<C64>,
    pub window: WindowOrientation,
}

impl NecessaryConditionsReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &'static str, residual: f64) -> ConditionCheck {
    ConditionCheck {
        name,
        passed: residual <= REPORT_TOL,
        residual,
    }
}

/// Eigenvalues of a block triangular link: the diagonal of `T̂` and the
/// spectrum of the trailing block.
fn link_eigenvalues(t: &Matrix, m: usize) -> Result<Vec<C64>> {
    let n = t.nrows();
    let mut xi: Vec<C64> = (0..m).map(|i| t[(i, i)]).collect();
    if m < n {
        xi.extend(general_eig(&t.view((m, m), (n - m, n - m)).clone_owned())?);
    }
    xi.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(xi)
}

fn is_eigenvalue(x: f64, xi: &[C64]) -> bool {
    let scale = xi.iter().map(|z| z.norm()).fold(x.abs(), f64::max);
    xi.iter().any(|z| (z - c(x)).norm() <= REPORT_TOL * scale)
}

/// Evaluates the necessary conditions on a link `T` with `g = Tğ` and
/// singular values `σ` (descending).
pub fn necessary_conditions(
    t: &LinkMatrix,
    g: &ResidualDecreaseVector,
    g_tilde: &ResidualDecreaseVector,
    sigma: &[f64],
) -> Result<NecessaryConditionsReport> {
    let n = t.dim();
    if g.dim() != n || g_tilde.dim() != n || sigma.len() != n {
        return Err(Error::DimensionMismatch("link, curves and singular values".into()));
    }
    let tm = t.matrix();
    let m = g.length().max(1);
    let (gm, hm) = (g.values()[m - 1], g_tilde.values()[m - 1]);
    let mut checks = Vec::with_capacity(6);

    let ratio = gm / hm;
    checks.push(check("trailing_entry", (tm[(m - 1, m - 1)] - c(ratio)).norm() / ratio.abs()));

    let scale = tm.norm();
    let mut off_form = 0.0f64;
    for j in 0..m {
        for i in j + 1..n {
            off_form = off_form.max(tm[(i, j)].norm());
        }
    }
    checks.push(check("diagonal_eigenvalues", off_form / scale));

    let xi = link_eigenvalues(tm, m)?;
    let mut excess = 0.0f64;
    let (mut log_xi, mut log_sigma) = (0.0, 0.0);
    for k in 0..n {
        log_xi += xi[k].norm().ln();
        log_sigma += sigma[k].ln();
        excess = excess.max(log_xi - log_sigma);
    }
    let equality = (log_xi - log_sigma).abs();
    checks.push(check("weyl_multiplicative", excess.max(equality)));

    let (mut sum_xi, mut sum_sigma, mut add_excess) = (0.0, 0.0, 0.0f64);
    for k in 0..n {
        sum_xi += xi[k].norm();
        sum_sigma += sigma[k];
        add_excess = add_excess.max((sum_xi - sum_sigma) / sum_sigma);
    }
    checks.push(check("weyl_additive", add_excess.max(0.0)));

    let (s1, sn) = (sigma[0], sigma[n - 1]);
    let in_window = |x: f64| -> (bool, f64) {
        let below = (sn - x) / sn;
        let above = (x - s1) / s1;
        let r = below.max(above).max(0.0);
        (r <= REPORT_TOL, r)
    };
    let stated = hm / gm;
    let (stated_in, _) = in_window(stated);
    let (recip_in, recip_res) = in_window(ratio);
    let window = WindowOrientation {
        stated_ratio: stated,
        stated_in_window: stated_in,
        stated_is_eigenvalue: is_eigenvalue(stated, &xi),
        reciprocal_ratio: ratio,
        reciprocal_in_window: recip_in,
        reciprocal_is_eigenvalue: is_eigenvalue(ratio, &xi),
    };
    // The window is evaluated for whichever ratio is an eigenvalue of T.
    let window_res = if window.reciprocal_is_eigenvalue || !window.stated_is_eigenvalue {
        recip_res
    } else {
        in_window(stated).1
    };
    checks.push(check("eigenvalue_window", window_res));

    let frob = tm.norm_squared();
    let ssum: f64 = sigma.iter().map(|s| s * s).sum();
    checks.push(check("frobenius", (frob - ssum).abs() / ssum));

    Ok(NecessaryConditionsReport {
        checks,
        eigenvalues: xi,
        window,
    })
}

/// Outcome of a characterization check with the witness link `T = W*W̃`.
#[derive(Clone, Debug, Serialize)]
pub struct CharacterizationReport {
    pub holds: bool,
    pub length: usize,
    pub length_matches: bool,
    /// Largest entry outside the block triangular form, relative to ‖T‖_F.
    pub block_form_residual: f64,
    /// ‖(P*WT)(P*WT)* − I‖_F for `M = PP*`, the weight equation in scaled form.
    pub weight_residual: f64,
    /// ‖b − WTğ‖ / ‖b‖.
    pub rhs_residual: f64,
    #[serde(skip)]
    pub witness: Matrix,
}

const CHARACTERIZATION_TOL: f64 = 1e-8;

/// Checks whether `M` makes M-GMRES on `(A, b)` realize `ğ` through the
/// existence of `T` with `M⁻¹ = WT(WT)*` and `b = WTğ`.
pub fn verify_weight_characterization(
    a: &Matrix,
    b: &Vector,
    weight: &WeightMatrix,
    g_tilde: &ResidualDecreaseVector,
) -> Result<CharacterizationReport> {
    let n = b.len();
    let opts = GmresOptions {
        complete_basis: true,
        ..GmresOptions::default()
    };
    let ti = mgmres(a, b, &WeightMatrix::identity(n), &opts)?;
    let tm = mgmres(a, b, weight, &opts)?;
    let m = ti.length();
    let length_matches = g_tilde.dim() == n && g_tilde.length() == m && tm.length() == m;
    let witness = ti.basis.adjoint() * &tm.basis;
    let scale = witness.norm();
    let mut off = 0.0f64;
    for j in 0..m {
        for i in j + 1..n {
            off = off.max(witness[(i, j)].norm());
        }
    }
    let wt = &ti.basis * &witness;
    let scaled = weight.factor().adjoint() * &wt;
    let weight_residual = (&scaled * scaled.adjoint() - Matrix::identity(n, n)).norm();
    let rhs_residual = if g_tilde.dim() == n {
        (b - &wt * g_tilde.to_vector()).norm() / b.norm()
    } else {
        f64::INFINITY
    };
    let block_form_residual = off / scale;
    Ok(CharacterizationReport {
        holds: length_matches
            && block_form_residual <= CHARACTERIZATION_TOL
            && weight_residual <= CHARACTERIZATION_TOL
            && rhs_residual <= CHARACTERIZATION_TOL,
        length: m,
        length_matches,
        block_form_residual,
        weight_residual,
        rhs_residual,
        witness,
    })
}

/// Preconditioner form: left preconditioning of `A = ÂH⁻¹` by `H` realizes
/// `g_L` iff the weight `H*H` characterization holds for `(Â, b)`.
pub fn verify_preconditioner_characterization(
    a_hat: &Matrix,
    b: &Vector,
    h: &Matrix,
    g_left: &ResidualDecreaseVector,
) -> Result<CharacterizationReport> {
    let hh = h.adjoint() * h;
    let weight = WeightMatrix::new((&hh + hh.adjoint()).scale(0.5))?;
    verify_weight_characterization(a_hat, b, &weight, g_left)
}

/// `T = W*W̃` between the completed I- and M-GMRES residual bases.
pub fn extract_link(trace_i: &GmresTrace, trace_m: &GmresTrace) -> Result<LinkMatrix> {
    let n = trace_i.g_realized.dim();
    if trace_i.basis.ncols() != n || trace_m.basis.ncols() != n {
        return Err(Error::InvalidArgument("bases must be completed to n columns".into()));
    }
    let m = trace_i.length();
    if trace_m.length() != m {
        return Err(Error::LengthMismatch {
            left: m,
            right: trace_m.length(),
        });
    }
    let t = trace_i.basis.adjoint() * &trace_m.basis;
    let link = LinkMatrix::from_numeric(t, m, 1e-9)?;
    let residual = link_residual(&link, &trace_i.g_realized, &trace_m.g_realized);
    if residual > 1e-8 {
        return Err(Error::BasisMismatch(residual));
    }
    Ok(link)
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveCheck {
    pub name: &'static str,
    pub prescribed: Vec<f64>,
    pub realized: Vec<f64>,
    pub deviation: f64,
    pub passed: bool,
}

/// Fresh-run comparison of a forged instance with its prescription.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceReport {
    pub construction: Construction,
    pub curves: Vec<CurveCheck>,
    pub spectrum_deviation: Option<f64>,
    pub spectrum_passed: bool,
    pub passed: bool,
}

pub const CURVE_TOL: f64 = 1e-7;
pub const SPECTRUM_TOL: f64 = 1e-8;

fn curve_check(name: &'static str, g: &ResidualDecreaseVector, realized: &[f64]) -> Result<CurveCheck> {
    let prescribed = g_to_curve(g)?.values().to_vec();
    let deviation = curve_deviation(realized, &prescribed);
    Ok(CurveCheck {
        name,
        prescribed,
        realized: realized.to_vec(),
        deviation,
        passed: deviation <= CURVE_TOL,
    })
}

pub fn verify_instance(inst: &ForgedInstance) -> Result<InstanceReport> {
    let n = inst.dim();
    let p = &inst.prescription;
    let opts = GmresOptions::default();
    let mut curves = Vec::new();
    if let Some(g) = &p.g {
        let t = mgmres(&inst.a, &inst.b, &WeightMatrix::identity(n), &opts)?;
        curves.push(curve_check("i_gmres", g, &t.residual_norms)?);
    }
    if let (Some(gt), Some(w)) = (&p.g_tilde, inst.weight_matrix()?) {
        let t = mgmres(&inst.a, &inst.b, &w, &opts)?;
        curves.push(curve_check("m_gmres", gt, &t.residual_norms)?);
    }
    let spectrum_op = match &inst.preconditioner {
        Some(h) => {
            if let Some(gr) = &p.g_right {
                let t = preconditioned_gmres(&inst.a, &inst.b, None, Some(h), &opts)?;
                curves.push(curve_check("right_preconditioned", gr, t.minimized_norms())?);
            }
            if let Some(gl) = &p.g_left {
                let t = preconditioned_gmres(&inst.a, &inst.b, Some(h), None, &opts)?;
                curves.push(curve_check("left_preconditioned", gl, t.minimized_norms())?);
            }
            &inst.a * h
        }
        None => inst.a.clone(),
    };
    let spectrum_deviation = if p.lambda.is_empty() {
        None
    } else {
        Some(relative_spectrum_distance(&general_eig(&spectrum_op)?, &p.lambda))
    };
    let spectrum_passed = spectrum_deviation.is_none_or(|d| d <= SPECTRUM_TOL);
    Ok(InstanceReport {
        construction: inst.construction,
        passed: spectrum_passed && curves.iter().all(|c| c.passed),
        curves,
        spectrum_deviation,
        spectrum_passed,
    })
}
