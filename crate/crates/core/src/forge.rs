//! Constructions of systems, weights, links and preconditioners that realize
//! prescribed convergence curves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curves::{ResidualDecreaseVector, STAGNATION_THRESHOLD};
use crate::error::{Error, Result};
use crate::krylov::{mgmres, GmresOptions, WeightMatrix};
use crate::numkernel::{
    self, c, check_square, check_unitary, diag_real, haar_unitary, hermitian_eig, qr,
    singular_values, triangular_inverse, Matrix, Triangle, Vector, C64,
};

/// Largest supported ratio between eigenvalue moduli.
pub const MAX_SPECTRUM_RATIO: f64 = 1e10;

/// Block upper triangular `T = [T̂ T₁₂; 0 T₂₂]` with `T̂` upper triangular and
/// invertible, relating two nested residual bases by `W̃ = W T`.
#[derive(Clone, Debug)]
pub struct LinkMatrix {
    t: Matrix,
    t_inv: Matrix,
    m: usize,
    singular_values: Vec<f64>,
}

impl LinkMatrix {
    /// Checks the block form exactly.
    pub fn new(t: Matrix, m: usize) -> Result<Self> {
        let n = check_square(&t, "link")?;
        if m == 0 || m > n {
            return Err(Error::InvalidArgument(format!("block size {m} for a {n}x{n} link")));
        }
        for j in 0..m {
            for i in j + 1..n {
                if t[(i, j)] != c(0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "link entry ({i},{j}) below the block triangular form"
                    )));
                }
            }
        }
        if let Some(i) = (0..m).find(|&i| t[(i, i)].norm() == 0.0) {
            return Err(Error::SingularTriangular { index: i });
        }
        let t_inv = if m == n {
            triangular_inverse(&t, Triangle::Upper)?
        } else {
            numkernel::inverse(&t)?
        };
        Self::with_inverse(t, t_inv, m)
    }

    fn with_inverse(t: Matrix, t_inv: Matrix, m: usize) -> Result<Self> {
        let singular_values = singular_values(&t)?;
        Ok(LinkMatrix {
            t,
            t_inv,
            m,
            singular_values,
        })
    }

    /// Projects a numerically computed link onto the block form after checking
    /// that the discarded part is below `tol·‖T‖_F`.
    pub fn from_numeric(mut t: Matrix, m: usize, tol: f64) -> Result<Self> {
        let n = check_square(&t, "link")?;
        let scale = t.norm();
        let mut off = 0.0f64;
        for j in 0..m {
            for i in j + 1..n {
                off = off.max(t[(i, j)].norm());
                t[(i, j)] = c(0.0);
            }
        }
        if off > tol * scale {
            return Err(Error::BasisMismatch(off / scale));
        }
        Self::new(t, m)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.t
    }

    pub fn inverse(&self) -> &Matrix {
        &self.t_inv
    }

    pub fn block_size(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    /// Descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn condition(&self) -> f64 {
        self.singular_values[0] / self.singular_values[self.singular_values.len() - 1]
    }

    pub fn apply(&self, g: &ResidualDecreaseVector) -> Vector {
        &self.t * g.to_vector()
    }

    /// Leading m×m triangular block.
    pub fn leading_block(&self) -> Matrix {
        self.t.view((0, 0), (self.m, self.m)).clone_owned()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    GpsSystem,
    WeightForCurve,
    SimultaneousSystem,
    LeftRightPair,
    SwapLeftRight,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prescription {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<ResidualDecreaseVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_tilde: Option<ResidualDecreaseVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_right: Option<ResidualDecreaseVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_left: Option<ResidualDecreaseVector>,
    pub lambda: Vec<C64>,
}

/// A constructed system with what it was built to realize.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForgedInstance {
    pub construction: Construction,
    pub seed: u64,
    #[serde(with = "dense")]
    pub a: Matrix,
    #[serde(with = "dense_vector")]
    pub b: Vector,
    #[serde(default, with = "dense_option", skip_serializing_if = "Option::is_none")]
    pub weight: Option<Matrix>,
    #[serde(default, with = "dense_option", skip_serializing_if = "Option::is_none")]
    pub preconditioner: Option<Matrix>,
    pub prescription: Prescription,
}

impl ForgedInstance {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn weight_matrix(&self) -> Result<Option<WeightMatrix>> {
        self.weight.clone().map(WeightMatrix::new).transpose()
    }
}

/// Dense matrices as row-major nested arrays of `[re, im]` pairs.
mod dense {
    use super::{Matrix, C64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<C64>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<C64>>::deserialize(d)?;
        crate::numkernel::matrix_from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

mod dense_option {
    use super::Matrix;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<Matrix>, s: S) -> Result<S::Ok, S::Error> {
        match m {
            Some(m) => super::dense::serialize(m, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Matrix>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::dense")] Matrix);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

mod dense_vector {
    use super::{Vector, C64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        v.iter().copied().collect::<Vec<C64>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        let v = Vec::<C64>::deserialize(d)?;
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(serde::de::Error::custom("non-finite vector entry"));
        }
        Ok(Vector::from_vec(v))
    }
}

fn check_spectrum(lambda: &[C64]) -> Result<()> {
    if let Some(i) = lambda.iter().position(|z| z.norm() == 0.0) {
        return Err(Error::ZeroEigenvalue { index: i });
    }
    if lambda.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("spectrum"));
    }
    let hi = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lo = lambda.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if hi / lo > MAX_SPECTRUM_RATIO {
        return Err(Error::SpectrumRange { ratio: hi / lo });
    }
    Ok(())
}

fn same_dim(a: &ResidualDecreaseVector, b: &ResidualDecreaseVector) -> Result<usize> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "decrease vectors of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.dim())
}

/// The link `T` with `g = T·ğ`, identity outside the leading block.
pub fn link_for_curves(g: &ResidualDecreaseVector, g_tilde: &ResidualDecreaseVector) -> Result<LinkMatrix> {
    let n = same_dim(g, g_tilde)?;
    let m = g.length();
    if g_tilde.length() != m {
        return Err(Error::LengthMismatch {
            left: m,
            right: g_tilde.length(),
        });
    }
    if m == 0 {
        return Err(Error::ZeroTrailingEntry);
    }
    let (gv, hv) = (g.values(), g_tilde.values());
    let (gm, hm) = (gv[m - 1], hv[m - 1]);
    let mut t = Matrix::identity(n, n);
    let mut t_inv = Matrix::identity(n, n);
    for i in 0..m - 1 {
        match (gv[i] > 0.0, hv[i] > 0.0) {
            (true, true) => t[(i, i)] = c(gv[i] / hv[i]),
            (false, false) => {}
            (false, true) => {
                t[(i, i)] = c(-gm / hv[i]);
                t[(i, m - 1)] = c(gm / hm);
            }
            (true, false) => t[(i, m - 1)] = c(gv[i] / hm),
        }
    }
    t[(m - 1, m - 1)] = c(gm / hm);
    // Only the last column is off the diagonal, so the inverse is explicit.
    for i in 0..m {
        t_inv[(i, i)] = t[(i, i)].inv();
    }
    for i in 0..m - 1 {
        if t[(i, m - 1)] != c(0.0) {
            t_inv[(i, m - 1)] = -t[(i, m - 1)] * t_inv[(m - 1, m - 1)] / t[(i, i)];
        }
    }
    LinkMatrix::with_inverse(t, t_inv, m)
}

/// Matrix with entries uniform on [−1, 1] orthogonalized by QR.
pub fn random_orthogonal_uniform<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    loop {
        let x = Matrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..=1.0)));
        if let Ok(f) = qr(&x, true) {
            return f.q;
        }
    }
}

/// Upper triangular `R` from the QR factorization of `diag(s)·V` with `V`
/// random orthogonal; its singular values are `s`.
pub fn triangular_with_singular_values<R: Rng>(s: &[f64], rng: &mut R) -> Result<Matrix> {
    let v = random_orthogonal_uniform(s.len(), rng);
    Ok(qr(&(diag_real(s) * v), true)?.r)
}

/// Outcome of the closed-form 2×2 link.
#[derive(Clone, Debug)]
pub enum TwoByTwo {
    Feasible(LinkMatrix),
    /// Relative residual of the trace condition σ₁² + σ₂² = tr(T*T).
    Infeasible { residual: f64 },
}

pub fn two_by_two_link(g: [f64; 2], g_tilde: [f64; 2], sigma: [f64; 2]) -> Result<TwoByTwo> {
    if g[1] == 0.0 || g_tilde[1] == 0.0 {
        return Err(Error::ZeroTrailingEntry);
    }
    if sigma.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument("singular values must be positive".into()));
    }
    let a = sigma[0] * sigma[1] * g_tilde[1] / g[1];
    let d = g[1] / g_tilde[1];
    let b = (g[0] - a * g_tilde[0]) / g_tilde[1];
    let target = sigma[0] * sigma[0] + sigma[1] * sigma[1];
    let residual = (a * a + b * b + d * d - target) / target;
    if residual.abs() > 1e-10 {
        return Ok(TwoByTwo::Infeasible { residual });
    }
    let t = numkernel::real_matrix(2, 2, &[a, b, 0.0, d])?;
    let t_inv = numkernel::real_matrix(2, 2, &[1.0 / a, -b / (a * d), 0.0, 1.0 / d])?;
    Ok(TwoByTwo::Feasible(LinkMatrix::with_inverse(t, t_inv, 2)?))
}

/// Triangular link with prescribed singular values.
///
/// Without curves, `T⁻¹` is the triangular factor of `diag(1/σ)·V` for a
/// random orthogonal `V`. With both curves only the 2×2 closed form exists.
pub fn link_with_singular_values(
    sigma: &[f64],
    g: Option<&ResidualDecreaseVector>,
    g_tilde: Option<&ResidualDecreaseVector>,
    seed: u64,
) -> Result<LinkMatrix> {
    if sigma.is_empty() || sigma.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidArgument("singular values must be positive".into()));
    }
    let n = sigma.len();
    match (g, g_tilde) {
        (None, None) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inv_sigma: Vec<f64> = sigma.iter().map(|s| 1.0 / s).collect();
            let t_inv = triangular_with_singular_values(&inv_sigma, &mut rng)?;
            let t = triangular_inverse(&t_inv, Triangle::Upper)?;
            LinkMatrix::with_inverse(t, t_inv, n)
        }
        (Some(g), Some(gt)) => {
            if n != 2 || g.dim() != 2 || gt.dim() != 2 {
                return Err(Error::InfeasiblePair(
                    "no construction is known for prescribed curves beyond n = 2".into(),
                ));
            }
            let gv = [g.values()[0], g.values()[1]];
            let hv = [gt.values()[0], gt.values()[1]];
            match two_by_two_link(gv, hv, [sigma[0], sigma[1]])? {
                TwoByTwo::Feasible(t) => Ok(t),
                TwoByTwo::Infeasible { residual } => Err(Error::InfeasiblePair(format!(
                    "trace condition violated, relative residual {residual:.3e}"
                ))),
            }
        }
        _ => Err(Error::InvalidArgument(
            "supply both curves or neither".into(),
        )),
    }
}

/// Orthonormal Arnoldi basis of 𝒦_m(t0, u); None if it breaks down early.
fn arnoldi_basis(t0: &Matrix, u: &Vector) -> Option<Matrix> {
    let m = t0.nrows();
    let scale = t0.norm();
    let mut q: Vec<Vector> = vec![u.unscale(u.norm())];
    for j in 0..m - 1 {
        let mut w = t0 * &q[j];
        for _pass in 0..2 {
            for qi in &q {
                let h = qi.dotc(&w);
                w.axpy(-h, qi, c(1.0));
            }
        }
        let h = w.norm();
        if h <= 1e-10 * scale {
            return None;
        }
        q.push(w.unscale(h));
    }
    Some(Matrix::from_columns(&q))
}

struct KrylovBlock {
    b: Matrix,
    cond: f64,
}

/// Candidate Hessenberg system `(H, y)` similar to `t0` with I-GMRES basis
/// `e_i`, moved onto the target decreases by the link of the two vectors.
fn candidate_block(t0: &Matrix, d: &Vector, g: &ResidualDecreaseVector) -> Option<KrylovBlock> {
    let m = t0.nrows();
    let u = t0 * d;
    let q = arnoldi_basis(t0, &u)?;
    let mut h = q.adjoint() * t0 * &q;
    for j in 0..m {
        for i in j + 2..m {
            h[(i, j)] = c(0.0);
        }
    }
    let y = q.adjoint() * d.unscale(u.norm());
    let mut g0 = vec![0.0; m];
    for i in 0..m {
        let yi = y[i];
        g0[i] = yi.norm();
        if yi.norm() > 0.0 {
            let ph = yi / yi.norm();
            for k in 0..m {
                h[(i, k)] *= ph.conj();
                h[(k, i)] *= ph;
            }
        }
    }
    if g0[m - 1] <= 1e-14 * g.norm().max(f64::MIN_POSITIVE) {
        return None;
    }
    let norm0 = g0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target_norm = g.norm();
    let g0: Vec<f64> = g0.iter().map(|v| v * target_norm / norm0).collect();
    let g0 = ResidualDecreaseVector::new(g0).ok()?;
    let link = link_for_curves(g, &g0).ok()?;
    let b = link.matrix() * h * link.inverse();
    Some(KrylovBlock {
        b,
        cond: link.condition(),
    })
}

fn coefficient_candidates(g: &[f64], real: bool, seed: u64) -> Vec<Vector> {
    let m = g.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let phase = |rng: &mut ChaCha8Rng| -> C64 {
        if real {
            c(if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        } else {
            C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
        }
    };
    let mut sorted = g.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let floor = sorted[0] * 1e-8;
    let sorted: Vec<f64> = sorted.iter().map(|v| v.max(floor)).collect();
    let mut out = vec![
        Vector::from_element(m, c(1.0)),
        numkernel::real_vector(g),
        numkernel::real_vector(&sorted),
    ];
    for _ in 0..16 {
        let v = Vector::from_fn(m, |_, _| c(rng.random_range(-2.0f64..2.0).exp()) * phase(&mut rng));
        out.push(v);
    }
    for _ in 0..16 {
        let v = Vector::from_fn(m, |i, _| c(sorted[i] * rng.random_range(-1.0f64..1.0).exp()) * phase(&mut rng));
        out.push(v);
    }
    out
}

/// m×m matrix with spectrum `lambda` for which I-GMRES with right-hand side
/// `g` has the identity as nested residual basis.
fn krylov_block(g: &ResidualDecreaseVector, lambda: &[C64], seed: u64) -> Result<Matrix> {
    let m = g.dim();
    let real = lambda.iter().all(|z| z.im == 0.0);
    let candidates = coefficient_candidates(g.values(), real, seed);
    let diagonal = Matrix::from_diagonal(&Vector::from_column_slice(lambda));
    let scale = lambda.iter().map(|z| z.norm()).sum::<f64>() / m as f64;
    let mut bidiagonal = diagonal.clone();
    for i in 0..m.saturating_sub(1) {
        bidiagonal[(i, i + 1)] = c(scale);
    }
    for base in [&diagonal, &bidiagonal] {
        let best = candidates
            .iter()
            .filter_map(|d| candidate_block(base, d, g))
            .min_by(|a, b| a.cond.total_cmp(&b.cond));
        if let Some(best) = best {
            return Ok(best.b);
        }
    }
    Err(Error::BreakdownMismatch {
        expected: m,
        realized: 0,
    })
}

/// System `(A, b)` whose I-GMRES curve is given by `g` and whose spectrum is
/// `lambda`; `b = W·g` for the supplied or a seeded Haar unitary `W`.
pub fn gps_system(
    g: &ResidualDecreaseVector,
    lambda: &[C64],
    w: Option<&Matrix>,
    seed: u64,
) -> Result<ForgedInstance> {
    let n = g.dim();
    if lambda.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues for dimension {n}",
            lambda.len()
        )));
    }
    check_spectrum(lambda)?;
    let m = g.length();
    if m == 0 {
        return Err(Error::ZeroInitialResidual);
    }
    let real = lambda.iter().all(|z| z.im == 0.0);
    let w = match w {
        Some(w) => {
            if w.nrows() != n || w.ncols() != n {
                return Err(Error::DimensionMismatch("basis dimension".into()));
            }
            check_unitary(w, 1e-10)?;
            w.clone()
        }
        None => haar_unitary(n, seed, real),
    };
    let head = ResidualDecreaseVector::new(g.values()[..m].to_vec())?;
    let block = krylov_block(&head, &lambda[..m], seed)?;
    let mut b_full = Matrix::zeros(n, n);
    b_full.view_mut((0, 0), (m, m)).copy_from(&block);
    for i in m..n {
        b_full[(i, i)] = lambda[i];
    }
    let a = &w * b_full * w.adjoint();
    let b = &w * g.to_vector();

    let trace = mgmres(&a, &b, &WeightMatrix::identity(n), &GmresOptions::default())?;
    let realized = trace.breakdown.unwrap_or(trace.iterations);
    if realized != m {
        return Err(Error::BreakdownMismatch {
            expected: m,
            realized,
        });
    }
    Ok(ForgedInstance {
        construction: Construction::GpsSystem,
        seed,
        a,
        b,
        weight: None,
        preconditioner: None,
        prescription: Prescription {
            g: Some(g.clone()),
            lambda: lambda.to_vec(),
            ..Prescription::default()
        },
    })
}

/// Weight together with the link used to build it.
#[derive(Clone, Debug)]
pub struct WeightConstruction {
    pub weight: WeightMatrix,
    pub link: LinkMatrix,
    /// Completed phase-fixed I-GMRES residual basis `W`.
    pub basis: Matrix,
}

/// hpd `M = (W̃W̃*)⁻¹` with `W̃ = WT` such that M-GMRES on `(A, b)` realizes `ğ`.
pub fn weight_for_curve(a: &Matrix, b: &Vector, g_tilde: &ResidualDecreaseVector) -> Result<WeightConstruction> {
    let n = b.len();
    let opts = GmresOptions {
        complete_basis: true,
        ..GmresOptions::default()
    };
    let trace = mgmres(a, b, &WeightMatrix::identity(n), &opts)?;
    let m = trace.length();
    if g_tilde.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "ğ has dimension {}, system has {n}",
            g_tilde.dim()
        )));
    }
    if g_tilde.length() != m {
        return Err(Error::LengthMismatch {
            left: g_tilde.length(),
            right: m,
        });
    }
    let link = link_for_curves(&trace.g_realized, g_tilde)?;
    let s = link.inverse();
    let ws = &trace.basis * s.adjoint();
    let weight = WeightMatrix::new(numkernel::hermitian_part(&(&ws * ws.adjoint())))?;
    Ok(WeightConstruction {
        weight,
        link,
        basis: trace.basis,
    })
}

/// Singular values of a link compared with `1/√μ`, relative to the largest.
pub fn link_weight_mismatch(link: &LinkMatrix, weight: &WeightMatrix) -> f64 {
    let mut expect: Vec<f64> = weight.eigenvalues().iter().map(|mu| 1.0 / mu.sqrt()).collect();
    expect.sort_by(|a, b| b.total_cmp(a));
    let got = link.singular_values();
    if got.len() != expect.len() {
        return f64::INFINITY;
    }
    got.iter()
        .zip(&expect)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / expect[0]
}

/// System realizing `g` with I-GMRES and `ğ` with M-GMRES simultaneously.
pub fn simultaneous_system(
    g: &ResidualDecreaseVector,
    g_tilde: &ResidualDecreaseVector,
    weight: &WeightMatrix,
    lambda: &[C64],
    link: Option<&LinkMatrix>,
    seed: u64,
) -> Result<ForgedInstance> {
    let n = same_dim(g, g_tilde)?;
    if weight.dim() != n {
        return Err(Error::DimensionMismatch("weight dimension".into()));
    }
    let owned;
    let link = match link {
        Some(t) => t,
        None if n == 2 => {
            let mut sigma: Vec<f64> = weight.eigenvalues().iter().map(|mu| 1.0 / mu.sqrt()).collect();
            sigma.sort_by(|a, b| b.total_cmp(a));
            owned = link_with_singular_values(&sigma, Some(g), Some(g_tilde), seed)?;
            &owned
        }
        None => {
            return Err(Error::InfeasiblePair(
                "a link matrix must be supplied beyond n = 2".into(),
            ))
        }
    };
    if link.dim() != n {
        return Err(Error::DimensionMismatch("link dimension".into()));
    }
    let mismatch = link_weight_mismatch(link, weight);
    if mismatch > 1e-8 {
        return Err(Error::SingularValueMismatch(mismatch));
    }
    let residual = (g.to_vector() - link.apply(g_tilde)).norm() / g.norm();
    if residual > 1e-10 {
        return Err(Error::LinkMismatch(residual));
    }
    let tt = link.matrix() * link.matrix().adjoint();
    let q_t = hermitian_eig(&numkernel::hermitian_part(&tt))?.eigenvectors;
    let q_m = hermitian_eig(weight.matrix())?.eigenvectors;
    // Ascending μ pairs with descending 1/μ, so reverse the weight's basis.
    let q_m_rev = Matrix::from_fn(n, n, |i, j| q_m[(i, n - 1 - j)]);
    let w = q_m_rev * q_t.adjoint();
    let mut inst = gps_system(g, lambda, Some(&w), seed)?;
    inst.construction = Construction::SimultaneousSystem;
    inst.weight = Some(weight.matrix().clone());
    inst.prescription.g_tilde = Some(g_tilde.clone());
    Ok(inst)
}

/// `(H_L, H_R) = (P*, P^{-*})` with `M = P P*`.
pub fn split_preconditioner(weight: &WeightMatrix) -> Result<(Matrix, Matrix)> {
    let p_star = weight.factor().adjoint();
    let h_right = triangular_inverse(&p_star, Triangle::Upper)?;
    Ok((p_star, h_right))
}

/// `(A, b, H)` whose right-preconditioned GMRES realizes `g_R` and whose
/// left-preconditioned GMRES realizes `g_L`, with `eig(AH) = λ`.
pub fn left_right_pair(
    g_right: &ResidualDecreaseVector,
    g_left: &ResidualDecreaseVector,
    lambda: &[C64],
    seed: u64,
) -> Result<ForgedInstance> {
    let n = same_dim(g_right, g_left)?;
    let link = link_for_curves(g_right, g_left)?;
    let real = lambda.iter().all(|z| z.im == 0.0);
    let w = haar_unitary(n, seed, real);
    let inner = gps_system(g_right, lambda, Some(&w), seed)?;
    let ws = &w * link.inverse().adjoint();
    let weight = WeightMatrix::new(numkernel::hermitian_part(&(&ws * ws.adjoint())))?;
    let h = weight.factor().adjoint();
    let h_inv = triangular_inverse(&h, Triangle::Upper)?;
    Ok(ForgedInstance {
        construction: Construction::LeftRightPair,
        seed,
        a: inner.a * h_inv,
        b: inner.b,
        weight: None,
        preconditioner: Some(h),
        prescription: Prescription {
            g_right: Some(g_right.clone()),
            g_left: Some(g_left.clone()),
            lambda: lambda.to_vec(),
            ..Prescription::default()
        },
    })
}

/// Realized decreases at rounding level are exact stagnation steps.
fn snap_stagnation(g: &ResidualDecreaseVector) -> Result<ResidualDecreaseVector> {
    let floor = STAGNATION_THRESHOLD * g.norm();
    ResidualDecreaseVector::new(g.values().iter().map(|&v| if v <= floor { 0.0 } else { v }).collect())
}

/// Instance `(Ã, b̃, H̃)` whose left and right preconditioned curves are the
/// right and left curves of `(A, b, H)`, with the same spectrum of `AH`.
pub fn swap_left_right(a: &Matrix, b: &Vector, h: &Matrix, seed: u64) -> Result<ForgedInstance> {
    let n = check_square(a, "A")?;
    if h.nrows() != n || h.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch("preconditioner or right-hand side".into()));
    }
    if numkernel::inverse(h).is_err() {
        return Err(Error::SingularPreconditioner);
    }
    let a_left = h * a;
    let b_left = h * b;
    let identity = WeightMatrix::identity(n);
    let opts = GmresOptions {
        complete_basis: true,
        ..GmresOptions::default()
    };
    let left = mgmres(&a_left, &b_left, &identity, &opts)?;
    let right = mgmres(&(a * h), b, &identity, &GmresOptions::default())?;
    if left.length() != right.length() {
        return Err(Error::LengthMismatch {
            left: left.length(),
            right: right.length(),
        });
    }
    let g_left = snap_stagnation(&left.g_realized)?;
    let g_right = snap_stagnation(&right.g_realized)?;
    let link = link_for_curves(&g_left, &g_right)?;
    let wt = &left.basis * link.matrix();
    let h_tilde = link.inverse() * left.basis.adjoint();
    let lambda = numkernel::general_eig(&(a * h))?;
    Ok(ForgedInstance {
        construction: Construction::SwapLeftRight,
        seed,
        a: &a_left * wt,
        b: b_left,
        weight: None,
        preconditioner: Some(h_tilde),
        prescription: Prescription {
            g_right: Some(g_left),
            g_left: Some(g_right),
            lambda,
            ..Prescription::default()
        },
    })
}
