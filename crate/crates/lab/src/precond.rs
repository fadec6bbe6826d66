//! Left versus right preconditioning on a single system.

use gmres_forge_core::krylov::{mgmres, preconditioned_gmres, GmresOptions, PreconditionedTrace, WeightMatrix};
use gmres_forge_core::numkernel::{
    self, check_square, singular_values, solve, triangular_inverse, Matrix, Triangle, Vector, C64,
};
use gmres_forge_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::table::CurveTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PreconditionerKind {
    SymPart,
    Ilu0,
    Supplied,
}

/// `H = ((A + A*)/2)⁻¹`.
pub fn symmetric_part_inverse(a: &Matrix) -> Result<Matrix> {
    check_square(a, "A")?;
    let s = numkernel::hermitian_part(a);
    match numkernel::inverse(&s) {
        Ok(h) => Ok(h),
        Err(Error::SingularMatrix) => Err(LabError::SingularSymmetricPart),
        Err(e) => Err(e.into()),
    }
}

/// Zero-fill incomplete LU on the nonzero pattern of `A`, returning
/// `(L, U)` with unit lower `L`.
pub fn ilu0(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let n = check_square(a, "A")?;
    let zero = C64::new(0.0, 0.0);
    let pattern: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)] != zero).collect()).collect();
    let mut w = a.clone();
    for i in 1..n {
        for k in 0..i {
            if !pattern[i][k] {
                continue;
            }
            let pivot = w[(k, k)];
            if pivot == zero {
                return Err(Error::SingularPreconditioner.into());
            }
            let factor = w[(i, k)] / pivot;
            w[(i, k)] = factor;
            for j in k + 1..n {
                if pattern[i][j] {
                    let u = w[(k, j)];
                    w[(i, j)] -= factor * u;
                }
            }
        }
    }
    if (0..n).any(|i| w[(i, i)] == zero) {
        return Err(Error::SingularPreconditioner.into());
    }
    let l = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => w[(i, j)],
        std::cmp::Ordering::Equal => C64::new(1.0, 0.0),
        std::cmp::Ordering::Less => zero,
    });
    let u = Matrix::from_fn(n, n, |i, j| if i <= j { w[(i, j)] } else { zero });
    Ok((l, u))
}

/// `H = U⁻¹L⁻¹` from [`ilu0`].
pub fn ilu0_inverse(a: &Matrix) -> Result<Matrix> {
    let (l, u) = ilu0(a)?;
    let u_inv = triangular_inverse(&u, Triangle::Upper)?;
    let l_inv = triangular_inverse(&l, Triangle::Lower)?;
    Ok(u_inv * l_inv)
}

pub fn build_preconditioner(a: &Matrix, kind: PreconditionerKind, supplied: Option<&Matrix>) -> Result<Matrix> {
    match kind {
        PreconditionerKind::SymPart => symmetric_part_inverse(a),
        PreconditionerKind::Ilu0 => ilu0_inverse(a),
        PreconditionerKind::Supplied => supplied
            .cloned()
            .ok_or_else(|| LabError::Config("a supplied preconditioner needs a matrix".into())),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PrecondReport {
    pub n: usize,
    pub preconditioner: PreconditionerKind,
    pub seed: u64,
    pub kappa_ha: f64,
    pub kappa_ah: f64,
    pub h_sigma_min: f64,
    pub h_sigma_max: f64,
    pub norm_ha: f64,
    pub norm_ah: f64,
    /// Relative residual of unpreconditioned GMRES at iteration n − 1.
    pub unpreconditioned_residual_at_n_minus_1: f64,
    /// First iteration at which the minimized relative norm is ≤ 1e-8.
    pub left_iterations_to_1e8: Option<usize>,
    pub right_iterations_to_1e8: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct PrecondStudy {
    pub table: CurveTable,
    pub report: PrecondReport,
    pub left: PreconditionedTrace,
    pub right: PreconditionedTrace,
}

fn relative(v: &[f64]) -> Vec<f64> {
    let r0 = v.first().copied().unwrap_or(1.0);
    v.iter().map(|x| x / r0).collect()
}

pub fn first_below(v: &[f64], tol: f64) -> Option<usize> {
    v.iter().position(|&x| x <= tol)
}

pub fn random_rhs(n: usize, seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Vector::from_fn(n, |_, _| C64::new(rng.random_range(-1.0..1.0), 0.0))
}

/// Runs unpreconditioned, left- and right-preconditioned GMRES with a
/// seeded random right-hand side. Every column is relative to its own
/// initial value; errors are relative to a direct solve.
pub fn precond_study(a: &Matrix, h: &Matrix, kind: PreconditionerKind, seed: u64) -> Result<PrecondStudy> {
    let n = check_square(a, "A")?;
    let b = random_rhs(n, seed);
    let exact = solve(a, &Matrix::from_columns(std::slice::from_ref(&b)))?.column(0).clone_owned();
    let xnorm = exact.norm();
    let opts = GmresOptions::default();
    let plain = mgmres(a, &b, &WeightMatrix::identity(n), &opts)?;
    let left = preconditioned_gmres(a, &b, Some(h), None, &opts)?;
    let right = preconditioned_gmres(a, &b, None, Some(h), &opts)?;
    let errors = |t: &PreconditionedTrace| -> Vec<f64> {
        t.iterates.iter().map(|x| (&exact - x).norm() / xnorm).collect()
    };

    let mut table = CurveTable::new();
    table.push("unpreconditioned", relative(&plain.residual_norms));
    table.push("left_preconditioned_residual", relative(left.minimized_norms()));
    table.push("left_error", errors(&left));
    table.push("left_unpreconditioned_residual", relative(&left.residual_norms));
    table.push("right_unpreconditioned_residual", relative(right.minimized_norms()));
    table.push("right_error", errors(&right));
    table.push("right_preconditioned_residual", relative(&right.preconditioned_residual_norms));

    let ha = h * a;
    let ah = a * h;
    let s_ha = singular_values(&ha)?;
    let s_ah = singular_values(&ah)?;
    let s_h = singular_values(h)?;
    let cond = |s: &[f64]| s[0] / s[s.len() - 1];
    let plain_rel = relative(&plain.residual_norms);
    let report = PrecondReport {
        n,
        preconditioner: kind,
        seed,
        kappa_ha: cond(&s_ha),
        kappa_ah: cond(&s_ah),
        h_sigma_min: s_h[s_h.len() - 1],
        h_sigma_max: s_h[0],
        norm_ha: s_ha[0],
        norm_ah: s_ah[0],
        unpreconditioned_residual_at_n_minus_1: plain_rel.get(n - 1).copied().unwrap_or(0.0),
        left_iterations_to_1e8: first_below(&relative(left.minimized_norms()), 1e-8),
        right_iterations_to_1e8: first_below(&relative(right.minimized_norms()), 1e-8),
    };
    Ok(PrecondStudy {
        table,
        report,
        left,
        right,
    })
}
