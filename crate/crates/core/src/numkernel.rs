//! Dense complex linear algebra used by the solvers and constructions.
//!
//! Thin checked wrappers around `nalgebra` factorizations with the
//! normalizations the rest of the crate relies on: QR with a positive real
//! diagonal, singular values in descending order, Hermitian eigenvalues in
//! ascending order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

const MAX_SWEEPS: usize = 10_000;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Builds a matrix from rows, rejecting ragged input and non-finite entries.
pub fn matrix_from_rows(rows: &[Vec<C64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch("ragged rows".into()));
    }
    let m = Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    check_finite(&m, "matrix")?;
    Ok(m)
}

pub fn real_matrix(nrows: usize, ncols: usize, row_major: &[f64]) -> Result<Matrix> {
    if row_major.len() != nrows * ncols {
        return Err(Error::DimensionMismatch(format!(
            "{} entries for a {nrows}x{ncols} matrix",
            row_major.len()
        )));
    }
    let m = Matrix::from_fn(nrows, ncols, |i, j| c(row_major[i * ncols + j]));
    check_finite(&m, "matrix")?;
    Ok(m)
}

pub fn real_vector(v: &[f64]) -> Vector {
    Vector::from_iterator(v.len(), v.iter().map(|&x| c(x)))
}

pub fn diag_real(d: &[f64]) -> Matrix {
    Matrix::from_diagonal(&real_vector(d))
}

pub fn check_finite(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn check_square(m: &Matrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// ‖a − b‖_F / ‖b‖_F, or the absolute difference when `b` vanishes.
pub fn relative_residual(a: &Matrix, b: &Matrix) -> f64 {
    let d = (a - b).norm();
    let s = b.norm();
    if s > 0.0 {
        d / s
    } else {
        d
    }
}

pub fn hermitian_part(m: &Matrix) -> Matrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn check_hermitian(m: &Matrix, tol: f64) -> Result<()> {
    check_square(m, "matrix")?;
    let scale = m.norm();
    let asym = (m - m.adjoint()).norm();
    let rel = if scale > 0.0 { asym / scale } else { asym };
    if rel > tol {
        return Err(Error::NotHermitian(rel));
    }
    Ok(())
}

pub fn check_unitary(u: &Matrix, tol: f64) -> Result<()> {
    let n = check_square(u, "basis")?;
    let res = (u.adjoint() * u - Matrix::identity(n, n)).norm();
    if res > tol {
        return Err(Error::NotUnitary(res));
    }
    Ok(())
}

pub struct Qr {
    pub q: Matrix,
    pub r: Matrix,
}

/// Thin QR of a tall matrix.
///
/// Rows are factored in order of decreasing norm and restored afterwards;
/// this keeps row-graded inputs accurate and leaves R unchanged.
pub fn qr(a: &Matrix, positive_diag: bool) -> Result<Qr> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::DimensionMismatch(format!("QR of a wide {m}x{n} matrix")));
    }
    check_finite(a, "QR input")?;
    let norms: Vec<f64> = (0..m).map(|i| a.row(i).norm()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let permuted = Matrix::from_fn(m, n, |i, j| a[(order[i], j)]);

    let f = permuted.qr();
    let qp = f.q();
    let mut r = f.r();
    let mut q = Matrix::zeros(m, n);
    for (i, &src) in order.iter().enumerate() {
        q.row_mut(src).copy_from(&qp.row(i));
    }

    let scale = a.norm();
    let tol = f64::EPSILON * (m.max(n) as f64) * scale;
    for k in 0..n {
        let d = r[(k, k)];
        if d.norm() <= tol || d.norm() == 0.0 {
            return Err(Error::RankDeficient { column: k });
        }
        if positive_diag {
            let phase = d / d.norm();
            let conj = phase.conj();
            for j in k..n {
                r[(k, j)] *= conj;
            }
            for i in 0..m {
                q[(i, k)] *= phase;
            }
            r[(k, k)] = c(d.norm());
        }
    }
    Ok(Qr { q, r })
}

pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v_t: Matrix,
}

/// Full SVD with singular values in descending order.
pub fn svd(a: &Matrix) -> Result<Svd> {
    check_finite(a, "SVD input")?;
    let f = a
        .clone()
        .try_svd(true, true, f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure("SVD"))?;
    let u = f.u.ok_or(Error::ConvergenceFailure("SVD left vectors"))?;
    let v_t = f.v_t.ok_or(Error::ConvergenceFailure("SVD right vectors"))?;
    let s: Vec<f64> = f.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let u = Matrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v_t = Matrix::from_fn(order.len(), v_t.ncols(), |i, j| v_t[(order[i], j)]);
    let singular_values = order.iter().map(|&i| s[i]).collect();
    Ok(Svd {
        u,
        singular_values,
        v_t,
    })
}

pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    check_finite(a, "SVD input")?;
    let s = a
        .clone()
        .try_svd(false, false, f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure("SVD"))?
        .singular_values;
    let mut s: Vec<f64> = s.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Spectral condition number; infinite for singular input.
pub fn cond2(a: &Matrix) -> Result<f64> {
    let s = singular_values(a)?;
    let lo = *s.last().unwrap_or(&0.0);
    Ok(if lo > 0.0 { s[0] / lo } else { f64::INFINITY })
}

pub fn norm2(a: &Matrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Lower Cholesky factor of an hpd matrix, M = L L*.
#[derive(Clone, Debug)]
pub struct Cholesky {
    pub l: Matrix,
}

impl Cholesky {
    pub fn new(m: &Matrix) -> Result<Self> {
        check_finite(m, "Cholesky input")?;
        check_hermitian(m, 1e-12)?;
        let l = hermitian_part(m)
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?
            .unpack();
        if (0..l.nrows()).any(|i| l[(i, i)].re <= 0.0 || l[(i, i)].im.abs() > 1e-12 * l[(i, i)].re) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Cholesky { l })
    }

    /// Solves M x = b.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        let y = triangular_solve(&self.l, b, Triangle::Lower)?;
        triangular_solve(&self.l.adjoint(), &y, Triangle::Upper)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.l.nrows();
        self.solve(&Matrix::identity(n, n))
    }
}

pub fn cholesky(m: &Matrix) -> Result<Cholesky> {
    Cholesky::new(m)
}

pub struct HermitianEig {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

pub fn hermitian_eig(m: &Matrix) -> Result<HermitianEig> {
    check_finite(m, "eigenvalue input")?;
    check_hermitian(m, 1e-12)?;
    let f = hermitian_part(m)
        .try_symmetric_eigen(f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure("Hermitian eigensolver"))?;
    let vals: Vec<f64> = f.eigenvalues.iter().copied().collect();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let v = &f.eigenvectors;
    Ok(HermitianEig {
        eigenvalues: order.iter().map(|&i| vals[i]).collect(),
        eigenvectors: Matrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, order[j])]),
    })
}

/// Eigenvalues of a general square matrix from its complex Schur form.
pub fn general_eig(a: &Matrix) -> Result<Vec<C64>> {
    check_square(a, "matrix")?;
    check_finite(a, "eigenvalue input")?;
    let (_, t) = a
        .clone()
        .try_schur(f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure("Schur decomposition"))?
        .unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Largest distance after pairing two spectra greedily, closest pairs first.
pub fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut left = a.len();
    for (d, i, j) in pairs {
        if left == 0 {
            break;
        }
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
            left -= 1;
        }
    }
    worst
}

/// Like [`spectrum_distance`], relative to the largest modulus in `b`.
pub fn relative_spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d = spectrum_distance(a, b);
    if scale > 0.0 {
        d / scale
    } else {
        d
    }
}

/// Haar-distributed unitary (orthogonal when `real`) matrix from a seed.
pub fn haar_unitary(n: usize, seed: u64, real: bool) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with(n, &mut rng, real)
}

pub fn haar_unitary_with<R: Rng>(n: usize, rng: &mut R, real: bool) -> Matrix {
    loop {
        let z = Matrix::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            if real {
                c(re)
            } else {
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re, im) / std::f64::consts::SQRT_2
            }
        });
        if let Ok(f) = qr(&z, true) {
            return f.q;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Triangle {
    Upper,
    Lower,
}

/// Solves T X = B for triangular T by substitution.
pub fn triangular_solve(t: &Matrix, b: &Matrix, side: Triangle) -> Result<Matrix> {
    let n = check_square(t, "triangular matrix")?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, expected {n}",
            b.nrows()
        )));
    }
    for i in 0..n {
        if t[(i, i)].norm() == 0.0 {
            return Err(Error::SingularTriangular { index: i });
        }
    }
    let mut x = b.clone();
    for col in 0..b.ncols() {
        match side {
            Triangle::Upper => {
                for i in (0..n).rev() {
                    let mut s = x[(i, col)];
                    for j in i + 1..n {
                        s -= t[(i, j)] * x[(j, col)];
                    }
                    x[(i, col)] = s / t[(i, i)];
                }
            }
            Triangle::Lower => {
                for i in 0..n {
                    let mut s = x[(i, col)];
                    for j in 0..i {
                        s -= t[(i, j)] * x[(j, col)];
                    }
                    x[(i, col)] = s / t[(i, i)];
                }
            }
        }
    }
    Ok(x)
}

pub fn triangular_inverse(t: &Matrix, side: Triangle) -> Result<Matrix> {
    let n = check_square(t, "triangular matrix")?;
    triangular_solve(t, &Matrix::identity(n, n), side)
}

/// Solves A X = B with partial-pivoting LU.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = check_square(a, "matrix")?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, expected {n}",
            b.nrows()
        )));
    }
    check_finite(a, "matrix")?;
    let lu = a.clone().lu();
    let u = lu.u();
    if (0..n).any(|i| u[(i, i)].norm() == 0.0) {
        return Err(Error::SingularMatrix);
    }
    let x = lu.solve(b).ok_or(Error::SingularMatrix)?;
    check_finite(&x, "solution").map_err(|_| Error::SingularMatrix)?;
    Ok(x)
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let n = check_square(a, "matrix")?;
    solve(a, &Matrix::identity(n, n))
}
