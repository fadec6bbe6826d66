//! GMRES in a weighted inner product `⟨x,y⟩_M = y*Mx`, zero initial guess.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::curves::{ConvergenceCurve, ResidualDecreaseVector};
use crate::error::{Error, Result};
use crate::numkernel::{
    self, check_finite, check_square, hermitian_eig, Cholesky, Matrix, Vector, C64,
};

/// Arnoldi breakdown threshold relative to ‖b‖_M.
pub const BREAKDOWN_TOL: f64 = 1e-13;

/// Hermitian positive definite weight with its Cholesky factor and spectrum.
#[derive(Clone, Debug)]
pub struct WeightMatrix {
    m: Matrix,
    chol: Cholesky,
    eigenvalues: Vec<f64>,
    identity: bool,
}

impl WeightMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        check_square(&m, "weight")?;
        let chol = Cholesky::new(&m)?;
        let eigenvalues = hermitian_eig(&m)?.eigenvalues;
        if eigenvalues.first().is_some_and(|&mu| mu <= 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let n = m.nrows();
        let identity = m == Matrix::identity(n, n);
        let m = numkernel::hermitian_part(&m);
        Ok(WeightMatrix {
            m,
            chol,
            eigenvalues,
            identity,
        })
    }

    pub fn identity(n: usize) -> Self {
        WeightMatrix {
            m: Matrix::identity(n, n),
            chol: Cholesky {
                l: Matrix::identity(n, n),
            },
            eigenvalues: vec![1.0; n],
            identity: true,
        }
    }

    /// `Q diag(μ) Q*` for unitary `Q`.
    pub fn from_eigen(q: &Matrix, mu: &[f64]) -> Result<Self> {
        if q.ncols() != mu.len() {
            return Err(Error::DimensionMismatch("eigenvector count".into()));
        }
        if let Some(i) = mu.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::InvalidDecrease(format!("eigenvalue {i} is not positive")));
        }
        let m = q * numkernel::diag_real(mu) * q.adjoint();
        Self::new(numkernel::hermitian_part(&m))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    /// Lower triangular `P` with `M = P P*`.
    pub fn factor(&self) -> &Matrix {
        &self.chol.l
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn condition(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1] / self.eigenvalues[0]
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        if self.identity {
            v.clone()
        } else {
            &self.m * v
        }
    }

    /// `⟨x,y⟩_M = y* M x`.
    pub fn inner(&self, x: &Vector, y: &Vector) -> C64 {
        y.dotc(&self.apply(x))
    }

    pub fn norm(&self, x: &Vector) -> f64 {
        if self.identity {
            x.norm()
        } else {
            self.inner(x, x).re.max(0.0).sqrt()
        }
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if self.identity {
            return Ok(self.m.clone());
        }
        self.chol.inverse().map(|m| numkernel::hermitian_part(&m))
    }
}

#[derive(Clone, Debug)]
pub struct GmresOptions {
    /// Stop once ‖r_i‖_M ≤ tol·‖b‖_M; zero runs to breakdown.
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub keep_residuals: bool,
    pub keep_iterates: bool,
    /// Extend the nested residual basis to an n×n M-unitary matrix.
    pub complete_basis: bool,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            tol: 0.0,
            max_iter: None,
            keep_residuals: false,
            keep_iterates: false,
            complete_basis: false,
        }
    }
}

impl GmresOptions {
    pub fn full() -> Self {
        GmresOptions {
            keep_residuals: true,
            keep_iterates: true,
            complete_basis: true,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct GmresTrace {
    /// ‖r_0‖_M, …, ‖r_k‖_M; the last entry is exactly zero after breakdown.
    pub residual_norms: Vec<f64>,
    /// Phase-fixed M-orthonormal nested basis of A𝒦_k(A,b), optionally
    /// completed to n columns.
    pub basis: Matrix,
    /// Decreases from the Givens recurrence, padded to dimension n.
    pub g_realized: ResidualDecreaseVector,
    /// Breakdown index m, if breakdown was reached.
    pub breakdown: Option<usize>,
    pub iterations: usize,
    pub iterates: Option<Vec<Vector>>,
    pub residual_vectors: Option<Vec<Vector>>,
}

impl GmresTrace {
    pub fn curve(&self) -> Result<ConvergenceCurve> {
        if self.breakdown.is_none() {
            return Err(Error::InvalidCurve("GMRES stopped before breakdown".into()));
        }
        ConvergenceCurve::new(self.residual_norms.clone())
    }

    /// Breakdown index, or the number of iterations performed.
    pub fn length(&self) -> usize {
        self.breakdown.unwrap_or(self.iterations)
    }

    pub fn solution(&self) -> Option<&Vector> {
        self.iterates.as_ref().and_then(|x| x.last())
    }
}

fn check_system(a: &Matrix, b: &Vector) -> Result<usize> {
    let n = check_square(a, "A")?;
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "b has length {}, A is {n}x{n}",
            b.len()
        )));
    }
    check_finite(a, "A")?;
    if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("b"));
    }
    Ok(n)
}

/// Complex Givens rotation `[c s; -conj(s) c]` annihilating `h` below `a`.
fn givens(a: C64, h: f64) -> (f64, C64) {
    if h == 0.0 {
        (1.0, C64::new(0.0, 0.0))
    } else if a.norm() == 0.0 {
        (0.0, C64::new(1.0, 0.0))
    } else {
        let t = a.norm().hypot(h);
        (a.norm() / t, (a / a.norm()) * (h / t))
    }
}

/// Weighted GMRES with zero initial guess.
pub fn mgmres(a: &Matrix, b: &Vector, w: &WeightMatrix, opts: &GmresOptions) -> Result<GmresTrace> {
    let n = check_system(a, b)?;
    if w.dim() != n {
        return Err(Error::DimensionMismatch("weight dimension".into()));
    }
    let beta = w.norm(b);
    if beta == 0.0 {
        return Err(Error::ZeroInitialResidual);
    }
    let max_iter = opts.max_iter.unwrap_or(n).min(n);

    let mut v: Vec<Vector> = vec![b.unscale(beta)];
    let mut mv: Vec<Vector> = Vec::new();
    if !w.is_identity() {
        mv.push(w.apply(&v[0]));
    }
    // Columns of the rotated Hessenberg matrix, i.e. of R.
    let mut r_cols: Vec<Vec<C64>> = Vec::new();
    let mut rot: Vec<(f64, C64)> = Vec::new();
    let mut gamma: Vec<C64> = vec![C64::new(beta, 0.0)];
    let mut norms = vec![beta];
    let mut decreases: Vec<f64> = Vec::new();
    let mut breakdown = None;
    let mut iterates = opts.keep_iterates.then(Vec::new);
    let mut residuals = opts.keep_residuals.then(|| vec![b.clone()]);
    let track_x = opts.keep_iterates || opts.keep_residuals;
    if let Some(x) = iterates.as_mut() {
        x.push(Vector::zeros(n));
    }

    let mut j = 0;
    while j < max_iter {
        let mut cand = a * &v[j];
        let mut h = vec![C64::new(0.0, 0.0); j + 2];
        for _pass in 0..2 {
            for i in 0..=j {
                let basis_m = if w.is_identity() { &v[i] } else { &mv[i] };
                let coef = basis_m.dotc(&cand);
                cand.axpy(-coef, &v[i], C64::new(1.0, 0.0));
                h[i] += coef;
            }
        }
        let mcand = w.apply(&cand);
        let hnext = if w.is_identity() {
            cand.norm()
        } else {
            cand.dotc(&mcand).re.max(0.0).sqrt()
        };
        let exhausted = hnext <= BREAKDOWN_TOL * beta || j + 1 == n;
        let hnext = if exhausted { 0.0 } else { hnext };
        h[j + 1] = C64::new(hnext, 0.0);

        for (i, &(c, s)) in rot.iter().enumerate() {
            let (p, q) = (h[i], h[i + 1]);
            h[i] = p * c + s * q;
            h[i + 1] = -s.conj() * p + q * c;
        }
        let hcol_norm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let (c, s) = givens(h[j], hnext);
        let diag = h[j] * c + s * hnext;
        if exhausted && diag.norm() <= BREAKDOWN_TOL * hcol_norm.max(f64::MIN_POSITIVE) {
            return Err(Error::SingularOperator { iteration: j + 1 });
        }
        h[j] = diag;
        h.truncate(j + 1);
        rot.push((c, s));
        r_cols.push(h);

        let gj = gamma[j];
        gamma[j] = gj * c;
        gamma.push(-s.conj() * gj);
        let prev = norms[j];
        let (dec, res) = if exhausted { (prev, 0.0) } else { (c * prev, s.norm() * prev) };
        decreases.push(dec);
        norms.push(res);

        if track_x {
            let y = solve_upper(&r_cols, &gamma[..=j]);
            let mut x = Vector::zeros(n);
            for (i, yi) in y.iter().enumerate() {
                x.axpy(*yi, &v[i], C64::new(1.0, 0.0));
            }
            if let Some(r) = residuals.as_mut() {
                r.push(b - a * &x);
            }
            if let Some(xs) = iterates.as_mut() {
                xs.push(x);
            }
        }

        j += 1;
        if exhausted {
            breakdown = Some(j);
            break;
        }
        let next = cand.unscale(hnext);
        if !w.is_identity() {
            mv.push(mcand.unscale(hnext));
        }
        v.push(next);
        if res <= opts.tol * beta {
            break;
        }
    }

    let k = j;
    let mut basis = residual_basis(&v, &rot, k, breakdown.is_some(), n);
    for col in 0..k {
        let wc = basis.column(col).clone_owned();
        let ip = w.inner(b, &wc);
        let phase = if ip.norm() > 0.0 {
            ip / ip.norm()
        } else if gamma[col].norm() > 0.0 {
            gamma[col] / gamma[col].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            basis[(i, col)] *= phase;
        }
    }
    if opts.complete_basis {
        basis = complete_basis(&basis, w);
    }
    let mut g = decreases;
    g.resize(n, 0.0);
    Ok(GmresTrace {
        residual_norms: norms,
        basis,
        g_realized: ResidualDecreaseVector::new(g)?,
        breakdown,
        iterations: k,
        iterates,
        residual_vectors: residuals,
    })
}

fn solve_upper(r_cols: &[Vec<C64>], rhs: &[C64]) -> Vec<C64> {
    let k = rhs.len();
    let mut y = rhs.to_vec();
    for i in (0..k).rev() {
        let mut s = y[i];
        for jj in i + 1..k {
            s -= r_cols[jj][i] * y[jj];
        }
        y[i] = s / r_cols[i][i];
    }
    y
}

/// `V_{k+1} Ω* [I_k; 0]` where Ω is the product of the Givens rotations.
fn residual_basis(v: &[Vector], rot: &[(f64, C64)], k: usize, broke: bool, n: usize) -> Matrix {
    let rows = if broke { k } else { k + 1 };
    let mut x = Matrix::zeros(rows, k);
    for i in 0..k {
        x[(i, i)] = C64::new(1.0, 0.0);
    }
    for (i, &(c, s)) in rot.iter().enumerate().take(k).rev() {
        if i + 1 >= rows {
            continue;
        }
        for col in 0..k {
            let p = x[(i, col)];
            let q = x[(i + 1, col)];
            x[(i, col)] = p * c - s * q;
            x[(i + 1, col)] = s.conj() * p + q * c;
        }
    }
    let mut w = Matrix::zeros(n, k);
    for col in 0..k {
        for (i, vi) in v.iter().enumerate().take(rows) {
            let coef = x[(i, col)];
            if coef.norm() != 0.0 {
                for r in 0..n {
                    w[(r, col)] += vi[r] * coef;
                }
            }
        }
    }
    w
}

/// Extends M-orthonormal columns to an n×n M-unitary matrix using seeded
/// Gaussian candidates orthogonalized twice.
pub fn complete_basis(basis: &Matrix, w: &WeightMatrix) -> Matrix {
    let n = basis.nrows();
    let mut cols: Vec<Vector> = (0..basis.ncols()).map(|j| basis.column(j).clone_owned()).collect();
    let mut mcols: Vec<Vector> = cols.iter().map(|c| w.apply(c)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    while cols.len() < n {
        let mut cand = Vector::from_fn(n, |_, _| {
            use rand::Rng;
            let re: f64 = rng.sample(rand_distr::StandardNormal);
            let im: f64 = rng.sample(rand_distr::StandardNormal);
            C64::new(re, im)
        });
        let before = w.norm(&cand);
        for _pass in 0..2 {
            for (c, mc) in cols.iter().zip(&mcols) {
                let coef = mc.dotc(&cand);
                cand.axpy(-coef, c, C64::new(1.0, 0.0));
            }
        }
        let after = w.norm(&cand);
        if after <= 1e-6 * before {
            continue;
        }
        let cand = cand.unscale(after);
        mcols.push(w.apply(&cand));
        cols.push(cand);
    }
    Matrix::from_columns(&cols)
}

/// Phase-fixed M-orthonormal nested basis of A𝒦_m(A,b).
pub fn nested_residual_basis(a: &Matrix, b: &Vector, w: &WeightMatrix, complete: bool) -> Result<Matrix> {
    let opts = GmresOptions {
        complete_basis: complete,
        ..GmresOptions::default()
    };
    Ok(mgmres(a, b, w, &opts)?.basis)
}

#[derive(Clone, Debug)]
pub struct PreconditionedTrace {
    /// I-GMRES on `(H_L A H_R, H_L b)`; its norms are the minimized ‖H_L r_i‖.
    pub trace: GmresTrace,
    /// Iterates `x_i = H_R u_i` of the original system.
    pub iterates: Vec<Vector>,
    /// ‖r_i‖_I with `r_i = b − A x_i`.
    pub residual_norms: Vec<f64>,
    /// ‖H r_i‖_I with `H = H_R H_L`.
    pub preconditioned_residual_norms: Vec<f64>,
}

impl PreconditionedTrace {
    pub fn minimized_norms(&self) -> &[f64] {
        &self.trace.residual_norms
    }
}

fn check_preconditioner(h: &Matrix, n: usize) -> Result<()> {
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch("preconditioner dimension".into()));
    }
    check_finite(h, "preconditioner")?;
    let lu = h.clone().lu();
    let u = lu.u();
    let scale = (0..n).map(|i| u[(i, i)].norm()).fold(0.0, f64::max);
    if (0..n).any(|i| u[(i, i)].norm() <= 1e-15 * scale) {
        return Err(Error::SingularPreconditioner);
    }
    Ok(())
}

/// I-GMRES on `H_L A H_R u = H_L b`, `x = H_R u`.
pub fn preconditioned_gmres(
    a: &Matrix,
    b: &Vector,
    h_left: Option<&Matrix>,
    h_right: Option<&Matrix>,
    opts: &GmresOptions,
) -> Result<PreconditionedTrace> {
    let n = check_system(a, b)?;
    for h in [h_left, h_right].into_iter().flatten() {
        check_preconditioner(h, n)?;
    }
    let mut op = a.clone();
    let mut rhs = b.clone();
    if let Some(hl) = h_left {
        op = hl * op;
        rhs = hl * rhs;
    }
    if let Some(hr) = h_right {
        op *= hr;
    }
    let inner_opts = GmresOptions {
        keep_iterates: true,
        ..opts.clone()
    };
    let mut trace = mgmres(&op, &rhs, &WeightMatrix::identity(n), &inner_opts)?;
    let us = trace.iterates.take().unwrap_or_default();
    let iterates: Vec<Vector> = us
        .into_iter()
        .map(|u| match h_right {
            Some(hr) => hr * u,
            None => u,
        })
        .collect();
    let mut residual_norms = Vec::with_capacity(iterates.len());
    let mut preconditioned = Vec::with_capacity(iterates.len());
    for x in &iterates {
        let r = b - a * x;
        residual_norms.push(r.norm());
        let mut hr_r = r;
        if let Some(hl) = h_left {
            hr_r = hl * hr_r;
        }
        if let Some(hr) = h_right {
            hr_r = hr * hr_r;
        }
        preconditioned.push(hr_r.norm());
    }
    if opts.keep_iterates {
        trace.iterates = Some(iterates.clone());
    }
    Ok(PreconditionedTrace {
        trace,
        iterates,
        residual_norms,
        preconditioned_residual_norms: preconditioned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{haar_unitary, real_vector};
    use rand::Rng;

    fn random_system(n: usize, seed: u64) -> (Matrix, Vector) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Matrix::from_fn(n, n, |_, _| {
            C64::new(rng.sample(rand_distr::StandardNormal), rng.sample(rand_distr::StandardNormal))
        });
        for i in 0..n {
            a[(i, i)] += C64::new(2.0 * (n as f64).sqrt(), 0.0);
        }
        let b = Vector::from_fn(n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (a, b)
    }

    fn random_weight(n: usize, seed: u64, decades: f64) -> WeightMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let mu: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(0.0..decades))).collect();
        WeightMatrix::from_eigen(&haar_unitary(n, seed, false), &mu).unwrap()
    }

    #[test]
    fn identity_converges_in_one_step() {
        let b = real_vector(&[3.0, 4.0]);
        let t = mgmres(&Matrix::identity(2, 2), &b, &WeightMatrix::identity(2), &GmresOptions::default()).unwrap();
        assert_eq!(t.residual_norms, vec![5.0, 0.0]);
        assert_eq!(t.breakdown, Some(1));
        let w = t.basis.column(0).clone_owned();
        assert!((w - b.unscale(5.0)).norm() < 1e-15);
    }

    #[test]
    fn trace_invariants() {
        for seed in 0..10 {
            let n = 12;
            let (a, b) = random_system(n, seed);
            let w = random_weight(n, seed, 4.0);
            let t = mgmres(&a, &b, &w, &GmresOptions::full()).unwrap();
            let m = t.breakdown.unwrap();
            assert_eq!(m, n);
            let gram = t.basis.adjoint() * w.matrix() * &t.basis;
            assert!((gram - Matrix::identity(n, n)).norm() < 1e-10);
            let bm = w.norm(&b);
            let res = t.residual_vectors.as_ref().unwrap();
            let mut proj = Vector::zeros(n);
            for i in 0..m {
                let wi = t.basis.column(i).clone_owned();
                let ip = w.inner(&b, &wi);
                assert!(ip.im.abs() < 1e-12 * bm && ip.re >= -1e-12 * bm);
                assert!((ip.re - t.g_realized.values()[i]).abs() < 1e-10 * bm);
                proj += wi * ip;
                let ri = &res[i + 1];
                assert!((&b - ri - &proj).norm() <= 1e-10 * bm * (1.0 + w.condition().sqrt()));
                assert!((w.norm(ri) - t.residual_norms[i + 1]).abs() <= 1e-10 * bm);
                let lhs = t.residual_norms[i].powi(2) - t.residual_norms[i + 1].powi(2);
                assert!((lhs - ip.norm_sqr()).abs() <= 1e-10 * bm * bm);
            }
            assert!(t.residual_norms.windows(2).all(|p| p[1] <= p[0]));
        }
    }

    #[test]
    fn minimization_against_random_krylov_vectors() {
        let n = 10;
        let (a, b) = random_system(n, 77);
        let w = random_weight(n, 77, 3.0);
        let t = mgmres(&a, &b, &w, &GmresOptions::full()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut kry = vec![b.clone()];
        for _ in 1..n {
            let next = &a * kry.last().unwrap();
            kry.push(next);
        }
        for i in 1..n {
            for _ in 0..100 {
                let mut x = Vector::zeros(n);
                let xi = t.iterates.as_ref().unwrap()[i].clone();
                for kv in kry.iter().take(i) {
                    let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    x.axpy(c * 1e-2 / kv.norm(), kv, C64::new(1.0, 0.0));
                }
                let cand = &xi + x;
                let rn = w.norm(&(&b - &a * cand));
                assert!(t.residual_norms[i] <= rn + 1e-12 * t.residual_norms[0]);
            }
        }
    }

    #[test]
    fn early_breakdown_and_uniqueness() {
        // b in a 3-dimensional invariant subspace.
        let n = 6;
        let q = haar_unitary(n, 4, false);
        let d = numkernel::diag_real(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let a = &q * d * q.adjoint();
        let b = q.columns(0, 3).column_sum();
        let w = WeightMatrix::identity(n);
        let t1 = mgmres(&a, &b, &w, &GmresOptions::default()).unwrap();
        assert_eq!(t1.breakdown, Some(3));
        assert_eq!(*t1.residual_norms.last().unwrap(), 0.0);
        let t2 = nested_residual_basis(&a, &b, &w, false).unwrap();
        assert!((t1.basis - t2).norm() < 1e-10);
        let full = nested_residual_basis(&a, &b, &w, true).unwrap();
        numkernel::check_unitary(&full, 1e-10).unwrap();
    }

    #[test]
    fn singular_operator_detected() {
        let a = numkernel::diag_real(&[1.0, 0.0]);
        let b = real_vector(&[0.0, 1.0]);
        assert!(matches!(
            mgmres(&a, &b, &WeightMatrix::identity(2), &GmresOptions::default()),
            Err(Error::SingularOperator { .. })
        ));
    }

    #[test]
    fn identity_preconditioners_are_bit_identical() {
        let (a, b) = random_system(8, 3);
        let i = Matrix::identity(8, 8);
        let p = preconditioned_gmres(&a, &b, Some(&i), Some(&i), &GmresOptions::default()).unwrap();
        let q = mgmres(&a, &b, &WeightMatrix::identity(8), &GmresOptions::default()).unwrap();
        assert_eq!(p.trace.residual_norms, q.residual_norms);
    }

    #[test]
    fn left_and_right_equivalences() {
        for seed in 0..5 {
            let n = 10;
            let (a, b) = random_system(n, 100 + seed);
            let (h, _) = random_system(n, 200 + seed);
            let ah = &a * &h;
            let left = preconditioned_gmres(&a, &b, Some(&h), None, &GmresOptions::default()).unwrap();
            let weight = WeightMatrix::new(h.adjoint() * &h).unwrap();
            let m = mgmres(&ah, &b, &weight, &GmresOptions::default()).unwrap();
            assert!(crate::curves::curve_deviation(left.minimized_norms(), &m.residual_norms) < 1e-9);
            let right = preconditioned_gmres(&a, &b, None, Some(&h), &GmresOptions::default()).unwrap();
            let i = mgmres(&ah, &b, &WeightMatrix::identity(n), &GmresOptions::default()).unwrap();
            assert!(crate::curves::curve_deviation(right.minimized_norms(), &i.residual_norms) < 1e-9);
            let res = &right.residual_norms;
            assert!(crate::curves::curve_deviation(&res[..n], &i.residual_norms[..n]) < 1e-9);
        }
    }
}
