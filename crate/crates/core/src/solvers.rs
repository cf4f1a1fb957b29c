//! Dense linear-algebra kernels shared by the fitting stages.

use nalgebra::{Cholesky, ColPivQR, DMatrix, DVector, FullPivLU};

use crate::error::{Error, Result};

/// Inverse condition estimate below which a pivoted factorization is
/// treated as singular.
const SINGULAR_RCOND: f64 = 1e-14;
/// Relative tolerance for constraint row-rank checks.
pub const CONSTRAINT_RANK_TOL: f64 = 1e-10;
/// Relative ridge added to the bending-energy matrix inside the KKT solve.
pub const KKT_RIDGE_SCALE: f64 = 1e-10;
pub const CG_DEFAULT_TOL: f64 = 1e-10;

/// Solves `M x = rhs` for symmetric `M`. Tries a Cholesky factorization and
/// falls back to column-pivoted QR when `M` is not numerically positive definite.
pub fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    check_square(m, rhs.len())?;
    if let Some(chol) = Cholesky::new(m.clone()) {
        let x = chol.solve(rhs);
        if x.iter().all(|v| v.is_finite()) {
            return Ok(x);
        }
    }
    let qr = PivotedQr::new(m);
    if qr.rcond() < SINGULAR_RCOND {
        return Err(Error::SingularMatrix(format!(
            "{}x{} system, inverse condition estimate {:e}",
            m.nrows(),
            m.ncols(),
            qr.rcond()
        )));
    }
    Ok(qr.solve_truncated(rhs, m.ncols()))
}

fn check_square(m: &DMatrix<f64>, rhs_len: usize) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() != rhs_len {
        return Err(Error::Dimension(format!(
            "matrix {}x{} with right-hand side of length {rhs_len}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsqSolution {
    pub x: DVector<f64>,
    /// Numerical rank of the design matrix.
    pub rank: usize,
}

/// Least-squares solution of `min ‖M x − y‖₂` by QR with column pivoting.
/// Components pivoted out of a rank-deficient system are set to zero.
pub fn solve_lsq(m: &DMatrix<f64>, y: &DVector<f64>) -> Result<LsqSolution> {
    if m.nrows() == 0 || m.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "design matrix {}x{} with {} observations",
            m.nrows(),
            m.ncols(),
            y.len()
        )));
    }
    let qr = PivotedQr::new(m);
    let tol = qr.max_diag() * (m.nrows().max(m.ncols()) as f64) * f64::EPSILON;
    let rank = qr.rank(tol);
    Ok(LsqSolution {
        x: qr.solve_truncated(y, rank),
        rank,
    })
}

/// Numerical row rank of `a` with tolerance `rel_tol · ‖a‖_F`.
pub fn row_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.nrows() == 0 {
        return 0;
    }
    let qr = PivotedQr::new(&a.transpose());
    qr.rank(rel_tol * a.norm())
}

struct PivotedQr {
    qr: ColPivQR<f64, nalgebra::Dyn, nalgebra::Dyn>,
    r: DMatrix<f64>,
}

impl PivotedQr {
    fn new(m: &DMatrix<f64>) -> Self {
        let qr = ColPivQR::new(m.clone());
        let r = qr.r();
        Self { qr, r }
    }

    fn diag(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.r.nrows().min(self.r.ncols())).map(|i| self.r[(i, i)].abs())
    }

    fn max_diag(&self) -> f64 {
        self.diag().fold(0.0, f64::max)
    }

    fn rank(&self, abs_tol: f64) -> usize {
        self.diag().take_while(|d| *d > abs_tol).count()
    }

    fn rcond(&self) -> f64 {
        let max = self.max_diag();
        if max == 0.0 {
            return 0.0;
        }
        self.diag().fold(f64::INFINITY, f64::min) / max
    }

    /// Solves with the leading `rank` pivoted columns, zeroing the rest.
    fn solve_truncated(&self, y: &DVector<f64>, rank: usize) -> DVector<f64> {
        let ncols = self.r.ncols();
        let mut qty = y.clone();
        self.qr.q_tr_mul(&mut qty);
        let mut z = DVector::zeros(ncols);
        for i in (0..rank).rev() {
            let mut acc = qty[i];
            for j in i + 1..rank {
                acc -= self.r[(i, j)] * z[j];
            }
            z[i] = acc / self.r[(i, i)];
        }
        self.qr.p().inv_permute_rows(&mut z);
        z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktSolution {
    pub primal: DVector<f64>,
    pub multipliers: DVector<f64>,
    /// `max(‖2Rx + Aᵀν‖_∞, ‖Ax − b‖_∞)`.
    pub residual_norm: f64,
}

/// Default ridge `1e-10 · trace(R) / n`.
pub fn default_ridge(r: &DMatrix<f64>) -> f64 {
    KKT_RIDGE_SCALE * r.trace() / r.nrows().max(1) as f64
}

/// Minimizes `xᵀ(R + ridge·I)x` subject to `A x = b` through the saddle system
/// `[2(R + ridge·I), Aᵀ; A, 0] [x; ν] = [0; b]`.
pub fn solve_kkt(
    r: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    ridge: f64,
) -> Result<KktSolution> {
    let n = r.nrows();
    let c = a.nrows();
    if r.ncols() != n || a.ncols() != n || b.len() != c {
        return Err(Error::Dimension(format!(
            "R {}x{}, A {}x{}, b {}",
            r.nrows(),
            r.ncols(),
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if c > n {
        return Err(Error::Dimension(format!("{c} constraints for {n} unknowns")));
    }
    let rank = row_rank(a, CONSTRAINT_RANK_TOL);
    if rank < c {
        return Err(Error::RankDeficientConstraints { rank, rows: c });
    }

    let mut k = DMatrix::zeros(n + c, n + c);
    let mut hess = r * 2.0;
    for i in 0..n {
        hess[(i, i)] += 2.0 * ridge;
    }
    k.view_mut((0, 0), (n, n)).copy_from(&hess);
    k.view_mut((0, n), (n, c)).copy_from(&a.transpose());
    k.view_mut((n, 0), (c, n)).copy_from(a);
    let mut rhs = DVector::zeros(n + c);
    rhs.rows_mut(n, c).copy_from(b);

    let lu = FullPivLU::new(k);
    let u_diag: Vec<f64> = (0..n + c).map(|i| lu.u()[(i, i)].abs()).collect();
    let umax = u_diag.iter().cloned().fold(0.0, f64::max);
    let umin = u_diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if umax == 0.0 || umin / umax < 1e-15 {
        return Err(Error::SingularKkt);
    }
    let sol = lu.solve(&rhs).ok_or(Error::SingularKkt)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularKkt);
    }
    let primal = sol.rows(0, n).into_owned();
    let multipliers = sol.rows(n, c).into_owned();
    let stationarity = (r * &primal * 2.0 + a.transpose() * &multipliers).amax();
    let feasibility = (a * &primal - b).amax();
    Ok(KktSolution {
        primal,
        multipliers,
        residual_norm: stationarity.max(feasibility),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: DVector<f64>,
    pub iterations: usize,
    /// Final `‖Hx − f‖₂`, recomputed from `x`.
    pub residual_norm: f64,
    /// False when `max_iter` was reached before `‖Hx − f‖₂ ≤ tol·‖f‖₂`.
    pub converged: bool,
}

/// Conjugate gradient for symmetric positive definite `H`, started from zero.
pub fn conjugate_gradient(
    h: &DMatrix<f64>,
    f: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> CgOutcome {
    cg_impl(h, f, tol, max_iter, None, None)
}

/// Conjugate gradients preconditioned by the diagonal of `h` (Jacobi). The
/// stopping rule is the same unpreconditioned residual test as
/// [`conjugate_gradient`].
pub fn conjugate_gradient_jacobi(
    h: &DMatrix<f64>,
    f: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let inv_diag = DVector::from_iterator(
        h.nrows(),
        h.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { f64::NAN }),
    );
    if inv_diag.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix("Jacobi preconditioner needs a positive diagonal".into()));
    }
    Ok(cg_impl(h, f, tol, max_iter, Some(&inv_diag), None))
}

/// As [`conjugate_gradient`], also returning every iterate (starting with zero).
pub fn conjugate_gradient_traced(
    h: &DMatrix<f64>,
    f: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> (CgOutcome, Vec<DVector<f64>>) {
    let mut trace = Vec::new();
    let out = cg_impl(h, f, tol, max_iter, None, Some(&mut trace));
    (out, trace)
}

fn cg_impl(
    h: &DMatrix<f64>,
    f: &DVector<f64>,
    tol: f64,
    max_iter: usize,
    inv_diag: Option<&DVector<f64>>,
    mut trace: Option<&mut Vec<DVector<f64>>>,
) -> CgOutcome {
    let n = f.len();
    let mut x = DVector::zeros(n);
    if let Some(t) = trace.as_deref_mut() {
        t.push(x.clone());
    }
    let target = tol * f.norm();
    let precondition = |r: &DVector<f64>| match inv_diag {
        Some(d) => r.component_mul(d),
        None => r.clone(),
    };
    let mut r = f.clone();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut iterations = 0;
    while r.norm() > target && iterations < max_iter {
        let hp = h * &p;
        let curvature = p.dot(&hp);
        if curvature <= 0.0 || !curvature.is_finite() {
            break;
        }
        let alpha = rz / curvature;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &hp, 1.0);
        z = precondition(&r);
        let rz_next = r.dot(&z);
        p = &z + &p * (rz_next / rz);
        rz = rz_next;
        iterations += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.push(x.clone());
        }
    }
    let residual_norm = (h * &x - f).norm();
    CgOutcome {
        converged: residual_norm <= target.max(f64::MIN_POSITIVE) || f.norm() == 0.0,
        x,
        iterations,
        residual_norm,
    }
}
