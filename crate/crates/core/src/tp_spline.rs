//! Penalized Hermite regression ("trajectory penalized" spline) fitted to
//! values, node slopes and midpoint slopes, with two-parameter GCV selection
//! of the weights. The classical P-spline is the `μ = 0` special case.

use nalgebra::{DMatrix, DVector};

use crate::basis::{collocation, KnotVector, SplineModel};
use crate::error::{Error, Result};
use crate::nelder_mead::{self, SimplexOptions};
use crate::solvers::solve_spd;

/// Ordered planar samples with strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Dataset {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Dimension(format!(
                "{} abscissae but {} ordinates",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 4 {
            return Err(Error::InvalidInput(format!(
                "need at least 4 samples, got {}",
                xs.len()
            )));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        if let Some(i) = xs.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "abscissae must be strictly increasing (x[{}] = {} >= x[{}] = {})",
                i,
                xs[i],
                i + 1,
                xs[i + 1]
            )));
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }
}

/// Weights `(μ, λ)`: `μ²` scales the slope residuals, `λ²` the second-difference penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationParams {
    pub mu: f64,
    pub lambda: f64,
}

impl RegularizationParams {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu.is_finite() && lambda.is_finite()) || mu < 0.0 || lambda < 0.0 {
            return Err(Error::InvalidInput(format!(
                "regularization weights must be finite and nonnegative, got mu = {mu}, lambda = {lambda}"
            )));
        }
        Ok(Self { mu, lambda })
    }
}

/// Slope data derived from the samples alone.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeData {
    /// Midpoints of consecutive abscissae.
    pub mid_xs: Vec<f64>,
    /// Slope of the piecewise-linear interpolant on each segment.
    pub mid_slopes: Vec<f64>,
    /// Backward divided differences at the nodes; the first copies the second.
    pub node_slopes: Vec<f64>,
}

pub fn derivative_data(d: &Dataset) -> DerivativeData {
    let (xs, ys) = (d.xs(), d.ys());
    let mid_xs = xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mid_slopes: Vec<f64> = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    let mut node_slopes = Vec::with_capacity(xs.len());
    node_slopes.push(mid_slopes[0]);
    node_slopes.extend_from_slice(&mid_slopes);
    DerivativeData {
        mid_xs,
        mid_slopes,
        node_slopes,
    }
}

/// The `(n − 2) × n` second-difference matrix with rows `(1, −2, 1)`.
pub fn second_difference_matrix(n: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n.saturating_sub(2), n);
    for i in 0..n.saturating_sub(2) {
        d[(i, i)] = 1.0;
        d[(i, i + 1)] = -2.0;
        d[(i, i + 2)] = 1.0;
    }
    d
}

/// Normal equations `A α = rhs` of the penalized fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TpSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

struct Design {
    values: DMatrix<f64>,
    node_derivs: DMatrix<f64>,
    mid_derivs: DMatrix<f64>,
    penalty: DMatrix<f64>,
}

impl Design {
    fn new(d: &Dataset, deriv: &DerivativeData, kv: &KnotVector) -> Result<Self> {
        Ok(Self {
            values: collocation(kv, d.xs(), 0)?,
            node_derivs: collocation(kv, d.xs(), 1)?,
            mid_derivs: collocation(kv, &deriv.mid_xs, 1)?,
            penalty: second_difference_matrix(kv.dim()),
        })
    }

    fn normal_matrix(&self, p: RegularizationParams) -> DMatrix<f64> {
        let mu2 = p.mu * p.mu;
        let lam2 = p.lambda * p.lambda;
        self.values.tr_mul(&self.values)
            + (self.node_derivs.tr_mul(&self.node_derivs) + self.mid_derivs.tr_mul(&self.mid_derivs))
                * mu2
            + self.penalty.tr_mul(&self.penalty) * lam2
    }

    fn rhs(&self, d: &Dataset, deriv: &DerivativeData, p: RegularizationParams) -> DVector<f64> {
        let y = DVector::from_column_slice(d.ys());
        let z = DVector::from_column_slice(&deriv.mid_slopes);
        let dy = DVector::from_column_slice(&deriv.node_slopes);
        self.values.tr_mul(&y)
            + (self.mid_derivs.tr_mul(&z) + self.node_derivs.tr_mul(&dy)) * (p.mu * p.mu)
    }
}

pub fn assemble_tp_system(
    d: &Dataset,
    kv: &KnotVector,
    p: RegularizationParams,
) -> Result<TpSystem> {
    assemble_tp_system_with(d, &derivative_data(d), kv, p)
}

/// As [`assemble_tp_system`] with caller-supplied slope data.
pub fn assemble_tp_system_with(
    d: &Dataset,
    deriv: &DerivativeData,
    kv: &KnotVector,
    p: RegularizationParams,
) -> Result<TpSystem> {
    check_lengths(d, deriv)?;
    let design = Design::new(d, deriv, kv)?;
    Ok(TpSystem {
        matrix: design.normal_matrix(p),
        rhs: design.rhs(d, deriv, p),
    })
}

fn check_lengths(d: &Dataset, deriv: &DerivativeData) -> Result<()> {
    let m = d.len();
    if deriv.mid_xs.len() != m - 1 || deriv.mid_slopes.len() != m - 1 || deriv.node_slopes.len() != m
    {
        return Err(Error::Dimension(format!(
            "slope data does not match {m} samples"
        )));
    }
    Ok(())
}

pub fn fit_tp_spline(d: &Dataset, kv: &KnotVector, p: RegularizationParams) -> Result<SplineModel> {
    fit_tp_spline_with(d, &derivative_data(d), kv, p)
}

pub fn fit_tp_spline_with(
    d: &Dataset,
    deriv: &DerivativeData,
    kv: &KnotVector,
    p: RegularizationParams,
) -> Result<SplineModel> {
    let sys = assemble_tp_system_with(d, deriv, kv, p)?;
    let alpha = solve_spd(&sys.matrix, &sys.rhs)?;
    SplineModel::new(kv.clone(), alpha.iter().copied().collect())
}

/// Classical P-spline: the penalized fit without slope terms.
pub fn fit_p_spline(d: &Dataset, kv: &KnotVector, lambda: f64) -> Result<SplineModel> {
    fit_tp_spline(d, kv, RegularizationParams::new(0.0, lambda)?)
}

/// Value of the penalized objective
/// `‖y − Bα‖² + μ²(‖Φα − Δy‖² + ‖Ψα − z‖²) + λ²‖Dα‖²` at `coeffs`.
pub fn tp_objective(
    d: &Dataset,
    deriv: &DerivativeData,
    kv: &KnotVector,
    p: RegularizationParams,
    coeffs: &[f64],
) -> Result<f64> {
    check_lengths(d, deriv)?;
    let design = Design::new(d, deriv, kv)?;
    let alpha = DVector::from_column_slice(coeffs);
    let fit = (&design.values * &alpha - DVector::from_column_slice(d.ys())).norm_squared();
    let node = (&design.node_derivs * &alpha - DVector::from_column_slice(&deriv.node_slopes))
        .norm_squared();
    let mid = (&design.mid_derivs * &alpha - DVector::from_column_slice(&deriv.mid_slopes))
        .norm_squared();
    let pen = (&design.penalty * &alpha).norm_squared();
    Ok(fit + p.mu * p.mu * (node + mid) + p.lambda * p.lambda * pen)
}

/// Hat matrix `H = B A⁻¹ Bᵀ` (m × m).
pub fn hat_matrix(d: &Dataset, kv: &KnotVector, p: RegularizationParams) -> Result<DMatrix<f64>> {
    let deriv = derivative_data(d);
    let design = Design::new(d, &deriv, kv)?;
    hat_from_design(&design, p)
}

fn hat_from_design(design: &Design, p: RegularizationParams) -> Result<DMatrix<f64>> {
    let a = design.normal_matrix(p);
    let bt = design.values.transpose();
    let mut x = DMatrix::zeros(bt.nrows(), bt.ncols());
    for j in 0..bt.ncols() {
        let col = solve_spd(&a, &bt.column(j).into_owned())?;
        x.set_column(j, &col);
    }
    Ok(&design.values * x)
}

fn gcv_from_hat(h: &DMatrix<f64>, y: &DVector<f64>) -> Result<f64> {
    let m = y.len() as f64;
    let ratio = h.trace() / m;
    if ratio >= 1.0 - 1e-10 {
        return Err(Error::DegenerateGcv(ratio));
    }
    let resid = y - h * y;
    Ok((resid.norm_squared() / m) / (1.0 - ratio).powi(2))
}

/// Generalized cross-validation score
/// `(1/m)‖(I − H)y‖² / (1 − tr(H)/m)²`, normalized by the number of samples.
pub fn gcv_score(d: &Dataset, kv: &KnotVector, p: RegularizationParams) -> Result<f64> {
    let h = hat_matrix(d, kv, p)?;
    gcv_from_hat(&h, &DVector::from_column_slice(d.ys()))
}

/// Grid-then-simplex search configuration for the GCV minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcvSearch {
    pub grid_size: usize,
    pub lower: f64,
    pub upper: f64,
    pub max_evals: usize,
    pub simplex_tol: f64,
}

impl Default for GcvSearch {
    fn default() -> Self {
        Self {
            grid_size: 12,
            lower: 1e-6,
            upper: 1e2,
            max_evals: 200,
            simplex_tol: 1e-6,
        }
    }
}

impl GcvSearch {
    fn log_grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.lower.log10(), self.upper.log10());
        let k = self.grid_size.max(2);
        (0..k)
            .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.lower > 0.0 && self.upper > self.lower) || self.grid_size < 2 {
            return Err(Error::InvalidInput(format!("invalid GCV search {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSelection {
    pub params: RegularizationParams,
    pub score: f64,
    pub evaluations: usize,
}

/// Selects `(μ, λ)` minimizing the GCV score: a logarithmic grid followed by
/// a Nelder–Mead refinement in `log10` coordinates from the best grid cell.
pub fn select_parameters(d: &Dataset, kv: &KnotVector, cfg: &GcvSearch) -> Result<ParameterSelection> {
    cfg.validate()?;
    let deriv = derivative_data(d);
    let design = Design::new(d, &deriv, kv)?;
    let y = DVector::from_column_slice(d.ys());
    let score = |log_mu: f64, log_lambda: f64| -> Result<f64> {
        let p = RegularizationParams::new(10f64.powf(log_mu), 10f64.powf(log_lambda))?;
        gcv_from_hat(&hat_from_design(&design, p)?, &y)
    };

    let grid = cfg.log_grid();
    let mut best: Option<(f64, f64, f64)> = None;
    let mut evaluations = 0;
    for &lm in &grid {
        for &ll in &grid {
            evaluations += 1;
            match score(lm, ll) {
                Ok(s) if best.map_or(true, |b| s < b.2) => best = Some((lm, ll, s)),
                Ok(_) | Err(Error::DegenerateGcv(_)) | Err(Error::SingularMatrix(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let (lm, ll, s0) = best.ok_or(Error::AllDegenerate)?;
    let step = grid[1] - grid[0];
    let refined = nelder_mead::minimize(
        |p| score(p[0], p[1]).unwrap_or(f64::INFINITY),
        &[lm, ll],
        step,
        SimplexOptions {
            max_evals: cfg.max_evals,
            tol: cfg.simplex_tol,
            lower: grid[0],
            upper: grid[grid.len() - 1],
        },
    );
    evaluations += refined.evals;
    let (point, value) = if refined.value < s0 {
        (refined.point, refined.value)
    } else {
        (vec![lm, ll], s0)
    };
    Ok(ParameterSelection {
        params: RegularizationParams::new(10f64.powf(point[0]), 10f64.powf(point[1]))?,
        score: value,
        evaluations,
    })
}

/// One-dimensional GCV search for the P-spline weight (`μ = 0`).
pub fn select_p_spline_lambda(d: &Dataset, kv: &KnotVector, cfg: &GcvSearch) -> Result<ParameterSelection> {
    cfg.validate()?;
    let deriv = derivative_data(d);
    let design = Design::new(d, &deriv, kv)?;
    let y = DVector::from_column_slice(d.ys());
    let score = |log_lambda: f64| -> Result<f64> {
        let p = RegularizationParams::new(0.0, 10f64.powf(log_lambda))?;
        gcv_from_hat(&hat_from_design(&design, p)?, &y)
    };
    let grid = cfg.log_grid();
    let mut best: Option<(f64, f64)> = None;
    let mut evaluations = 0;
    for &ll in &grid {
        evaluations += 1;
        match score(ll) {
            Ok(s) if best.map_or(true, |b| s < b.1) => best = Some((ll, s)),
            Ok(_) | Err(Error::DegenerateGcv(_)) | Err(Error::SingularMatrix(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let (ll, s0) = best.ok_or(Error::AllDegenerate)?;
    let refined = nelder_mead::minimize(
        |p| score(p[0]).unwrap_or(f64::INFINITY),
        &[ll],
        grid[1] - grid[0],
        SimplexOptions {
            max_evals: cfg.max_evals,
            tol: cfg.simplex_tol,
            lower: grid[0],
            upper: grid[grid.len() - 1],
        },
    );
    evaluations += refined.evals;
    let (point, value) = if refined.value < s0 {
        (refined.point[0], refined.value)
    } else {
        (ll, s0)
    };
    Ok(ParameterSelection {
        params: RegularizationParams::new(0.0, 10f64.powf(point))?,
        score: value,
        evaluations,
    })
}

/// Default basis size: 30% of the sample count, clamped to `[8, m]`.
pub fn default_basis_size(m: usize) -> usize {
    ((0.3 * m as f64).round() as usize).clamp(8, m.max(8))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::eval_spline;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_dataset(a: f64, b: f64, m: usize, f: impl Fn(f64) -> f64) -> Dataset {
        let xs = crate::curve::uniform_points(a, b, m);
        let ys = xs.iter().map(|&x| f(x)).collect();
        Dataset::new(xs, ys).unwrap()
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![0.0, 1.0, 2.0], vec![0.0; 3]).is_err());
        assert!(Dataset::new(vec![0.0, 1.0, 1.0, 2.0], vec![0.0; 4]).is_err());
        assert!(Dataset::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0; 3]).is_err());
        assert!(RegularizationParams::new(-1.0, 0.0).is_err());
        assert!(RegularizationParams::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn slopes_of_constant_and_identity() {
        let d = uniform_dataset(0.0, 1.0, 9, |_| 3.0);
        let dd = derivative_data(&d);
        assert!(dd.mid_slopes.iter().chain(&dd.node_slopes).all(|s| *s == 0.0));
        let d = Dataset::new(vec![0.0, 0.3, 1.1, 2.0, 2.5], vec![0.0, 0.3, 1.1, 2.0, 2.5]).unwrap();
        let dd = derivative_data(&d);
        assert_eq!(dd.node_slopes.len(), 5);
        for s in dd.mid_slopes.iter().chain(&dd.node_slopes) {
            assert_abs_diff_eq!(*s, 1.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(dd.mid_xs[1], 0.7, epsilon = 1e-15);
    }

    #[test]
    fn tent_slopes() {
        let d = Dataset::new(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 2.0, 0.0, 1.0]).unwrap();
        let dd = derivative_data(&d);
        assert_eq!(dd.mid_slopes, vec![2.0, -2.0, 0.5]);
        assert_eq!(dd.node_slopes, vec![2.0, 2.0, -2.0, 0.5]);
    }

    #[test]
    fn unpenalized_system_is_ordinary_least_squares() {
        let d = uniform_dataset(0.0, 2.0, 15, |x| x.sin());
        let kv = KnotVector::uniform(0.0, 2.0, 7).unwrap();
        let sys = assemble_tp_system(&d, &kv, RegularizationParams::new(0.0, 0.0).unwrap()).unwrap();
        let b = collocation(&kv, d.xs(), 0).unwrap();
        assert!((&sys.matrix - b.tr_mul(&b)).amax() < 1e-14);
        let y = DVector::from_column_slice(d.ys());
        assert!((&sys.rhs - b.tr_mul(&y)).amax() < 1e-14);
    }

    #[test]
    fn assembly_matches_stacked_normal_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut xs: Vec<f64> = (0..10).map(|_| rng.gen_range(0.0..5.0)).collect();
        xs.sort_by(f64::total_cmp);
        xs[0] = 0.0;
        xs[9] = 5.0;
        let ys: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d = Dataset::new(xs, ys).unwrap();
        let kv = KnotVector::uniform(0.0, 5.0, 6).unwrap();
        let p = RegularizationParams::new(0.7, 1.3).unwrap();
        let sys = assemble_tp_system(&d, &kv, p).unwrap();

        // stacked design [B; μΦ; μΨ; λD] and targets [y; μΔy; μz; 0]
        let dd = derivative_data(&d);
        let blocks = [
            (collocation(&kv, d.xs(), 0).unwrap(), d.ys().to_vec(), 1.0),
            (collocation(&kv, d.xs(), 1).unwrap(), dd.node_slopes.clone(), p.mu),
            (collocation(&kv, &dd.mid_xs, 1).unwrap(), dd.mid_slopes.clone(), p.mu),
            (second_difference_matrix(6), vec![0.0; 4], p.lambda),
        ];
        let rows: usize = blocks.iter().map(|b| b.0.nrows()).sum();
        let mut stacked = DMatrix::zeros(rows, 6);
        let mut target = DVector::zeros(rows);
        let mut r0 = 0;
        for (m, t, w) in &blocks {
            for i in 0..m.nrows() {
                for j in 0..6 {
                    stacked[(r0 + i, j)] = w * m[(i, j)];
                }
                target[r0 + i] = w * t[i];
            }
            r0 += m.nrows();
        }
        assert!((&sys.matrix - stacked.tr_mul(&stacked)).amax() < 1e-12);
        assert!((&sys.rhs - stacked.tr_mul(&target)).amax() < 1e-12);
    }

    #[test]
    fn lines_are_reproduced() {
        let d = uniform_dataset(-1.0, 3.0, 20, |x| 0.4 - 1.7 * x);
        let kv = KnotVector::uniform(-1.0, 3.0, 9).unwrap();
        for &(mu, lambda) in &[(0.0, 0.0), (0.1, 10.0), (3.0, 0.0), (1e-3, 1e2)] {
            let g = fit_tp_spline(&d, &kv, RegularizationParams::new(mu, lambda).unwrap()).unwrap();
            for i in 0..=100 {
                let x = -1.0 + 4.0 * i as f64 / 100.0;
                assert_abs_diff_eq!(eval_spline(&g, x, 0).unwrap(), 0.4 - 1.7 * x, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn fit_is_first_order_optimal() {
        let d = uniform_dataset(0.0, 6.0, 30, |x| (x * 1.3).sin() + 0.1 * x);
        let kv = KnotVector::uniform(0.0, 6.0, 10).unwrap();
        let p = RegularizationParams::new(0.3, 0.2).unwrap();
        let dd = derivative_data(&d);
        let g = fit_tp_spline(&d, &kv, p).unwrap();
        let sys = assemble_tp_system(&d, &kv, p).unwrap();
        let alpha = DVector::from_column_slice(g.coeffs());
        assert!((&sys.matrix * &alpha - &sys.rhs).amax() <= 1e-9 * (1.0 + sys.rhs.amax()));

        let best = tp_objective(&d, &dd, &kv, p, g.coeffs()).unwrap();
        for j in 0..10 {
            for eps in [1e-6, -1e-6] {
                let mut c = g.coeffs().to_vec();
                c[j] += eps;
                assert!(tp_objective(&d, &dd, &kv, p, &c).unwrap() >= best);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let c: Vec<f64> = g.coeffs().iter().map(|v| v + rng.gen_range(-0.05..0.05)).collect();
            assert!(tp_objective(&d, &dd, &kv, p, &c).unwrap() >= best);
        }
    }

    #[test]
    fn p_spline_is_tp_with_zero_mu() {
        let d = uniform_dataset(0.0, 3.0, 25, |x| (2.0 * x).cos());
        let kv = KnotVector::uniform(0.0, 3.0, 9).unwrap();
        let a = fit_p_spline(&d, &kv, 0.4).unwrap();
        let b = fit_tp_spline(&d, &kv, RegularizationParams::new(0.0, 0.4).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn penalty_shrinks_with_lambda() {
        let d = uniform_dataset(0.0, 4.0, 33, |x| (3.0 * x).sin() * x);
        let kv = KnotVector::uniform(0.0, 4.0, 12).unwrap();
        let dmat = second_difference_matrix(12);
        let mut last = f64::INFINITY;
        for k in 0..8 {
            let lambda = 10f64.powi(k - 4);
            let g = fit_tp_spline(&d, &kv, RegularizationParams::new(0.2, lambda).unwrap()).unwrap();
            let pen = (&dmat * DVector::from_column_slice(g.coeffs())).norm();
            assert!(pen <= last * (1.0 + 1e-10));
            last = pen;
        }
    }

    #[test]
    fn hat_matrix_symmetric() {
        let d = uniform_dataset(0.0, 4.0, 21, |x| x.sqrt());
        let kv = KnotVector::uniform(0.0, 4.0, 9).unwrap();
        let h = hat_matrix(&d, &kv, RegularizationParams::new(0.5, 0.05).unwrap()).unwrap();
        assert!((&h - h.transpose()).amax() <= 1e-9);
    }

    #[test]
    fn gcv_reflection_invariance() {
        let d = uniform_dataset(-2.0, 2.0, 31, |x| (-x * x).exp() + 0.1 * (5.0 * x).cos());
        let kv = KnotVector::uniform(-2.0, 2.0, 11).unwrap();
        let xs: Vec<f64> = d.xs().iter().rev().map(|x| -x).collect();
        let ys: Vec<f64> = d.ys().iter().rev().copied().collect();
        let mirrored = Dataset::new(xs, ys).unwrap();
        let p = RegularizationParams::new(0.2, 0.03).unwrap();
        let s1 = gcv_score(&d, &kv, p).unwrap();
        let s2 = gcv_score(&mirrored, &kv, p).unwrap();
        assert_abs_diff_eq!(s1, s2, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_gcv_is_signalled() {
        // interpolation: as many basis functions as samples, no penalty
        let d = uniform_dataset(0.0, 1.0, 8, |x| x * x * x - x);
        let kv = KnotVector::uniform(0.0, 1.0, 8).unwrap();
        let err = gcv_score(&d, &kv, RegularizationParams::new(0.0, 0.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DegenerateGcv(_)));
    }

    fn noisy(f: impl Fn(f64) -> f64, m: usize, sigma: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = uniform_dataset(0.0, 5.0, m, f);
        let ys = d.ys().iter().map(|y| y + sigma * rng.gen_range(-1.0..1.0)).collect();
        Dataset::new(d.xs().to_vec(), ys).unwrap()
    }

    #[test]
    fn selection_beats_random_parameters() {
        let d = noisy(|x| (1.5 * x).sin(), 40, 0.05, 8);
        let kv = KnotVector::uniform(0.0, 5.0, 14).unwrap();
        let cfg = GcvSearch::default();
        let sel = select_parameters(&d, &kv, &cfg).unwrap();
        assert_abs_diff_eq!(sel.score, gcv_score(&d, &kv, sel.params).unwrap(), epsilon = 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let p = RegularizationParams::new(10f64.powf(rng.gen_range(-6.0..2.0)), 10f64.powf(rng.gen_range(-6.0..2.0)))
                .unwrap();
            if let Ok(s) = gcv_score(&d, &kv, p) {
                assert!(sel.score <= s * (1.0 + 1e-9), "{p:?} scores {s} < {}", sel.score);
            }
        }
        let ps = select_p_spline_lambda(&d, &kv, &cfg).unwrap();
        assert_eq!(ps.params.mu, 0.0);
        assert!(sel.score <= ps.score * (1.0 + 1e-9));
    }

    #[test]
    fn pure_noise_is_smoothed_flat() {
        let d = noisy(|_| 1.0, 60, 0.2, 3);
        let kv = KnotVector::uniform(0.0, 5.0, 14).unwrap();
        let sel = select_p_spline_lambda(&d, &kv, &GcvSearch::default()).unwrap();
        let g = fit_tp_spline(&d, &kv, sel.params).unwrap();
        let trace = hat_matrix(&d, &kv, sel.params).unwrap().trace();
        assert!(trace < 3.0, "effective dof {trace}");
        let mean = d.ys().iter().sum::<f64>() / 60.0;
        for x in crate::curve::uniform_points(0.0, 5.0, 50) {
            assert!((eval_spline(&g, x, 0).unwrap() - mean).abs() < 0.15);
        }
    }

    #[test]
    fn default_size_rule() {
        assert_eq!(default_basis_size(47), 14);
        assert_eq!(default_basis_size(10), 8);
        assert_eq!(default_basis_size(100), 30);
    }
}
