//! Offset penalized splines: minimum bending energy subject to offset-point
//! and tangent-parallelism constraints.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::basis::{collocation, gram_second_derivative, KnotVector, SplineModel};
use crate::curve::{uniform_points, Curve};
use crate::error::{Error, Result};
use crate::geometry::{offset_abscissae, Side};
use crate::solvers::{default_ridge, row_rank, solve_kkt, CONSTRAINT_RANK_TOL};

/// Default distance of the first and last constraint abscissa from the domain
/// ends, as a fraction of the knot spacing.
pub const DEFAULT_MARGIN: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetSpec {
    pub tau: f64,
    pub side: Side,
    /// Number of constraint abscissae.
    pub q: usize,
    /// Number of refinement abscissae.
    pub p: usize,
    /// Boundary margin in units of the knot spacing.
    pub margin: f64,
}

impl OffsetSpec {
    pub fn new(tau: f64, side: Side, q: usize, p: usize) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidInput(format!("offset distance must be positive, got {tau}")));
        }
        if q < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 constraint abscissae, got {q}")));
        }
        if p < q {
            return Err(Error::InvalidInput(format!("p = {p} must be at least q = {q}")));
        }
        Ok(Self {
            tau,
            side,
            q,
            p,
            margin: DEFAULT_MARGIN,
        })
    }

    /// `q = ⌊n/2⌋` and `p = 4n` for a basis of dimension `n`.
    pub fn for_basis(tau: f64, side: Side, n: usize) -> Result<Self> {
        Self::new(tau, side, default_q(n), default_p(n))
    }

    pub fn with_margin(mut self, margin: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&margin) {
            return Err(Error::InvalidInput(format!("margin {margin} outside [0, 0.5)")));
        }
        self.margin = margin;
        Ok(self)
    }

    /// Signed offset distance (`+τ` exterior, `−τ` interior).
    pub fn signed_tau(&self) -> f64 {
        self.side.signed(self.tau)
    }

    /// `count` uniform abscissae spanning [`sample_range`].
    pub fn sample_points<C: Curve + ?Sized>(
        &self,
        g: &C,
        kv: &KnotVector,
        count: usize,
    ) -> Result<Vec<f64>> {
        let (lo, hi) = self.sample_range(g, kv)?;
        Ok(uniform_points(lo, hi, count))
    }

    /// Range of generator abscissae used for constraints and refinement.
    ///
    /// Starts from `[a + δ, b − δ]` with `δ = margin · h` and pulls either end
    /// inwards until its offset abscissa lands on `a + δ` (resp. `b − δ`), so
    /// that every offset point stays inside the knot domain.
    pub fn sample_range<C: Curve + ?Sized>(&self, g: &C, kv: &KnotVector) -> Result<(f64, f64)> {
        let (a, b) = kv.domain();
        let delta = self.margin * kv.spacing();
        let (lo, hi) = (a + delta, b - delta);
        let shift = |x: f64| -> Result<f64> {
            let s = g.slope(x)?;
            Ok(x - self.signed_tau() * s / s.hypot(1.0))
        };
        let fail = || {
            Error::Domain(format!(
                "no constraint range keeps the offset of tau = {} inside [{a}, {b}]",
                self.tau
            ))
        };
        let mid = 0.5 * (lo + hi);
        let mut start = lo;
        if shift(lo)? < lo {
            if shift(mid)? < lo {
                return Err(fail());
            }
            start = bisect_level(&shift, lo, lo, mid)?;
        }
        let mut end = hi;
        if shift(hi)? > hi {
            if shift(mid)? > hi {
                return Err(fail());
            }
            end = bisect_level(&shift, hi, hi, mid)?;
        }
        if !(end > start) {
            return Err(fail());
        }
        Ok((start, end))
    }

    fn validate(&self, kv: &KnotVector) -> Result<()> {
        if 2 * self.q > kv.dim() {
            return Err(Error::InvalidInput(format!(
                "2q = {} constraints exceed the basis dimension {}",
                2 * self.q,
                kv.dim()
            )));
        }
        Ok(())
    }
}

/// Point between `outside` and `inside` where `map` crosses `level`,
/// returned on the inside of the crossing.
fn bisect_level(
    map: &impl Fn(f64) -> Result<f64>,
    level: f64,
    mut outside: f64,
    mut inside: f64,
) -> Result<f64> {
    let side = (map(inside)? - level).signum();
    for _ in 0..200 {
        let mid = 0.5 * (outside + inside);
        if mid == outside || mid == inside {
            break;
        }
        if (map(mid)? - level).signum() == side {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(inside)
}

pub fn default_q(n: usize) -> usize {
    (n / 2).max(2)
}

pub fn default_p(n: usize) -> usize {
    4 * n
}

/// The stacked constraint rows `A β = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub value_rows: Range<usize>,
    pub tangent_rows: Range<usize>,
    /// Generator abscissae `x̄`.
    pub sample_xs: Vec<f64>,
    /// Offset abscissae `x_o`.
    pub offset_xs: Vec<f64>,
}

/// Builds the value rows `f(x_o) = g(x̄) ± τ/√(1+g'(x̄)²)` and the tangent rows
/// `f'(x_o) = g'(x̄)`.
pub fn build_constraints<C: Curve + ?Sized>(
    g: &C,
    spec: &OffsetSpec,
    kv_f: &KnotVector,
) -> Result<ConstraintSystem> {
    spec.validate(kv_f)?;
    let q = spec.q;
    let sample_xs = spec.sample_points(g, kv_f, q)?;
    let offsets = offset_abscissae(g, &sample_xs, spec.tau, spec.side, kv_f.domain())?;
    if let Some(&i) = offsets.out_of_range.first() {
        let (a, b) = kv_f.domain();
        return Err(Error::Domain(format!(
            "offset abscissa {} of constraint point {} leaves [{a}, {b}]",
            offsets.values[i], sample_xs[i]
        )));
    }
    let offset_xs = offsets.values;

    let values = collocation(kv_f, &offset_xs, 0)?;
    let slopes = collocation(kv_f, &offset_xs, 1)?;
    let n = kv_f.dim();
    let mut a = DMatrix::zeros(2 * q, n);
    a.view_mut((0, 0), (q, n)).copy_from(&values);
    a.view_mut((q, 0), (q, n)).copy_from(&slopes);
    let mut b = DVector::zeros(2 * q);
    for (j, &x) in sample_xs.iter().enumerate() {
        let gv = g.value(x)?;
        let gs = g.slope(x)?;
        b[j] = gv + spec.signed_tau() / gs.hypot(1.0);
        b[q + j] = gs;
    }

    let rank = row_rank(&a, CONSTRAINT_RANK_TOL);
    if rank < 2 * q {
        return Err(Error::RankDeficientConstraints { rank, rows: 2 * q });
    }
    Ok(ConstraintSystem {
        a,
        b,
        value_rows: 0..q,
        tangent_rows: q..2 * q,
        sample_xs,
        offset_xs,
    })
}

/// Minimum-energy spline on `kv_f` satisfying the constraint system.
pub fn solve_op_spline(system: &ConstraintSystem, kv_f: &KnotVector) -> Result<SplineModel> {
    let r = gram_second_derivative(kv_f);
    let sol = solve_kkt(&r, &system.a, &system.b, default_ridge(&r))?;
    SplineModel::new(kv_f.clone(), sol.primal.iter().copied().collect())
}

pub fn fit_op_spline<C: Curve + ?Sized>(
    g: &C,
    spec: &OffsetSpec,
    kv_f: &KnotVector,
) -> Result<SplineModel> {
    let system = build_constraints(g, spec, kv_f)?;
    solve_op_spline(&system, kv_f)
}

/// Worst constraint violation `max |Aβ − b|`.
pub fn feasibility_residual(system: &ConstraintSystem, f: &SplineModel) -> f64 {
    let beta = DVector::from_column_slice(f.coeffs());
    (&system.a * beta - &system.b).amax()
}
