//! Uniform cubic B-spline bases on an augmented knot vector.
//!
//! The knot vector carries three knots below `a` and three above `b`, all on
//! the same uniform grid, so the `n` cubic B-splines span the full spline
//! space of dimension `n` on `[a, b]`. Basis function `j` (zero based) is
//! supported on `[knots[j], knots[j + 4]]`.

use nalgebra::DMatrix;

use crate::curve::Curve;
use crate::error::{Error, Result};

pub const ORDER: usize = 4;
const DEGREE: usize = ORDER - 1;

/// Relative slack accepted at the domain endpoints before an evaluation point
/// is rejected. Points inside the slack are clamped onto `[a, b]`.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    n: usize,
    h: f64,
    a: f64,
    b: f64,
}

impl KnotVector {
    /// Builds the augmented uniform knot set with `n + 4` knots, `h = (b - a) / (n - 3)`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::Domain(format!("need a < b, got [{a}, {b}]")));
        }
        if n < ORDER {
            return Err(Error::Dimension(format!(
                "cubic splines need at least {ORDER} basis functions, got {n}"
            )));
        }
        let h = (b - a) / (n - 3) as f64;
        let knots = (0..n + 4)
            .map(|k| match k {
                3 => a,
                k if k == n => b,
                k => a + (k as f64 - 3.0) * h,
            })
            .collect();
        Ok(Self { knots, n, h, a, b })
    }

    /// Number of basis functions.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// All `n + 4` knots, lowest first. `knots()[3] == a` and `knots()[n] == b`.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of knot intervals inside `[a, b]`.
    pub fn interior_intervals(&self) -> usize {
        self.n - 3
    }

    pub fn contains(&self, x: f64) -> bool {
        self.clamp_to_domain(x).is_some()
    }

    fn clamp_to_domain(&self, x: f64) -> Option<f64> {
        let slack = DOMAIN_SLACK * (self.b - self.a);
        if !x.is_finite() || x < self.a - slack || x > self.b + slack {
            None
        } else {
            Some(x.clamp(self.a, self.b))
        }
    }

    /// Index `i` with `knots[i] <= x < knots[i + 1]`, restricted to the
    /// intervals inside the domain; `x = b` belongs to the last interval.
    fn span(&self, x: f64) -> usize {
        let first = DEGREE;
        let last = self.n - 1;
        let guess = ((x - self.a) / self.h).floor();
        let mut i = if guess < 0.0 {
            first
        } else {
            (first + guess as usize).min(last)
        };
        while i < last && x >= self.knots[i + 1] {
            i += 1;
        }
        while i > first && x < self.knots[i] {
            i -= 1;
        }
        i
    }
}

/// The nonzero basis values (or derivatives) at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisValues {
    /// Index of the first active basis function.
    pub first: usize,
    pub values: [f64; ORDER],
}

/// Evaluates the four active cubic B-splines, or their derivative of order
/// `deriv` (0, 1 or 2), at `x`.
pub fn eval_basis(kv: &KnotVector, x: f64, deriv: usize) -> Result<BasisValues> {
    if deriv > 2 {
        return Err(Error::InvalidInput(format!(
            "derivative order {deriv} not supported (0..=2)"
        )));
    }
    let x = kv
        .clamp_to_domain(x)
        .ok_or_else(|| Error::Domain(format!("x = {x} outside [{}, {}]", kv.a, kv.b)))?;
    let span = kv.span(x);
    let ders = basis_derivatives(&kv.knots, span, x);
    Ok(BasisValues {
        first: span - DEGREE,
        values: ders[deriv],
    })
}

/// Triangular recurrence for the cubic B-spline values and their first two
/// derivatives on the knot interval `span`.
fn basis_derivatives(knots: &[f64], span: usize, x: f64) -> [[f64; ORDER]; 3] {
    const P: usize = DEGREE;
    let mut ndu = [[0.0; ORDER]; ORDER];
    let mut left = [0.0; ORDER];
    let mut right = [0.0; ORDER];
    ndu[0][0] = 1.0;
    for j in 1..=P {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            // lower triangle holds knot differences, upper triangle the values
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = [[0.0; ORDER]; 3];
    for j in 0..=P {
        ders[0][j] = ndu[j][P];
    }
    let max_deriv = 2usize;
    for r in 0..=P {
        let mut a = [[0.0; ORDER]; 2];
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=max_deriv {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = P - k;
            if rk >= 0 {
                let rk = rk as usize;
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { P - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = P as f64;
    for (k, row) in ders.iter_mut().enumerate().skip(1) {
        for v in row.iter_mut() {
            *v *= factor;
        }
        factor *= (P - k) as f64;
    }
    ders
}

/// Collocation matrix with `(i, j)` entry `B_j^{(deriv)}(xs[i])`.
pub fn collocation(kv: &KnotVector, xs: &[f64], deriv: usize) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(xs.len(), kv.n);
    for (row, &x) in xs.iter().enumerate() {
        let bv = eval_basis(kv, x, deriv)?;
        for (k, v) in bv.values.iter().enumerate() {
            m[(row, bv.first + k)] = *v;
        }
    }
    Ok(m)
}

/// Gram matrix `R[k][j] = ∫_a^b B_k''(x) B_j''(x) dx`.
///
/// On each knot interval the integrand is a polynomial of degree 2, so the
/// three-point Gauss-Legendre rule is exact.
pub fn gram_second_derivative(kv: &KnotVector) -> DMatrix<f64> {
    let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut r = DMatrix::zeros(kv.n, kv.n);
    for span in DEGREE..kv.n {
        let lo = kv.knots[span];
        let hi = kv.knots[span + 1];
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (t, w) in nodes.iter().zip(weights) {
            let x = mid + half * t;
            let second = basis_derivatives(&kv.knots, span, x)[2];
            let first = span - DEGREE;
            for (i, bi) in second.iter().enumerate() {
                for (j, bj) in second.iter().enumerate() {
                    r[(first + i, first + j)] += w * half * bi * bj;
                }
            }
        }
    }
    r
}

/// A cubic spline `Σ c_j B_j(x)` on a [`KnotVector`].
#[derive(Debug, Clone, PartialEq)]
pub struct SplineModel {
    knots: KnotVector,
    coeffs: Vec<f64>,
}

impl SplineModel {
    pub fn new(knots: KnotVector, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != knots.dim() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a basis of dimension {}",
                coeffs.len(),
                knots.dim()
            )));
        }
        Ok(Self { knots, coeffs })
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Bending energy `∫_a^b s''(x)^2 dx`.
    pub fn bending_energy(&self) -> f64 {
        let r = gram_second_derivative(&self.knots);
        let c = nalgebra::DVector::from_column_slice(&self.coeffs);
        c.dot(&(&r * &c))
    }
}

pub fn eval_spline(model: &SplineModel, x: f64, deriv: usize) -> Result<f64> {
    let bv = eval_basis(&model.knots, x, deriv)?;
    Ok(bv
        .values
        .iter()
        .zip(&model.coeffs[bv.first..bv.first + ORDER])
        .map(|(b, c)| b * c)
        .sum())
}

impl Curve for SplineModel {
    fn domain(&self) -> (f64, f64) {
        self.knots.domain()
    }

    fn eval(&self, x: f64, deriv: usize) -> Result<f64> {
        eval_spline(self, x, deriv)
    }
}
