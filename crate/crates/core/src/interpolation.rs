//! Natural cubic spline interpolation.

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::tp_spline::Dataset;

/// The C² piecewise cubic through every sample with zero second derivative
/// at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the nodes.
    m: Vec<f64>,
}

pub fn natural_cubic_interpolant(d: &Dataset) -> NaturalCubic {
    let (xs, ys) = (d.xs().to_vec(), d.ys().to_vec());
    let k = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let mut m = vec![0.0; k];
    if k > 2 {
        // Thomas algorithm on the interior nodes.
        let n = k - 2;
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h[i + 1] - (ys[i + 1] - ys[i]) / h[i]);
        }
        for i in 1..n {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * h[i];
            rhs[i] -= w * rhs[i - 1];
        }
        m[n] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i + 1] = (rhs[i] - h[i + 1] * m[i + 2]) / diag[i];
        }
    }
    NaturalCubic { xs, ys, m }
}

impl NaturalCubic {
    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn second_derivatives(&self) -> &[f64] {
        &self.m
    }

    fn segment(&self, x: f64) -> usize {
        let k = self.xs.len();
        match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            i if i >= k => k - 2,
            i => i - 1,
        }
    }
}

impl Curve for NaturalCubic {
    fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn eval(&self, x: f64, deriv: usize) -> Result<f64> {
        let (a, b) = self.domain();
        let slack = 1e-12 * (b - a);
        if !(x >= a - slack && x <= b + slack) {
            return Err(Error::Domain(format!("{x} outside [{a}, {b}]")));
        }
        let x = x.clamp(a, b);
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let u = self.xs[i + 1] - x;
        let v = x - self.xs[i];
        let c0 = y0 / h - m0 * h / 6.0;
        let c1 = y1 / h - m1 * h / 6.0;
        match deriv {
            0 => Ok(m0 * u.powi(3) / (6.0 * h) + m1 * v.powi(3) / (6.0 * h) + c0 * u + c1 * v),
            1 => Ok(-m0 * u * u / (2.0 * h) + m1 * v * v / (2.0 * h) - c0 + c1),
            2 => Ok((m0 * u + m1 * v) / h),
            3 => Ok((m1 - m0) / h),
            _ => Ok(0.0),
        }
    }
}
