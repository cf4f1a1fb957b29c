use crate::error::Result;

/// A Cartesian curve `y = c(x)` that can be evaluated together with its first
/// two derivatives on a closed interval.
pub trait Curve {
    /// The closed evaluation interval `[a, b]`.
    fn domain(&self) -> (f64, f64);

    /// Value (`deriv = 0`) or derivative of order `deriv` at `x`.
    fn eval(&self, x: f64, deriv: usize) -> Result<f64>;

    fn value(&self, x: f64) -> Result<f64> {
        self.eval(x, 0)
    }

    fn slope(&self, x: f64) -> Result<f64> {
        self.eval(x, 1)
    }

    /// `count` uniformly spaced samples `(x, c(x))` over the whole domain.
    fn sample(&self, count: usize) -> Result<Vec<(f64, f64)>> {
        let (a, b) = self.domain();
        uniform_points(a, b, count)
            .into_iter()
            .map(|x| Ok((x, self.value(x)?)))
            .collect()
    }
}

impl<C: Curve + ?Sized> Curve for &C {
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }

    fn eval(&self, x: f64, deriv: usize) -> Result<f64> {
        (**self).eval(x, deriv)
    }
}

/// `count` uniformly spaced points from `a` to `b` inclusive. The endpoints are
/// reproduced exactly.
pub fn uniform_points(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { b } else { a + step * i as f64 })
                .collect()
        }
    }
}
