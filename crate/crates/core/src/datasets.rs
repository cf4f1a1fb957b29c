//! Builtin test functions, seeded noise, and CSV sample ingestion.

use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::curve::uniform_points;
use crate::error::{Error, Result};
use crate::tp_spline::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// `|sin x · cos 2x|` on `[0, 2π]`.
    P1,
    /// `|sin x|` on `[−4, 4]`.
    P2,
    /// `0.7 x + 1` on `[0, 10]`.
    Line,
}

impl TestFunction {
    pub const ALL: [TestFunction; 3] = [TestFunction::P1, TestFunction::P2, TestFunction::Line];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::P1 => "p1",
            TestFunction::P2 => "p2",
            TestFunction::Line => "line",
        }
    }

    pub fn domain(self) -> (f64, f64) {
        match self {
            TestFunction::P1 => (0.0, 2.0 * std::f64::consts::PI),
            TestFunction::P2 => (-4.0, 4.0),
            TestFunction::Line => (0.0, 10.0),
        }
    }

    pub fn default_samples(self) -> usize {
        match self {
            TestFunction::P1 => 47,
            TestFunction::P2 => 51,
            TestFunction::Line => 30,
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            TestFunction::P1 => (x.sin() * (2.0 * x).cos()).abs(),
            TestFunction::P2 => x.sin().abs(),
            TestFunction::Line => 0.7 * x + 1.0,
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestFunction::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownTestFunction(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    pub sigma: f64,
    /// Scale each draw by `|y_i|`.
    pub relative: bool,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn absolute(sigma: f64) -> Self {
        Self {
            sigma,
            relative: false,
        }
    }

    pub fn relative(sigma: f64) -> Self {
        Self {
            sigma,
            relative: true,
        }
    }

    /// Adds `σ·N(0,1)` (or `σ·|y|·N(0,1)`) to every value, drawing from a
    /// ChaCha8 stream seeded with `seed`.
    pub fn apply(&self, values: &mut [f64], seed: u64) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidInput(format!("noise sigma must be >= 0, got {}", self.sigma)));
        }
        if self.sigma == 0.0 {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in values.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            let scale = if self.relative { v.abs() } else { 1.0 };
            *v += self.sigma * scale * z;
        }
        Ok(())
    }
}

/// `m` uniform samples of a builtin function with seeded noise on the values.
pub fn generate_test_dataset(f: TestFunction, m: usize, noise: NoiseModel, seed: u64) -> Result<Dataset> {
    if m < 4 {
        return Err(Error::InvalidInput(format!("need at least 4 samples, got {m}")));
    }
    let (a, b) = f.domain();
    let xs = uniform_points(a, b, m);
    let mut ys: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
    noise.apply(&mut ys, seed)?;
    Dataset::new(xs, ys)
}

/// Parses two-column `x,y` CSV text. A first row that does not parse as
/// numbers is taken as a header.
pub fn parse_samples(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.len() != 2 {
            return Err(Error::Parse(format!(
                "row {}: expected 2 columns, found {}",
                i + 1,
                record.len()
            )));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if i == 0 => {}
            _ => {
                return Err(Error::Parse(format!(
                    "row {}: cannot parse `{},{}` as numbers",
                    i + 1,
                    &record[0],
                    &record[1]
                )))
            }
        }
    }
    Dataset::new(xs, ys)
}

pub fn load_samples(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_samples(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
