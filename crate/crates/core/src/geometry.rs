//! Normals, curvature, theoretical offsets and cusp detection for Cartesian
//! curves `y = g(x)`, parametrized as `r(t) = (t, g(t))`.

use serde::{Deserialize, Serialize};

use crate::curve::{uniform_points, Curve};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &PlanarPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dot(&self, other: &PlanarPoint) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Which side of the generator an offset lies on. The exterior side follows
/// the upward principal normal `(−g', 1)/√(1+g'²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Interior,
    Exterior,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Interior, Side::Exterior];

    /// `+1` for the exterior, `−1` for the interior.
    pub fn sign(self) -> f64 {
        match self {
            Side::Exterior => 1.0,
            Side::Interior => -1.0,
        }
    }

    /// Signed offset distance for an unsigned `tau`.
    pub fn signed(self, tau: f64) -> f64 {
        self.sign() * tau
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Interior => "interior",
            Side::Exterior => "exterior",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "interior" | "int" | "in" => Ok(Side::Interior),
            "exterior" | "ext" | "out" => Ok(Side::Exterior),
            other => Err(Error::Parse(format!("unknown side `{other}`"))),
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub fn unit_normal<C: Curve + ?Sized>(g: &C, x: f64) -> Result<PlanarPoint> {
    let s = g.slope(x)?;
    let len = s.hypot(1.0);
    Ok(PlanarPoint::new(-s / len, 1.0 / len))
}

pub fn unit_tangent<C: Curve + ?Sized>(g: &C, x: f64) -> Result<PlanarPoint> {
    let s = g.slope(x)?;
    let len = s.hypot(1.0);
    Ok(PlanarPoint::new(1.0 / len, s / len))
}

/// Signed curvature `g'' / (1 + g'²)^{3/2}`.
pub fn curvature<C: Curve + ?Sized>(g: &C, x: f64) -> Result<f64> {
    let s = g.slope(x)?;
    let s2 = g.eval(x, 2)?;
    Ok(s2 / (1.0 + s * s).powf(1.5))
}

/// The point `(x, g(x)) + τ N(x)` at signed distance `tau`.
pub fn theoretical_offset<C: Curve + ?Sized>(g: &C, x: f64, tau: f64) -> Result<PlanarPoint> {
    if tau == 0.0 {
        return Err(Error::ZeroRadius);
    }
    let y = g.value(x)?;
    let n = unit_normal(g, x)?;
    Ok(PlanarPoint::new(x + tau * n.x, y + tau * n.y))
}

/// Curvature `k / |1 + τk|` of the offset at the point corresponding to a
/// generator point of curvature `k`.
pub fn offset_curvature(k: f64, tau: f64) -> Result<f64> {
    let denom = (1.0 + tau * k).abs();
    if denom < 1e-12 {
        return Err(Error::CuspSingularity(denom));
    }
    Ok(k / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CuspKind {
    /// `k' ≠ 0`: tangent and normal of the offset flip across the point.
    Ordinary,
    /// `k' = 0`: the offset curvature blows up without an orientation flip.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspReport {
    pub location: f64,
    pub kind: CuspKind,
    pub curvature: f64,
    pub curvature_derivative: f64,
}

/// Threshold on `|k'|` separating ordinary from degenerate cusps.
pub const DEGENERATE_SLOPE: f64 = 1e-6;
const ROOT_WIDTH: f64 = 1e-10;

/// Locates abscissae where `1 + τ k(x) = 0`.
///
/// `φ(x) = 1 + τk(x)` is sampled on `grid_size` uniform points; every sign
/// change is bisected down to an interval of width `1e-10`. Local minima of
/// `|φ|` without a sign change are refined by golden-section search and
/// kept when they satisfy the root condition, and roots closer than the
/// finite-difference step are merged. `k'` is estimated by central
/// differences with a step of 1/100 of the grid spacing.
pub fn detect_cusps<C: Curve + ?Sized>(g: &C, tau: f64, grid_size: usize) -> Result<Vec<CuspReport>> {
    if tau == 0.0 {
        return Err(Error::ZeroRadius);
    }
    if grid_size < 16 {
        return Err(Error::InvalidInput(format!(
            "cusp scan needs at least 16 grid points, got {grid_size}"
        )));
    }
    let (a, b) = g.domain();
    let phi = |x: f64| -> Result<f64> { Ok(1.0 + tau * curvature(g, x)?) };
    let xs = uniform_points(a, b, grid_size);
    let values: Vec<f64> = xs.iter().map(|&x| phi(x)).collect::<Result<_>>()?;
    let scan_step = (b - a) / (grid_size - 1) as f64;
    let fd_step = scan_step / 100.0;

    let mut roots = Vec::new();
    for i in 0..grid_size - 1 {
        let (f0, f1) = (values[i], values[i + 1]);
        if f0 == 0.0 {
            roots.push(xs[i]);
        } else if f0 * f1 < 0.0 {
            roots.push(bisect(&phi, xs[i], xs[i + 1], f0)?);
        }
    }
    if values[grid_size - 1] == 0.0 {
        roots.push(xs[grid_size - 1]);
    }
    for i in 1..grid_size - 1 {
        let (fl, f0, fr) = (values[i - 1], values[i], values[i + 1]);
        let no_crossing = fl * f0 > 0.0 && f0 * fr > 0.0;
        if no_crossing && f0.abs() <= fl.abs() && f0.abs() <= fr.abs() {
            let x = golden_min(|x| phi(x).map(f64::abs), xs[i - 1], xs[i + 1])?;
            let k = curvature(g, x)?;
            if (1.0 + tau * k).abs() <= 1e-6 * (1.0 + (tau * k).abs()) {
                roots.push(x);
            }
        }
    }
    roots.sort_by(f64::total_cmp);

    let mut merged: Vec<f64> = Vec::new();
    let mut cluster: Vec<f64> = Vec::new();
    for r in roots {
        if let Some(&last) = cluster.last() {
            if r - last > fd_step {
                merged.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
                cluster.clear();
            }
        }
        cluster.push(r);
    }
    if !cluster.is_empty() {
        merged.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
    }

    merged
        .into_iter()
        .map(|x| {
            let k = curvature(g, x)?;
            let lo = (x - fd_step).max(a);
            let hi = (x + fd_step).min(b);
            let dk = (curvature(g, hi)? - curvature(g, lo)?) / (hi - lo);
            Ok(CuspReport {
                location: x,
                kind: if dk.abs() > DEGENERATE_SLOPE {
                    CuspKind::Ordinary
                } else {
                    CuspKind::Degenerate
                },
                curvature: k,
                curvature_derivative: dk,
            })
        })
        .collect()
}

fn bisect(phi: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64> {
    while hi - lo > ROOT_WIDTH {
        let mid = 0.5 * (lo + hi);
        let fm = phi(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn golden_min(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while hi - lo > ROOT_WIDTH {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Offset abscissae together with the indices that fell outside the target domain.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetAbscissae {
    pub values: Vec<f64>,
    pub out_of_range: Vec<usize>,
}

/// Abscissae `x ∓ τ g'(x)/√(1+g'(x)²)` of the offset points for unsigned
/// `tau > 0` on the given side (minus for the exterior). Values outside
/// `domain` are reported, not clamped.
pub fn offset_abscissae<C: Curve + ?Sized>(
    g: &C,
    xs: &[f64],
    tau: f64,
    side: Side,
    domain: (f64, f64),
) -> Result<OffsetAbscissae> {
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(format!("offset distance must be positive, got {tau}")));
    }
    let slack = 1e-12 * (domain.1 - domain.0);
    let mut values = Vec::with_capacity(xs.len());
    let mut out_of_range = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let n = unit_normal(g, x)?;
        let xo = x + side.signed(tau) * n.x;
        if xo < domain.0 - slack || xo > domain.1 + slack {
            out_of_range.push(i);
        }
        values.push(xo);
    }
    Ok(OffsetAbscissae {
        values,
        out_of_range,
    })
}
