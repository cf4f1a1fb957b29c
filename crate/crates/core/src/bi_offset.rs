//! Bi-offset reconstruction: offsetting the offset spline back by the same
//! distance and fitting the generator's values there by least squares.

use nalgebra::DVector;

use crate::basis::{collocation, KnotVector, SplineModel};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::op_spline::OffsetSpec;
use crate::refinement::{ComponentStatus, RefinementResult};
use crate::solvers::solve_lsq;

#[derive(Debug, Clone, PartialEq)]
pub struct BiOffsetResult {
    pub model: SplineModel,
    pub abscissae: Vec<f64>,
    pub targets: Vec<f64>,
    pub rms_fit: f64,
    /// Numerical rank of the collocation matrix; below the basis dimension
    /// the coefficients are a basic least-squares solution.
    pub rank: usize,
    pub used_refinement: bool,
    /// Sample indices left out because the reconstruction abscissa, or the
    /// offset abscissa it is built from, lies outside the domain.
    pub dropped: Vec<usize>,
}

/// Abscissae of the back-offset points `X_j + s τ w_j/√(1+w_j²)`, where
/// `X_j = x̄̄_{o,j}` are the offset abscissae and `s = ±1` for the exterior and
/// interior side. Each lies strictly within `τ` of `X_j`.
pub fn back_offset_abscissae(offset_xs: &[f64], slopes: &[f64], spec: &OffsetSpec) -> Vec<f64> {
    let st = spec.signed_tau();
    offset_xs
        .iter()
        .zip(slopes)
        .map(|(&x, &w)| x + st * unit_component(w))
        .collect()
}

/// `w/√(1+w²)`, evaluated so that it stays finite and below one in magnitude.
fn unit_component(w: f64) -> f64 {
    if w.abs() > 1e150 {
        w.signum()
    } else {
        w / w.hypot(1.0)
    }
}

/// Reconstruction abscissae from the refined slopes `w_j = η_j t_j`.
pub fn reconstruction_abscissae(r: &RefinementResult, spec: &OffsetSpec) -> Vec<f64> {
    back_offset_abscissae(&r.offset_xs, &r.refined_slopes(), spec)
}

/// Least-squares fit `min_γ ‖B(abscissae) γ − targets‖²` on `kv_h`.
pub fn fit_bi_offset(targets: &[f64], abscissae: &[f64], kv_h: &KnotVector) -> Result<BiOffsetResult> {
    if targets.len() != abscissae.len() {
        return Err(Error::Dimension(format!(
            "{} targets for {} abscissae",
            targets.len(),
            abscissae.len()
        )));
    }
    if let Some(x) = abscissae.iter().find(|&&x| !kv_h.contains(x)) {
        let (a, b) = kv_h.domain();
        return Err(Error::Domain(format!("abscissa {x} outside [{a}, {b}]")));
    }
    let m = collocation(kv_h, abscissae, 0)?;
    let y = DVector::from_column_slice(targets);
    let sol = solve_lsq(&m, &y)?;
    let resid = &m * &sol.x - &y;
    let rms_fit = if targets.is_empty() {
        0.0
    } else {
        (resid.norm_squared() / targets.len() as f64).sqrt()
    };
    Ok(BiOffsetResult {
        model: SplineModel::new(kv_h.clone(), sol.x.iter().copied().collect())?,
        abscissae: abscissae.to_vec(),
        targets: targets.to_vec(),
        rms_fit,
        rank: sol.rank,
        used_refinement: false,
        dropped: Vec::new(),
    })
}

fn reconstruct<C: Curve + ?Sized>(
    g: &C,
    r: &RefinementResult,
    slopes: &[f64],
    spec: &OffsetSpec,
    kv_h: &KnotVector,
) -> Result<BiOffsetResult> {
    let all = back_offset_abscissae(&r.offset_xs, slopes, spec);
    let mut abscissae = Vec::with_capacity(all.len());
    let mut targets = Vec::with_capacity(all.len());
    let mut dropped = Vec::new();
    for (j, &x) in all.iter().enumerate() {
        if r.status[j] == ComponentStatus::OutOfDomain || !kv_h.contains(x) {
            dropped.push(j);
        } else {
            abscissae.push(x);
            targets.push(g.value(r.sample_xs[j])?);
        }
    }
    let mut out = fit_bi_offset(&targets, &abscissae, kv_h)?;
    out.dropped = dropped;
    Ok(out)
}

/// Bi-offset reconstruction with the refined slopes `η_j t_j`.
pub fn fit_bi_offset_refined<C: Curve + ?Sized>(
    g: &C,
    r: &RefinementResult,
    spec: &OffsetSpec,
    kv_h: &KnotVector,
) -> Result<BiOffsetResult> {
    let mut out = reconstruct(g, r, &r.refined_slopes(), spec, kv_h)?;
    out.used_refinement = true;
    Ok(out)
}

/// Bi-offset reconstruction with the raw offset slopes `f'(x̄̄_{o,j})` at the same samples.
pub fn fit_bi_offset_unrefined<C: Curve + ?Sized>(
    g: &C,
    r: &RefinementResult,
    spec: &OffsetSpec,
    kv_h: &KnotVector,
) -> Result<BiOffsetResult> {
    reconstruct(g, r, &r.offset_slopes, spec, kv_h)
}

/// Mean of `(model(x_i) − y_i)²`.
pub fn mse<C: Curve + ?Sized>(model: &C, ref_xs: &[f64], ref_ys: &[f64]) -> Result<f64> {
    if ref_xs.len() != ref_ys.len() {
        return Err(Error::Dimension(format!(
            "{} abscissae for {} ordinates",
            ref_xs.len(),
            ref_ys.len()
        )));
    }
    if ref_xs.is_empty() {
        return Err(Error::InvalidInput("mean squared error of an empty sample".into()));
    }
    let (a, b) = model.domain();
    let mut total = 0.0;
    for (&x, &y) in ref_xs.iter().zip(ref_ys) {
        if !(a..=b).contains(&x) {
            return Err(Error::Domain(format!("reference point {x} outside [{a}, {b}]")));
        }
        total += (model.value(x)? - y).powi(2);
    }
    Ok(total / ref_xs.len() as f64)
}

/// Mean squared difference of two curves over `xs`.
pub fn mse_between<A: Curve + ?Sized, B: Curve + ?Sized>(a: &A, b: &B, xs: &[f64]) -> Result<f64> {
    let ys: Vec<f64> = xs.iter().map(|&x| b.value(x)).collect::<Result<_>>()?;
    mse(a, xs, &ys)
}
