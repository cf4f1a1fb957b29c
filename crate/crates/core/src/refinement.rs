//! Tangent refinement: scalings `η` that make the offset slope proportional to
//! the normalized generator slope at corresponding points.

use nalgebra::{DMatrix, DVector};

use crate::basis::SplineModel;
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::geometry::offset_abscissae;
use crate::op_spline::OffsetSpec;
use crate::solvers::{conjugate_gradient_jacobi, CG_DEFAULT_TOL};

/// Components with `|t_j|` at or below this are treated as degenerate.
pub const DEGENERATE_TANGENT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentStatus {
    Active,
    /// `|t_j| ≤ 1e-10`: no orientation information, `η_j = 0`.
    DegenerateTangent,
    /// The offset abscissa fell outside the offset spline's domain, `η_j = 0`.
    OutOfDomain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementResult {
    pub eta: Vec<f64>,
    /// Generator abscissae `x̄̄`.
    pub sample_xs: Vec<f64>,
    /// Offset abscissae `x̄̄_o`.
    pub offset_xs: Vec<f64>,
    /// Normalized generator slopes `t_j = g'(x̄̄_j) / ‖g'(x̄̄)‖₂`.
    pub tangents: Vec<f64>,
    /// Offset slopes `f'(x̄̄_{o,j})` (zero where out of domain).
    pub offset_slopes: Vec<f64>,
    pub status: Vec<ComponentStatus>,
    pub cg_residual: f64,
    pub cg_iterations: usize,
    pub converged: bool,
}

impl RefinementResult {
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// `w_j = η_j t_j`, the refined slope used for reconstruction.
    pub fn refined_slopes(&self) -> Vec<f64> {
        self.eta.iter().zip(&self.tangents).map(|(e, t)| e * t).collect()
    }

    pub fn degenerate(&self) -> Vec<usize> {
        self.indices_with(ComponentStatus::DegenerateTangent)
    }

    pub fn out_of_domain(&self) -> Vec<usize> {
        self.indices_with(ComponentStatus::OutOfDomain)
    }

    fn indices_with(&self, s: ComponentStatus) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.status[i] == s).collect()
    }
}

/// The refinement solve proper, given offset slopes `f'(x̄̄_o)` and generator
/// slopes `g'(x̄̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentScaling {
    pub eta: Vec<f64>,
    pub tangents: Vec<f64>,
    pub status: Vec<ComponentStatus>,
    pub cg_residual: f64,
    pub cg_iterations: usize,
    pub converged: bool,
}

/// Solves `min_η ‖f' − Tη‖²` with `T = diag(t)` via Jacobi-preconditioned
/// conjugate gradients on the normal equations `TᵀT η = Tᵀ f'`, restricted to the components flagged active
/// in `mask` whose tangent is not degenerate.
pub fn solve_tangent_scaling(
    offset_slopes: &[f64],
    generator_slopes: &[f64],
    mask: &[bool],
) -> Result<TangentScaling> {
    let p = generator_slopes.len();
    if offset_slopes.len() != p || mask.len() != p {
        return Err(Error::Dimension(format!(
            "{} offset slopes, {} generator slopes, {} mask entries",
            offset_slopes.len(),
            p,
            mask.len()
        )));
    }
    let norm = generator_slopes.iter().map(|s| s * s).sum::<f64>().sqrt();
    let tangents: Vec<f64> = if norm > 0.0 {
        generator_slopes.iter().map(|s| s / norm).collect()
    } else {
        vec![0.0; p]
    };
    let status: Vec<ComponentStatus> = (0..p)
        .map(|j| {
            if !mask[j] {
                ComponentStatus::OutOfDomain
            } else if tangents[j].abs() <= DEGENERATE_TANGENT {
                ComponentStatus::DegenerateTangent
            } else {
                ComponentStatus::Active
            }
        })
        .collect();
    let active: Vec<usize> = (0..p).filter(|&j| status[j] == ComponentStatus::Active).collect();
    let k = active.len();
    let mut eta = vec![0.0; p];
    if k == 0 {
        return Ok(TangentScaling {
            eta,
            tangents,
            status,
            cg_residual: 0.0,
            cg_iterations: 0,
            converged: true,
        });
    }
    let h = DMatrix::from_fn(k, k, |r, c| if r == c { tangents[active[r]].powi(2) } else { 0.0 });
    let rhs = DVector::from_fn(k, |r, _| tangents[active[r]] * offset_slopes[active[r]]);
    let cg = conjugate_gradient_jacobi(&h, &rhs, CG_DEFAULT_TOL, 10 * k)?;
    for (r, &j) in active.iter().enumerate() {
        eta[j] = cg.x[r];
    }
    Ok(TangentScaling {
        eta,
        tangents,
        status,
        cg_residual: cg.residual_norm,
        cg_iterations: cg.iterations,
        converged: cg.converged,
    })
}

/// Tangent refinement on `p` abscissae spanning the constraint range of `spec`.
pub fn refine_tangents<C: Curve + ?Sized>(
    f: &SplineModel,
    g: &C,
    spec: &OffsetSpec,
) -> Result<RefinementResult> {
    let kv = f.knots();
    let sample_xs = spec.sample_points(g, kv, spec.p)?;
    let offsets = offset_abscissae(g, &sample_xs, spec.tau, spec.side, kv.domain())?;
    let mut mask = vec![true; sample_xs.len()];
    for &i in &offsets.out_of_range {
        mask[i] = false;
    }
    let generator_slopes: Vec<f64> = sample_xs.iter().map(|&x| g.slope(x)).collect::<Result<_>>()?;
    let offset_slopes: Vec<f64> = offsets
        .values
        .iter()
        .zip(&mask)
        .map(|(&x, &ok)| if ok { f.slope(x) } else { Ok(0.0) })
        .collect::<Result<_>>()?;
    let s = solve_tangent_scaling(&offset_slopes, &generator_slopes, &mask)?;
    Ok(RefinementResult {
        eta: s.eta,
        sample_xs,
        offset_xs: offsets.values,
        tangents: s.tangents,
        offset_slopes,
        status: s.status,
        cg_residual: s.cg_residual,
        cg_iterations: s.cg_iterations,
        converged: s.converged,
    })
}

/// Active components where `η_j < 0`, i.e. the offset tangent opposes the
/// generator tangent.
pub fn orientation_report(result: &RefinementResult) -> Vec<usize> {
    (0..result.len())
        .filter(|&j| result.status[j] == ComponentStatus::Active && result.eta[j] < 0.0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::KnotVector;
    use crate::geometry::Side;
    use crate::op_spline::fit_op_spline;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual(fp: &[f64], t: &[f64], eta: &[f64]) -> f64 {
        fp.iter()
            .zip(t)
            .zip(eta)
            .map(|((f, t), e)| (f - t * e).powi(2))
            .sum()
    }

    fn line_model(kv: &KnotVector, slope: f64, icpt: f64) -> SplineModel {
        let k = kv.knots();
        let coeffs = (0..kv.dim())
            .map(|j| icpt + slope * (k[j + 1] + k[j + 2] + k[j + 3]) / 3.0)
            .collect();
        SplineModel::new(kv.clone(), coeffs).unwrap()
    }

    fn smooth_random(kv: &KnotVector, seed: u64, amp: f64) -> SplineModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = 0.0;
        let coeffs = (0..kv.dim())
            .map(|_| {
                c += rng.gen_range(-amp..amp);
                c
            })
            .collect();
        SplineModel::new(kv.clone(), coeffs).unwrap()
    }

    #[test]
    fn perfect_proportionality_gives_unit_eta() {
        let g = [0.6, -0.8, 0.0, 0.0];
        let s = solve_tangent_scaling(&g, &g, &[true; 4]).unwrap();
        assert_abs_diff_eq!(s.eta[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eta[1], 1.0, epsilon = 1e-12);
        assert_eq!(s.status[2], ComponentStatus::DegenerateTangent);
        assert_eq!(s.eta[2], 0.0);
        assert!(s.converged);
    }

    #[test]
    fn line_generator_gives_constant_eta() {
        let kv = KnotVector::uniform(0.0, 10.0, 9).unwrap();
        let g = line_model(&kv, 0.7, 1.0);
        for side in Side::BOTH {
            let spec = OffsetSpec::for_basis(0.5, side, kv.dim()).unwrap();
            let f = fit_op_spline(&g, &spec, &kv).unwrap();
            let r = refine_tangents(&f, &g, &spec).unwrap();
            let mean = r.eta.iter().sum::<f64>() / r.len() as f64;
            let var = r.eta.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / r.len() as f64;
            assert!(var <= 1e-12, "{var}");
            assert_abs_diff_eq!(mean, 0.7 * (r.len() as f64).sqrt(), epsilon = 1e-8);
            assert!(orientation_report(&r).is_empty());
        }
    }

    #[test]
    fn closed_form_and_optimality_on_random_instances() {
        let kv = KnotVector::uniform(0.0, 3.0, 14).unwrap();
        for seed in 0..20 {
            let g = smooth_random(&kv, seed, 0.3);
            let spec = OffsetSpec::for_basis(0.1, Side::BOTH[(seed % 2) as usize], kv.dim()).unwrap();
            let f = fit_op_spline(&g, &spec, &kv).unwrap();
            let r = refine_tangents(&f, &g, &spec).unwrap();
            assert!(r.converged);
            assert!(r.cg_residual <= 1e-10, "{}", r.cg_residual);
            for j in 0..r.len() {
                if r.status[j] == ComponentStatus::Active {
                    let closed = r.offset_slopes[j] / r.tangents[j];
                    assert!(
                        (r.eta[j] - closed).abs() <= 1e-8 * (1.0 + closed.abs()),
                        "seed {seed} j {j}: {} vs {closed}",
                        r.eta[j]
                    );
                }
            }
            let base = residual(&r.offset_slopes, &r.tangents, &r.eta);
            for j in 0..r.len() {
                for eps in [1e-5, -1e-5] {
                    let mut e = r.eta.clone();
                    e[j] += eps;
                    assert!(residual(&r.offset_slopes, &r.tangents, &e) >= base - 1e-15);
                }
            }
        }
    }

    #[test]
    fn scaling_generator_slopes_rescales_nothing() {
        let fp = [0.3, -1.2, 0.8, 2.0];
        let gp = [0.5, -1.0, 1.5, 1.9];
        let a = solve_tangent_scaling(&fp, &gp, &[true; 4]).unwrap();
        let scaled: Vec<f64> = gp.iter().map(|v| v * 7.5).collect();
        let b = solve_tangent_scaling(&fp, &scaled, &[true; 4]).unwrap();
        for (x, y) in a.eta.iter().zip(&b.eta) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn flipped_sample_is_reported() {
        let gp = [0.5, 1.0, -0.7, 0.2, 0.9];
        let mut fp = gp;
        fp[3] = -0.2;
        let s = solve_tangent_scaling(&fp, &gp, &[true; 5]).unwrap();
        let r = RefinementResult {
            eta: s.eta,
            sample_xs: vec![0.0; 5],
            offset_xs: vec![0.0; 5],
            tangents: s.tangents,
            offset_slopes: fp.to_vec(),
            status: s.status,
            cg_residual: s.cg_residual,
            cg_iterations: s.cg_iterations,
            converged: s.converged,
        };
        assert_eq!(orientation_report(&r), vec![3]);
    }

    #[test]
    fn masked_components_are_skipped() {
        let s = solve_tangent_scaling(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0], &[true, false, true]).unwrap();
        assert_eq!(s.status[1], ComponentStatus::OutOfDomain);
        assert_eq!(s.eta[1], 0.0);
        assert!(solve_tangent_scaling(&[1.0], &[1.0, 2.0], &[true, true]).is_err());
    }
}
