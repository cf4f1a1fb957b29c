//! Acceptance suite: one pass/fail line per criterion.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opspline::basis::{eval_basis, gram_second_derivative, KnotVector, SplineModel};
use opspline::bi_offset::mse_between;
use opspline::curve::{uniform_points, Curve};
use opspline::geometry::{curvature, detect_cusps, offset_curvature, unit_normal, CuspKind, PlanarPoint, Side};
use opspline::op_spline::{build_constraints, feasibility_residual, solve_op_spline, OffsetSpec};
use opspline::output::export_report;
use opspline::pipeline::{run_pipeline, ExperimentReport, ModelKind, PipelineConfig};
use opspline::refinement::{refine_tangents, ComponentStatus};
use opspline::basis::collocation;
use opspline::tp_spline::{
    derivative_data, fit_tp_spline, gcv_score, second_difference_matrix, Dataset, RegularizationParams,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn within(t: Instant, limit: Duration) -> Result<Duration, String> {
    let e = t.elapsed();
    check(e < limit, format!("took {e:.2?}, limit {limit:?}"))?;
    Ok(e)
}

fn random_spline(kv: &KnotVector, rng: &mut ChaCha8Rng, step: f64) -> SplineModel {
    let mut c = rng.gen_range(-1.0..1.0);
    let coeffs = (0..kv.dim())
        .map(|_| {
            c += rng.gen_range(-step..step);
            c
        })
        .collect();
    SplineModel::new(kv.clone(), coeffs).unwrap()
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol * (1.0 + whole.abs()) {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 30)
}

/// Derivative `d` of the degree-`p` B-spline `i`, restricted to the polynomial
/// piece on knot interval `iv` (Cox-de Boor).
fn piece(t: &[f64], i: usize, p: usize, d: usize, iv: usize, x: f64) -> f64 {
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    if p == 0 {
        return if d == 0 && i == iv { 1.0 } else { 0.0 };
    }
    if d > 0 {
        let l = ratio(piece(t, i, p - 1, d - 1, iv, x), t[i + p] - t[i]);
        let r = ratio(piece(t, i + 1, p - 1, d - 1, iv, x), t[i + p + 1] - t[i + 1]);
        return p as f64 * (l - r);
    }
    ratio(x - t[i], t[i + p] - t[i]) * piece(t, i, p - 1, 0, iv, x)
        + ratio(t[i + p + 1] - x, t[i + p + 1] - t[i + 1]) * piece(t, i + 1, p - 1, 0, iv, x)
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_pou: f64 = 0.0;
    for (a, b, n) in [(0.0, 1.0, 4), (-4.0, 4.0, 14), (0.0, 2.0 * std::f64::consts::PI, 20)] {
        let kv = KnotVector::uniform(a, b, n).unwrap();
        for _ in 0..10_000 {
            let x = rng.gen_range(a..=b);
            let s: f64 = eval_basis(&kv, x, 0).unwrap().values.iter().sum();
            worst_pou = worst_pou.max((s - 1.0).abs());
        }
    }
    check(worst_pou <= 1e-12, format!("partition of unity error {worst_pou:e}"))?;

    let mut worst_gram: f64 = 0.0;
    for n in [4, 8, 14, 20] {
        let kv = KnotVector::uniform(0.0, 1.0, n).unwrap();
        let r = gram_second_derivative(&kv);
        let k = kv.knots();
        for i in 0..n {
            for j in 0..n {
                let mut oracle = 0.0;
                for iv in 3..n {
                    let (lo, hi) = (k[iv], k[iv + 1]);
                    let f = |x: f64| piece(k, i, 3, 2, iv, x) * piece(k, j, 3, 2, iv, x);
                    oracle += adaptive_simpson(&f, lo, hi, 1e-14);
                }
                worst_gram = worst_gram.max((r[(i, j)] - oracle).abs());
            }
        }
    }
    check(worst_gram <= 1e-10, format!("Gram matrix deviation {worst_gram:e}"))?;
    let e = within(t, Duration::from_secs(5))?;
    Ok(format!(
        "partition of unity {worst_pou:.1e} <= 1e-12, Gram deviation {worst_gram:.1e} <= 1e-10, {e:.2?}"
    ))
}

fn line_config(taus: Vec<f64>) -> PipelineConfig {
    PipelineConfig {
        input: "line".into(),
        samples: opspline::pipeline::Count::Fixed(30),
        n: opspline::pipeline::Count::Auto,
        taus,
        ..PipelineConfig::default()
    }
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let report = run_pipeline(&line_config(vec![0.1, 0.5])).map_err(|e| e.to_string())?;
    let line = |x: f64| 0.7 * x + 1.0;
    let (mut dev, mut worst_mse, mut gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for cell in &report.cells {
        for mc in &cell.models {
            let m = mc
                .outcome
                .as_ref()
                .map_err(|e| format!("tau {} {} {}: {e}", cell.tau, cell.side, mc.model))?;
            let xo = &m.refinement.offset_xs;
            let shift = cell.side.signed(cell.tau) * 1.49f64.sqrt();
            for x in uniform_points(xo[0], xo[xo.len() - 1], 200) {
                dev = dev.max((m.offset.value(x).unwrap() - line(x) - shift).abs());
            }
            let xs = uniform_points(0.0, 10.0, 512);
            let ys: Vec<f64> = xs.iter().map(|&x| line(x)).collect();
            let e = opspline::bi_offset::mse(&m.refined.model, &xs, &ys).unwrap();
            let eu = opspline::bi_offset::mse(&m.unrefined.model, &xs, &ys).unwrap();
            worst_mse = worst_mse.max(e).max(eu);
            for &x in &xs {
                gap = gap.max((m.refined.model.value(x).unwrap() - m.unrefined.model.value(x).unwrap()).abs());
            }
        }
    }
    check(dev <= 1e-8, format!("offset deviates from the parallel line by {dev:e}"))?;
    check(worst_mse <= 1e-10, format!("bi-offset MSE {worst_mse:e}"))?;
    check(gap <= 1e-8, format!("refined and unrefined differ by {gap:e}"))?;
    let e = within(t, Duration::from_secs(2))?;
    Ok(format!(
        "offset deviation {dev:.1e}, bi-offset MSE {worst_mse:.1e}, refined/unrefined gap {gap:.1e}, {e:.2?}"
    ))
}

fn criterion_3(p1_run: &ExperimentReport) -> Outcome {
    let mut worst_dist: f64 = 0.0;
    let mut worst_orth: f64 = 0.0;
    let mut count = 0;
    let mut check_generator = |g: &dyn Curve, kv: &KnotVector, tau: f64, side: Side| -> Result<(), String> {
        let spec = OffsetSpec::for_basis(tau, side, kv.dim()).map_err(|e| e.to_string())?;
        let sys = build_constraints(g, &spec, kv).map_err(|e| e.to_string())?;
        let f = solve_op_spline(&sys, kv).map_err(|e| e.to_string())?;
        for (xb, xo) in sys.sample_xs.iter().zip(&sys.offset_xs) {
            let base = PlanarPoint::new(*xb, g.value(*xb).unwrap());
            let off = PlanarPoint::new(*xo, f.value(*xo).unwrap());
            worst_dist = worst_dist.max((base.distance(&off) - tau).abs());
            let n = unit_normal(g, *xb).unwrap();
            worst_orth = worst_orth.max(n.dot(&PlanarPoint::new(1.0, f.slope(*xo).unwrap())).abs());
            count += 1;
        }
        Ok(())
    };
    let tp = &p1_run.prepared.model(ModelKind::Tp).unwrap().generator;
    for tau in [0.1, 0.3] {
        for side in Side::BOTH {
            check_generator(tp, &p1_run.prepared.knots, tau, side)?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let kv = KnotVector::uniform(0.0, 3.0, 14).unwrap();
    for i in 0..20 {
        let g = random_spline(&kv, &mut rng, 0.3);
        check_generator(&g, &kv, rng.gen_range(0.02..0.2), Side::BOTH[i % 2])?;
    }
    check(worst_dist <= 1e-8, format!("distance error {worst_dist:e}"))?;
    check(worst_orth <= 1e-8, format!("orthogonality residual {worst_orth:e}"))?;
    Ok(format!(
        "{count} constraint points: |dist - tau| {worst_dist:.1e}, orthogonality {worst_orth:.1e}"
    ))
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let xs = uniform_points(-1.0, 1.0, 201);
    let ys = xs.iter().map(|x| x * x).collect();
    let d = Dataset::new(xs, ys).unwrap();
    let kv = KnotVector::uniform(-1.0, 1.0, 24).unwrap();
    let g = fit_tp_spline(&d, &kv, RegularizationParams::new(0.0, 0.0).unwrap()).map_err(|e| e.to_string())?;
    let tau = -0.5;
    let cusps = detect_cusps(&g, tau, 512).map_err(|e| e.to_string())?;
    check(cusps.len() == 1, format!("{} roots found: {cusps:?}", cusps.len()))?;
    let c = cusps[0];
    check(c.location.abs() <= 1e-3, format!("root at {}", c.location))?;
    check(c.kind == CuspKind::Degenerate, format!("root classified {:?}", c.kind))?;
    check((c.curvature - 2.0).abs() <= 1e-6, format!("curvature at root {}", c.curvature))?;
    let mut smallest = f64::INFINITY;
    for d in [-1e-3, -5e-4, -1e-4, 1e-4, 5e-4, 1e-3] {
        let k = curvature(&g, c.location + d).unwrap();
        let ko = match offset_curvature(k, tau) {
            Ok(v) => v.abs(),
            Err(_) => f64::INFINITY,
        };
        smallest = smallest.min(ko);
    }
    check(smallest > 1e3, format!("offset curvature only {smallest:e} near the root"))?;
    let e = within(t, Duration::from_secs(1))?;
    Ok(format!(
        "one degenerate root at {:.1e}, k = {:.9}, min |k_o| within 1e-3 = {smallest:.2e}, {e:.2?}",
        c.location, c.curvature
    ))
}

fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    let mut padded = DMatrix::zeros(n, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max();
    let cols: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= 1e-10 * smax).collect();
    DMatrix::from_fn(n, cols.len(), |r, c| vt[(cols[c], r)])
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let kv = KnotVector::uniform(0.0, 3.0, 14).unwrap();
    let r = gram_second_derivative(&kv);
    let mut worst_feas: f64 = 0.0;
    let mut worst_gain = f64::INFINITY;
    for i in 0..20 {
        let g = random_spline(&kv, &mut rng, 0.3);
        let tau = rng.gen_range(0.02..0.2);
        let spec = OffsetSpec::new(tau, Side::BOTH[i % 2], 6, 24).unwrap();
        let sys = build_constraints(&g, &spec, &kv).map_err(|e| format!("instance {i}: {e}"))?;
        let f = solve_op_spline(&sys, &kv).map_err(|e| format!("instance {i}: {e}"))?;
        worst_feas = worst_feas.max(feasibility_residual(&sys, &f));
        let beta = DVector::from_column_slice(f.coeffs());
        let e0 = beta.dot(&(&r * &beta));
        let z = null_space(&sys.a);
        check(z.ncols() == 2, format!("instance {i}: null space of dimension {}", z.ncols()))?;
        for _ in 0..10_000 {
            let scale = 10f64.powf(rng.gen_range(-6.0..0.0));
            let w = DVector::from_fn(z.ncols(), |_, _| rng.gen_range(-1.0..1.0) * scale);
            let p = &beta + &z * w;
            let gain = p.dot(&(&r * &p)) - e0;
            // relative rounding allowance on the energy evaluation
            worst_gain = worst_gain.min(gain / (1.0 + e0));
        }
    }
    check(worst_feas <= 1e-8, format!("feasibility residual {worst_feas:e}"))?;
    check(worst_gain >= -1e-12, format!("a feasible perturbation lowered the energy by {worst_gain:e}"))?;
    Ok(format!(
        "20 instances x 10^4 perturbations: min relative energy change {worst_gain:.1e}, feasibility {worst_feas:.1e}"
    ))
}

fn svd_gcv(d: &Dataset, kv: &KnotVector, p: RegularizationParams) -> f64 {
    // H = U1 U1ᵀ where U1 holds the first m rows of U for the stacked design
    let deriv = derivative_data(d);
    let blocks = [
        collocation(kv, d.xs(), 0).unwrap(),
        collocation(kv, d.xs(), 1).unwrap() * p.mu,
        collocation(kv, &deriv.mid_xs, 1).unwrap() * p.mu,
        second_difference_matrix(kv.dim()) * p.lambda,
    ];
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut stacked = DMatrix::zeros(rows, kv.dim());
    let mut at = 0;
    for b in &blocks {
        stacked.view_mut((at, 0), (b.nrows(), kv.dim())).copy_from(b);
        at += b.nrows();
    }
    let m = d.len();
    let svd = SVD::new(stacked, true, false);
    let u1 = svd.u.unwrap().rows(0, m).into_owned();
    let h = &u1 * u1.transpose();
    let y = DVector::from_column_slice(d.ys());
    let resid = &y - &h * &y;
    let ratio = h.trace() / m as f64;
    (resid.norm_squared() / m as f64) / (1.0 - ratio).powi(2)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (a, b, m, n, f) in [
        (0.0, 2.0 * std::f64::consts::PI, 47, 14, (|x: f64| (x.sin() * (2.0 * x).cos()).abs()) as fn(f64) -> f64),
        (-4.0, 4.0, 51, 14, |x: f64| x.sin().abs()),
        (0.0, 1.0, 40, 10, |x: f64| (3.0 * x).exp()),
        (-1.0, 2.0, 25, 9, |x: f64| x * x * x - x),
        (0.0, 5.0, 60, 20, |x: f64| (2.0 * x).cos()),
    ] {
        let xs = uniform_points(a, b, m);
        let ys = xs.iter().map(|&x| f(x) + 0.05 * rng.gen_range(-1.0..1.0)).collect();
        let d = Dataset::new(xs, ys).unwrap();
        let kv = KnotVector::uniform(a, b, n).unwrap();
        for lambda in [1e-4, 1e-2, 1e-1, 1.0, 10.0] {
            for mu in [0.0, 0.05] {
                let p = RegularizationParams::new(mu, lambda).unwrap();
                let ours = gcv_score(&d, &kv, p).map_err(|e| e.to_string())?;
                let oracle = svd_gcv(&d, &kv, p);
                worst = worst.max((ours - oracle).abs() / oracle.abs());
                cases += 1;
            }
        }
    }
    check(worst <= 1e-8, format!("relative GCV deviation {worst:e}"))?;
    Ok(format!("{cases} cases (5 datasets x 5 lambdas x 2 mu): max relative deviation {worst:.1e}"))
}

fn mse_of(report: &ExperimentReport, tau: f64, side: Side, model: ModelKind) -> Result<f64, String> {
    let cell = report.cell(tau, side, model).ok_or(format!("missing cell {tau} {side} {model}"))?;
    cell.outcome
        .as_ref()
        .map(|m| m.refined_error.mse_model)
        .map_err(|e| format!("tau {tau} {side} {model}: {e}"))
}

fn band(value: f64, target: f64) -> bool {
    value <= 10.0 * target && value >= target / 10.0
}

fn experiment_config(input: &str) -> PipelineConfig {
    PipelineConfig {
        input: input.into(),
        n: opspline::pipeline::Count::Fixed(14),
        taus: vec![0.1, 0.3],
        ..PipelineConfig::default()
    }
}

fn criterion_7(report: &ExperimentReport, elapsed: Duration) -> Outcome {
    let int = mse_of(report, 0.1, Side::Interior, ModelKind::Tp)?;
    let ext = mse_of(report, 0.1, Side::Exterior, ModelKind::Tp)?;
    check(band(int, 5.9752e-6), format!("interior MSE {int:.4e} outside [5.98e-7, 5.98e-5]"))?;
    check(band(ext, 6.7020e-6), format!("exterior MSE {ext:.4e} outside [6.70e-7, 6.70e-5]"))?;
    for model in ModelKind::ALL {
        for side in Side::BOTH {
            let a = mse_of(report, 0.1, side, model)?;
            let b = mse_of(report, 0.3, side, model)?;
            check(a < b, format!("{model} {side}: tau=0.1 MSE {a:.3e} not below tau=0.3 MSE {b:.3e}"))?;
        }
    }
    check(elapsed < Duration::from_secs(30), format!("took {elapsed:.2?}"))?;
    Ok(format!(
        "interior {int:.4e} ({:.2}x of 5.9752e-06), exterior {ext:.4e} ({:.2}x of 6.7020e-06), ordering holds for all models, {elapsed:.2?}",
        int / 5.9752e-6,
        ext / 6.7020e-6
    ))
}

fn criterion_8(report: &ExperimentReport) -> Outcome {
    let int = mse_of(report, 0.1, Side::Interior, ModelKind::Tp)?;
    check(band(int, 1.0992e-6), format!("interior MSE {int:.4e} outside [1.10e-7, 1.10e-5]"))?;
    let mut rows = Vec::new();
    for side in Side::BOTH {
        let a = mse_of(report, 0.1, side, ModelKind::Tp)?;
        let b = mse_of(report, 0.3, side, ModelKind::Tp)?;
        check(a < b, format!("tp {side}: MSE not increasing ({a:.3e} -> {b:.3e})"))?;
        rows.push(format!("{side} {a:.2e} -> {b:.2e}"));
    }
    Ok(format!(
        "interior {int:.4e} ({:.2}x of 1.0992e-06); growth with tau: {}",
        int / 1.0992e-6,
        rows.join(", ")
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let kv = KnotVector::uniform(0.0, 3.0, 14).unwrap();
    let (mut worst, mut worst_resid): (f64, f64) = (0.0, 0.0);
    let mut compared = 0;
    for i in 0..20 {
        let g = random_spline(&kv, &mut rng, 0.3);
        let spec = OffsetSpec::for_basis(rng.gen_range(0.02..0.2), Side::BOTH[i % 2], kv.dim()).unwrap();
        let sys = build_constraints(&g, &spec, &kv).map_err(|e| format!("instance {i}: {e}"))?;
        let f = solve_op_spline(&sys, &kv).map_err(|e| format!("instance {i}: {e}"))?;
        let r = refine_tangents(&f, &g, &spec).map_err(|e| format!("instance {i}: {e}"))?;
        check(r.converged, format!("instance {i}: CG did not converge"))?;
        worst_resid = worst_resid.max(r.cg_residual);
        for j in 0..r.len() {
            if r.status[j] == ComponentStatus::Active {
                let closed = f.slope(r.offset_xs[j]).unwrap() / r.tangents[j];
                worst = worst.max((r.eta[j] - closed).abs() / (1.0 + closed.abs()));
                compared += 1;
            }
        }
    }
    check(worst <= 1e-8, format!("closed-form deviation {worst:e}"))?;
    check(worst_resid <= 1e-10, format!("CG residual {worst_resid:e}"))?;
    Ok(format!(
        "{compared} components: max deviation {worst:.1e}, max CG residual {worst_resid:.1e}"
    ))
}

fn read_all(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn criterion_10() -> Outcome {
    let cfg = PipelineConfig {
        input: "p2".into(),
        noise_sigma: 0.02,
        seed: 17,
        taus: vec![0.1, 0.3],
        ..PipelineConfig::default()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let report = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        export_report(&report, d.path()).map_err(|e| e.to_string())?;
    }
    let (a, b) = (read_all(dirs[0].path()), read_all(dirs[1].path()));
    check(a.len() == 4, format!("{} files written", a.len()))?;
    for ((na, ba), (nb, bb)) in a.iter().zip(&b) {
        check(na == nb && ba == bb, format!("{na} differs between runs"))?;
    }
    let bytes: usize = a.iter().map(|f| f.1.len()).sum();
    Ok(format!(
        "{} files ({bytes} bytes) identical across two seeded runs",
        a.len()
    ))
}

fn notes(t1: &ExperimentReport, t2: &ExperimentReport) -> Vec<String> {
    let mut out = Vec::new();
    for side in Side::BOTH {
        if let Some(Ok(m)) = t1.cell(0.3, side, ModelKind::Tp).map(|c| &c.outcome) {
            out.push(format!(
                "p1 tau=0.3 {side}: back-offset of the offset spline has {} cusp(s) on a 512-point scan",
                m.offset_cusps
            ));
        }
    }
    if let Some(Ok(m)) = t2.cell(0.3, Side::Interior, ModelKind::Tp).map(|c| &c.outcome) {
        let g = &t2.prepared.model(ModelKind::Tp).unwrap().generator;
        let window: Vec<f64> = uniform_points(-4.0, 4.0, 512)
            .into_iter()
            .filter(|x| x.abs() >= 0.8 * 4.0)
            .collect();
        let r = mse_between(&m.refined.model, g, &window).unwrap();
        let u = mse_between(&m.unrefined.model, g, &window).unwrap();
        out.push(format!(
            "p2 tau=0.3 interior boundary-window MSE: refined {r:.6e}, unrefined {u:.6e}"
        ));
    }
    out
}

fn main() {
    let t = Instant::now();
    let p1_run = run_pipeline(&experiment_config("p1")).expect("p1 experiment");
    let t1_elapsed = t.elapsed();
    let p2_run = run_pipeline(&experiment_config("p2")).expect("p2 experiment");

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("basis exactness", Box::new(criterion_1)),
        ("line fixed point", Box::new(criterion_2)),
        ("offset-distance invariant", Box::new(|| criterion_3(&p1_run))),
        ("cusp condition", Box::new(criterion_4)),
        ("KKT optimality", Box::new(criterion_5)),
        ("GCV cross-check", Box::new(criterion_6)),
        ("p1 reconstruction band", Box::new(|| criterion_7(&p1_run, t1_elapsed))),
        ("p2 reconstruction band", Box::new(|| criterion_8(&p2_run))),
        ("refinement closed form", Box::new(criterion_9)),
        ("determinism", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    for n in notes(&p1_run, &p2_run) {
        println!("note: {n}");
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
