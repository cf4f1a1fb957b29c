//! Box-constrained Nelder–Mead simplex search.

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexOptions {
    pub max_evals: usize,
    /// Stop once every vertex lies within this distance (max-norm) of the best one.
    pub tol: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct SimplexResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Minimizes `f` starting from `start` with an axis-aligned initial simplex of
/// edge `step`. Every coordinate is clamped to `[lower, upper]`.
pub(crate) fn minimize<F>(mut f: F, start: &[f64], step: f64, opts: SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = start.len();
    let clamp = |p: &mut Vec<f64>| {
        for v in p.iter_mut() {
            *v = v.clamp(opts.lower, opts.upper);
        }
    };
    let mut evals = 0usize;
    let mut eval = |p: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(p);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let first = start.to_vec();
    let v0 = eval(&first, &mut evals);
    simplex.push((first, v0));
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += step;
        if p[i] > opts.upper {
            p[i] = start[i] - step;
        }
        clamp(&mut p);
        let v = eval(&p, &mut evals);
        simplex.push((p, v));
    }

    loop {
        // stable sort keeps the earlier vertex first on ties
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].0.clone();
        let spread = simplex[1..]
            .iter()
            .flat_map(|(p, _)| p.iter().zip(&best).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        if spread <= opts.tol || evals >= opts.max_evals {
            break;
        }

        let worst = simplex[dim].clone();
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(p, _)| p[k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clamp(&mut p);
            p
        };

        let reflected = along(1.0);
        let fr = eval(&reflected, &mut evals);
        if fr < simplex[0].1 {
            let expanded = along(2.0);
            let fe = eval(&expanded, &mut evals);
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let p = along(0.5);
            let v = eval(&p, &mut evals);
            (p, v)
        } else {
            let p = along(-0.5);
            let v = eval(&p, &mut evals);
            (p, v)
        };
        if fc < worst.1.min(fr) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=dim {
            let p: Vec<f64> = simplex[i]
                .0
                .iter()
                .zip(&best)
                .map(|(x, b)| b + 0.5 * (x - b))
                .collect();
            let v = eval(&p, &mut evals);
            simplex[i] = (p, v);
        }
    }

    let (point, value) = simplex.swap_remove(0);
    SimplexResult {
        point,
        value,
        evals,
    }
}
