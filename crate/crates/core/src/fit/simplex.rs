use super::{cost, stats::RawOutcome, Bounds, FitMethod, FitOptions, Points};

/// Nelder–Mead on the weighted residual sum of squares, clamped to `bounds`.
pub(super) fn nelder_mead<M>(model: &M, pts: &Points, start: &[f64], bounds: &Bounds, options: &FitOptions) -> RawOutcome
where
    M: Fn(f64, &[f64]) -> f64,
{
    let n = start.len();
    let eval = |p: &[f64]| cost(model, pts, p).unwrap_or(f64::INFINITY);
    let clamp = |mut p: Vec<f64>| {
        bounds.clamp(&mut p);
        p
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), eval(start)));
    for j in 0..n {
        let mut v = start.to_vec();
        let delta = if v[j] != 0.0 { 0.05 * v[j] } else { 2.5e-4 };
        v[j] += delta;
        if v[j] > bounds.upper[j] {
            v[j] = start[j] - delta;
        }
        let v = clamp(v);
        let f = eval(&v);
        simplex.push((v, f));
    }

    let max_evals = 400 * (n + 1) * options.max_iterations.max(1);
    let x_tol = options.step_tol * 1e-2;
    let f_tol = options.residual_tol * 1e-3;
    let mut evals = n + 1;
    let mut iterations = 0;
    let mut converged = false;

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let x_spread = (1..=n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (simplex[i].0[j] - simplex[0].0[j]).abs() / simplex[0].0[j].abs().max(1e-12))
            .fold(0.0, f64::max);
        let f_spread = (simplex[n].1 - simplex[0].1).abs();
        if x_spread <= x_tol || (x_spread <= options.step_tol && f_spread <= f_tol * simplex[0].1) {
            converged = simplex[0].1.is_finite();
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            clamp(
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect(),
            )
        };

        let reflected = along(-1.0);
        let fr = eval(&reflected);
        evals += 1;
        if fr < simplex[0].1 {
            let expanded = along(-2.0);
            let fe = eval(&expanded);
            evals += 1;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < simplex[n].1 {
                let c = along(-0.5);
                let f = eval(&c);
                (c, f)
            } else {
                let c = along(0.5);
                let f = eval(&c);
                (c, f)
            };
            evals += 1;
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (contracted, fc);
            } else {
                let best_v = simplex[0].0.clone();
                for (v, f) in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = best_v.iter().zip(v.iter()).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    *v = clamp(shrunk);
                    *f = eval(v);
                    evals += 1;
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (params, _) = simplex.swap_remove(0);
    RawOutcome {
        params,
        iterations,
        converged,
        message: if converged {
            "simplex collapsed below tolerance".into()
        } else {
            "simplex evaluation cap reached".into()
        },
        method: FitMethod::Simplex,
    }
}
