use nalgebra::{DMatrix, DVector};

use super::{cost, stats, Bounds, FitMethod, FitOptions, FitResult, Points};
use crate::error::{Error, Result};

const MAX_DAMPING: f64 = 1e16;
const MIN_DAMPING: f64 = 1e-15;

/// Central-difference Jacobian ∂model(x_i)/∂p_j, one row per x.
///
/// Step per parameter: 10⁻⁶·|p_j|, floored at 10⁻¹².
pub fn finite_difference_jacobian<M>(model: &M, params: &[f64], xs: &[f64]) -> Result<Vec<Vec<f64>>>
where
    M: Fn(f64, &[f64]) -> f64,
{
    let n = params.len();
    let mut jac = vec![vec![0.0; n]; xs.len()];
    let mut p = params.to_vec();
    for j in 0..n {
        let h = (1e-6 * params[j].abs()).max(1e-12);
        let hi = params[j] + h;
        let lo = params[j] - h;
        for (i, &x) in xs.iter().enumerate() {
            p[j] = hi;
            let fp = model(x, &p);
            if !fp.is_finite() {
                return Err(Error::NonFiniteModel { index: j, value: hi });
            }
            p[j] = lo;
            let fm = model(x, &p);
            if !fm.is_finite() {
                return Err(Error::NonFiniteModel { index: j, value: lo });
            }
            jac[i][j] = (fp - fm) / (hi - lo);
        }
        p[j] = params[j];
    }
    Ok(jac)
}

/// Weighted normal equations JᵀW²J and JᵀW²r at `p`.
pub(super) fn normal_equations<M>(model: &M, pts: &Points, p: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>)>
where
    M: Fn(f64, &[f64]) -> f64,
{
    let jac = finite_difference_jacobian(model, p, pts.x)?;
    let n = p.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut g = DVector::<f64>::zeros(n);
    for (i, row) in jac.iter().enumerate() {
        let w = pts.weight(i);
        let r = (pts.y[i] - model(pts.x[i], p)) * w;
        for j in 0..n {
            let jw = row[j] * w;
            g[j] += jw * r;
            for k in 0..=j {
                a[(j, k)] += jw * row[k] * w;
            }
        }
    }
    for j in 0..n {
        for k in 0..j {
            a[(k, j)] = a[(j, k)];
        }
    }
    Ok((a, g))
}

fn max_relative_change(old: &[f64], new: &[f64]) -> f64 {
    old.iter()
        .zip(new)
        .map(|(o, n)| (n - o).abs() / o.abs().max(1e-12))
        .fold(0.0, f64::max)
}

pub(super) fn levenberg_marquardt<M>(
    model: &M,
    pts: &Points,
    initial: &[f64],
    bounds: &Bounds,
    options: &FitOptions,
) -> Result<FitResult>
where
    M: Fn(f64, &[f64]) -> f64,
{
    let n = initial.len();
    let mut p = initial.to_vec();
    let mut s = match cost(model, pts, &p) {
        Some(s) => s,
        None => {
            let raw = stats::RawOutcome::failed(p, 0, "model not finite at initial point");
            return Ok(stats::finish(model, pts, raw, bounds));
        }
    };
    // residual floor for the relative-decrease test: 10⁻¹⁰ of the weighted data norm
    let data_sq: f64 = (0..pts.len())
        .map(|i| (pts.y[i] * pts.weight(i)).powi(2))
        .sum();
    let s_floor = 1e-20 * data_sq;

    let mut lambda = options.initial_damping;
    let mut iterations = 0;
    let mut converged = s == 0.0;
    let mut message = String::from(if converged { "exact fit" } else { "iteration cap reached" });

    'outer: while !converged && iterations < options.max_iterations {
        let (a, g) = match normal_equations(model, pts, &p) {
            Ok(v) => v,
            Err(e) => {
                message = e.to_string();
                break;
            }
        };
        iterations += 1;
        let max_diag = (0..n).map(|k| a[(k, k)]).fold(0.0, f64::max);
        let diag_floor = (1e-12 * max_diag).max(f64::MIN_POSITIVE);
        loop {
            let mut damped = a.clone();
            for k in 0..n {
                damped[(k, k)] += lambda * a[(k, k)].max(diag_floor);
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&g),
                None => {
                    lambda *= 10.0;
                    if lambda > MAX_DAMPING {
                        message = "normal equations singular at maximum damping".into();
                        break 'outer;
                    }
                    continue;
                }
            };
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            bounds.clamp(&mut trial);
            let rel_step = max_relative_change(&p, &trial);
            match cost(model, pts, &trial) {
                Some(s_new) if s_new < s => {
                    let decrease = (s - s_new) / s.max(s_floor);
                    p = trial;
                    s = s_new;
                    lambda = (lambda / 10.0).max(MIN_DAMPING);
                    if s == 0.0 || (rel_step < options.step_tol && decrease < options.residual_tol) {
                        converged = true;
                        message = "relative step and residual decrease below tolerance".into();
                        break 'outer;
                    }
                    break;
                }
                _ => {
                    if rel_step < options.step_tol {
                        converged = true;
                        message = "no further decrease within step tolerance".into();
                        break 'outer;
                    }
                    lambda *= 10.0;
                    if lambda > MAX_DAMPING {
                        message = "damping exceeded maximum without decrease".into();
                        break 'outer;
                    }
                }
            }
        }
    }

    let raw = stats::RawOutcome {
        params: p,
        iterations,
        converged,
        message,
        method: FitMethod::LevenbergMarquardt,
    };
    Ok(stats::finish(model, pts, raw, bounds))
}
