use serde::Serialize;

use super::{cost, lm, Bounds, FitMethod, FitResult, Points};
use crate::error::{Error, Result};

/// Reciprocal condition number below which the covariance is flagged.
const CONDITION_LIMIT: f64 = 1e-12;

pub(super) struct RawOutcome {
    pub params: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub message: String,
    pub method: FitMethod,
}

impl RawOutcome {
    pub fn failed(params: Vec<f64>, iterations: usize, message: &str) -> Self {
        RawOutcome {
            params,
            iterations,
            converged: false,
            message: message.into(),
            method: FitMethod::LevenbergMarquardt,
        }
    }
}

/// Attaches residual norm and covariance to a solver outcome.
pub(super) fn finish<M>(model: &M, pts: &Points, raw: RawOutcome, _bounds: &Bounds) -> FitResult
where
    M: Fn(f64, &[f64]) -> f64,
{
    let n = raw.params.len();
    let s = cost(model, pts, &raw.params).unwrap_or(f64::INFINITY);
    let nan = vec![vec![f64::NAN; n]; n];
    let (covariance, condition_warning) = match lm::normal_equations(model, pts, &raw.params) {
        Ok((a, _)) => {
            let svd = a.svd(true, true);
            let smax = svd.singular_values.max();
            let smin = svd.singular_values.min();
            let ill = !(smax > 0.0) || smin / smax < CONDITION_LIMIT;
            match svd.pseudo_inverse(smax * CONDITION_LIMIT) {
                Ok(inv) => {
                    let dof = pts.len().saturating_sub(n).max(1) as f64;
                    let scale = if pts.sigma.is_some() { 1.0 } else { s / dof };
                    let cov: Vec<Vec<f64>> = (0..n)
                        .map(|i| (0..n).map(|j| 0.5 * (inv[(i, j)] + inv[(j, i)]) * scale).collect())
                        .collect();
                    (cov, ill)
                }
                Err(_) => (nan, true),
            }
        }
        Err(_) => (nan, true),
    };
    FitResult {
        params: raw.params,
        covariance,
        residual_norm: s.sqrt(),
        iterations: raw.iterations,
        converged: raw.converged,
        condition_warning,
        method: raw.method,
        message: raw.message,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Goodness {
    /// `None` when y has zero variance.
    pub r_squared: Option<f64>,
    pub zero_variance: bool,
    /// `None` when there are no degrees of freedom left.
    pub reduced_chi_squared: Option<f64>,
    /// y − model, unweighted.
    pub residuals: Vec<f64>,
}

/// R², reduced χ² (σ-weighted when σ is present) and residuals.
pub fn goodness<M>(pts: Points, model: &M, params: &[f64]) -> Result<Goodness>
where
    M: Fn(f64, &[f64]) -> f64,
{
    if pts.is_empty() {
        return Err(Error::Validation("no data points".into()));
    }
    let residuals: Vec<f64> = (0..pts.len())
        .map(|i| pts.y[i] - model(pts.x[i], params))
        .collect();
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(Error::Numerical("model not finite at fitted parameters".into()));
    }
    let m = pts.len() as f64;
    let mean = pts.y.iter().sum::<f64>() / m;
    let ss_tot: f64 = pts.y.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let zero_variance = ss_tot == 0.0;
    let r_squared = (!zero_variance).then(|| 1.0 - ss_res / ss_tot);
    let chi2: f64 = residuals
        .iter()
        .enumerate()
        .map(|(i, r)| (r * pts.weight(i)).powi(2))
        .sum();
    let dof = pts.len() as i64 - params.len() as i64;
    let reduced_chi_squared = (dof > 0).then(|| chi2 / dof as f64);
    Ok(Goodness {
        r_squared,
        zero_variance,
        reduced_chi_squared,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{fit, ExperimentRecord};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn perfect_and_mean_only() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        let pts = Points::new(&x, &y, None).unwrap();
        let g = goodness(pts, &|x: f64, p: &[f64]| p[0] * x, &[2.0]).unwrap();
        assert_eq!(g.r_squared, Some(1.0));
        assert!(g.residuals.iter().all(|r| *r == 0.0));

        let g = goodness(pts, &|_: f64, p: &[f64]| p[0], &[5.0]).unwrap();
        assert!(g.r_squared.unwrap().abs() < 1e-15);
    }

    #[test]
    fn zero_variance_flagged() {
        let x = [1.0, 2.0, 3.0];
        let y = [1.0, 1.0, 1.0];
        let g = goodness(Points::new(&x, &y, None).unwrap(), &|_: f64, _: &[f64]| 1.0, &[]).unwrap();
        assert!(g.zero_variance);
        assert_eq!(g.r_squared, None);
    }

    #[test]
    fn reduced_chi_squared_ensemble() {
        let model = |x: f64, p: &[f64]| p[0] * (-x / p[1]).exp();
        let truth = [1.0, 5.0];
        let sigma = 0.02;
        let x: Vec<f64> = (0..40).map(|i| i as f64 * 0.5).collect();
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut total = 0.0;
        for _ in 0..100 {
            let y: Vec<f64> = x.iter().map(|&v| model(v, &truth) + normal.sample(&mut rng)).collect();
            let rec = ExperimentRecord::new(x.clone(), y, Some(vec![sigma; x.len()])).unwrap();
            let r = fit(&model, &rec, &[0.8, 4.0], None).unwrap();
            let g = goodness((&rec).into(), &model, &r.params).unwrap();
            total += g.reduced_chi_squared.unwrap();
        }
        let mean = total / 100.0;
        assert!((mean - 1.0).abs() <= 0.2, "{mean}");
    }

    #[test]
    fn covariance_symmetric_psd() {
        let model = |x: f64, p: &[f64]| p[0] * (-x / p[1]).exp() + p[2];
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| model(v, &[2.0, 7.0, 0.3]) + 0.01 * ((i * 13 % 7) as f64 - 3.0))
            .collect();
        let rec = ExperimentRecord::new(x, y, None).unwrap();
        let r = fit(&model, &rec, &[1.0, 3.0, 0.0], None).unwrap();
        assert!(r.converged);
        let c = nalgebra::DMatrix::from_fn(3, 3, |i, j| r.covariance[i][j]);
        assert_eq!(c, c.transpose());
        let eig = c.symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|v| *v >= -1e-15));
        assert!(!r.condition_warning);
    }
}
