//! Bracketed one-dimensional searches shared by the models and the optimizer.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `x_tol` (absolute). Returns the
/// best point evaluated and its value. Function-value comparisons limit the
/// attainable accuracy to about √ε relative.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, x_tol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > x_tol && iter < max_iter {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    let fa = f(a);
    let fb = f(b);
    [(a, fa), (c, fc), (d, fd), (b, fb)]
        .into_iter()
        .fold((c, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Maximum of a unimodal function located through the sign change of its
/// derivative `slope`. The bracket `[lo, hi]` is expanded upward until the
/// slope turns negative, then bisected to machine precision.
pub fn argmax_by_slope<G>(slope: G, lo: f64, mut hi: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let mut lo = lo;
    if !(slope(lo) > 0.0) {
        return Err(Error::Numerical(format!("slope not positive at lower bracket {lo}")));
    }
    let mut expansions = 0;
    while slope(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 2000 || !hi.is_finite() {
            return Err(Error::Numerical("could not bracket maximum".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Index of the first maximum of a slice (NaN entries are skipped).
pub fn first_argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 1.3) * (x - 1.3) + 2.0, -5.0, 5.0, 1e-10, 500);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn golden_handles_edge_maximum() {
        let (x, _) = golden_section_max(|x| x, 0.0, 3.0, 1e-9, 500);
        assert_eq!(x, 3.0);
    }

    #[test]
    fn slope_bisection_is_precise() {
        let x = argmax_by_slope(|x| 7.0 - x, 0.0, 1.0).unwrap();
        assert!((x - 7.0).abs() <= 7.0 * 4.0 * f64::EPSILON);
        assert!(argmax_by_slope(|_| -1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn first_argmax_ties_and_nans() {
        assert_eq!(first_argmax(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(first_argmax(&[f64::NAN, 0.5]), Some(1));
        assert_eq!(first_argmax(&[]), None);
    }
}
