//! Discrete error norms on a uniform interior test grid.

use crate::error::{check_dim, Result};

/// `n^d` points `lo + i h`, `i = 1..=n`, `h = (hi - lo) / (n + 1)`, flat with stride `d`.
pub fn test_grid(lo: &[f64], hi: &[f64], n: usize) -> Vec<f64> {
    let d = lo.len();
    let total = n.pow(d as u32);
    let mut out = Vec::with_capacity(total * d);
    for flat in 0..total {
        let mut rem = flat;
        for k in 0..d {
            let i = rem % n + 1;
            rem /= n;
            out.push(lo[k] + (hi[k] - lo[k]) * i as f64 / (n + 1) as f64);
        }
    }
    out
}

/// `(sqrt(mean (p - t)^2), max |p - t|)`.
pub fn error_from_values(pred: &[f64], truth: &[f64]) -> Result<(f64, f64)> {
    check_dim(truth.len(), pred.len())?;
    if pred.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut s = 0.0;
    let mut m: f64 = 0.0;
    for (p, t) in pred.iter().zip(truth) {
        let e = (p - t).abs();
        s += e * e;
        m = if e.is_nan() { f64::NAN } else { m.max(e) };
    }
    Ok(((s / pred.len() as f64).sqrt(), m))
}

/// Errors of `pred` against `truth` on the `n`-per-axis interior test grid.
pub fn error_metrics(
    pred: impl Fn(&[f64]) -> f64,
    truth: impl Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    n: usize,
) -> Result<(f64, f64)> {
    let d = lo.len();
    let pts = test_grid(lo, hi, n);
    let p: Vec<f64> = pts.chunks(d).map(&pred).collect();
    let t: Vec<f64> = pts.chunks(d).map(&truth).collect();
    error_from_values(&p, &t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases() {
        let f = |x: &[f64]| x[0] * x[1];
        assert_eq!(error_metrics(f, f, &[0.0, 0.0], &[1.0, 1.0], 10).unwrap(), (0.0, 0.0));
        let (l2, li) = error_metrics(|x| f(x) + 0.3, f, &[0.0, 0.0], &[1.0, 1.0], 10).unwrap();
        assert!((l2 - 0.3).abs() < 1e-15 && (li - 0.3).abs() < 1e-15);
    }

    #[test]
    fn grid_is_strictly_interior() {
        let g = test_grid(&[-1.0, 0.0], &[1.0, 1.0], 60);
        assert_eq!(g.len(), 2 * 3600);
        assert!(g.chunks(2).all(|p| p[0] > -1.0 && p[0] < 1.0 && p[1] > 0.0 && p[1] < 1.0));
    }
}
