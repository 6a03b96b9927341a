//! Gauss-Hermite rule for `int exp(-x^2) f(x) dx`.

use faer::Mat;

use crate::error::{Error, Result};

/// Nodes (ascending) and weights of the `n`-point rule.
///
/// Roots start from the eigenvalues of the Jacobi matrix and are polished by
/// Newton iteration on the orthonormal Hermite recurrence, which also gives
/// the weights.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature order must be positive".into()));
    }
    let jac = Mat::<f64>::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut x = jac
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Oracle(format!("Jacobi matrix eigenvalues failed: {e:?}")))?;
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    // (p_n(z), sqrt(2n) p_{n-1}(z)) for orthonormal Hermite functions without the weight
    let eval = |z: f64| {
        let mut p1 = pim4;
        let mut p2 = 0.0;
        for j in 0..n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        }
        (p1, (2.0 * nf).sqrt() * p2)
    };
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = x[i];
        let mut pp = eval(z).1;
        for _ in 0..20 {
            let (p, d) = eval(z);
            pp = d;
            let step = p / d;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / (pp * pp);
    }
    // enforce the exact symmetry of the rule
    for i in 0..n / 2 {
        let (a, b) = (x[i], x[n - 1 - i]);
        let r = 0.5 * (b - a);
        x[i] = -r;
        x[n - 1 - i] = r;
        let wm = 0.5 * (w[i] + w[n - 1 - i]);
        w[i] = wm;
        w[n - 1 - i] = wm;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    if x.windows(2).any(|p| !(p[0] < p[1])) || w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Oracle(format!("Gauss-Hermite rule of order {n} is degenerate")));
    }
    Ok((x, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        let sp = std::f64::consts::PI.sqrt();
        for n in [1, 2, 5, 20, 100, 200] {
            let (x, w) = gauss_hermite(n).unwrap();
            assert!(x.windows(2).all(|p| p[0] < p[1]), "n={n} {:?}", &x[..x.len().min(6)]);
            let m0: f64 = w.iter().sum();
            assert!((m0 - sp).abs() < 1e-12, "n={n}: {m0}");
            if n >= 2 {
                let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
                assert!((m2 - sp / 2.0).abs() < 1e-12);
            }
        }
        // exact for degree 2n-1: x^6 with n = 4
        let (x, w) = gauss_hermite(4).unwrap();
        let m6: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(6)).sum();
        assert!((m6 - 15.0 / 8.0 * sp).abs() < 1e-12);
        assert!(gauss_hermite(0).is_err());
    }
}
