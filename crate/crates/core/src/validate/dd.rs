//! Double-double arithmetic: just enough for finite differences of Gaussian
//! kernels without f64 cancellation swamping fourth-order stencils.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    const LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    pub fn prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn scale(self, s: f64) -> Self {
        let (p, e) = two_prod(self.hi, s);
        let (hi, lo) = quick_two_sum(p, e + self.lo * s);
        Dd { hi, lo }
    }

    fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Dd { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn exp(self) -> Self {
        if self.hi == 0.0 {
            return Dd::ONE;
        }
        if self.hi < -740.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self - Dd::LN2.scale(k);
        // exp(r) = exp(r / 2^10)^(2^10)
        let r = r.ldexp(-10);
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for i in 1..=20 {
            term = (term * r).scale(1.0 / i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        let mut e = sum;
        for _ in 0..10 {
            e = e * e;
        }
        e.ldexp(k as i32)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_matches_f64() {
        for &x in &[-30.0, -3.7, -1.0, -1e-3, 0.5, 2.0] {
            let e = Dd::new(x).exp().to_f64();
            assert!((e - f64::exp(x)).abs() <= 2e-16 * f64::exp(x), "{x}");
        }
    }

    #[test]
    fn exp_is_better_than_f64() {
        // exp(a) exp(-a) = 1 to double-double precision
        let a = Dd::new(1.3) + Dd::new(1e-20);
        let p = a.exp() * (-a).exp() - Dd::ONE;
        assert!(p.to_f64().abs() < 1e-29, "{:?}", p);
    }

    #[test]
    fn exact_products() {
        let p = Dd::prod(0.1, 3.0);
        assert_eq!(p.hi, 0.1 * 3.0);
        assert!(p.lo != 0.0);
        let s = Dd::new(1.0) + Dd::new(1e-20);
        assert_eq!(s.lo, 1e-20);
    }
}
