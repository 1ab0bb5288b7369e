//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries `(v, v', v'')` with respect to a single scalar input.
//! Arithmetic propagates all three components exactly, so evaluating an
//! expression tree on `Jet2::variable(x)` yields `f(x)`, `f'(x)` and `f''(x)`
//! without finite differencing.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub const fn constant(v: f64) -> Self {
        Self { v, d1: 0.0, d2: 0.0 }
    }

    pub const fn variable(x: f64) -> Self {
        Self { v: x, d1: 1.0, d2: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    /// Chain rule for a scalar function `g` with `g(v)`, `g'(v)`, `g''(v)` supplied.
    #[inline]
    fn compose(self, g: f64, g1: f64, g2: f64) -> Self {
        Self {
            v: g,
            d1: g1 * self.d1,
            d2: g2 * self.d1 * self.d1 + g1 * self.d2,
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e)
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let sech2 = 1.0 - t * t;
        self.compose(t, sech2, -2.0 * t * sech2)
    }

    /// `self^p` for a constant exponent. Integral exponents use `powi`, so a
    /// negative base is allowed there; the caller rejects a negative base with
    /// a fractional exponent.
    pub fn powf(self, p: f64) -> Self {
        if p == 0.0 {
            return Self::constant(1.0);
        }
        let u = self.v;
        if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
            let n = p as i32;
            let g = u.powi(n);
            let g1 = p * u.powi(n - 1);
            let g2 = p * (p - 1.0) * u.powi(n - 2);
            // n = 1 or 2 at u = 0 would give 0 * inf in the lower powers.
            let g1 = if n == 1 { 1.0 } else { g1 };
            let g2 = if n == 1 { 0.0 } else if n == 2 { 2.0 } else { g2 };
            self.compose(g, g1, g2)
        } else {
            let g = u.powf(p);
            self.compose(g, p * u.powf(p - 1.0), p * (p - 1.0) * u.powf(p - 2.0))
        }
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.compose(r, -r * r, 2.0 * r * r * r)
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Div for Jet2 {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_second_order() {
        // (x^2)(x^3) = x^5 at x = 2: 32, 80, 160
        let x = Jet2::variable(2.0);
        let y = (x * x) * (x * x * x);
        assert_eq!(y, Jet2 { v: 32.0, d1: 80.0, d2: 160.0 });
    }

    #[test]
    fn reciprocal_matches_power() {
        let x = Jet2::variable(1.7);
        let a = x.recip();
        let b = x.powf(-1.0);
        assert!((a.v - b.v).abs() < 1e-15);
        assert!((a.d1 - b.d1).abs() < 1e-15);
        assert!((a.d2 - b.d2).abs() < 1e-14);
    }

    #[test]
    fn low_integer_powers_at_zero() {
        let x = Jet2::variable(0.0);
        assert_eq!(x.powf(1.0), Jet2 { v: 0.0, d1: 1.0, d2: 0.0 });
        assert_eq!(x.powf(2.0), Jet2 { v: 0.0, d1: 0.0, d2: 2.0 });
        assert_eq!(x.powf(3.0), Jet2 { v: 0.0, d1: 0.0, d2: 0.0 });
    }

    #[test]
    fn tanh_derivatives() {
        let x = Jet2::variable(0.3);
        let t = x.tanh();
        let s = 1.0 / 0.3f64.cosh().powi(2);
        assert!((t.d1 - s).abs() < 1e-15);
        assert!((t.d2 + 2.0 * 0.3f64.tanh() * s).abs() < 1e-15);
    }
}
