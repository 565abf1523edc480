//! Second-order forward-mode jets of 8x8 matrices along the `xi_0` axis.
//!
//! The symbols depend on the base point only through `t`, so in the
//! composition formula every cotangent derivative is paired with a time
//! derivative and only `d/dxi_0` is ever needed.

use std::ops::{Add, Mul, Neg, Sub};

use super::gamma::{Mat8, C64};

/// `(f, df/dxi0, d2f/dxi0^2)`. `order` counts how many of the derivative
/// slots are meaningful: differentiating a jet consumes one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatJet {
    pub v: Mat8,
    pub d: Mat8,
    pub dd: Mat8,
    pub order: u8,
}

impl MatJet {
    pub fn constant(v: Mat8) -> Self {
        Self { v, d: Mat8::zeros(), dd: Mat8::zeros(), order: 2 }
    }

    pub fn zero() -> Self {
        Self::constant(Mat8::zeros())
    }

    pub fn new(v: Mat8, d: Mat8, dd: Mat8) -> Self {
        Self { v, d, dd, order: 2 }
    }

    /// `coeff * s(xi)` for a scalar jet `s = (s, s', s'')`.
    pub fn from_scalar(coeff: &Mat8, s: [f64; 3]) -> Self {
        Self::new(coeff * C64::from(s[0]), coeff * C64::from(s[1]), coeff * C64::from(s[2]))
    }

    pub fn scale(&self, k: C64) -> Self {
        Self { v: self.v * k, d: self.d * k, dd: self.dd * k, order: self.order }
    }

    /// `d/dxi0` of the jet, one order shorter.
    pub fn derivative(&self) -> Self {
        assert!(self.order >= 1, "jet has no derivative information left");
        Self { v: self.d, d: self.dd, dd: Mat8::zeros(), order: self.order - 1 }
    }

    /// Jet of the matrix inverse, `None` when the value is singular.
    pub fn inverse(&self) -> Option<Self> {
        let inv = self.v.try_inverse()?;
        // (M^-1)' = -M^-1 M' M^-1, (M^-1)'' = 2 M^-1 M' M^-1 M' M^-1 - M^-1 M'' M^-1
        let x = inv * self.d;
        let d = -(x * inv);
        let dd = if self.order >= 2 { x * x * inv * C64::from(2.0) - inv * self.dd * inv } else { Mat8::zeros() };
        Some(Self { v: inv, d: if self.order >= 1 { d } else { Mat8::zeros() }, dd, order: self.order })
    }

    /// Product truncated to the requested order; skips work above it.
    pub fn mul_to(&self, o: &Self, order: u8) -> Self {
        let order = order.min(self.order).min(o.order);
        let v = self.v * o.v;
        let d = if order >= 1 { self.d * o.v + self.v * o.d } else { Mat8::zeros() };
        let dd = if order >= 2 {
            self.dd * o.v + (self.d * o.d) * C64::from(2.0) + self.v * o.dd
        } else {
            Mat8::zeros()
        };
        Self { v, d, dd, order }
    }

    /// Right-multiplication by a jet-free matrix.
    pub fn mul_mat(&self, m: &Mat8) -> Self {
        Self { v: self.v * m, d: self.d * m, dd: self.dd * m, order: self.order }
    }
}

impl Add for MatJet {
    type Output = MatJet;
    fn add(self, o: MatJet) -> MatJet {
        MatJet { v: self.v + o.v, d: self.d + o.d, dd: self.dd + o.dd, order: self.order.min(o.order) }
    }
}

impl Sub for MatJet {
    type Output = MatJet;
    fn sub(self, o: MatJet) -> MatJet {
        MatJet { v: self.v - o.v, d: self.d - o.d, dd: self.dd - o.dd, order: self.order.min(o.order) }
    }
}

impl Neg for MatJet {
    type Output = MatJet;
    fn neg(self) -> MatJet {
        MatJet { v: -self.v, d: -self.d, dd: -self.dd, order: self.order }
    }
}

impl Mul for &MatJet {
    type Output = MatJet;
    fn mul(self, o: &MatJet) -> MatJet {
        self.mul_to(o, 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::gamma::c;

    fn sample(x: f64) -> Mat8 {
        Mat8::from_fn(|i, j| {
            let (i, j) = (i as f64, j as f64);
            C64::new((x * (i + 1.0)).sin() + if i == j { 3.0 } else { 0.0 }, 0.1 * (x * j + i).cos())
        })
    }

    fn numeric_jet(x: f64) -> MatJet {
        let h = 1e-4;
        let (m, p, z) = (sample(x - h), sample(x + h), sample(x));
        MatJet::new(z, (p - m) / c(2.0 * h), (p - z * c(2.0) + m) / c(h * h))
    }

    #[test]
    fn inverse_jet_matches_differences() {
        let x = 0.3;
        let h = 1e-4;
        let inv = numeric_jet(x).inverse().unwrap();
        let f = |y: f64| sample(y).try_inverse().unwrap();
        let d = (f(x + h) - f(x - h)) / c(2.0 * h);
        let dd = (f(x + h) - f(x) * c(2.0) + f(x - h)) / c(h * h);
        assert!((inv.d - d).camax() < 1e-6);
        assert!((inv.dd - dd).camax() < 1e-5);
    }

    #[test]
    fn product_rule_is_ordered() {
        let a = numeric_jet(0.1);
        let b = numeric_jet(0.7);
        let p = &a * &b;
        assert_eq!(p.v, a.v * b.v);
        assert_eq!(p.d, a.d * b.v + a.v * b.d);
    }

    #[test]
    fn derivative_consumes_order() {
        let j = MatJet::constant(Mat8::identity());
        let d = j.derivative();
        assert_eq!(d.order, 1);
        assert_eq!(d.derivative().order, 0);
    }

    #[test]
    fn singular_value_has_no_inverse() {
        assert!(MatJet::zero().inverse().is_none());
    }
}
