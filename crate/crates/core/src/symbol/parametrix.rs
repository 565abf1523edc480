//! Left parametrix of `D^2` to third order.
//!
//! For symbols `b` and `a` the left composition is
//! `sigma(B A) = sum_k (kappa^k / k!) d_xi0^k b * d_t^k a`, with `kappa = -i`
//! when the symbol of `d_k` is `i xi_k`. Solving order by order gives
//!
//! ```text
//! b0 = a2^-1
//! b1 = -(b0 a1 + kappa d_xi0 b0 d_t a2) b0
//! b2 = -(b1 a1 + b0 a0 + kappa (d_xi0 b0 d_t a1 + d_xi0 b1 d_t a2)
//!        + kappa^2 / 2 d_xi0^2 b0 d_t^2 a2) b0
//! ```
//!
//! `Calculus::Unweighted` drops the `kappa` factors (`kappa = 1`) to test the
//! recursion as it is often written without them.

use crate::error::{Error, Result};

use super::gamma::{Mat8, C64, I};
use super::jet::MatJet;
use super::symbols::{Covector, SymbolSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Calculus {
    /// `kappa = -i`.
    #[default]
    Standard,
    /// `kappa = 1`.
    Unweighted,
}

impl Calculus {
    fn kappa(self) -> C64 {
        match self {
            Calculus::Standard => -I,
            Calculus::Unweighted => C64::new(1.0, 0.0),
        }
    }
}

/// Symbols `b0, b1, b2` at one cotangent point. `b0` carries two `xi0`
/// derivatives and `b1` one.
#[derive(Debug, Clone, PartialEq)]
pub struct Parametrix {
    pub b0: MatJet,
    pub b1: MatJet,
    pub b2: Mat8,
}

/// Symbols of `D^2` evaluated at one cotangent point, with the time
/// derivatives the recursion consumes.
struct LocalSymbols {
    a2: MatJet,
    a2_t: MatJet,
    a2_tt: Mat8,
    a1: MatJet,
    a1_t: Mat8,
    a0: Mat8,
}

impl LocalSymbols {
    fn at(s: &SymbolSet, xi: &Covector) -> Result<Self> {
        Ok(Self {
            a2: s.a2.jet_dt(xi, 0)?,
            a2_t: s.a2.jet_dt(xi, 1)?,
            a2_tt: s.a2.eval_dt(xi, 2)?,
            a1: s.a1.jet_dt(xi, 0)?,
            a1_t: s.a1.eval_dt(xi, 1)?,
            a0: s.a0.eval(xi),
        })
    }
}

pub fn parametrix(s: &SymbolSet, xi: &Covector) -> Result<Parametrix> {
    parametrix_with(s, xi, Calculus::Standard)
}

pub fn parametrix_with(s: &SymbolSet, xi: &Covector, calculus: Calculus) -> Result<Parametrix> {
    if xi.norm_sq() == 0.0 {
        return Err(Error::Domain("parametrix is undefined at xi = 0".into()));
    }
    let a = LocalSymbols::at(s, xi)?;
    match Diag::of(&a.a2.v).zip(Diag::of(&a.a2.d)).zip(Diag::of(&a.a2.dd)).zip(Diag::of(&a.a2_t.v)) {
        Some((((v, d), dd), tv)) => {
            let leading = DiagSymbols { a2: [v, d, dd], a2_t: [tv, Diag::of(&a.a2_t.d).expect("d_t a2 is diagonal with a2")] };
            diagonal_recursion(&a, &leading, xi, calculus.kappa())
        }
        None => general_recursion(&a, xi, calculus.kappa()),
    }
}

/// Diagonal of an 8x8 matrix.
#[derive(Debug, Clone, Copy, Default)]
struct Diag([C64; 8]);

impl Diag {
    fn of(m: &Mat8) -> Option<Self> {
        for i in 0..8 {
            for j in 0..8 {
                if i != j && m[(i, j)] != C64::new(0.0, 0.0) {
                    return None;
                }
            }
        }
        Some(Self(std::array::from_fn(|i| m[(i, i)])))
    }

    fn to_mat(self) -> Mat8 {
        Mat8::from_diagonal(&self.0.into())
    }

    /// `self * m`
    fn left(&self, m: &Mat8) -> Mat8 {
        Mat8::from_fn(|i, j| self.0[i] * m[(i, j)])
    }

    /// `m * self`
    fn right(&self, m: &Mat8) -> Mat8 {
        Mat8::from_fn(|i, j| m[(i, j)] * self.0[j])
    }

    fn zip(&self, o: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self(std::array::from_fn(|i| f(self.0[i], o.0[i])))
    }
}

struct DiagSymbols {
    /// `a2` and its first two `xi0` derivatives.
    a2: [Diag; 3],
    /// `d_t a2` and its `xi0` derivative.
    a2_t: [Diag; 2],
}

/// Recursion with a diagonal leading symbol: every product but one reduces to
/// row or column scaling.
fn diagonal_recursion(a: &LocalSymbols, l: &DiagSymbols, xi: &Covector, k: C64) -> Result<Parametrix> {
    let [v, d, dd] = l.a2;
    if v.0.iter().any(|z| z.norm() == 0.0) {
        return Err(Error::SingularSymbol { xi: xi.0 });
    }
    let b0 = Diag(v.0.map(|z| z.inv()));
    // (1/f)' = -f'/f^2, (1/f)'' = 2 f'^2/f^3 - f''/f^2
    let db0 = d.zip(&b0, |fd, b| -fd * b * b);
    let ddb0 = Diag(std::array::from_fn(|i| {
        let (b, fd) = (b0.0[i], d.0[i]);
        fd * fd * b * b * b * 2.0 - dd.0[i] * b * b
    }));
    let a2_tt = Diag::of(&a.a2_tt).expect("time derivatives of a diagonal symbol are diagonal");
    let [tv, td] = l.a2_t;

    // inner1 = b0 a1 + k db0 a2_t, with its xi0 derivative
    let kt = db0.zip(&tv, |x, y| x * y * k);
    let inner1 = b0.left(&a.a1.v) + kt.to_mat();
    let kt_d = Diag(std::array::from_fn(|i| (ddb0.0[i] * tv.0[i] + db0.0[i] * td.0[i]) * k));
    let inner1_d = db0.left(&a.a1.v) + b0.left(&a.a1.d) + kt_d.to_mat();
    let b1 = -b0.right(&inner1);
    let db1 = -(b0.right(&inner1_d) + db0.right(&inner1));

    let inner2 = b1 * a.a1.v
        + b0.left(&a.a0)
        + (db0.left(&a.a1_t) + tv.right(&db1)) * k
        + (ddb0.zip(&a2_tt, |x, y| x * y * k * k * 0.5)).to_mat();
    let b2 = -b0.right(&inner2);

    Ok(Parametrix {
        b0: MatJet::new(b0.to_mat(), db0.to_mat(), ddb0.to_mat()),
        b1: MatJet { v: b1, d: db1, dd: Mat8::zeros(), order: 1 },
        b2,
    })
}

fn general_recursion(a: &LocalSymbols, xi: &Covector, k: C64) -> Result<Parametrix> {
    let b0 = a.a2.inverse().ok_or(Error::SingularSymbol { xi: xi.0 })?;
    let db0 = b0.derivative();

    let inner1 = b0.mul_to(&a.a1, 1) + db0.mul_to(&a.a2_t, 1).scale(k);
    let b1 = -inner1.mul_to(&b0, 1);
    let db1 = b1.derivative();

    let inner2 = b1.v * a.a1.v
        + b0.v * a.a0
        + (db0.v * a.a1_t + db1.v * a.a2_t.v) * k
        + b0.dd * a.a2_tt * (k * k * 0.5);
    let b2 = -(inner2 * b0.v);

    Ok(Parametrix { b0, b1, b2 })
}

/// Graded pieces of `sigma(b) o sigma(D^2) - 1` of degree 0, -1 and -2.
pub fn composition_defect(s: &SymbolSet, xi: &Covector, p: &Parametrix, calculus: Calculus) -> Result<[Mat8; 3]> {
    let a = LocalSymbols::at(s, xi)?;
    let k = calculus.kappa();
    let db0 = p.b0.derivative();
    let db1 = p.b1.derivative();

    let deg0 = p.b0.v * a.a2.v - Mat8::identity();
    let deg1 = p.b0.v * a.a1.v + p.b1.v * a.a2.v + db0.v * a.a2_t.v * k;
    let deg2 = p.b0.v * a.a0
        + p.b1.v * a.a1.v
        + p.b2 * a.a2.v
        + (db0.v * a.a1_t + db1.v * a.a2_t.v) * k
        + p.b0.dd * a.a2_tt * (k * k * 0.5);
    Ok([deg0, deg1, deg2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{PhiField, Profile, SheetGeometry};
    use crate::symbol::build_symbols;
    use crate::symbol::gamma::c;

    fn geom() -> SheetGeometry {
        SheetGeometry::new(
            Profile::exponential(1.3, 0.4),
            Profile::power_law(0.8, 2.0 / 3.0),
            PhiField::constant(C64::new(0.6, -0.3)),
        )
        .with_torsion(Profile::constant(0.15), Profile::exponential(0.2, -0.5))
    }

    #[test]
    fn flat_case_is_exact_inverse() {
        let flat = SheetGeometry::new(Profile::constant(1.0), Profile::constant(1.0), PhiField::zero());
        let s = build_symbols(&flat, 0.0).unwrap();
        let xi = Covector::new(0.5, 0.5, 0.5, 0.5);
        let p = parametrix(&s, &xi).unwrap();
        assert!((p.b0.v - Mat8::identity()).camax() < 1e-15);
        assert!(p.b1.v.camax() < 1e-15);
        assert!(p.b2.camax() < 1e-15);
    }

    #[test]
    fn graded_defect_vanishes() {
        let s = build_symbols(&geom(), 0.9).unwrap();
        for xi in [Covector::new(0.2, -0.4, 0.1, 0.8), Covector::new(-1.5, 0.3, 2.0, -0.7)] {
            for calc in [Calculus::Standard, Calculus::Unweighted] {
                let p = parametrix_with(&s, &xi, calc).unwrap();
                for slice in composition_defect(&s, &xi, &p, calc).unwrap() {
                    assert!(slice.camax() < 1e-10, "defect {}", slice.camax());
                }
            }
        }
    }

    #[test]
    fn parametrix_terms_are_homogeneous() {
        let s = build_symbols(&geom(), 0.9).unwrap();
        let xi = Covector::new(0.2, -0.4, 0.1, 0.8);
        let p = parametrix(&s, &xi).unwrap();
        for scale in [0.5, 2.0] {
            let q = parametrix(&s, &xi.scaled(scale)).unwrap();
            for (lhs, rhs, deg) in [(q.b0.v, p.b0.v, -2), (q.b1.v, p.b1.v, -3), (q.b2, p.b2, -4)] {
                let expected = rhs * c(f64::powi(scale, deg));
                assert!((lhs - expected).camax() <= 1e-10 * expected.camax());
            }
        }
    }

    #[test]
    fn diagonal_path_matches_general_path() {
        let s = build_symbols(&geom(), 0.9).unwrap();
        let xi = Covector::new(0.2, -0.4, 0.1, 0.8);
        for calc in [Calculus::Standard, Calculus::Unweighted] {
            let fast = parametrix_with(&s, &xi, calc).unwrap();
            let slow = general_recursion(&LocalSymbols::at(&s, &xi).unwrap(), &xi, calc.kappa()).unwrap();
            for (x, y) in [(fast.b0.v, slow.b0.v), (fast.b0.d, slow.b0.d), (fast.b0.dd, slow.b0.dd)] {
                assert!((x - y).camax() < 1e-13);
            }
            for (x, y) in [(fast.b1.v, slow.b1.v), (fast.b1.d, slow.b1.d), (fast.b2, slow.b2)] {
                assert!((x - y).camax() < 1e-13 * y.camax().max(1.0));
            }
        }
    }

    #[test]
    fn zero_covector_is_rejected() {
        let s = build_symbols(&geom(), 0.9).unwrap();
        assert!(parametrix(&s, &Covector::new(0.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn b1_derivative_matches_differences() {
        let s = build_symbols(&geom(), 0.9).unwrap();
        let xi = Covector::new(0.2, -0.4, 0.1, 0.8);
        let h = 1e-5;
        let p = parametrix(&s, &xi).unwrap();
        let mut plus = xi;
        plus.0[0] += h;
        let mut minus = xi;
        minus.0[0] -= h;
        let fd = (parametrix(&s, &plus).unwrap().b1.v - parametrix(&s, &minus).unwrap().b1.v) / c(2.0 * h);
        assert!((p.b1.d - fd).camax() < 1e-7);
    }
}
