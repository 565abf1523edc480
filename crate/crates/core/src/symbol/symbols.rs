//! Homogeneous symbols of `D^2` for the two-sheeted FLRW Dirac operator
//!
//! ```text
//! D = g0 (d_t + H) + A D3 + gamma5 F,
//! A = diag(1/a1, 1/a2),  H = diag(H1, H2),  F = [[0, Phi], [Phi*, 0]].
//! ```
//!
//! With the symbol of `d_k` equal to `i xi_k`, the square splits into
//!
//! ```text
//! a2 = xi0^2 + A^2 |xi|^2
//! a1 = i (-2 H xi0 + A' g0 g^j xi_j + [F, A] gamma5 g^j xi_j)
//! a0 = -H^2 - H' + F^2 - gamma5 g0 (F' + [H, F])
//! ```
//!
//! where `|xi|^2` is the spatial part only.

use crate::error::{Error, Result};
use crate::profile::{Jet2, SheetGeometry};

use super::gamma::{c, gamma_basis, kron, sheet_diag, Mat2, Mat4, Mat8, I};
use super::jet::MatJet;

/// Point of the cotangent fibre `(xi0, xi1, xi2, xi3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covector(pub [f64; 4]);

impl Covector {
    pub fn new(xi0: f64, xi1: f64, xi2: f64, xi3: f64) -> Self {
        Self([xi0, xi1, xi2, xi3])
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    /// `xi1^2 + xi2^2 + xi3^2`.
    pub fn spatial_sq(&self) -> f64 {
        self.0[1..].iter().map(|x| x * x).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.map(|x| s * x))
    }
}

/// One monomial `coeff * xi^e`. `coeff[m]` is the m-th time derivative of
/// the coefficient at the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTerm {
    pub exponents: [u8; 4],
    pub coeff: Vec<Mat8>,
}

impl SymbolTerm {
    fn monomial(&self, xi: &Covector) -> [f64; 3] {
        let rest: f64 = (1..4).map(|k| xi.0[k].powi(self.exponents[k] as i32)).product();
        let e0 = self.exponents[0] as i32;
        let x0 = xi.0[0];
        let v = x0.powi(e0) * rest;
        let d = if e0 >= 1 { e0 as f64 * x0.powi(e0 - 1) * rest } else { 0.0 };
        let dd = if e0 >= 2 { (e0 * (e0 - 1)) as f64 * x0.powi(e0 - 2) * rest } else { 0.0 };
        [v, d, dd]
    }
}

/// Matrix-valued symbol, homogeneous of `degree` in `xi`, frozen at one
/// base time.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSymbol {
    pub degree: i32,
    pub terms: Vec<SymbolTerm>,
}

impl MatrixSymbol {
    fn new(degree: i32, terms: Vec<SymbolTerm>) -> Self {
        debug_assert!(terms.iter().all(|t| t.exponents.iter().map(|&e| e as i32).sum::<i32>() == degree));
        Self { degree, terms }
    }

    /// Highest available time derivative.
    pub fn max_time_order(&self) -> usize {
        self.terms.iter().map(|t| t.coeff.len() - 1).min().unwrap_or(usize::MAX)
    }

    pub fn eval(&self, xi: &Covector) -> Mat8 {
        self.eval_dt(xi, 0).expect("order 0 is always available")
    }

    /// `d^m/dt^m` of the symbol at `xi`.
    pub fn eval_dt(&self, xi: &Covector, m: usize) -> Result<Mat8> {
        Ok(self.jet_dt(xi, m)?.v)
    }

    /// Jet along `xi0` of `d^m/dt^m` of the symbol.
    pub fn jet_dt(&self, xi: &Covector, m: usize) -> Result<MatJet> {
        let mut acc = MatJet::zero();
        for term in &self.terms {
            let coeff = term.coeff.get(m).ok_or_else(|| {
                Error::Domain(format!("time derivative of order {m} is not available for a degree-{} symbol", self.degree))
            })?;
            acc = acc + MatJet::from_scalar(coeff, term.monomial(xi));
        }
        Ok(acc)
    }
}

/// `a2, a1, a0` at one base time.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSet {
    pub t: f64,
    pub a2: MatrixSymbol,
    pub a1: MatrixSymbol,
    pub a0: MatrixSymbol,
}

fn comm(x: &Mat2, y: &Mat2) -> Mat2 {
    x * y - y * x
}

/// Sheet matrix with its first two time derivatives.
#[derive(Debug, Clone, Copy)]
struct SheetJet([Mat2; 3]);

impl SheetJet {
    fn diag(x: Jet2, y: Jet2) -> Self {
        Self([
            sheet_diag(c(x.value), c(y.value)),
            sheet_diag(c(x.d1), c(y.d1)),
            sheet_diag(c(x.d2), c(y.d2)),
        ])
    }

    fn mul(&self, o: &Self) -> Self {
        let [a, ad, add] = self.0;
        let [b, bd, bdd] = o.0;
        Self([a * b, ad * b + a * bd, add * b + ad * bd * c(2.0) + a * bdd])
    }
}

/// Assemble `a2, a1, a0` for `geom` at time `t`.
pub fn build_symbols(geom: &SheetGeometry, t: f64) -> Result<SymbolSet> {
    let (a1j, a2j) = geom.scale_jets(t)?;
    let (h1, h2) = geom.torsion_jets(t)?;
    let phi = geom.phi.jet(t)?;

    let gam = gamma_basis();
    let id4 = Mat4::identity();
    let id8 = Mat8::identity();
    let zero = c(0.0);

    let a = SheetJet::diag(a1j.recip(), a2j.recip());
    let a_sq = a.mul(&a);
    let h = SheetJet::diag(h1, h2);
    let f: [Mat2; 3] = phi.map(|p| Mat2::new(zero, p, p.conj(), zero));

    // [F, A] and its first derivative
    let fa = comm(&f[0], &a.0[0]);
    let fa_d = comm(&f[1], &a.0[0]) + comm(&f[0], &a.0[1]);

    let spatial = |j: usize| {
        let mut e = [0u8; 4];
        e[j] = 1;
        e
    };

    // a2: xi0^2 * 1 + sum_j xi_j^2 * A^2
    let mut a2_terms = vec![SymbolTerm { exponents: [2, 0, 0, 0], coeff: vec![id8, Mat8::zeros(), Mat8::zeros()] }];
    let a_sq8: Vec<Mat8> = a_sq.0.iter().map(|m| kron(m, &id4)).collect();
    for j in 1..4 {
        let mut e = [0u8; 4];
        e[j] = 2;
        a2_terms.push(SymbolTerm { exponents: e, coeff: a_sq8.clone() });
    }

    // a1: i(-2 H xi0 + A' g0 g^j xi_j + [F,A] gamma5 g^j xi_j)
    let mut a1_terms = vec![SymbolTerm {
        exponents: [1, 0, 0, 0],
        coeff: vec![kron(&(h.0[0] * c(-2.0)), &id4) * I, kron(&(h.0[1] * c(-2.0)), &id4) * I],
    }];
    for j in 1..4 {
        let g0gj = gam.g[0] * gam.g[j];
        let g5gj = gam.gamma5 * gam.g[j];
        let v = (kron(&a.0[1], &g0gj) + kron(&fa, &g5gj)) * I;
        let d = (kron(&a.0[2], &g0gj) + kron(&fa_d, &g5gj)) * I;
        a1_terms.push(SymbolTerm { exponents: spatial(j), coeff: vec![v, d] });
    }

    // a0: -H^2 - H' + F^2 - gamma5 g0 (F' + [H, F])
    let scalar_part = -(h.0[0] * h.0[0]) - h.0[1] + f[0] * f[0];
    let g5g0 = gam.gamma5 * gam.g[0];
    let a0 = kron(&scalar_part, &id4) - kron(&(f[1] + comm(&h.0[0], &f[0])), &g5g0);

    Ok(SymbolSet {
        t,
        a2: MatrixSymbol::new(2, a2_terms),
        a1: MatrixSymbol::new(1, a1_terms),
        a0: MatrixSymbol::new(0, vec![SymbolTerm { exponents: [0; 4], coeff: vec![a0] }]),
    })
}
