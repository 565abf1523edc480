//! Hand transcriptions of the spinor-traced `b2` in closed form, used as a
//! fallible oracle for the recursion.
//!
//! All expressions are per sheet and divided by the spinor dimension, so they
//! compare with `KAPPA * tr` of the matching 4x4 block of the recursion.
//! `xi2` denotes the spatial square `xi1^2 + xi2^2 + xi3^2`.

use crate::error::Result;
use crate::profile::{Jet2, PhiField, SheetGeometry};

use super::gamma::C64;
use super::parametrix::parametrix;
use super::symbols::{build_symbols, Covector};
use super::wres::KAPPA;

/// Which coefficient of `xi2` the leading inverse uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum B0Convention {
    /// `(xi0^2 + A^2 xi2)^-1`, the inverse of the leading symbol.
    Squared,
    /// `(xi0^2 + A xi2)^-1`, as the closed form is usually written.
    Linear,
}

/// Sheet data entering the commutative part: `A = 1/a` with two time
/// derivatives and the torsion `H` with one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SheetCoeffs {
    pub a: Jet2,
    pub h: f64,
    pub h_d: f64,
}

impl SheetCoeffs {
    pub fn from_jets(scale: Jet2, torsion: Jet2) -> Self {
        Self { a: scale.recip(), h: torsion.value, h_d: torsion.d1 }
    }
}

pub fn printed_b0(a: f64, xi: &Covector, conv: B0Convention) -> f64 {
    let coeff = match conv {
        B0Convention::Squared => a * a,
        B0Convention::Linear => a,
    };
    1.0 / (xi.0[0] * xi.0[0] + coeff * xi.spatial_sq())
}

/// Diagonal part of `b2` for one sheet.
pub fn printed_b2c(s: &SheetCoeffs, xi: &Covector, conv: B0Convention) -> f64 {
    let (a, ad, add) = (s.a.value, s.a.d1, s.a.d2);
    let b = printed_b0(a, xi, conv);
    let x0 = xi.0[0] * xi.0[0];
    let x2 = xi.spatial_sq();
    ad * a * s.h * (4.0 * b.powi(2) * x2 - 24.0 * b.powi(4) * x2 * x0)
        + ad * ad
            * (8.0 * a * a * b.powi(4) * x2 * x2 - 48.0 * a * a * b.powi(5) * x2 * x2 * x0 - b.powi(3) * x2
                + 8.0 * b.powi(4) * x2 * x0)
        + add * (-2.0 * a * b.powi(3) * x2 + 8.0 * a * b.powi(4) * x2 * x0)
        + (s.h * s.h + s.h_d) * (b.powi(2) - 4.0 * b.powi(3) * x0)
}

/// Sheet trace of the noncommutative part
/// `(b0 [A,F] b0 F A b0 + b0 F A b0 [A,F] b0) xi2 - b0^2 F^2`.
pub fn printed_b2n_trace(a1: f64, a2: f64, phi: C64, xi: &Covector, conv: B0Convention) -> f64 {
    let (b1, b2) = (printed_b0(a1, xi, conv), printed_b0(a2, xi, conv));
    let p2 = phi.norm_sqr();
    let x2 = xi.spatial_sq();
    // diagonal entries of the two triple products, written out
    let first = b1 * b1 * b2 * p2 * (a1 - a2) * a1 + b2 * b2 * b1 * p2 * (a2 - a1) * a2;
    let second = b1 * b1 * b2 * p2 * a2 * (a2 - a1) + b2 * b2 * b1 * p2 * a1 * (a1 - a2);
    (first + second) * x2 - p2 * (b1 * b1 + b2 * b2)
}

/// `KAPPA * tr` of each sheet block of the recursion `b2`.
pub fn recursion_b2_sheet_traces(geom: &SheetGeometry, t: f64, xi: &Covector) -> Result<[C64; 2]> {
    let p = parametrix(&build_symbols(geom, t)?, xi)?;
    let block = |s: usize| (0..4).map(|k| p.b2[(4 * s + k, 4 * s + k)]).sum::<C64>() * KAPPA;
    Ok([block(0), block(1)])
}

/// Recursion counterpart of `printed_b2n_trace`: the change in the summed
/// sheet traces when `Phi` is switched on.
pub fn recursion_b2n_trace(geom: &SheetGeometry, t: f64, xi: &Covector) -> Result<C64> {
    let with = recursion_b2_sheet_traces(geom, t, xi)?;
    let without = recursion_b2_sheet_traces(&SheetGeometry { phi: PhiField::zero(), ..*geom }, t, xi)?;
    Ok(with[0] + with[1] - without[0] - without[1])
}
