//! Cosphere integrals of the parametrix traces, and the closed forms they
//! are compared against.
//!
//! Traces are normalized by `KAPPA = 1/4` (the spinor dimension), which makes
//! the flat volume term come out as `2 pi^2` per sheet.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{Jet2, PhiField, SheetGeometry};

use super::gamma::{c, kron, Mat2, Mat4, Mat8, C64};
use super::parametrix::parametrix;
use super::quadrature::CosphereRule;
use super::symbols::build_symbols;

pub const KAPPA: f64 = 0.25;

/// `kappa * int tr(b0^2)`.
pub fn wres_volume_term(geom: &SheetGeometry, t: f64, n: usize) -> Result<f64> {
    let rule = CosphereRule::new(n)?;
    volume_with_rule(geom, t, &rule)
}

pub fn volume_with_rule(geom: &SheetGeometry, t: f64, rule: &CosphereRule) -> Result<f64> {
    let s = build_symbols(geom, t)?;
    let total = rule.try_integrate(|xi| {
        let b0 = s.a2.eval(xi).try_inverse().ok_or(Error::SingularSymbol { xi: xi.0 })?;
        Ok(Acc((b0 * b0).trace() * KAPPA))
    })?;
    Ok(total.0.re)
}

/// Pieces of `kappa * int tr(b2)`.
///
/// `kinetic` is the integral with `Phi` switched off, `mass` the integral of
/// `-b0 F^2 b0`, and `potential` whatever remains. `imag` is the imaginary
/// part of the full integral, which vanishes up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct B2Terms {
    pub kinetic: f64,
    pub potential: f64,
    pub mass: f64,
    pub imag: f64,
}

impl B2Terms {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential + self.mass
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc(C64);

impl std::ops::Add for Acc {
    type Output = Acc;
    fn add(self, o: Acc) -> Acc {
        Acc(self.0 + o.0)
    }
}

impl std::ops::Mul<f64> for Acc {
    type Output = Acc;
    fn mul(self, w: f64) -> Acc {
        Acc(self.0 * w)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc3([C64; 3]);

impl std::ops::Add for Acc3 {
    type Output = Acc3;
    fn add(self, o: Acc3) -> Acc3 {
        Acc3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl std::ops::Mul<f64> for Acc3 {
    type Output = Acc3;
    fn mul(self, w: f64) -> Acc3 {
        Acc3(self.0.map(|z| z * w))
    }
}

/// `kappa * int tr(b2)` split into kinetic, potential and mass parts.
///
/// Torsion is refused unless `allow_torsion` is set; no closed form exists
/// for the torsion terms.
pub fn wres_b2_term(geom: &SheetGeometry, t: f64, n: usize, allow_torsion: bool) -> Result<B2Terms> {
    let rule = CosphereRule::new(n)?;
    b2_with_rule(geom, t, &rule, allow_torsion)
}

pub fn b2_with_rule(geom: &SheetGeometry, t: f64, rule: &CosphereRule, allow_torsion: bool) -> Result<B2Terms> {
    if !allow_torsion && geom.has_torsion_at(t)? {
        return Err(Error::TorsionNotAllowed { t });
    }
    let full = build_symbols(geom, t)?;
    let free_geom = SheetGeometry { phi: PhiField::zero(), ..*geom };
    let free = build_symbols(&free_geom, t)?;

    let phi = geom.phi.jet(t)?[0];
    let zero = c(0.0);
    let f = Mat2::new(zero, phi, phi.conj(), zero);
    let f_sq = kron(&(f * f), &Mat4::identity());

    let sums = rule.try_integrate(|xi| {
        let pf = parametrix(&full, xi)?;
        let p0 = parametrix(&free, xi)?;
        let b0: &Mat8 = &pf.b0.v;
        let mass = -(b0 * f_sq * b0).trace();
        Ok(Acc3([pf.b2.trace() * KAPPA, p0.b2.trace() * KAPPA, mass * KAPPA]))
    })?;
    let [total, kinetic, mass] = sums.0;
    Ok(B2Terms {
        kinetic: kinetic.re,
        potential: total.re - kinetic.re - mass.re,
        mass: mass.re,
        imag: total.im,
    })
}

/// `2 pi^2 (a1^3 + a2^3)`.
pub fn volume_closed_form(a1: f64, a2: f64) -> f64 {
    2.0 * PI * PI * (a1.powi(3) + a2.powi(3))
}

/// `pi^2 / A^5 (3 A'^2 - A A'')` for one sheet with `A = 1/a`.
pub fn kinetic_closed_form(a: Jet2) -> f64 {
    let inv = a.recip();
    PI * PI / inv.value.powi(5) * (3.0 * inv.d1 * inv.d1 - inv.value * inv.d2)
}

/// `2 pi^2 |Phi|^2 (a1 - a2)^2 (a1^2 + a1 a2 + a2^2) / (a1 + a2)`.
pub fn potential_closed_form(a1: f64, a2: f64, phi_modulus: f64) -> f64 {
    2.0 * PI * PI * phi_modulus * phi_modulus * (a1 - a2).powi(2) * (a1 * a1 + a1 * a2 + a2 * a2) / (a1 + a2)
}

/// `-2 pi^2 |Phi|^2 (a1^3 + a2^3)`.
pub fn mass_closed_form(a1: f64, a2: f64, phi_modulus: f64) -> f64 {
    -phi_modulus * phi_modulus * volume_closed_form(a1, a2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile;

    fn consts(a1: f64, a2: f64, phi: f64) -> SheetGeometry {
        SheetGeometry::new(Profile::constant(a1), Profile::constant(a2), PhiField::constant(C64::new(phi, 0.0)))
    }

    fn rel(x: f64, y: f64) -> f64 {
        (x - y).abs() / y.abs().max(1e-300)
    }

    #[test]
    fn flat_calibration() {
        let v = wres_volume_term(&consts(1.0, 1.0, 0.0), 0.0, 32).unwrap();
        assert!(rel(v, 4.0 * PI * PI) < 1e-12);
    }

    #[test]
    fn volume_for_unequal_sheets() {
        let v = wres_volume_term(&consts(2.0, 1.0, 0.0), 0.0, 32).unwrap();
        assert!(rel(v, 18.0 * PI * PI) < 1e-8);
    }

    #[test]
    fn volume_is_additive_over_equal_sheets() {
        let both = wres_volume_term(&consts(1.7, 1.7, 0.3), 0.0, 32).unwrap();
        assert!(rel(both, 2.0 * 2.0 * PI * PI * 1.7f64.powi(3)) < 1e-10);
    }

    #[test]
    fn potential_for_constant_sheets() {
        let b2 = wres_b2_term(&consts(2.0, 1.0, 1.0), 0.0, 32, false).unwrap();
        assert!(rel(b2.potential, 14.0 * PI * PI / 3.0) < 1e-8, "{b2:?}");
        assert!(rel(b2.mass, mass_closed_form(2.0, 1.0, 1.0)) < 1e-8);
        assert!(b2.kinetic.abs() < 1e-12);
        assert!(b2.imag.abs() < 1e-10);
    }

    #[test]
    fn equal_sheets_have_no_potential() {
        let g = SheetGeometry::new(
            Profile::exponential(1.2, 0.3),
            Profile::exponential(1.2, 0.3),
            PhiField::constant(C64::new(0.4, 0.7)),
        );
        let b2 = wres_b2_term(&g, 0.5, 16, false).unwrap();
        assert!(b2.potential.abs() < 1e-10 * b2.mass.abs());
    }

    #[test]
    fn kinetic_matches_closed_form_on_de_sitter() {
        let g = SheetGeometry::new(Profile::exponential(1.0, 0.7), Profile::constant(1.0), PhiField::zero());
        let b2 = wres_b2_term(&g, 0.2, 32, false).unwrap();
        let (a1, _) = g.scale_jets(0.2).unwrap();
        assert!(rel(b2.kinetic, kinetic_closed_form(a1)) < 1e-8);
    }

    #[test]
    fn torsion_needs_override() {
        let g = consts(1.0, 2.0, 0.5).with_torsion(Profile::constant(0.1), Profile::Zero);
        assert!(matches!(wres_b2_term(&g, 0.0, 8, false), Err(Error::TorsionNotAllowed { .. })));
        assert!(wres_b2_term(&g, 0.0, 8, true).is_ok());
    }

    #[test]
    fn sheet_swap_leaves_terms_unchanged() {
        let g = SheetGeometry::new(
            Profile::power_law(1.3, 0.5),
            Profile::exponential(0.7, -0.2),
            PhiField::constant(C64::new(0.5, -0.8)),
        );
        let (x, y) = (wres_b2_term(&g, 1.1, 16, false).unwrap(), wres_b2_term(&g.swapped(), 1.1, 16, false).unwrap());
        for (p, q) in [(x.kinetic, y.kinetic), (x.potential, y.potential), (x.mass, y.mass)] {
            assert!((p - q).abs() < 1e-10 * p.abs().max(1.0));
        }
        let (v, w) = (wres_volume_term(&g, 1.1, 16).unwrap(), wres_volume_term(&g.swapped(), 1.1, 16).unwrap());
        assert!(rel(v, w) < 1e-12);
    }
}
