//! Closed-form time profiles and their exact 2-jets.
//!
//! Every background used by the engine is analytic, so derivatives are taken
//! by hand rather than numerically.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value together with its first and second time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 { value: 0.0, d1: 0.0, d2: 0.0 };

    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    pub const fn constant(value: f64) -> Self {
        Self { value, d1: 0.0, d2: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.value, s * self.d1, s * self.d2)
    }

    /// Jet of `1 / self`; the caller guarantees a non-zero value.
    pub fn recip(self) -> Self {
        let v = 1.0 / self.value;
        Self::new(
            v,
            -self.d1 * v * v,
            -self.d2 * v * v + 2.0 * self.d1 * self.d1 * v * v * v,
        )
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2::new(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )
    }
}

/// Analytic scalar profile of time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    Constant { c0: f64 },
    /// `c0 * exp(h t)`
    Exponential { c0: f64, h: f64 },
    /// `c0 * t^p`, defined for `t > 0` only.
    PowerLaw { c0: f64, p: f64 },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Zero
    }
}

impl Profile {
    pub fn constant(c0: f64) -> Self {
        Profile::Constant { c0 }
    }

    pub fn exponential(c0: f64, h: f64) -> Self {
        Profile::Exponential { c0, h }
    }

    pub fn power_law(c0: f64, p: f64) -> Self {
        Profile::PowerLaw { c0, p }
    }

    /// De Sitter scale factor `a0 exp(sqrt(lambda/6) t)`.
    pub fn de_sitter(a0: f64, lambda: f64) -> Self {
        Profile::Exponential { c0: a0, h: (lambda / 6.0).sqrt() }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Profile::Zero => true,
            Profile::Constant { c0 } | Profile::Exponential { c0, .. } | Profile::PowerLaw { c0, .. } => {
                c0 == 0.0
            }
        }
    }

    /// Exact value and first two derivatives at `t`.
    pub fn jet(&self, t: f64) -> Result<Jet2> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("non-finite time {t}")));
        }
        let jet = match *self {
            Profile::Zero => Jet2::ZERO,
            Profile::Constant { c0 } => Jet2::constant(c0),
            Profile::Exponential { c0, h } => {
                let v = c0 * (h * t).exp();
                Jet2::new(v, h * v, h * h * v)
            }
            Profile::PowerLaw { c0, p } => {
                if t <= 0.0 {
                    return Err(Error::Domain(format!(
                        "power-law profile t^{p} evaluated at t = {t} (needs t > 0)"
                    )));
                }
                let v = c0 * t.powf(p);
                Jet2::new(v, p * v / t, p * (p - 1.0) * v / (t * t))
            }
        };
        if !jet.is_finite() {
            return Err(Error::Domain(format!("profile {self:?} is not finite at t = {t}")));
        }
        Ok(jet)
    }

    /// Value only.
    pub fn at(&self, t: f64) -> Result<f64> {
        self.jet(t).map(|j| j.value)
    }
}

/// Closed-form jet evaluation of a profile.
pub fn jet_eval(p: &Profile, t: f64) -> Result<Jet2> {
    p.jet(t)
}

/// The Higgs field `Phi(t) = modulus(t) * exp(i phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiField {
    pub modulus: Profile,
    #[serde(default)]
    pub phase: f64,
}

impl PhiField {
    pub fn zero() -> Self {
        Self { modulus: Profile::Zero, phase: 0.0 }
    }

    /// Constant vacuum value.
    pub fn constant(phi: Complex<f64>) -> Self {
        Self { modulus: Profile::constant(phi.norm()), phase: phi.arg() }
    }

    pub fn conj(&self) -> Self {
        Self { modulus: self.modulus, phase: -self.phase }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.modulus, Profile::Zero | Profile::Constant { .. })
    }

    /// Value and time derivatives of the complex field.
    pub fn jet(&self, t: f64) -> Result<[Complex<f64>; 3]> {
        let m = self.modulus.jet(t)?;
        let u = Complex::from_polar(1.0, self.phase);
        Ok([u * m.value, u * m.d1, u * m.d2])
    }
}

impl Default for PhiField {
    fn default() -> Self {
        Self::zero()
    }
}

/// Per-sheet scale factors, torsion profiles and the Higgs field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheetGeometry {
    pub a1: Profile,
    pub a2: Profile,
    #[serde(default)]
    pub phi: PhiField,
    #[serde(default)]
    pub h1: Profile,
    #[serde(default)]
    pub h2: Profile,
}

impl SheetGeometry {
    /// Torsion-free geometry.
    pub fn new(a1: Profile, a2: Profile, phi: PhiField) -> Self {
        Self { a1, a2, phi, h1: Profile::Zero, h2: Profile::Zero }
    }

    pub fn with_torsion(mut self, h1: Profile, h2: Profile) -> Self {
        self.h1 = h1;
        self.h2 = h2;
        self
    }

    /// Swap the sheets, conjugating the Higgs field.
    pub fn swapped(&self) -> Self {
        Self { a1: self.a2, a2: self.a1, phi: self.phi.conj(), h1: self.h2, h2: self.h1 }
    }

    /// Scale-factor jets, rejecting non-positive values.
    pub fn scale_jets(&self, t: f64) -> Result<(Jet2, Jet2)> {
        let a1 = self.a1.jet(t)?;
        let a2 = self.a2.jet(t)?;
        for (name, a) in [("a1", a1), ("a2", a2)] {
            if a.value <= 0.0 {
                return Err(Error::Domain(format!("scale factor {name} = {} is not positive at t = {t}", a.value)));
            }
        }
        Ok((a1, a2))
    }

    pub fn torsion_jets(&self, t: f64) -> Result<(Jet2, Jet2)> {
        Ok((self.h1.jet(t)?, self.h2.jet(t)?))
    }

    pub fn has_torsion_at(&self, t: f64) -> Result<bool> {
        let (h1, h2) = self.torsion_jets(t)?;
        Ok([h1, h2].iter().any(|h| h.value != 0.0 || h.d1 != 0.0 || h.d2 != 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(p: &Profile, t: f64, h: f64) -> (f64, f64) {
        let f = |x: f64| p.at(x).unwrap();
        let d1 = (f(t + h) - f(t - h)) / (2.0 * h);
        let d2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn exponential_at_zero() {
        let j = Profile::exponential(1.0, 1.0).jet(0.0).unwrap();
        assert_eq!(j, Jet2::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn sqrt_profile_at_four() {
        let p = Profile::power_law(1.0, 0.5);
        let j = p.jet(4.0).unwrap();
        assert!((j.value - 2.0).abs() < 1e-15);
        assert!((j.d1 - 0.25).abs() < 1e-15);
        assert!((j.d2 + 0.03125).abs() < 1e-15);
        // first derivative against central differences at the prescribed step
        let (d1, _) = central(&p, 4.0, 1e-5);
        assert!((d1 - 0.25).abs() < 1e-9);
    }

    #[test]
    fn zero_profile() {
        assert_eq!(Profile::Zero.jet(3.7).unwrap(), Jet2::ZERO);
    }

    #[test]
    fn power_law_rejects_non_positive_time() {
        assert!(matches!(Profile::power_law(1.0, 0.5).jet(0.0), Err(Error::Domain(_))));
        assert!(Profile::power_law(1.0, 2.0 / 3.0).jet(-1.0).is_err());
    }

    #[test]
    fn exponential_jet_is_exactly_proportional() {
        for &(c0, h, t) in &[(1.3, 0.7, 0.2), (0.4, -2.0, 1.5), (2.0, 0.0, -3.0)] {
            let j = Profile::exponential(c0, h).jet(t).unwrap();
            assert_eq!(j.d1, h * j.value);
            assert_eq!(j.d2, h * h * j.value);
        }
    }

    #[test]
    fn recip_jet_matches_quotient_rule() {
        let a = Jet2::new(2.0, 0.3, -0.1);
        let r = a.recip();
        let one = a * r;
        assert!((one.value - 1.0).abs() < 1e-15);
        assert!(one.d1.abs() < 1e-15);
        assert!(one.d2.abs() < 1e-15);
    }

    #[test]
    fn geometry_rejects_non_positive_scale() {
        let g = SheetGeometry::new(Profile::constant(1.0), Profile::constant(-1.0), PhiField::zero());
        assert!(g.scale_jets(0.0).is_err());
    }

    #[test]
    fn profile_json_is_tagged() {
        let p: Profile = serde_json::from_str(r#"{"kind":"power_law","c0":1.0,"p":0.5}"#).unwrap();
        assert_eq!(p, Profile::power_law(1.0, 0.5));
        assert!(serde_json::from_str::<Profile>(r#"{"kind":"constant","c0":1.0,"c1":2.0}"#).is_err());
    }

    proptest::proptest! {
        #[test]
        fn jets_match_central_differences(
            kind in 0usize..3,
            c0 in 0.1f64..3.0,
            rate in -1.5f64..1.5,
            t in 0.5f64..3.0,
        ) {
            let p = match kind {
                0 => Profile::constant(c0),
                1 => Profile::exponential(c0, rate),
                _ => Profile::power_law(c0, rate),
            };
            let j = p.jet(t).unwrap();
            let h = 1e-5;
            let (d1, _) = central(&p, t, h);
            // second derivative as the central difference of the first
            let d2 = (p.jet(t + h).unwrap().d1 - p.jet(t - h).unwrap().d1) / (2.0 * h);
            let scale = j.value.abs().max(1.0);
            proptest::prop_assert!((j.d1 - d1).abs() / scale < 1e-6);
            proptest::prop_assert!((j.d2 - d2).abs() / scale < 1e-6);
        }
    }
}
