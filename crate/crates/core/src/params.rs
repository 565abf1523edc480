//! Effective cosmological constants and their derivation from the cutoff
//! constants of the two-term spectral action.
//!
//! The Euclidean two-term action reads, per unit time,
//!
//! ```text
//! 2 pi^2 [ (l^4 - l^2 c |Phi|^2)(a1^3 + a2^3) - l^2 c (a1' ^2 a1 + a2'^2 a2) + l^2 c |Phi|^2 V ]
//! ```
//!
//! Wick rotation flips the sign of the kinetic term only. Dividing the result
//! by `2 pi^2 l^2 c / 6` brings the kinetic coefficient to 6, which gives
//!
//! ```text
//! Lambda = 6 (l^2 / c - |Phi|^2),    alpha = 6 |Phi|^2.
//! ```
//!
//! An overall factor does not change the equations of motion, so only the
//! ratios above carry physical meaning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CONSISTENCY_RTOL: f64 = 1e-12;

/// Cutoff-level constants: scale `lambda`, cutoff coefficient `c`, and the
/// Higgs vacuum modulus `|Phi|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawConstants {
    pub lambda: f64,
    pub c: f64,
    pub phi_modulus: f64,
}

impl RawConstants {
    /// `(Lambda, alpha)` implied by the raw constants.
    pub fn effective(&self) -> (f64, f64) {
        let phi2 = self.phi_modulus * self.phi_modulus;
        (6.0 * (self.lambda * self.lambda / self.c - phi2), 6.0 * phi2)
    }
}

/// User-facing parameter block; any subset may be given.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_eff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_modulus: Option<f64>,
}

impl ParamSpec {
    pub fn effective(lambda_eff: f64, alpha: f64) -> Self {
        Self { lambda_eff: Some(lambda_eff), alpha: Some(alpha), ..Self::default() }
    }

    pub fn raw(lambda: f64, c: f64, phi_modulus: f64) -> Self {
        Self { raw_lambda: Some(lambda), raw_c: Some(c), phi_modulus: Some(phi_modulus), ..Self::default() }
    }
}

/// Validated effective constants. `alpha` already contains the `|Phi|^2`
/// factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosmoParams {
    pub lambda_eff: f64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<RawConstants>,
}

impl CosmoParams {
    pub fn new(lambda_eff: f64, alpha: f64) -> Self {
        Self { lambda_eff, alpha, raw: None }
    }

    pub fn with_lambda(self, lambda_eff: f64) -> Self {
        Self { lambda_eff, ..self }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }
}

fn check_finite(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !x.is_finite() => Err(Error::InvalidParams(format!("{name} must be finite, got {x}"))),
        _ => Ok(()),
    }
}

fn agrees(a: f64, b: f64) -> bool {
    (a - b).abs() <= CONSISTENCY_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// Populate the effective constants, deriving them from the raw ones when
/// needed and rejecting conflicting pairs.
pub fn validate_params(spec: &ParamSpec) -> Result<CosmoParams> {
    check_finite("lambda_eff", spec.lambda_eff)?;
    check_finite("alpha", spec.alpha)?;
    check_finite("raw_lambda", spec.raw_lambda)?;
    check_finite("raw_c", spec.raw_c)?;
    check_finite("phi_modulus", spec.phi_modulus)?;

    let raw = match (spec.raw_lambda, spec.raw_c, spec.phi_modulus) {
        (None, None, None) => None,
        (Some(lambda), Some(c), Some(phi_modulus)) => {
            if c == 0.0 {
                return Err(Error::InvalidParams("raw_c must be non-zero".into()));
            }
            if phi_modulus < 0.0 {
                return Err(Error::InvalidParams(format!("phi_modulus must be >= 0, got {phi_modulus}")));
            }
            Some(RawConstants { lambda, c, phi_modulus })
        }
        _ => {
            return Err(Error::InvalidParams(
                "raw constants need all of raw_lambda, raw_c and phi_modulus".into(),
            ))
        }
    };

    let (lambda_eff, alpha) = match raw {
        None => match (spec.lambda_eff, spec.alpha) {
            (Some(l), Some(a)) => (l, a),
            (l, a) => {
                let mut missing = Vec::new();
                if l.is_none() {
                    missing.push("lambda_eff");
                }
                if a.is_none() {
                    missing.push("alpha");
                }
                return Err(Error::InvalidParams(format!("missing {}", missing.join(" and "))));
            }
        },
        Some(r) => {
            let (l, a) = r.effective();
            let mut conflicts = Vec::new();
            if let Some(given) = spec.lambda_eff {
                if !agrees(given, l) {
                    conflicts.push(format!("lambda_eff = {given} but raw constants give {l}"));
                }
            }
            if let Some(given) = spec.alpha {
                if !agrees(given, a) {
                    conflicts.push(format!("alpha = {given} but raw constants give {a}"));
                }
            }
            if !conflicts.is_empty() {
                return Err(Error::InconsistentParams(conflicts));
            }
            (l, a)
        }
    };
    Ok(CosmoParams { lambda_eff, alpha, raw })
}
