//! Effective action in terms of the two scale factors.
//!
//! ```text
//! L = Lambda b (a1^3 + a2^3) + s 6 (a1'^2 a1 + a2'^2 a2) / b + alpha b V(a1, a2)
//! V = (a1 - a2)^2 (a1^2 + a1 a2 + a2^2) / (a1 + a2)
//! ```
//!
//! `b` is the lapse. `s = +1` for the Lorentzian form, whose variation gives
//! the Friedmann-type equations of motion, and `s = -1` for the Euclidean one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::params::CosmoParams;
use crate::profile::Jet2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    Euclidean,
    #[default]
    Lorentzian,
}

impl Signature {
    pub fn kinetic_sign(self) -> f64 {
        match self {
            Signature::Euclidean => -1.0,
            Signature::Lorentzian => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BimetricState {
    pub a1: Jet2,
    pub a2: Jet2,
}

impl BimetricState {
    pub fn new(a1: Jet2, a2: Jet2) -> Result<Self> {
        if !(a1.value > 0.0 && a2.value > 0.0) {
            return Err(Error::Domain(format!("scale factors must be positive, got {} and {}", a1.value, a2.value)));
        }
        Ok(Self { a1, a2 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lapse {
    b: f64,
}

impl Lapse {
    pub const UNIT: Lapse = Lapse { b: 1.0 };

    pub fn new(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Domain(format!("lapse must be positive, got {b}")));
        }
        Ok(Self { b })
    }

    pub fn value(&self) -> f64 {
        self.b
    }
}

fn check_sum(a1: f64, a2: f64) -> Result<()> {
    if a1 + a2 > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("potential needs a1 + a2 > 0, got {a1} + {a2}")))
    }
}

/// `V = (a1 - a2)^2 (a1^2 + a1 a2 + a2^2) / (a1 + a2)`.
pub fn potential_v(a1: f64, a2: f64) -> Result<f64> {
    check_sum(a1, a2)?;
    Ok(potential_unchecked(a1, a2))
}

pub(crate) fn potential_unchecked(a1: f64, a2: f64) -> f64 {
    (a1 - a2).powi(2) * (a1 * a1 + a1 * a2 + a2 * a2) / (a1 + a2)
}

/// The expanded form `(a1 - a2)^2 (a2^3 + 2 a2^2 a1 + 2 a1^2 a2 + a1^3) / (a1 + a2)^2`.
pub fn potential_expanded(a1: f64, a2: f64) -> Result<f64> {
    if a1 + a2 == 0.0 {
        return Err(Error::Domain("expanded potential needs a1 + a2 != 0".into()));
    }
    let cubic = a2.powi(3) + 2.0 * a2 * a2 * a1 + 2.0 * a1 * a1 * a2 + a1.powi(3);
    Ok((a1 - a2).powi(2) * cubic / (a1 + a2).powi(2))
}

/// `|V - V_expanded| / max(1, |V|)`.
pub fn potential_identity_check(a1: f64, a2: f64) -> Result<f64> {
    if a1 + a2 == 0.0 {
        return Err(Error::Domain("identity check needs a1 + a2 != 0".into()));
    }
    let v = potential_unchecked(a1, a2);
    let w = potential_expanded(a1, a2)?;
    Ok((v - w).abs() / v.abs().max(1.0))
}

pub fn lagrangian_density(state: &BimetricState, params: &CosmoParams, lapse: Lapse, signature: Signature) -> f64 {
    let (a1, a2) = (state.a1, state.a2);
    let b = lapse.value();
    let cosmological = params.lambda_eff * b * (a1.value.powi(3) + a2.value.powi(3));
    let kinetic = 6.0 * (a1.d1 * a1.d1 * a1.value + a2.d1 * a2.d1 * a2.value) / b;
    let potential = params.alpha * b * potential_unchecked(a1.value, a2.value);
    cosmological + signature.kinetic_sign() * kinetic + potential
}

/// Lorentzian density with unit lapse from positions and velocities.
pub(crate) fn density_from_phase(a1: f64, v1: f64, a2: f64, v2: f64, params: &CosmoParams) -> f64 {
    let state = BimetricState { a1: Jet2::new(a1, v1, 0.0), a2: Jet2::new(a2, v2, 0.0) };
    lagrangian_density(&state, params, Lapse::UNIT, Signature::Lorentzian)
}

/// Composite Simpson rule on uniform samples; an odd interval count closes
/// with the 3/8 rule on the last three intervals.
pub fn simpson_uniform(h: f64, y: &[f64]) -> Result<f64> {
    let n = y.len();
    if n < 3 {
        return Err(Error::Trajectory(format!("Simpson quadrature needs at least 3 samples, got {n}")));
    }
    let intervals = n - 1;
    let (simpson_end, tail) = if intervals % 2 == 0 { (n - 1, 0.0) } else if intervals >= 3 {
        let k = n - 4;
        (k, 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]))
    } else {
        unreachable!("two samples are rejected above")
    };
    let mut s = 0.0;
    let mut i = 0;
    while i + 2 <= simpson_end {
        s += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
        i += 2;
    }
    Ok(s + tail)
}

/// Time integral of the Lorentzian density with unit lapse.
pub fn total_action(traj: &Trajectory, params: &CosmoParams) -> Result<f64> {
    let s = &traj.samples;
    if s.len() < 3 {
        return Err(Error::Trajectory(format!("total action needs at least 3 samples, got {}", s.len())));
    }
    let h = s[1].t - s[0].t;
    let span = s[s.len() - 1].t - s[0].t;
    for w in s.windows(2) {
        let dt = w[1].t - w[0].t;
        if (dt - h).abs() > 1e-9 * span.abs().max(1.0) {
            return Err(Error::Trajectory(format!("samples are not uniform in t ({dt} vs {h})")));
        }
    }
    let y: Vec<f64> = s.iter().map(|p| density_from_phase(p.a1, p.v1, p.a2, p.v2, params)).collect();
    simpson_uniform(h, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{Sample, Trajectory};
    use proptest::prelude::*;

    fn uniform(n: usize, t1: f64, f: impl Fn(f64) -> (f64, f64)) -> Trajectory {
        let samples = (0..n)
            .map(|i| {
                let t = t1 * i as f64 / (n - 1) as f64;
                let (a, v) = f(t);
                Sample { t, a1: a, v1: v, a2: a, v2: v, constraint: 0.0 }
            })
            .collect();
        Trajectory::from_samples(samples, CosmoParams::new(1.0, 0.0))
    }

    #[test]
    fn potential_values() {
        assert_eq!(potential_v(1.3, 1.3).unwrap(), 0.0);
        assert!((potential_v(2.0, 1.0).unwrap() - 7.0 / 3.0).abs() < 1e-15);
        assert!((potential_v(1.0, 2.0).unwrap() - 7.0 / 3.0).abs() < 1e-15);
        assert!(potential_v(-1.0, 0.5).is_err());
    }

    #[test]
    fn identity_examples() {
        assert!(potential_identity_check(2.0, 1.0).unwrap() < 1e-12);
        assert_eq!(potential_identity_check(0.7, 0.7).unwrap(), 0.0);
        assert!(potential_identity_check(3.0, 0.5).unwrap() < 1e-12);
    }

    #[test]
    fn density_examples() {
        let p = CosmoParams::new(1.0, 1.0);
        let still = BimetricState::new(Jet2::constant(1.0), Jet2::constant(1.0)).unwrap();
        assert_eq!(lagrangian_density(&still, &p, Lapse::UNIT, Signature::Lorentzian), 2.0);

        let p = CosmoParams::new(0.0, 1.0);
        let s = BimetricState::new(Jet2::new(2.0, 1.0, 0.0), Jet2::new(1.0, 0.0, 0.0)).unwrap();
        let l = lagrangian_density(&s, &p, Lapse::UNIT, Signature::Lorentzian);
        assert!((l - (12.0 + 7.0 / 3.0)).abs() < 1e-14);
        let e = lagrangian_density(&s, &p, Lapse::UNIT, Signature::Euclidean);
        assert!((e - (-12.0 + 7.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn equal_sheets_double_the_single_sheet_density() {
        let p = CosmoParams::new(3.0, 5.0);
        let a = Jet2::new(1.4, 0.3, 0.0);
        let s = BimetricState::new(a, a).unwrap();
        let single = 3.0 * a.value.powi(3) + 6.0 * a.d1 * a.d1 * a.value;
        assert!((lagrangian_density(&s, &p, Lapse::UNIT, Signature::Lorentzian) - 2.0 * single).abs() < 1e-13);
    }

    #[test]
    fn lapse_validation() {
        assert!(Lapse::new(0.0).is_err());
        assert!(Lapse::new(f64::NAN).is_err());
        assert!(BimetricState::new(Jet2::constant(0.0), Jet2::constant(1.0)).is_err());
    }

    #[test]
    fn static_trajectory_action() {
        let traj = uniform(11, 2.5, |_| (1.0, 0.0));
        assert!((total_action(&traj, &CosmoParams::new(1.0, 4.0)).unwrap() - 5.0).abs() < 1e-14);
        // even number of samples uses the 3/8 closure
        let traj = uniform(12, 2.5, |_| (1.0, 0.0));
        assert!((total_action(&traj, &CosmoParams::new(1.0, 4.0)).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn de_sitter_action_matches_antiderivative() {
        let (lambda, t1) = (6.0, 1.0);
        let h = (lambda / 6.0f64).sqrt();
        let exact = 2.0 * (lambda + 6.0 * h * h) * ((3.0 * h * t1).exp() - 1.0) / (3.0 * h);
        let p = CosmoParams::new(lambda, 2.0);
        let err = |n| {
            let traj = uniform(n, t1, |t| ((h * t).exp(), h * (h * t).exp()));
            (total_action(&traj, &p).unwrap() - exact).abs()
        };
        assert!(err(1001) < 1e-8 * exact);
        // Simpson order: halving the spacing cuts the error by about 16
        let ratio = err(41) / err(81);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn too_few_samples() {
        let traj = uniform(2, 1.0, |_| (1.0, 0.0));
        assert!(total_action(&traj, &CosmoParams::new(1.0, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn potential_is_symmetric_and_non_negative(a1 in 0.01f64..100.0, a2 in 0.01f64..100.0) {
            let v = potential_v(a1, a2).unwrap();
            let w = potential_v(a2, a1).unwrap();
            prop_assert!((v - w).abs() <= 1e-12 * v.abs().max(1.0));
            prop_assert!(v >= 0.0);
            prop_assert!(potential_identity_check(a1, a2).unwrap() < 1e-12);
        }

        #[test]
        fn density_scales_with_lapse(b in 0.1f64..10.0, a1 in 0.1f64..3.0, a2 in 0.1f64..3.0, v1 in -2.0f64..2.0) {
            let p = CosmoParams::new(1.7, 0.9);
            let s = BimetricState::new(Jet2::new(a1, v1, 0.0), Jet2::new(a2, 0.3, 0.0)).unwrap();
            let only_kin = CosmoParams::new(0.0, 0.0);
            let static_state = BimetricState::new(Jet2::constant(a1), Jet2::constant(a2)).unwrap();
            let lb = Lapse::new(b).unwrap();
            let kin = lagrangian_density(&s, &only_kin, lb, Signature::Lorentzian);
            let kin1 = lagrangian_density(&s, &only_kin, Lapse::UNIT, Signature::Lorentzian);
            prop_assert!((kin - kin1 / b).abs() <= 1e-12 * kin1.abs().max(1.0));
            let pot = lagrangian_density(&static_state, &p, lb, Signature::Lorentzian);
            let pot1 = lagrangian_density(&static_state, &p, Lapse::UNIT, Signature::Lorentzian);
            prop_assert!((pot - b * pot1).abs() <= 1e-12 * pot.abs().max(1.0));
        }
    }
}
