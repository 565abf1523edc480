//! Equations of motion of the effective action and their consistency checks.
//!
//! Varying the Lorentzian action with respect to the lapse and to each scale
//! factor gives
//!
//! ```text
//! r0 = 6 (a1 a1'^2 + a2 a2'^2) - Lambda (a1^3 + a2^3) - alpha V
//! r1 = 12 a1'' a1 + 6 a1'^2 - 3 Lambda a1^2 - alpha P1
//! r2 = 12 a2'' a2 + 6 a2'^2 - 3 Lambda a2^2 - alpha P2
//! ```
//!
//! with `P_i = dV/da_i`. Along solutions `r0` is conserved.

use serde::{Deserialize, Serialize};

use crate::action::density_from_phase;
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::params::CosmoParams;
use crate::profile::Jet2;

pub const COLLAPSE_EPS: f64 = 1e-8;

/// `(a1, a1', a2, a2')` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    pub a1: f64,
    pub v1: f64,
    pub a2: f64,
    pub v2: f64,
}

impl PhaseState {
    pub fn new(t: f64, a1: f64, v1: f64, a2: f64, v2: f64) -> Self {
        Self { t, a1, v1, a2, v2 }
    }

    pub fn swapped(&self) -> Self {
        Self { t: self.t, a1: self.a2, v1: self.v2, a2: self.a1, v2: self.v1 }
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.a1, self.v1, self.a2, self.v2].iter().all(|x| x.is_finite())
    }
}

/// `(6 a a'^2 - Lambda a^3, 12 a'' a + 6 a'^2 - 3 Lambda a^2)`.
pub fn classical_residuals(a: Jet2, lambda: f64) -> Result<(f64, f64)> {
    if !(a.value > 0.0) {
        return Err(Error::Domain(format!("scale factor must be positive, got {}", a.value)));
    }
    let constraint = 6.0 * a.value * a.d1 * a.d1 - lambda * a.value.powi(3);
    let evolution = 12.0 * a.d2 * a.value + 6.0 * a.d1 * a.d1 - 3.0 * lambda * a.value * a.value;
    Ok((constraint, evolution))
}

/// `(a1 - a2)^2 (a2^3 + 2 a2^2 a1 + 2 a1^2 a2 + a1^3) / (a2 + a1)^2`.
pub fn w_potential(a1: f64, a2: f64) -> f64 {
    (a1 - a2).powi(2) * (a2.powi(3) + 2.0 * a2 * a2 * a1 + 2.0 * a1 * a1 * a2 + a1.powi(3)) / (a1 + a2).powi(2)
}

/// `(a1 - a2)(2 a2^3 + 2 a2^2 a1 + 5 a1^2 a2 + 3 a1^3) / (a2 + a1)^2`.
pub fn p1(a1: f64, a2: f64) -> f64 {
    (a1 - a2) * (2.0 * a2.powi(3) + 2.0 * a2 * a2 * a1 + 5.0 * a1 * a1 * a2 + 3.0 * a1.powi(3)) / (a1 + a2).powi(2)
}

/// `(a2 - a1)(3 a2^3 + 5 a2^2 a1 + 2 a1^2 a2 + 2 a1^3) / (a2 + a1)^2`.
pub fn p2(a1: f64, a2: f64) -> f64 {
    (a2 - a1) * (3.0 * a2.powi(3) + 5.0 * a2 * a2 * a1 + 2.0 * a1 * a1 * a2 + 2.0 * a1.powi(3)) / (a1 + a2).powi(2)
}

fn check_pair(a1: f64, a2: f64) -> Result<()> {
    if a1 + a2 > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("need a1 + a2 > 0, got {a1} + {a2}")))
    }
}

/// Lapse constraint `r0`; also the conserved energy of the flow.
pub fn constraint_residual(s: &PhaseState, params: &CosmoParams) -> f64 {
    6.0 * (s.a1 * s.v1 * s.v1 + s.a2 * s.v2 * s.v2)
        - params.lambda_eff * (s.a1.powi(3) + s.a2.powi(3))
        - params.alpha * w_potential(s.a1, s.a2)
}

/// The constraint with the prefactor `6 a (a1'^2 + a2'^2)` for a single `a`.
pub fn constraint_with_common_prefactor(s: &PhaseState, a: f64, params: &CosmoParams) -> f64 {
    6.0 * a * (s.v1 * s.v1 + s.v2 * s.v2)
        - params.lambda_eff * (s.a1.powi(3) + s.a2.powi(3))
        - params.alpha * w_potential(s.a1, s.a2)
}

pub fn bimetric_residuals(s: &PhaseState, acc: (f64, f64), params: &CosmoParams) -> Result<[f64; 3]> {
    check_pair(s.a1, s.a2)?;
    let (l, al) = (params.lambda_eff, params.alpha);
    let r1 = 12.0 * acc.0 * s.a1 + 6.0 * s.v1 * s.v1 - 3.0 * l * s.a1 * s.a1 - al * p1(s.a1, s.a2);
    let r2 = 12.0 * acc.1 * s.a2 + 6.0 * s.v2 * s.v2 - 3.0 * l * s.a2 * s.a2 - al * p2(s.a1, s.a2);
    Ok([constraint_residual(s, params), r1, r2])
}

/// `(a1'', a2'')` solving `r1 = r2 = 0`.
pub fn accelerations(s: &PhaseState, params: &CosmoParams) -> Result<(f64, f64)> {
    accelerations_with(s, params, COLLAPSE_EPS)
}

pub fn accelerations_with(s: &PhaseState, params: &CosmoParams, collapse_eps: f64) -> Result<(f64, f64)> {
    for a in [s.a1, s.a2] {
        if !(a > collapse_eps) {
            return Err(Error::Collapse { value: a, threshold: collapse_eps });
        }
    }
    let (l, al) = (params.lambda_eff, params.alpha);
    let acc1 = (3.0 * l * s.a1 * s.a1 + al * p1(s.a1, s.a2) - 6.0 * s.v1 * s.v1) / (12.0 * s.a1);
    let acc2 = (3.0 * l * s.a2 * s.a2 + al * p2(s.a1, s.a2) - 6.0 * s.v2 * s.v2) / (12.0 * s.a2);
    Ok((acc1, acc2))
}

/// Smooth trial path `t -> (a1, a2)` with exact derivatives.
pub type TrialPath<'a> = &'a dyn Fn(f64) -> (Jet2, Jet2);

/// Settings of the functional-derivative estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationConfig {
    /// Grid spacing; the hat bumps have half-width `5 h`.
    pub h: f64,
    /// Amplitude step for the central difference in the bump amplitude.
    pub eta: f64,
}

impl Default for VariationConfig {
    fn default() -> Self {
        Self { h: 1e-2, eta: 1e-4 }
    }
}

/// Outcome of comparing finite-difference functional derivatives with the
/// residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElReport {
    /// `dS/da_1 / r1` on the decoupled (`alpha = 0`) problem.
    pub normalization: f64,
    pub dev1: f64,
    pub dev2: f64,
}

impl ElReport {
    pub fn max_rel_dev(&self) -> f64 {
        self.dev1.max(self.dev2)
    }
}

const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Action of the path with sheet `sheet` displaced by `eta * hat(t)`, where the
/// hat is centred at `t0` with half-width `w`, restricted to the support.
fn bumped_action(path: TrialPath, params: &CosmoParams, t0: f64, w: f64, cells: usize, sheet: usize, eta: f64) -> f64 {
    let dt = 2.0 * w / cells as f64;
    let mut total = 0.0;
    for c in 0..cells {
        let lo = t0 - w + c as f64 * dt;
        for (x, wt) in GL4 {
            let t = lo + 0.5 * dt * (x + 1.0);
            let (mut a1, mut a2) = path(t);
            let off = t - t0;
            let hat = 1.0 - off.abs() / w;
            let slope = -off.signum() / w;
            let target = if sheet == 0 { &mut a1 } else { &mut a2 };
            target.value += eta * hat;
            target.d1 += eta * slope;
            total += 0.5 * dt * wt * density_from_phase(a1.value, a1.d1, a2.value, a2.d1, params);
        }
    }
    total
}

/// `dS/da_sheet (t0)` from hat bumps of half-width `w` and `w/2`, Richardson
/// extrapolated.
pub fn functional_derivative(path: TrialPath, params: &CosmoParams, t0: f64, sheet: usize, cfg: &VariationConfig) -> Result<f64> {
    if !(cfg.h > 1e-7) || !(cfg.eta > 1e-12) {
        return Err(Error::StepUnderflow { t: t0, step: cfg.h.min(cfg.eta) });
    }
    let estimate = |w: f64, cells: usize| {
        let s = |eta: f64| bumped_action(path, params, t0, w, cells, sheet, eta);
        let e = cfg.eta;
        // fourth-order central difference in the amplitude
        (8.0 * (s(e) - s(-e)) - (s(2.0 * e) - s(-2.0 * e))) / (12.0 * e) / w
    };
    let w = 5.0 * cfg.h;
    let coarse = estimate(w, 10);
    let fine = estimate(0.5 * w, 10);
    Ok((4.0 * fine - coarse) / 3.0)
}

fn residual_terms(a: Jet2, other: f64, sheet: usize, params: &CosmoParams) -> (f64, f64) {
    let p = if sheet == 0 { p1(a.value, other) } else { p2(other, a.value) };
    let terms = [
        12.0 * a.d2 * a.value,
        6.0 * a.d1 * a.d1,
        -3.0 * params.lambda_eff * a.value * a.value,
        -params.alpha * p,
    ];
    let scale = terms.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (terms.iter().sum(), scale)
}

/// Compare the functional derivatives of the action along `path` at `t`
/// with `r1` and `r2`. The normalization is fixed on the same path with
/// `alpha = 0`.
pub fn el_consistency(params: &CosmoParams, path: TrialPath, t: f64) -> Result<ElReport> {
    el_consistency_with(params, path, t, &VariationConfig::default())
}

pub fn el_consistency_with(params: &CosmoParams, path: TrialPath, t: f64, cfg: &VariationConfig) -> Result<ElReport> {
    let (a1, a2) = path(t);
    check_pair(a1.value, a2.value)?;

    let decoupled = params.with_alpha(0.0);
    let (r_free, _) = residual_terms(a1, a2.value, 0, &decoupled);
    if r_free.abs() < 1e-8 {
        return Err(Error::Domain("trial path is on shell for the decoupled problem; normalization is undefined".into()));
    }
    let normalization = functional_derivative(path, &decoupled, t, 0, cfg)? / r_free;

    let mut dev = [0.0; 2];
    for (sheet, (a, other)) in [(a1, a2.value), (a2, a1.value)].into_iter().enumerate() {
        let (r, scale) = residual_terms(a, other, sheet, params);
        let d = functional_derivative(path, params, t, sheet, cfg)?;
        dev[sheet] = (d - normalization * r).abs() / (scale * normalization.abs()).max(f64::MIN_POSITIVE);
    }
    Ok(ElReport { normalization, dev1: dev[0], dev2: dev[1] })
}

/// `max |r0| / (|Lambda| (a1^3 + a2^3) + 1)` over the samples.
pub fn constraint_consistency(traj: &Trajectory, params: &CosmoParams) -> f64 {
    traj.samples
        .iter()
        .map(|s| {
            let st = s.state();
            constraint_residual(&st, params).abs() / (params.lambda_eff.abs() * (st.a1.powi(3) + st.a2.powi(3)) + 1.0)
        })
        .fold(0.0, f64::max)
}

/// The lapse derivative of the action density, `-dL/db` at `b = 1`, by
/// central differences; used to confirm which constraint prefactor is right.
pub fn lapse_variation(s: &PhaseState, params: &CosmoParams) -> f64 {
    use crate::action::{lagrangian_density, BimetricState, Lapse, Signature};
    let state = BimetricState { a1: Jet2::new(s.a1, s.v1, 0.0), a2: Jet2::new(s.a2, s.v2, 0.0) };
    let h = 1e-5;
    let l = |b: f64| lagrangian_density(&state, params, Lapse::new(b).expect("positive lapse"), Signature::Lorentzian);
    -(l(1.0 + h) - l(1.0 - h)) / (2.0 * h)
}
