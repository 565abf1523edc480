//! Linearized theory around a symmetric background `a1 = a + eps r`,
//! `a2 = a - eps r`.

pub mod bessel;

use std::f64::consts::PI;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::eom::PhaseState;
use crate::error::{Error, Result};
use crate::integrator::{rk4_step, OdeSystem, Trajectory};
use crate::params::CosmoParams;
use crate::profile::{Jet2, Profile};

pub use bessel::bessel_j;

/// Order of the radiation-era Bessel solutions.
pub const RADIATION_ORDER: f64 = 0.559_016_994_374_947_4; // sqrt(5) / 4

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Empty,
    Radiation,
    Matter,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Empty, ModelKind::Radiation, ModelKind::Matter];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Empty => "empty",
            ModelKind::Radiation => "radiation",
            ModelKind::Matter => "matter",
        }
    }
}

/// A background together with the constants of the linear equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationModel {
    kind: ModelKind,
    background: Profile,
    params: CosmoParams,
}

fn negative_lambda(lambda: f64) -> Error {
    Error::Domain(format!(
        "the empty model needs Lambda >= 0 (got {lambda}); sqrt(6 Lambda) has no real value, \
         and negative Lambda is only treated qualitatively"
    ))
}

impl PerturbationModel {
    /// `a0 exp(sqrt(Lambda/6) t)`, `a0 sqrt(t)` or `a0 t^(2/3)` according to `kind`.
    pub fn new(kind: ModelKind, a0: f64, params: CosmoParams) -> Result<Self> {
        if !(a0 > 0.0 && a0.is_finite()) {
            return Err(Error::Domain(format!("background amplitude must be positive, got {a0}")));
        }
        if !(params.lambda_eff.is_finite() && params.alpha.is_finite()) {
            return Err(Error::InvalidParams("non-finite constants".into()));
        }
        let background = match kind {
            ModelKind::Empty => {
                if params.lambda_eff < 0.0 {
                    return Err(negative_lambda(params.lambda_eff));
                }
                Profile::de_sitter(a0, params.lambda_eff)
            }
            ModelKind::Radiation => Profile::power_law(a0, 0.5),
            ModelKind::Matter => Profile::power_law(a0, 2.0 / 3.0),
        };
        Ok(Self { kind, background, params })
    }

    /// Accepts an explicit background, which must be the one `kind` implies.
    pub fn with_background(kind: ModelKind, background: Profile, params: CosmoParams) -> Result<Self> {
        let a0 = match background {
            Profile::Exponential { c0, .. } | Profile::PowerLaw { c0, .. } => c0,
            Profile::Constant { c0 } if kind == ModelKind::Empty => c0,
            _ => return Err(Error::Domain(format!("{background:?} is not a {} background", kind.name()))),
        };
        let model = Self::new(kind, a0, params)?;
        let expected = model.background;
        let same = match (expected, background) {
            (Profile::Exponential { h: h1, .. }, Profile::Exponential { h: h2, .. }) => (h1 - h2).abs() <= 1e-12 * h1.max(1.0),
            (Profile::Exponential { h, .. }, Profile::Constant { .. }) => h == 0.0,
            (Profile::PowerLaw { p: p1, .. }, Profile::PowerLaw { p: p2, .. }) => (p1 - p2).abs() <= 1e-12,
            _ => false,
        };
        if !same {
            return Err(Error::Domain(format!(
                "{background:?} does not match the {} background {expected:?}",
                kind.name()
            )));
        }
        Ok(model)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn background(&self) -> Profile {
        self.background
    }

    pub fn params(&self) -> CosmoParams {
        self.params
    }

    pub fn a0(&self) -> f64 {
        match self.background {
            Profile::Exponential { c0, .. } | Profile::PowerLaw { c0, .. } | Profile::Constant { c0 } => c0,
            Profile::Zero => 0.0,
        }
    }

    /// `Lambda + alpha`.
    pub fn k(&self) -> f64 {
        self.params.lambda_eff + self.params.alpha
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || (self.kind != ModelKind::Empty && t <= 0.0) {
            return Err(Error::Domain(format!("{} model evaluated at t = {t}", self.kind.name())));
        }
        Ok(())
    }

    /// Positive factor with `linearized_residual = prefactor * reduce_model`.
    pub fn prefactor(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let a0 = self.a0();
        Ok(match self.kind {
            ModelKind::Empty => 2.0 * self.background.at(t)?,
            ModelKind::Radiation => 3.0 * a0 / t.powf(1.5),
            ModelKind::Matter => 2.0 * a0 / (3.0 * t.powf(4.0 / 3.0)),
        })
    }
}

/// Terms of `12 a'' r + 12 a r'' + 12 a' r' - 6 Lambda a r - 6 alpha a r`.
pub fn linearized_terms(a_bg: Jet2, r: Jet2, params: &CosmoParams) -> [f64; 4] {
    let a = a_bg.value;
    [
        12.0 * a_bg.d2 * r.value,
        12.0 * a * r.d2,
        12.0 * a_bg.d1 * r.d1,
        -6.0 * (params.lambda_eff + params.alpha) * a * r.value,
    ]
}

pub fn linearized_residual(a_bg: Jet2, r: Jet2, params: &CosmoParams) -> f64 {
    linearized_terms(a_bg, r, params).iter().sum()
}

/// The individual terms of the reduced equation; they sum to the residual.
pub fn reduced_terms(model: &PerturbationModel, t: f64, r: Jet2) -> Result<[f64; 3]> {
    model.check_time(t)?;
    let (lambda, alpha) = (model.params.lambda_eff, model.params.alpha);
    let k = lambda + alpha;
    Ok(match model.kind {
        ModelKind::Empty => {
            if lambda < 0.0 {
                return Err(negative_lambda(lambda));
            }
            [6.0 * r.d2, (6.0 * lambda).sqrt() * r.d1, -(2.0 * lambda + 3.0 * alpha) * r.value]
        }
        ModelKind::Radiation => [4.0 * t * t * r.d2, 2.0 * t * r.d1, -(1.0 + 2.0 * k * t * t) * r.value],
        ModelKind::Matter => [18.0 * t * t * r.d2, 12.0 * t * r.d1, -(4.0 + 9.0 * k * t * t) * r.value],
    })
}

/// Residual of the model's own second-order equation.
pub fn reduce_model(model: &PerturbationModel, t: f64, r: Jet2) -> Result<f64> {
    Ok(reduced_terms(model, t, r)?.iter().sum())
}

/// `|residual| / max |term|`, zero when every term vanishes.
pub fn relative_residual(model: &PerturbationModel, t: f64, r: Jet2) -> Result<f64> {
    let terms = reduced_terms(model, t, r)?;
    let scale = terms.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let sum: f64 = terms.iter().sum();
    Ok(if scale == 0.0 { 0.0 } else { sum.abs() / scale })
}

/// Roots of `6 mu^2 + sqrt(6 Lambda) mu - (2 Lambda + 3 alpha) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exponents {
    Real { plus: f64, minus: f64 },
    Double { mu: f64 },
    Complex { re: f64, im: f64 },
}

impl Exponents {
    pub fn roots(&self) -> [Complex<f64>; 2] {
        match *self {
            Exponents::Real { plus, minus } => [Complex::new(plus, 0.0), Complex::new(minus, 0.0)],
            Exponents::Double { mu } => [Complex::new(mu, 0.0); 2],
            Exponents::Complex { re, im } => [Complex::new(re, im), Complex::new(re, -im)],
        }
    }
}

pub fn empty_exponents(lambda: f64, alpha: f64) -> Result<Exponents> {
    if !(lambda.is_finite() && alpha.is_finite()) {
        return Err(Error::InvalidParams("non-finite constants".into()));
    }
    if lambda < 0.0 {
        return Err(negative_lambda(lambda));
    }
    let centre = -(lambda / 24.0).sqrt();
    let disc = 6.0 * lambda + 8.0 * alpha;
    let tol = 1e-13 * (6.0 * lambda.abs() + 8.0 * alpha.abs());
    Ok(if disc.abs() <= tol {
        Exponents::Double { mu: centre }
    } else if disc > 0.0 {
        let w = 0.25 * disc.sqrt();
        Exponents::Real { plus: centre + w, minus: centre - w }
    } else {
        Exponents::Complex { re: centre, im: 0.25 * (-disc).sqrt() }
    })
}

/// Which multiple of `sqrt(-2 (Lambda + alpha))` scales time inside the
/// radiation-era Bessel functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BesselArg {
    /// `b = sqrt(-2k) / 2`
    Half,
    /// `b = sqrt(-2k)`, the argument as printed.
    Printed,
}

impl BesselArg {
    pub fn scale(self, k: f64) -> f64 {
        let b = (-2.0 * k).sqrt();
        match self {
            BesselArg::Half => 0.5 * b,
            BesselArg::Printed => b,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BesselArg::Half => "sqrt(-2(Lambda+alpha))/2",
            BesselArg::Printed => "sqrt(-2(Lambda+alpha))",
        }
    }
}

fn oscillation_scale(model: &PerturbationModel) -> Result<f64> {
    let k = model.k();
    if !(k < 0.0) {
        return Err(Error::Domain(format!(
            "the {} solutions need Lambda + alpha < 0, got {k}",
            model.kind.name()
        )));
    }
    Ok(k)
}

/// General solution of the model equation and its first two derivatives.
pub fn closed_form_solution(model: &PerturbationModel, t: f64, c1: f64, c2: f64) -> Result<Jet2> {
    closed_form_solution_with(model, t, c1, c2, BesselArg::Half)
}

/// As [`closed_form_solution`], choosing the radiation Bessel argument.
pub fn closed_form_solution_with(model: &PerturbationModel, t: f64, c1: f64, c2: f64, arg: BesselArg) -> Result<Jet2> {
    model.check_time(t)?;
    match model.kind {
        ModelKind::Empty => empty_solution(model, t, c1, c2),
        ModelKind::Radiation => {
            let b = arg.scale(oscillation_scale(model)?);
            if c1 == 0.0 && c2 == 0.0 {
                return Ok(Jet2::ZERO);
            }
            let x = b * t;
            if x > bessel::MAX_ARG {
                return Err(Error::Domain(format!("Bessel argument {x} beyond {}", bessel::MAX_ARG)));
            }
            let nu = RADIATION_ORDER;
            let jp = bessel::jv_jet(nu, x);
            let jm = bessel::jv_jet(-nu, x);
            let g = Jet2::new(
                c1 * jp[0] + c2 * jm[0],
                b * (c1 * jp[1] + c2 * jm[1]),
                b * b * (c1 * jp[2] + c2 * jm[2]),
            );
            let p = t.powf(0.25);
            Ok(Jet2::new(
                p * g.value,
                0.25 * p / t * g.value + p * g.d1,
                -3.0 / 16.0 * p / (t * t) * g.value + 0.5 * p / t * g.d1 + p * g.d2,
            ))
        }
        ModelKind::Matter => {
            let b = BesselArg::Half.scale(oscillation_scale(model)?);
            let (s, c) = (b * t).sin_cos();
            let g = Jet2::new(c1 * s + c2 * c, b * (c1 * c - c2 * s), -b * b * (c1 * s + c2 * c));
            let p = t.powf(-1.0 / 3.0);
            Ok(Jet2::new(
                p * g.value,
                -p / (3.0 * t) * g.value + p * g.d1,
                4.0 / 9.0 * p / (t * t) * g.value - 2.0 / 3.0 * p / t * g.d1 + p * g.d2,
            ))
        }
    }
}

fn empty_solution(model: &PerturbationModel, t: f64, c1: f64, c2: f64) -> Result<Jet2> {
    let ex = empty_exponents(model.params.lambda_eff, model.params.alpha)?;
    Ok(match ex {
        Exponents::Real { plus, minus } => {
            let (ep, em) = ((plus * t).exp(), (minus * t).exp());
            Jet2::new(
                c1 * ep + c2 * em,
                c1 * plus * ep + c2 * minus * em,
                c1 * plus * plus * ep + c2 * minus * minus * em,
            )
        }
        Exponents::Double { mu } => {
            let e = (mu * t).exp();
            let p = c1 + c2 * t;
            Jet2::new(p * e, (c2 + mu * p) * e, (2.0 * mu * c2 + mu * mu * p) * e)
        }
        Exponents::Complex { re, im } => {
            // Re[(c1 - i c2) e^(lambda t)] = e^(re t) (c1 cos + c2 sin)
            let lam = Complex::new(re, im);
            let z = Complex::new(c1, -c2) * (lam * t).exp();
            Jet2::new(z.re, (lam * z).re, (lam * lam * z).re)
        }
    })
}

/// Wronskian of the two radiation solutions `t^(1/4) J_(+-nu)(b t)`,
/// evaluated from the jets.
pub fn radiation_wronskian(model: &PerturbationModel, t: f64) -> Result<f64> {
    if model.kind != ModelKind::Radiation {
        return Err(Error::Domain("Wronskian is only defined here for the radiation model".into()));
    }
    let r1 = closed_form_solution(model, t, 1.0, 0.0)?;
    let r2 = closed_form_solution(model, t, 0.0, 1.0)?;
    Ok(r1.value * r2.d1 - r1.d1 * r2.value)
}

/// Closed form of the radiation Wronskian, `-2 sin(nu pi) / (pi sqrt t)`.
pub fn radiation_wronskian_exact(t: f64) -> f64 {
    -2.0 * (RADIATION_ORDER * PI).sin() / (PI * t.sqrt())
}

/// Worst relative residual of one Bessel-argument candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArgResidual {
    pub arg: BesselArg,
    pub b: f64,
    pub max_rel_residual: f64,
    pub worst_t: f64,
}

/// Residual of `t^(1/4) J_nu(b t)` in the radiation equation for both
/// candidate arguments, maximised over `times`.
pub fn bessel_argument_scan(params: &CosmoParams, times: &[f64]) -> Result<[ArgResidual; 2]> {
    if times.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    let model = PerturbationModel::new(ModelKind::Radiation, 1.0, *params)?;
    let k = oscillation_scale(&model)?;
    let scan = |arg: BesselArg| -> Result<ArgResidual> {
        let mut out = ArgResidual { arg, b: arg.scale(k), max_rel_residual: 0.0, worst_t: times[0] };
        for &t in times {
            let r = closed_form_solution_with(&model, t, 1.0, 0.0, arg)?;
            let rel = relative_residual(&model, t, r)?;
            if rel > out.max_rel_residual || rel.is_nan() {
                out.max_rel_residual = rel;
                out.worst_t = t;
            }
        }
        Ok(out)
    };
    Ok([scan(BesselArg::Half)?, scan(BesselArg::Printed)?])
}

/// Linear perturbation with fixed coefficients, anchored at `t0`, used to
/// seed and check a full nonlinear run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSolution {
    pub model: PerturbationModel,
    pub c1: f64,
    pub c2: f64,
    pub t0: f64,
}

impl SplitSolution {
    pub fn new(model: PerturbationModel, c1: f64, c2: f64, t0: f64) -> Result<Self> {
        if model.kind != ModelKind::Empty {
            return Err(Error::Domain(format!(
                "the {} background does not solve the source-free equations; only the empty model can be split",
                model.kind.name()
            )));
        }
        Ok(Self { model, c1, c2, t0 })
    }

    pub fn r(&self, t: f64) -> Result<Jet2> {
        closed_form_solution(&self.model, t, self.c1, self.c2)
    }

    /// `a(t0) +- eps r(t0)` with matching velocities.
    pub fn initial_state(&self, eps: f64) -> Result<PhaseState> {
        let a = self.model.background.jet(self.t0)?;
        let r = self.r(self.t0)?;
        let s = PhaseState::new(self.t0, a.value + eps * r.value, a.d1 + eps * r.d1, a.value - eps * r.value, a.d1 - eps * r.d1);
        if !(s.a1 > 0.0 && s.a2 > 0.0) {
            return Err(Error::Domain(format!("eps = {eps} makes a scale factor non-positive")));
        }
        Ok(s)
    }
}

/// `max |(a1 - a2)/2 - eps r| / (eps max |r|)` over the samples. With
/// `eps = 0` the unnormalised maximum is returned.
pub fn split_compare(sol: &SplitSolution, eps: f64, traj: &Trajectory) -> Result<f64> {
    let first = traj.samples.first().ok_or_else(|| Error::Trajectory("empty trajectory".into()))?;
    if (first.t - sol.t0).abs() > 1e-12 * sol.t0.abs().max(1.0) {
        return Err(Error::Trajectory(format!(
            "trajectory starts at t = {} but the split solution is anchored at {}",
            first.t, sol.t0
        )));
    }
    if traj.samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Trajectory("sample times are not strictly increasing".into()));
    }
    let mut dev = 0.0f64;
    let mut rmax = 0.0f64;
    for s in &traj.samples {
        let r = sol.r(s.t)?.value;
        rmax = rmax.max(r.abs());
        dev = dev.max((0.5 * (s.a1 - s.a2) - eps * r).abs());
    }
    if eps == 0.0 {
        return Ok(dev);
    }
    if rmax == 0.0 {
        return Err(Error::Domain("linear solution vanishes on the whole grid".into()));
    }
    Ok(dev / (eps.abs() * rmax))
}

/// The model equation as a first-order system in `(r, r')`.
pub struct LinearSystem<'a> {
    pub model: &'a PerturbationModel,
}

impl OdeSystem<2> for LinearSystem<'_> {
    fn rhs(&self, t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        // residual is affine in r'': solve terms(r, r', 0) + c r'' = 0
        let base = reduce_model(self.model, t, Jet2::new(y[0], y[1], 0.0))?;
        let unit = reduced_terms(self.model, t, Jet2::new(0.0, 0.0, 1.0))?[0];
        Ok([y[1], -base / unit])
    }
}

/// Sample of a numerically integrated linear perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSample {
    pub t: f64,
    pub r: f64,
    pub v: f64,
}

/// RK4 solution of the model equation on `steps` equal steps of `[t0, t1]`.
pub fn integrate_linear(model: &PerturbationModel, r0: f64, v0: f64, t0: f64, t1: f64, steps: usize) -> Result<Vec<LinearSample>> {
    if steps == 0 || !(t1 > t0) {
        return Err(Error::InvalidConfig(format!("need t1 > t0 and at least one step, got [{t0}, {t1}] with {steps}")));
    }
    model.check_time(t0)?;
    let sys = LinearSystem { model };
    let h = (t1 - t0) / steps as f64;
    let mut y = [r0, v0];
    let mut out = Vec::with_capacity(steps + 1);
    out.push(LinearSample { t: t0, r: r0, v: v0 });
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        y = rk4_step(&sys, t, &y, h)?;
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::Domain(format!("linear solution diverged near t = {}", t + h)));
        }
        out.push(LinearSample { t: t0 + (i + 1) as f64 * h, r: y[0], v: y[1] });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate, IntegratorConfig};
    use proptest::prelude::*;

    fn params(l: f64, a: f64) -> CosmoParams {
        CosmoParams::new(l, a)
    }

    #[test]
    fn radiation_order_constant() {
        assert_eq!(RADIATION_ORDER, 5f64.sqrt() / 4.0);
    }

    #[test]
    fn zero_perturbation() {
        let p = params(6.0, 1.0);
        assert_eq!(linearized_residual(Jet2::new(1.0, 1.0, 1.0), Jet2::ZERO, &p), 0.0);
        for kind in ModelKind::ALL {
            let m = PerturbationModel::new(kind, 1.0, params(6.0, -7.0)).unwrap();
            assert_eq!(reduce_model(&m, 1.3, Jet2::ZERO).unwrap(), 0.0);
            assert_eq!(closed_form_solution(&m, 1.3, 0.0, 0.0).unwrap(), Jet2::ZERO);
        }
    }

    #[test]
    fn background_as_perturbation() {
        // r = a, h = 1: three terms of 12 h^2 a^2 against 6 Lambda a^2
        let m = PerturbationModel::new(ModelKind::Empty, 1.0, params(6.0, 0.0)).unwrap();
        let t = 0.4;
        let a = m.background().jet(t).unwrap();
        let got = linearized_residual(a, a, &m.params());
        let expected = (36.0 - 6.0 * 6.0) * a.value * a.value;
        assert!((got - expected).abs() < 1e-12, "{got}");
    }

    #[test]
    fn exponents_examples() {
        match empty_exponents(6.0, 3.0).unwrap() {
            Exponents::Real { plus, minus } => {
                // quadratic formula oracle
                let (a, b, c) = (6.0, 6.0f64, -(12.0 + 9.0));
                let d = (b * b - 4.0 * a * c as f64).sqrt();
                assert!((plus - (-b + d) / (2.0 * a)).abs() < 1e-14);
                assert!((minus - (-b - d) / (2.0 * a)).abs() < 1e-14);
                assert!((plus - (-0.5 + 1.936_491_673_103_708_5)).abs() < 1e-14);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(empty_exponents(0.0, 0.0).unwrap(), Exponents::Double { mu: 0.0 });
        assert_eq!(empty_exponents(6.0, -4.5).unwrap(), Exponents::Double { mu: -0.5 });
        assert!(matches!(empty_exponents(6.0, -10.0).unwrap(), Exponents::Complex { .. }));
        assert!(empty_exponents(-1.0, 0.0).is_err());
    }

    #[test]
    fn de_sitter_exponent_kills_linear_equation() {
        let m = PerturbationModel::new(ModelKind::Empty, 1.0, params(6.0, 3.0)).unwrap();
        let Exponents::Real { plus, .. } = empty_exponents(6.0, 3.0).unwrap() else { unreachable!() };
        for t in [0.0, 0.5, 2.0] {
            let r = Jet2::new((plus * t).exp(), plus * (plus * t).exp(), plus * plus * (plus * t).exp());
            let a = m.background().jet(t).unwrap();
            assert!(linearized_residual(a, r, &m.params()).abs() < 1e-10 * a.value * r.value.abs().max(1.0));
        }
    }

    #[test]
    fn empty_solutions_in_every_regime() {
        for (l, a) in [(6.0, 3.0), (6.0, -4.5), (6.0, -10.0), (0.0, 0.0), (2.0, -1.5)] {
            let m = PerturbationModel::new(ModelKind::Empty, 1.0, params(l, a)).unwrap();
            for t in [0.0, 0.7, 3.0] {
                let r = closed_form_solution(&m, t, 0.8, -1.3).unwrap();
                assert!(relative_residual(&m, t, r).unwrap() < 1e-12, "({l}, {a}) at t = {t}");
            }
        }
    }

    #[test]
    fn matter_example_zero_at_pi() {
        let m = PerturbationModel::new(ModelKind::Matter, 1.0, params(-1.0, -1.0)).unwrap();
        let r = closed_form_solution(&m, PI, 1.0, 0.0).unwrap();
        assert!(r.value.abs() < 1e-15);
    }

    #[test]
    fn sign_conditions() {
        let m = PerturbationModel::new(ModelKind::Matter, 1.0, params(1.0, 0.0)).unwrap();
        assert!(closed_form_solution(&m, 1.0, 1.0, 0.0).is_err());
        let m = PerturbationModel::new(ModelKind::Radiation, 1.0, params(-1.0, 1.0)).unwrap();
        assert!(closed_form_solution(&m, 1.0, 1.0, 0.0).is_err());
        assert!(PerturbationModel::new(ModelKind::Empty, 1.0, params(-1.0, 0.0)).is_err());
        let m = PerturbationModel::new(ModelKind::Radiation, 1.0, params(-1.0, -1.0)).unwrap();
        assert!(reduce_model(&m, 0.0, Jet2::ZERO).is_err());
    }

    #[test]
    fn background_consistency_enforced() {
        let p = params(6.0, 1.0);
        assert!(PerturbationModel::with_background(ModelKind::Radiation, Profile::power_law(2.0, 0.5), p).is_ok());
        assert!(PerturbationModel::with_background(ModelKind::Radiation, Profile::power_law(2.0, 2.0 / 3.0), p).is_err());
        assert!(PerturbationModel::with_background(ModelKind::Empty, Profile::de_sitter(1.0, 6.0), p).is_ok());
        assert!(PerturbationModel::with_background(ModelKind::Empty, Profile::exponential(1.0, 2.0), p).is_err());
        assert!(PerturbationModel::with_background(ModelKind::Matter, Profile::Zero, p).is_err());
    }

    #[test]
    fn radiation_half_argument_solves_the_equation() {
        let p = params(-2.0, 0.5);
        let ts: Vec<f64> = (0..=60).map(|i| 0.5 + 19.5 * i as f64 / 60.0).collect();
        let [half, printed] = bessel_argument_scan(&p, &ts).unwrap();
        assert!(half.max_rel_residual < 1e-10, "{half:?}");
        assert!(printed.max_rel_residual > 1e-2, "{printed:?}");
        let m = PerturbationModel::new(ModelKind::Radiation, 1.0, p).unwrap();
        for &t in &ts {
            let r = closed_form_solution(&m, t, 0.3, 1.1).unwrap();
            assert!(relative_residual(&m, t, r).unwrap() < 1e-10);
        }
    }

    #[test]
    fn radiation_wronskian_nonvanishing() {
        let m = PerturbationModel::new(ModelKind::Radiation, 1.0, params(-1.0, -0.3)).unwrap();
        for i in 0..=40 {
            let t = 0.5 + 19.5 * i as f64 / 40.0;
            let w = radiation_wronskian(&m, t).unwrap();
            let exact = radiation_wronskian_exact(t);
            assert!((w - exact).abs() < 1e-10 * exact.abs(), "t = {t}: {w} vs {exact}");
            assert!(w.abs() > 0.1);
        }
    }

    #[test]
    fn linear_integration_tracks_closed_form() {
        let m = PerturbationModel::new(ModelKind::Matter, 1.0, params(-1.0, -1.0)).unwrap();
        let r0 = closed_form_solution(&m, 0.5, 1.0, 0.5).unwrap();
        let path = integrate_linear(&m, r0.value, r0.d1, 0.5, 5.0, 4000).unwrap();
        for s in path.iter().step_by(200) {
            let exact = closed_form_solution(&m, s.t, 1.0, 0.5).unwrap();
            assert!((s.r - exact.value).abs() < 1e-9, "t = {}", s.t);
        }
    }

    #[test]
    fn split_compare_scales_with_eps() {
        let m = PerturbationModel::new(ModelKind::Empty, 1.0, params(6.0, 1.0)).unwrap();
        let sol = SplitSolution::new(m, 1.0, 0.0, 0.0).unwrap();
        let cfg = IntegratorConfig::rk4(1e-3, 0.0, 1.0);
        let dev = |eps: f64| {
            let traj = integrate(&sol.initial_state(eps).unwrap(), &m.params(), &cfg).unwrap();
            split_compare(&sol, eps, &traj).unwrap()
        };
        assert!(dev(0.0) < 1e-12);
        let (d1, d2, d3) = (dev(0.1), dev(0.05), dev(0.01));
        assert!(d1 < 0.05 && d3 < 0.005, "{d1} {d3}");
        // the antisymmetric part is odd in eps, so the normalised error is quadratic
        assert!((d1 / d2 - 4.0).abs() < 0.3, "{d1} {d2}");
    }

    #[test]
    fn split_only_for_empty_and_grids_must_match() {
        let m = PerturbationModel::new(ModelKind::Matter, 1.0, params(-1.0, -1.0)).unwrap();
        assert!(SplitSolution::new(m, 1.0, 0.0, 1.0).is_err());
        let m = PerturbationModel::new(ModelKind::Empty, 1.0, params(6.0, 1.0)).unwrap();
        let sol = SplitSolution::new(m, 1.0, 0.0, 0.0).unwrap();
        let cfg = IntegratorConfig::rk4(1e-2, 0.2, 0.5);
        let traj = integrate(&sol.initial_state(0.1).unwrap(), &m.params(), &cfg).unwrap();
        assert!(split_compare(&sol, 0.1, &traj).is_err());
    }

    proptest! {
        #[test]
        fn reduction_consistency(
            kind_ix in 0usize..3, l in 0.0f64..10.0, al in -5.0f64..5.0, a0 in 0.2f64..3.0,
            t in 0.1f64..5.0, r in -2.0f64..2.0, rd in -2.0f64..2.0, rdd in -2.0f64..2.0,
        ) {
            let kind = ModelKind::ALL[kind_ix];
            let m = PerturbationModel::new(kind, a0, params(l, al)).unwrap();
            let rj = Jet2::new(r, rd, rdd);
            let full = linearized_residual(m.background().jet(t).unwrap(), rj, &m.params());
            let reduced = m.prefactor(t).unwrap() * reduce_model(&m, t, rj).unwrap();
            let scale = m.prefactor(t).unwrap() * reduced_terms(&m, t, rj).unwrap().iter().fold(0.0f64, |x, y| x.max(y.abs()));
            prop_assert!((full - reduced).abs() <= 1e-10 * scale.max(1e-300));
        }

        #[test]
        fn characteristic_roots(l in 0.0f64..20.0, al in -5.0f64..20.0, t in 0.0f64..3.0) {
            prop_assume!(6.0 * l + 8.0 * al >= 0.0);
            let m = PerturbationModel::new(ModelKind::Empty, 1.0, params(l, al)).unwrap();
            for mu in empty_exponents(l, al).unwrap().roots() {
                let mu = mu.re;
                let e = (mu * t).exp();
                let r = Jet2::new(e, mu * e, mu * mu * e);
                let terms = reduced_terms(&m, t, r).unwrap();
                let res: f64 = terms.iter().sum();
                prop_assert!(res.abs() < 1e-10 * e.max(terms.iter().fold(0.0, |x: f64, y| x.max(y.abs()))));
            }
        }

        #[test]
        fn matter_closed_form(l in -10.0f64..5.0, al in -10.0f64..5.0, t in 0.5f64..20.0, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
            prop_assume!(l + al < -1e-3);
            let m = PerturbationModel::new(ModelKind::Matter, 1.0, params(l, al)).unwrap();
            let r = closed_form_solution(&m, t, c1, c2).unwrap();
            prop_assert!(relative_residual(&m, t, r).unwrap() < 1e-9);
        }
    }
}
