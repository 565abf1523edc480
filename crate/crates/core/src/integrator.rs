//! Time integration of the bimetric system `(a1, v1, a2, v2)`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eom::{accelerations_with, constraint_residual, w_potential, PhaseState, COLLAPSE_EPS};
use crate::error::{Error, Result};
use crate::params::CosmoParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for `rk4`, initial step for `rk45`.
    pub step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t0: f64,
    pub t1: f64,
    /// Keep every `output_stride`-th step (the last step is always kept).
    pub output_stride: usize,
    pub collapse_eps: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            step: 1e-3,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            t0: 0.0,
            t1: 1.0,
            output_stride: 1,
            collapse_eps: COLLAPSE_EPS,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64, t0: f64, t1: f64) -> Self {
        Self { method: Method::Rk4, step, t0, t1, ..Self::default() }
    }

    pub fn rk45(rel_tol: f64, t0: f64, t1: f64) -> Self {
        Self { method: Method::Rk45, rel_tol, abs_tol: rel_tol * 1e-2, t0, t1, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return bad(format!("tolerances must be positive, got {} and {}", self.rel_tol, self.abs_tol));
        }
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return bad(format!("need t1 > t0, got [{}, {}]", self.t0, self.t1));
        }
        if self.output_stride == 0 {
            return bad("output_stride must be at least 1".into());
        }
        if !(self.collapse_eps >= 0.0) {
            return bad(format!("collapse_eps must be non-negative, got {}", self.collapse_eps));
        }
        Ok(())
    }
}

/// A first-order system `y' = f(t, y)`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> Result<[f64; N]>;
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// One classical Runge-Kutta step.
pub fn rk4_step<const N: usize, S: OdeSystem<N>>(sys: &S, t: f64, y: &[f64; N], h: f64) -> Result<[f64; N]> {
    let k1 = sys.rhs(t, y)?;
    let k2 = sys.rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
    let k3 = sys.rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
    let k4 = sys.rhs(t + h, &axpy(y, h, &k3))?;
    Ok(std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
}

// Dormand-Prince 5(4) tableau
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// One Dormand-Prince step: fifth-order solution and the embedded error.
pub fn dopri5_step<const N: usize, S: OdeSystem<N>>(sys: &S, t: f64, y: &[f64; N], h: f64) -> Result<([f64; N], [f64; N])> {
    let mut k = [[0.0; N]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = DP_A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = sys.rhs(t + DP_C[s] * h, &ys)?;
    }
    let next = std::array::from_fn(|i| y[i] + h * (0..7).map(|s| DP_B[s] * k[s][i]).sum::<f64>());
    let err = std::array::from_fn(|i| h * (0..7).map(|s| DP_E[s] * k[s][i]).sum::<f64>());
    Ok((next, err))
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Collapse { t: f64, value: f64 },
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub a1: f64,
    pub v1: f64,
    pub a2: f64,
    pub v2: f64,
    pub constraint: f64,
}

impl Sample {
    pub fn state(&self) -> PhaseState {
        PhaseState::new(self.t, self.a1, self.v1, self.a2, self.v2)
    }

    fn from_state(s: &PhaseState, params: &CosmoParams) -> Self {
        Self { t: s.t, a1: s.a1, v1: s.v1, a2: s.a2, v2: s.v2, constraint: constraint_residual(s, params) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub config: IntegratorConfig,
    pub params: CosmoParams,
}

pub const CSV_HEADER: [&str; 6] = ["t", "a1", "v1", "a2", "v2", "constraint"];

impl Trajectory {
    /// Wrap externally produced samples (for example analytic ones).
    pub fn from_samples(samples: Vec<Sample>, params: CosmoParams) -> Self {
        let config = match (samples.first(), samples.last()) {
            (Some(a), Some(b)) if b.t > a.t => IntegratorConfig { t0: a.t, t1: b.t, ..IntegratorConfig::default() },
            _ => IntegratorConfig::default(),
        };
        Self { samples, termination: Termination::Completed, config, params }
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn max_abs_constraint(&self) -> f64 {
        self.samples.iter().map(|s| s.constraint.abs()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(CSV_HEADER)?;
        for s in &self.samples {
            out.write_record([s.t, s.a1, s.v1, s.a2, s.v2, s.constraint].map(|x| format!("{x:.16e}")))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Samples from CSV; configuration and parameters are not stored there.
    pub fn read_csv<R: Read>(r: R, params: CosmoParams) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header != CSV_HEADER {
            return Err(Error::Trajectory(format!("unexpected CSV header {header:?}")));
        }
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let v: Vec<f64> = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::Trajectory(format!("bad number {f:?}: {e}"))))
                .collect::<Result<_>>()?;
            samples.push(Sample { t: v[0], a1: v[1], v1: v[2], a2: v[3], v2: v[4], constraint: v[5] });
        }
        Ok(Self::from_samples(samples, params))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// State at `t = 0` whose `v1` satisfies the lapse constraint
/// `6 a1 v1^2 = Lambda (a1^3 + a2^3) + alpha W - 6 a2 v2^2`.
pub fn solve_constraint_ic(a1: f64, a2: f64, v2: f64, branch: Branch, params: &CosmoParams) -> Result<PhaseState> {
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::Domain(format!("scale factors must be positive, got {a1} and {a2}")));
    }
    let rhs = params.lambda_eff * (a1.powi(3) + a2.powi(3)) + params.alpha * w_potential(a1, a2) - 6.0 * a2 * v2 * v2;
    if rhs < 0.0 {
        return Err(Error::NoRealRoot { rhs });
    }
    Ok(PhaseState::new(0.0, a1, branch.sign() * (rhs / (6.0 * a1)).sqrt(), a2, v2))
}

/// The bimetric flow as a first-order system.
pub struct BimetricSystem {
    pub params: CosmoParams,
    pub collapse_eps: f64,
}

impl OdeSystem<4> for BimetricSystem {
    fn rhs(&self, t: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let s = PhaseState::new(t, y[0], y[1], y[2], y[3]);
        let (c1, c2) = accelerations_with(&s, &self.params, self.collapse_eps)?;
        Ok([y[1], c1, y[3], c2])
    }
}

fn pack(s: &PhaseState) -> [f64; 4] {
    [s.a1, s.v1, s.a2, s.v2]
}

fn unpack(t: f64, y: &[f64; 4]) -> PhaseState {
    PhaseState::new(t, y[0], y[1], y[2], y[3])
}

/// Integrate from `ic` (its `t` is replaced by `cfg.t0`) to `cfg.t1`.
///
/// Collapse and non-finite states end the run early with a flag; the
/// constraint is recorded but never enforced.
pub fn integrate(ic: &PhaseState, params: &CosmoParams, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let sys = BimetricSystem { params: *params, collapse_eps: cfg.collapse_eps };
    let start = PhaseState { t: cfg.t0, ..*ic };
    for a in [start.a1, start.a2] {
        if !(a > cfg.collapse_eps) {
            return Err(Error::Domain(format!("initial scale factor {a} is not above the collapse threshold")));
        }
    }
    let mut samples = vec![Sample::from_state(&start, params)];
    let mut termination = Termination::Completed;
    let mut y = pack(&start);
    let mut t = cfg.t0;
    let mut steps = 0usize;

    let record = |t: f64, y: &[f64; 4], force: bool, steps: usize, samples: &mut Vec<Sample>| {
        if force || steps % cfg.output_stride == 0 {
            samples.push(Sample::from_state(&unpack(t, y), params));
        }
    };

    match cfg.method {
        Method::Rk4 => {
            let span = cfg.t1 - cfg.t0;
            let n = ((span / cfg.step) - 1e-9).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for i in 1..=n {
                match rk4_step(&sys, t, &y, h) {
                    Ok(next) => {
                        let tn = cfg.t0 + i as f64 * h;
                        if let Some(stop) = check_state(tn, &next, cfg) {
                            termination = stop;
                            break;
                        }
                        y = next;
                        t = tn;
                        steps += 1;
                        record(t, &y, i == n, steps, &mut samples);
                    }
                    Err(Error::Collapse { value, .. }) => {
                        termination = Termination::Collapse { t, value };
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Method::Rk45 => {
            let mut h = cfg.step.min(cfg.t1 - cfg.t0);
            while t < cfg.t1 {
                let last = t + h >= cfg.t1;
                if last {
                    h = cfg.t1 - t;
                }
                let (next, err) = match dopri5_step(&sys, t, &y, h) {
                    Ok(r) => r,
                    Err(Error::Collapse { value, .. }) => {
                        termination = Termination::Collapse { t, value };
                        break;
                    }
                    Err(e) => return Err(e),
                };
                let norm = (0..4)
                    .map(|i| {
                        let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(next[i].abs());
                        (err[i] / sc).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
                    / 2.0;
                if !norm.is_finite() {
                    termination = Termination::NonFinite { t };
                    break;
                }
                if norm <= 1.0 {
                    let tn = if last { cfg.t1 } else { t + h };
                    if let Some(stop) = check_state(tn, &next, cfg) {
                        termination = stop;
                        break;
                    }
                    y = next;
                    t = tn;
                    steps += 1;
                    record(t, &y, last, steps, &mut samples);
                    if last {
                        break;
                    }
                }
                let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                h *= if norm <= 1.0 { factor } else { factor.min(1.0) };
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t, step: h });
                }
            }
        }
    }
    Ok(Trajectory { samples, termination, config: *cfg, params: *params })
}

fn check_state(t: f64, y: &[f64; 4], cfg: &IntegratorConfig) -> Option<Termination> {
    if y.iter().any(|x| !x.is_finite()) {
        return Some(Termination::NonFinite { t });
    }
    for a in [y[0], y[2]] {
        if a < cfg.collapse_eps {
            return Some(Termination::Collapse { t, value: a });
        }
    }
    None
}

/// Same point in phase space moving backwards in time.
pub fn time_reversed(s: &PhaseState) -> PhaseState {
    PhaseState { v1: -s.v1, v2: -s.v2, ..*s }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    /// `None` when the measurement is inconclusive.
    pub order: Option<f64>,
    /// Final-state differences between consecutive step sizes.
    pub differences: Vec<f64>,
}

/// Observed global order from at least three step sizes in geometric
/// progression, using the final state:
/// `p = ln(|y1 - y2| / |y2 - y3|) / ln q`.
pub fn convergence_order(ic: &PhaseState, params: &CosmoParams, cfg: &IntegratorConfig, steps: &[f64]) -> Result<OrderEstimate> {
    if steps.len() < 3 {
        return Err(Error::InvalidConfig(format!("need at least 3 step sizes, got {}", steps.len())));
    }
    let q = steps[0] / steps[1];
    for w in steps.windows(2) {
        if !(w[1] > 0.0) || ((w[0] / w[1]) - q).abs() > 1e-9 * q || q <= 1.0 {
            return Err(Error::InvalidConfig("step sizes must decrease in geometric progression".into()));
        }
    }
    let finals: Vec<[f64; 4]> = steps
        .iter()
        .map(|&h| {
            let traj = integrate(ic, params, &IntegratorConfig { method: Method::Rk4, step: h, ..*cfg })?;
            if traj.termination != Termination::Completed {
                return Err(Error::Trajectory(format!("run with step {h} stopped early: {:?}", traj.termination)));
            }
            Ok(pack(&traj.last().expect("at least the initial sample").state()))
        })
        .collect::<Result<_>>()?;
    let differences: Vec<f64> = finals
        .windows(2)
        .map(|w| (0..4).map(|i| (w[0][i] - w[1][i]).abs()).fold(0.0, f64::max))
        .collect();

    let floor = steps.iter().cloned().fold(f64::INFINITY, f64::min) < 1e-7;
    let monotone = differences.windows(2).all(|w| w[1] < w[0]) && differences.iter().all(|d| *d > 0.0);
    let order = if floor || !monotone {
        None
    } else {
        let k = differences.len();
        Some((differences[k - 2] / differences[k - 1]).ln() / q.ln())
    };
    Ok(OrderEstimate { order, differences })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eom::constraint_consistency;

    struct Growth;

    impl OdeSystem<1> for Growth {
        fn rhs(&self, _t: f64, y: &[f64; 1]) -> Result<[f64; 1]> {
            Ok(*y)
        }
    }

    fn de_sitter_ic(lambda: f64, alpha: f64) -> (PhaseState, CosmoParams) {
        let p = CosmoParams::new(lambda, alpha);
        (solve_constraint_ic(1.0, 1.0, (lambda / 6.0).sqrt(), Branch::Plus, &p).unwrap(), p)
    }

    #[test]
    fn rk4_on_linear_growth_has_order_four() {
        let run = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = [1.0];
            for i in 0..n {
                y = rk4_step(&Growth, i as f64 * h, &y, h).unwrap();
            }
            (y[0] - 1f64.exp()).abs()
        };
        let order = (run(20) / run(40)).log2();
        assert!((order - 4.0).abs() < 0.1, "{order}");
    }

    #[test]
    fn dopri5_error_estimate_is_fifth_order_small() {
        let (y, e) = dopri5_step(&Growth, 0.0, &[1.0], 0.1).unwrap();
        assert!((y[0] - 0.1f64.exp()).abs() < 1e-9);
        assert!(e[0].abs() < 1e-7);
    }

    #[test]
    fn constraint_ic_examples() {
        let (s, _) = de_sitter_ic(6.0, 2.5);
        assert!((s.v1 - 1.0).abs() < 1e-15);
        let s = solve_constraint_ic(1.0, 1.0, 0.0, Branch::Plus, &CosmoParams::new(0.0, 0.0)).unwrap();
        assert_eq!(s.v1, 0.0);
        let s = solve_constraint_ic(2.0, 1.0, 0.0, Branch::Minus, &CosmoParams::new(1.0, 1.0)).unwrap();
        assert!((s.v1 + ((9.0 + 7.0 / 3.0) / 12.0f64).sqrt()).abs() < 1e-15);
        match solve_constraint_ic(1.0, 1.0, 1.0, Branch::Plus, &CosmoParams::new(0.0, 0.0)) {
            Err(Error::NoRealRoot { rhs }) => assert_eq!(rhs, -6.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn de_sitter_evolution() {
        let (ic, p) = de_sitter_ic(6.0, 1.7);
        let traj = integrate(&ic, &p, &IntegratorConfig::rk4(1e-3, 0.0, 1.0)).unwrap();
        assert_eq!(traj.termination, Termination::Completed);
        let last = traj.last().unwrap();
        assert_eq!(last.t, 1.0);
        let e = 1f64.exp();
        assert!((last.a1 - e).abs() < 1e-8 * e && (last.a2 - e).abs() < 1e-8 * e);
        assert!(constraint_consistency(&traj, &p) < 1e-9);
        assert_eq!(traj.samples.len(), 1001);
    }

    #[test]
    fn constraint_drift_scales_as_h4() {
        // the symmetric de Sitter line is preserved exactly, so perturb it
        let p = CosmoParams::new(6.0, 1.0);
        let ic = solve_constraint_ic(1.1, 0.9, 0.9, Branch::Plus, &p).unwrap();
        let drift = |h| constraint_consistency(&integrate(&ic, &p, &IntegratorConfig::rk4(h, 0.0, 1.0)).unwrap(), &p);
        let ratio = drift(0.02) / drift(0.01);
        assert!((ratio.log2() - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn equilibrium_stays_put() {
        let ic = PhaseState::new(0.0, 1.0, 0.0, 1.0, 0.0);
        let p = CosmoParams::new(0.0, 0.0);
        let traj = integrate(&ic, &p, &IntegratorConfig::rk4(0.1, 0.0, 2.0)).unwrap();
        assert!(traj.samples.iter().all(|s| s.a1 == 1.0 && s.a2 == 1.0 && s.v1 == 0.0));
    }

    #[test]
    fn rk45_agrees_with_fine_rk4() {
        let p = CosmoParams::new(6.0, 1.0);
        let ic = solve_constraint_ic(1.1, 0.9, 0.8, Branch::Plus, &p).unwrap();
        let a = integrate(&ic, &p, &IntegratorConfig::rk45(1e-10, 0.0, 1.0)).unwrap();
        let b = integrate(&ic, &p, &IntegratorConfig::rk4(1e-4, 0.0, 1.0)).unwrap();
        let (x, y) = (a.last().unwrap(), b.last().unwrap());
        assert_eq!(x.t, 1.0);
        for (u, v) in [(x.a1, y.a1), (x.v1, y.v1), (x.a2, y.a2), (x.v2, y.v2)] {
            assert!((u - v).abs() < 1e-8 * v.abs().max(1.0), "{u} vs {v}");
        }
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let p = CosmoParams::new(3.0, 1.0);
        let ic = solve_constraint_ic(1.2, 0.8, 0.5, Branch::Plus, &p).unwrap();
        let cfg = IntegratorConfig::rk4(1e-3, 0.0, 1.0);
        let fwd = integrate(&ic, &p, &cfg).unwrap();
        let back = integrate(&time_reversed(&fwd.last().unwrap().state()), &p, &cfg).unwrap();
        let end = time_reversed(&back.last().unwrap().state());
        let coarse = integrate(&ic, &p, &IntegratorConfig::rk4(2e-3, 0.0, 1.0)).unwrap();
        // one-way error estimate from step doubling
        let one_way = (coarse.last().unwrap().a1 - fwd.last().unwrap().a1).abs() / 15.0;
        for (u, v) in [(end.a1, ic.a1), (end.v1, ic.v1), (end.a2, ic.a2), (end.v2, ic.v2)] {
            assert!((u - v).abs() < 10.0 * one_way.max(1e-14), "{u} vs {v}, one-way {one_way}");
        }
    }

    #[test]
    fn collapse_is_flagged() {
        // contracting empty universe without cosmological constant hits a = 0
        let p = CosmoParams::new(0.0, 0.0);
        let ic = PhaseState::new(0.0, 1.0, -1.0, 1.0, -1.0);
        let traj = integrate(&ic, &p, &IntegratorConfig::rk4(1e-3, 0.0, 5.0)).unwrap();
        assert!(matches!(traj.termination, Termination::Collapse { .. } | Termination::NonFinite { .. }), "{:?}", traj.termination);
    }

    #[test]
    fn output_stride_and_determinism() {
        let (ic, p) = de_sitter_ic(6.0, 1.0);
        let cfg = IntegratorConfig { output_stride: 7, ..IntegratorConfig::rk4(1e-2, 0.0, 1.0) };
        let a = integrate(&ic, &p, &cfg).unwrap();
        let b = integrate(&ic, &p, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples.len(), 1 + 100 / 7 + 1);
        assert_eq!(a.last().unwrap().t, 1.0);
    }

    #[test]
    fn csv_round_trip() {
        let (ic, p) = de_sitter_ic(6.0, 1.0);
        let traj = integrate(&ic, &p, &IntegratorConfig::rk4(0.1, 0.0, 1.0)).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,a1,v1,a2,v2,constraint\n"));
        let back = Trajectory::read_csv(buf.as_slice(), p).unwrap();
        assert_eq!(back.samples, traj.samples);
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig { step: 0.0, ..Default::default() }.validate().is_err());
        assert!(IntegratorConfig { t0: 1.0, t1: 1.0, ..Default::default() }.validate().is_err());
        assert!(IntegratorConfig { rel_tol: -1.0, ..Default::default() }.validate().is_err());
        assert!(IntegratorConfig::default().validate().is_ok());
    }

    #[test]
    fn order_on_de_sitter() {
        let (ic, p) = de_sitter_ic(6.0, 1.0);
        let est = convergence_order(&ic, &p, &IntegratorConfig::default(), &[1e-2, 5e-3, 2.5e-3]).unwrap();
        let order = est.order.expect("conclusive");
        assert!((order - 4.0).abs() < 0.2, "{order}");
        let tiny = convergence_order(&ic, &p, &IntegratorConfig { t1: 1e-6, ..Default::default() }, &[1e-7, 5e-8, 2.5e-8]).unwrap();
        assert!(tiny.order.is_none());
    }
}
