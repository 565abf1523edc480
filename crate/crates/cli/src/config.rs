//! Scenario files: strict JSON, every unknown key is an error.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use spectral_flrw::integrator::{Branch, IntegratorConfig};
use spectral_flrw::perturbation::{BesselArg, ModelKind};
use spectral_flrw::symbol::DEFAULT_NODES;
use spectral_flrw::verify::Suite;
use spectral_flrw::{validate_params, CosmoParams, ParamSpec, PhiField, Profile, SheetGeometry};

use crate::CliError;

/// Start time used for power-law backgrounds when `t0` is not positive.
pub const POWER_LAW_T0: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Verify,
    Evolve,
    Perturb,
    Sweep,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Verify, Mode::Evolve, Mode::Perturb, Mode::Sweep];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Verify => "verify",
            Mode::Evolve => "evolve",
            Mode::Perturb => "perturb",
            Mode::Sweep => "sweep",
        }
    }
}

/// `a1`, `a2`, `v2` at `t0`; `v1` is solved from the constraint on `branch`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConditions {
    pub a1: f64,
    pub a2: f64,
    pub v2: f64,
    #[serde(default = "plus")]
    pub branch: Branch,
}

fn plus() -> Branch {
    Branch::Plus
}

fn one() -> f64 {
    1.0
}

fn half() -> BesselArg {
    BesselArg::Half
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default = "one")]
    pub a0: f64,
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default = "half")]
    pub bessel_argument: BesselArg,
}

/// Sheet data for the symbol engine, evaluated at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub a1: Profile,
    pub a2: Profile,
    #[serde(default)]
    pub phi: PhiField,
    #[serde(default)]
    pub h1: Profile,
    #[serde(default)]
    pub h2: Profile,
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub allow_torsion: bool,
}

impl GeometrySpec {
    pub fn geometry(&self) -> SheetGeometry {
        SheetGeometry::new(self.a1, self.a2, self.phi).with_torsion(self.h1, self.h2)
    }
}

/// Grid over `(Lambda, alpha, eps)`. Each point evolves the empty-model
/// split `a +- eps r` and compares with the linear solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub lambda_eff: Vec<f64>,
    pub alpha: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
}

fn default_eps() -> Vec<f64> {
    vec![0.1]
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn is_default_suite(s: &Suite) -> bool {
    *s == Suite::All
}

fn default_suite() -> Suite {
    Suite::All
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub params: ParamSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_conditions: Option<InitialConditions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_suite", skip_serializing_if = "is_default_suite")]
    pub suite: Suite,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl Default for Scenario {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

/// Parse a scenario; errors carry the JSON path of the offending value.
pub fn parse_config(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Config(inner.to_string())
        } else {
            CliError::Config(format!("{path}: {inner}"))
        }
    })
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub nodes: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Scenario {
    pub fn apply(&mut self, mode: Mode, o: &Overrides) {
        self.mode = Some(mode);
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(n) = o.nodes {
            self.nodes = n;
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        if o.workers.is_some() {
            self.workers = o.workers;
        }
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        self.mode.ok_or_else(|| CliError::Config("mode: missing".into()))
    }

    pub fn params(&self) -> Result<CosmoParams, CliError> {
        validate_params(&self.params).map_err(|e| CliError::Config(format!("params: {e}")))
    }

    /// Integrator settings with the power-law start time filled in.
    pub fn integrator_for(&self, kind: Option<ModelKind>) -> IntegratorConfig {
        let mut cfg = self.integrator;
        if matches!(kind, Some(ModelKind::Radiation | ModelKind::Matter)) && cfg.t0 <= 0.0 {
            cfg.t0 = POWER_LAW_T0;
            if cfg.t1 <= cfg.t0 {
                cfg.t1 = cfg.t0 + 1.0;
            }
        }
        cfg
    }

    /// Mode-specific required fields and value checks.
    pub fn validate(&self) -> Result<(), CliError> {
        let mode = self.mode()?;
        let missing = |key: &str| Err(CliError::Config(format!("{key}: required for mode {}", mode.name())));
        if self.nodes < 4 {
            return Err(CliError::Config(format!("nodes: need at least 4, got {}", self.nodes)));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers: must be at least 1".into()));
        }
        match mode {
            Mode::Verify => {}
            Mode::Evolve => {
                self.params()?;
                if self.initial_conditions.is_none() {
                    return missing("initial_conditions");
                }
            }
            Mode::Perturb => {
                self.params()?;
                if self.model.is_none() {
                    return missing("model");
                }
            }
            Mode::Sweep => {
                let Some(sw) = &self.sweep else { return missing("sweep") };
                if sw.lambda_eff.is_empty() || sw.alpha.is_empty() || sw.eps.is_empty() {
                    return Err(CliError::Config("sweep: every grid needs at least one value".into()));
                }
                if sw.lambda_eff.iter().chain(&sw.alpha).chain(&sw.eps).any(|x| !x.is_finite()) {
                    return Err(CliError::Config("sweep: grid values must be finite".into()));
                }
            }
        }
        let kind = self.model.map(|m| m.kind);
        if mode != Mode::Verify {
            self.integrator_for(kind).validate().map_err(|e| CliError::Config(format!("integrator: {e}")))?;
        }
        Ok(())
    }
}

/// One point of a sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub lambda_eff: f64,
    pub alpha: f64,
    pub eps: f64,
    pub scenario: Scenario,
}

/// Cartesian product `Lambda x alpha x eps`, `Lambda` slowest.
pub fn expand_sweep(s: &Scenario) -> Vec<SweepPoint> {
    let Some(sw) = &s.sweep else { return Vec::new() };
    let mut out = Vec::new();
    for &l in &sw.lambda_eff {
        for &a in &sw.alpha {
            for &eps in &sw.eps {
                let index = out.len();
                let mut sub = s.clone();
                sub.sweep = None;
                sub.params = ParamSpec::effective(l, a);
                sub.output_dir = s.output_dir.join(format!("point_{index:04}"));
                out.push(SweepPoint { index, lambda_eff: l, alpha: a, eps, scenario: sub });
            }
        }
    }
    out
}

/// Every key a scenario file may contain, for `--help`.
pub const CONFIG_KEYS: &str = "\
Config keys (JSON):
  mode                  verify | evolve | perturb | sweep (the command-line mode wins)
  params                lambda_eff, alpha, or raw_lambda + raw_c + phi_modulus
                        (Lambda = 6 (raw_lambda^2 / raw_c - phi_modulus^2), alpha = 6 phi_modulus^2)
  geometry              verify only, extra symbol-engine evaluation:
                        a1, a2, h1, h2 (profiles: {kind: zero | constant | exponential | power_law,
                        c0, h, p}), phi {modulus: profile, phase}, t, allow_torsion
  initial_conditions    evolve: a1, a2, v2, branch (\"+\" | \"-\"); v1 is solved from the constraint
  model                 perturb: kind (empty | radiation | matter), a0 (1), c1 (1), c2 (0),
                        bessel_argument (half | printed)
  integrator            method (rk4 | rk45), step (1e-3), rel_tol (1e-10), abs_tol (1e-12),
                        t0 (0), t1 (1), output_stride (1), collapse_eps (1e-8);
                        t0 <= 0 becomes 0.1 for radiation and matter backgrounds
  sweep                 lambda_eff [..], alpha [..], eps [..] (default [0.1]);
                        each point evolves the empty-model split a +- eps r
  output_dir            output directory (out)
  seed                  seed for randomised checks (0)
  nodes                 cosphere node parameter (32, at least 4)
  suite                 verify: symbols | action | eom | perturbation | all (all)
  workers               sweep worker threads (logical CPUs)

Command-line flags override seed, nodes, output_dir and workers.

Exit status: 0 success, 1 run error, 2 configuration error. Paper
discrepancies in a verification report do not change the status.";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_evolve_gets_defaults() {
        let s = parse_config(
            r#"{"mode": "evolve", "params": {"lambda_eff": 6, "alpha": 1},
                "initial_conditions": {"a1": 1, "a2": 1, "v2": 1}}"#,
        )
        .unwrap();
        assert_eq!(s.integrator, IntegratorConfig::default());
        assert_eq!(s.initial_conditions.unwrap().branch, Branch::Plus);
        assert_eq!(s.nodes, DEFAULT_NODES);
        assert_eq!(s.output_dir, PathBuf::from("out"));
        s.validate().unwrap();
    }

    #[test]
    fn misspelt_key_is_named_with_its_path() {
        let e = parse_config(r#"{"mode": "evolve", "params": {"lamda": 6}}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("lamda") && msg.contains("params"), "{msg}");
        let e = parse_config(r#"{"integrator": {"step": "small"}}"#).unwrap_err();
        assert!(e.to_string().contains("integrator.step"), "{e}");
    }

    #[test]
    fn required_fields_per_mode() {
        let s = parse_config(r#"{"mode": "evolve", "params": {"lambda_eff": 6, "alpha": 1}}"#).unwrap();
        assert!(s.validate().unwrap_err().to_string().contains("initial_conditions"));
        let s = parse_config(r#"{"mode": "perturb", "params": {"lambda_eff": 6, "alpha": 1}}"#).unwrap();
        assert!(s.validate().unwrap_err().to_string().contains("model"));
        let s = parse_config(r#"{"mode": "sweep"}"#).unwrap();
        assert!(s.validate().unwrap_err().to_string().contains("sweep"));
        let s = parse_config(r#"{"mode": "verify"}"#).unwrap();
        s.validate().unwrap();
    }

    #[test]
    fn sweep_grid_is_cartesian() {
        let s = parse_config(r#"{"mode": "sweep", "sweep": {"lambda_eff": [0, 3, 6], "alpha": [0, 1]}}"#).unwrap();
        let pts = expand_sweep(&s);
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[1].lambda_eff, pts[1].alpha), (0.0, 1.0));
        assert_eq!((pts[5].lambda_eff, pts[5].alpha, pts[5].eps), (6.0, 1.0, 0.1));
        assert!(pts.iter().all(|p| p.scenario.sweep.is_none()));
    }

    #[test]
    fn power_law_start_time() {
        let s = parse_config(r#"{"mode": "perturb", "params": {"lambda_eff": -1, "alpha": -1}, "model": {"kind": "matter"}}"#).unwrap();
        assert_eq!(s.integrator_for(Some(ModelKind::Matter)).t0, POWER_LAW_T0);
        assert_eq!(s.integrator_for(Some(ModelKind::Empty)).t0, 0.0);
    }

    #[test]
    fn round_trip() {
        let text = r#"{"mode": "perturb", "params": {"raw_lambda": 1, "raw_c": 1, "phi_modulus": 0.5},
            "model": {"kind": "radiation", "a0": 2, "bessel_argument": "printed"},
            "geometry": {"a1": {"kind": "exponential", "c0": 1, "h": 1}, "a2": {"kind": "zero"}, "phi": {"modulus": {"kind": "constant", "c0": 1}, "phase": 0.5}},
            "integrator": {"method": "rk45", "t1": 3}, "sweep": {"lambda_eff": [1], "alpha": [2]},
            "seed": 9, "workers": 2, "suite": "eom"}"#;
        let s = parse_config(text).unwrap();
        let again = parse_config(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, again);
        assert_eq!(Scenario::default(), parse_config(&serde_json::to_string(&Scenario::default()).unwrap()).unwrap());
    }

    #[test]
    fn help_lists_every_key() {
        let s = parse_config(
            r#"{"mode": "sweep", "params": {"lambda_eff": 1, "alpha": 1, "raw_lambda": 1, "raw_c": 1, "phi_modulus": 1},
            "geometry": {"a1": {"kind": "zero"}, "a2": {"kind": "zero"}, "phi": {"modulus": {"kind": "zero"}}},
            "initial_conditions": {"a1": 1, "a2": 1, "v2": 0}, "model": {"kind": "empty"},
            "sweep": {"lambda_eff": [1], "alpha": [1]}, "workers": 1, "suite": "eom"}"#,
        )
        .unwrap();
        fn keys(v: &serde_json::Value, out: &mut Vec<String>) {
            if let serde_json::Value::Object(m) = v {
                for (k, x) in m {
                    out.push(k.clone());
                    keys(x, out);
                }
            }
        }
        let mut all = Vec::new();
        keys(&serde_json::to_value(&s).unwrap(), &mut all);
        for k in all {
            assert!(CONFIG_KEYS.contains(&k), "{k} missing from help");
        }
        for m in Mode::ALL {
            assert!(CONFIG_KEYS.contains(m.name()));
        }
    }
}
