//! Cross-checks of the engine against closed forms and against the printed
//! formulas, gathered into one report.
//!
//! Engine checks fail when they miss their tolerance. Audit checks compare a
//! printed formula with what the engine derives; a miss there is reported as
//! a paper discrepancy instead.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::action::{
    lagrangian_density, potential_identity_check, potential_unchecked, potential_v, total_action, BimetricState, Lapse,
    Signature,
};
use crate::eom::{
    constraint_consistency, constraint_residual, constraint_with_common_prefactor, el_consistency, lapse_variation, p1,
    p2, PhaseState,
};
use crate::error::{Error, Result};
use crate::integrator::{convergence_order, integrate, solve_constraint_ic, Branch, IntegratorConfig, Sample, Trajectory};
use crate::params::CosmoParams;
use crate::perturbation::{
    bessel_argument_scan, bessel_j, closed_form_solution, empty_exponents, linearized_terms, radiation_wronskian,
    radiation_wronskian_exact, reduce_model, reduced_terms, relative_residual, split_compare, BesselArg, Exponents,
    ModelKind, PerturbationModel, SplitSolution,
};
use crate::profile::{Jet2, PhiField, Profile, SheetGeometry};
use crate::symbol::parametrix::{composition_defect, parametrix, Calculus};
use crate::symbol::printed::{
    printed_b2c, printed_b2n_trace, recursion_b2_sheet_traces, recursion_b2n_trace, B0Convention, SheetCoeffs,
};
use crate::symbol::quadrature::CosphereRule;
use crate::symbol::symbols::{build_symbols, Covector};
use crate::symbol::wres::{
    b2_with_rule, kinetic_closed_form, mass_closed_form, potential_closed_form, volume_closed_form, volume_with_rule,
    B2Terms,
};
use crate::symbol::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    PaperDiscrepancy,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::PaperDiscrepancy => "paper-discrepancy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Symbols,
    Action,
    Eom,
    Perturbation,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["symbols", "action", "eom", "perturbation", "all"];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Symbols => "symbols",
            Suite::Action => "action",
            Suite::Eom => "eom",
            Suite::Perturbation => "perturbation",
            Suite::All => "all",
        }
    }

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symbols" => Ok(Suite::Symbols),
            "action" => Ok(Suite::Action),
            "eom" => Ok(Suite::Eom),
            "perturbation" => Ok(Suite::Perturbation),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidConfig(format!("unknown suite {s:?}; expected one of {:?}", Suite::NAMES))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub check_id: String,
    /// Which printed result the check concerns.
    pub location: String,
    pub computed: f64,
    pub oracle: f64,
    pub rel_dev: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub seed: u64,
    pub node_budget: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub entries: Vec<Entry>,
}

impl VerificationReport {
    pub fn count(&self, v: Verdict) -> usize {
        self.entries.iter().filter(|e| e.verdict == v).count()
    }

    pub fn entry(&self, id: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.check_id == id)
    }

    /// Every verdict agrees with its deviation and tolerance.
    pub fn is_consistent(&self) -> bool {
        self.entries.iter().all(|e| {
            let within = e.rel_dev <= e.tolerance;
            match e.verdict {
                Verdict::Pass => within,
                Verdict::PaperDiscrepancy => !within && !e.note.is_empty(),
                Verdict::Fail => !within,
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "suite: {}  seed: {}  nodes: {}", self.suite.name(), self.seed, self.node_budget);
        let _ = writeln!(
            s,
            "pass: {}  fail: {}  paper-discrepancy: {}",
            self.count(Verdict::Pass),
            self.count(Verdict::Fail),
            self.count(Verdict::PaperDiscrepancy)
        );
        let width = self.entries.iter().map(|e| e.check_id.len()).max().unwrap_or(0);
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{:<17}  {:<width$}  computed {:>+.9e}  oracle {:>+.9e}  rel.dev {:.2e}  tol {:.0e}  [{}]",
                e.verdict.to_string(),
                e.check_id,
                e.computed,
                e.oracle,
                e.rel_dev,
                e.tolerance,
                e.location,
            );
            if !e.note.is_empty() {
                let _ = writeln!(s, "{:<17}  {:<width$}  note: {}", "", "", e.note);
            }
        }
        s
    }
}

fn rel_dev(computed: f64, oracle: f64) -> f64 {
    let d = (computed - oracle).abs();
    let r = if oracle != 0.0 { d / oracle.abs() } else { d };
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

enum Kind {
    Engine,
    /// Printed formula under test, with the suspected typo.
    Audit(&'static str),
}

struct Recorder {
    seed: u64,
    entries: Vec<Entry>,
}

impl Recorder {
    fn rng(&self, id: &str) -> ChaCha8Rng {
        // one independent stream per check, so checks can be reordered
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in id.bytes() {
            h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
        }
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(h);
        r
    }

    fn record<F>(&mut self, id: &str, location: &str, tol: f64, kind: Kind, f: F)
    where
        F: FnOnce(&mut ChaCha8Rng) -> Result<(f64, f64)>,
    {
        let mut rng = self.rng(id);
        let entry = match f(&mut rng) {
            Ok((computed, oracle)) => {
                let dev = rel_dev(computed, oracle);
                let (verdict, note) = match (dev <= tol, kind) {
                    (true, _) => (Verdict::Pass, String::new()),
                    (false, Kind::Engine) => (Verdict::Fail, String::new()),
                    (false, Kind::Audit(typo)) => (Verdict::PaperDiscrepancy, typo.to_string()),
                };
                Entry {
                    check_id: id.into(),
                    location: location.into(),
                    computed,
                    oracle,
                    rel_dev: dev,
                    tolerance: tol,
                    verdict,
                    note,
                }
            }
            Err(e) => Entry {
                check_id: id.into(),
                location: location.into(),
                computed: f64::NAN,
                oracle: f64::NAN,
                rel_dev: f64::INFINITY,
                tolerance: tol,
                verdict: Verdict::Fail,
                note: format!("check could not run: {e}"),
            },
        };
        self.entries.push(entry);
    }
}

/// Worst case among several `(computed, oracle)` pairs.
fn worst(pairs: impl IntoIterator<Item = (f64, f64)>) -> (f64, f64) {
    let mut out = (0.0, 0.0);
    let mut dev = -1.0;
    for (c, o) in pairs {
        let d = rel_dev(c, o);
        if d > dev {
            out = (c, o);
            dev = d;
        }
    }
    out
}

fn try_worst(pairs: impl IntoIterator<Item = Result<(f64, f64)>>) -> Result<(f64, f64)> {
    Ok(worst(pairs.into_iter().collect::<Result<Vec<_>>>()?))
}

fn constant_geometry(a1: f64, a2: f64, phi: f64) -> SheetGeometry {
    SheetGeometry::new(Profile::constant(a1), Profile::constant(a2), PhiField::constant(C64::new(phi, 0.0)))
}

fn random_covector(rng: &mut ChaCha8Rng) -> Covector {
    loop {
        let xi = Covector::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if xi.norm_sq() > 0.05 {
            return xi;
        }
    }
}

fn sheet_coeffs(g: &SheetGeometry, t: f64) -> Result<[SheetCoeffs; 2]> {
    let (a1, a2) = g.scale_jets(t)?;
    let (h1, h2) = g.torsion_jets(t)?;
    Ok([SheetCoeffs::from_jets(a1, h1), SheetCoeffs::from_jets(a2, h2)])
}

fn printed_vs_recursion(g: &SheetGeometry, t: f64, conv: B0Convention, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let coeffs = sheet_coeffs(g, t)?;
    let mut pairs = Vec::new();
    for _ in 0..6 {
        let xi = random_covector(rng);
        let rec = recursion_b2_sheet_traces(g, t, &xi)?;
        for s in 0..2 {
            pairs.push((printed_b2c(&coeffs[s], &xi, conv), rec[s].re));
        }
    }
    Ok(worst(pairs))
}

fn symbols_suite(r: &mut Recorder, n: usize) {
    let rule = CosphereRule::new(n);
    let rule = match rule {
        Ok(rule) => rule,
        Err(e) => {
            r.record("symbols.quadrature", "cosphere integration", 0.0, Kind::Engine, |_| Err(e));
            return;
        }
    };
    let tol = 1e-8;

    r.record("symbols.calibration", "flat volume term", tol, Kind::Engine, |_| {
        Ok((volume_with_rule(&constant_geometry(1.0, 1.0, 0.0), 0.0, &rule)?, 4.0 * PI * PI))
    });

    r.record("symbols.volume", "volume term of the two-sheet action", tol, Kind::Audit("volume coefficient"), |rng| {
        try_worst((0..5).map(|_| {
            let (a1, a2) = (rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0));
            Ok((volume_with_rule(&constant_geometry(a1, a2, 0.0), 0.0, &rule)?, volume_closed_form(a1, a2)))
        }))
    });

    let fixed: Result<B2Terms> = b2_with_rule(&constant_geometry(2.0, 1.0, 1.0), 0.0, &rule, false);
    r.record("symbols.potential.fixed", "integrated potential term", tol, Kind::Audit("potential coefficient"), |_| {
        Ok((fixed.clone()?.potential, 14.0 * PI * PI / 3.0))
    });
    r.record("symbols.mass", "mass part of b2", tol, Kind::Engine, |_| {
        Ok((fixed.clone()?.mass, mass_closed_form(2.0, 1.0, 1.0)))
    });
    r.record("symbols.sheet-swap", "sheet exchange symmetry", 1e-10, Kind::Engine, |_| {
        let g = SheetGeometry::new(Profile::constant(1.0), Profile::constant(2.0), PhiField::constant(C64::new(1.0, 0.0)));
        Ok((b2_with_rule(&g, 0.0, &rule, false)?.total(), fixed.clone()?.total()))
    });

    r.record("symbols.potential.random", "integrated potential term", tol, Kind::Audit("potential coefficient"), |rng| {
        try_worst((0..2).map(|_| {
            let (a1, a2, phi) = (rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0), rng.gen_range(0.2..2.0));
            let arg = rng.gen_range(0.0..2.0 * PI);
            let g = SheetGeometry::new(
                Profile::constant(a1),
                Profile::constant(a2),
                PhiField::constant(C64::from_polar(phi, arg)),
            );
            Ok((b2_with_rule(&g, 0.0, &rule, false)?.potential, potential_closed_form(a1, a2, phi)))
        }))
    });

    let mut imag = vec![];
    r.record("symbols.kinetic.de-sitter", "kinetic term per sheet", tol, Kind::Audit("kinetic coefficient"), |_| {
        let (p1, p2) = (Profile::exponential(1.2, 0.3), Profile::exponential(0.8, 0.5));
        let g = SheetGeometry::new(p1, p2, PhiField::constant(C64::new(0.5, 0.0)));
        let t = 0.4;
        let terms = b2_with_rule(&g, t, &rule, false)?;
        imag.push(terms.imag);
        Ok((terms.kinetic, kinetic_closed_form(p1.jet(t)?) + kinetic_closed_form(p2.jet(t)?)))
    });
    r.record("symbols.kinetic.power-law", "kinetic term per sheet", tol, Kind::Audit("kinetic coefficient"), |_| {
        let (p1, p2) = (Profile::power_law(1.0, 0.5), Profile::power_law(1.5, 2.0 / 3.0));
        let g = SheetGeometry::new(p1, p2, PhiField::zero());
        let t = 1.2;
        let terms = b2_with_rule(&g, t, &rule, false)?;
        imag.push(terms.imag);
        Ok((terms.kinetic, kinetic_closed_form(p1.jet(t)?) + kinetic_closed_form(p2.jet(t)?)))
    });
    if let Ok(f) = &fixed {
        imag.push(f.imag);
    }
    r.record("symbols.imaginary-part", "reality of the integrated b2", 1e-10, Kind::Engine, |_| {
        Ok((imag.iter().fold(0.0f64, |m, x| m.max(x.abs())), 0.0))
    });

    let curved = SheetGeometry::new(
        Profile::exponential(1.3, 0.4),
        Profile::power_law(0.9, 0.5),
        PhiField::constant(C64::new(0.6, -0.3)),
    );
    r.record("symbols.defect", "parametrix recursion", 1e-10, Kind::Engine, |rng| {
        let syms = build_symbols(&curved, 0.7)?;
        let mut m = 0.0f64;
        for _ in 0..4 {
            let xi = random_covector(rng);
            let p = parametrix(&syms, &xi)?;
            for d in composition_defect(&syms, &xi, &p, Calculus::Standard)? {
                m = m.max(d.camax());
            }
        }
        Ok((m, 0.0))
    });
    r.record("symbols.homogeneity", "homogeneity of b0, b1, b2", 1e-10, Kind::Engine, |rng| {
        let syms = build_symbols(&curved, 0.7)?;
        let mut dev = 0.0f64;
        for _ in 0..3 {
            let xi = random_covector(rng);
            let base = parametrix(&syms, &xi)?;
            for s in [0.5, 2.0] {
                let p = parametrix(&syms, &xi.scaled(s))?;
                let pairs = [(&p.b0.v, &base.b0.v, -2), (&p.b1.v, &base.b1.v, -3), (&p.b2, &base.b2, -4)];
                for (got, reference, deg) in pairs {
                    let expected = reference * C64::new(s.powi(deg), 0.0);
                    dev = dev.max((got - &expected).camax() / expected.camax().max(1e-300));
                }
            }
        }
        Ok((dev, 0.0))
    });

    let rolling = SheetGeometry::new(Profile::exponential(2.0, 0.1), Profile::power_law(1.0, 0.5), PhiField::zero());
    r.record(
        "symbols.b2c.squared-b0",
        "printed diagonal part of b2",
        1e-10,
        Kind::Audit("diagonal part of b2 with the A^2 leading inverse"),
        |rng| printed_vs_recursion(&rolling, 1.3, B0Convention::Squared, rng),
    );
    r.record(
        "symbols.b2c.linear-b0",
        "printed leading inverse",
        1e-10,
        Kind::Audit("the printed b0 = (xi0^2 + A xi^2)^-1 should carry A^2, the inverse of the leading symbol; the printed b2 block only matches with A^2"),
        |rng| printed_vs_recursion(&rolling, 1.3, B0Convention::Linear, rng),
    );
    let twisted = SheetGeometry::new(Profile::constant(1.5), Profile::constant(0.7), PhiField::zero())
        .with_torsion(Profile::exponential(0.3, 0.4), Profile::constant(-0.2));
    r.record(
        "symbols.b2c.torsion-squares",
        "printed torsion terms of b2",
        1e-10,
        Kind::Audit("H^2 + H' terms of the printed diagonal block"),
        |rng| printed_vs_recursion(&twisted, 0.6, B0Convention::Squared, rng),
    );
    let rolling_twisted = SheetGeometry::new(Profile::exponential(1.5, 0.3), Profile::power_law(0.7, 0.5), PhiField::zero())
        .with_torsion(Profile::exponential(0.3, 0.4), Profile::constant(-0.2));
    r.record(
        "symbols.b2c.torsion-cross",
        "printed torsion terms of b2",
        1e-10,
        Kind::Audit("the printed A' A H term 4 b0^2 xi^2 - 24 b0^4 xi^2 xi0^2 is not homogeneous; the recursion gives -(4 b0^3 xi^2 - 24 b0^4 xi^2 xi0^2)"),
        |rng| printed_vs_recursion(&rolling_twisted, 0.6, B0Convention::Squared, rng),
    );
    r.record(
        "symbols.b2n",
        "printed noncommutative part of b2",
        1e-10,
        Kind::Audit("noncommutative part of b2"),
        |rng| {
            let g = SheetGeometry::new(
                Profile::exponential(2.0, 0.1),
                Profile::constant(1.0),
                PhiField::constant(C64::new(0.8, 0.6)),
            );
            try_worst((0..6).map(|_| {
                let xi = random_covector(rng);
                let rec = recursion_b2n_trace(&g, 0.0, &xi)?;
                Ok((printed_b2n_trace(0.5, 1.0, C64::new(0.8, 0.6), &xi, B0Convention::Squared), rec.re))
            }))
        },
    );
}

fn action_suite(r: &mut Recorder) {
    r.record("action.potential-identity", "two printed forms of the potential", 1e-12, Kind::Audit("potential forms differ"), |rng| {
        let mut m = 0.0f64;
        for _ in 0..1000 {
            m = m.max(potential_identity_check(rng.gen_range(0.01..100.0), rng.gen_range(0.01..100.0))?);
        }
        Ok((m, 0.0))
    });
    r.record("action.potential.example", "potential of the effective action", 1e-14, Kind::Engine, |_| {
        Ok((potential_v(2.0, 1.0)?, 7.0 / 3.0))
    });
    r.record("action.potential.swap", "potential of the effective action", 1e-14, Kind::Engine, |rng| {
        let mut m = 0.0f64;
        for _ in 0..100 {
            let (a, b) = (rng.gen_range(0.01..10.0), rng.gen_range(0.01..10.0));
            let v = potential_v(a, b)?;
            m = m.max((v - potential_v(b, a)?).abs() / v.max(f64::MIN_POSITIVE));
        }
        Ok((m, 0.0))
    });
    r.record("action.density.example", "effective action density", 1e-14, Kind::Engine, |_| {
        let s = BimetricState::new(Jet2::new(2.0, 1.0, 0.0), Jet2::new(1.0, 0.0, 0.0))?;
        Ok((lagrangian_density(&s, &CosmoParams::new(0.0, 1.0), Lapse::UNIT, Signature::Lorentzian), 12.0 + 7.0 / 3.0))
    });
    r.record("action.lapse-degree", "lapse insertion", 1e-13, Kind::Engine, |rng| {
        let p = CosmoParams::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let s = BimetricState::new(
            Jet2::new(rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0), 0.0),
            Jet2::new(rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0), 0.0),
        )?;
        let still = BimetricState::new(Jet2::constant(s.a1.value), Jet2::constant(s.a2.value))?;
        let density = |st: &BimetricState, p: &CosmoParams, b: f64| {
            Lapse::new(b).map(|l| lagrangian_density(st, p, l, Signature::Lorentzian))
        };
        let potential = density(&still, &p, 1.0)?;
        let kinetic = density(&s, &CosmoParams::new(0.0, 0.0), 1.0)?;
        Ok((density(&s, &p, 2.0)?, 2.0 * potential + 0.5 * kinetic))
    });
    r.record("action.total.static", "time integral of the density", 1e-13, Kind::Engine, |_| {
        let p = CosmoParams::new(1.0, 0.7);
        let samples = (0..=20)
            .map(|i| Sample { t: 0.1 * i as f64, a1: 1.0, v1: 0.0, a2: 1.0, v2: 0.0, constraint: -2.0 })
            .collect();
        Ok((total_action(&Trajectory::from_samples(samples, p), &p)?, 4.0))
    });
}

fn eom_suite(r: &mut Recorder) {
    r.record("eom.potential-gradient", "potential derivatives in the equations of motion", 1e-8, Kind::Audit("derivative of the potential"), |rng| {
        let mut m = 0.0f64;
        for _ in 0..1000 {
            let (a1, a2): (f64, f64) = (rng.gen_range(0.05..20.0), rng.gen_range(0.05..20.0));
            let h = 1e-6 * a1.max(a2);
            let v = potential_unchecked;
            let g1 = (v(a1 + h, a2) - v(a1 - h, a2)) / (2.0 * h);
            let g2 = (v(a1, a2 + h) - v(a1, a2 - h)) / (2.0 * h);
            let scale = g1.abs().max(g2.abs()).max(1.0);
            m = m.max((p1(a1, a2) - g1).abs() / scale).max((p2(a1, a2) - g2).abs() / scale);
        }
        Ok((m, 0.0))
    });
    r.record("eom.euler-lagrange", "bimetric equations of motion", 1e-5, Kind::Audit("evolution equations"), |rng| {
        let mut m = 0.0f64;
        for _ in 0..3 {
            let p = CosmoParams::new(rng.gen_range(-2.0..4.0), rng.gen_range(0.2..3.0));
            let (c1, c2) = (rng.gen_range(1.0..2.5), rng.gen_range(0.5..1.5));
            let (d1, d2) = (rng.gen_range(0.1..0.4), rng.gen_range(0.1..0.4));
            let (w1, w2) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
            let path = move |t: f64| {
                (
                    Jet2::new(c1 + d1 * (w1 * t).sin(), d1 * w1 * (w1 * t).cos(), -d1 * w1 * w1 * (w1 * t).sin()),
                    Jet2::new(c2 + d2 * (w2 * t).cos(), -d2 * w2 * (w2 * t).sin(), -d2 * w2 * w2 * (w2 * t).cos()),
                )
            };
            let rep = el_consistency(&p, &path, rng.gen_range(0.0..2.0))?;
            m = m.max(rep.max_rel_dev());
        }
        Ok((m, 0.0))
    });
    let state = |rng: &mut ChaCha8Rng| {
        PhaseState::new(0.0, rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0))
    };
    r.record("eom.constraint.lapse", "lapse constraint", 1e-7, Kind::Engine, |rng| {
        let (s, p) = (state(rng), CosmoParams::new(2.0, 1.5));
        Ok((constraint_residual(&s, &p), lapse_variation(&s, &p)))
    });
    r.record(
        "eom.constraint.printed-prefactor",
        "printed lapse constraint",
        1e-7,
        Kind::Audit("the printed constraint has 6a(a1'^2 + a2'^2) with a single a; lapse variation gives 6(a1 a1'^2 + a2 a2'^2)"),
        |rng| {
            let (s, p) = (state(rng), CosmoParams::new(2.0, 1.5));
            Ok((constraint_with_common_prefactor(&s, 0.5 * (s.a1 + s.a2), &p), lapse_variation(&s, &p)))
        },
    );
    r.record("eom.de-sitter", "exponentially growing solution", 1e-8, Kind::Engine, |rng| {
        let p = CosmoParams::new(6.0, rng.gen_range(-3.0..3.0));
        let ic = solve_constraint_ic(1.0, 1.0, 1.0, Branch::Plus, &p)?;
        let traj = integrate(&ic, &p, &IntegratorConfig::rk4(1e-3, 0.0, 1.0))?;
        Ok(worst(traj.samples.iter().flat_map(|s| [(s.a1, s.t.exp()), (s.a2, s.t.exp())])))
    });
    r.record("eom.de-sitter.constraint-drift", "exponentially growing solution", 1e-9, Kind::Engine, |_| {
        let p = CosmoParams::new(6.0, 1.0);
        let ic = solve_constraint_ic(1.0, 1.0, 1.0, Branch::Plus, &p)?;
        let traj = integrate(&ic, &p, &IntegratorConfig::rk4(1e-3, 0.0, 1.0))?;
        Ok((constraint_consistency(&traj, &p), 0.0))
    });
    r.record("eom.rk4-order", "integrator convergence", 0.05, Kind::Engine, |_| {
        let p = CosmoParams::new(6.0, 1.0);
        let ic = solve_constraint_ic(1.0, 1.0, 1.0, Branch::Plus, &p)?;
        let est = convergence_order(&ic, &p, &IntegratorConfig::rk4(0.1, 0.0, 1.0), &[0.1, 0.05, 0.025, 0.0125])?;
        Ok((est.order.unwrap_or(f64::NAN), 4.0))
    });
}

fn perturbation_suite(r: &mut Recorder) {
    r.record(
        "perturbation.empty.exponents",
        "empty universe exponents",
        1e-12,
        Kind::Audit("characteristic exponents of the empty universe"),
        |rng| {
            try_worst((0..100).flat_map(|_| {
                let l: f64 = rng.gen_range(0.0..20.0);
                let al: f64 = rng.gen_range(-0.75 * l..20.0);
                let printed = [-(l / 24.0).sqrt() + 0.25 * (6.0 * l + 8.0 * al).sqrt(), -(l / 24.0).sqrt() - 0.25 * (6.0 * l + 8.0 * al).sqrt()];
                let got = empty_exponents(l, al).map(|e| e.roots());
                (0..2).map(move |i| got.clone().map(|g| (g[i].re, printed[i])))
            }))
        },
    );
    r.record(
        "perturbation.empty.exponent-times-t",
        "empty universe solution",
        1e-10,
        Kind::Audit("the printed exponentials omit the factor t in the exponent; read as exp(mu t)"),
        |_| {
            // taken literally the printed solution is a constant
            let m = PerturbationModel::new(ModelKind::Empty, 1.0, CosmoParams::new(6.0, 1.0))?;
            let Exponents::Real { plus, .. } = empty_exponents(6.0, 1.0)? else {
                return Err(Error::Domain("expected real exponents".into()));
            };
            Ok((relative_residual(&m, 0.7, Jet2::constant(plus.exp()))?, 0.0))
        },
    );
    r.record("perturbation.empty.linearized-residual", "linearized equation", 1e-10, Kind::Engine, |rng| {
        let mut m = 0.0f64;
        for _ in 0..50 {
            let p = CosmoParams::new(rng.gen_range(0.0..12.0), rng.gen_range(-8.0..8.0));
            let model = PerturbationModel::new(ModelKind::Empty, rng.gen_range(0.5..2.0), p)?;
            let t = rng.gen_range(0.0..3.0);
            let rj = closed_form_solution(&model, t, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))?;
            let terms = linearized_terms(model.background().jet(t)?, rj, &p);
            let scale = terms.iter().fold(0.0f64, |x, y| x.max(y.abs()));
            if scale > 0.0 {
                m = m.max(terms.iter().sum::<f64>().abs() / scale);
            }
        }
        Ok((m, 0.0))
    });
    r.record("perturbation.reduction", "model equations from the linearized equation", 1e-10, Kind::Audit("reduced model equations"), |rng| {
        let mut m = 0.0f64;
        for kind in ModelKind::ALL {
            for _ in 0..30 {
                let p = CosmoParams::new(rng.gen_range(0.0..10.0), rng.gen_range(-5.0..5.0));
                let model = PerturbationModel::new(kind, rng.gen_range(0.2..3.0), p)?;
                let t = rng.gen_range(0.1..5.0);
                let rj = Jet2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let full: f64 = linearized_terms(model.background().jet(t)?, rj, &p).iter().sum();
                let pre = model.prefactor(t)?;
                let scale = pre * reduced_terms(&model, t, rj)?.iter().fold(0.0f64, |x, y| x.max(y.abs()));
                m = m.max((full - pre * reduce_model(&model, t, rj)?).abs() / scale);
            }
        }
        Ok((m, 0.0))
    });
    r.record("perturbation.matter.residual", "matter dominated solution", 1e-9, Kind::Audit("matter dominated solution"), |rng| {
        let mut m = 0.0f64;
        for _ in 0..50 {
            let (l, al) = (rng.gen_range(-10.0..2.0), rng.gen_range(-10.0..2.0));
            if l + al >= -1e-3 {
                continue;
            }
            let model = PerturbationModel::new(ModelKind::Matter, 1.0, CosmoParams::new(l, al))?;
            for i in 0..=40 {
                let t = 0.5 + 19.5 * i as f64 / 40.0;
                m = m.max(relative_residual(&model, t, closed_form_solution(&model, t, 1.0, 0.0)?)?);
            }
        }
        Ok((m, 0.0))
    });

    let times: Vec<f64> = (0..=80).map(|i| 0.5 + 19.5 * i as f64 / 80.0).collect();
    let scan = |rng: &mut ChaCha8Rng| {
        let k = -rng.gen_range(0.2..4.0);
        let alpha = rng.gen_range(-2.0..2.0);
        bessel_argument_scan(&CosmoParams::new(k - alpha, alpha), &times)
    };
    r.record("perturbation.radiation.half-argument", "radiation dominated solution", 1e-8, Kind::Engine, |rng| {
        let [half, _] = scan(rng)?;
        debug_assert_eq!(half.arg, BesselArg::Half);
        Ok((half.max_rel_residual, 0.0))
    });
    r.record(
        "perturbation.radiation.printed-argument",
        "radiation dominated solution",
        1e-8,
        Kind::Audit("the printed Bessel argument sqrt(-2(Lambda+alpha)) t lacks a factor 1/2; the radiation equation is solved with sqrt(-2(Lambda+alpha)) t / 2"),
        |rng| {
            let [_, printed] = scan(rng)?;
            Ok((printed.max_rel_residual, 0.0))
        },
    );
    r.record("perturbation.radiation.wronskian", "independent radiation solutions", 1e-9, Kind::Engine, |_| {
        let model = PerturbationModel::new(ModelKind::Radiation, 1.0, CosmoParams::new(-1.0, -0.3))?;
        try_worst(times.iter().map(|&t| Ok((radiation_wronskian(&model, t)?, radiation_wronskian_exact(t)))))
    });
    r.record("perturbation.bessel.half-order", "fractional order Bessel function", 1e-10, Kind::Engine, |_| {
        try_worst([1.0, 2.0, 5.0, 30.0].map(|x: f64| Ok((bessel_j(0.5, x)?, (2.0 / (PI * x)).sqrt() * x.sin()))))
    });
    r.record("perturbation.split", "perturbative ansatz", 0.05, Kind::Engine, |_| {
        let model = PerturbationModel::new(ModelKind::Empty, 1.0, CosmoParams::new(6.0, 1.0))?;
        let sol = SplitSolution::new(model, 1.0, 0.0, 0.0)?;
        let eps = 0.1;
        let traj = integrate(&sol.initial_state(eps)?, &model.params(), &IntegratorConfig::rk4(1e-3, 0.0, 1.0))?;
        Ok((split_compare(&sol, eps, &traj)?, 0.0))
    });
}

/// Run every check of `suite`. Individual failures become entries; the
/// report is a pure function of the arguments.
pub fn run_suite(suite: Suite, seed: u64, node_budget: usize) -> VerificationReport {
    let mut r = Recorder { seed, entries: Vec::new() };
    if suite.includes(Suite::Symbols) {
        symbols_suite(&mut r, node_budget);
    }
    if suite.includes(Suite::Action) {
        action_suite(&mut r);
    }
    if suite.includes(Suite::Eom) {
        eom_suite(&mut r);
    }
    if suite.includes(Suite::Perturbation) {
        perturbation_suite(&mut r);
    }
    let mut entries = r.entries;
    entries.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    let tolerances = entries.iter().map(|e| (e.check_id.clone(), e.tolerance)).collect();
    VerificationReport { suite, seed, node_budget, tolerances, entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_suite_passes_and_is_deterministic() {
        let a = run_suite(Suite::Action, 7, 8);
        let b = run_suite(Suite::Action, 7, 8);
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.count(Verdict::Pass), a.entries.len(), "{}", a.to_text());
        assert!(a.is_consistent());
    }

    #[test]
    fn eom_suite_flags_only_the_prefactor() {
        let rep = run_suite(Suite::Eom, 3, 8);
        for e in &rep.entries {
            let expected = if e.check_id == "eom.constraint.printed-prefactor" {
                Verdict::PaperDiscrepancy
            } else {
                Verdict::Pass
            };
            assert_eq!(e.verdict, expected, "{}", rep.to_text());
        }
        assert!(rep.is_consistent());
    }

    #[test]
    fn perturbation_suite_flags_printed_typos() {
        let rep = run_suite(Suite::Perturbation, 1, 8);
        let flagged: Vec<&str> = rep
            .entries
            .iter()
            .filter(|e| e.verdict == Verdict::PaperDiscrepancy)
            .map(|e| e.check_id.as_str())
            .collect();
        assert_eq!(flagged, ["perturbation.empty.exponent-times-t", "perturbation.radiation.printed-argument"], "{}", rep.to_text());
        assert_eq!(rep.count(Verdict::Fail), 0, "{}", rep.to_text());
        assert!(rep.is_consistent());
    }

    #[test]
    fn too_small_budget_is_an_entry_not_an_error() {
        let rep = run_suite(Suite::Symbols, 1, 2);
        assert_eq!(rep.entries.len(), 1);
        assert_eq!(rep.entries[0].verdict, Verdict::Fail);
        assert!(rep.entries[0].note.contains("at least"));
    }

    #[test]
    fn suite_names_round_trip() {
        for n in Suite::NAMES {
            assert_eq!(n.parse::<Suite>().unwrap().name(), n);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn seeds_change_sampled_values() {
        let a = run_suite(Suite::Action, 1, 8);
        let b = run_suite(Suite::Action, 2, 8);
        assert_ne!(a.entry("action.lapse-degree").unwrap().computed, b.entry("action.lapse-degree").unwrap().computed);
    }
}
