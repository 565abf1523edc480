//! Execution of a validated scenario. Every mode writes into `output_dir`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::json;

use spectral_flrw::integrator::{integrate, solve_constraint_ic, Termination, Trajectory};
use spectral_flrw::perturbation::{
    closed_form_solution_with, integrate_linear, relative_residual, split_compare, ModelKind, PerturbationModel,
    SplitSolution,
};
use spectral_flrw::symbol::wres::{
    kinetic_closed_form, mass_closed_form, potential_closed_form, volume_closed_form, wres_b2_term, wres_volume_term,
};
use spectral_flrw::verify::{run_suite, Verdict};
use spectral_flrw::{jet_eval, CosmoParams};

use crate::config::{GeometrySpec, Mode, Scenario, SweepPoint};
use crate::{expand_sweep, CliError};

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// Short human-readable summary for stdout.
    pub summary: String,
}

pub fn run_scenario(s: &Scenario) -> Result<Outcome, CliError> {
    s.validate()?;
    let mode = s.mode()?;
    let dir = s.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut out = Outcome { mode, output_dir: dir, files: Vec::new(), summary: String::new() };
    match mode {
        Mode::Verify => verify(s, &mut out)?,
        Mode::Evolve => evolve(s, &mut out)?,
        Mode::Perturb => perturb(s, &mut out)?,
        Mode::Sweep => sweep(s, &mut out)?,
    }
    Ok(out)
}

fn write(out: &mut Outcome, name: &str, text: &str) -> Result<(), CliError> {
    let path = out.output_dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    out.files.push(path);
    Ok(())
}

fn write_json<T: Serialize>(out: &mut Outcome, name: &str, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Run(e.to_string()))?;
    write(out, name, &(text + "\n"))
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn verify(s: &Scenario, out: &mut Outcome) -> Result<(), CliError> {
    let report = run_suite(s.suite, s.seed, s.nodes);
    write(out, "report.txt", &report.to_text())?;
    write(out, "report.json", &report.to_json())?;
    if let Some(g) = &s.geometry {
        let terms = geometry_terms(g, s.nodes)?;
        write_json(out, "geometry_terms.json", &terms)?;
    }
    let fails = report.count(Verdict::Fail);
    out.summary = format!(
        "{} checks: {} pass, {} fail, {} paper-discrepancy",
        report.entries.len(),
        report.count(Verdict::Pass),
        fails,
        report.count(Verdict::PaperDiscrepancy)
    );
    if fails > 0 {
        return Err(CliError::Run(format!("verification failed: {}", out.summary)));
    }
    Ok(())
}

/// Engine integrals next to their closed forms (the latter assume no torsion).
fn geometry_terms(g: &GeometrySpec, nodes: usize) -> Result<serde_json::Value, CliError> {
    let geom = g.geometry();
    let (a1, a2) = geom.scale_jets(g.t)?;
    let phi = jet_eval(&geom.phi.modulus, g.t)?.value;
    let volume = wres_volume_term(&geom, g.t, nodes)?;
    let b2 = wres_b2_term(&geom, g.t, nodes, g.allow_torsion)?;
    let torsion = geom.has_torsion_at(g.t)?;
    let pair = |engine: f64, closed: f64| json!({ "engine": engine, "closed_form": if torsion { None } else { Some(closed) } });
    Ok(json!({
        "t": g.t,
        "nodes": nodes,
        "torsion": torsion,
        "volume": pair(volume, volume_closed_form(a1.value, a2.value)),
        "kinetic": pair(b2.kinetic, kinetic_closed_form(a1) + kinetic_closed_form(a2)),
        "potential": pair(b2.potential, potential_closed_form(a1.value, a2.value, phi)),
        "mass": pair(b2.mass, mass_closed_form(a1.value, a2.value, phi)),
        "imaginary_part": b2.imag,
    }))
}

fn termination_label(t: &Termination) -> String {
    match t {
        Termination::Completed => "completed".into(),
        Termination::Collapse { t, value } => format!("collapse at t = {t:.6e} (scale factor {value:.3e})"),
        Termination::NonFinite { t } => format!("non-finite state at t = {t:.6e}"),
    }
}

fn trajectory_summary(traj: &Trajectory, params: &CosmoParams) -> serde_json::Value {
    let last = traj.last().copied();
    json!({
        "params": params,
        "integrator": traj.config,
        "termination": traj.termination,
        "collapsed": matches!(traj.termination, Termination::Collapse { .. }),
        "samples": traj.samples.len(),
        "final": last,
        "max_abs_constraint": traj.max_abs_constraint(),
    })
}

fn save_trajectory(out: &mut Outcome, traj: &Trajectory) -> Result<(), CliError> {
    let path = out.output_dir.join("trajectory.csv");
    traj.save_csv(&path)?;
    out.files.push(path);
    Ok(())
}

fn evolve(s: &Scenario, out: &mut Outcome) -> Result<(), CliError> {
    let params = s.params()?;
    let ic = s.initial_conditions.expect("validated");
    let cfg = s.integrator_for(None);
    let start = solve_constraint_ic(ic.a1, ic.a2, ic.v2, ic.branch, &params)?;
    let traj = integrate(&start, &params, &cfg)?;
    save_trajectory(out, &traj)?;
    write_json(out, "summary.json", &trajectory_summary(&traj, &params))?;
    let last = traj.last().expect("trajectory has its initial sample");
    out.summary = format!(
        "{}; t = {:.6}, a1 = {:.10e}, a2 = {:.10e}, max |constraint| = {:.3e}",
        termination_label(&traj.termination),
        last.t,
        last.a1,
        last.a2,
        traj.max_abs_constraint()
    );
    Ok(())
}

fn perturb(s: &Scenario, out: &mut Outcome) -> Result<(), CliError> {
    let params = s.params()?;
    let m = s.model.expect("validated");
    let cfg = s.integrator_for(Some(m.kind));
    let model = PerturbationModel::new(m.kind, m.a0, params)?;
    let closed = |t: f64| closed_form_solution_with(&model, t, m.c1, m.c2, m.bessel_argument);
    let r0 = closed(cfg.t0)?;
    let steps = ((cfg.t1 - cfg.t0) / cfg.step).ceil().max(1.0) as usize;
    let samples = integrate_linear(&model, r0.value, r0.d1, cfg.t0, cfg.t1, steps)?;

    let stride = cfg.output_stride.max(1);
    let mut rows = Vec::new();
    let (mut max_diff, mut max_res) = (0.0f64, 0.0f64);
    for (i, p) in samples.iter().enumerate() {
        let c = closed(p.t)?;
        let diff = (p.r - c.value).abs();
        let res = relative_residual(&model, p.t, c)?;
        max_diff = max_diff.max(diff);
        max_res = max_res.max(res.abs());
        if i % stride == 0 || i + 1 == samples.len() {
            rows.push(vec![fmt(p.t), fmt(p.r), fmt(p.v), fmt(c.value), fmt(c.d1), fmt(diff), fmt(res)]);
        }
    }
    let header = ["t", "r_numeric", "v_numeric", "r_closed", "v_closed", "abs_diff", "closed_residual"];
    write(out, "perturbation.csv", &csv_text(&header, rows))?;
    write_json(
        out,
        "summary.json",
        &json!({
            "params": params,
            "model": m.kind,
            "a0": m.a0,
            "c1": m.c1,
            "c2": m.c2,
            "bessel_argument": m.bessel_argument,
            "t0": cfg.t0,
            "t1": cfg.t1,
            "steps": steps,
            "max_abs_diff": max_diff,
            "max_closed_residual": max_res,
        }),
    )?;
    out.summary = format!(
        "{} model on [{}, {}]: max |numeric - closed| = {:.3e}, max closed-form residual = {:.3e}",
        m.kind.name(),
        cfg.t0,
        cfg.t1,
        max_diff,
        max_res
    );
    Ok(())
}

/// Ordered map over `items` on `workers` threads.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, items.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                results.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    results.into_inner().expect("worker panicked").into_iter().map(|r| r.expect("every job ran")).collect()
}

#[derive(Debug, Clone)]
struct PointResult {
    status: String,
    final_a1: f64,
    final_a2: f64,
    max_constraint: f64,
    split_dev: f64,
}

fn run_point(p: &SweepPoint) -> PointResult {
    match try_point(p) {
        Ok(r) => r,
        Err(e) => PointResult {
            status: format!("error: {e}"),
            final_a1: f64::NAN,
            final_a2: f64::NAN,
            max_constraint: f64::NAN,
            split_dev: f64::NAN,
        },
    }
}

fn try_point(p: &SweepPoint) -> Result<PointResult, CliError> {
    let s = &p.scenario;
    let params = s.params()?;
    let (a0, c1, c2) = s.model.map_or((1.0, 1.0, 0.0), |m| (m.a0, m.c1, m.c2));
    let cfg = s.integrator_for(None);
    let model = PerturbationModel::new(ModelKind::Empty, a0, params)?;
    let sol = SplitSolution::new(model, c1, c2, cfg.t0)?;
    let ic = sol.initial_state(p.eps)?;
    let traj = integrate(&ic, &params, &cfg)?;
    let split_dev = split_compare(&sol, p.eps, &traj)?;

    let dir = &s.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    traj.save_csv(&dir.join("trajectory.csv"))?;
    let mut summary = trajectory_summary(&traj, &params);
    summary["eps"] = json!(p.eps);
    summary["split_deviation"] = json!(split_dev);
    let path = dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&summary).expect("serializable") + "\n").map_err(|e| CliError::io(&path, e))?;

    let last = traj.last().expect("trajectory has its initial sample");
    let status = match traj.termination {
        Termination::Completed => "completed".to_string(),
        Termination::Collapse { .. } => "collapse".to_string(),
        Termination::NonFinite { .. } => "non-finite".to_string(),
    };
    Ok(PointResult {
        status,
        final_a1: last.a1,
        final_a2: last.a2,
        max_constraint: traj.max_abs_constraint(),
        split_dev,
    })
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn sweep(s: &Scenario, out: &mut Outcome) -> Result<(), CliError> {
    let points = expand_sweep(s);
    let workers = s.workers.unwrap_or_else(default_workers);
    let results = parallel_map(&points, workers, run_point);
    let rel = |d: &Path| d.strip_prefix(&s.output_dir).unwrap_or(d).display().to_string();
    let rows = points.iter().zip(&results).map(|(p, r)| {
        vec![
            p.index.to_string(),
            fmt(p.lambda_eff),
            fmt(p.alpha),
            fmt(p.eps),
            format!("\"{}\"", r.status.replace('"', "'")),
            fmt(r.final_a1),
            fmt(r.final_a2),
            fmt(r.max_constraint),
            fmt(r.split_dev),
            rel(&p.scenario.output_dir),
        ]
    });
    let header =
        ["point", "lambda_eff", "alpha", "eps", "status", "final_a1", "final_a2", "max_constraint", "split_dev", "dir"];
    write(out, "index.csv", &csv_text(&header, rows))?;
    let failed = results.iter().filter(|r| r.status.starts_with("error")).count();
    out.summary = format!("{} points on {} workers, {} failed", points.len(), workers, failed);
    Ok(())
}
