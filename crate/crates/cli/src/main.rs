use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use spectral_flrw_cli::{parse_config, run_scenario, CliError, Mode, Overrides, Scenario, CONFIG_KEYS};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Run the verification suites and write report.txt / report.json
    Verify,
    /// Integrate the bimetric equations and write trajectory.csv
    Evolve,
    /// Integrate a linear perturbation next to its closed form
    Perturb,
    /// Evolve split empty-model solutions over a parameter grid
    Sweep,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Verify => Mode::Verify,
            ModeArg::Evolve => Mode::Evolve,
            ModeArg::Perturb => Mode::Perturb,
            ModeArg::Sweep => Mode::Sweep,
        }
    }
}

/// Spectral action of two-sheeted FLRW geometries and bimetric cosmology.
#[derive(Debug, Parser)]
#[command(name = "spectral-flrw", version, after_long_help = CONFIG_KEYS)]
struct Args {
    mode: ModeArg,
    /// Scenario file (JSON); defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cosphere node parameter
    #[arg(long)]
    nodes: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps
    #[arg(long)]
    workers: Option<usize>,
}

fn load(args: &Args) -> Result<Scenario, CliError> {
    let mut s = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            parse_config(&text)?
        }
        None => Scenario::default(),
    };
    let o = Overrides { seed: args.seed, nodes: args.nodes, output_dir: args.out.clone(), workers: args.workers };
    s.apply(args.mode.into(), &o);
    Ok(s)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match load(&args).and_then(|s| run_scenario(&s)) {
        Ok(out) => {
            println!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("spectral-flrw: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
