use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod report;
mod suites;

use config::{ExperimentConfig, Suite};

#[derive(Parser)]
#[command(name = "normsol", version, about = "Normalized NLS solutions: experiment suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory (overrides NORMSOL_OUT and the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// worker threads; results are reproducible for a fixed count
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// multiply every tolerance by this factor
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Shoot the soliton and check identities
    GroundState,
    /// Rescaling laws and decay constants
    ScalingCheck,
    /// Interaction integrals against their limit constants
    Interaction,
    /// Test surfaces, C0 and the landmark ordering
    Landmarks,
    /// Bound state search from the zero-barycenter witness
    Solve,
    /// One-dimensional whole-line and half-line runs
    OneDim,
    /// Identity, inequality and threshold suites
    VerifyAll,
}

impl Command {
    fn suite(self) -> Suite {
        match self {
            Command::GroundState => Suite::GroundState,
            Command::ScalingCheck => Suite::ScalingCheck,
            Command::Interaction => Suite::Interaction,
            Command::Landmarks => Suite::Landmarks,
            Command::Solve => Suite::Solve,
            Command::OneDim => Suite::OneDim,
            Command::VerifyAll => Suite::VerifyAll,
        }
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let suite = cli.command.suite();
    let Some(path) = cli.config.as_ref() else {
        return config_error("--config is required");
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return config_error(format!("{}: {e}", path.display())),
    };
    let cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return config_error(format!("{}: {e}", path.display())),
    };
    let resolved = match cfg.resolve() {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    if !(cli.tol_scale > 0.0) {
        return config_error("--tol-scale must be positive");
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return config_error(format!("--threads: {e}"));
        }
    }
    let tol = cfg.tolerances.scaled(cli.tol_scale);
    let ctx = suites::Context { cfg: &cfg, res: &resolved, tol: tol.clone() };
    let out = match suites::run(suite, &ctx) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}: computation failed: {e}", suite.name());
            return ExitCode::from(1);
        }
    };
    let dir = report::output_dir(cli.out, &cfg);
    match report::write(&dir, suite.name(), &cfg.hash(), &tol, &out) {
        Ok(p) => eprintln!("wrote {}", p.display()),
        Err(e) => {
            eprintln!("cannot write to {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    for r in &out.records {
        let tag = if !r.required { "info" } else if r.pass { "pass" } else { "FAIL" };
        println!("{tag:4}  {}/{}", r.suite, r.name);
    }
    let failed = out.failures();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &failed {
            eprintln!("criterion failed: {f}");
        }
        ExitCode::from(1)
    }
}
