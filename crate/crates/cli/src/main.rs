use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use expdamp_cli::{
    cmd_cutoff_study, cmd_polyorder_study, cmd_run, cmd_verify_constants, load_config, CliError, OutDir, Outcome,
};
use expdamp_core::dynamics::SimConfig;

#[derive(Parser)]
#[command(name = "expdamp", version, about = "Damped Navier-Stokes experiments")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for ensemble members (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Verb {
    /// Simulate one configuration and run every check.
    Run(Common),
    /// Distances between runs at increasing cutoffs.
    CutoffStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "4.5,6.5,8.5,10.5")]
        cutoffs: Vec<f64>,
    },
    /// Distances between the full damping and its polynomial truncations.
    PolyorderStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,5,10,50")]
        orders: Vec<u32>,
        /// Radius of the truncation envelope.
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
    },
    /// Embedding constants, ratio suprema and Lipschitz sweeps.
    VerifyConstants(Common),
}

fn config(common: &Common) -> Result<SimConfig, CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut c = load_config(path)?;
    if let Some(seed) = common.seed {
        c.seed = seed;
    }
    Ok(c)
}

fn execute(verb: &Verb) -> (u8, Option<String>) {
    let (name, common) = match verb {
        Verb::Run(c) => ("run", c),
        Verb::CutoffStudy { common, .. } => ("cutoff-study", common),
        Verb::PolyorderStudy { common, .. } => ("polyorder-study", common),
        Verb::VerifyConstants(c) => ("verify-constants", c),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return (2, Some(format!("--threads: {e}")));
        }
    }
    let cfg = match verb {
        Verb::VerifyConstants(_) => None,
        _ => match config(common) {
            Ok(c) => Some(c),
            Err(e) => return (e.exit_code(), Some(e.to_string())),
        },
    };
    let mut out = match OutDir::create(&common.out) {
        Ok(o) => o,
        Err(e) => return (e.exit_code(), Some(e.to_string())),
    };
    let result: Result<Outcome, CliError> = match (verb, &cfg) {
        (Verb::Run(_), Some(c)) => cmd_run(c, &mut out),
        (Verb::CutoffStudy { cutoffs, .. }, Some(c)) => cmd_cutoff_study(c, cutoffs, &mut out),
        (Verb::PolyorderStudy { orders, r0, .. }, Some(c)) => cmd_polyorder_study(c, orders, *r0, &mut out),
        (Verb::VerifyConstants(_), _) => cmd_verify_constants(common.seed.unwrap_or(0), &mut out),
        _ => unreachable!("configuration loaded for every verb that needs one"),
    };
    let (code, msg) = match result {
        Ok(o) if o.passed => (0, None),
        Ok(_) => (1, Some(format!("{name}: at least one check failed"))),
        Err(e) => (e.exit_code(), Some(e.to_string())),
    };
    let seed = cfg.as_ref().map(|c| c.seed).or(common.seed);
    if let Err(e) = out.manifest(name, cfg.as_ref(), seed, code) {
        return (e.exit_code(), Some(e.to_string()));
    }
    (code, msg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (code, msg) = execute(&cli.verb);
    if let Some(m) = msg {
        eprintln!("expdamp: {m}");
    }
    ExitCode::from(code)
}
