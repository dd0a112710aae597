use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hlt_core::reports::{run_command, Command, RunConfig, RunContext, SpectrumCache};
use hlt_core::{Error, Result};

/// Explicit Hardy-Lieb-Thirring constants and lattice-scale certificates.
#[derive(Parser)]
#[command(name = "hlt", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Hardy constants and Psi profile certificates
    Constants(Common),
    /// Remainder constants K, kappa and the pointwise t_h bound
    Remainder(Common),
    /// HLT constants from the optimized pipeline
    Hlt(Common),
    /// Numerical certification on grids and magnetic lattices
    Verify(Common),
    /// Pseudo-relativistic spin model constants
    Br(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; built-in defaults when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// output directory for <command>.json and <command>.csv
    #[arg(long, default_value = "hlt-out")]
    out: PathBuf,
    /// override the configured seed
    #[arg(long)]
    seed: Option<u64>,
    /// worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// disable the spectrum cache
    #[arg(long)]
    no_cache: bool,
}

fn run(cmd: Command, args: &Common) -> Result<i32> {
    if args.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("--jobs: {e}")))?;
    }
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let cache = if args.no_cache {
        None
    } else {
        Some(SpectrumCache::from_env(&args.out)?)
    };
    let ctx = RunContext {
        out: args.out.clone(),
        cache,
    };
    let report = run_command(cmd, &cfg, &ctx)?;
    for v in report.flagged() {
        eprintln!("warning: {} flagged (slack {:e}): {}", v.check, v.slack, v.detail);
    }
    for v in report.failures() {
        eprintln!("violation: {} [{}] slack {:e} < -{:e} {}", v.check, v.inequality, v.slack, v.tolerance, v.detail);
    }
    let n = report.verdicts.len();
    let failed = report.failures().len();
    println!(
        "{}: {} verdicts, {} failed, {} flagged -> {}",
        report.command,
        n,
        failed,
        report.flagged().len(),
        args.out.join(format!("{}.json", report.command)).display()
    );
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match &cli.command {
        Cmd::Constants(a) => (Command::Constants, a),
        Cmd::Remainder(a) => (Command::Remainder, a),
        Cmd::Hlt(a) => (Command::Hlt, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Br(a) => (Command::Br, a),
    };
    match run(cmd, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
