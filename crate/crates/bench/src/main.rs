use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ipmatch::{Error, Result};
use ipmatch_bench::{emit_report, emit_sweep, run_experiment, scaling_sweep, ExperimentConfig};

/// Run online matching experiments against the exact offline optimum.
///
/// Settings come from the defaults, then `--config`, then the flags below.
/// Exits 0 iff no unflagged trial fell below its guaranteed bound.
#[derive(Parser, Debug)]
#[command(name = "ipmatch-bench", version)]
struct Cli {
    /// key=value file using the flag names as keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// greedy-ip | greedy-dist | distance | inner-product | faster-ip
    #[arg(long)]
    matcher: Option<String>,
    /// Offline points
    #[arg(long)]
    n: Option<String>,
    /// Online points
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    /// Offline norm bound D
    #[arg(long)]
    norm_bound: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// uniform-sphere | gaussian-normalized | clustered[:k:spread]
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// exact | mult:<eps> | add:<eps> (greedy matchers only)
    #[arg(long)]
    noise: Option<String>,
    /// Output file (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Latency sweep over comma-separated offline sizes instead of trials
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<usize>>,
    /// Leave latency columns empty so reports are byte-reproducible
    #[arg(long)]
    no_timing: bool,
    /// Skip the per-update guarantee checks
    #[arg(long)]
    no_instrument: bool,
}

fn configure(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(&std::fs::read_to_string(path)?)?;
    }
    let flags = [
        ("matcher", &cli.matcher),
        ("n", &cli.n),
        ("m", &cli.m),
        ("dim", &cli.dim),
        ("norm-bound", &cli.norm_bound),
        ("eps", &cli.eps),
        ("tau", &cli.tau),
        ("delta", &cli.delta),
        ("seed", &cli.seed),
        ("dist", &cli.dist),
        ("trials", &cli.trials),
        ("format", &cli.format),
        ("noise", &cli.noise),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if cli.no_timing {
        cfg.timing = false;
    }
    if cli.no_instrument {
        cfg.instrument = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = configure(cli)?;
    let out: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    if let Some(sizes) = &cli.sweep {
        let sweep = scaling_sweep(&cfg, sizes)?;
        emit_sweep(&sweep, cfg.output_format, out)?;
        return Ok(true);
    }
    let reports = run_experiment(&cfg)?;
    emit_report(&reports, cfg.output_format, out)?;
    let violations = reports.iter().filter(|r| r.is_violation()).count();
    let flagged = reports.iter().filter(|r| r.flagged).count();
    if flagged > 0 || violations > 0 {
        eprintln!("{flagged} flagged trial(s), {violations} unflagged bound violation(s)");
    }
    Ok(violations == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Config(_)) | Err(e @ Error::Parse { .. }) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
