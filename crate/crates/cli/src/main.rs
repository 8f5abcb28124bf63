use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use nesslab::engine::EngineKind;
use nesslab_cli::config::parse_config;
use nesslab_cli::run::{execute, Options};

/// Sweeps nonequilibrium steady states over a parameter grid.
#[derive(Parser, Debug)]
#[command(name = "nesslab", version)]
struct Args {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; falls back to NESSLAB_WORKERS, the config, then all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; falls back to `run.out` in the config, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Engine overriding the config: lindblad_full, lindblad_secular,
    /// redfield_secular or redfield_full.
    #[arg(long)]
    engine: Option<String>,
    /// Check invariants after the run and write verify.txt.
    #[arg(long)]
    verify: bool,
}

fn workers(flag: Option<usize>, config: Option<usize>) -> Result<usize, String> {
    if let Some(w) = flag {
        return Ok(w);
    }
    if let Ok(s) = std::env::var("NESSLAB_WORKERS") {
        return s.trim().parse().map_err(|_| format!("NESSLAB_WORKERS: not a worker count: {s:?}"));
    }
    Ok(config.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

fn run(args: Args) -> Result<i32, String> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| format!("{}: {e}", args.config.display()))?;
    let mut cfg = parse_config(&text).map_err(|e| format!("{}: {e}", args.config.display()))?;
    if let Some(name) = &args.engine {
        cfg.engine = EngineKind::from_name(name).ok_or_else(|| format!("--engine: unknown engine {name:?}"))?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    let workers = workers(args.workers, cfg.run.workers)?;
    if workers == 0 {
        return Err("worker count must be positive".to_string());
    }
    let out = args.out.or_else(|| cfg.run.out.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    let opts = Options { workers, out, verify: args.verify, config_text: text };
    let summary = execute(&cfg, &opts).map_err(|e| e.to_string())?;
    eprintln!(
        "{} points, {} failed, {} features ({} matched to crossings), {:.2} s",
        summary.points, summary.failed_points, summary.features, summary.matched, summary.wall_seconds
    );
    for v in &summary.verify_violations {
        eprintln!("verify: {v}");
    }
    Ok(summary.exit_code())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
