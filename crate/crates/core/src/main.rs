use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cebit_core::harness::{self, Command, Config, HarnessError, HarnessResult};

#[derive(Parser, Debug)]
#[command(name = "cebit", version, about = "Classical-entanglement teleportation bench simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV tables, images and provenance.
    #[arg(long, global = true, default_value = "cebit-out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    frames: Option<usize>,
    /// Gaussian camera noise as a fraction of peak intensity.
    #[arg(long, global = true)]
    noise: Option<f64>,
    /// RMS lower-arm polarization jitter at BS2, degrees.
    #[arg(long, global = true)]
    jitter: Option<f64>,
    /// Samples per grid axis.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Projection outcome 00, 01, 10 or 11.
    #[arg(long, global = true)]
    outcome: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Teleport the configured payload and report fidelities per outcome.
    Teleport,
    /// Estimate the lobe angle of the projected mode.
    Angle,
    /// Correlation-filter decomposition of the projected mode.
    Decompose,
    /// Lobe-angle sweep.
    ReproduceFig2,
    /// Ratio sweep and tilted-plate phase sweep.
    ReproduceFig3,
    /// Random payloads through the gate model, the bench and the decomposition.
    RandomSuite,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Teleport => Command::Teleport,
            Cmd::Angle => Command::Angle,
            Cmd::Decompose => Command::Decompose,
            Cmd::ReproduceFig2 => Command::ReproduceFig2,
            Cmd::ReproduceFig3 => Command::ReproduceFig3,
            Cmd::RandomSuite => Command::RandomSuite,
        }
    }
}

fn build_config(cli: &Cli) -> HarnessResult<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let overrides = [
        ("seed", cli.seed.map(|v| v.to_string())),
        ("frames", cli.frames.map(|v| v.to_string())),
        ("noise.sigma", cli.noise.map(|v| v.to_string())),
        ("noise.jitter_deg", cli.jitter.map(|v| v.to_string())),
        ("grid.n", cli.grid.map(|v| v.to_string())),
        ("outcome", cli.outcome.clone()),
        ("threads", cli.threads.map(|v| v.to_string())),
    ];
    for (key, v) in overrides {
        if let Some(v) = v {
            cfg.set(key, &v)?;
        }
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> HarnessResult<()> {
    let cfg = build_config(cli)?;
    cfg.validate()?;
    let cmd = Command::from(cli.command);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| HarnessError::Io(std::io::Error::other(e.to_string())))?;
    let report = pool.install(|| harness::run(cmd, &cfg))?;
    for line in &report.lines {
        println!("{line}");
    }
    report.write(&cli.out, &cfg, cmd.name())?;
    for (k, v) in &report.summary {
        println!("{k} = {v}");
    }
    println!("wrote {}", cli.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cebit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
