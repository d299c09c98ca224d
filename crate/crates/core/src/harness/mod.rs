//! Batch experiments: configuration, sweeps and report files.

mod config;
mod experiments;
mod report;

pub use config::{Config, HarnessError, HarnessResult, KEYS};
pub use experiments::{
    abstract_run, config_payload, fig2_points, fig3a_points, fig3b_points, frame_source, optical_run,
    random_payload, reproduce_fig2, reproduce_fig3, run_angle, run_decompose, run_random_suite, run_teleport,
    suite_rows, AbstractRun, Fig2Point, Fig3aPoint, Fig3bPoint, SuiteRow,
};
pub use report::{config_hash, RunReport, Table};

/// Subcommands of the `cebit` binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Teleport,
    Angle,
    Decompose,
    ReproduceFig2,
    ReproduceFig3,
    RandomSuite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Teleport => "teleport",
            Command::Angle => "angle",
            Command::Decompose => "decompose",
            Command::ReproduceFig2 => "reproduce-fig2",
            Command::ReproduceFig3 => "reproduce-fig3",
            Command::RandomSuite => "random-suite",
        }
    }
}

/// Validates `cfg` and runs one subcommand.
pub fn run(cmd: Command, cfg: &Config) -> HarnessResult<RunReport> {
    cfg.validate()?;
    match cmd {
        Command::Teleport => run_teleport(cfg),
        Command::Angle => run_angle(cfg),
        Command::Decompose => run_decompose(cfg),
        Command::ReproduceFig2 => reproduce_fig2(cfg),
        Command::ReproduceFig3 => reproduce_fig3(cfg),
        Command::RandomSuite => run_random_suite(cfg),
    }
}
