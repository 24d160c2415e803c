use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vkramer::harness::{self, Command, Options};
use vkramer::C64;

/// Kramer sampling, quasi Lagrange-type interpolation and de Branges
/// checks driven by JSON scenarios.
#[derive(Debug, Parser)]
#[command(name = "vkramer", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file; for `all`, a file or a directory of scenarios.
    #[arg(long)]
    scenario: PathBuf,
    /// Report directory; the VKRAMER_OUT environment variable takes
    /// precedence.
    #[arg(long, default_value = "vkramer-out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    truncations: Option<Vec<usize>>,
    /// JSON list of [re, im] points for `invariance`.
    #[arg(long)]
    betas: Option<PathBuf>,
    /// Amplitude of complex normal noise added to the samples.
    #[arg(long)]
    noise: Option<f64>,
    /// Shift point for `shift`, as re,im.
    #[arg(long, allow_hyphen_values = true, value_parser = harness::parse_complex)]
    beta: Option<C64>,
    /// Record wall-clock runtimes in the reports.
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = std::env::var_os("VKRAMER_OUT").map(PathBuf::from).unwrap_or(cli.out);
    let opts = Options {
        scenario: cli.scenario,
        out,
        seed: cli.seed,
        truncations: cli.truncations,
        betas: cli.betas,
        noise: cli.noise,
        beta: cli.beta,
        timing: cli.timing,
    };
    match harness::run(cli.command, &opts) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("vkramer: {e}");
            ExitCode::from(harness::error_code(&e))
        }
    }
}
