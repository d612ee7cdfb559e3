use std::path::PathBuf;
use std::process::ExitCode;

use boussinesq_cli::{run, CliError, Command, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "boussinesq", version, about = "Inverse-scattering lab for the good Boussinesq equation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON configuration file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (artifact store).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Comma-separated ray speeds.
    #[arg(long, global = true, value_delimiter = ',')]
    zeta: Option<Vec<f64>>,
    /// Comma-separated sample times.
    #[arg(long, global = true, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    /// Last node of the k-grid.
    #[arg(long, global = true)]
    kmax: Option<f64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// `key=value`, with a dotted path or a unique field name; repeatable.
    #[arg(long = "override", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Reflection coefficient on the k-grid.
    Scatter,
    /// Asymptotic parameters on each ray.
    Asym,
    /// Pseudo-spectral reference run.
    Pde,
    /// Reference solution against the asymptotic formula.
    Compare,
    /// Summary of the output directory.
    Report,
    /// Solitonless and generic-origin checks.
    CheckAssumptions,
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(z) = &cli.zeta {
        config.zeta = z.clone();
    }
    if let Some(t) = &cli.t {
        config.t = t.clone();
    }
    if let Some(k) = cli.kmax {
        config.k_grid.end = k;
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    config.with_overrides(&cli.overrides)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Scatter => Command::Scatter,
        Cmd::Asym => Command::Asym,
        Cmd::Pde => Command::Pde,
        Cmd::Compare => Command::Compare,
        Cmd::Report => Command::Report,
        Cmd::CheckAssumptions => Command::CheckAssumptions,
    };
    match build_config(&cli).and_then(|c| run(command, &cli.out, c)) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
