//! Command-line harness: a JSON configuration drives the scatter,
//! asymptotics and PDE stages, whose artifacts live in one output directory
//! together with a manifest of digests.

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;

use std::fmt::Write as _;
use std::path::Path;

pub use config::RunConfig;
pub use error::CliError;
pub use pipeline::{Comparison, ComparisonRow, FitSummary, Workspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Scatter,
    Asym,
    Pde,
    Compare,
    Report,
    CheckAssumptions,
}

/// Runs one command and returns the text to print on success.
pub fn run(command: Command, out: &Path, config: RunConfig) -> Result<String, CliError> {
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| dispatch(command, out, config)),
        None => dispatch(command, out, config),
    }
}

fn dispatch(command: Command, out: &Path, config: RunConfig) -> Result<String, CliError> {
    if command == Command::Report {
        return pipeline::report(out);
    }
    let mut ws = Workspace::open(out, config)?;
    let mut s = String::new();
    match command {
        Command::Scatter => {
            let line = ws.scatter()?;
            let d = &ws.manifest().stages["scatter"].details;
            let _ = writeln!(
                s,
                "spectral line: {} nodes on [{}, {}], zeta0 = {}, |r1(0+) - omega| = {:.3e}",
                line.len(),
                line.k_grid[0],
                line.k_max,
                d["zeta0"],
                d["origin_distance_to_omega"].as_f64().unwrap_or(f64::NAN)
            );
        }
        Command::Asym => {
            let (line, _) = ws.line()?;
            for p in ws.asym(&line)? {
                let _ = writeln!(
                    s,
                    "zeta {:.4}: k0 {:.4}, nu {:.6e}, |q| {:.6}, valid {}",
                    p.zeta,
                    p.k0,
                    p.nu,
                    p.q.norm(),
                    p.valid
                );
            }
        }
        Command::Pde => {
            for f in ws.pde()? {
                let (mu, mv) = f.masses();
                let _ = writeln!(s, "t = {}: mass_u {:.12e}, mass_v {:.12e}", f.t, mu, mv);
            }
        }
        Command::Compare => {
            let cmp = ws.compare()?;
            for f in &cmp.fits {
                let _ = writeln!(
                    s,
                    "zeta {:.4}: slope {}, rel error at t = {} is {:.4e}",
                    f.zeta,
                    f.slope.map_or("n/a".into(), |v| format!("{v:.3}")),
                    f.t_max,
                    f.rel_error_at_t_max
                );
            }
        }
        Command::CheckAssumptions => {
            let r = ws.check_assumptions()?;
            let _ = writeln!(
                s,
                "solitonless: {:?}, generic origin: {:?}, min|s11| on D1 {:.4e}, min|sA11| on D4 {:.4e}",
                r.solitonless, r.generic_origin, r.min_abs_s11_d1, r.min_abs_sa11_d4
            );
            for d in &r.diagnostics {
                let _ = writeln!(s, "  {d}");
            }
            if r.any_failed() {
                return Err(CliError::Assumption(s.trim_end().to_string()));
            }
        }
        Command::Report => unreachable!(),
    }
    Ok(s)
}
