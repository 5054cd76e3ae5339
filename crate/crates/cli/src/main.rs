use std::path::PathBuf;

use clap::{Parser, Subcommand};
use scurve_cli::commands;

#[derive(Parser)]
#[command(name = "scurve", version, about = "S-curves and equilibrium measures in polynomial external fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Max-min solve of a problem spec.
    Solve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the seed derived from the problem-file hash.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        svg: bool,
    },
    /// Critical graph of -R dz^2.
    Trace {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Recompute the residuals of a solution file.
    Check {
        /// Solution JSON written by `solve`.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Solve, then orthogonal polynomials on the computed contour.
    Ortho {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        svg: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Solve { spec, out, seed, svg } => commands::solve(&spec, &out, seed, svg),
        Cmd::Trace { spec, out } => commands::trace(&spec, &out),
        Cmd::Check { spec } => commands::check(&spec),
        Cmd::Ortho { spec, out, seed, svg } => commands::ortho(&spec, &out, seed, svg),
    };
    let (code, stdout, stderr) = commands::finish(res);
    if let Some(s) = stdout {
        println!("{s}");
    }
    if let Some(s) = stderr {
        eprintln!("{s}");
    }
    std::process::exit(code);
}
