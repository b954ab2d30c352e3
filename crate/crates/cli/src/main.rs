use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noether_cli::{load, run_solve, run_transform, run_verify, Format, RunOptions};

/// Derive variational symmetries and integrals of motion of higher-order
/// Lagrangians, verify them symbolically and numerically, and apply
/// cyclic-coordinate point transformations.
#[derive(Parser)]
#[command(name = "noether", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the determining system and verify the conserved quantities
    Solve(RunArgs),
    /// Apply the problem file's point transformation (cyclic workflow)
    Transform(RunArgs),
    /// Numeric-only drift verification of the expected integrals
    Verify(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Human,
    Machine,
}

#[derive(Args)]
struct RunArgs {
    /// Problem file
    file: PathBuf,
    /// RNG seed for span matching (falls back to NOETHER_SEED, then 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report rendering
    #[arg(long, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,
    /// Override the absolute drift tolerance
    #[arg(long)]
    tol_abs: Option<f64>,
    /// Override the relative drift tolerance
    #[arg(long)]
    tol_rel: Option<f64>,
    /// Jet-order cap (default 8)
    #[arg(long)]
    max_order: Option<u32>,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        let seed = self
            .seed
            .or_else(|| {
                std::env::var("NOETHER_SEED")
                    .ok()
                    .and_then(|s| s.parse().ok())
            })
            .unwrap_or(0);
        RunOptions {
            seed,
            order_cap: self.max_order.unwrap_or(noether_core::DEFAULT_ORDER_CAP),
            tol_abs: self.tol_abs,
            tol_rel: self.tol_rel,
        }
    }
}

type Runner = fn(&noether_cli::ProblemFile, &RunOptions) -> noether_cli::CliResult<noether_cli::Report>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, runner): (&RunArgs, Runner) = match &cli.command {
        Command::Solve(a) => (a, run_solve),
        Command::Transform(a) => (a, run_transform),
        Command::Verify(a) => (a, run_verify),
    };
    let opts = args.options();
    let problem = match load(&args.file) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let report = match runner(&problem, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let rendered = report.render(match args.format {
        FormatArg::Human => Format::Human,
        FormatArg::Machine => Format::Machine,
    });
    match &args.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            println!(
                "{}: {} ({} failures)",
                path.display(),
                if report.passed() { "pass" } else { "fail" },
                report.failures()
            );
        }
        None => print!("{rendered}"),
    }
    ExitCode::from(report.exit_code() as u8)
}
