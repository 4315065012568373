use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spbk::report::{cmd_efficiency, cmd_fit, cmd_mc, cmd_simulate, RunConfig};
use spbk::simulation::Example;
use spbk::{Result, SpbkError};

/// Spline-backfitted kernel smoothing for additive (auto)regression.
#[derive(Parser)]
#[command(name = "spbk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit every component of a CSV sample and write curves with bands.
    Fit(Flags),
    /// Generate a sample and its true components.
    Simulate(Flags),
    /// Run a Monte Carlo study.
    Mc(Flags),
    /// Recompute relative efficiencies from stored curves.
    Efficiency(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// ex1 | ex2
    #[arg(long)]
    example: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    sigma0: Option<f64>,
    /// Knot-rule tuning constant.
    #[arg(long)]
    c: Option<f64>,
    /// Bandwidth constant.
    #[arg(long = "Ch")]
    c_h: Option<f64>,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid: Option<usize>,
    /// observed | qNN | lo,hi | lo,hi;lo,hi;...
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    /// none | analytic
    #[arg(long)]
    bias_mode: Option<String>,
    /// TOML file with the same keys; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn resolve(self) -> Result<RunConfig> {
        let flags = RunConfig {
            input: self.input,
            output_dir: self.output_dir,
            example: self
                .example
                .as_deref()
                .map(str::parse::<Example>)
                .transpose()?,
            n: self.n,
            d: self.d,
            sigma0: self.sigma0,
            c: self.c,
            c_h: self.c_h,
            level: self.level,
            reps: self.reps,
            seed: self.seed,
            grid: self.grid,
            range: self.range,
            bias_mode: self.bias_mode,
        };
        match self.config {
            Some(path) => Ok(flags.layered_over(RunConfig::load(&path)?)),
            None => Ok(flags),
        }
    }
}

fn run(command: Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Fit(f) => {
            let report = cmd_fit(&f.resolve()?)?;
            let s = &report.summary;
            println!(
                "fitted {} of {} rows, d = {}, N = {}, c_hat = {:.6}",
                s.rows_used, s.rows, s.d, s.knots, s.c_hat
            );
            Ok(report.files)
        }
        Command::Simulate(f) => cmd_simulate(&f.resolve()?),
        Command::Mc(f) => {
            let report = cmd_mc(&f.resolve()?)?;
            println!("component  ASE 1st     ASE 2nd     oracle      eff(med)  eff(IQR)");
            for c in &report.components {
                println!(
                    "{:>9}  {:<10.4e}  {:<10.4e}  {:<10.4e}  {:>8.3}  {:>8.3}",
                    c.component,
                    c.mean_ase_1st,
                    c.mean_ase_2nd,
                    c.mean_ase_oracle,
                    c.median_efficiency,
                    c.efficiency_iqr
                );
            }
            if !report.study.failures.is_empty() {
                eprintln!("{} replications failed", report.study.failures.len());
            }
            Ok(report.files)
        }
        Command::Efficiency(f) => {
            let report = cmd_efficiency(&f.resolve()?)?;
            for (comp, eff) in &report.efficiencies {
                println!("component {comp}: efficiency {eff:.6}");
            }
            Ok(report.files)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &SpbkError) -> u8 {
    u8::try_from(e.exit_code()).unwrap_or(1)
}
