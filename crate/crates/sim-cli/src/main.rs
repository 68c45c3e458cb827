//! Command-line front end: `run` executes the configured sweep and writes
//! CSV plus SVG plots, `validate` checks a config, `oracle` runs the
//! small-instance oracle suite.
//!
//! Exit codes: 0 success, 1 config error, 2 runtime error, 3
//! acceptance-property violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use converge_sim::config::{parse_config, ExperimentConfig};
use converge_sim::csv_out::write_csv;
use converge_sim::oracle::run_oracle_suite;
use converge_sim::plot::{write_plot, PlotMetric};
use converge_sim::runner::run_sweep;

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_PROPERTY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "converge-sim",
    about = "Monte Carlo comparison of user-association schemes in multi-tier wireless networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured sweep and write results.csv plus SVG plots.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override sim.master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override output.dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override run.schemes (comma-separated).
        #[arg(long)]
        schemes: Option<String>,
        /// Suppress progress output.
        #[arg(long)]
        quiet: bool,
    },
    /// Parse and validate a config, reporting every problem.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the small-instance oracle suite derived from the config.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Number of random instances to check.
        #[arg(long, default_value_t = 200)]
        instances: u32,
        #[arg(long)]
        quiet: bool,
    },
}

fn load_config(path: &Path) -> Result<ExperimentConfig, u8> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("cannot read {}: {err}", path.display());
            return Err(EXIT_RUNTIME);
        }
    };
    parse_config(&text).map_err(|err| {
        eprintln!("invalid config {}:\n{err}", path.display());
        EXIT_CONFIG
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            seed,
            out_dir,
            schemes,
            quiet,
        } => cmd_run(&config, seed, out_dir, schemes, quiet),
        Command::Validate { config } => cmd_validate(&config),
        Command::Oracle {
            config,
            instances,
            quiet,
        } => cmd_oracle(&config, instances, quiet),
    };
    match code {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

fn cmd_validate(path: &Path) -> Result<(), u8> {
    let cfg = load_config(path)?;
    println!(
        "config ok: {} tiers, {} alphas, {} lambda points, {} schemes, digest {}",
        cfg.tiers.len(),
        cfg.alphas.len(),
        cfg.lambda_factors.len(),
        cfg.schemes.len(),
        &cfg.digest()[..16]
    );
    Ok(())
}

fn cmd_run(
    path: &Path,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    schemes: Option<String>,
    quiet: bool,
) -> Result<(), u8> {
    let mut cfg = load_config(path)?;
    if let Some(seed) = seed {
        cfg.master_seed = seed;
    }
    if let Some(dir) = out_dir {
        cfg.output_dir = dir.to_string_lossy().into_owned();
    }
    if let Some(schemes) = schemes {
        let mut parsed = Vec::new();
        for token in schemes.split(',') {
            match token.trim().parse() {
                Ok(s) => {
                    if !parsed.contains(&s) {
                        parsed.push(s);
                    }
                }
                Err(e) => {
                    eprintln!("invalid --schemes: {e}");
                    return Err(EXIT_CONFIG);
                }
            }
        }
        if parsed.is_empty() {
            eprintln!("invalid --schemes: at least one scheme required");
            return Err(EXIT_CONFIG);
        }
        cfg.schemes = parsed;
    }

    if !quiet {
        println!(
            "running sweep: {} schemes x {} alphas x {} lambdas x {} drops (seed {})",
            cfg.schemes.len(),
            cfg.alphas.len(),
            cfg.lambda_factors.len(),
            cfg.drops,
            cfg.master_seed
        );
    }

    let outcome = run_sweep(&cfg).map_err(|err| {
        eprintln!("sweep failed: {err}");
        EXIT_RUNTIME
    })?;

    let out_dir = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&out_dir).map_err(|err| {
        eprintln!("cannot create {}: {err}", out_dir.display());
        EXIT_RUNTIME
    })?;

    let io_err = |err: std::io::Error| {
        eprintln!("write failed: {err}");
        EXIT_RUNTIME
    };
    let csv_path = out_dir.join("results.csv");
    let mut csv = fs::File::create(&csv_path).map_err(io_err)?;
    write_csv(&outcome.sweep, &mut csv).map_err(io_err)?;
    let interference_path = out_dir.join("interference.svg");
    let mut svg = fs::File::create(&interference_path).map_err(io_err)?;
    write_plot(&outcome.sweep, PlotMetric::Interference, &mut svg).map_err(io_err)?;
    let efficiency_path = out_dir.join("efficiency.svg");
    let mut svg = fs::File::create(&efficiency_path).map_err(io_err)?;
    write_plot(&outcome.sweep, PlotMetric::Efficiency, &mut svg).map_err(io_err)?;

    if !quiet {
        for p in &outcome.sweep.points {
            println!(
                "{} alpha={} lambda={}: interference {:.4e} W (norm {:.3}), efficiency {:.4e} bit/J (norm {:.3})",
                p.scheme, p.alpha, p.lambda_norm, p.mean_interference_w, p.norm_interference,
                p.mean_eff_bpj, p.norm_eff
            );
        }
        println!(
            "wrote {}, {}, {} (resampled drops: {})",
            csv_path.display(),
            interference_path.display(),
            efficiency_path.display(),
            outcome.resampled_drops
        );
    }

    if outcome.violations > 0 {
        eprintln!(
            "optimizer guarantee violated in {} drop(s)",
            outcome.violations
        );
        return Err(EXIT_PROPERTY);
    }
    Ok(())
}

fn cmd_oracle(path: &Path, instances: u32, quiet: bool) -> Result<(), u8> {
    let cfg = load_config(path)?;
    let report = run_oracle_suite(&cfg, instances).map_err(|err| {
        eprintln!("oracle suite failed to run: {err}");
        EXIT_RUNTIME
    })?;
    if report.passed() {
        if !quiet {
            println!(
                "oracle suite: {}/{} instances satisfied the optimality sandwich",
                report.instances, report.instances
            );
        }
        Ok(())
    } else {
        for failure in &report.failures {
            eprintln!("{failure}");
        }
        eprintln!(
            "oracle suite: {} of {} instances failed",
            report.failures.len(),
            report.instances
        );
        Err(EXIT_PROPERTY)
    }
}
