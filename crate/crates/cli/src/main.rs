//! `framepick` — run frame sampling experiments from the command line.
//!
//! Exit codes: 0 success, 2 invalid config, 3 runtime failure.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use framepick_core::experiment::{
    run_policy_grid, run_redundancy_study, run_sampler_experiment, ExperimentConfig,
};

#[derive(Parser)]
#[command(
    name = "framepick",
    about = "Frame sampling policies, redundancy studies, and sampler training on synthetic videos",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; defaults apply for missing fields.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Named preset instead of a config file.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,

    /// Output directory for report files.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,

    /// Override the config's master seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads (0 = one per core). Outputs do not depend on this.
    #[arg(long, value_name = "N", default_value_t = 0)]
    workers: usize,

    /// Print the fully resolved config instead of running.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compare sampling policies over an (N, T) grid.
    PolicyGrid(RunArgs),
    /// Sweep temporal smoothness and summarize consecutive-frame relevance.
    Redundancy(RunArgs),
    /// Train the importance sampler and compare it against the policies.
    Train(RunArgs),
}

const EXIT_INVALID_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, String> {
    let mut config = match (&args.config, &args.preset) {
        (Some(path), None) => ExperimentConfig::load(path).map_err(|e| e.to_string())?,
        (None, Some(name)) => ExperimentConfig::preset(name).ok_or_else(|| {
            format!(
                "unknown preset '{name}'; available: {}",
                ExperimentConfig::preset_names().join(", ")
            )
        })?,
        (None, None) => ExperimentConfig::default(),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn run(args: &RunArgs, runner: impl FnOnce(&ExperimentConfig) -> framepick_core::Result<()>) -> ExitCode {
    let config = match load_config(args) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("framepick: invalid config: {message}");
            return ExitCode::from(EXIT_INVALID_CONFIG);
        }
    };
    if args.dump_config {
        match serde_json::to_value(&config).and_then(|v| serde_json::to_string_pretty(&v)) {
            Ok(text) => {
                println!("{text}");
                return ExitCode::SUCCESS;
            }
            Err(e) => {
                eprintln!("framepick: {e}");
                return ExitCode::from(EXIT_RUNTIME);
            }
        }
    }
    if args.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(args.workers)
            .build_global()
        {
            eprintln!("framepick: cannot configure {} workers: {e}", args.workers);
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    match runner(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("framepick: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::PolicyGrid(args) => {
            let out = args.out.clone();
            run(&args, |config| {
                let report = run_policy_grid(config, &out)?;
                for cell in &report.cells {
                    let skipped = if cell.skipped.is_empty() {
                        String::new()
                    } else {
                        format!(
                            " (skipped: {})",
                            cell.skipped
                                .iter()
                                .map(|s| s.policy.as_str())
                                .collect::<Vec<_>>()
                                .join(", ")
                        )
                    };
                    println!(
                        "cell N={} T={}: {} policies{skipped}",
                        cell.n,
                        cell.t,
                        cell.policies.len()
                    );
                }
                println!("wrote {}", out.join("summary.json").display());
                Ok(())
            })
        }
        Command::Redundancy(args) => {
            let out = args.out.clone();
            run(&args, |config| {
                let report = run_redundancy_study(config, &out)?;
                for cell in &report.cells {
                    println!(
                        "rho={:.2}: mean relevance {:.4} (p50 {:.4})",
                        cell.rho, cell.mean, cell.p50
                    );
                }
                println!("wrote {}", out.join("redundancy.json").display());
                Ok(())
            })
        }
        Command::Train(args) => {
            let out = args.out.clone();
            run(&args, |config| {
                let report = run_sampler_experiment(config, &out)?;
                println!(
                    "final held-out fidelity {:.3}, confidence {:.4}",
                    report.final_heldout_fidelity, report.final_heldout_confidence
                );
                for row in &report.comparison {
                    println!(
                        "{:<12} conf {:.4} fidelity-to-semi {:.3} calls {}",
                        row.policy, row.mean_confidence, row.mean_fidelity_to_semi, row.mean_calls
                    );
                }
                println!("wrote {}", out.join("summary.json").display());
                Ok(())
            })
        }
    }
}
