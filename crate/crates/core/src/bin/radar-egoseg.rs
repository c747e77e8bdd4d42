use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use radar_egoseg::commands::{self, Context};
use radar_egoseg::config::{parse_override, RunConfig};

/// Radar static/moving segmentation and ego-motion estimation.
///
/// Log verbosity follows the RADAR_EGOSEG_LOG environment variable
/// (error, warn, info, debug, trace; default info).
#[derive(Parser)]
#[command(name = "radar-egoseg", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for simulation and training; overrides the file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for per-sequence work.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Configuration override, `section.key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a labeled dataset.
    Simulate,
    /// Recompute ground-truth labels from odometry.
    GtLabel {
        #[arg(long)]
        data: PathBuf,
        /// Directory of `<sequence>.csv` files with columns t,speed,yaw_rate.
        #[arg(long)]
        odometry: Option<PathBuf>,
    },
    /// Train the segmentation network.
    Train {
        #[arg(long)]
        data: PathBuf,
    },
    /// Write per-frame predictions.
    Infer {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Score predictions against ground truth.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
    },
    /// Export static point maps and trajectories.
    Map {
        #[arg(long)]
        data: PathBuf,
        /// Prediction directory; ground truth is used when omitted.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> radar_egoseg::Result<()> {
    let mut overrides = cli
        .overrides
        .iter()
        .map(|s| parse_override(s))
        .collect::<radar_egoseg::Result<Vec<_>>>()?;
    if let Some(seed) = cli.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    let config = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let ctx = Context::new(config, cli.out).with_jobs(cli.jobs);
    match cli.command {
        Command::Simulate => {
            commands::cmd_simulate(&ctx)?;
        }
        Command::GtLabel { data, odometry } => {
            commands::cmd_gt_label(&ctx, &data, odometry.as_deref())?;
        }
        Command::Train { data } => {
            commands::cmd_train(&ctx, &data)?;
        }
        Command::Infer { data, model } => {
            commands::cmd_infer(&ctx, &data, &model)?;
        }
        Command::Eval { data, predictions } => {
            let report = commands::cmd_eval(&ctx, &data, &predictions)?;
            println!(
                "F1 {} IoU {} RTE50 {} m S-RMSE {:.3} cm/s {:.3} deg/s",
                fmt(report.f1),
                fmt(report.iou),
                fmt(report.rte_50_m),
                report.s_rmse_vx_cm_s,
                report.s_rmse_omega_deg_s
            );
        }
        Command::Map { data, predictions } => {
            for (name, n) in commands::cmd_map(&ctx, &data, predictions.as_deref())? {
                println!("{name}: {n} static points");
            }
        }
    }
    Ok(())
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.4}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RADAR_EGOSEG_LOG", "info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
