use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coff::runner::{self, Method, RunConfig, RunError, OUTPUT_DIR_ENV};

/// Cooperative feature-map fusion on synthetic LiDAR scenes.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every seed in a config and write CSV tables.
    Run {
        config: PathBuf,
        /// Output directory. Beats the environment override and the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Comma-separated methods, replacing the config's list.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        /// Worker threads; 0 picks one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Print the fusion trace of one seed.
    Explain {
        config: PathBuf,
        #[arg(long)]
        seed: u64,
    },
}

fn run(config: PathBuf, output_dir: Option<PathBuf>, methods: Option<Vec<Method>>, workers: usize) -> Result<(), RunError> {
    let mut cfg = RunConfig::load(&config)?;
    if let Some(m) = methods {
        cfg.methods = m;
    }
    let dir = output_dir
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| cfg.output_dir.clone());
    let summary = runner::run_with_workers(&cfg, workers)?;
    let written = runner::write_outputs(&summary, &cfg, &dir)?;

    println!("{} x {} seeds", summary.template, summary.seeds.len());
    println!(
        "{:<16} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "method", "conf", "near_P", "far_P", "near_R", "far_R", "p90_m"
    );
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
    for m in &summary.methods {
        println!(
            "{:<16} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}",
            m.method.to_string(),
            m.threshold.value(&cfg.eval),
            cell(m.near_precision_mean),
            cell(m.far_precision_mean),
            cell(m.near_recall_mean),
            cell(m.far_recall_mean),
            m.range_p90.map(|x| format!("{x:.1}")).unwrap_or_else(|| "-".into()),
        )
    }
    if let (Some(s), Some(x)) = (summary.mean_similarity, summary.mean_weight) {
        println!("mean S {s:.6}, mean X {x:.4}");
    }
    for p in written {
        log::info!("wrote {}", p.display());
    }
    println!("outputs in {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Run {
            config,
            output_dir,
            methods,
            workers,
        } => run(config, output_dir, methods, workers),
        Command::Explain { config, seed } => RunConfig::load(&config)
            .and_then(|cfg| runner::explain(&cfg, seed))
            .map(|e| print!("{e}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
