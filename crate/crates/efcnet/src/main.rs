use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use efcnet::commands::{self, EfcOptions};
use efcnet::config::RunConfig;
use efcnet::error::AppError;

/// Edge-centric connectivity pipeline: synthesize labeled time series,
/// compute connectivity matrices, train and cross-validate classifiers.
#[derive(Parser)]
#[command(name = "efcnet", version, about)]
struct Cli {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for per-subject work (1 keeps everything sequential).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic dataset into a directory.
    Synth {
        /// Output directory.
        #[arg(long, default_value = "data")]
        out: PathBuf,
    },
    /// Compute edge connectivity for one series CSV.
    Efc {
        /// Input time-series CSV (rows are time samples).
        input: PathBuf,
        /// Output binary matrix file.
        output: PathBuf,
        /// Use the tiled kernel with a memory budget.
        #[arg(long)]
        blocked: bool,
        /// Tile side for the blocked kernel.
        #[arg(long, default_value_t = 512)]
        block_size: usize,
        /// Working-set budget in bytes for the blocked kernel.
        #[arg(long, default_value_t = 1 << 30)]
        memory_budget: u64,
    },
    /// Compute node connectivity (Pearson correlations) for one series CSV.
    Nfc { input: PathBuf, output: PathBuf },
    /// Train one model on a dataset directory.
    Train {
        /// Dataset directory (subject CSVs + labels.csv).
        data: PathBuf,
        /// Train the plain GCN baseline instead of the co-embedding model.
        #[arg(long)]
        baseline: bool,
        /// Output directory for the checkpoint and history.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Stratified k-fold cross-validation with JSON reports.
    Cv {
        /// Dataset directory (subject CSVs + labels.csv).
        data: PathBuf,
        /// Also cross-validate the plain GCN baseline.
        #[arg(long)]
        baseline: bool,
        /// Output directory for the report files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Render a stored JSON report as a table.
    Report { report: PathBuf },
}

fn run(cli: Cli) -> Result<String, AppError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.threads == 0 {
        return Err(AppError::Config {
            message: "--threads must be at least 1".to_string(),
        });
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| AppError::Config {
            message: format!("thread pool: {e}"),
        })?;

    match cli.command {
        Command::Synth { out } => commands::cmd_synth(&cfg, &out),
        Command::Efc {
            input,
            output,
            blocked,
            block_size,
            memory_budget,
        } => commands::cmd_efc(
            &input,
            &output,
            &EfcOptions {
                blocked,
                block_size,
                memory_budget,
            },
        ),
        Command::Nfc { input, output } => commands::cmd_nfc(&input, &output),
        Command::Train {
            data,
            baseline,
            out,
        } => commands::cmd_train(&cfg, &data, baseline, &out),
        Command::Cv {
            data,
            baseline,
            out,
        } => commands::cmd_cv(&cfg, &data, baseline, &out),
        Command::Report { report } => commands::cmd_report(&report),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("EFCNET_LOG"))
        .format_timestamp(None)
        .init();

    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
