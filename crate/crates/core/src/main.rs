use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use chunksched::metrics::{
    emit_report, run_sweep, summarize, write_csv, write_summary, ReportFormat, SweepSpec,
};
use chunksched::sim::ConfigError;
use chunksched::solvers::{hungarian_max, knapsack_max, WeightMatrix};
use chunksched::{run_simulation, Error, Result, SimConfig, Strategy};

#[derive(Parser)]
#[command(
    version,
    about = "Chunk scheduling simulator for pull-based P2P streaming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's strategy.
        #[arg(long)]
        strategy: Option<Strategy>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run strategy x rate x window x seed and write sweep.csv and
    /// summary.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        strategies: Vec<Strategy>,
        /// Total stream rates in Kbps.
        #[arg(long, value_delimiter = ',', required = true)]
        rates: Vec<u32>,
        /// Window lengths in seconds.
        #[arg(long, value_delimiter = ',', required = true)]
        windows: Vec<u32>,
        /// Number of seeds, counting up from the config's.
        #[arg(long)]
        seeds: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an ad-hoc instance and print the result as JSON.
    ///
    /// Without --capacity the CSV is a square weight matrix (an empty cell
    /// or `x` marks a forbidden pair) solved for a maximum-weight
    /// assignment. With --capacity it holds two rows, values then integer
    /// weights, solved as a 0/1 knapsack.
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        capacity: Option<u64>,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            strategy,
            seed,
            out,
            format,
        } => {
            let mut cfg = SimConfig::load(&config)?;
            if let Some(s) = strategy {
                cfg.strategy = s;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = run_simulation(&cfg)?;
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let format = ReportFormat::from(format);
            let path = out.join(format!(
                "{}_seed{}.{}",
                cfg.strategy,
                cfg.seed,
                format.extension()
            ));
            emit_report(&report, format, &path)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Sweep {
            config,
            strategies,
            rates,
            windows,
            seeds,
            out,
        } => {
            let base = SimConfig::load(&config)?;
            let spec = SweepSpec {
                strategies,
                rates_kbps: rates,
                windows_s: windows,
                seeds,
            };
            let reports = run_sweep(&base, &spec)?;
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let sweep_path = out.join("sweep.csv");
            write_csv(&reports, create(&sweep_path)?).map_err(|source| Error::Csv {
                path: sweep_path.clone(),
                source,
            })?;
            let summary_path = out.join("summary.csv");
            write_summary(&summarize(&reports), create(&summary_path)?).map_err(|source| {
                Error::Csv {
                    path: summary_path.clone(),
                    source,
                }
            })?;
            println!("{}\n{}", sweep_path.display(), summary_path.display());
            Ok(())
        }
        Command::Solve { matrix, capacity } => {
            let rows = read_grid(&matrix)?;
            let result = match capacity {
                None => {
                    let m = WeightMatrix::from_options(&rows).map_err(|e| bad_input(&matrix, e))?;
                    let sol = hungarian_max(&m)?;
                    json!({ "assignment": sol.assignment, "objective": sol.objective })
                }
                Some(cap) => {
                    let [values, weights] = rows.as_slice() else {
                        return Err(bad_input(&matrix, "expected two rows: values, weights"));
                    };
                    let values: Option<Vec<f64>> = values.iter().copied().collect();
                    let weights: Option<Vec<u32>> = weights
                        .iter()
                        .map(|w| {
                            w.filter(|w| w.fract() == 0.0 && *w >= 0.0)
                                .map(|w| w as u32)
                        })
                        .collect();
                    let (Some(values), Some(weights)) = (values, weights) else {
                        return Err(bad_input(&matrix, "knapsack rows must be fully numeric"));
                    };
                    let sol = knapsack_max(&values, &weights, cap)?;
                    json!({ "selected": sol.selected, "value": sol.value })
                }
            };
            println!("{result}");
            Ok(())
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn bad_input(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Config(ConfigError::Invalid(format!("{}: {msg}", path.display())))
}

/// Numeric CSV without a header; empty cells and `x` are `None`.
fn read_grid(path: &Path) -> Result<Vec<Vec<Option<f64>>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad_input(path, e))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad_input(path, e))?;
        let row = record
            .iter()
            .map(|cell| match cell {
                "" | "x" | "X" => Ok(None),
                s => s
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| bad_input(path, format!("not a number: `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
