use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reliaq_harness::config::ExperimentConfig;
use reliaq_harness::experiments::{run_hybrid, run_shift, run_standard};
use reliaq_harness::registry;
use reliaq_harness::report::{write_hybrid, write_shift, write_standard};

/// Benchmark harness for per-prediction reliability measures of generative
/// classifiers over discrete features.
#[derive(Parser)]
#[command(name = "reliaq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate all measures on full training sets.
    Standard(RunArgs),
    /// Sweep limited training sizes and feature-noise rates.
    Shift(RunArgs),
    /// Combine an uncertainty measure with each robustness measure.
    Hybrid(RunArgs),
    /// Write the locally generated datasets into the data directory.
    GenData {
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
    },
    /// List the datasets the registry knows about.
    Datasets,
}

#[derive(Args)]
struct RunArgs {
    /// Config file (key = value); flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset id; repeatable. Defaults to all locally generated datasets.
    #[arg(long = "dataset")]
    datasets: Vec<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory holding dataset files.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Repetitions per cell (shift setting).
    #[arg(long)]
    reps: Option<usize>,
    /// Training sizes, comma separated (shift setting).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Feature-noise rates, comma separated (shift setting).
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Measures to evaluate, comma separated (ids like u_max, r_loc).
    #[arg(long, value_delimiter = ',')]
    measures: Option<Vec<String>>,
    /// Uncertainty partner for the hybrid setting (default u_a).
    #[arg(long)]
    uncertainty: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if !self.datasets.is_empty() {
            cfg.datasets = self.datasets.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(dir) = &self.data_dir {
            cfg.data_dir = dir.clone();
        }
        if let Some(reps) = self.reps {
            cfg.repetitions = reps;
        }
        if let Some(sizes) = &self.sizes {
            cfg.train_sizes = sizes.clone();
        }
        if let Some(betas) = &self.betas {
            cfg.betas = betas.clone();
        }
        if let Some(measures) = &self.measures {
            cfg.set("measures", &measures.join(","))?;
        }
        if let Some(partner) = &self.uncertainty {
            cfg.set("hybrid_uncertainty", partner)?;
        }
        if cfg.datasets.is_empty() {
            cfg.datasets = registry::offline_ids()
                .into_iter()
                .map(str::to_string)
                .collect();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Standard(args) => {
            let cfg = args.resolve()?;
            let report = run_standard(&cfg);
            write_standard(&report, &cfg.out_dir)?;
            for ds in &report.datasets {
                let best = ds
                    .results
                    .iter()
                    .filter(|r| r.winner)
                    .map(|r| r.measure.id())
                    .collect::<Vec<_>>()
                    .join(" ");
                println!(
                    "{}: accuracy {:.4}, best measure(s) {best}",
                    ds.dataset, ds.accuracy
                );
            }
            finish("standard", &cfg.out_dir, &report.errors, !report.datasets.is_empty())
        }
        Command::Shift(args) => {
            let cfg = args.resolve()?;
            let report = run_shift(&cfg);
            write_shift(&report, &cfg.out_dir)?;
            println!(
                "{} cells written ({} skipped)",
                report.cells.len(),
                report.skipped.len()
            );
            finish("shift", &cfg.out_dir, &report.errors, !report.cells.is_empty())
        }
        Command::Hybrid(args) => {
            let cfg = args.resolve()?;
            let report = run_hybrid(&cfg);
            write_hybrid(&report, &cfg.out_dir)?;
            for row in &report.rows {
                println!(
                    "{} {}+{}: u {:.4}, r {:.4}, hybrid {:.4} (gamma* {:.2}, gamma_opt {:.2})",
                    row.dataset,
                    row.uncertainty,
                    row.robustness,
                    row.au_uncertainty,
                    row.au_robustness,
                    row.au_hybrid,
                    row.gamma_star,
                    row.gamma_opt
                );
            }
            finish("hybrid", &cfg.out_dir, &report.errors, !report.rows.is_empty())
        }
        Command::GenData { data_dir } => {
            std::fs::create_dir_all(&data_dir)?;
            for entry in registry::entries() {
                if let Some(csv) = entry.generated_csv() {
                    let path = data_dir.join(entry.file_name());
                    std::fs::write(&path, csv)?;
                    println!("wrote {}", path.display());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Datasets => {
            for entry in registry::entries() {
                let kind = match entry.source {
                    registry::DatasetSource::Generated => "generated",
                    registry::DatasetSource::Fetched { .. } => "fetched",
                };
                println!("{:<16} {:<10} {}", entry.id, kind, entry.about);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn finish(
    command: &str,
    out_dir: &std::path::Path,
    errors: &[(String, String)],
    any_succeeded: bool,
) -> anyhow::Result<ExitCode> {
    for (dataset, message) in errors {
        eprintln!("{command}: dataset {dataset} failed: {message}");
    }
    println!("report written to {}", out_dir.display());
    if any_succeeded {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}
