//! Experiment configuration: defaults, `key = value` config files, and the
//! merge with command-line flags (flags win).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use reliaq_core::measure::Measure;

/// Fully resolved settings for one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<String>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub data_dir: PathBuf,
    /// Repetitions per cell in the shift setting.
    pub repetitions: usize,
    /// Training-set sizes in the shift setting.
    pub train_sizes: Vec<usize>,
    /// Feature-noise rates in the shift setting.
    pub betas: Vec<f64>,
    pub measures: Vec<Measure>,
    pub alpha_grid: Vec<f64>,
    pub ensemble_size: usize,
    pub cv_folds: usize,
    pub train_fraction: f64,
    pub size_cap: usize,
    /// Uncertainty partner for the hybrid setting.
    pub hybrid_uncertainty: Measure,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            seed: 42,
            out_dir: PathBuf::from("out"),
            data_dir: PathBuf::from("data"),
            repetitions: 7,
            train_sizes: vec![50, 100, 200],
            betas: vec![0.0, 0.10, 0.20],
            measures: Measure::ALL.to_vec(),
            alpha_grid: vec![0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0],
            ensemble_size: 10,
            cv_folds: 5,
            train_fraction: 0.6,
            size_cap: 3000,
            hybrid_uncertainty: Measure::AleatoricUncertainty,
        }
    }
}

impl ExperimentConfig {
    /// Apply one `key = value` assignment (config-file key set).
    pub fn set(&mut self, key: &str, value: &str) -> anyhow::Result<()> {
        match key {
            "datasets" | "dataset" => {
                self.datasets = split_list(value).map(str::to_string).collect();
            }
            "seed" => self.seed = value.parse().context("seed must be a u64")?,
            "out" => self.out_dir = PathBuf::from(value),
            "data_dir" => self.data_dir = PathBuf::from(value),
            "reps" => self.repetitions = value.parse().context("reps must be an integer")?,
            "sizes" => {
                self.train_sizes = split_list(value)
                    .map(|s| s.parse().context("sizes must be integers"))
                    .collect::<anyhow::Result<_>>()?;
            }
            "betas" => {
                self.betas = split_list(value)
                    .map(|s| s.parse().context("betas must be numbers"))
                    .collect::<anyhow::Result<_>>()?;
            }
            "measures" => {
                self.measures = split_list(value)
                    .map(|s| {
                        Measure::from_id(s)
                            .ok_or_else(|| anyhow::anyhow!("unknown measure {s:?}"))
                    })
                    .collect::<anyhow::Result<_>>()?;
            }
            "alpha_grid" => {
                self.alpha_grid = split_list(value)
                    .map(|s| s.parse().context("alpha_grid must be numbers"))
                    .collect::<anyhow::Result<_>>()?;
            }
            "ensemble_size" => {
                self.ensemble_size = value.parse().context("ensemble_size must be an integer")?;
            }
            "folds" => self.cv_folds = value.parse().context("folds must be an integer")?,
            "train_fraction" => {
                self.train_fraction = value.parse().context("train_fraction must be a number")?;
            }
            "size_cap" => self.size_cap = value.parse().context("size_cap must be an integer")?,
            "hybrid_uncertainty" => {
                self.hybrid_uncertainty = Measure::from_id(value)
                    .ok_or_else(|| anyhow::anyhow!("unknown measure {value:?}"))?;
            }
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Parse a config file of `key = value` lines (# comments allowed).
    pub fn apply_file(&mut self, path: &Path) -> anyhow::Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        for (number, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected key = value", path.display(), number + 1);
            };
            self.set(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), number + 1))?;
        }
        Ok(())
    }

    /// Validate cross-field constraints.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.repetitions == 0 {
            bail!("reps must be at least 1");
        }
        if self.betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
            bail!("betas must lie in [0, 1]");
        }
        if self.measures.is_empty() {
            bail!("at least one measure is required");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            bail!("train_fraction must lie strictly between 0 and 1");
        }
        Ok(())
    }

    /// Deterministic `key = value` echo for the manifest.
    pub fn echo(&self) -> String {
        let measures: Vec<&str> = self.measures.iter().map(|m| m.id()).collect();
        let mut lines = vec![
            format!("datasets = {}", self.datasets.join(",")),
            format!("seed = {}", self.seed),
            format!("out = {}", self.out_dir.display()),
            format!("data_dir = {}", self.data_dir.display()),
            format!("reps = {}", self.repetitions),
            format!(
                "sizes = {}",
                self.train_sizes
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            format!(
                "betas = {}",
                self.betas
                    .iter()
                    .map(|b| b.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            format!("measures = {}", measures.join(",")),
            format!(
                "alpha_grid = {}",
                self.alpha_grid
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            format!("ensemble_size = {}", self.ensemble_size),
            format!("folds = {}", self.cv_folds),
            format!("train_fraction = {}", self.train_fraction),
            format!("size_cap = {}", self.size_cap),
            format!("hybrid_uncertainty = {}", self.hybrid_uncertainty.id()),
        ];
        lines.push(String::new());
        lines.join("\n")
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}
