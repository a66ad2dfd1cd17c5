//! The dataset registry: ids the harness understands out of the box.
//!
//! Generated entries are produced locally (see [`crate::gen`]) and can also be
//! materialized to disk with `reliaq gen-data`; a file of the same name in the
//! data directory always takes precedence. Fetched entries require the raw
//! UCI file in the data directory (see `scripts/fetch_uci.sh`).

use std::path::Path;

use anyhow::{bail, Context};
use reliaq_core::data::{load_dataset, load_dataset_from, CategoricalDataset, PrepDescriptor};

use crate::gen;

/// Where a registry dataset comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetSource {
    /// Reproduced locally from the dataset's defining rule.
    Generated,
    /// Downloaded by the fetch script; `file` is the expected file name.
    Fetched { file: &'static str },
}

/// One known dataset: id, source, and preparation descriptor.
#[derive(Debug, Clone)]
pub struct RegistryEntry {
    pub id: &'static str,
    pub source: DatasetSource,
    pub about: &'static str,
}

const ENTRIES: &[RegistryEntry] = &[
    RegistryEntry {
        id: "tic-tac-toe",
        source: DatasetSource::Generated,
        about: "all 958 final tic-tac-toe boards; positive iff x wins",
    },
    RegistryEntry {
        id: "monks-1",
        source: DatasetSource::Generated,
        about: "MONK's problem 1, full 432-point space",
    },
    RegistryEntry {
        id: "monks-2",
        source: DatasetSource::Generated,
        about: "MONK's problem 2, full 432-point space",
    },
    RegistryEntry {
        id: "monks-3",
        source: DatasetSource::Generated,
        about: "MONK's problem 3, full 432-point space (noise-free rule)",
    },
    RegistryEntry {
        id: "balance-scale",
        source: DatasetSource::Generated,
        about: "all 625 balance-scale states; class by moment comparison",
    },
    RegistryEntry {
        id: "car",
        source: DatasetSource::Fetched { file: "car.data" },
        about: "car evaluation (fetch required)",
    },
    RegistryEntry {
        id: "solar-flare",
        source: DatasetSource::Fetched { file: "flare.data2" },
        about: "solar flare; binary target: at least one flare of any type",
    },
    RegistryEntry {
        id: "student-por",
        source: DatasetSource::Fetched { file: "student-por.csv" },
        about: "student performance (Portuguese); binary pass/fail target",
    },
    RegistryEntry {
        id: "student-mat",
        source: DatasetSource::Fetched { file: "student-mat.csv" },
        about: "student performance (math); binary pass/fail target",
    },
];

pub fn entries() -> &'static [RegistryEntry] {
    ENTRIES
}

pub fn find(id: &str) -> Option<&'static RegistryEntry> {
    ENTRIES.iter().find(|e| e.id == id)
}

/// Ids of the datasets available without any fetching.
pub fn offline_ids() -> Vec<&'static str> {
    ENTRIES
        .iter()
        .filter(|e| e.source == DatasetSource::Generated)
        .map(|e| e.id)
        .collect()
}

impl RegistryEntry {
    pub fn descriptor(&self) -> PrepDescriptor {
        let simple = || PrepDescriptor {
            class_columns: vec!["class".into()],
            ..PrepDescriptor::default()
        };
        match self.id {
            "tic-tac-toe" | "monks-1" | "monks-2" | "monks-3" | "balance-scale" => simple(),
            "car" => PrepDescriptor {
                has_header: false,
                class_columns: vec!["6".into()],
                ..PrepDescriptor::default()
            },
            "solar-flare" => PrepDescriptor {
                delimiter: b' ',
                has_header: false,
                class_columns: vec!["10".into(), "11".into(), "12".into()],
                transform: reliaq_core::data::TargetTransform::AnyCountPositive,
                ..PrepDescriptor::default()
            },
            "student-por" | "student-mat" => PrepDescriptor {
                delimiter: b';',
                class_columns: vec!["G3".into()],
                drop_columns: vec!["age".into(), "absences".into(), "G1".into(), "G2".into()],
                transform: reliaq_core::data::TargetTransform::PassFail { threshold: 10.0 },
                ..PrepDescriptor::default()
            },
            other => unreachable!("unknown registry id {other}"),
        }
    }

    /// File name this entry reads from (or writes to, for generated data).
    pub fn file_name(&self) -> String {
        match self.source {
            DatasetSource::Generated => format!("{}.csv", self.id),
            DatasetSource::Fetched { file } => file.to_string(),
        }
    }

    pub fn generated_csv(&self) -> Option<String> {
        match self.id {
            "tic-tac-toe" => Some(gen::tic_tac_toe_csv()),
            "monks-1" => Some(gen::monks_csv(1)),
            "monks-2" => Some(gen::monks_csv(2)),
            "monks-3" => Some(gen::monks_csv(3)),
            "balance-scale" => Some(gen::balance_scale_csv()),
            _ => None,
        }
    }
}

/// Load a registry dataset, preferring an on-disk file under `data_dir`.
pub fn load(id: &str, data_dir: &Path) -> anyhow::Result<CategoricalDataset> {
    let Some(entry) = find(id) else {
        bail!(
            "unknown dataset {id:?}; known ids: {}",
            ENTRIES
                .iter()
                .map(|e| e.id)
                .collect::<Vec<_>>()
                .join(", ")
        );
    };
    let descriptor = entry.descriptor();
    let path = data_dir.join(entry.file_name());
    if path.is_file() {
        return load_dataset(&path, &descriptor)
            .with_context(|| format!("loading {id} from {}", path.display()));
    }
    match entry.generated_csv() {
        Some(csv) => load_dataset_from(csv.as_bytes(), &descriptor, entry.id)
            .with_context(|| format!("generating {id}")),
        None => bail!(
            "dataset {id} needs {} in {}; run scripts/fetch_uci.sh first",
            entry.file_name(),
            data_dir.display()
        ),
    }
}
