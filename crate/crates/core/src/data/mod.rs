//! Categorical datasets: schema, ingestion, splits, resampling and corruption.
//!
//! All operations are pure given `(input, seed)`; datasets are immutable after
//! construction and cheap to share.

mod loader;

pub use loader::{load_dataset, load_dataset_from, PrepDescriptor, TargetTransform};

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seeding::prng;

/// Human-readable labels recovered from a raw file: the original string for
/// every feature code and class code, plus column names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValueNames {
    /// One name per feature.
    pub feature_names: Vec<String>,
    /// For each feature, the raw value behind each dense code.
    pub feature_values: Vec<Vec<String>>,
    /// The raw value (or derived label) behind each class code.
    pub classes: Vec<String>,
}

/// Shape of a categorical classification problem: per-feature cardinalities
/// and the number of classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    cardinalities: Vec<usize>,
    class_count: usize,
    value_names: Option<ValueNames>,
}

impl FeatureSchema {
    pub fn new(cardinalities: Vec<usize>, class_count: usize) -> Result<Self> {
        Self::with_names(cardinalities, class_count, None)
    }

    pub fn with_names(
        cardinalities: Vec<usize>,
        class_count: usize,
        value_names: Option<ValueNames>,
    ) -> Result<Self> {
        if class_count < 2 {
            return Err(Error::TooFewClasses { found: class_count });
        }
        if let Some(zero) = cardinalities.iter().position(|&c| c == 0) {
            return Err(Error::Schema(format!("feature {zero} has cardinality 0")));
        }
        if let Some(names) = &value_names {
            if names.feature_values.len() != cardinalities.len()
                || names.feature_names.len() != cardinalities.len()
                || names.classes.len() != class_count
                || names
                    .feature_values
                    .iter()
                    .zip(&cardinalities)
                    .any(|(vals, &card)| vals.len() != card)
            {
                return Err(Error::Schema(
                    "value names do not match cardinalities".into(),
                ));
            }
        }
        Ok(Self {
            cardinalities,
            class_count,
            value_names,
        })
    }

    pub fn feature_count(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn value_names(&self) -> Option<&ValueNames> {
        self.value_names.as_ref()
    }

    /// Check a feature vector against the schema.
    pub fn check_features(&self, features: &[usize]) -> Result<()> {
        if features.len() != self.feature_count() {
            return Err(Error::FeatureLengthMismatch {
                found: features.len(),
                expected: self.feature_count(),
            });
        }
        for (i, (&v, &card)) in features.iter().zip(&self.cardinalities).enumerate() {
            if v >= card {
                return Err(Error::FeatureValueOutOfRange {
                    feature: i,
                    value: v,
                    cardinality: card,
                });
            }
        }
        Ok(())
    }

    /// Check a class label against the schema.
    pub fn check_class(&self, class: usize) -> Result<()> {
        if class >= self.class_count {
            return Err(Error::ClassOutOfRange {
                class,
                class_count: self.class_count,
            });
        }
        Ok(())
    }
}

/// One labeled instance: dense feature codes plus a class code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub features: Vec<usize>,
    pub label: usize,
}

/// An immutable categorical dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDataset {
    schema: Arc<FeatureSchema>,
    instances: Vec<Instance>,
}

/// How to divide a dataset into train and test portions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    /// Fraction of the (possibly capped) data that goes to training.
    pub train_fraction: f64,
    /// Maximum combined size of train and test; larger datasets are first
    /// reduced to a uniformly random subset of this size.
    pub size_cap: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            train_fraction: 0.6,
            size_cap: 3000,
            seed,
        }
    }
}

impl CategoricalDataset {
    pub fn new(schema: Arc<FeatureSchema>, instances: Vec<Instance>) -> Result<Self> {
        for inst in &instances {
            schema.check_features(&inst.features)?;
            schema.check_class(inst.label)?;
        }
        Ok(Self { schema, instances })
    }

    /// Build without re-validating instances (internal: inputs already checked).
    fn from_validated(schema: Arc<FeatureSchema>, instances: Vec<Instance>) -> Self {
        Self { schema, instances }
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn schema_arc(&self) -> Arc<FeatureSchema> {
        Arc::clone(&self.schema)
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Split into train and test. If the dataset exceeds `spec.size_cap`, a
    /// uniformly random subset of that size is taken first; the subset is then
    /// shuffled and divided so the training part holds
    /// `round(train_fraction * m)` instances.
    pub fn split(&self, spec: &SplitSpec) -> Result<(Self, Self)> {
        if self.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
            return Err(Error::OutOfRange {
                name: "train_fraction",
                value: spec.train_fraction,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if spec.size_cap == 0 {
            return Err(Error::OutOfRange {
                name: "size_cap",
                value: 0.0,
                lo: 1.0,
                hi: f64::INFINITY,
            });
        }
        let mut rng = prng(spec.seed);
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut rng);
        idx.truncate(self.len().min(spec.size_cap));
        let m = idx.len();
        let train_len = (spec.train_fraction * m as f64).round() as usize;
        let take = |slice: &[usize]| -> Vec<Instance> {
            slice.iter().map(|&i| self.instances[i].clone()).collect()
        };
        let train = Self::from_validated(self.schema_arc(), take(&idx[..train_len]));
        let test = Self::from_validated(self.schema_arc(), take(&idx[train_len..]));
        Ok((train, test))
    }

    /// Sample `len()` instances uniformly with replacement.
    pub fn bootstrap_sample(&self, seed: u64) -> Result<Self> {
        if self.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut rng = prng(seed);
        let n = self.len();
        let instances = (0..n)
            .map(|_| self.instances[rng.random_range(0..n)].clone())
            .collect();
        Ok(Self::from_validated(self.schema_arc(), instances))
    }

    /// Replace each feature value independently with probability `beta` by a
    /// value drawn uniformly from the other options of that feature. Features
    /// with a single value are never altered; labels are untouched.
    pub fn corrupt_features(&self, beta: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::OutOfRange {
                name: "beta",
                value: beta,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let mut rng = prng(seed);
        let cards = self.schema.cardinalities().to_vec();
        let mut instances = self.instances.clone();
        for inst in &mut instances {
            for (i, value) in inst.features.iter_mut().enumerate() {
                if cards[i] < 2 {
                    continue;
                }
                if rng.random::<f64>() < beta {
                    let mut replacement = rng.random_range(0..cards[i] - 1);
                    if replacement >= *value {
                        replacement += 1;
                    }
                    *value = replacement;
                }
            }
        }
        Ok(Self::from_validated(self.schema_arc(), instances))
    }

    /// Partition into `k` folds of near-equal size (sizes differ by at most
    /// one). Returns `(train_part, validation_part)` pairs where each train
    /// part is the complement of its validation part.
    pub fn kfold(&self, k: usize, seed: u64) -> Result<Vec<(Self, Self)>> {
        if k < 2 {
            return Err(Error::OutOfRange {
                name: "k",
                value: k as f64,
                lo: 2.0,
                hi: f64::INFINITY,
            });
        }
        if self.len() < k {
            return Err(Error::DatasetTooSmall {
                size: self.len(),
                required: k,
            });
        }
        let mut rng = prng(seed);
        let n = self.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);

        let base = n / k;
        let extra = n % k;
        let mut folds = Vec::with_capacity(k);
        let mut start = 0;
        for fold in 0..k {
            let size = base + usize::from(fold < extra);
            let validation: Vec<Instance> = idx[start..start + size]
                .iter()
                .map(|&i| self.instances[i].clone())
                .collect();
            let train: Vec<Instance> = idx[..start]
                .iter()
                .chain(&idx[start + size..])
                .map(|&i| self.instances[i].clone())
                .collect();
            folds.push((
                Self::from_validated(self.schema_arc(), train),
                Self::from_validated(self.schema_arc(), validation),
            ));
            start += size;
        }
        Ok(folds)
    }

    /// Keep a uniformly random subset of `n` instances. If `n >= len()` the
    /// dataset is returned unchanged (instance order preserved), which makes a
    /// full-size subsample the identity.
    pub fn subsample(&self, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if n >= self.len() {
            return Ok(self.clone());
        }
        let mut rng = prng(seed);
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut rng);
        idx.truncate(n);
        let instances = idx.iter().map(|&i| self.instances[i].clone()).collect();
        Ok(Self::from_validated(self.schema_arc(), instances))
    }
}
