//! Naive Bayes over categorical features, behind a classifier-generic
//! interface that the reliability measures consume.

use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::data::{CategoricalDataset, FeatureSchema};
use crate::error::{Error, Result};

/// A probabilistic generative classifier over discrete features: anything that
/// can evaluate joint class/feature probabilities and predict by Bayes' rule.
pub trait GenerativeClassifier {
    fn schema(&self) -> &FeatureSchema;

    /// P(class, features).
    fn joint_prob(&self, class: usize, features: &[usize]) -> Result<f64>;

    /// ln P(class, features); `-inf` when the joint probability is zero.
    fn log_joint(&self, class: usize, features: &[usize]) -> Result<f64>;

    /// P(class | features) for every class, via Bayes' rule.
    ///
    /// Fails with [`Error::DegenerateEvidence`] when every class has zero
    /// joint probability (possible only for unsmoothed models).
    fn conditional(&self, features: &[usize]) -> Result<Vec<f64>> {
        let logs = self.log_joints(features)?;
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::DegenerateEvidence);
        }
        let mut weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(weights)
    }

    /// The class maximizing the conditional probability; ties go to the lowest
    /// class index.
    fn predict(&self, features: &[usize]) -> Result<usize> {
        let logs = self.log_joints(features)?;
        let (argmax, max) = argmax_lowest(&logs);
        if max == f64::NEG_INFINITY {
            return Err(Error::DegenerateEvidence);
        }
        Ok(argmax)
    }

    /// ln P(class, features) for every class.
    fn log_joints(&self, features: &[usize]) -> Result<Vec<f64>> {
        (0..self.schema().class_count())
            .map(|c| self.log_joint(c, features))
            .collect()
    }
}

/// Argmax with lowest-index tie-breaking.
pub(crate) fn argmax_lowest(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    (best, values[best])
}

/// A fitted Naive Bayes classifier: class prior plus per-class per-feature
/// conditional probability tables.
#[derive(Debug, Clone, PartialEq)]
pub struct NbcModel {
    schema: Arc<FeatureSchema>,
    class_prior: Vec<f64>,
    /// `conditionals[class][feature][value]`
    conditionals: Vec<Vec<Vec<f64>>>,
    smoothing: f64,
}

impl NbcModel {
    /// Fit on a training set with additive smoothing `alpha`:
    /// prior(c) = (count(c) + alpha) / (m + alpha * |C|) and
    /// P(f_i = v | c) = (count(c, f_i = v) + alpha) / (count(c) + alpha * |F_i|).
    pub fn fit(train: &CategoricalDataset, alpha: f64) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        let schema = train.schema_arc();
        let classes = schema.class_count();
        let cards = schema.cardinalities();
        let m = train.len() as f64;

        let mut class_counts = vec![0usize; classes];
        let mut value_counts: Vec<Vec<Vec<usize>>> = (0..classes)
            .map(|_| cards.iter().map(|&c| vec![0usize; c]).collect())
            .collect();
        for inst in train.instances() {
            class_counts[inst.label] += 1;
            for (i, &v) in inst.features.iter().enumerate() {
                value_counts[inst.label][i][v] += 1;
            }
        }

        let class_prior: Vec<f64> = class_counts
            .iter()
            .map(|&n| (n as f64 + alpha) / (m + alpha * classes as f64))
            .collect();
        let conditionals: Vec<Vec<Vec<f64>>> = (0..classes)
            .map(|c| {
                cards
                    .iter()
                    .enumerate()
                    .map(|(i, &card)| {
                        let denom = class_counts[c] as f64 + alpha * card as f64;
                        if denom == 0.0 {
                            // Unsmoothed fit with an empty class: the prior is
                            // zero, so any normalized row works; use uniform.
                            vec![1.0 / card as f64; card]
                        } else {
                            value_counts[c][i]
                                .iter()
                                .map(|&n| (n as f64 + alpha) / denom)
                                .collect()
                        }
                    })
                    .collect()
            })
            .collect();

        Ok(Self {
            schema,
            class_prior,
            conditionals,
            smoothing: alpha,
        })
    }

    /// Assemble a model from explicit tables, validating normalization.
    pub fn from_parts(
        schema: Arc<FeatureSchema>,
        class_prior: Vec<f64>,
        conditionals: Vec<Vec<Vec<f64>>>,
        smoothing: f64,
    ) -> Result<Self> {
        let classes = schema.class_count();
        let cards = schema.cardinalities();
        let normalized = |v: &[f64]| {
            v.iter().all(|&p| (0.0..=1.0 + 1e-12).contains(&p))
                && (v.iter().sum::<f64>() - 1.0).abs() <= 1e-9
        };
        if class_prior.len() != classes || !normalized(&class_prior) {
            return Err(Error::Schema("class prior is not a distribution".into()));
        }
        if conditionals.len() != classes {
            return Err(Error::Schema("conditional table has wrong class count".into()));
        }
        for per_class in &conditionals {
            if per_class.len() != cards.len() {
                return Err(Error::Schema(
                    "conditional table has wrong feature count".into(),
                ));
            }
            for (i, row) in per_class.iter().enumerate() {
                if row.len() != cards[i] || !normalized(row) {
                    return Err(Error::Schema(format!(
                        "conditional row for feature {i} is not a distribution"
                    )));
                }
            }
        }
        Ok(Self {
            schema,
            class_prior,
            conditionals,
            smoothing,
        })
    }

    pub fn class_prior(&self) -> &[f64] {
        &self.class_prior
    }

    /// P(f_i = value | class).
    pub fn conditional_prob(&self, class: usize, feature: usize, value: usize) -> f64 {
        self.conditionals[class][feature][value]
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    /// Fraction of instances whose predicted class matches the label.
    pub fn accuracy(&self, data: &CategoricalDataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut hits = 0usize;
        for inst in data.instances() {
            if self.predict(&inst.features)? == inst.label {
                hits += 1;
            }
        }
        Ok(hits as f64 / data.len() as f64)
    }

    /// Write the model as line-oriented text with shortest-roundtrip decimal
    /// floats; [`NbcModel::read_text`] restores it exactly. Value-name
    /// metadata is presentational and not serialized.
    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "nbc-model v1")?;
        writeln!(w, "smoothing {}", self.smoothing)?;
        writeln!(w, "classes {}", self.schema.class_count())?;
        let cards: Vec<String> = self
            .schema
            .cardinalities()
            .iter()
            .map(|c| c.to_string())
            .collect();
        writeln!(w, "cardinalities {}", cards.join(" "))?;
        writeln!(w, "prior {}", join_floats(&self.class_prior))?;
        for (c, per_class) in self.conditionals.iter().enumerate() {
            for (i, row) in per_class.iter().enumerate() {
                writeln!(w, "cond {c} {i} {}", join_floats(row))?;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("write to vec");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Parse the text format produced by [`NbcModel::write_text`].
    pub fn read_text(reader: impl BufRead) -> Result<Self> {
        let bad = |record: usize, message: String| Error::Parse {
            origin: "nbc-model text".into(),
            record,
            message,
        };
        let mut lines = reader.lines().enumerate();
        let mut next_line = |expect: &str| -> Result<(usize, Vec<String>)> {
            loop {
                match lines.next() {
                    Some((n, Ok(line))) => {
                        if line.trim().is_empty() {
                            continue;
                        }
                        let fields: Vec<String> =
                            line.split_whitespace().map(str::to_string).collect();
                        if fields[0] != expect {
                            return Err(bad(n + 1, format!("expected {expect:?}, got {line:?}")));
                        }
                        return Ok((n, fields));
                    }
                    Some((n, Err(e))) => return Err(bad(n + 1, e.to_string())),
                    None => return Err(bad(0, format!("missing {expect:?} line"))),
                }
            }
        };

        let (_, magic) = next_line("nbc-model")?;
        if magic.get(1).map(String::as_str) != Some("v1") {
            return Err(bad(1, "unsupported model version".into()));
        }
        let (n, smoothing) = next_line("smoothing")?;
        let smoothing: f64 = smoothing
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(n + 1, "bad smoothing".into()))?;
        let (n, classes) = next_line("classes")?;
        let classes: usize = classes
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(n + 1, "bad class count".into()))?;
        let (n, cards) = next_line("cardinalities")?;
        let cards: Vec<usize> = cards[1..]
            .iter()
            .map(|s| s.parse().map_err(|_| bad(n + 1, "bad cardinality".into())))
            .collect::<Result<_>>()?;
        let (n, prior) = next_line("prior")?;
        let class_prior: Vec<f64> = prior[1..]
            .iter()
            .map(|s| s.parse().map_err(|_| bad(n + 1, "bad prior".into())))
            .collect::<Result<_>>()?;

        let mut conditionals: Vec<Vec<Vec<f64>>> = (0..classes)
            .map(|_| cards.iter().map(|&c| vec![0.0; c]).collect())
            .collect();
        for _ in 0..classes * cards.len() {
            let (n, fields) = next_line("cond")?;
            let parse_idx = |s: Option<&String>| -> Result<usize> {
                s.and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad(n + 1, "bad cond indices".into()))
            };
            let c = parse_idx(fields.get(1))?;
            let i = parse_idx(fields.get(2))?;
            if c >= classes || i >= cards.len() {
                return Err(bad(n + 1, "cond indices out of range".into()));
            }
            let row: Vec<f64> = fields[3..]
                .iter()
                .map(|s| s.parse().map_err(|_| bad(n + 1, "bad probability".into())))
                .collect::<Result<_>>()?;
            if row.len() != cards[i] {
                return Err(bad(n + 1, "cond row has wrong length".into()));
            }
            conditionals[c][i] = row;
        }

        let schema = Arc::new(FeatureSchema::new(cards, classes)?);
        Self::from_parts(schema, class_prior, conditionals, smoothing)
    }
}

impl GenerativeClassifier for NbcModel {
    fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    fn joint_prob(&self, class: usize, features: &[usize]) -> Result<f64> {
        Ok(self.log_joint(class, features)?.exp())
    }

    fn log_joint(&self, class: usize, features: &[usize]) -> Result<f64> {
        self.schema.check_class(class)?;
        self.schema.check_features(features)?;
        let mut log = self.class_prior[class].ln();
        for (i, &v) in features.iter().enumerate() {
            log += self.conditionals[class][i][v].ln();
        }
        Ok(log)
    }
}

/// Pick the smoothing parameter with the best mean validation accuracy across
/// `k` folds; ties go to the smaller alpha. The caller then refits on the full
/// training set with the winner.
pub fn tune_smoothing(
    train: &CategoricalDataset,
    grid: &[f64],
    k: usize,
    seed: u64,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let folds = train.kfold(k, seed)?;
    let mut best: Option<(f64, f64)> = None; // (alpha, mean accuracy)
    for &alpha in grid {
        let mut total = 0.0;
        for (part, validation) in &folds {
            let model = NbcModel::fit(part, alpha)?;
            total += fold_accuracy(&model, validation);
        }
        let mean = total / folds.len() as f64;
        let better = match best {
            None => true,
            Some((best_alpha, best_mean)) => {
                mean > best_mean || (mean == best_mean && alpha < best_alpha)
            }
        };
        if better {
            best = Some((alpha, mean));
        }
    }
    Ok(best.expect("nonempty grid").0)
}

/// Validation accuracy that scores degenerate-evidence instances as wrong
/// rather than failing the whole fold (possible only when alpha = 0).
fn fold_accuracy(model: &NbcModel, validation: &CategoricalDataset) -> f64 {
    if validation.is_empty() {
        return 0.0;
    }
    let hits = validation
        .instances()
        .iter()
        .filter(|inst| matches!(model.predict(&inst.features), Ok(c) if c == inst.label))
        .count();
    hits as f64 / validation.len() as f64
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}
