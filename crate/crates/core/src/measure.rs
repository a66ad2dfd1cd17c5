//! The eight reliability measures behind one identifier, plus batch scoring
//! of a test set.

use crate::data::CategoricalDataset;
use crate::error::{Error, Result};
use crate::evaluation::{
    order_instances_named, InstanceOrdering, RejectDirection, ScoredInstance,
};
use crate::model::{argmax_lowest, GenerativeClassifier, NbcModel};
use crate::robustness::{global_robustness, local_robustness};
use crate::uncertainty::{entropy_bits, from_conditional, Ensemble};

/// A per-instance reliability measure. The short ids (`u_max`, `u_conf`,
/// `u_H`, `u_t`, `u_a`, `u_e`, `r_glob`, `r_loc`) key all report files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// Probability that the predicted class is wrong (`u_max`).
    MaxUncertainty,
    /// Margin between the two most probable classes (`u_conf`).
    ConfidenceMargin,
    /// Entropy of the conditional class distribution (`u_H`).
    PredictionEntropy,
    /// Entropy of the ensemble-averaged conditional (`u_t`).
    TotalUncertainty,
    /// Mean entropy of the ensemble members' conditionals (`u_a`).
    AleatoricUncertainty,
    /// Total minus aleatoric (`u_e`).
    EpistemicUncertainty,
    /// Closed-form contamination radius of the joint distribution (`r_glob`).
    GlobalRobustness,
    /// Contamination radius of the local parameters (`r_loc`).
    LocalRobustness,
}

impl Measure {
    pub const ALL: [Measure; 8] = [
        Measure::MaxUncertainty,
        Measure::ConfidenceMargin,
        Measure::PredictionEntropy,
        Measure::TotalUncertainty,
        Measure::AleatoricUncertainty,
        Measure::EpistemicUncertainty,
        Measure::GlobalRobustness,
        Measure::LocalRobustness,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Measure::MaxUncertainty => "u_max",
            Measure::ConfidenceMargin => "u_conf",
            Measure::PredictionEntropy => "u_H",
            Measure::TotalUncertainty => "u_t",
            Measure::AleatoricUncertainty => "u_a",
            Measure::EpistemicUncertainty => "u_e",
            Measure::GlobalRobustness => "r_glob",
            Measure::LocalRobustness => "r_loc",
        }
    }

    pub fn from_id(id: &str) -> Option<Measure> {
        Measure::ALL.into_iter().find(|m| m.id() == id)
    }

    /// Rejection direction: high uncertainty is rejected first, low margin
    /// and low robustness are rejected first. The stored values are never
    /// negated; only the ordering direction differs.
    pub fn rejection_direction(self) -> RejectDirection {
        match self {
            Measure::ConfidenceMargin
            | Measure::GlobalRobustness
            | Measure::LocalRobustness => RejectDirection::LowFirst,
            _ => RejectDirection::HighFirst,
        }
    }

    pub fn needs_ensemble(self) -> bool {
        matches!(
            self,
            Measure::TotalUncertainty
                | Measure::AleatoricUncertainty
                | Measure::EpistemicUncertainty
        )
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// Per-instance values of a set of measures over one dataset, plus prediction
/// correctness.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    measures: Vec<(Measure, Vec<f64>)>,
    correct: Vec<bool>,
}

impl ScoreTable {
    pub fn measures(&self) -> impl Iterator<Item = Measure> + '_ {
        self.measures.iter().map(|(m, _)| *m)
    }

    pub fn values(&self, measure: Measure) -> Result<&[f64]> {
        self.measures
            .iter()
            .find(|(m, _)| *m == measure)
            .map(|(_, v)| v.as_slice())
            .ok_or(Error::MissingEnsemble {
                measure: measure.id(),
            })
    }

    pub fn correct(&self) -> &[bool] {
        &self.correct
    }

    pub fn len(&self) -> usize {
        self.correct.len()
    }

    pub fn is_empty(&self) -> bool {
        self.correct.is_empty()
    }

    /// Rejection ordering for one measure, least reliable first.
    pub fn ordering(&self, measure: Measure) -> Result<InstanceOrdering> {
        let values = self.values(measure)?;
        let scored: Vec<ScoredInstance> = values
            .iter()
            .zip(&self.correct)
            .enumerate()
            .map(|(index, (&score, &correct))| ScoredInstance {
                index,
                score,
                correct,
            })
            .collect();
        order_instances_named(&scored, measure.rejection_direction(), measure.id())
    }
}

/// Evaluate `measures` for every instance of `data`. An ensemble is required
/// exactly when an ensemble-based measure is requested.
pub fn score_dataset(
    model: &NbcModel,
    ensemble: Option<&Ensemble>,
    data: &CategoricalDataset,
    measures: &[Measure],
) -> Result<ScoreTable> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(needy) = measures.iter().find(|m| m.needs_ensemble()) {
        if ensemble.is_none() {
            return Err(Error::MissingEnsemble { measure: needy.id() });
        }
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(data.len()); measures.len()];
    let mut correct = Vec::with_capacity(data.len());
    let wants_conditional = measures.iter().any(|m| {
        matches!(
            m,
            Measure::MaxUncertainty | Measure::ConfidenceMargin | Measure::PredictionEntropy
        )
    });
    let wants_decomposition = measures.iter().any(|m| m.needs_ensemble());

    for inst in data.instances() {
        let features = &inst.features;
        let conditional = if wants_conditional {
            Some(model.conditional(features)?)
        } else {
            None
        };
        let decomposition = if wants_decomposition {
            Some(ensemble.expect("checked above").decompose(features)?)
        } else {
            None
        };
        for (column, measure) in columns.iter_mut().zip(measures) {
            let value = match measure {
                Measure::MaxUncertainty => {
                    from_conditional::misclassification(conditional.as_ref().expect("computed"))
                }
                Measure::ConfidenceMargin => {
                    from_conditional::margin(conditional.as_ref().expect("computed"))
                }
                Measure::PredictionEntropy => {
                    entropy_bits(conditional.as_ref().expect("computed"))
                }
                Measure::TotalUncertainty => decomposition.expect("computed").total,
                Measure::AleatoricUncertainty => decomposition.expect("computed").aleatoric,
                Measure::EpistemicUncertainty => decomposition.expect("computed").epistemic,
                Measure::GlobalRobustness => global_robustness(model, features)?,
                Measure::LocalRobustness => local_robustness(model, features)?,
            };
            column.push(value);
        }
        let predicted = match &conditional {
            Some(p) => argmax_lowest(p).0,
            None => model.predict(features)?,
        };
        correct.push(predicted == inst.label);
    }

    Ok(ScoreTable {
        measures: measures.iter().copied().zip(columns).collect(),
        correct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureSchema, Instance};
    use std::sync::Arc;

    fn toy_data() -> CategoricalDataset {
        let schema = Arc::new(FeatureSchema::new(vec![2, 2], 2).unwrap());
        let instances = (0..12)
            .map(|i| Instance {
                features: vec![i % 2, (i / 2) % 2],
                label: usize::from(i % 2 == 0),
            })
            .collect();
        CategoricalDataset::new(schema, instances).unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for m in Measure::ALL {
            assert_eq!(Measure::from_id(m.id()), Some(m));
        }
        assert_eq!(Measure::from_id("nope"), None);
    }

    #[test]
    fn directions_follow_orientation() {
        assert_eq!(
            Measure::MaxUncertainty.rejection_direction(),
            RejectDirection::HighFirst
        );
        assert_eq!(
            Measure::ConfidenceMargin.rejection_direction(),
            RejectDirection::LowFirst
        );
        assert_eq!(
            Measure::LocalRobustness.rejection_direction(),
            RejectDirection::LowFirst
        );
    }

    #[test]
    fn scoring_all_measures_fills_every_column() {
        let data = toy_data();
        let model = NbcModel::fit(&data, 1.0).unwrap();
        let ensemble = Ensemble::fit(&data, 3, 1.0, 5).unwrap();
        let table = score_dataset(&model, Some(&ensemble), &data, &Measure::ALL).unwrap();
        assert_eq!(table.len(), data.len());
        for m in Measure::ALL {
            let values = table.values(m).unwrap();
            assert_eq!(values.len(), data.len());
            assert!(values.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn ensemble_measures_require_an_ensemble() {
        let data = toy_data();
        let model = NbcModel::fit(&data, 1.0).unwrap();
        let err = score_dataset(&model, None, &data, &[Measure::TotalUncertainty]);
        assert!(matches!(err, Err(Error::MissingEnsemble { .. })));
        // Non-ensemble measures work without one.
        assert!(score_dataset(&model, None, &data, &[Measure::GlobalRobustness]).is_ok());
    }

    #[test]
    fn ordering_respects_measure_direction() {
        let data = toy_data();
        let model = NbcModel::fit(&data, 1.0).unwrap();
        let table =
            score_dataset(&model, None, &data, &[Measure::MaxUncertainty, Measure::GlobalRobustness])
                .unwrap();
        let by_uncertainty = table.ordering(Measure::MaxUncertainty).unwrap();
        let by_robustness = table.ordering(Measure::GlobalRobustness).unwrap();
        let u = table.values(Measure::MaxUncertainty).unwrap();
        let r = table.values(Measure::GlobalRobustness).unwrap();
        let first_u = by_uncertainty.order()[0];
        let first_r = by_robustness.order()[0];
        assert!(u.iter().all(|&v| v <= u[first_u]));
        assert!(r.iter().all(|&v| v >= r[first_r]));
    }
}
