//! Per-instance uncertainty measures, including the bootstrap-ensemble
//! machinery behind the total/aleatoric/epistemic entropy decomposition.

use crate::data::CategoricalDataset;
use crate::error::{Error, Result};
use crate::model::{argmax_lowest, GenerativeClassifier, NbcModel};
use crate::seeding::child_seed;

/// Probabilities below this are treated as zero inside entropy terms.
const ENTROPY_FLOOR: f64 = 1e-300;

/// Epistemic values in `[-1e-12, 0)` are rounding noise and clamp to zero.
const EPISTEMIC_CLAMP: f64 = 1e-12;

/// Shannon entropy in bits, with `0 * log2(0) := 0`.
pub fn entropy_bits(dist: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in dist {
        if p > ENTROPY_FLOOR {
            h -= p * p.log2();
        }
    }
    h
}

/// Probability that the predicted class is wrong under the model's own
/// conditional: `1 - P(predicted | features)`.
pub fn misclassification_probability<C: GenerativeClassifier + ?Sized>(
    model: &C,
    features: &[usize],
) -> Result<f64> {
    Ok(from_conditional::misclassification(
        &model.conditional(features)?,
    ))
}

/// Margin of confidence: gap between the two largest conditional class
/// probabilities. Larger margins mean more reliable predictions.
pub fn confidence_margin<C: GenerativeClassifier + ?Sized>(
    model: &C,
    features: &[usize],
) -> Result<f64> {
    Ok(from_conditional::margin(&model.conditional(features)?))
}

/// Shannon entropy (bits) of the conditional class distribution.
pub fn prediction_entropy<C: GenerativeClassifier + ?Sized>(
    model: &C,
    features: &[usize],
) -> Result<f64> {
    Ok(entropy_bits(&model.conditional(features)?))
}

/// Measure kernels on an already-computed conditional distribution, shared by
/// the model-level functions above and the batch scorer.
pub(crate) mod from_conditional {
    use super::*;

    pub fn misclassification(conditional: &[f64]) -> f64 {
        1.0 - conditional[argmax_lowest(conditional).0]
    }

    pub fn margin(conditional: &[f64]) -> f64 {
        let predicted = argmax_lowest(conditional).0;
        let runner_up = conditional
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != predicted)
            .map(|(_, &p)| p)
            .fold(f64::NEG_INFINITY, f64::max);
        conditional[predicted] - runner_up
    }
}

/// A bag of independently trained models, each fit on a bootstrap resample of
/// the same training set.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<NbcModel>,
    seeds: Vec<u64>,
}

/// The entropy decomposition of an ensemble's prediction: `total` is the
/// entropy of the averaged conditional, `aleatoric` the average of member
/// entropies, `epistemic` their difference (nonnegative by Jensen).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyDecomposition {
    pub total: f64,
    pub aleatoric: f64,
    pub epistemic: f64,
}

impl Ensemble {
    /// Train `size` models, each on its own bootstrap resample. Member seeds
    /// are derived deterministically from `seed`, so identical calls produce
    /// identical ensembles.
    pub fn fit(train: &CategoricalDataset, size: usize, alpha: f64, seed: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::OutOfRange {
                name: "ensemble size",
                value: 0.0,
                lo: 1.0,
                hi: f64::INFINITY,
            });
        }
        let mut members = Vec::with_capacity(size);
        let mut seeds = Vec::with_capacity(size);
        for index in 0..size {
            let member_seed = child_seed(seed, &["bootstrap", &index.to_string()]);
            let resample = train.bootstrap_sample(member_seed)?;
            members.push(NbcModel::fit(&resample, alpha)?);
            seeds.push(member_seed);
        }
        Ok(Self { members, seeds })
    }

    pub fn members(&self) -> &[NbcModel] {
        &self.members
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Average of the members' conditional class distributions.
    pub fn mean_conditional(&self, features: &[usize]) -> Result<Vec<f64>> {
        Ok(self.conditionals_and_mean(features)?.1)
    }

    /// Compute the total/aleatoric/epistemic decomposition for one instance.
    /// Summation runs member index ascending, class index ascending, so the
    /// result never depends on scheduling.
    pub fn decompose(&self, features: &[usize]) -> Result<UncertaintyDecomposition> {
        let (member_conditionals, mean) = self.conditionals_and_mean(features)?;
        let total = entropy_bits(&mean);
        let aleatoric = member_conditionals
            .iter()
            .map(|p| entropy_bits(p))
            .sum::<f64>()
            / self.size() as f64;
        let mut epistemic = total - aleatoric;
        if (-EPISTEMIC_CLAMP..0.0).contains(&epistemic) {
            epistemic = 0.0;
        }
        Ok(UncertaintyDecomposition {
            total,
            aleatoric,
            epistemic,
        })
    }

    fn conditionals_and_mean(&self, features: &[usize]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let classes = self.members[0].schema().class_count();
        let mut member_conditionals = Vec::with_capacity(self.size());
        let mut mean = vec![0.0; classes];
        for (index, member) in self.members.iter().enumerate() {
            let p = member
                .conditional(features)
                .map_err(|source| Error::EnsembleMember {
                    index,
                    source: Box::new(source),
                })?;
            for (m, &v) in mean.iter_mut().zip(&p) {
                *m += v;
            }
            member_conditionals.push(p);
        }
        for m in &mut mean {
            *m /= self.size() as f64;
        }
        Ok((member_conditionals, mean))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureSchema, Instance};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn dataset(cards: Vec<usize>, classes: usize, rows: &[(&[usize], usize)]) -> CategoricalDataset {
        let schema = Arc::new(FeatureSchema::new(cards, classes).unwrap());
        let instances = rows
            .iter()
            .map(|(f, c)| Instance {
                features: f.to_vec(),
                label: *c,
            })
            .collect();
        CategoricalDataset::new(schema, instances).unwrap()
    }

    /// A stub classifier with a fixed conditional, for measure kernels.
    struct Fixed {
        schema: FeatureSchema,
        conditional: Vec<f64>,
    }

    impl Fixed {
        fn new(conditional: Vec<f64>) -> Self {
            Self {
                schema: FeatureSchema::new(vec![1], conditional.len()).unwrap(),
                conditional,
            }
        }
    }

    impl GenerativeClassifier for Fixed {
        fn schema(&self) -> &FeatureSchema {
            &self.schema
        }
        fn joint_prob(&self, class: usize, _features: &[usize]) -> Result<f64> {
            Ok(self.conditional[class])
        }
        fn log_joint(&self, class: usize, _features: &[usize]) -> Result<f64> {
            Ok(self.conditional[class].ln())
        }
        fn conditional(&self, _features: &[usize]) -> Result<Vec<f64>> {
            Ok(self.conditional.clone())
        }
    }

    #[test]
    fn misclassification_of_certain_prediction_is_zero() {
        let model = Fixed::new(vec![1.0, 0.0]);
        assert_eq!(misclassification_probability(&model, &[0]).unwrap(), 0.0);
    }

    #[test]
    fn misclassification_of_uniform_four_classes() {
        let model = Fixed::new(vec![0.25; 4]);
        assert!((misclassification_probability(&model, &[0]).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn misclassification_direct_evaluation() {
        let model = Fixed::new(vec![0.6, 0.4]);
        assert!((misclassification_probability(&model, &[0]).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn margin_examples() {
        assert_eq!(
            confidence_margin(&Fixed::new(vec![1.0, 0.0]), &[0]).unwrap(),
            1.0
        );
        assert_eq!(
            confidence_margin(&Fixed::new(vec![0.5, 0.5]), &[0]).unwrap(),
            0.0
        );
        let three = Fixed::new(vec![0.5, 0.3, 0.2]);
        assert!((confidence_margin(&three, &[0]).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_bits(&[1.0, 0.0]), 0.0);
        assert!((entropy_bits(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
        let expected = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((entropy_bits(&[0.75, 0.25]) - expected).abs() < 1e-15);
        assert!((expected - 0.8112781244591328).abs() < 1e-12);
    }

    #[test]
    fn binary_identity_margin_equals_one_minus_twice_misclassification() {
        for p in [0.5, 0.6, 0.75, 0.9, 1.0] {
            let model = Fixed::new(vec![p, 1.0 - p]);
            let margin = confidence_margin(&model, &[0]).unwrap();
            let miss = misclassification_probability(&model, &[0]).unwrap();
            assert!((margin - (1.0 - 2.0 * miss)).abs() < 1e-12);
        }
    }

    #[test]
    fn singleton_ensemble_fits_one_bootstrap() {
        let data = dataset(vec![2], 2, &[(&[0], 0), (&[1], 1), (&[0], 0)]);
        let ensemble = Ensemble::fit(&data, 1, 1.0, 3).unwrap();
        assert_eq!(ensemble.size(), 1);
        let d = ensemble.decompose(&[0]).unwrap();
        assert_eq!(d.epistemic, 0.0);
        assert!((d.total - d.aleatoric).abs() < 1e-15);
    }

    #[test]
    fn equal_seeds_give_identical_ensembles() {
        let data = dataset(
            vec![2, 2],
            2,
            &[(&[0, 0], 0), (&[1, 1], 1), (&[0, 1], 0), (&[1, 0], 1)],
        );
        let a = Ensemble::fit(&data, 10, 0.5, 77).unwrap();
        let b = Ensemble::fit(&data, 10, 0.5, 77).unwrap();
        assert_eq!(a.seeds(), b.seeds());
        for (ma, mb) in a.members().iter().zip(b.members()) {
            assert_eq!(ma.class_prior(), mb.class_prior());
        }
    }

    #[test]
    fn bootstrap_members_actually_differ() {
        let rows: Vec<(Vec<usize>, usize)> =
            (0..100).map(|i| (vec![i % 2, (i / 2) % 2], i % 2)).collect();
        let refs: Vec<(&[usize], usize)> =
            rows.iter().map(|(f, c)| (f.as_slice(), *c)).collect();
        let data = dataset(vec![2, 2], 2, &refs);
        let ensemble = Ensemble::fit(&data, 10, 1.0, 5).unwrap();
        let priors: Vec<&[f64]> = ensemble.members().iter().map(|m| m.class_prior()).collect();
        assert!(
            priors.windows(2).any(|w| w[0] != w[1]),
            "all 10 bootstrap priors identical"
        );
    }

    #[test]
    fn identical_members_have_zero_epistemic() {
        // A single-instance training set has only one possible bootstrap.
        let data = dataset(vec![2], 2, &[(&[0], 0)]);
        let ensemble = Ensemble::fit(&data, 5, 1.0, 9).unwrap();
        let d = ensemble.decompose(&[0]).unwrap();
        assert_eq!(d.epistemic, 0.0);
        assert!((d.total - d.aleatoric).abs() < 1e-15);
    }

    #[test]
    fn decomposition_matches_hand_computation() {
        // Members (0.8, 0.2) and (0.6, 0.4): average (0.7, 0.3).
        let schema = Arc::new(FeatureSchema::new(vec![1], 2).unwrap());
        let member = |p: f64| {
            NbcModel::from_parts(
                schema.clone(),
                vec![p, 1.0 - p],
                vec![vec![vec![1.0]], vec![vec![1.0]]],
                0.0,
            )
            .unwrap()
        };
        let ensemble = Ensemble {
            members: vec![member(0.8), member(0.6)],
            seeds: vec![0, 1],
        };
        let d = ensemble.decompose(&[0]).unwrap();
        assert!((d.total - 0.8812908992306927).abs() < 1e-12);
        assert!((d.aleatoric - 0.8464393446710154).abs() < 1e-12);
        assert!((d.epistemic - 0.0348515545596773).abs() < 1e-12);
        assert!((d.total - (d.aleatoric + d.epistemic)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_agreement_zeroes_every_entropy_measure() {
        // Every member is certain of the same class: u_max, u_H, u_t and u_a
        // all vanish.
        let schema = Arc::new(FeatureSchema::new(vec![1], 2).unwrap());
        let member = || {
            NbcModel::from_parts(
                schema.clone(),
                vec![1.0, 0.0],
                vec![vec![vec![1.0]], vec![vec![1.0]]],
                0.0,
            )
            .unwrap()
        };
        let ensemble = Ensemble {
            members: vec![member(), member(), member()],
            seeds: vec![0, 1, 2],
        };
        let d = ensemble.decompose(&[0]).unwrap();
        assert_eq!(d.total, 0.0);
        assert_eq!(d.aleatoric, 0.0);
        assert_eq!(d.epistemic, 0.0);
        let model = member();
        assert_eq!(misclassification_probability(&model, &[0]).unwrap(), 0.0);
        assert_eq!(prediction_entropy(&model, &[0]).unwrap(), 0.0);
    }

    #[test]
    fn maximal_disagreement_is_pure_epistemic() {
        let schema = Arc::new(FeatureSchema::new(vec![1], 2).unwrap());
        let member = |p: Vec<f64>| {
            NbcModel::from_parts(schema.clone(), p, vec![vec![vec![1.0]], vec![vec![1.0]]], 0.0)
                .unwrap()
        };
        let ensemble = Ensemble {
            members: vec![member(vec![1.0, 0.0]), member(vec![0.0, 1.0])],
            seeds: vec![0, 1],
        };
        let d = ensemble.decompose(&[0]).unwrap();
        assert_eq!(d.aleatoric, 0.0);
        assert!((d.total - 1.0).abs() < 1e-15);
        assert!((d.epistemic - 1.0).abs() < 1e-15);
    }

    #[test]
    fn member_failures_carry_the_index() {
        let data = dataset(vec![3], 2, &[(&[0], 0), (&[1], 1)]);
        let ensemble = Ensemble::fit(&data, 3, 0.0, 1).unwrap();
        match ensemble.decompose(&[2]) {
            Err(Error::EnsembleMember { index: 0, source }) => {
                assert!(matches!(*source, Error::DegenerateEvidence));
            }
            other => panic!("expected member error, got {other:?}"),
        }
    }

    fn random_rows() -> impl Strategy<Value = Vec<(Vec<usize>, usize)>> {
        proptest::collection::vec(
            (proptest::collection::vec(0usize..3, 2), 0usize..3),
            3..25,
        )
    }

    proptest! {
        #[test]
        fn epistemic_is_nonnegative_and_consistent(
            rows in random_rows(),
            size in 2usize..8,
            seed: u64,
        ) {
            let refs: Vec<(&[usize], usize)> =
                rows.iter().map(|(f, c)| (f.as_slice(), *c)).collect();
            let data = dataset(vec![3, 3], 3, &refs);
            let ensemble = Ensemble::fit(&data, size, 0.5, seed).unwrap();
            for f0 in 0..3 {
                for f1 in 0..3 {
                    let d = ensemble.decompose(&[f0, f1]).unwrap();
                    prop_assert!(d.epistemic >= 0.0);
                    prop_assert!((d.total - (d.aleatoric + d.epistemic)).abs() <= 1e-12);
                    let bound = 3f64.log2() + 1e-12;
                    prop_assert!(d.total <= bound && d.aleatoric <= bound);
                }
            }
        }
    }
}
