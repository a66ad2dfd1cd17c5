//! Combining an uncertainty ordering with a robustness ordering.
//!
//! Instances are re-ranked by the weighted average of their positions in the
//! two orderings; the weight is tuned on training data and then biased by a
//! cross-validated hyperparameter before deployment.

use crate::data::CategoricalDataset;
use crate::error::{Error, Result};
use crate::evaluation::{arc, InstanceOrdering};
use crate::measure::{score_dataset, Measure, ScoreTable};
use crate::model::NbcModel;
use crate::seeding::child_seed;
use crate::uncertainty::Ensemble;

/// An uncertainty measure paired with a robustness measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurePair {
    pub uncertainty: Measure,
    pub robustness: Measure,
}

/// The default 101-point weight grid {0, 0.01, ..., 1}.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

/// The default 21-point bias grid {-1, -0.9, ..., 1}.
pub fn default_mu_grid() -> Vec<f64> {
    (-10..=10).map(|i| i as f64 / 10.0).collect()
}

/// Order instances by `gamma * pos_u + (1 - gamma) * pos_r` ascending, where
/// the positions are 0-based ranks in the two input orderings. Ties go to the
/// smaller uncertainty rank, then to the instance index. `gamma = 1`
/// reproduces the uncertainty ordering exactly, `gamma = 0` the robustness
/// ordering.
pub fn hybrid_order(
    order_u: &InstanceOrdering,
    order_r: &InstanceOrdering,
    gamma: f64,
) -> Result<InstanceOrdering> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if order_u.len() != order_r.len() {
        return Err(Error::OrderingMismatch);
    }
    let pos_u = order_u.positions();
    let pos_r = order_r.positions();
    let mut indices: Vec<usize> = (0..pos_u.len()).collect();
    indices.sort_by(|&a, &b| {
        let h = |i: usize| gamma * pos_u[i] as f64 + (1.0 - gamma) * pos_r[i] as f64;
        h(a).partial_cmp(&h(b))
            .expect("ranks are finite")
            .then(pos_u[a].cmp(&pos_u[b]))
            .then(a.cmp(&b))
    });
    InstanceOrdering::from_order(
        indices,
        format!(
            "hybrid gamma={gamma} of [{}] and [{}]",
            order_u.provenance(),
            order_r.provenance()
        ),
    )
}

/// A grid-search result: the chosen weight and the AU-ARC it achieved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSearch {
    pub gamma: f64,
    pub au_arc: f64,
}

fn best_gamma(
    order_u: &InstanceOrdering,
    order_r: &InstanceOrdering,
    correct: &[bool],
    grid: &[f64],
) -> Result<GammaSearch> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut best: Option<GammaSearch> = None;
    for &gamma in grid {
        let curve = arc(&hybrid_order(order_u, order_r, gamma)?, correct)?;
        let au_arc = curve.au_arc();
        let better = match &best {
            None => true,
            Some(current) => {
                au_arc > current.au_arc
                    || (au_arc == current.au_arc && closer_to_half(gamma, current.gamma))
            }
        };
        if better {
            best = Some(GammaSearch { gamma, au_arc });
        }
    }
    Ok(best.expect("nonempty grid"))
}

/// Exact AU-ARC ties go to the value nearest 0.5 (no-preference prior),
/// equidistant pairs to the smaller value.
fn closer_to_half(candidate: f64, incumbent: f64) -> bool {
    let d_new = (candidate - 0.5).abs();
    let d_old = (incumbent - 0.5).abs();
    d_new < d_old || (d_new == d_old && candidate < incumbent)
}

/// Grid-search the weight with the highest AU-ARC on training-instance
/// orderings. Ties go toward 0.5.
pub fn tune_gamma_train(
    order_u: &InstanceOrdering,
    order_r: &InstanceOrdering,
    correct: &[bool],
    grid: &[f64],
) -> Result<GammaSearch> {
    best_gamma(order_u, order_r, correct, grid)
}

/// Same mechanics as [`tune_gamma_train`] on test-instance orderings: the
/// weight that would have been optimal in hindsight. Reported for reference,
/// never deployed.
pub fn gamma_opt(
    order_u: &InstanceOrdering,
    order_r: &InstanceOrdering,
    correct: &[bool],
    grid: &[f64],
) -> Result<GammaSearch> {
    best_gamma(order_u, order_r, correct, grid)
}

/// Bias the trained weight toward an endpoint:
/// `(1 - mu) * gamma_train + mu` for `mu > 0`, `(1 + mu) * gamma_train`
/// otherwise. `mu = 0` is the identity, `mu = 1` forces 1, `mu = -1` forces 0.
pub fn biased_gamma(gamma_train: f64, mu: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma_train) {
        return Err(Error::OutOfRange {
            name: "gamma_train",
            value: gamma_train,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if !(-1.0..=1.0).contains(&mu) {
        return Err(Error::OutOfRange {
            name: "mu",
            value: mu,
            lo: -1.0,
            hi: 1.0,
        });
    }
    Ok(if mu > 0.0 {
        (1.0 - mu) * gamma_train + mu
    } else {
        (1.0 + mu) * gamma_train
    })
}

/// Everything [`select_mu`] needs from one cross-validation fold: the weight
/// trained on the fold's training part, plus held-out orderings and
/// correctness.
#[derive(Debug, Clone)]
pub struct HybridFold {
    pub gamma_train: f64,
    pub heldout_uncertainty: InstanceOrdering,
    pub heldout_robustness: InstanceOrdering,
    pub heldout_correct: Vec<bool>,
}

/// Pick the bias with the best mean held-out AU-ARC across folds. Exact ties
/// go to the value nearest 0 (least bias), equidistant pairs to the smaller.
pub fn select_mu(folds: &[HybridFold], mu_grid: &[f64]) -> Result<f64> {
    if mu_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if folds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut best: Option<(f64, f64)> = None; // (mu, mean AU-ARC)
    for &mu in mu_grid {
        let mut total = 0.0;
        for fold in folds {
            let gamma = biased_gamma(fold.gamma_train, mu)?;
            let ordering =
                hybrid_order(&fold.heldout_uncertainty, &fold.heldout_robustness, gamma)?;
            total += arc(&ordering, &fold.heldout_correct)?.au_arc();
        }
        let mean = total / folds.len() as f64;
        let better = match best {
            None => true,
            Some((incumbent, best_mean)) => {
                mean > best_mean
                    || (mean == best_mean
                        && (mu.abs() < incumbent.abs()
                            || (mu.abs() == incumbent.abs() && mu < incumbent)))
            }
        };
        if better {
            best = Some((mu, mean));
        }
    }
    Ok(best.expect("nonempty grid").0)
}

/// Cross-validated bias tuning on a training set: per fold, fit the model
/// (and ensemble when the uncertainty measure needs one), score both measures
/// on the fold's own training part to train the weight, then evaluate every
/// bias candidate on the held-out part. Deterministic given the seed.
#[allow(clippy::too_many_arguments)]
pub fn tune_mu(
    train: &CategoricalDataset,
    pair: MeasurePair,
    mu_grid: &[f64],
    gamma_grid: &[f64],
    k: usize,
    alpha: f64,
    ensemble_size: usize,
    seed: u64,
) -> Result<f64> {
    if mu_grid.is_empty() || gamma_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let folds = train.kfold(k, child_seed(seed, &["mu-folds"]))?;
    let mut hybrid_folds = Vec::with_capacity(folds.len());
    for (index, (part, heldout)) in folds.iter().enumerate() {
        let model = NbcModel::fit(part, alpha)?;
        let ensemble = if pair.uncertainty.needs_ensemble() || pair.robustness.needs_ensemble() {
            Some(Ensemble::fit(
                part,
                ensemble_size,
                alpha,
                child_seed(seed, &["mu-fold-ensemble", &index.to_string()]),
            )?)
        } else {
            None
        };
        let part_scores = pair_scores(&model, ensemble.as_ref(), part, pair)?;
        let heldout_scores = pair_scores(&model, ensemble.as_ref(), heldout, pair)?;
        let gamma_train = tune_gamma_train(
            &part_scores.ordering(pair.uncertainty)?,
            &part_scores.ordering(pair.robustness)?,
            part_scores.correct(),
            gamma_grid,
        )?
        .gamma;
        hybrid_folds.push(HybridFold {
            gamma_train,
            heldout_uncertainty: heldout_scores.ordering(pair.uncertainty)?,
            heldout_robustness: heldout_scores.ordering(pair.robustness)?,
            heldout_correct: heldout_scores.correct().to_vec(),
        });
    }
    select_mu(&hybrid_folds, mu_grid)
}

fn pair_scores(
    model: &NbcModel,
    ensemble: Option<&Ensemble>,
    data: &CategoricalDataset,
    pair: MeasurePair,
) -> Result<ScoreTable> {
    score_dataset(model, ensemble, data, &[pair.uncertainty, pair.robustness])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureSchema, Instance};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn ordering(order: Vec<usize>) -> InstanceOrdering {
        InstanceOrdering::from_order(order, "test").unwrap()
    }

    #[test]
    fn endpoints_recover_inputs_exactly() {
        let u = ordering(vec![3, 0, 2, 1]);
        let r = ordering(vec![1, 2, 0, 3]);
        assert_eq!(hybrid_order(&u, &r, 1.0).unwrap().order(), u.order());
        assert_eq!(hybrid_order(&u, &r, 0.0).unwrap().order(), r.order());
    }

    #[test]
    fn identical_orderings_are_a_fixed_point_at_every_weight() {
        let order = ordering(vec![2, 0, 3, 1]);
        for i in 0..=10 {
            let gamma = i as f64 / 10.0;
            let out = hybrid_order(&order, &order, gamma).unwrap();
            assert_eq!(out.order(), order.order());
        }
    }

    #[test]
    fn midpoint_ties_resolve_by_uncertainty_rank() {
        // Opposite orders: every weighted rank equals (n-1)/2 at gamma = 0.5.
        let u = ordering(vec![0, 1, 2]);
        let r = ordering(vec![2, 1, 0]);
        let h = hybrid_order(&u, &r, 0.5).unwrap();
        assert_eq!(h.order(), &[0, 1, 2]);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let u = ordering(vec![0, 1]);
        let r = ordering(vec![0, 1, 2]);
        assert!(matches!(
            hybrid_order(&u, &r, 0.5),
            Err(Error::OrderingMismatch)
        ));
    }

    #[test]
    fn gamma_out_of_range_is_rejected() {
        let u = ordering(vec![0, 1]);
        assert!(hybrid_order(&u, &u, 1.5).is_err());
        assert!(hybrid_order(&u, &u, -0.1).is_err());
    }

    #[test]
    fn dominant_uncertainty_endpoint_wins_the_grid() {
        // Uncertainty rejects the two wrong instances first; robustness is the
        // exact reverse. The uncertainty-side weights all achieve the optimal
        // AU-ARC, so the search returns the tied value nearest 0.5 and its
        // curve matches the pure uncertainty ordering.
        let correct = vec![false, false, true, true];
        let u = ordering(vec![0, 1, 2, 3]);
        let r = ordering(vec![3, 2, 1, 0]);
        let grid = default_gamma_grid();
        let found = tune_gamma_train(&u, &r, &correct, &grid).unwrap();
        let optimal = arc(&u, &correct).unwrap().au_arc();
        assert_eq!(found.au_arc, optimal);
        assert!(found.gamma >= 0.5);
        // Symmetric swap: robustness side wins.
        let swapped = tune_gamma_train(&r, &u, &correct, &grid).unwrap();
        let out = hybrid_order(&r, &u, swapped.gamma).unwrap();
        assert_eq!(arc(&out, &correct).unwrap().au_arc(), optimal);
        assert!(swapped.gamma <= 0.5);
    }

    #[test]
    fn interior_gamma_can_beat_both_endpoints() {
        // Six instances, wrong = {0, 5}. Neither ordering alone rejects both
        // wrong instances first, but their blend does.
        let correct = vec![false, true, true, true, true, false];
        let u = ordering(vec![0, 1, 5, 2, 3, 4]);
        let r = ordering(vec![5, 4, 0, 1, 2, 3]);
        let grid = default_gamma_grid();
        let found = tune_gamma_train(&u, &r, &correct, &grid).unwrap();
        let at_u = arc(&u, &correct).unwrap().au_arc();
        let at_r = arc(&r, &correct).unwrap().au_arc();
        assert!(
            found.au_arc > at_u && found.au_arc > at_r,
            "interior {} should beat endpoints {} and {}",
            found.au_arc,
            at_u,
            at_r
        );
        assert!(found.gamma > 0.0 && found.gamma < 1.0);
    }

    #[test]
    fn gamma_opt_dominates_every_grid_value() {
        let correct = vec![false, true, false, true, true];
        let u = ordering(vec![1, 0, 2, 4, 3]);
        let r = ordering(vec![2, 3, 0, 1, 4]);
        let grid = default_gamma_grid();
        let best = gamma_opt(&u, &r, &correct, &grid).unwrap();
        for &gamma in &grid {
            let au = arc(&hybrid_order(&u, &r, gamma).unwrap(), &correct)
                .unwrap()
                .au_arc();
            assert!(best.au_arc >= au);
        }
    }

    #[test]
    fn bias_identities() {
        assert_eq!(biased_gamma(0.37, 0.0).unwrap(), 0.37);
        assert_eq!(biased_gamma(0.37, 1.0).unwrap(), 1.0);
        assert_eq!(biased_gamma(0.37, -1.0).unwrap(), 0.0);
        assert!((biased_gamma(0.6, -0.5).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn bias_rejects_out_of_range_arguments() {
        assert!(biased_gamma(1.5, 0.0).is_err());
        assert!(biased_gamma(0.5, 1.5).is_err());
    }

    #[test]
    fn bias_is_monotone_in_mu_and_continuous_at_zero() {
        let g = 0.42;
        let mut previous = biased_gamma(g, -1.0).unwrap();
        for i in -9..=10 {
            let mu = i as f64 / 10.0;
            let value = biased_gamma(g, mu).unwrap();
            assert!(value + 1e-15 >= previous);
            previous = value;
        }
        let below = biased_gamma(g, -1e-12).unwrap();
        let above = biased_gamma(g, 1e-12).unwrap();
        assert!((below - g).abs() < 1e-11 && (above - g).abs() < 1e-11);
    }

    #[test]
    fn select_mu_singleton_grid() {
        let fold = HybridFold {
            gamma_train: 0.5,
            heldout_uncertainty: ordering(vec![0, 1]),
            heldout_robustness: ordering(vec![1, 0]),
            heldout_correct: vec![false, true],
        };
        assert_eq!(select_mu(&[fold], &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn perfect_uncertainty_folds_push_gamma_star_up() {
        // Held-out: wrong = {0, 3}; the uncertainty ordering is perfect, and
        // the blend only matches it once gamma* >= 0.75. With gamma_train
        // stuck at 0.2, that takes a strong positive bias.
        let fold = || HybridFold {
            gamma_train: 0.2,
            heldout_uncertainty: ordering(vec![0, 3, 1, 2]),
            heldout_robustness: ordering(vec![1, 2, 0, 3]),
            heldout_correct: vec![false, true, true, false],
        };
        let folds = vec![fold(), fold(), fold()];
        let mu = select_mu(&folds, &default_mu_grid()).unwrap();
        assert!((mu - 0.7).abs() < 1e-12, "selected mu = {mu}");
        let gamma_star = biased_gamma(0.2, mu).unwrap();
        assert!(gamma_star >= 0.75, "gamma* = {gamma_star}");
        let hybrid = hybrid_order(
            &folds[0].heldout_uncertainty,
            &folds[0].heldout_robustness,
            gamma_star,
        )
        .unwrap();
        assert_eq!(hybrid.order(), folds[0].heldout_uncertainty.order());
    }

    fn toy_train() -> CategoricalDataset {
        let schema = Arc::new(FeatureSchema::new(vec![2, 2], 2).unwrap());
        let instances = (0..20)
            .map(|i| Instance {
                features: vec![i % 2, (i / 3) % 2],
                label: usize::from((i % 2 == 0) ^ (i % 7 == 0)),
            })
            .collect();
        CategoricalDataset::new(schema, instances).unwrap()
    }

    #[test]
    fn tune_mu_singleton_grid_and_determinism() {
        let train = toy_train();
        let pair = MeasurePair {
            uncertainty: Measure::AleatoricUncertainty,
            robustness: Measure::LocalRobustness,
        };
        let gamma_grid = default_gamma_grid();
        assert_eq!(
            tune_mu(&train, pair, &[0.0], &gamma_grid, 5, 1.0, 3, 11).unwrap(),
            0.0
        );
        let grid = default_mu_grid();
        let a = tune_mu(&train, pair, &grid, &gamma_grid, 5, 1.0, 3, 11).unwrap();
        let b = tune_mu(&train, pair, &grid, &gamma_grid, 5, 1.0, 3, 11).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn endpoint_recovery_on_random_pairs(seed: u64, n in 2usize..40) {
            let mut order_a: Vec<usize> = (0..n).collect();
            let mut order_b: Vec<usize> = (0..n).collect();
            let mut state = seed | 1;
            let mut shuffle = |v: &mut Vec<usize>| {
                for i in (1..v.len()).rev() {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    v.swap(i, (state % (i as u64 + 1)) as usize);
                }
            };
            shuffle(&mut order_a);
            shuffle(&mut order_b);
            let u = ordering(order_a);
            let r = ordering(order_b);
            let at_one = hybrid_order(&u, &r, 1.0).unwrap();
            let at_zero = hybrid_order(&u, &r, 0.0).unwrap();
            prop_assert_eq!(at_one.order(), u.order());
            prop_assert_eq!(at_zero.order(), r.order());
        }
    }
}
