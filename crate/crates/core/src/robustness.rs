//! Per-instance robustness measures for generative classifiers.
//!
//! Two measures are provided. The global one perturbs the learned joint
//! distribution as a whole and reduces to a closed form in the gap between the
//! two largest joint probabilities. The local one perturbs each local
//! parameter of a Naive Bayes model independently and reports the largest
//! shared contamination radius at which the prediction provably survives,
//! found by bisection over a monotone dominance check.
//!
//! # Local neighborhood semantics
//!
//! Every local pmf `p` of the model (the class prior and each per-class,
//! per-feature conditional) is replaced by its contamination set
//! `{(1-eps) p + eps q : q any pmf on the same support}`, independently per
//! pmf. The prediction is robust at radius `eps` iff the predicted class
//! strictly dominates every rival under the worst-case member of every set.
//! Because distinct local pmfs contaminate independently, those worst cases
//! are attained simultaneously:
//!
//! - the shared prior moves mass `eps` onto the rival, leaving the predicted
//!   class at its lower envelope `(1-eps) P(c_hat)`;
//! - each conditional of the predicted class drops to `(1-eps) P(f_i | c_hat)`
//!   (when the feature has a single value, the set is a singleton and the
//!   factor stays 1);
//! - each conditional of the rival rises to `(1-eps) P(f_i | c) + eps`.
//!
//! Dominance therefore reduces to one product inequality per rival class.
//! The products are evaluated directly (log space is used only when a side
//! underflows), with the same association order as the enumeration oracle, so
//! the two agree even when a symmetric model makes both sides exactly equal.
//! The extreme points of each contamination set put the whole mass `eps` on a
//! single outcome, which is what the enumeration oracle walks over.

use crate::error::{Error, Result};
use crate::model::{argmax_lowest, GenerativeClassifier, NbcModel};

/// Default absolute tolerance of the bisection in [`local_robustness`].
pub const LOCAL_ROBUSTNESS_TOL: f64 = 1e-6;

/// Default iteration cap of the bisection (2^-60 is far below the tolerance).
pub const LOCAL_ROBUSTNESS_MAX_ITER: usize = 60;

/// Combination limit for the enumeration oracle.
const VERTEX_LIMIT: u128 = 1_000_000;

/// Closed-form global robustness: `delta / (1 + delta)` where `delta` is the
/// gap between the two largest joint probabilities for `features`. Zero iff
/// the top joints are tied; at most 0.5.
pub fn global_robustness<C: GenerativeClassifier + ?Sized>(
    model: &C,
    features: &[usize],
) -> Result<f64> {
    let joints: Vec<f64> = (0..model.schema().class_count())
        .map(|c| model.joint_prob(c, features))
        .collect::<Result<_>>()?;
    let (predicted, top) = argmax_lowest(&joints);
    let runner_up = joints
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != predicted)
        .map(|(_, &p)| p)
        .fold(f64::NEG_INFINITY, f64::max);
    let delta = top - runner_up;
    Ok(delta / (1.0 + delta))
}

/// The class with the largest joint probability (ties to the lowest index).
/// Coincides with `predict` whenever the evidence is non-degenerate, and stays
/// defined (class 0) even when every joint is zero.
fn predicted_by_joint(model: &NbcModel, features: &[usize]) -> Result<usize> {
    let logs = model.log_joints(features)?;
    Ok(argmax_lowest(&logs).0)
}

/// Does the prediction survive every model in the `eps`-contamination
/// neighborhood of the local parameters? Strict dominance, so a tied
/// prediction is not robust at any radius.
pub fn is_robust_at(model: &NbcModel, features: &[usize], eps: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: eps,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let predicted = predicted_by_joint(model, features)?;
    let cards = model.schema().cardinalities();

    // Lower envelope of the predicted class: one (1-eps) factor for the prior
    // plus one per contaminable feature pmf (singleton pmfs cannot move).
    let mut lhs_features = 1.0;
    for (i, &v) in features.iter().enumerate() {
        let p = model.conditional_prob(predicted, i, v);
        lhs_features *= if cards[i] >= 2 { (1.0 - eps) * p } else { p };
    }
    let lhs = (1.0 - eps) * model.class_prior()[predicted] * lhs_features;

    for rival in 0..model.schema().class_count() {
        if rival == predicted {
            continue;
        }
        let mut rhs_features = 1.0;
        for (i, &v) in features.iter().enumerate() {
            let p = model.conditional_prob(rival, i, v);
            rhs_features *= if cards[i] >= 2 {
                (1.0 - eps) * p + eps
            } else {
                p
            };
        }
        let rhs = ((1.0 - eps) * model.class_prior()[rival] + eps) * rhs_features;

        let dominant = if decidable_directly(lhs, rhs) {
            lhs > rhs
        } else {
            log_dominance(model, features, predicted, rival, eps)
        };
        if !dominant {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Direct products decide the sign unless one side underflowed to a
/// subnormal, or both collapsed to zero (which a log comparison still
/// separates when the true values are positive).
fn decidable_directly(lhs: f64, rhs: f64) -> bool {
    let clean = |v: f64| v == 0.0 || v.is_normal();
    clean(lhs) && clean(rhs) && !(lhs == 0.0 && rhs == 0.0)
}

/// The same dominance inequality in log space, for wide schemas whose
/// products underflow.
fn log_dominance(
    model: &NbcModel,
    features: &[usize],
    predicted: usize,
    rival: usize,
    eps: f64,
) -> bool {
    let cards = model.schema().cardinalities();
    let mut log_lhs = ((1.0 - eps) * model.class_prior()[predicted]).ln();
    let mut log_rhs = ((1.0 - eps) * model.class_prior()[rival] + eps).ln();
    for (i, &v) in features.iter().enumerate() {
        let p = model.conditional_prob(predicted, i, v);
        log_lhs += if cards[i] >= 2 {
            ((1.0 - eps) * p).ln()
        } else {
            p.ln()
        };
        let q = model.conditional_prob(rival, i, v);
        log_rhs += if cards[i] >= 2 {
            ((1.0 - eps) * q + eps).ln()
        } else {
            q.ln()
        };
    }
    log_lhs > log_rhs
}

/// Largest contamination radius at which the prediction is still robust,
/// bisected to [`LOCAL_ROBUSTNESS_TOL`].
pub fn local_robustness(model: &NbcModel, features: &[usize]) -> Result<f64> {
    local_robustness_with(model, features, LOCAL_ROBUSTNESS_TOL, LOCAL_ROBUSTNESS_MAX_ITER)
}

/// [`local_robustness`] with explicit bisection parameters.
///
/// The dominance check is monotone in `eps` (the dominant side only shrinks,
/// every rival side only grows), which makes bisection valid. Returns 0 when
/// robustness already fails at a vanishing radius (`2 * tol`); robustness at
/// `eps = 1` is impossible, so `[2 tol, 1]` always brackets the boundary.
pub fn local_robustness_with(
    model: &NbcModel,
    features: &[usize],
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if !is_robust_at(model, features, 2.0 * tol)? {
        return Ok(0.0);
    }
    let mut lo = 2.0 * tol;
    let mut hi = 1.0;
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if is_robust_at(model, features, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Independent check of [`is_robust_at`] by exhaustive enumeration of the
/// contamination extremes: per local pmf, the mass `eps` lands entirely on one
/// outcome. Evaluates the dominance difference at every combination and
/// reports whether its minimum is strictly positive. Intended for small
/// schemas; errors out above a combination limit.
pub fn is_robust_at_by_enumeration(
    model: &NbcModel,
    features: &[usize],
    eps: f64,
) -> Result<bool> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: eps,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let predicted = predicted_by_joint(model, features)?;
    let cards = model.schema().cardinalities();
    let classes = model.schema().class_count();

    let mut combinations: u128 = classes as u128;
    for &card in cards {
        combinations = combinations
            .saturating_mul(card as u128)
            .saturating_mul(card as u128);
    }
    if combinations > VERTEX_LIMIT {
        return Err(Error::EnumerationTooLarge {
            combinations,
            limit: VERTEX_LIMIT,
        });
    }

    // All extreme-point values of one side's feature factors: for feature i
    // with the mass on outcome `v`, the factor at the observed value is
    // (1-eps) p + eps if v equals the observed value, else (1-eps) p.
    // Single-value features have a singleton contamination set and keep
    // their factor as-is.
    let side_products = |class: usize| -> Vec<f64> {
        let mut products = vec![1.0];
        for (i, &observed) in features.iter().enumerate() {
            let p = model.conditional_prob(class, i, observed);
            let base = (1.0 - eps) * p;
            let mut next = Vec::with_capacity(products.len() * cards[i]);
            for &prefix in &products {
                for vertex in 0..cards[i] {
                    let factor = if cards[i] < 2 {
                        p
                    } else if vertex == observed {
                        base + eps
                    } else {
                        base
                    };
                    next.push(prefix * factor);
                }
            }
            products = next;
        }
        products
    };

    let predicted_products = side_products(predicted);
    for rival in 0..classes {
        if rival == predicted {
            continue;
        }
        let rival_products = side_products(rival);
        for prior_vertex in 0..classes {
            let prior_predicted = (1.0 - eps) * model.class_prior()[predicted]
                + if prior_vertex == predicted { eps } else { 0.0 };
            let prior_rival = (1.0 - eps) * model.class_prior()[rival]
                + if prior_vertex == rival { eps } else { 0.0 };
            for &lhs in &predicted_products {
                for &rhs in &rival_products {
                    if prior_predicted * lhs - prior_rival * rhs <= 0.0 {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}
