//! Turning per-instance reliability scores into rejection orderings,
//! accuracy-rejection curves and their areas.

use std::io::Write;

use crate::error::{Error, Result};

/// Which end of the score scale gets rejected first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectDirection {
    /// Reject the highest scores first (uncertainty measures).
    HighFirst,
    /// Reject the lowest scores first (robustness and confidence margins).
    LowFirst,
}

/// One test instance: its index, the reliability score under some measure,
/// and whether the prediction was correct.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredInstance {
    pub index: usize,
    pub score: f64,
    pub correct: bool,
}

/// A rejection order over instances `0..n`, least reliable first, together
/// with a note on how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOrdering {
    order: Vec<usize>,
    provenance: String,
}

impl InstanceOrdering {
    /// Wrap an explicit permutation of `0..order.len()`.
    pub fn from_order(order: Vec<usize>, provenance: impl Into<String>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n || seen[i] {
                return Err(Error::NotAPermutation { expected: n });
            }
            seen[i] = true;
        }
        Ok(Self {
            order,
            provenance: provenance.into(),
        })
    }

    /// Instance indices, least reliable first.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Position of each instance in the rejection order (inverse permutation).
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (rank, &i) in self.order.iter().enumerate() {
            pos[i] = rank;
        }
        pos
    }
}

/// Sort instances least reliable first. Ties are broken by instance index
/// ascending, so equal scores keep their original order.
pub fn order_instances(
    scores: &[ScoredInstance],
    direction: RejectDirection,
) -> Result<InstanceOrdering> {
    order_instances_named(scores, direction, "scores")
}

/// [`order_instances`] with a measure name recorded in the provenance.
pub fn order_instances_named(
    scores: &[ScoredInstance],
    direction: RejectDirection,
    measure: &str,
) -> Result<InstanceOrdering> {
    if scores.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = scores.len();
    let mut seen = vec![false; n];
    for s in scores {
        if !s.score.is_finite() {
            return Err(Error::NonFiniteScore { index: s.index });
        }
        if s.index >= n || seen[s.index] {
            return Err(Error::NotAPermutation { expected: n });
        }
        seen[s.index] = true;
    }
    let mut sorted: Vec<&ScoredInstance> = scores.iter().collect();
    sorted.sort_by(|a, b| {
        let by_score = match direction {
            RejectDirection::HighFirst => b.score.partial_cmp(&a.score),
            RejectDirection::LowFirst => a.score.partial_cmp(&b.score),
        }
        .expect("scores checked finite");
        by_score.then(a.index.cmp(&b.index))
    });
    let direction_label = match direction {
        RejectDirection::HighFirst => "reject-high-first",
        RejectDirection::LowFirst => "reject-low-first",
    };
    InstanceOrdering::from_order(
        sorted.iter().map(|s| s.index).collect(),
        format!("{measure} ({direction_label}, ties by index)"),
    )
}

/// An accuracy-rejection curve: entry `k` is the accuracy on the instances
/// that remain after rejecting the `k` least reliable ones, for
/// `k = 0 .. n-1`. The all-rejected point is excluded (accuracy on an empty
/// set is undefined), and the area is the mean of the entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcCurve {
    accuracies: Vec<f64>,
    au_arc: f64,
}

impl ArcCurve {
    pub fn accuracies(&self) -> &[f64] {
        &self.accuracies
    }

    pub fn au_arc(&self) -> f64 {
        self.au_arc
    }

    pub fn len(&self) -> usize {
        self.accuracies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accuracies.is_empty()
    }

    /// Write the curve as delimited text with columns
    /// `rejection_count,rejection_rate,accuracy`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "rejection_count,rejection_rate,accuracy")?;
        let n = self.accuracies.len();
        for (k, acc) in self.accuracies.iter().enumerate() {
            writeln!(w, "{k},{},{}", k as f64 / n as f64, acc)?;
        }
        Ok(())
    }
}

/// Build the accuracy-rejection curve for an ordering. `correct[i]` states
/// whether instance `i` was classified correctly.
pub fn arc(ordering: &InstanceOrdering, correct: &[bool]) -> Result<ArcCurve> {
    let n = correct.len();
    if ordering.len() != n {
        return Err(Error::LengthMismatch {
            left: ordering.len(),
            right: n,
        });
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    // Suffix counts of correct predictions in rejection order.
    let mut remaining_correct = vec![0usize; n + 1];
    for k in (0..n).rev() {
        remaining_correct[k] =
            remaining_correct[k + 1] + usize::from(correct[ordering.order()[k]]);
    }
    let accuracies: Vec<f64> = (0..n)
        .map(|k| remaining_correct[k] as f64 / (n - k) as f64)
        .collect();
    let au_arc = accuracies.iter().sum::<f64>() / n as f64;
    Ok(ArcCurve { accuracies, au_arc })
}

/// Pointwise mean of equally long curves; the area of the result is the mean
/// of the averaged entries.
pub fn mean_arc(curves: &[ArcCurve]) -> Result<ArcCurve> {
    let Some(first) = curves.first() else {
        return Err(Error::EmptyDataset);
    };
    let n = first.len();
    if let Some(bad) = curves.iter().find(|c| c.len() != n) {
        return Err(Error::LengthMismatch {
            left: n,
            right: bad.len(),
        });
    }
    let mut accuracies = vec![0.0; n];
    for curve in curves {
        for (total, &a) in accuracies.iter_mut().zip(curve.accuracies()) {
            *total += a;
        }
    }
    for a in &mut accuracies {
        *a /= curves.len() as f64;
    }
    let au_arc = accuracies.iter().sum::<f64>() / n as f64;
    Ok(ArcCurve { accuracies, au_arc })
}
