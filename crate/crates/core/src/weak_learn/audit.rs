use serde::{Deserialize, Serialize};

use super::WeakHypothesis;
use crate::domain::{Dataset, ExampleDistribution, Label, ListFunction, ListId};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One checked weak-learner call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct BrgAudit<F = f64> {
    pub list: ListId,
    pub k: usize,
    /// `Σ p_i · 1[y_i ∈ μ(x_i)]`
    pub coverage: F,
    /// `Σ p_i · 1[h(x_i) = y_i]`
    pub accuracy: F,
    /// Required accuracy, `(base + γ) · coverage`.
    pub threshold: F,
    /// `accuracy − threshold`; negative means the call fell short.
    pub slack: F,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct BrgAuditLog<F = f64> {
    entries: Vec<BrgAudit<F>>,
}

impl<F: Scalar> BrgAuditLog<F> {
    pub fn new() -> Self {
        BrgAuditLog { entries: Vec::new() }
    }

    pub fn push(&mut self, entry: BrgAudit<F>) {
        self.entries.push(entry);
    }

    pub fn extend(&mut self, other: BrgAuditLog<F>) {
        self.entries.extend(other.entries);
    }

    pub fn entries(&self) -> &[BrgAudit<F>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| !e.pass).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failures() == 0
    }

    /// Fraction of passing calls; 1 for an empty log.
    pub fn pass_rate(&self) -> f64 {
        if self.entries.is_empty() {
            return 1.0;
        }
        (self.len() - self.failures()) as f64 / self.len() as f64
    }

    pub fn min_slack(&self) -> Option<F> {
        self.entries.iter().map(|e| e.slack).reduce(F::min)
    }
}

pub(crate) fn audit_tolerance<F: Scalar>() -> F {
    F::lit(1e-12).max(F::epsilon() * F::lit(4.0))
}

fn check_gamma<F: Scalar>(gamma: F) -> Result<()> {
    if !(gamma > F::zero() && gamma < F::one()) {
        return Err(Error::InvalidGamma(gamma.as_f64()));
    }
    Ok(())
}

/// Checks `accuracy ≥ (base + γ) · coverage` for precomputed training
/// predictions. The BRG condition is `base = 1/k`; plain weak learning on a
/// residual uses `base = 0`.
pub fn audit_edge<F: Scalar>(
    predictions: &[Label],
    dataset: &Dataset,
    dist: &ExampleDistribution<F>,
    mu: &ListFunction,
    base: F,
    gamma: F,
) -> Result<BrgAudit<F>> {
    check_gamma(gamma)?;
    if predictions.len() != dataset.len() || dist.len() != dataset.len() {
        return Err(Error::InvalidParams(format!(
            "audit over {} examples got {} predictions and {} weights",
            dataset.len(),
            predictions.len(),
            dist.len()
        )));
    }
    let mut coverage = F::zero();
    let mut accuracy = F::zero();
    for (i, ex) in dataset.examples().iter().enumerate() {
        let p = dist.prob(i);
        if p == F::zero() {
            continue;
        }
        if mu.contains(&ex.instance, ex.label) {
            coverage += p;
        }
        if predictions[i] == ex.label {
            accuracy += p;
        }
    }
    let threshold = (base + gamma) * coverage;
    let slack = accuracy - threshold;
    Ok(BrgAudit {
        list: mu.id().clone(),
        k: mu.declared_size(),
        coverage,
        accuracy,
        threshold,
        slack,
        pass: slack >= -audit_tolerance::<F>(),
    })
}

/// Audits `h` against the empirical BRG inequality for the list `mu` and
/// appends the result to `log`.
pub fn audit_brg<F: Scalar>(
    h: &WeakHypothesis,
    dataset: &Dataset,
    dist: &ExampleDistribution<F>,
    mu: &ListFunction,
    gamma: F,
    log: &mut BrgAuditLog<F>,
) -> Result<BrgAudit<F>> {
    check_gamma(gamma)?;
    let k = mu.declared_size();
    if k < 2 {
        return Err(Error::InvalidList(format!(
            "BRG audit needs list size at least 2, got {k}"
        )));
    }
    let predictions: Vec<Label> = dataset.examples().iter().map(|e| h.predict(&e.instance)).collect();
    let entry = audit_edge(&predictions, dataset, dist, mu, F::one() / F::from_count(k), gamma)?;
    log.push(entry.clone());
    Ok(entry)
}
