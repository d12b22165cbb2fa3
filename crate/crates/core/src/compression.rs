//! Sample-compression bookkeeping: which training examples reconstruct each
//! hypothesis, the resulting size `r`, replay, and the bound
//! `ε = (r ln m + ln(1/δ)) / (m − r)` for consistent list predictors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, RandomStream};
use crate::error::{Error, Result};
use crate::recursive::{replay_boost, StagedListChain};
use crate::scalar::Scalar;
use crate::weak_learn::WeakLearnerSpec;

fn one() -> usize {
    1
}

fn is_one(n: &usize) -> bool {
    *n == 1
}

/// The examples behind one hypothesis (or one vote of a game), with a
/// fingerprint of its predictions on the training set. `repeat` counts
/// identical copies, as when a vote is drawn several times.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub indices: Vec<usize>,
    pub fingerprint: u64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub repeat: usize,
}

impl SlotRecord {
    pub fn new(indices: Vec<usize>, fingerprint: u64) -> Self {
        SlotRecord {
            indices,
            fingerprint,
            repeat: 1,
        }
    }

    pub fn size(&self) -> usize {
        self.indices.len() * self.repeat
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhaseTag {
    Hint,
    Hedge { j: usize },
    WeakToList,
    Cover,
    WrongLabel { j: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub tag: PhaseTag,
    /// Earlier phase whose output list this phase was trained with.
    pub list_ref: Option<usize>,
    /// Size parameter of the phase: the hint length, the list size `k`
    /// that sets a Hedge threshold, or the label count of a game.
    pub list_size: usize,
    pub slots: Vec<SlotRecord>,
}

impl PhaseRecord {
    pub fn size(&self) -> usize {
        self.slots.iter().map(SlotRecord::size).sum()
    }
}

/// Everything needed to rebuild a predictor from the training set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionRecord {
    pub m: usize,
    pub phases: Vec<PhaseRecord>,
}

impl CompressionRecord {
    pub fn new(m: usize) -> Self {
        CompressionRecord { m, phases: Vec::new() }
    }

    pub fn push(&mut self, phase: PhaseRecord) -> usize {
        self.phases.push(phase);
        self.phases.len() - 1
    }

    /// Indices in range and list references pointing strictly backwards.
    pub fn validate(&self) -> Result<()> {
        for (p, phase) in self.phases.iter().enumerate() {
            if let Some(r) = phase.list_ref {
                if r >= p {
                    return Err(Error::MalformedRecord(format!(
                        "phase {p} refers to phase {r}, which is not earlier"
                    )));
                }
            }
            for (s, slot) in phase.slots.iter().enumerate() {
                if let Some(&i) = slot.indices.iter().find(|&&i| i >= self.m) {
                    return Err(Error::MalformedRecord(format!(
                        "phase {p} slot {s} uses index {i} of a {}-example sample",
                        self.m
                    )));
                }
                if slot.repeat == 0 {
                    return Err(Error::MalformedRecord(format!("phase {p} slot {s} has repeat 0")));
                }
            }
        }
        Ok(())
    }

    /// Phases with the given tag kind, in order.
    pub fn phases_where(&self, pred: impl Fn(&PhaseTag) -> bool) -> impl Iterator<Item = &PhaseRecord> {
        self.phases.iter().filter(move |p| pred(&p.tag))
    }
}

/// `r`: the number of (not necessarily distinct) training examples stored.
pub fn compression_size(record: &CompressionRecord) -> usize {
    record.phases.iter().map(PhaseRecord::size).sum()
}

/// Replays a boosting record with a deterministic learner.
pub fn reconstruct(
    record: &CompressionRecord,
    dataset: &Dataset,
    learner: &WeakLearnerSpec,
) -> Result<StagedListChain> {
    replay_boost(record, dataset, learner)
}

/// `ε(r, m, δ) = (r ln m + ln(1/δ)) / (m − r)`.
pub fn generalization_bound<F: Scalar>(r: usize, m: F, delta: F) -> Result<F> {
    if !(delta > F::zero() && delta <= F::one()) {
        return Err(Error::InvalidParams(format!("delta must lie in (0, 1], got {delta}")));
    }
    let rf = F::from_count(r);
    if rf >= m {
        return Err(Error::RTooLarge { r, m: m.as_f64() });
    }
    Ok((rf * m.ln() + (F::one() / delta).ln()) / (m - rf))
}

/// Bound report for one trained predictor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub r: usize,
    pub m: usize,
    pub delta: f64,
    /// `None` when `r ≥ m`.
    pub epsilon: Option<f64>,
    pub consistent: bool,
    pub heldout_error: Option<f64>,
}

impl BoundReport {
    pub fn new(r: usize, m: usize, delta: f64, consistent: bool, heldout_error: Option<f64>) -> Self {
        BoundReport {
            r,
            m,
            delta,
            epsilon: generalization_bound(r, m as f64, delta).ok(),
            consistent,
            heldout_error,
        }
    }

    /// The bound says nothing when `ε ≥ 1` or is undefined.
    pub fn vacuous(&self) -> bool {
        self.epsilon.is_none_or(|e| e >= 1.0)
    }

    /// The event the bound controls: consistent, yet true error above `ε`.
    pub fn violated(&self) -> bool {
        match (self.epsilon, self.heldout_error) {
            (Some(e), Some(err)) => self.consistent && !self.vacuous() && err > e,
            _ => false,
        }
    }
}

/// One run of a compression scheme, with its exactly computed true error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeTrial {
    pub r: usize,
    pub m: usize,
    pub consistent: bool,
    pub true_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub trials: usize,
    /// Trials whose bound was non-vacuous.
    pub evaluated: usize,
    pub consistent: usize,
    /// Consistent trials with true error above `ε`.
    pub failures: usize,
    pub failure_rate: f64,
    pub delta: f64,
}

/// Runs `trials` seeded trials in parallel (trial `t` gets the child stream
/// `trial-t`) and counts the runs that are consistent with their sample but
/// whose true error exceeds `ε(r, m, δ)`. Vacuous trials count as trials
/// but can never fail.
pub fn monte_carlo_compression_check<R>(
    runner: R,
    delta: f64,
    trials: usize,
    rng: &RandomStream,
) -> Result<MonteCarloReport>
where
    R: Fn(usize, RandomStream) -> Result<SchemeTrial> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidParams("at least one trial is required".into()));
    }
    let results: Vec<SchemeTrial> = (0..trials)
        .into_par_iter()
        .map(|t| runner(t, rng.child(format!("trial-{t}"))))
        .collect::<Result<_>>()?;
    let reports: Vec<BoundReport> = results
        .iter()
        .map(|t| BoundReport::new(t.r, t.m, delta, t.consistent, Some(t.true_error)))
        .collect();
    let failures = reports.iter().filter(|r| r.violated()).count();
    Ok(MonteCarloReport {
        trials,
        evaluated: reports.iter().filter(|r| !r.vacuous()).count(),
        consistent: reports.iter().filter(|r| r.consistent).count(),
        failures,
        failure_rate: failures as f64 / trials as f64,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slots(n: usize, m0: usize) -> Vec<SlotRecord> {
        (0..n).map(|_| SlotRecord::new(vec![0; m0], 0)).collect()
    }

    fn full_run(p: usize, t: usize, m0: usize) -> CompressionRecord {
        let mut rec = CompressionRecord::new(10);
        rec.push(PhaseRecord {
            tag: PhaseTag::Hint,
            list_ref: None,
            list_size: p,
            slots: slots(p, m0),
        });
        for j in 1..p {
            rec.push(PhaseRecord {
                tag: PhaseTag::Hedge { j },
                list_ref: Some(j - 1),
                list_size: p - j + 1,
                slots: slots(t, m0),
            });
        }
        rec
    }

    #[test]
    fn size_of_full_run() {
        assert_eq!(compression_size(&full_run(10, 100, 5)), 9 * 100 * 5 + 5 * 10);
        assert_eq!(compression_size(&full_run(10, 100, 5)), 4550);
    }

    #[test]
    fn size_of_single_phase_and_empty() {
        let mut rec = CompressionRecord::new(4);
        assert_eq!(compression_size(&rec), 0);
        rec.push(PhaseRecord {
            tag: PhaseTag::Hedge { j: 1 },
            list_ref: None,
            list_size: 2,
            slots: slots(3, 2),
        });
        assert_eq!(compression_size(&rec), 6);
    }

    #[test]
    fn repeats_count_toward_size() {
        let mut s = SlotRecord::new(vec![1, 2, 3], 9);
        s.repeat = 4;
        assert_eq!(s.size(), 12);
        let json = serde_json::to_string(&SlotRecord::new(vec![1], 2)).unwrap();
        assert!(!json.contains("repeat"));
        let back: SlotRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.repeat, 1);
    }

    #[test]
    fn validation_catches_bad_indices_and_forward_refs() {
        let mut rec = full_run(3, 2, 2);
        rec.validate().unwrap();
        rec.phases[1].slots[0].indices[0] = 10;
        assert!(rec.validate().is_err());
        let mut rec = full_run(3, 2, 2);
        rec.phases[1].list_ref = Some(1);
        assert!(rec.validate().is_err());
    }

    #[test]
    fn bound_examples() {
        let e: f64 = generalization_bound(10, 1000.0, 0.01).unwrap();
        assert!((e - (10.0 * 1000f64.ln() + 100f64.ln()) / 990.0).abs() < 1e-15);
        assert!((e - 0.07443).abs() < 1e-5);
        let z: f64 = generalization_bound(0, std::f64::consts::E, 1.0).unwrap();
        assert_eq!(z, 0.0);
        let v: f64 = generalization_bound(99, 100.0, 0.1).unwrap();
        assert!(v >= 1.0);
        assert!(BoundReport::new(99, 100, 0.1, true, Some(0.5)).vacuous());
        assert_eq!(
            generalization_bound::<f64>(100, 100.0, 0.1),
            Err(Error::RTooLarge { r: 100, m: 100.0 })
        );
        let e32: f32 = generalization_bound(10, 1000.0, 0.01).unwrap();
        assert!((e32 as f64 - e).abs() < 1e-5);
    }

    #[test]
    fn memorizing_scheme_is_skipped() {
        let rep = monte_carlo_compression_check(
            |_, _| {
                Ok(SchemeTrial {
                    r: 20,
                    m: 20,
                    consistent: true,
                    true_error: 0.9,
                })
            },
            0.1,
            5,
            &RandomStream::new(0),
        )
        .unwrap();
        assert_eq!(rep.evaluated, 0);
        assert_eq!(rep.failures, 0);
    }
}
