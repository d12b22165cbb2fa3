//! Multiclass boosting with hint lists.
//!
//! The pipeline: a weak learner trained against a list of candidate labels
//! ([`weak_learn`]), Hedge with min-score label elimination ([`hedge`]), an
//! initial hint built from residual covering ([`hint`]) and the recursive
//! booster that shrinks every candidate list by one label per phase
//! ([`recursive`]). Every run leaves a [`compression::CompressionRecord`] from
//! which the predictor can be replayed and a generalization bound computed.
//! [`listlearn`] converts between weak and list learners, [`oig`] holds the
//! desk-scale one-inclusion graph toolkit and [`harness`] the data
//! generators, experiment runner and model files used by the CLI.
//!
//! Real-valued state is generic over [`Scalar`] (`f32` or `f64`, default
//! `f64`); the `*32` aliases below name the single-precision variants.

pub mod compression;
pub mod domain;
pub mod error;
pub mod harness;
pub mod hedge;
pub mod hint;
pub mod listlearn;
pub mod oig;
pub mod recursive;
pub mod scalar;
pub mod weak_learn;

pub use compression::{
    compression_size, generalization_bound, reconstruct, CompressionRecord, PhaseRecord, PhaseTag, SlotRecord,
};
pub use domain::{
    sample_iid, Alphabet, Dataset, ExampleDistribution, Instance, Label, LabeledExample, ListFunction, ListId,
    ListKind, ListRule, RandomStream,
};
pub use error::{Error, Result};
pub use harness::{gen_data, run_experiment, ExperimentConfig, GenSpec, Model, PipelineConfig, Report};
pub use hedge::{eliminate_min_label, run_hedge, HedgeRun, HedgeState, ScoreTable};
pub use hint::{build_initial_hint, InitialHint};
pub use listlearn::{
    list_boost, list_to_weak, weak_to_list, ListBoostConfig, ListLearner, ListToWeakParams, WeakToListParams,
};
pub use oig::{
    build_oig, find_orientation, k_list_pac_learn, kds_dimension, one_inclusion_list_predict, FiniteClass,
    OneInclusionGraph, OrientationStrategy,
};
pub use recursive::{adaptive_gamma, predict_final, recursive_boost, BoostConfig, BoostOutcome, StagedListChain};
pub use scalar::Scalar;
pub use weak_learn::{
    audit_brg, BrgAudit, BrgAuditLog, Classifier, TrainRequest, WeakHypothesis, WeakLearner, WeakLearnerSpec,
};

pub type ExampleDistribution32 = ExampleDistribution<f32>;
pub type BrgAudit32 = BrgAudit<f32>;
pub type BrgAuditLog32 = BrgAuditLog<f32>;
pub type HedgeState32 = HedgeState<f32>;
pub type HedgeRun32 = HedgeRun<f32>;
pub type BoostConfig32 = BoostConfig<f32>;
pub type BoostOutcome32 = BoostOutcome<f32>;
pub type InitialHint32 = InitialHint<f32>;
pub type WeakToListParams32 = WeakToListParams<f32>;
