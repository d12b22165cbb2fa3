use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::compression::{compression_size, CompressionRecord, PhaseRecord, PhaseTag};
use crate::domain::{Dataset, Instance, Label, ListFunction, RandomStream};
use crate::error::{Error, Result};
use crate::hedge::{default_eta, default_rounds, eliminate_min_label, run_hedge, EdgeAudit, ScoreTable};
use crate::listlearn::{
    list_boost, list_boost_learner, replay_weak_to_list, ListBoostConfig, ListLearner, PlantedListLearner,
    VersionSpaceList,
};
use crate::oig::{k_list_pac_learn, replay_list_pac, ClassFile, FiniteClass, ListPacParams};
use crate::recursive::{adaptive_gamma, recursive_boost, replay_slot, BoostConfig, StagedListChain};
use crate::weak_learn::{
    plurality, CalibratedOracle, ConstantLearner, Erm, MemorizingOracle, RandomGuess, StumpLearner, TooWeak,
    WeakLearner, WeakLearnerSpec,
};

pub const MODEL_SCHEMA: &str = "mcboost-model/1";

/// Serializable name of a weak learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LearnerDescriptor {
    /// ERM over the class file.
    Erm,
    Stump,
    TooWeak,
    Oracle,
    Calibrated {
        edge: f64,
    },
    Random {
        salt: u64,
    },
    Constant {
        label: u32,
    },
}

impl FromStr for LearnerDescriptor {
    type Err = Error;

    /// `erm`, `stump`, `too-weak`, `oracle`, `calibrated:EDGE`,
    /// `random:SALT` or `constant:LABEL`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num =
            |what: &str| -> Result<&str> { arg.ok_or_else(|| Error::Parse(format!("learner {name} needs :{what}"))) };
        let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("learner {s}: {e}"));
        Ok(match name {
            "erm" => LearnerDescriptor::Erm,
            "stump" => LearnerDescriptor::Stump,
            "too-weak" => LearnerDescriptor::TooWeak,
            "oracle" => LearnerDescriptor::Oracle,
            "calibrated" => LearnerDescriptor::Calibrated {
                edge: num("EDGE")?.parse().map_err(|e| bad(&e))?,
            },
            "random" => LearnerDescriptor::Random {
                salt: num("SALT")?.parse().map_err(|e| bad(&e))?,
            },
            "constant" => LearnerDescriptor::Constant {
                label: num("LABEL")?.parse().map_err(|e| bad(&e))?,
            },
            _ => return Err(Error::Parse(format!("unknown learner {s}"))),
        })
    }
}

impl LearnerDescriptor {
    pub fn needs_class(&self) -> bool {
        matches!(self, LearnerDescriptor::Erm)
    }

    pub fn build(&self, class: Option<&Arc<FiniteClass>>, m0: usize) -> Result<WeakLearnerSpec> {
        let learner: Arc<dyn WeakLearner> = match self {
            LearnerDescriptor::Erm => {
                let class = class.ok_or_else(|| Error::InvalidParams("erm needs a class file".into()))?;
                Arc::new(Erm::new(Arc::clone(class))?)
            }
            LearnerDescriptor::Stump => Arc::new(StumpLearner),
            LearnerDescriptor::TooWeak => Arc::new(TooWeak),
            LearnerDescriptor::Oracle => Arc::new(MemorizingOracle),
            LearnerDescriptor::Calibrated { edge } => Arc::new(CalibratedOracle::new(*edge)?),
            LearnerDescriptor::Random { salt } => Arc::new(RandomGuess::new(*salt)),
            LearnerDescriptor::Constant { label } => Arc::new(ConstantLearner::new(Label(*label))),
        };
        WeakLearnerSpec::new(learner, m0)
    }
}

/// Serializable name of a list learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ListLearnerDescriptor {
    /// Lists around class row `target_row` that miss on an `ε` fraction.
    Planted {
        k: usize,
        epsilon: f64,
        #[serde(default)]
        salt: u64,
        target_row: usize,
    },
    VersionSpace {
        k: usize,
    },
}

impl ListLearnerDescriptor {
    pub fn k(&self) -> usize {
        match self {
            ListLearnerDescriptor::Planted { k, .. } | ListLearnerDescriptor::VersionSpace { k } => *k,
        }
    }

    pub fn build(&self, class: &Arc<FiniteClass>) -> Result<Arc<dyn ListLearner>> {
        Ok(match self {
            ListLearnerDescriptor::Planted {
                k,
                epsilon,
                salt,
                target_row,
            } => {
                let target = Erm::new(Arc::clone(class))?
                    .member(*target_row)
                    .ok_or_else(|| Error::InvalidParams(format!("class has no row {target_row}")))?;
                Arc::new(PlantedListLearner::new(
                    Arc::new(target),
                    class.alphabet(),
                    *k,
                    *epsilon,
                    *salt,
                )?)
            }
            ListLearnerDescriptor::VersionSpace { k } => Arc::new(VersionSpaceList::new(Arc::clone(class), *k)?),
        })
    }
}

fn default_m0() -> usize {
    16
}

/// A training pipeline and its parameters. Unset values take the library
/// defaults for the training set at hand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pipeline", rename_all = "kebab-case")]
pub enum PipelineConfig {
    /// Recursive boosting with hint lists.
    Boost {
        learner: LearnerDescriptor,
        #[serde(default = "default_m0")]
        m0: usize,
        gamma: f64,
        #[serde(default)]
        rounds: Option<usize>,
        #[serde(default)]
        eta: Option<f64>,
        #[serde(default)]
        p: Option<usize>,
        /// Halve `γ` on failure down to `gamma_min`.
        #[serde(default)]
        adaptive: bool,
        #[serde(default)]
        gamma_min: Option<f64>,
    },
    /// One Hedge run on the universal list; predicts the plurality vote.
    Hedge {
        learner: LearnerDescriptor,
        #[serde(default = "default_m0")]
        m0: usize,
        gamma: f64,
        #[serde(default)]
        rounds: Option<usize>,
        #[serde(default)]
        eta: Option<f64>,
    },
    /// List-to-weak followed by weak-to-list.
    ListBoost {
        list_learner: ListLearnerDescriptor,
        eps0: f64,
        #[serde(default)]
        config: ListBoostConfig,
    },
    /// `k`-list PAC learning over the class file.
    OigListpac { params: ListPacParams },
}

impl PipelineConfig {
    pub fn name(&self) -> &'static str {
        match self {
            PipelineConfig::Boost { .. } => "boost",
            PipelineConfig::Hedge { .. } => "hedge",
            PipelineConfig::ListBoost { .. } => "list-boost",
            PipelineConfig::OigListpac { .. } => "oig-listpac",
        }
    }

    pub fn needs_class(&self) -> bool {
        match self {
            PipelineConfig::Boost { learner, .. } | PipelineConfig::Hedge { learner, .. } => learner.needs_class(),
            PipelineConfig::ListBoost { .. } | PipelineConfig::OigListpac { .. } => true,
        }
    }

    /// Outputs lists rather than single labels.
    pub fn is_list(&self) -> bool {
        matches!(
            self,
            PipelineConfig::ListBoost { .. } | PipelineConfig::OigListpac { .. }
        )
    }

    /// The same pipeline with its seed set where the config carries one.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        match &mut c {
            PipelineConfig::ListBoost { config, .. } => config.seed = seed,
            PipelineConfig::OigListpac { params } => params.seed = seed,
            _ => {}
        }
        c
    }

    fn with_budget(&self, budget: Option<u64>) -> Self {
        let mut c = self.clone();
        if let (PipelineConfig::OigListpac { params }, Some(b)) = (&mut c, budget) {
            params.cover_budget = b;
            params.dimension_budget = b;
        }
        c
    }
}

/// Weak-learner audit counts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub calls: usize,
    pub failures: usize,
    /// Fraction of audited calls that passed; 1 when nothing was audited.
    pub pass_rate: f64,
    /// `γ` of the final run (boosting only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl AuditSummary {
    fn of(calls: usize, failures: usize) -> Self {
        AuditSummary {
            calls,
            failures,
            pass_rate: if calls == 0 {
                1.0
            } else {
                (calls - failures) as f64 / calls as f64
            },
            gamma: None,
        }
    }
}

/// A trained model as stored on disk: enough to replay the predictor from
/// the training set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub schema: String,
    pub config: PipelineConfig,
    pub seed: u64,
    /// External label values of the training alphabet.
    pub alphabet: Vec<i64>,
    pub record: CompressionRecord,
    pub audits: AuditSummary,
    /// Boosting parameters actually used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved: Option<BoostConfig<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassFile>,
}

/// A trained predictor.
#[derive(Clone, Debug)]
pub enum Predictor {
    Chain(StagedListChain),
    Plurality(ScoreTable),
    List(ListFunction),
}

impl Predictor {
    pub fn predict(&self, x: &Instance) -> Label {
        match self {
            Predictor::Chain(c) => c.predict(x),
            Predictor::Plurality(t) => plurality_vote(t, x),
            Predictor::List(l) => l.lookup(x).first().copied().unwrap_or(Label(0)),
        }
    }

    /// The candidate list at `x`; the prediction alone for plurality.
    pub fn list(&self, x: &Instance) -> Vec<Label> {
        match self {
            Predictor::Chain(c) => c.final_list().lookup(x).into_owned(),
            Predictor::Plurality(t) => vec![plurality_vote(t, x)],
            Predictor::List(l) => l.lookup(x).into_owned(),
        }
    }

    /// Training examples whose label the predictor gets (single-label
    /// pipelines) or lists (list pipelines).
    pub fn train_accuracy(&self, dataset: &Dataset, list: bool) -> f64 {
        let hits = dataset
            .examples()
            .iter()
            .filter(|e| {
                if list {
                    self.list(&e.instance).contains(&e.label)
                } else {
                    self.predict(&e.instance) == e.label
                }
            })
            .count();
        hits as f64 / dataset.len() as f64
    }
}

fn plurality_vote(table: &ScoreTable, x: &Instance) -> Label {
    plurality(table.hypotheses().iter().map(|h| h.predict(x))).unwrap_or(Label(0))
}

/// Extra per-run measurements of the Hedge pipeline.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HedgeDiagnostics {
    /// Training accuracy of the plurality vote.
    pub plurality_accuracy: f64,
    /// The min-score label is wrong at every training example.
    pub elimination_ok: bool,
}

/// Output of [`train`].
#[derive(Clone, Debug)]
pub struct Trained {
    pub model: Model,
    pub predictor: Predictor,
    pub oracle_calls: usize,
    pub hedge: Option<HedgeDiagnostics>,
    pub list_size: Option<usize>,
}

impl Trained {
    pub fn compression_size(&self) -> usize {
        compression_size(&self.model.record)
    }
}

fn need_class(class: Option<&Arc<FiniteClass>>) -> Result<&Arc<FiniteClass>> {
    class.ok_or_else(|| Error::InvalidParams("this pipeline needs a class file".into()))
}

fn external_alphabet(dataset: &Dataset) -> Vec<i64> {
    let a = dataset.alphabet();
    a.labels().map(|l| a.external(l)).collect()
}

/// Value of the `MCBOOST_BUDGET` environment variable, if set.
pub fn env_budget() -> Option<u64> {
    std::env::var("MCBOOST_BUDGET").ok().and_then(|v| v.trim().parse().ok())
}

fn boost_config(
    m: usize,
    gamma: f64,
    rounds: Option<usize>,
    eta: Option<f64>,
    p: Option<usize>,
    m0: usize,
    seed: u64,
) -> Result<BoostConfig<f64>> {
    let mut c = BoostConfig::for_sample(m, gamma)?.with_seed(seed);
    if let Some(t) = rounds {
        c.rounds = t;
        c.eta = default_eta(m, t);
    }
    if let Some(e) = eta {
        c.eta = e;
    }
    if let Some(p) = p {
        c.p = p;
    }
    c.m0 = Some(m0);
    c.validate()?;
    Ok(c)
}

fn hedge_params(m: usize, gamma: f64, rounds: Option<usize>, eta: Option<f64>) -> (usize, f64) {
    let t = rounds.unwrap_or_else(|| default_rounds(m, gamma));
    (t, eta.unwrap_or_else(|| default_eta(m, t)))
}

/// Trains `config` on `dataset` with seed `seed`. The budget from
/// `MCBOOST_BUDGET` replaces the list-PAC search budgets when set.
pub fn train(
    config: &PipelineConfig,
    dataset: &Dataset,
    class: Option<&Arc<FiniteClass>>,
    seed: u64,
) -> Result<Trained> {
    let config = config.with_seed(seed).with_budget(env_budget());
    let m = dataset.len();
    let class_file = class.map(|c| c.to_file(dataset.alphabet()));
    let alphabet = external_alphabet(dataset);
    let model = |record: CompressionRecord, audits: AuditSummary, resolved: Option<BoostConfig<f64>>| Model {
        schema: MODEL_SCHEMA.into(),
        config: config.clone(),
        seed,
        alphabet: alphabet.clone(),
        record,
        audits,
        resolved,
        class: class_file.clone(),
    };
    match &config {
        PipelineConfig::Boost {
            learner,
            m0,
            gamma,
            rounds,
            eta,
            p,
            adaptive,
            gamma_min,
        } => {
            let spec = learner.build(class, *m0)?;
            let base = boost_config(m, *gamma, *rounds, *eta, *p, *m0, seed)?;
            let (out, used) = if *adaptive {
                adaptive_gamma(dataset, &spec, &base, *gamma, *gamma_min)?
            } else {
                (recursive_boost(dataset, &spec, &base)?, *gamma)
            };
            let calls = out.hint_audits.len() + out.audits.len();
            let mut audits = AuditSummary::of(calls, out.hint_audits.failures() + out.audits.failures());
            audits.gamma = Some(used);
            Ok(Trained {
                oracle_calls: out.oracle_calls,
                model: model(out.record.clone(), audits, Some(out.config.clone())),
                predictor: Predictor::Chain(out.chain),
                hedge: None,
                list_size: None,
            })
        }
        PipelineConfig::Hedge {
            learner,
            m0,
            gamma,
            rounds,
            eta,
        } => {
            let spec = learner.build(class, *m0)?;
            let (t, eta) = hedge_params(m, *gamma, *rounds, *eta);
            let mu = ListFunction::universal(dataset.alphabet_size());
            let audit = EdgeAudit::brg(dataset.alphabet_size(), *gamma);
            let run = run_hedge(
                dataset,
                &mu,
                &spec,
                t,
                eta,
                &RandomStream::new(seed).child("hedge"),
                Some(audit),
            )?;
            let all: Vec<Label> = dataset.alphabet().labels().collect();
            let mut elimination_ok = true;
            for e in dataset.examples() {
                if eliminate_min_label(&run.scores, &e.instance, &all)? == e.label {
                    elimination_ok = false;
                }
            }
            let predictor = Predictor::Plurality(run.scores.clone());
            let diag = HedgeDiagnostics {
                plurality_accuracy: predictor.train_accuracy(dataset, false),
                elimination_ok,
            };
            let mut record = CompressionRecord::new(m);
            record.push(PhaseRecord {
                tag: PhaseTag::Hedge { j: 1 },
                list_ref: None,
                list_size: dataset.alphabet_size(),
                slots: run.scores.hypotheses().iter().map(|h| h.record().clone()).collect(),
            });
            let mut audits = AuditSummary::of(run.audits.len(), run.audits.failures());
            audits.gamma = Some(*gamma);
            Ok(Trained {
                model: model(record, audits, None),
                predictor,
                oracle_calls: t,
                hedge: Some(diag),
                list_size: None,
            })
        }
        PipelineConfig::ListBoost {
            list_learner,
            eps0,
            config: lb,
        } => {
            let class = need_class(class)?;
            let out = list_boost(list_learner.build(class)?, list_learner.k(), *eps0, dataset, lb)?;
            let audits = AuditSummary::of(out.run.audits.len(), out.run.audits.failures());
            Ok(Trained {
                oracle_calls: out.run.scores.rounds(),
                model: model(out.record, audits, None),
                predictor: Predictor::List(out.list),
                hedge: None,
                list_size: Some(out.list_size),
            })
        }
        PipelineConfig::OigListpac { params } => {
            let class = need_class(class)?;
            let out = k_list_pac_learn(Arc::clone(class), dataset, params)?;
            let calls = out.record.phases.iter().map(|p| p.slots.len()).sum();
            Ok(Trained {
                model: model(out.record, AuditSummary::of(0, 0), None),
                predictor: Predictor::List(out.list),
                oracle_calls: calls,
                hedge: None,
                list_size: Some(params.k),
            })
        }
    }
}

impl Model {
    /// The class stored with the model, resolved against `dataset`'s
    /// alphabet.
    pub fn class(&self, dataset: &Dataset) -> Result<Option<Arc<FiniteClass>>> {
        self.class
            .clone()
            .map(|f| FiniteClass::from_file(f, dataset.alphabet()).map(Arc::new))
            .transpose()
    }

    /// Replays the predictor from the record and the training set. Fails
    /// with `NonDeterministicLearner` when a stored fingerprint does not
    /// match.
    pub fn reconstruct(&self, dataset: &Dataset) -> Result<Predictor> {
        if self.schema != MODEL_SCHEMA {
            return Err(Error::MalformedRecord(format!(
                "unsupported model schema {}",
                self.schema
            )));
        }
        if self.record.m != dataset.len() {
            return Err(Error::MalformedRecord(format!(
                "model was trained on {} examples, got {}",
                self.record.m,
                dataset.len()
            )));
        }
        if self.alphabet != external_alphabet(dataset) {
            return Err(Error::MalformedRecord(
                "training set alphabet differs from the model's".into(),
            ));
        }
        let class = self.class(dataset)?;
        match &self.config {
            PipelineConfig::Boost { learner, m0, .. } => {
                let spec = learner.build(class.as_ref(), *m0)?;
                Ok(Predictor::Chain(crate::compression::reconstruct(
                    &self.record,
                    dataset,
                    &spec,
                )?))
            }
            PipelineConfig::Hedge { learner, m0, .. } => {
                let spec = learner.build(class.as_ref(), *m0)?;
                if !spec.deterministic() {
                    return Err(Error::NonDeterministicLearner { phase: 0, slot: 0 });
                }
                self.record.validate()?;
                let phase = match self.record.phases.as_slice() {
                    [p] if matches!(p.tag, PhaseTag::Hedge { .. }) => p,
                    _ => return Err(Error::MalformedRecord("expected a single Hedge phase".into())),
                };
                let mu = ListFunction::universal(dataset.alphabet_size());
                let mut table = ScoreTable::new(dataset);
                for (s, slot) in phase.slots.iter().enumerate() {
                    table.push(replay_slot(dataset, &spec, &mu, slot, 1, s)?);
                }
                Ok(Predictor::Plurality(table))
            }
            PipelineConfig::ListBoost {
                list_learner,
                eps0,
                config,
            } => {
                let class = need_class(class.as_ref())?;
                let spec = list_boost_learner(list_learner.build(class)?, list_learner.k(), *eps0, config)?;
                Ok(Predictor::List(replay_weak_to_list(&self.record, dataset, &spec)?))
            }
            PipelineConfig::OigListpac { params } => {
                let class = need_class(class.as_ref())?;
                Ok(Predictor::List(replay_list_pac(
                    &self.record,
                    Arc::clone(class),
                    dataset,
                    params.k,
                    params.strategy,
                )?))
            }
        }
    }
}
