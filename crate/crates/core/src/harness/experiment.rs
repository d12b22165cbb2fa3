use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gen::{gen_data, GenSpec, Generated};
use super::io::{read_class, read_dataset};
use super::model::{train, PipelineConfig, Trained};
use crate::compression::generalization_bound;
use crate::domain::{Dataset, RandomStream};
use crate::error::{Error, Result};
use crate::oig::FiniteClass;

pub const REPORT_SCHEMA: &str = "mcboost-experiment/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    /// Fresh data per seed, from stream child `data`.
    Generate(GenSpec),
    /// The same files for every seed.
    Files {
        train: PathBuf,
        #[serde(default)]
        heldout: Option<PathBuf>,
        #[serde(default)]
        class: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSource,
    #[serde(flatten)]
    pub pipeline: PipelineConfig,
    pub seeds: Vec<u64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Record wall time per run; off by default so reports are
    /// reproducible byte for byte.
    #[serde(default)]
    pub timing: bool,
}

fn default_delta() -> f64 {
    0.1
}

/// One seed of an experiment. Fields that do not apply are absent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// Bound value; absent when the run is not consistent or `r ≥ m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_accuracy: Option<f64>,
    /// Reported only when every audited weak-learner call passed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistent: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heldout_error: Option<f64>,
    /// Exact error under the generating distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_violated: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_pass_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_calls: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plurality_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elimination_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub failed: usize,
    /// Runs that reported consistency (all audits passed).
    pub audited: usize,
    pub consistent: usize,
    pub bound_violations: usize,
    pub mean_r: Option<f64>,
    pub mean_epsilon: Option<f64>,
    pub mean_heldout_error: Option<f64>,
    pub mean_true_error: Option<f64>,
    pub mean_audit_pass_rate: Option<f64>,
    pub mean_oracle_calls: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub pipeline: String,
    pub rows: Vec<ResultRow>,
    pub aggregate: Aggregate,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = values.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    (n > 0).then(|| s / n as f64)
}

impl Aggregate {
    pub fn of(rows: &[ResultRow]) -> Self {
        Aggregate {
            runs: rows.len(),
            failed: rows.iter().filter(|r| r.error.is_some()).count(),
            audited: rows.iter().filter(|r| r.consistent.is_some()).count(),
            consistent: rows.iter().filter(|r| r.consistent == Some(true)).count(),
            bound_violations: rows.iter().filter(|r| r.bound_violated == Some(true)).count(),
            mean_r: mean(rows.iter().filter_map(|r| r.r.map(|v| v as f64))),
            mean_epsilon: mean(rows.iter().filter_map(|r| r.epsilon)),
            mean_heldout_error: mean(rows.iter().filter_map(|r| r.heldout_error)),
            mean_true_error: mean(rows.iter().filter_map(|r| r.true_error)),
            mean_audit_pass_rate: mean(rows.iter().filter_map(|r| r.audit_pass_rate)),
            mean_oracle_calls: mean(rows.iter().filter_map(|r| r.oracle_calls.map(|v| v as f64))),
        }
    }
}

struct Loaded {
    data: Generated,
    class: Option<Arc<FiniteClass>>,
}

fn load(source: &DataSource, seed: u64) -> Result<Loaded> {
    let data = match source {
        DataSource::Generate(spec) => gen_data(spec, &RandomStream::new(seed).child("data"))?,
        DataSource::Files { train, heldout, class } => {
            let ds = read_dataset(train)?;
            let held = heldout.as_ref().map(|p| read_dataset(p)).transpose()?;
            let class = class.as_ref().map(|p| read_class(p, &ds)).transpose()?;
            Generated {
                train: ds,
                heldout: held,
                class,
                target_row: None,
                universe_weights: None,
            }
        }
    };
    let class = data.class.clone().map(Arc::new);
    Ok(Loaded { data, class })
}

fn error_on(trained: &Trained, ds: &Dataset, list: bool) -> f64 {
    1.0 - trained.predictor.train_accuracy(ds, list)
}

/// Measures one trained run against its data.
pub fn evaluate(trained: &Trained, data: &Generated, pipeline: &PipelineConfig, delta: f64, seed: u64) -> ResultRow {
    let list = pipeline.is_list();
    let ds = &data.train;
    let m = ds.len();
    let r = trained.compression_size();
    let train_accuracy = trained.predictor.train_accuracy(ds, list);
    let pass = trained.model.audits.pass_rate;
    let consistent = (pass >= 1.0).then_some(train_accuracy >= 1.0);
    let epsilon = match consistent {
        Some(true) => generalization_bound(r, m as f64, delta).ok(),
        _ => None,
    };
    let heldout_error = data.heldout.as_ref().map(|h| error_on(trained, h, list));
    let p = &trained.predictor;
    let true_error = if list {
        data.true_list_error(&|x| p.list(x))
    } else {
        data.true_error(&|x| p.predict(x))
    };
    let bound_violated = epsilon.and_then(|e| true_error.or(heldout_error).map(|err| err > e));
    ResultRow {
        seed,
        m,
        r: Some(r),
        epsilon,
        train_accuracy: Some(train_accuracy),
        consistent,
        heldout_error,
        true_error,
        bound_violated,
        audit_pass_rate: Some(pass),
        oracle_calls: Some(trained.oracle_calls),
        gamma: trained.model.audits.gamma,
        list_size: trained.list_size,
        plurality_accuracy: trained.hedge.as_ref().map(|h| h.plurality_accuracy),
        elimination_ok: trained.hedge.as_ref().map(|h| h.elimination_ok),
        ..Default::default()
    }
}

fn run_seed(config: &ExperimentConfig, seed: u64) -> ResultRow {
    let start = Instant::now();
    let result = load(&config.data, seed).and_then(|l| {
        let t = train(&config.pipeline, &l.data.train, l.class.as_ref(), seed)?;
        Ok(evaluate(&t, &l.data, &config.pipeline, config.delta, seed))
    });
    let mut row = result.unwrap_or_else(|e| ResultRow {
        seed,
        error: Some(e.to_string()),
        ..Default::default()
    });
    if config.timing {
        row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    row
}

/// Runs every seed (in parallel) and aggregates. A failing seed becomes a
/// row with `error` set rather than failing the experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    if config.seeds.is_empty() {
        return Err(Error::InvalidParams("experiment needs at least one seed".into()));
    }
    if !(config.delta > 0.0 && config.delta <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "delta must lie in (0, 1], got {}",
            config.delta
        )));
    }
    let rows: Vec<ResultRow> = config.seeds.par_iter().map(|&s| run_seed(config, s)).collect();
    Ok(Report {
        schema: REPORT_SCHEMA.into(),
        pipeline: config.pipeline.name().into(),
        aggregate: Aggregate::of(&rows),
        rows,
    })
}

#[derive(Serialize)]
struct Tagged<'a, T> {
    schema: &'a str,
    #[serde(rename = "type")]
    kind: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

const CSV_COLUMNS: [&str; 17] = [
    "seed",
    "error",
    "m",
    "r",
    "epsilon",
    "train_accuracy",
    "consistent",
    "heldout_error",
    "true_error",
    "bound_violated",
    "audit_pass_rate",
    "oracle_calls",
    "gamma",
    "list_size",
    "plurality_accuracy",
    "elimination_ok",
    "wall_ms",
];

fn csv_cell(v: Option<&serde_json::Value>) -> String {
    match v {
        None | Some(serde_json::Value::Null) => String::new(),
        Some(serde_json::Value::String(s)) => format!("\"{}\"", s.replace('"', "\"\"")),
        Some(v) => v.to_string(),
    }
}

impl Report {
    /// One JSON object per line: the rows, then the aggregate.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(
                &serde_json::to_string(&Tagged {
                    schema: &self.schema,
                    kind: "row",
                    body: row,
                })
                .expect("row"),
            );
            out.push('\n');
        }
        let agg = Tagged {
            schema: &self.schema,
            kind: "aggregate",
            body: &self.aggregate,
        };
        out.push_str(&serde_json::to_string(&agg).expect("aggregate"));
        out.push('\n');
        out
    }

    /// Rows as CSV, followed by a blank line and the aggregate as a
    /// two-line CSV.
    pub fn to_csv(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for row in &self.rows {
            let v = serde_json::to_value(row).expect("row");
            let cells: Vec<String> = CSV_COLUMNS.iter().map(|c| csv_cell(v.get(*c))).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out.push('\n');
        let agg = serde_json::to_value(&self.aggregate).expect("aggregate");
        let obj = agg.as_object().expect("aggregate is an object");
        out.push_str(&obj.keys().cloned().collect::<Vec<_>>().join(","));
        out.push('\n');
        out.push_str(&obj.values().map(|v| csv_cell(Some(v))).collect::<Vec<_>>().join(","));
        out.push('\n');
        out
    }
}
