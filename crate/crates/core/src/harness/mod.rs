//! Data generators, the experiment runner and model files.

mod experiment;
mod gen;
mod io;
mod model;

pub use experiment::{
    evaluate, run_experiment, Aggregate, DataSource, ExperimentConfig, Report, ResultRow, REPORT_SCHEMA,
};
pub use gen::{counterexample, counterexample_alphabet, gen_data, GenSpec, Generated, PlantedParams};
pub use io::{
    parse_dataset, parse_dataset_with, read_class, read_class_file, read_dataset, read_dataset_with, render_dataset,
    write_dataset, write_json,
};
pub use model::{
    env_budget, train, AuditSummary, HedgeDiagnostics, LearnerDescriptor, ListLearnerDescriptor, Model, PipelineConfig,
    Predictor, Trained, MODEL_SCHEMA,
};
