//! One-inclusion graphs over finite classes, orientations, the (k-)DS
//! dimension and the list learners built on them.

mod class;
mod cover;
mod dimension;
mod graph;
mod listpac;
mod orientation;
mod predict;
mod wrong_label;

pub use class::{ClassFile, FiniteClass};
pub use cover::{cover_rounds, initial_cover, CoverOutcome, CoverRound, DEFAULT_SEARCH_BUDGET};
pub use dimension::{kds_dimension, neighbor_core, DimensionReport, DEFAULT_DIMENSION_BUDGET};
pub use graph::{build_oig, Hyperedge, OneInclusionGraph};
pub use listpac::{k_list_pac_learn, replay_list_pac, ListPacOutcome, ListPacParams, ReductionRound};
pub use orientation::{find_orientation, Orientation, OrientationStrategy, DEFAULT_ORIENTATION_BUDGET};
pub use predict::{one_inclusion_list_predict, LeaveOneOut, OneInclusionLearner, OrientedProjection};
pub use wrong_label::{vote_count, wrong_label_learner, GameParams, WrongLabelOutcome};
