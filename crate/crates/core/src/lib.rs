//! Precedence-filtered local explanations for actionable defect reduction.
//!
//! The crate explains black-box defect predictions with a LIME-style local
//! linear surrogate, turns explanations into change plans, restricts those
//! plans to attributes that changed most between two earlier releases, and
//! scores plans against a later release (the K-test).
//!
//! Everything here is pure computation over in-memory datasets and builds
//! without `std`; file formats, configuration and the command line live in
//! the `timelime` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod data;
pub mod error;
pub mod evaluate;
pub mod explain;
pub mod forest;
pub mod metrics;
pub mod plan;
pub mod precedence;
pub mod seed;
pub mod stats;

pub use crate::data::{align_releases, smote, AlignedTriple, CodeUnit, Normalizer, ReleaseDataset};
pub use crate::error::{Error, Result};
pub use crate::evaluate::{
    compare_planners, ndpv_delta, overlap_score, run_ktest, scaled_score, weighted_score, EvaluationRecord, EvaluationReport,
    KTestConfig, OverlapMode, PlannerSummary, ReleaseTriple, ScaledScore,
};
pub use crate::explain::{
    explain_instance, fit_discretizer, generate_samples, k_lasso, kernel_weight, Discretizer, Explanation, ExplanationEntry,
    SampleSet,
};
pub use crate::forest::{train_forest, BlackBox, Classifier, DecisionTree, ForestParams};
pub use crate::metrics::{FEATURE_COUNT, FEATURE_NAMES};
pub use crate::plan::{classical_plan, flip_around_mid, random_walk_plan, time_plan, Interval, Plan, PlannerId};
pub use crate::precedence::{build_profile, hedges_g, pooled_std, PrecedenceProfile};
