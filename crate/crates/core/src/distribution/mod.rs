//! Tabular data to Boolean features, randomized-quantifier probabilities
//! and compound protected groups.

mod features;
mod groups;
mod probs;
mod schema;
mod table;

pub use features::{
    discretize, model_thresholds, AttributeLayout, BooleanDataset, Feature, FeatureMap, Layout, Predicate,
};
pub use groups::{enumerate_groups, group_of, group_to_unit_clauses, CompoundGroup};
pub use probs::{estimate_probs, Context, ProbabilityTable};
pub use schema::{AttributeKind, AttributeSpec, CategoricalEncoding, Schema, DEFAULT_BINS};
pub use table::RawTable;
