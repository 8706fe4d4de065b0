//! Synthetic scenarios, a K-Means baseline and the two CVI experiments.

pub mod experiments;
pub mod kmeans;
pub mod scenarios;

pub use experiments::{
    aggregate, cvi_selection_experiment, rank_agreement, scaling_experiment, write_scaling_csv, write_table1_csv, Aggregate,
    BenchRow, ScalingRow, SelectionParams, ORACLE,
};
pub use kmeans::{kmeans, KMeansFit};
pub use scenarios::{generate_scenario, scaling_blobs, scenario, Layout, Scenario, SCENARIOS};
