//! Structure-centric clustering on kNN graph topology.
//!
//! The crate is organized bottom-up:
//!
//! - [`data`]: datasets, labelings with a `-1` noise sentinel, CSV input/output
//! - [`seed`]: deterministic child-seed derivation
//! - [`knn`]: exact kNN graphs and their undirected views
//! - [`graph_scope`]: topology-only cluster validity index
//! - [`cvi`]: Silhouette, Davies-Bouldin and Calinski-Harabasz baselines
//! - [`supervised`]: ARI, Kendall tau-b and the SCOPE decomposition
//! - [`adabox`]: spectral embedding + adaptive box grid clusterer
//! - [`slcd`]: sample, search, deploy pipeline
//! - [`bench`]: synthetic scenarios, K-Means and the CVI experiments

pub mod adabox;
pub mod bench;
pub mod cvi;
pub mod data;
pub mod error;
pub mod graph_scope;
pub mod knn;
pub mod seed;
pub mod slcd;
pub mod supervised;

pub use data::{Dataset, Labeling, NOISE};
pub use error::{Error, Result};
pub use knn::{KnnGraph, UndirectedGraph};
