//! Dimensionality reduction, clustering and agreement statistics.
//!
//! Distances used for clustering are squared Euclidean throughout.

mod export;
mod fcm;
mod kappa;
mod kmeans;
mod lda;
pub mod linalg;
mod matrix;
mod pca;
pub mod select;

pub use export::{ModelDocument, StatsModel, FORMAT_VERSION};
pub use fcm::{fcm_fit, FcmConfig, FcmIteration, FuzzyModel};
pub use kappa::cohen_kappa;
pub use kmeans::{kmeans_fit, kmeans_pp_init, KMeansConfig, KMeansModel};
pub use lda::{lda_fit, LdaModel};
pub use matrix::{sq_dist, DataMatrix};
pub use pca::{pca_fit, ComponentSelector, PcaModel};
pub use select::{select_k, KCriterion, KSelection};
