//! Body-shape classification from binary person-silhouette masks.
//!
//! The crate is organized by stage:
//!
//! * [`silhouette`] ingests and synthesizes masks, applies geometric
//!   augmentation and image filters, and turns a mask into linear
//!   [`BodyMeasurements`].
//! * [`anthro`] builds features in measurement space (drop values, ratio
//!   features) and implements the rule-based drop-value classifier.
//! * [`stats`] holds PCA, LDA, k-means(++), fuzzy c-means, cluster-count
//!   selection and Cohen's kappa.
//! * [`neural`] is a small from-scratch network stack (dense, conv, pooling,
//!   residual and inception blocks) with SGD training and layer freezing.
//! * [`eval`] produces confusion matrices, classification reports and
//!   loss-curve exports.
//!
//! Every stochastic step is driven by [`rng::SplitMix64`] so that results are
//! a pure function of the seed.

pub mod anthro;
pub mod error;
pub mod eval;
mod label;
pub mod neural;
pub mod rng;
pub mod silhouette;
pub mod stats;

pub use error::{Error, Result};
pub use label::ShapeLabel;
pub use silhouette::{BodyMeasurements, GrayImage, Mask, SilhouetteParams};

/// Number of body-shape classes.
pub const NUM_CLASSES: usize = ShapeLabel::ALL.len();
