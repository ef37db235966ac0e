//! Measurement-space features and the drop-value rule classifier.

mod drop;
mod ratio;
mod table;

pub use drop::{classify_drop, drop_values, fit_population_stats, DimStats, DropValues, PopulationStats};
pub use ratio::{ratio_features, RatioFeatures, RatioSpec, DEFAULT_RATIOS};
pub use table::{normalize, remove_outliers, ColumnScaler, DatasetTable};
