//! Confusion matrices, classification reports and loss-curve export.

mod confusion;
mod curve;
mod report;

pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use curve::{curve_csv, export_curves, read_curves};
pub use report::{f1_score, render_report, report, round2, AverageMetrics, ClassMetrics, ClassificationReport, ReportStyle};
