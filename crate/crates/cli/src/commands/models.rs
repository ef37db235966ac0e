//! Fitted measurement-space classifiers stored as JSON.

use std::path::Path;

use bodyshape::anthro::{ratio_features, ColumnScaler, DatasetTable, PopulationStats, RatioSpec};
use bodyshape::stats::{fcm_fit, kmeans_fit, lda_fit, DataMatrix, FcmConfig, KMeansConfig, ModelDocument, StatsModel, FORMAT_VERSION};
use bodyshape::{BodyMeasurements, ShapeLabel, NUM_CLASSES};
use serde::{Deserialize, Serialize};

use crate::cli::Method;
use crate::error::{CliError, CliResult};

/// Standardized ratio features feeding a cluster or discriminant model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub format_version: u64,
    pub classes: Vec<String>,
    pub method: String,
    pub features: Vec<String>,
    pub scaler: ColumnScaler,
    pub model: StatsModel,
    /// Class ordinal given to each cluster by majority vote on the fit set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_labels: Option<Vec<usize>>,
}

pub fn ratio_table(ms: &[BodyMeasurements], labels: Vec<Option<ShapeLabel>>) -> CliResult<DatasetTable> {
    let specs = RatioSpec::defaults();
    let rows = ms
        .iter()
        .map(|m| ratio_features(m, &specs).map(|f| f.values))
        .collect::<Result<Vec<_>, _>>()?;
    let names = specs.iter().map(|s| s.name().to_string()).collect();
    Ok(DatasetTable::new(names, rows, labels)?)
}

/// Most frequent truth label per cluster; ties and empty clusters take the
/// lowest ordinal among the most frequent overall.
pub fn majority_labels(assignments: &[usize], k: usize, truth: &[usize]) -> Vec<usize> {
    let argmax = |counts: &[usize]| counts.iter().enumerate().fold(0, |b, (i, &c)| if c > counts[b] { i } else { b });
    let mut overall = vec![0usize; NUM_CLASSES];
    let mut per = vec![vec![0usize; NUM_CLASSES]; k];
    for (&a, &t) in assignments.iter().zip(truth) {
        per[a][t] += 1;
        overall[t] += 1;
    }
    let fallback = argmax(&overall);
    per.iter()
        .map(|c| if c.iter().all(|&v| v == 0) { fallback } else { argmax(c) })
        .collect()
}

impl ClassifierModel {
    pub fn fit(method: Method, ms: &[BodyMeasurements], labels: &[usize], seed: u64) -> CliResult<Self> {
        let table = ratio_table(ms, vec![None; ms.len()])?;
        let scaler = ColumnScaler::fit(&table)?;
        let x = DataMatrix::from_table(&scaler.transform(&table)?)?;
        let (model, cluster_labels) = match method {
            Method::Kmeans => {
                let m = kmeans_fit(&x, &KMeansConfig::new(NUM_CLASSES, seed))?;
                let map = majority_labels(&m.assignments, m.k, labels);
                (StatsModel::Kmeans(m), Some(map))
            }
            Method::Fcm => {
                let m = fcm_fit(&x, &FcmConfig::new(NUM_CLASSES, seed))?;
                let map = majority_labels(&m.hard_assignments(), m.c, labels);
                (StatsModel::Fuzzy(m), Some(map))
            }
            Method::LdaNm => (StatsModel::Lda(lda_fit(&x, labels, NUM_CLASSES - 1)?), None),
            other => return Err(CliError::usage(format!("{} is not a ratio-feature classifier", other.name()))),
        };
        Ok(Self {
            format_version: FORMAT_VERSION,
            classes: ShapeLabel::names(),
            method: method.name().to_string(),
            features: table.columns().to_vec(),
            scaler,
            model,
            cluster_labels,
        })
    }

    pub fn load(path: &Path, method: Method) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: Self = serde_json::from_str(&text)?;
        if m.format_version != FORMAT_VERSION {
            return Err(CliError::data(format!("unsupported model format_version {}", m.format_version)));
        }
        if m.classes != ShapeLabel::names() {
            return Err(CliError::data("model class order differs from the canonical order"));
        }
        if m.method != method.name() {
            return Err(CliError::usage(format!("{} holds a {} model, not {}", path.display(), m.method, method.name())));
        }
        Ok(m)
    }

    pub fn predict(&self, ms: &[BodyMeasurements]) -> CliResult<Vec<ShapeLabel>> {
        let table = ratio_table(ms, vec![None; ms.len()])?;
        let mapped = |c: usize| -> CliResult<usize> {
            self.cluster_labels
                .as_ref()
                .and_then(|m| m.get(c).copied())
                .ok_or_else(|| CliError::data(format!("cluster {c} has no label mapping")))
        };
        table
            .rows()
            .iter()
            .map(|row| {
                let z = self.scaler.transform_row(row);
                let ordinal = match &self.model {
                    StatsModel::Kmeans(m) => mapped(m.predict_row(&z))?,
                    StatsModel::Fuzzy(m) => {
                        let u = m.memberships_for(&z);
                        mapped(u.iter().enumerate().fold(0, |b, (i, &v)| if v > u[b] { i } else { b }))?
                    }
                    StatsModel::Lda(m) => m.predict_row(&z),
                    _ => return Err(CliError::data("model document is not a classifier")),
                };
                ShapeLabel::from_ordinal(ordinal).ok_or_else(|| CliError::data(format!("class index {ordinal} out of range")))
            })
            .collect()
    }
}

pub fn load_drop_stats(path: &Path) -> CliResult<PopulationStats> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    match ModelDocument::from_json(&text)?.model {
        StatsModel::DropStats(s) => Ok(s),
        _ => Err(CliError::usage(format!("{} does not hold drop statistics", path.display()))),
    }
}
