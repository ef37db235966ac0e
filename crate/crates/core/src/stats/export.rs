//! JSON model documents.

use serde::{Deserialize, Serialize};

use super::{FuzzyModel, KMeansModel, LdaModel, PcaModel};
use crate::anthro::{ColumnScaler, PopulationStats};
use crate::error::{Error, Result};
use crate::ShapeLabel;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StatsModel {
    Pca(PcaModel),
    Kmeans(KMeansModel),
    Fuzzy(FuzzyModel),
    Lda(LdaModel),
    DropStats(PopulationStats),
    Scaler(ColumnScaler),
}

/// Versioned wrapper carrying the canonical class order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u64,
    pub classes: Vec<String>,
    #[serde(flatten)]
    pub model: StatsModel,
}

impl ModelDocument {
    pub fn new(model: StatsModel) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            classes: ShapeLabel::names(),
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(s)?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: doc.format_version,
                expected: FORMAT_VERSION,
            });
        }
        if doc.classes != ShapeLabel::names() {
            return Err(Error::invalid("model document class order differs from canonical order"));
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{pca_fit, ComponentSelector, DataMatrix};

    #[test]
    fn pca_document_round_trip() {
        let x = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 3.5], vec![4.0, 1.0]]).unwrap();
        let m = pca_fit(&x, ComponentSelector::Fixed(2)).unwrap();
        let doc = ModelDocument::new(StatsModel::Pca(m));
        let json = doc.to_json().unwrap();
        assert!(json.contains("\"format_version\": 1"));
        assert!(json.contains("\"kind\": \"pca\""));
        assert_eq!(ModelDocument::from_json(&json).unwrap(), doc);
        let bumped = json.replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(ModelDocument::from_json(&bumped), Err(Error::FormatVersion { .. })));
    }
}
