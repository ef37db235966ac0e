//! Dataset manifest: CSV with header `path,label`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ShapeLabel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    /// `None` for unlabeled masks (empty label column).
    pub label: Option<ShapeLabel>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    path: String,
    label: String,
}

pub fn read_manifest<R: Read>(reader: R) -> Result<Vec<ManifestEntry>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["path", "label"] {
        return Err(Error::invalid(format!(
            "manifest header must be `path,label`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize::<Row>()
        .map(|row| {
            let row = row?;
            let label = if row.label.trim().is_empty() {
                None
            } else {
                Some(row.label.parse()?)
            };
            Ok(ManifestEntry {
                path: row.path,
                label,
            })
        })
        .collect()
}

pub fn write_manifest<W: Write>(writer: W, entries: &[ManifestEntry]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["path", "label"])?;
    for e in entries {
        let label = e.label.map(|l| l.name()).unwrap_or("");
        wtr.write_record([e.path.as_str(), label])?;
    }
    wtr.flush().map_err(|e| Error::io("<manifest>", e))?;
    Ok(())
}
