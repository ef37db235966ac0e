//! Loading command inputs: manifests of masks or measurement tables.

use std::path::{Path, PathBuf};

use bodyshape::anthro::DatasetTable;
use bodyshape::silhouette::{extract_measurements, load_mask, read_manifest, ManifestEntry};
use bodyshape::{BodyMeasurements, Mask, ShapeLabel};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

pub enum Input {
    Manifest { base: PathBuf, entries: Vec<ManifestEntry> },
    Table(DatasetTable),
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn is_manifest(bytes: &[u8]) -> bool {
    let first = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    String::from_utf8_lossy(first).trim() == "path,label"
}

/// Manifest (`path,label` header) or any numeric CSV.
pub fn read_input(path: &Path) -> CliResult<Input> {
    let bytes = read_bytes(path)?;
    if is_manifest(&bytes) {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Input::Manifest {
            base,
            entries: read_manifest(bytes.as_slice())?,
        })
    } else {
        Ok(Input::Table(DatasetTable::read_csv(bytes.as_slice())?))
    }
}

pub fn read_table(path: &Path) -> CliResult<DatasetTable> {
    match read_input(path)? {
        Input::Table(t) => Ok(t),
        Input::Manifest { .. } => Err(CliError::usage(format!("{} is a manifest, expected a table", path.display()))),
    }
}

pub fn read_manifest_at(path: &Path) -> CliResult<(PathBuf, Vec<ManifestEntry>)> {
    match read_input(path)? {
        Input::Manifest { base, entries } => Ok((base, entries)),
        Input::Table(_) => Err(CliError::usage(format!(
            "{} is not a manifest (header `path,label`)",
            path.display()
        ))),
    }
}

/// Measurements with row identifiers; failed masks are listed separately.
pub struct Measured {
    pub ids: Vec<String>,
    pub measurements: Vec<BodyMeasurements>,
    pub labels: Vec<Option<ShapeLabel>>,
    pub failures: Vec<(String, String)>,
}

impl Measured {
    /// Labels as ordinals; errors when any row is unlabeled.
    pub fn ordinals(&self) -> CliResult<Vec<usize>> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| l.map(ShapeLabel::ordinal).ok_or_else(|| CliError::data(format!("row {} ({}) has no label", i, self.ids[i]))))
            .collect()
    }

    pub fn table(&self) -> CliResult<DatasetTable> {
        Ok(DatasetTable::from_measurements(&self.measurements, self.labels.clone())?)
    }
}

pub fn mask_path(base: &Path, entry: &ManifestEntry) -> PathBuf {
    base.join(&entry.path)
}

/// Per-mask extraction on the worker pool; output keeps manifest order.
pub fn measure_manifest(base: &Path, entries: &[ManifestEntry]) -> Measured {
    let results: Vec<_> = entries
        .par_iter()
        .map(|e| load_mask(mask_path(base, e)).and_then(|m| extract_measurements(&m)))
        .collect();
    let mut out = Measured {
        ids: Vec::new(),
        measurements: Vec::new(),
        labels: Vec::new(),
        failures: Vec::new(),
    };
    for (e, r) in entries.iter().zip(results) {
        match r {
            Ok(m) => {
                out.ids.push(e.path.clone());
                out.measurements.push(m);
                out.labels.push(e.label);
            }
            Err(err) => out.failures.push((e.path.clone(), err.to_string())),
        }
    }
    out
}

pub fn measured_from_table(table: &DatasetTable) -> CliResult<Measured> {
    Ok(Measured {
        ids: (0..table.len()).map(|i| i.to_string()).collect(),
        measurements: table.measurements()?,
        labels: table.labels().to_vec(),
        failures: Vec::new(),
    })
}

pub fn measured_input(path: &Path) -> CliResult<Measured> {
    match read_input(path)? {
        Input::Manifest { base, entries } => {
            let m = measure_manifest(&base, &entries);
            if m.measurements.is_empty() && !entries.is_empty() {
                return Err(CliError::data(format!("no mask in {} could be measured", path.display())));
            }
            Ok(m)
        }
        Input::Table(t) => measured_from_table(&t),
    }
}

pub fn load_masks(base: &Path, entries: &[ManifestEntry]) -> CliResult<Vec<Mask>> {
    entries
        .par_iter()
        .map(|e| load_mask(mask_path(base, e)).map_err(CliError::from))
        .collect()
}
