//! Output directory handling. Every file is written to a temporary sibling
//! and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use bodyshape::eval::{render_report, ClassificationReport, ConfusionMatrix, ReportStyle};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub struct Output {
    dir: PathBuf,
    quiet: bool,
    stamp: bool,
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".bodyshape-")
        .tempfile_in(dir)
        .map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

impl Output {
    pub fn create(dir: PathBuf, quiet: bool, stamp: bool) -> CliResult<Self> {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self { dir, quiet, stamp })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, bytes: impl AsRef<[u8]>) -> CliResult<PathBuf> {
        let path = self.path(name);
        write_atomic(&path, bytes.as_ref())?;
        Ok(path)
    }

    /// Pretty JSON with a trailing newline; `generated_at` is added under `--stamp`.
    pub fn write_json(&self, name: &str, value: &impl serde::Serialize) -> CliResult<PathBuf> {
        let mut v = serde_json::to_value(value)?;
        if self.stamp {
            if let Value::Object(map) = &mut v {
                map.insert("generated_at".into(), Value::from(unix_seconds()));
            }
        }
        let mut text = serde_json::to_string_pretty(&v)?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn write_csv(&self, name: &str, header: &[String], rows: &[Vec<String>]) -> CliResult<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::data(e.to_string()))?;
        self.write(name, bytes)
    }

    /// `report.json`, `report.txt` and `confusion.csv`.
    pub fn write_report(&self, cm: &ConfusionMatrix, rep: &ClassificationReport) -> CliResult<()> {
        let json: Value = serde_json::from_str(&render_report(rep, ReportStyle::Json))?;
        self.write_json("report.json", &json)?;
        self.write("report.txt", render_report(rep, ReportStyle::Text))?;
        let mut header = vec!["actual\\predicted".to_string()];
        header.extend(rep.classes.iter().cloned());
        let rows: Vec<Vec<String>> = rep
            .classes
            .iter()
            .zip(cm.counts())
            .map(|(name, row)| std::iter::once(name.clone()).chain(row.iter().map(u64::to_string)).collect())
            .collect();
        self.write_csv("confusion.csv", &header, &rows)?;
        Ok(())
    }

    pub fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            // A closed pipe (e.g. `| head`) is not an error worth failing on.
            let _ = writeln!(std::io::stdout(), "{}", msg.as_ref());
        }
    }
}

fn unix_seconds() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn stamp_only_when_requested() {
        let dir = tempfile::tempdir().unwrap();
        let plain = Output::create(dir.path().into(), true, false).unwrap();
        let p = plain.write_json("x.json", &serde_json::json!({"a": 1})).unwrap();
        assert!(!std::fs::read_to_string(&p).unwrap().contains("generated_at"));
        let stamped = Output::create(dir.path().into(), true, true).unwrap();
        let p = stamped.write_json("x.json", &serde_json::json!({"a": 1})).unwrap();
        assert!(std::fs::read_to_string(&p).unwrap().contains("generated_at"));
    }
}
