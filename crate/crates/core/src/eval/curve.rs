use std::path::Path;

use crate::error::{Error, Result};
use crate::neural::{EpochRecord, LossCurve};

const HEADER: [&str; 4] = ["epoch", "train_loss", "val_loss", "val_accuracy"];

/// CSV text: header plus one full-precision row per epoch.
pub fn curve_csv(curve: &LossCurve) -> Result<String> {
    if curve.is_empty() {
        return Err(Error::invalid("empty loss curve"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in &curve.records {
        w.write_record([
            r.epoch.to_string(),
            r.train_loss.to_string(),
            r.val_loss.to_string(),
            r.val_accuracy.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn export_curves(curve: &LossCurve, path: &Path) -> Result<()> {
    std::fs::write(path, curve_csv(curve)?).map_err(|e| Error::io(path, e))
}

pub fn read_curves(path: &Path) -> Result<LossCurve> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(HEADER) {
        return Err(Error::invalid(format!("loss curve header must be {}", HEADER.join(","))));
    }
    let records = r.deserialize::<EpochRecord>().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(LossCurve { records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(n: usize) -> LossCurve {
        LossCurve {
            records: (1..=n)
                .map(|e| EpochRecord {
                    epoch: e,
                    train_loss: 1.0 / (e as f64 + 0.1),
                    val_loss: std::f64::consts::PI / e as f64,
                    val_accuracy: 1.0 - 1.0 / (3.0 * e as f64),
                })
                .collect(),
        }
    }

    #[test]
    fn single_epoch_is_two_lines() {
        assert_eq!(curve_csv(&curve(1)).unwrap().lines().count(), 2);
        assert!(curve_csv(&LossCurve::default()).is_err());
    }

    #[test]
    fn file_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        let c = curve(7);
        export_curves(&c, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("epoch,train_loss,val_loss,val_accuracy\n"));
        let back = read_curves(&path).unwrap();
        assert_eq!(back, c);
        assert!(back.records.windows(2).all(|w| w[0].epoch < w[1].epoch));
    }
}
